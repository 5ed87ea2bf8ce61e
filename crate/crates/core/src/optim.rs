//! Golden-section search on a closed interval.

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// The returned point is the best one evaluated, so for non-unimodal `f`
/// the result is still a valid upper bound on the minimum over the bracket.
pub fn golden_section_min<F>(f: F, lo: f64, hi: f64, tol: f64) -> Extremum
where
    F: Fn(f64) -> f64,
{
    assert!(lo <= hi, "golden_section_min: empty bracket [{lo}, {hi}]");
    assert!(tol > 0.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    let (mut best_x, mut best_v) = if fc <= fd { (c, fc) } else { (d, fd) };

    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best_v {
                best_x = c;
                best_v = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best_v {
                best_x = d;
                best_v = fd;
            }
        }
        evaluations += 1;
    }
    Extremum {
        x: best_x,
        value: best_v,
        evaluations,
    }
}

/// Maximizes `f` on `[lo, hi]`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> Extremum
where
    F: Fn(f64) -> f64,
{
    let e = golden_section_min(|x| -f(x), lo, hi, tol);
    Extremum { value: -e.value, ..e }
}
