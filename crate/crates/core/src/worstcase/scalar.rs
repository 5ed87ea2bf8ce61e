use std::f64::consts::PI;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::optim::golden_section_max;
use crate::optim::golden_section_min;
use crate::parallel::map_range;
use crate::{Error, Result};

/// Largest supported key length.
pub const MAX_KEY_BITS: u32 = 16;

/// `r mod [a, b)`: the unique `r - i (b - a)` in `[a, b)`.
pub fn mod_interval(r: f64, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::config(format!("mod_interval needs a < b, got [{a}, {b})")));
    }
    let width = b - a;
    let out = r - ((r - a) / width).floor() * width;
    // Rounding can land exactly on the open end.
    Ok(if out >= b || out < a { a } else { out })
}

/// `k`-bit shift+mirror codec with window `[-θ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "CodecDoc")]
pub struct ShiftMirrorCodec {
    k: u32,
    theta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodecDoc {
    k: u32,
    theta: f64,
}

impl TryFrom<CodecDoc> for ShiftMirrorCodec {
    type Error = Error;
    fn try_from(d: CodecDoc) -> Result<Self> {
        ShiftMirrorCodec::new(d.k, d.theta)
    }
}

impl ShiftMirrorCodec {
    pub fn new(k: u32, theta: f64) -> Result<Self> {
        if !(1..=MAX_KEY_BITS).contains(&k) {
            return Err(Error::config(format!(
                "k must be in [1, {MAX_KEY_BITS}], got {k}"
            )));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::config(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        Ok(ShiftMirrorCodec { k, theta })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn key_count(&self) -> u32 {
        1 << self.k
    }

    /// Width `2θ / 2^k` of one sub-window.
    pub fn sub_width(&self) -> f64 {
        2.0 * self.theta / self.key_count() as f64
    }

    fn in_window(&self, x: f64) -> bool {
        -self.theta <= x && x < self.theta
    }

    /// Sub-window boundaries `-θ + j w`, `j = 0..=2^k`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let w = self.sub_width();
        (0..=self.key_count())
            .map(|j| -self.theta + j as f64 * w)
            .collect()
    }
}

/// A `k`-bit key, used by its decimal value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyWord {
    decimal: u32,
    k: u32,
}

impl KeyWord {
    pub fn new(decimal: u32, k: u32) -> Result<Self> {
        if !(1..=MAX_KEY_BITS).contains(&k) {
            return Err(Error::config(format!(
                "k must be in [1, {MAX_KEY_BITS}], got {k}"
            )));
        }
        if decimal >= 1 << k {
            return Err(Error::config(format!("key {decimal} does not fit in {k} bits")));
        }
        Ok(KeyWord { decimal, k })
    }

    /// Parses a binary string such as `"011"`, most significant bit first.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let k = bits.len() as u32;
        if k == 0 || !bits.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(Error::config(format!("not a bit string: {bits:?}")));
        }
        let decimal = u32::from_str_radix(bits, 2).map_err(|e| Error::config(e.to_string()))?;
        Self::new(decimal, k)
    }

    /// Draws a uniform key. Pass an external CSPRNG here for real key material.
    pub fn random(k: u32, rng: &mut dyn RngCore) -> Result<Self> {
        Self::new(0, k)?;
        Ok(KeyWord {
            decimal: rng.random_range(0..1u32 << k),
            k,
        })
    }

    pub fn decimal(&self) -> u32 {
        self.decimal
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn bits(&self) -> String {
        format!("{:0width$b}", self.decimal, width = self.k as usize)
    }

    fn check(&self, codec: &ShiftMirrorCodec) -> Result<()> {
        if self.k != codec.k {
            return Err(Error::config(format!(
                "key has {} bits but the codec uses {}",
                self.k, codec.k
            )));
        }
        Ok(())
    }

    fn reflects(&self) -> bool {
        self.decimal >= 1 << (self.k - 1)
    }
}

pub fn encode_scalar(x: f64, key: KeyWord, codec: &ShiftMirrorCodec) -> Result<f64> {
    key.check(codec)?;
    if !x.is_finite() {
        return Err(Error::config(format!("cannot encode non-finite value {x}")));
    }
    if x == codec.theta {
        return Err(Error::ExcludedPoint(x));
    }
    if codec.in_window(x) {
        let shifted = x + key.decimal as f64 * codec.sub_width();
        mod_interval(shifted, -codec.theta, codec.theta)
    } else if key.reflects() {
        Ok(-x)
    } else {
        Ok(x)
    }
}

pub fn decode_scalar(z: f64, key: KeyWord, codec: &ShiftMirrorCodec) -> Result<f64> {
    key.check(codec)?;
    if codec.in_window(z) {
        let shifted = z - key.decimal as f64 * codec.sub_width();
        mod_interval(shifted, -codec.theta, codec.theta)
    } else if key.reflects() {
        Ok(-z)
    } else {
        Ok(z)
    }
}

/// Scalar prior density known to the eavesdropper.
pub trait ScalarPrior: Send + Sync {
    fn ln_density(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StandardNormal;

impl ScalarPrior for StandardNormal {
    fn ln_density(&self, x: f64) -> f64 {
        -0.5 * x * x - 0.5 * (2.0 * PI).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mean: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::config(format!("invalid normal prior N({mean}, {sd}²)")));
        }
        Ok(Normal { mean, sd })
    }
}

impl ScalarPrior for Normal {
    fn ln_density(&self, x: f64) -> f64 {
        StandardNormal.ln_density((x - self.mean) / self.sd) - self.sd.ln()
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> ScalarPrior for F {
    fn ln_density(&self, x: f64) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub x: f64,
    pub weight: f64,
    /// Number of keys that decode the codeword to `x`.
    pub multiplicity: u32,
}

/// Distinct preimages of a codeword with their posterior weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageSet {
    pub candidates: Vec<Candidate>,
}

impl PreimageSet {
    pub fn mean(&self) -> f64 {
        self.candidates.iter().map(|c| c.weight * c.x).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.candidates
            .iter()
            .map(|c| c.weight * (c.x - m) * (c.x - m))
            .sum()
    }
}

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Decodes `z` under every key; keys are uniform, so each distinct preimage
/// is weighted by its prior density times the number of keys reaching it.
pub fn preimages(z: f64, codec: &ShiftMirrorCodec, prior: &dyn ScalarPrior) -> Result<PreimageSet> {
    let mut points: Vec<(f64, u32)> = Vec::new();
    for d in 0..codec.key_count() {
        let x = decode_scalar(
            z,
            KeyWord {
                decimal: d,
                k: codec.k,
            },
            codec,
        )?;
        match points.iter_mut().find(|(p, _)| same_point(*p, x)) {
            Some((_, m)) => *m += 1,
            None => points.push((x, 1)),
        }
    }
    let ln_w: Vec<f64> = points
        .iter()
        .map(|&(x, m)| prior.ln_density(x) + (m as f64).ln())
        .collect();
    let top = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY || top.is_nan() {
        return Err(Error::UndefinedPosterior);
    }
    let raw: Vec<f64> = ln_w.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    let candidates = points
        .iter()
        .zip(&raw)
        .map(|(&(x, multiplicity), w)| Candidate {
            x,
            weight: w / total,
            multiplicity,
        })
        .collect();
    Ok(PreimageSet { candidates })
}

/// `Var(X | Z = z)`.
pub fn posterior_variance(z: f64, codec: &ShiftMirrorCodec, prior: &dyn ScalarPrior) -> Result<f64> {
    Ok(preimages(z, codec, prior)?.variance())
}

/// Codeword grid for [`worst_case_distortion`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub zmax: f64,
    pub step: f64,
    pub refine_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            zmax: 6.0,
            step: 1e-3,
            refine_tol: 1e-6,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.zmax > 0.0 && self.step > 0.0 && self.refine_tol > 0.0)
            || !(self.zmax.is_finite() && self.step.is_finite())
        {
            return Err(Error::config(format!("invalid grid {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub d_w: f64,
    /// Codeword attaining the minimum.
    pub z: f64,
}

/// Offset used to probe one-sided limits at sub-window boundaries.
const EDGE_PROBE: f64 = 1e-9;

/// `D_W = min_z Var(X | Z = z)`, scanning `[-zmax, zmax]` and then refining
/// around the best grid point. The range is widened to cover the whole
/// window plus one step, and every sub-window boundary (and its one-sided
/// neighbours) is evaluated too since the variance jumps there.
pub fn worst_case_distortion(
    codec: &ShiftMirrorCodec,
    prior: &dyn ScalarPrior,
    grid: &GridSpec,
) -> Result<WorstCase> {
    grid.validate()?;
    let zmax = grid.zmax.max(codec.theta + grid.step);
    let n = (2.0 * zmax / grid.step).ceil() as usize + 1;
    let extra: Vec<f64> = codec
        .breakpoints()
        .into_iter()
        .flat_map(|b| [b - EDGE_PROBE, b, b + EDGE_PROBE])
        .collect();
    let var_at = |z: f64| posterior_variance(z, codec, prior).ok();
    let mut values = map_range(n, |i| {
        let z = (-zmax + i as f64 * grid.step).min(zmax);
        (z, var_at(z))
    });
    values.extend(extra.iter().map(|&z| (z, var_at(z))));
    let Some((z0, v0)) = values.iter().filter_map(|&(z, v)| v.map(|v| (z, v))).fold(
        None,
        |best: Option<(f64, f64)>, (z, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((z, v)),
        },
    ) else {
        return Err(Error::UndefinedPosterior);
    };
    let refined = golden_section_min(
        |z| var_at(z).unwrap_or(f64::INFINITY),
        z0 - grid.step,
        z0 + grid.step,
        grid.refine_tol,
    );
    Ok(if refined.value < v0 {
        WorstCase {
            d_w: refined.value,
            z: refined.x,
        }
    } else {
        WorstCase { d_w: v0, z: z0 }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaOptimum {
    pub k: u32,
    pub theta: f64,
    pub d_w: f64,
}

/// Upper end of the θ search interval.
pub const THETA_MAX: f64 = 10.0;
const THETA_SCAN_STEP: f64 = 0.05;
const THETA_TOL: f64 = 1e-3;

/// θ maximizing the worst-case distortion for a `k`-bit codec on `(0, 10]`.
///
/// `D_W(θ)` is not unimodal in general, so a coarse scan picks the bracket
/// and golden-section search refines inside it.
pub fn optimize_theta(k: u32, prior: &dyn ScalarPrior, grid: &GridSpec) -> Result<ThetaOptimum> {
    if !(1..=8).contains(&k) {
        return Err(Error::config(format!(
            "optimize_theta supports k in [1, 8], got {k}"
        )));
    }
    let d_w = |theta: f64| {
        ShiftMirrorCodec::new(k, theta)
            .and_then(|c| worst_case_distortion(&c, prior, grid))
            .map(|w| w.d_w)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let steps = (THETA_MAX / THETA_SCAN_STEP).round() as usize;
    let scan: Vec<(f64, f64)> = (1..=steps)
        .map(|i| {
            let theta = i as f64 * THETA_SCAN_STEP;
            (theta, d_w(theta))
        })
        .collect();
    let (t0, v0) = scan.iter().copied().fold(
        (f64::NAN, f64::NEG_INFINITY),
        |b, c| if c.1 > b.1 { c } else { b },
    );
    if v0 == f64::NEG_INFINITY {
        return Err(Error::UndefinedPosterior);
    }
    let lo = (t0 - THETA_SCAN_STEP).max(THETA_SCAN_STEP * 1e-3);
    let hi = (t0 + THETA_SCAN_STEP).min(THETA_MAX);
    let best = golden_section_max(d_w, lo, hi, THETA_TOL);
    Ok(if best.value > v0 {
        ThetaOptimum {
            k,
            theta: best.x,
            d_w: best.value,
        }
    } else {
        ThetaOptimum {
            k,
            theta: t0,
            d_w: v0,
        }
    })
}

/// `(θ, D_W)` for θ = lo, lo + step, ..., ≤ hi.
pub fn theta_sweep(
    k: u32,
    prior: &dyn ScalarPrior,
    lo: f64,
    hi: f64,
    step: f64,
    grid: &GridSpec,
) -> Result<Vec<(f64, f64)>> {
    let thetas = range_points(lo, hi, step)?;
    thetas
        .into_iter()
        .map(|theta| {
            let codec = ShiftMirrorCodec::new(k, theta)?;
            Ok((theta, worst_case_distortion(&codec, prior, grid)?.d_w))
        })
        .collect()
}

/// `(z, Var(X | Z = z))` over a codeword range; codewords with no
/// possible preimage are skipped.
pub fn variance_profile(
    codec: &ShiftMirrorCodec,
    prior: &dyn ScalarPrior,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>> {
    let zs = range_points(lo, hi, step)?;
    Ok(map_range(zs.len(), |i| {
        (zs[i], posterior_variance(zs[i], codec, prior).ok())
    })
    .into_iter()
    .filter_map(|(z, v)| v.map(|v| (z, v)))
    .collect())
}

/// `lo, lo + step, ...` up to `hi` (inclusive within rounding).
pub fn range_points(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::config(format!(
            "empty or invalid range {lo}..{hi} step {step}"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}
