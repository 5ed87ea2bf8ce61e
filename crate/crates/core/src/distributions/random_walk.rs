use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use super::{DistributionKind, StateDistribution, SupportPoint};
use crate::dynamics::GaussianSpec;
use crate::{Error, Result};

/// Lazy random walk on the integers `[-a, a]`.
///
/// `X_1` is uniform on `[-a, a]` and `X_t` is uniform on
/// `{X_{t-1} - 1, X_{t-1}, X_{t-1} + 1} ∩ [-a, a]`. Masses are exact
/// rationals; the `f64` trait methods round them.
#[derive(Debug, Clone)]
pub struct RandomWalk {
    a: i64,
    horizon: usize,
    marginals: Vec<Vec<BigRational>>,
}

pub fn random_walk_prior(a: i64, horizon: usize) -> Result<RandomWalk> {
    RandomWalk::new(a, horizon)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RandomWalk {
    pub fn new(a: i64, horizon: usize) -> Result<Self> {
        if a < 1 {
            return Err(Error::config(format!(
                "random walk half-width must be >= 1, got {a}"
            )));
        }
        if horizon < 1 {
            return Err(Error::config("random walk horizon must be >= 1"));
        }
        let width = (2 * a + 1) as usize;
        let mut marginals = Vec::with_capacity(horizon);
        marginals.push(vec![ratio(1, 2 * a + 1); width]);
        for t in 1..horizon {
            let prev = &marginals[t - 1];
            let mut next = vec![BigRational::zero(); width];
            for (i, p) in prev.iter().enumerate() {
                let x = i as i64 - a;
                let succ = Self::successors_of(a, x);
                let share = p / BigInt::from(succ.len());
                for y in succ {
                    next[(y + a) as usize] += &share;
                }
            }
            marginals.push(next);
        }
        Ok(RandomWalk {
            a,
            horizon,
            marginals,
        })
    }

    pub fn half_width(&self) -> i64 {
        self.a
    }

    fn successors_of(a: i64, x: i64) -> Vec<i64> {
        (x - 1..=x + 1).filter(|y| y.abs() <= a).collect()
    }

    pub fn successors(&self, x: i64) -> Vec<i64> {
        Self::successors_of(self.a, x)
    }

    pub fn initial_mass(&self, x: i64) -> BigRational {
        if x.abs() <= self.a {
            ratio(1, 2 * self.a + 1)
        } else {
            BigRational::zero()
        }
    }

    /// `P(X_t = x | X_{t-1} = prev)`.
    pub fn transition_mass(&self, x: i64, prev: i64) -> BigRational {
        if prev.abs() > self.a || x.abs() > self.a || (x - prev).abs() > 1 {
            return BigRational::zero();
        }
        ratio(1, self.successors(prev).len() as i64)
    }

    /// Exact marginal `P(X_t = x)` for 1-based `t`.
    pub fn marginal(&self, t: usize, x: i64) -> BigRational {
        if x.abs() > self.a {
            return BigRational::zero();
        }
        self.marginals[t - 1][(x + self.a) as usize].clone()
    }

    /// Exact mass of an integer path.
    pub fn path_mass(&self, path: &[i64]) -> BigRational {
        if path.len() != self.horizon {
            return BigRational::zero();
        }
        let mut mass = self.initial_mass(path[0]);
        for w in path.windows(2) {
            if mass.is_zero() {
                break;
            }
            mass *= self.transition_mass(w[1], w[0]);
        }
        mass
    }

    /// All positive-mass integer paths, in lexicographic order.
    pub fn enumerate_paths(&self, budget: u128) -> Result<Vec<(Vec<i64>, BigRational)>> {
        let bound = (2 * self.a + 1) as u128 * 3u128.saturating_pow(self.horizon as u32 - 1);
        if bound > budget {
            return Err(Error::BudgetExceeded {
                needed: bound,
                budget,
            });
        }
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(self.horizon);
        for x in -self.a..=self.a {
            stack.push(x);
            self.extend(&mut stack, self.initial_mass(x), &mut out);
            stack.pop();
        }
        Ok(out)
    }

    fn extend(&self, stack: &mut Vec<i64>, mass: BigRational, out: &mut Vec<(Vec<i64>, BigRational)>) {
        if stack.len() == self.horizon {
            out.push((stack.clone(), mass));
            return;
        }
        let last = *stack.last().expect("non-empty path");
        let succ = self.successors(last);
        let step = ratio(1, succ.len() as i64);
        for y in succ {
            stack.push(y);
            self.extend(stack, &mass * &step, out);
            stack.pop();
        }
    }

    fn integer_path(&self, path: &[DVector<f64>]) -> Option<Vec<i64>> {
        if path.len() != self.horizon {
            return None;
        }
        path.iter()
            .map(|x| {
                if x.len() != 1 || x[0].fract() != 0.0 {
                    None
                } else {
                    Some(x[0] as i64)
                }
            })
            .collect()
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl StateDistribution for RandomWalk {
    fn kind(&self) -> DistributionKind {
        DistributionKind::DiscreteMarkov
    }

    fn state_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn ln_density(&self, path: &[DVector<f64>]) -> f64 {
        match self.integer_path(path) {
            Some(p) => to_f64(&self.path_mass(&p)).ln(),
            None => f64::NEG_INFINITY,
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<DVector<f64>> {
        let mut x = rng.random_range(-self.a..=self.a);
        let mut out = vec![DVector::from_element(1, x as f64)];
        for _ in 1..self.horizon {
            let succ = self.successors(x);
            x = succ[rng.random_range(0..succ.len())];
            out.push(DVector::from_element(1, x as f64));
        }
        out
    }

    fn per_time_moments(&self) -> Vec<GaussianSpec> {
        (1..=self.horizon)
            .map(|t| {
                let mut mean = BigRational::zero();
                let mut second = BigRational::zero();
                for x in -self.a..=self.a {
                    let p = self.marginal(t, x);
                    let xr = BigRational::from_integer(BigInt::from(x));
                    mean += &p * &xr;
                    second += &p * &xr * &xr;
                }
                let var = &second - &mean * &mean;
                GaussianSpec {
                    mean: DVector::from_element(1, to_f64(&mean)),
                    cov: DMatrix::from_element(1, 1, to_f64(&var)),
                }
            })
            .collect()
    }

    fn support(&self, budget: u128) -> Result<Option<Vec<SupportPoint>>> {
        let paths = self.enumerate_paths(budget)?;
        Ok(Some(
            paths
                .into_iter()
                .map(|(p, m)| SupportPoint {
                    path: p.iter().map(|&x| DVector::from_element(1, x as f64)).collect(),
                    mass: to_f64(&m),
                    record: None,
                })
                .collect(),
        ))
    }
}

impl RandomWalk {
    /// Checks that every marginal sums to exactly one.
    pub fn marginals_normalized(&self) -> bool {
        self.marginals
            .iter()
            .all(|m| m.iter().fold(BigRational::zero(), |acc, p| acc + p).is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_start() {
        let w = RandomWalk::new(1, 1).unwrap();
        for x in -1..=1 {
            assert_eq!(w.marginal(1, x), ratio(1, 3));
        }
    }

    #[test]
    fn second_step_center_mass() {
        // 1/3·1/2 + 1/3·1/3 + 1/3·1/2
        let w = RandomWalk::new(1, 2).unwrap();
        let expected = ratio(1, 6) + ratio(1, 9) + ratio(1, 6);
        assert_eq!(w.marginal(2, 0), expected);
    }

    #[test]
    fn masses_sum_to_one_exactly() {
        for a in 1..4 {
            for t in 1..7 {
                assert!(RandomWalk::new(a, t).unwrap().marginals_normalized());
            }
        }
    }

    #[test]
    fn markov_symmetry_holds_exactly() {
        let w = RandomWalk::new(3, 4).unwrap();
        for x in -4..=4 {
            assert_eq!(w.initial_mass(x), w.initial_mass(-x));
            for y in -4..=4 {
                assert_eq!(w.transition_mass(x, y), w.transition_mass(-x, -y));
            }
        }
    }

    #[test]
    fn enumeration_sums_to_one() {
        let w = RandomWalk::new(2, 4).unwrap();
        let paths = w.enumerate_paths(1 << 20).unwrap();
        let total = paths.iter().fold(BigRational::zero(), |acc, (_, m)| acc + m);
        assert!(total.is_one());
        assert!(paths.iter().all(|(p, m)| w.path_mass(p) == *m));
    }

    #[test]
    fn budget_is_enforced() {
        let w = RandomWalk::new(5, 20).unwrap();
        assert!(matches!(
            w.enumerate_paths(1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn variance_of_uniform_start() {
        let w = RandomWalk::new(2, 1).unwrap();
        let m = w.per_time_moments();
        assert_eq!(m[0].cov[(0, 0)], 2.0);
        assert_eq!(m[0].mean[0], 0.0);
    }

    #[test]
    fn non_integer_paths_have_no_mass() {
        let w = RandomWalk::new(2, 2).unwrap();
        let p = [DVector::from_element(1, 0.5), DVector::from_element(1, 0.0)];
        assert_eq!(w.density(&p), 0.0);
        let jump = [DVector::from_element(1, -2.0), DVector::from_element(1, 0.0)];
        assert_eq!(w.density(&jump), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RandomWalk::new(0, 3).is_err());
        assert!(RandomWalk::new(2, 0).is_err());
    }
}
