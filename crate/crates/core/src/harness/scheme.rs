use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::Rng;

use super::report::{DistortionReport, PerTime};
use crate::distributions::StateDistribution;
use crate::mirroring::{conditional_distortion, KeyBit, MirrorSchedule};
use crate::parallel::{map_range, map_slice, stream_rng};
use crate::stats::{pairwise_sum, Method, Summary};
use crate::{Error, Result};

/// An encoder together with the eavesdropper's optimal estimator for it.
pub trait Scheme: Send + Sync {
    fn label(&self) -> String;

    /// Number of equally likely keys.
    fn key_count(&self) -> u64;

    fn encode(&self, path: &[DVector<f64>], key: u64) -> Result<Vec<DVector<f64>>>;

    /// Per-time `D(t, Z) = tr Cov(X_t | Z)` as seen by the eavesdropper.
    fn eve_distortion(&self, codeword: &[DVector<f64>], prior: &dyn StateDistribution) -> Result<Vec<f64>>;
}

/// Sends the state in the clear.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityScheme;

impl Scheme for IdentityScheme {
    fn label(&self) -> String {
        "identity".into()
    }

    fn key_count(&self) -> u64 {
        1
    }

    fn encode(&self, path: &[DVector<f64>], _key: u64) -> Result<Vec<DVector<f64>>> {
        Ok(path.to_vec())
    }

    fn eve_distortion(&self, codeword: &[DVector<f64>], _prior: &dyn StateDistribution) -> Result<Vec<f64>> {
        Ok(vec![0.0; codeword.len()])
    }
}

/// Sends nothing; the eavesdropper falls back on the prior.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoObservation;

impl Scheme for NoObservation {
    fn label(&self) -> String {
        "no-observation".into()
    }

    fn key_count(&self) -> u64 {
        1
    }

    fn encode(&self, _path: &[DVector<f64>], _key: u64) -> Result<Vec<DVector<f64>>> {
        Ok(Vec::new())
    }

    fn eve_distortion(&self, _codeword: &[DVector<f64>], prior: &dyn StateDistribution) -> Result<Vec<f64>> {
        Ok(prior.per_time_moments().iter().map(|m| m.cov.trace()).collect())
    }
}

/// One-bit mirroring with a fixed schedule.
#[derive(Debug, Clone)]
pub struct MirrorScheme {
    pub schedule: MirrorSchedule,
}

impl Scheme for MirrorScheme {
    fn label(&self) -> String {
        "mirror".into()
    }

    fn key_count(&self) -> u64 {
        2
    }

    fn encode(&self, path: &[DVector<f64>], key: u64) -> Result<Vec<DVector<f64>>> {
        Ok(self.schedule.encode_path(path, KeyBit::from(key == 1)))
    }

    fn eve_distortion(&self, codeword: &[DVector<f64>], prior: &dyn StateDistribution) -> Result<Vec<f64>> {
        conditional_distortion(codeword, prior, &self.schedule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode {
    Exact { budget: u128 },
    MonteCarlo { samples: usize },
}

/// `(1/T) Σ_t D(t, Z)` averaged over codewords, and the minimum over `t`
/// and codewords, together with the no-observation baselines.
pub fn evaluate_scheme(
    prior: &dyn StateDistribution,
    scheme: &dyn Scheme,
    mode: EvalMode,
    seed: u64,
) -> Result<DistortionReport> {
    let horizon = prior.horizon();
    let keys = scheme.key_count();
    if keys == 0 {
        return Err(Error::config("scheme has an empty key space"));
    }
    let (d_e_max, d_w_max) = crate::mirroring::max_baselines(&prior.per_time_moments());
    let (per_time, d_e, d_e_std_error, samples, method, seed) = match mode {
        EvalMode::Exact { budget } => {
            let support = prior
                .support(budget)?
                .ok_or_else(|| Error::config("exact evaluation needs a prior with finite support"))?;
            let items: Vec<(usize, u64)> = (0..support.len())
                .flat_map(|i| (0..keys).map(move |k| (i, k)))
                .collect();
            let rows: Vec<(f64, Vec<f64>)> = map_slice(&items, |&(i, k)| {
                let pt = &support[i];
                let z = scheme.encode(&pt.path, k)?;
                Ok((pt.mass / keys as f64, scheme.eve_distortion(&z, prior)?))
            })
            .into_iter()
            .collect::<Result<_>>()?;
            let per_time: Vec<PerTime> = (0..horizon)
                .map(|t| PerTime {
                    t: t + 1,
                    mean: pairwise_sum(&rows.iter().map(|(w, d)| w * d[t]).collect::<Vec<_>>()),
                    min: rows
                        .iter()
                        .filter(|(w, _)| *w > 0.0)
                        .map(|(_, d)| d[t])
                        .fold(f64::INFINITY, f64::min),
                    std_error: None,
                })
                .collect();
            let d_e = pairwise_sum(&per_time.iter().map(|p| p.mean).collect::<Vec<_>>()) / horizon as f64;
            (per_time, d_e, None, support.len(), Method::Exact, None)
        }
        EvalMode::MonteCarlo { samples } => {
            if samples < 2 {
                return Err(Error::config("Monte Carlo evaluation needs at least 2 samples"));
            }
            let rows: Vec<Vec<f64>> = map_range(samples, |i| {
                let mut rng = stream_rng(seed, i as u64);
                let x = prior.sample(&mut rng);
                let k = rng.random_range(0..keys);
                let z = scheme.encode(&x, k)?;
                scheme.eve_distortion(&z, prior)
            })
            .into_iter()
            .collect::<Result<_>>()?;
            let per_time: Vec<PerTime> = (0..horizon)
                .map(|t| {
                    let s = Summary::of(&rows.iter().map(|d| d[t]).collect::<Vec<_>>());
                    PerTime {
                        t: t + 1,
                        mean: s.mean,
                        min: s.min,
                        std_error: Some(s.std_error),
                    }
                })
                .collect();
            let avg = Summary::of(
                &rows
                    .iter()
                    .map(|d| pairwise_sum(d) / horizon as f64)
                    .collect::<Vec<_>>(),
            );
            (
                per_time,
                avg.mean,
                Some(avg.std_error),
                samples,
                Method::MonteCarlo,
                Some(seed),
            )
        }
    };
    let d_w = per_time.iter().map(|p| p.min).fold(f64::INFINITY, f64::min);
    Ok(DistortionReport {
        label: scheme.label(),
        method,
        samples,
        seed,
        per_time,
        d_e,
        d_e_std_error,
        d_w,
        d_e_max,
        d_w_max,
        extras: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{random_walk_prior, GaussianTrajectory};
    use crate::mirroring::AffineMirror;
    use nalgebra::DMatrix;

    fn walk_mirror(b: f64) -> MirrorScheme {
        MirrorScheme {
            schedule: MirrorSchedule::constant(AffineMirror::point(DVector::from_element(1, b)), 3).unwrap(),
        }
    }

    #[test]
    fn identity_gives_no_distortion() {
        let w = random_walk_prior(2, 3).unwrap();
        let r = evaluate_scheme(&w, &IdentityScheme, EvalMode::Exact { budget: 1000 }, 0).unwrap();
        assert_eq!((r.d_e, r.d_w), (0.0, 0.0));
    }

    #[test]
    fn no_observation_hits_baseline() {
        let w = random_walk_prior(2, 3).unwrap();
        let r = evaluate_scheme(&w, &NoObservation, EvalMode::Exact { budget: 1000 }, 0).unwrap();
        assert!((r.d_e - r.d_e_max).abs() < 1e-12);
        assert!((r.d_w - r.d_w_max).abs() < 1e-12);
    }

    #[test]
    fn symmetric_mirror_hits_baseline() {
        let w = random_walk_prior(2, 3).unwrap();
        let r = evaluate_scheme(&w, &walk_mirror(0.0), EvalMode::Exact { budget: 1000 }, 0).unwrap();
        assert!((r.d_e - r.d_e_max).abs() < 1e-12);
        let shifted = evaluate_scheme(&w, &walk_mirror(1.0), EvalMode::Exact { budget: 1000 }, 0).unwrap();
        assert!(shifted.d_e < shifted.d_e_max - 1e-3);
    }

    #[test]
    fn exact_rejects_continuous_prior() {
        let g = GaussianTrajectory::new(DVector::zeros(1), DMatrix::identity(1, 1), 1).unwrap();
        let r = evaluate_scheme(&g, &IdentityScheme, EvalMode::Exact { budget: 10 }, 0);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let w = random_walk_prior(2, 3).unwrap();
        let s = walk_mirror(1.0);
        let exact = evaluate_scheme(&w, &s, EvalMode::Exact { budget: 1000 }, 0).unwrap();
        let mc = evaluate_scheme(&w, &s, EvalMode::MonteCarlo { samples: 20_000 }, 5).unwrap();
        let se = mc.d_e_std_error.unwrap();
        assert!(
            (mc.d_e - exact.d_e).abs() < 3.0 * se,
            "{} vs {} (se {se})",
            mc.d_e,
            exact.d_e
        );
    }
}
