//! Priors over state trajectories, as seen by the eavesdropper.
//!
//! A path is a slice of per-time states `X_1..X_T`. Densities are joint
//! densities (or masses, for discrete kinds) of the whole path and are
//! evaluated in log space; `f64::NEG_INFINITY` means "outside the support".

mod empirical;
mod gaussian;
mod random_walk;

pub use empirical::{
    empirical_from_corpus, read_corpus_ndjson, write_corpus_ndjson, BinGrid, EmpiricalGrid, JointModel,
};
pub use gaussian::{gaussian_trajectory_prior, GaussianTrajectory, InitialState};
pub use random_walk::{random_walk_prior, RandomWalk};

use nalgebra::DVector;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::dynamics::GaussianSpec;
use crate::mirroring::MirrorSchedule;
use crate::parallel::{map_range, stream_rng};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    AnalyticGaussian,
    DiscreteMarkov,
    EmpiricalGrid,
}

/// One point of a finite support together with its probability mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub path: Vec<DVector<f64>>,
    pub mass: f64,
    /// Identifies the corpus record behind this point, for held-out density
    /// evaluation. `None` for analytically enumerated supports.
    pub record: Option<usize>,
}

pub trait StateDistribution: Send + Sync {
    fn kind(&self) -> DistributionKind;

    /// Dimension of each per-time state.
    fn state_dim(&self) -> usize;

    fn horizon(&self) -> usize;

    /// Log joint density (or mass) of a full path.
    fn ln_density(&self, path: &[DVector<f64>]) -> f64;

    fn density(&self, path: &[DVector<f64>]) -> f64 {
        self.ln_density(path).exp()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<DVector<f64>>;

    /// `(μ_{X_t}, R_{X_t})` for `t = 1..T`.
    fn per_time_moments(&self) -> Vec<GaussianSpec>;

    /// Enumerates the support when it is finite. Returns `Ok(None)` for
    /// continuous distributions and an error if the support is larger than
    /// `budget` points.
    fn support(&self, budget: u128) -> Result<Option<Vec<SupportPoint>>> {
        let _ = budget;
        Ok(None)
    }

    /// Log density with the given record removed from whatever data the
    /// distribution was estimated from. Analytic kinds ignore `record`.
    fn ln_density_held_out(&self, path: &[DVector<f64>], record: usize) -> f64 {
        let _ = record;
        self.ln_density(path)
    }
}

/// Result of [`symmetry_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `max |f(X) - f(X̃)| / max(f(X), f(X̃), ε)` over the sampled paths.
    pub max_discrepancy: f64,
    pub samples: usize,
}

/// Floor on the discrepancy denominator.
pub const SYMMETRY_EPSILON: f64 = 1e-300;

/// Relative density discrepancy between two log densities.
pub fn relative_discrepancy(ln_f: f64, ln_g: f64) -> f64 {
    let (hi, lo) = if ln_f >= ln_g { (ln_f, ln_g) } else { (ln_g, ln_f) };
    if hi == f64::NEG_INFINITY {
        return 0.0;
    }
    if hi.exp() < SYMMETRY_EPSILON && hi.is_finite() {
        // Both densities below the floor: compare on the linear scale.
        return (hi.exp() - lo.exp()).abs() / SYMMETRY_EPSILON;
    }
    -(lo - hi).exp_m1()
}

/// Empirically checks `f_X(X) = f_X(X̃)` on `sample_count` draws.
pub fn symmetry_check(
    dist: &dyn StateDistribution,
    mirrors: &MirrorSchedule,
    sample_count: usize,
    seed: u64,
) -> Result<SymmetryReport> {
    mirrors.check_compatible(dist.state_dim(), dist.horizon())?;
    let discrepancies = map_range(sample_count, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let x = dist.sample(&mut rng);
        let mirrored = mirrors.reflect_path(&x);
        relative_discrepancy(dist.ln_density(&x), dist.ln_density(&mirrored))
    });
    Ok(SymmetryReport {
        max_discrepancy: discrepancies.into_iter().fold(0.0, f64::max),
        samples: sample_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrepancy_edge_cases() {
        assert_eq!(relative_discrepancy(f64::NEG_INFINITY, f64::NEG_INFINITY), 0.0);
        assert_eq!(relative_discrepancy(0.0, f64::NEG_INFINITY), 1.0);
        assert_eq!(relative_discrepancy(-3.0, -3.0), 0.0);
        let d = relative_discrepancy(0.5f64.ln(), 0.25f64.ln());
        assert!((d - 0.5).abs() < 1e-15);
    }
}
