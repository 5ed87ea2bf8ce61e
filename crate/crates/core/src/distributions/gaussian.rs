use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{DistributionKind, StateDistribution};
use crate::dynamics::{unstack, GaussianSpec, StackedDynamics};
use crate::matrix::check_psd;
use crate::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
const RANK_TOLERANCE: f64 = 1e-12;
/// Points further than this from the affine support have density zero.
pub const SUPPORT_TOLERANCE: f64 = 1e-8;

/// How `X_1` enters a Gaussian trajectory prior.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Fixed(DVector<f64>),
    Gaussian(GaussianSpec),
}

/// Gaussian over the stacked path `X = X_1^T`, possibly degenerate.
///
/// Rank-deficient covariances get the pseudo-determinant density on the
/// affine support `μ + range(R)`.
#[derive(Debug, Clone)]
pub struct GaussianTrajectory {
    state_dim: usize,
    horizon: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    basis: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    ln_norm: f64,
}

impl GaussianTrajectory {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, state_dim: usize) -> Result<Self> {
        if state_dim == 0 || !mean.len().is_multiple_of(state_dim) {
            return Err(Error::config(format!(
                "stacked dimension {} is not a multiple of state dimension {state_dim}",
                mean.len()
            )));
        }
        if cov.shape() != (mean.len(), mean.len()) {
            return Err(Error::dim("trajectory covariance", mean.len(), cov.nrows()));
        }
        check_psd(&cov, "trajectory covariance")?;
        let eig = SymmetricEigen::new(cov.clone());
        let lmax = eig.eigenvalues.max().max(0.0);
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > RANK_TOLERANCE * lmax && eig.eigenvalues[i] > 0.0)
            .collect();
        let basis = DMatrix::from_fn(mean.len(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
        let eigenvalues: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
        let ln_pdet: f64 = eigenvalues.iter().map(|l| l.ln()).sum();
        let ln_norm = -0.5 * (eigenvalues.len() as f64 * (2.0 * PI).ln() + ln_pdet);
        Ok(GaussianTrajectory {
            state_dim,
            horizon: mean.len() / state_dim,
            mean,
            cov,
            basis,
            eigenvalues,
            ln_norm,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ln_density_stacked(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.mean;
        let coords = self.basis.transpose() * &d;
        let off_support = (&d - &self.basis * &coords).norm();
        if off_support > SUPPORT_TOLERANCE {
            return f64::NEG_INFINITY;
        }
        let quad: f64 = coords.iter().zip(&self.eigenvalues).map(|(c, l)| c * c / l).sum();
        self.ln_norm - 0.5 * quad
    }
}

impl StateDistribution for GaussianTrajectory {
    fn kind(&self) -> DistributionKind {
        DistributionKind::AnalyticGaussian
    }

    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn ln_density(&self, path: &[DVector<f64>]) -> f64 {
        if path.len() != self.horizon || path.iter().any(|x| x.len() != self.state_dim) {
            return f64::NEG_INFINITY;
        }
        self.ln_density_stacked(&crate::dynamics::stack(path))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<DVector<f64>> {
        let z = DVector::from_fn(self.eigenvalues.len(), |i, _| {
            let g: f64 = StandardNormal.sample(rng);
            g * self.eigenvalues[i].sqrt()
        });
        let x = &self.mean + &self.basis * z;
        unstack(&x, self.state_dim)
    }

    fn per_time_moments(&self) -> Vec<GaussianSpec> {
        let n = self.state_dim;
        (0..self.horizon)
            .map(|t| GaussianSpec {
                mean: self.mean.rows(t * n, n).into_owned(),
                cov: self.cov.view((t * n, t * n), (n, n)).into_owned(),
            })
            .collect()
    }
}

/// Gaussian prior over `X_1^T` induced by a Gaussian input prior through
/// noise-free dynamics.
pub fn gaussian_trajectory_prior(
    stacked: &StackedDynamics,
    input_prior: &GaussianSpec,
    initial: &InitialState,
) -> Result<GaussianTrajectory> {
    if !stacked.noise_free {
        return Err(Error::config(
            "Gaussian trajectory prior requires a noise-free system",
        ));
    }
    let n = stacked.state_dim;
    if input_prior.dim() != stacked.q.ncols() {
        return Err(Error::dim("input prior", stacked.q.ncols(), input_prior.dim()));
    }
    let (mu1, r1) = match initial {
        InitialState::Fixed(x) => (x.clone(), DMatrix::zeros(n, n)),
        InitialState::Gaussian(g) => (g.mean.clone(), g.cov.clone()),
    };
    if mu1.len() != n || r1.shape() != (n, n) {
        return Err(Error::dim("initial state", n, mu1.len()));
    }
    let rest = stacked.q_hat.nrows();
    let total = n + rest;
    let mut mean = DVector::zeros(total);
    mean.rows_mut(0, n).copy_from(&mu1);
    mean.rows_mut(n, rest)
        .copy_from(&(&stacked.q * &input_prior.mean + &stacked.q_hat * &mu1));

    let cross = &stacked.q_hat * &r1;
    let tail = &stacked.q * &input_prior.cov * stacked.q.transpose() + &cross * stacked.q_hat.transpose();
    let mut cov = DMatrix::zeros(total, total);
    cov.view_mut((0, 0), (n, n)).copy_from(&r1);
    cov.view_mut((n, 0), (rest, n)).copy_from(&cross);
    cov.view_mut((0, n), (n, rest)).copy_from(&cross.transpose());
    cov.view_mut((n, n), (rest, rest)).copy_from(&tail);
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianTrajectory::new(mean, cov, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{stacked_matrices, LinearSystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_prior() -> GaussianTrajectory {
        let sys =
            LinearSystem::noise_free(DMatrix::from_element(1, 1, 2.0), DMatrix::identity(1, 1)).unwrap();
        let s = stacked_matrices(&sys, 2).unwrap();
        let u = GaussianSpec::new(DVector::from_element(1, 1.0), DMatrix::identity(1, 1)).unwrap();
        gaussian_trajectory_prior(&s, &u, &InitialState::Fixed(DVector::from_element(1, 3.0))).unwrap()
    }

    #[test]
    fn degenerate_scalar_chain_density() {
        // X1 = 3 fixed, X2 ~ N(7, 1): pseudo-density on the line X1 = 3.
        let p = scalar_prior();
        assert_eq!(p.rank(), 1);
        let at_mean = [DVector::from_element(1, 3.0), DVector::from_element(1, 7.0)];
        let expected = 1.0 / (2.0 * PI).sqrt();
        assert!((p.density(&at_mean) - expected).abs() < 1e-14);
        let off = [DVector::from_element(1, 3.1), DVector::from_element(1, 7.0)];
        assert_eq!(p.density(&off), 0.0);
    }

    #[test]
    fn zero_mean_density_is_even() {
        let sys = LinearSystem::noise_free(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 1, &[0.125, 0.5]),
        )
        .unwrap();
        let s = stacked_matrices(&sys, 4).unwrap();
        let p = gaussian_trajectory_prior(
            &s,
            &GaussianSpec::standard(3),
            &InitialState::Fixed(DVector::zeros(2)),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = p.sample(&mut rng);
            let neg: Vec<_> = x.iter().map(|v| -v).collect();
            let (a, b) = (p.ln_density(&x), p.ln_density(&neg));
            assert!(a.is_finite());
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn wrong_shape_is_off_support() {
        let p = scalar_prior();
        assert_eq!(p.ln_density(&[DVector::from_element(1, 3.0)]), f64::NEG_INFINITY);
    }
}
