use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal as StdNormalDist};
use serde::{Deserialize, Serialize};

use super::scalar::{preimages, KeyWord, ShiftMirrorCodec, StandardNormal};
use super::vector::{decode_vector, encode_vector, DiagonalStandardizer};
use crate::distributions::{GaussianTrajectory, StateDistribution};
use crate::dynamics::{GaussianSpec, LinearSystem};
use crate::matrix::sigma_min;
use crate::parallel::{stream_rng, try_map_range};
use crate::stats::Summary;
use crate::{Error, Result};

fn check_system(system: &LinearSystem) -> Result<()> {
    if !system.observes_state_exactly() {
        return Err(Error::config(
            "trajectory codec needs C = I and noise-free observations",
        ));
    }
    Ok(())
}

fn check_states(system: &LinearSystem, states: &[DVector<f64>], what: &'static str) -> Result<()> {
    if states.is_empty() {
        return Err(Error::config(format!("{what} must not be empty")));
    }
    if let Some(x) = states.iter().find(|x| x.len() != system.state_dim()) {
        return Err(Error::dim(what, system.state_dim(), x.len()));
    }
    Ok(())
}

/// `Z_1` encodes `X_1`; afterwards `Z_{t+1} = A Z_t + (X_{t+1} - A X_t)`.
pub fn encode_trajectory(
    system: &LinearSystem,
    states: &[DVector<f64>],
    keys: &[KeyWord],
    init_prior: &GaussianSpec,
    codec: &ShiftMirrorCodec,
) -> Result<Vec<DVector<f64>>> {
    check_system(system)?;
    check_states(system, states, "trajectory states")?;
    let a = system.a();
    let mut z = Vec::with_capacity(states.len());
    z.push(encode_vector(&states[0], keys, init_prior, codec)?);
    for t in 1..states.len() {
        let next = a * &z[t - 1] + (&states[t] - a * &states[t - 1]);
        z.push(next);
    }
    Ok(z)
}

/// `X̂_1` decodes `Z_1`; afterwards `X̂_{t+1} = Z_{t+1} - A Z_t + A X̂_t`.
pub fn decode_trajectory(
    z: &[DVector<f64>],
    keys: &[KeyWord],
    system: &LinearSystem,
    init_prior: &GaussianSpec,
    codec: &ShiftMirrorCodec,
) -> Result<Vec<DVector<f64>>> {
    check_system(system)?;
    check_states(system, z, "trajectory codeword")?;
    let a = system.a();
    let mut x = Vec::with_capacity(z.len());
    x.push(decode_vector(&z[0], keys, init_prior, codec)?);
    for t in 1..z.len() {
        let next = &z[t] - a * &z[t - 1] + a * &x[t - 1];
        x.push(next);
    }
    Ok(x)
}

/// What the eavesdropper can extract from a trajectory codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct EveInfo {
    pub z1: DVector<f64>,
    /// `B U_t + w_t = Z_{t+1} - A Z_t` for `t = 1..T-1`.
    pub increments: Vec<DVector<f64>>,
}

impl EveInfo {
    pub fn from_codeword(z: &[DVector<f64>], system: &LinearSystem) -> Result<Self> {
        check_states(system, z, "trajectory codeword")?;
        let a = system.a();
        Ok(EveInfo {
            z1: z[0].clone(),
            increments: z.windows(2).map(|w| &w[1] - a * &w[0]).collect(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.increments.len() + 1
    }
}

/// `diag(Var(X_1^{(i)} | Z_1))`: each standardized coordinate is an
/// independent standard normal, so the posterior factorizes.
pub fn initial_posterior_variances(
    z1: &DVector<f64>,
    init_prior: &GaussianSpec,
    codec: &ShiftMirrorCodec,
) -> Result<DVector<f64>> {
    let std = DiagonalStandardizer::new(init_prior)?;
    if z1.len() != std.dim() {
        return Err(Error::dim("initial codeword", std.dim(), z1.len()));
    }
    let v: Result<Vec<f64>> = z1
        .iter()
        .zip(std.sd.iter())
        .map(|(&zi, &sd)| Ok(sd * sd * preimages(zi, codec, &StandardNormal)?.variance()))
        .collect();
    Ok(DVector::from_vec(v?))
}

/// `tr(R_{X_t | E_info})` for `t = 1..T`. Given the increments, `X_t` is a
/// known shift of `A^{t-1} X_1`, so the posterior covariance is
/// `A^{t-1} R_1 A^{t-1}ᵀ` with `R_1` the diagonal posterior of `X_1`.
pub fn eve_trajectory_distortion(
    info: &EveInfo,
    system: &LinearSystem,
    init_prior: &GaussianSpec,
    codec: &ShiftMirrorCodec,
) -> Result<Vec<f64>> {
    let r1 = initial_posterior_variances(&info.z1, init_prior, codec)?;
    let n = system.state_dim();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut out = Vec::with_capacity(info.horizon());
    for _ in 0..info.horizon() {
        // tr(P diag(r) Pᵀ) = Σ_ij P_ij² r_j
        let tr = (0..n).map(|j| power.column(j).norm_squared() * r1[j]).sum();
        out.push(tr);
        power = system.a() * power;
    }
    Ok(out)
}

/// Sampler for the input sequence, drawn independently of the state.
pub trait InputModel: Send + Sync {
    fn input_dim(&self) -> usize;
    fn sample(&self, t: usize, rng: &mut dyn RngCore) -> DVector<f64>;
}

/// I.i.d. Gaussian inputs.
#[derive(Debug, Clone)]
pub struct IndependentGaussianInputs {
    sampler: GaussianTrajectory,
}

impl IndependentGaussianInputs {
    pub fn new(spec: &GaussianSpec) -> Result<Self> {
        Ok(IndependentGaussianInputs {
            sampler: GaussianTrajectory::new(spec.mean.clone(), spec.cov.clone(), spec.dim())?,
        })
    }
}

impl InputModel for IndependentGaussianInputs {
    fn input_dim(&self) -> usize {
        self.sampler.state_dim()
    }

    fn sample(&self, _t: usize, rng: &mut dyn RngCore) -> DVector<f64> {
        self.sampler.sample(rng).swap_remove(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDistortion {
    pub per_time: Vec<Summary>,
    /// Smallest per-time mean.
    pub min_over_time: f64,
    /// Set when some singular value of `A` is below one, in which case
    /// the distortion need not grow over time.
    pub contraction_warning: bool,
    pub samples: usize,
}

/// Monte Carlo over initial states, keys and inputs of the per-time
/// eavesdropper distortion under the trajectory codec.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_distortion(
    system: &LinearSystem,
    init_prior: &GaussianSpec,
    codec: &ShiftMirrorCodec,
    input_model: &dyn InputModel,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<TrajectoryDistortion> {
    check_system(system)?;
    if horizon == 0 || samples < 2 {
        return Err(Error::config(
            "trajectory distortion needs T ≥ 1 and at least 2 samples",
        ));
    }
    if input_model.input_dim() != system.input_dim() {
        return Err(Error::dim(
            "input model",
            system.input_dim(),
            input_model.input_dim(),
        ));
    }
    let std = DiagonalStandardizer::new(init_prior)?;
    if std.dim() != system.state_dim() {
        return Err(Error::dim("initial prior", system.state_dim(), std.dim()));
    }
    let noise = if system.is_noise_free() {
        None
    } else {
        let n = system.state_dim();
        Some(GaussianTrajectory::new(
            DVector::zeros(n),
            system.process_noise_cov().clone(),
            n,
        )?)
    };
    let runs = try_map_range(samples, |i| -> Result<Vec<f64>> {
        let mut rng = stream_rng(seed, i as u64);
        let v: DVector<f64> = DVector::from_fn(std.dim(), |_, _| StdNormalDist.sample(&mut rng));
        let mut states = vec![std.destandardize(&v)];
        for t in 1..horizon {
            let u = input_model.sample(t, &mut rng);
            let mut next = system.a() * &states[t - 1] + system.b() * u;
            if let Some(w) = &noise {
                next += w.sample(&mut rng).swap_remove(0);
            }
            states.push(next);
        }
        let keys: Result<Vec<KeyWord>> = (0..std.dim())
            .map(|_| KeyWord::random(codec.k(), &mut rng))
            .collect();
        let z = encode_trajectory(system, &states, &keys?, init_prior, codec)?;
        let info = EveInfo::from_codeword(&z, system)?;
        eve_trajectory_distortion(&info, system, init_prior, codec)
    })?;
    let per_time: Vec<Summary> = (0..horizon)
        .map(|t| Summary::of(&runs.iter().map(|r| r[t]).collect::<Vec<_>>()))
        .collect();
    let min_over_time = per_time.iter().map(|s| s.mean).fold(f64::INFINITY, f64::min);
    Ok(TrajectoryDistortion {
        per_time,
        min_over_time,
        contraction_warning: sigma_min(system.a()) < 1.0,
        samples,
    })
}
