use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::report::{DistortionReport, PerTime};
use super::scheme::{evaluate_scheme, EvalMode, MirrorScheme};
use crate::distributions::{
    gaussian_trajectory_prior, random_walk_prior, BinGrid, EmpiricalGrid, InitialState, JointModel,
    StateDistribution,
};
use crate::dynamics::{
    quadrotor_standin, simulate, stacked_matrices, GaussianSpec, LinearSystem, LqrPlanner, Trajectory,
};
use crate::mirroring::{
    average_distortion, conditional_distortion, max_baselines, AffineMirror, Evaluation, MirrorSchedule,
};
use crate::parallel::{map_range, map_slice, stream_rng};
use crate::stats::{pairwise_sum, Method};
use crate::worstcase::{trajectory_distortion, IndependentGaussianInputs, ShiftMirrorCodec};
use crate::{Error, Result};

/// Exhaustive evaluation of a mirror schedule on the integer random walk.
pub fn run_random_walk(a: i64, horizon: usize, schedule: &MirrorSchedule) -> Result<DistortionReport> {
    let prior = random_walk_prior(a, horizon)?;
    let scheme = MirrorScheme {
        schedule: schedule.clone(),
    };
    let mut report = evaluate_scheme(
        &prior,
        &scheme,
        EvalMode::Exact {
            budget: Evaluation::DEFAULT_BUDGET,
        },
        0,
    )?;
    report.label = "random_walk".into();
    Ok(report)
}

/// Block-diagonal prior for `U_1..U_{T-1}` with i.i.d. steps.
pub fn iid_input_prior(step: &GaussianSpec, steps: usize) -> GaussianSpec {
    let m = step.dim();
    let mut mean = DVector::zeros(m * steps);
    let mut cov = DMatrix::zeros(m * steps, m * steps);
    for s in 0..steps {
        mean.rows_mut(s * m, m).copy_from(&step.mean);
        cov.view_mut((s * m, s * m), (m, m)).copy_from(&step.cov);
    }
    GaussianSpec { mean, cov }
}

/// Monte Carlo mirroring on the Gaussian trajectory prior of a noise-free
/// system with i.i.d. Gaussian inputs. Without a schedule the mirrors go
/// through the per-time means.
pub fn run_gaussian_mirror(
    system: &LinearSystem,
    horizon: usize,
    input_step: &GaussianSpec,
    initial: &InitialState,
    schedule: Option<&MirrorSchedule>,
    samples: usize,
    seed: u64,
) -> Result<DistortionReport> {
    if input_step.dim() != system.input_dim() {
        return Err(Error::dim(
            "input step prior",
            system.input_dim(),
            input_step.dim(),
        ));
    }
    let stacked = stacked_matrices(system, horizon)?;
    let prior = gaussian_trajectory_prior(&stacked, &iid_input_prior(input_step, horizon - 1), initial)?;
    let schedule = match schedule {
        Some(s) => s.clone(),
        None => MirrorSchedule::through_means(&prior.per_time_moments())?,
    };
    let mut report = evaluate_scheme(
        &prior,
        &MirrorScheme { schedule },
        EvalMode::MonteCarlo { samples },
        seed,
    )?;
    report.label = "gaussian_mirror".into();
    Ok(report)
}

/// Parameters of the quadrotor corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadrotorSetup {
    pub corpus_size: usize,
    pub horizon: usize,
    pub ts: f64,
    pub bin_width: f64,
    pub state_weight: f64,
    pub joint_model: JointModel,
    /// Evaluate each corpus record's densities with that record removed.
    pub held_out: bool,
}

impl Default for QuadrotorSetup {
    fn default() -> Self {
        QuadrotorSetup {
            corpus_size: 50_000,
            horizon: 10,
            ts: 0.5,
            bin_width: 0.2,
            state_weight: 10.0,
            joint_model: JointModel::Markov,
            held_out: true,
        }
    }
}

/// Position coordinates of the stand-in state.
pub const POSITION: [usize; 3] = [0, 1, 2];

/// Largest tolerated fraction of draws whose LQR problem fails.
pub const MAX_SKIPPED_FRACTION: f64 = 0.01;

/// LQR corpus from `(-1, y_1, z_1)` to `(1, y_T, z_T)` at rest, with the
/// four free coordinates uniform on `[-1, 1]`, and its binned distribution.
#[derive(Debug, Clone)]
pub struct QuadrotorCorpus {
    pub setup: QuadrotorSetup,
    pub trajectories: Vec<Trajectory>,
    pub skipped: usize,
    pub distribution: EmpiricalGrid,
}

impl QuadrotorCorpus {
    pub fn generate(setup: &QuadrotorSetup, seed: u64) -> Result<Self> {
        if setup.corpus_size == 0 {
            return Err(Error::config("corpus_size must be positive"));
        }
        let system = quadrotor_standin(setup.ts);
        let planner = LqrPlanner::new(&system, setup.horizon, setup.state_weight)?;
        let draws = map_range(setup.corpus_size, |i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut u = || rng.random_range(-1.0..=1.0);
            let x1 = DVector::from_row_slice(&[-1.0, u(), u(), 0.0, 0.0, 0.0]);
            let xt = DVector::from_row_slice(&[1.0, u(), u(), 0.0, 0.0, 0.0]);
            planner
                .solve(&x1, &xt)
                .and_then(|inputs| simulate(&system, &x1, &inputs, None))
                .ok()
        });
        let skipped = draws.iter().filter(|d| d.is_none()).count();
        if skipped as f64 > MAX_SKIPPED_FRACTION * setup.corpus_size as f64 {
            return Err(Error::Infeasible(format!(
                "{skipped} of {} corpus draws failed",
                setup.corpus_size
            )));
        }
        let trajectories: Vec<Trajectory> = draws.into_iter().flatten().collect();
        let distribution = EmpiricalGrid::from_corpus(
            &trajectories,
            BinGrid::centered(setup.bin_width, POSITION.len())?,
            &POSITION,
            setup.joint_model,
        )?;
        Ok(QuadrotorCorpus {
            setup: setup.clone(),
            trajectories,
            skipped,
            distribution,
        })
    }

    /// Mean position pooled over all trajectories and time steps.
    pub fn position_mean(&self) -> DVector<f64> {
        let d = POSITION.len();
        let per_traj: Vec<DVector<f64>> = map_slice(&self.trajectories, |tr| {
            let mut m = DVector::zeros(d);
            for x in &tr.states {
                for (j, &c) in POSITION.iter().enumerate() {
                    m[j] += x[c];
                }
            }
            m / tr.states.len() as f64
        });
        DVector::from_fn(d, |j, _| {
            pairwise_sum(&per_traj.iter().map(|m| m[j]).collect::<Vec<_>>()) / per_traj.len() as f64
        })
    }

    /// Exact evaluation over the binned corpus. `D_E` follows the
    /// expectation over records of the mirrored-density weight; `D_W` is
    /// the minimum of `D(t, Z)` over the observed codewords.
    pub fn evaluate(&self, schedule: &MirrorSchedule) -> Result<DistortionReport> {
        let dist = &self.distribution;
        let avg = average_distortion(
            dist,
            schedule,
            Evaluation::Exact {
                held_out: self.setup.held_out,
                budget: Evaluation::DEFAULT_BUDGET,
            },
        )?;
        let support = dist
            .support(Evaluation::DEFAULT_BUDGET)?
            .expect("empirical grid has finite support");
        // Both keys give the same D(t, Z) for a record: the pair {X, X̃} is shared.
        let conditional: Vec<Vec<f64>> =
            map_slice(&support, |pt| conditional_distortion(&pt.path, dist, schedule))
                .into_iter()
                .collect::<Result<_>>()?;
        let per_time: Vec<PerTime> = avg
            .per_time
            .iter()
            .enumerate()
            .map(|(t, &mean)| PerTime {
                t: t + 1,
                mean,
                min: conditional.iter().map(|d| d[t]).fold(f64::INFINITY, f64::min),
                std_error: None,
            })
            .collect();
        let (d_e_max, d_w_max) = max_baselines(&dist.per_time_moments());
        let mean = self.position_mean();
        let mut extras = BTreeMap::new();
        extras.insert("corpus_size".into(), self.trajectories.len() as f64);
        extras.insert("skipped_draws".into(), self.skipped as f64);
        extras.insert("distinct_sequences".into(), dist.distinct_sequences() as f64);
        extras.insert("position_mean_norm".into(), mean.norm());
        for (axis, v) in ["x", "y", "z"].iter().zip(mean.iter()) {
            extras.insert(format!("position_mean_{axis}"), *v);
        }
        extras.insert("ratio".into(), avg.value / d_e_max);
        extras.insert("held_out".into(), if self.setup.held_out { 1.0 } else { 0.0 });
        let d_w = per_time.iter().map(|p| p.min).fold(f64::INFINITY, f64::min);
        Ok(DistortionReport {
            label: "quadrotor".into(),
            method: Method::Exact,
            samples: avg.points,
            seed: None,
            per_time,
            d_e: avg.value,
            d_e_std_error: None,
            d_w,
            d_e_max,
            d_w_max,
            extras,
        })
    }
}

/// Point reflection of the position through the origin, every step.
pub fn quadrotor_point_mirror(horizon: usize) -> MirrorSchedule {
    MirrorSchedule::constant(AffineMirror::point(DVector::zeros(3)), horizon).expect("non-empty horizon")
}

/// Reflection of the position across the x axis (`y = z = 0`):
/// `S = [[0,1,0],[0,0,1]]`, `b = 0`.
pub fn quadrotor_plane_mirror(horizon: usize) -> MirrorSchedule {
    let s = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let m = AffineMirror::new(s, DVector::zeros(2)).expect("orthonormal rows");
    MirrorSchedule::constant(m, horizon).expect("non-empty horizon")
}

pub fn run_quadrotor(
    setup: &QuadrotorSetup,
    schedule: &MirrorSchedule,
    seed: u64,
) -> Result<DistortionReport> {
    let corpus = QuadrotorCorpus::generate(setup, seed)?;
    let mut report = corpus.evaluate(schedule)?;
    report.seed = Some(seed);
    Ok(report)
}

/// Prior moments of `X_t` under `X_1 ~ init`, i.i.d. inputs and process noise.
pub fn state_moments(
    system: &LinearSystem,
    init: &GaussianSpec,
    input_step: &GaussianSpec,
    horizon: usize,
) -> Vec<GaussianSpec> {
    let (a, b) = (system.a(), system.b());
    let drive_cov = b * &input_step.cov * b.transpose() + system.process_noise_cov();
    let drive_mean = b * &input_step.mean;
    let mut out = vec![init.clone()];
    for t in 1..horizon {
        let prev = &out[t - 1];
        out.push(GaussianSpec {
            mean: a * &prev.mean + &drive_mean,
            cov: a * &prev.cov * a.transpose() + &drive_cov,
        });
    }
    out
}

/// Monte Carlo evaluation of the shift+mirror trajectory codec.
#[allow(clippy::too_many_arguments)]
pub fn run_trajectory_codec(
    system: &LinearSystem,
    init_prior: &GaussianSpec,
    input_step: &GaussianSpec,
    codec: &ShiftMirrorCodec,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<DistortionReport> {
    let inputs = IndependentGaussianInputs::new(input_step)?;
    let r = trajectory_distortion(system, init_prior, codec, &inputs, horizon, samples, seed)?;
    let (d_e_max, d_w_max) = max_baselines(&state_moments(system, init_prior, input_step, horizon));
    let per_time: Vec<PerTime> = r
        .per_time
        .iter()
        .enumerate()
        .map(|(t, s)| PerTime {
            t: t + 1,
            mean: s.mean,
            min: s.min,
            std_error: Some(s.std_error),
        })
        .collect();
    let means: Vec<f64> = per_time.iter().map(|p| p.mean).collect();
    // Per-sample time averages are not kept; the standard error of D_E is
    // bounded by the largest per-time standard error.
    let se = r.per_time.iter().map(|s| s.std_error).fold(0.0, f64::max);
    let mut extras = BTreeMap::new();
    extras.insert(
        "contraction_warning".into(),
        if r.contraction_warning { 1.0 } else { 0.0 },
    );
    extras.insert(
        "d1_over_trace_sigma".into(),
        per_time[0].mean / init_prior.cov.trace(),
    );
    Ok(DistortionReport {
        label: "trajectory_codec".into(),
        method: Method::MonteCarlo,
        samples,
        seed: Some(seed),
        d_e: pairwise_sum(&means) / horizon as f64,
        d_e_std_error: Some(se),
        d_w: per_time.iter().map(|p| p.min).fold(f64::INFINITY, f64::min),
        per_time,
        d_e_max,
        d_w_max,
        extras,
    })
}
