//! JSON scenario documents.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 7,
//!   "scenario": {
//!     "kind": "random_walk",
//!     "a": 2,
//!     "horizon": 3,
//!     "mirror": { "type": "constant", "S": [[1.0]], "b": [0.0] }
//!   }
//! }
//! ```
//!
//! Unknown fields are rejected and every offending field is reported.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::distributions::{InitialState, JointModel, StateDistribution};
use crate::dynamics::{GaussianSpec, LinearSystem, SystemDoc};
use crate::harness::{
    run_gaussian_mirror, run_random_walk, run_trajectory_codec, DistortionReport, QuadrotorCorpus,
    QuadrotorSetup,
};
use crate::matrix::from_rows;
use crate::mirroring::{AffineMirror, MirrorSchedule};
use crate::worstcase::{DiagonalStandardizer, ShiftMirrorCodec};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    RandomWalk {
        a: i64,
        horizon: usize,
        mirror: MirrorChoice,
    },
    GaussianMirror {
        system: SystemDoc,
        horizon: usize,
        input_step: GaussianSpec,
        initial: InitialDoc,
        #[serde(default)]
        mirror: MirrorChoice,
        samples: usize,
    },
    Quadrotor {
        #[serde(default = "defaults::corpus_size")]
        corpus_size: usize,
        #[serde(default = "defaults::horizon")]
        horizon: usize,
        #[serde(default = "defaults::ts")]
        ts: f64,
        #[serde(default = "defaults::bin_width")]
        bin_width: f64,
        #[serde(default = "defaults::state_weight")]
        state_weight: f64,
        #[serde(default = "defaults::joint_model")]
        joint_model: JointModel,
        #[serde(default = "defaults::held_out")]
        held_out: bool,
        mirror: MirrorChoice,
    },
    TrajectoryCodec {
        system: SystemDoc,
        horizon: usize,
        init_prior: GaussianSpec,
        input_step: GaussianSpec,
        codec: ShiftMirrorCodec,
        samples: usize,
    },
}

mod defaults {
    use super::*;

    fn setup() -> QuadrotorSetup {
        QuadrotorSetup::default()
    }
    pub fn corpus_size() -> usize {
        setup().corpus_size
    }
    pub fn horizon() -> usize {
        setup().horizon
    }
    pub fn ts() -> f64 {
        setup().ts
    }
    pub fn bin_width() -> f64 {
        setup().bin_width
    }
    pub fn state_weight() -> f64 {
        setup().state_weight
    }
    pub fn joint_model() -> JointModel {
        setup().joint_model
    }
    pub fn held_out() -> bool {
        setup().held_out
    }
}

/// How the per-time mirrors are chosen.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MirrorChoice {
    /// Point reflection through each per-time prior mean.
    #[default]
    ThroughMeans,
    /// Point reflection through a fixed center at every step.
    Point { center: Vec<f64> },
    /// The same affine mirror at every step.
    Constant {
        #[serde(rename = "S")]
        s: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// One mirror per step.
    Schedule { mirrors: MirrorSchedule },
}

impl MirrorChoice {
    pub fn resolve(&self, prior: &dyn StateDistribution) -> Result<MirrorSchedule> {
        let horizon = prior.horizon();
        let schedule = match self {
            MirrorChoice::ThroughMeans => MirrorSchedule::through_means(&prior.per_time_moments())?,
            MirrorChoice::Point { center } => {
                MirrorSchedule::constant(AffineMirror::point(DVector::from_column_slice(center)), horizon)?
            }
            MirrorChoice::Constant { s, b } => {
                let m = AffineMirror::new(from_rows(s, "S")?, DVector::from_column_slice(b))?;
                MirrorSchedule::constant(m, horizon)?
            }
            MirrorChoice::Schedule { mirrors } => mirrors.clone(),
        };
        schedule.check_compatible(prior.state_dim(), horizon)?;
        Ok(schedule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDoc {
    Fixed(Vec<f64>),
    Gaussian(GaussianSpec),
}

impl InitialDoc {
    fn to_state(&self) -> Result<InitialState> {
        Ok(match self {
            InitialDoc::Fixed(x) => InitialState::Fixed(DVector::from_column_slice(x)),
            InitialDoc::Gaussian(g) => InitialState::Gaussian(checked_gaussian(g)?),
        })
    }

    fn dim(&self) -> usize {
        match self {
            InitialDoc::Fixed(x) => x.len(),
            InitialDoc::Gaussian(g) => g.dim(),
        }
    }
}

fn checked_gaussian(g: &GaussianSpec) -> Result<GaussianSpec> {
    GaussianSpec::new(g.mean.clone(), g.cov.clone())
}

const TOP_FIELDS: &[&str] = &["schema_version", "seed", "scenario"];
const SYSTEM_FIELDS: &[&str] = &["A", "B", "C", "process_noise_cov", "obs_noise_cov"];
const GAUSSIAN_FIELDS: &[&str] = &["mean", "cov"];
const CODEC_FIELDS: &[&str] = &["k", "theta"];

fn scenario_fields(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "random_walk" => &["kind", "a", "horizon", "mirror"],
        "gaussian_mirror" => &[
            "kind",
            "system",
            "horizon",
            "input_step",
            "initial",
            "mirror",
            "samples",
        ],
        "quadrotor" => &[
            "kind",
            "corpus_size",
            "horizon",
            "ts",
            "bin_width",
            "state_weight",
            "joint_model",
            "held_out",
            "mirror",
        ],
        "trajectory_codec" => &[
            "kind",
            "system",
            "horizon",
            "init_prior",
            "input_step",
            "codec",
            "samples",
        ],
        _ => return None,
    })
}

fn mirror_fields(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "through_means" => &["type"],
        "point" => &["type", "center"],
        "constant" => &["type", "S", "b"],
        "schedule" => &["type", "mirrors"],
        _ => return None,
    })
}

fn check_object(v: &Value, path: &str, allowed: &[&str], out: &mut Vec<String>) {
    if let Some(obj) = v.as_object() {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                out.push(format!("{path}{key}: unknown field"));
            }
        }
    }
}

/// Every field that is not part of the schema, with its dotted path.
pub fn unknown_fields(doc: &Value) -> Vec<String> {
    let mut out = Vec::new();
    check_object(doc, "", TOP_FIELDS, &mut out);
    let Some(sc) = doc.get("scenario") else {
        return out;
    };
    let Some(kind) = sc.get("kind").and_then(Value::as_str) else {
        return out;
    };
    let Some(fields) = scenario_fields(kind) else {
        out.push(format!("scenario.kind: unknown scenario {kind:?}"));
        return out;
    };
    check_object(sc, "scenario.", fields, &mut out);
    if let Some(sys) = sc.get("system") {
        check_object(sys, "scenario.system.", SYSTEM_FIELDS, &mut out);
    }
    for g in ["input_step", "init_prior"] {
        if let Some(v) = sc.get(g) {
            check_object(v, &format!("scenario.{g}."), GAUSSIAN_FIELDS, &mut out);
        }
    }
    if let Some(g) = sc.get("initial").and_then(|i| i.get("gaussian")) {
        check_object(g, "scenario.initial.gaussian.", GAUSSIAN_FIELDS, &mut out);
    }
    if let Some(c) = sc.get("codec") {
        check_object(c, "scenario.codec.", CODEC_FIELDS, &mut out);
    }
    if let Some(m) = sc.get("mirror") {
        if let Some(t) = m.get("type").and_then(Value::as_str) {
            match mirror_fields(t) {
                Some(f) => check_object(m, "scenario.mirror.", f, &mut out),
                None => out.push(format!("scenario.mirror.type: unknown mirror type {t:?}")),
            }
        }
    }
    out
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Validation(vec![e.to_string()]))?;
        let unknown = unknown_fields(&doc);
        if !unknown.is_empty() {
            return Err(Error::Validation(unknown));
        }
        let cfg: ScenarioConfig =
            serde_json::from_value(doc).map_err(|e| Error::Validation(vec![e.to_string()]))?;
        let problems = cfg.problems();
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn kind(&self) -> &'static str {
        match self.scenario {
            Scenario::RandomWalk { .. } => "random_walk",
            Scenario::GaussianMirror { .. } => "gaussian_mirror",
            Scenario::Quadrotor { .. } => "quadrotor",
            Scenario::TrajectoryCodec { .. } => "trajectory_codec",
        }
    }

    /// Replaces the Monte Carlo sample count (or the corpus size).
    pub fn override_samples(&mut self, n: usize) -> Result<()> {
        match &mut self.scenario {
            Scenario::RandomWalk { .. } => {
                return Err(Error::config(
                    "random_walk is evaluated exactly and takes no sample count",
                ))
            }
            Scenario::GaussianMirror { samples, .. } | Scenario::TrajectoryCodec { samples, .. } => {
                *samples = n
            }
            Scenario::Quadrotor { corpus_size, .. } => *corpus_size = n,
        }
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Semantic checks beyond the JSON shape.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                out.push(msg);
            }
        };
        check(
            self.schema_version == SCHEMA_VERSION,
            format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            ),
        );
        match &self.scenario {
            Scenario::RandomWalk { a, horizon, .. } => {
                check(*a >= 1, format!("scenario.a: must be >= 1, got {a}"));
                check(
                    *horizon >= 1,
                    format!("scenario.horizon: must be >= 1, got {horizon}"),
                );
            }
            Scenario::GaussianMirror {
                system,
                horizon,
                input_step,
                initial,
                samples,
                ..
            } => {
                check(
                    *horizon >= 2,
                    format!("scenario.horizon: must be >= 2, got {horizon}"),
                );
                check(
                    *samples >= 2,
                    format!("scenario.samples: must be >= 2, got {samples}"),
                );
                match LinearSystem::try_from(system.clone()) {
                    Ok(sys) => {
                        check(
                            input_step.dim() == sys.input_dim(),
                            format!(
                                "scenario.input_step: dimension {} but the system has {} inputs",
                                input_step.dim(),
                                sys.input_dim()
                            ),
                        );
                        check(
                            initial.dim() == sys.state_dim(),
                            format!(
                                "scenario.initial: dimension {} but the system has {} states",
                                initial.dim(),
                                sys.state_dim()
                            ),
                        );
                        check(sys.is_noise_free(), "scenario.system: must be noise-free".into());
                    }
                    Err(e) => check(false, format!("scenario.system: {e}")),
                }
                if let Err(e) = checked_gaussian(input_step) {
                    check(false, format!("scenario.input_step: {e}"));
                }
                if let Err(e) = initial.to_state() {
                    check(false, format!("scenario.initial: {e}"));
                }
            }
            Scenario::Quadrotor {
                corpus_size,
                horizon,
                ts,
                bin_width,
                state_weight,
                ..
            } => {
                check(*corpus_size >= 1, "scenario.corpus_size: must be >= 1".into());
                check(
                    *horizon >= 2,
                    format!("scenario.horizon: must be >= 2, got {horizon}"),
                );
                check(
                    *ts > 0.0 && ts.is_finite(),
                    format!("scenario.ts: must be positive, got {ts}"),
                );
                check(
                    *bin_width > 0.0 && bin_width.is_finite(),
                    format!("scenario.bin_width: must be positive, got {bin_width}"),
                );
                check(
                    *state_weight >= 0.0 && state_weight.is_finite(),
                    format!("scenario.state_weight: must be non-negative, got {state_weight}"),
                );
            }
            Scenario::TrajectoryCodec {
                system,
                horizon,
                init_prior,
                input_step,
                samples,
                ..
            } => {
                check(
                    *horizon >= 1,
                    format!("scenario.horizon: must be >= 1, got {horizon}"),
                );
                check(
                    *samples >= 2,
                    format!("scenario.samples: must be >= 2, got {samples}"),
                );
                match LinearSystem::try_from(system.clone()) {
                    Ok(sys) => {
                        check(
                            sys.observes_state_exactly(),
                            "scenario.system: needs C = I and noise-free observations".into(),
                        );
                        check(
                            init_prior.dim() == sys.state_dim(),
                            format!(
                                "scenario.init_prior: dimension {} but the system has {} states",
                                init_prior.dim(),
                                sys.state_dim()
                            ),
                        );
                        check(
                            input_step.dim() == sys.input_dim(),
                            format!(
                                "scenario.input_step: dimension {} but the system has {} inputs",
                                input_step.dim(),
                                sys.input_dim()
                            ),
                        );
                    }
                    Err(e) => check(false, format!("scenario.system: {e}")),
                }
                if let Err(e) = checked_gaussian(init_prior).and_then(|g| DiagonalStandardizer::new(&g)) {
                    check(false, format!("scenario.init_prior: {e}"));
                }
                if let Err(e) = checked_gaussian(input_step) {
                    check(false, format!("scenario.input_step: {e}"));
                }
            }
        }
        out
    }

    pub fn run(&self) -> Result<DistortionReport> {
        let seed = self.seed;
        let mut report = match &self.scenario {
            Scenario::RandomWalk { a, horizon, mirror } => {
                let prior = crate::distributions::random_walk_prior(*a, *horizon)?;
                run_random_walk(*a, *horizon, &mirror.resolve(&prior)?)?
            }
            Scenario::GaussianMirror {
                system,
                horizon,
                input_step,
                initial,
                mirror,
                samples,
            } => {
                let sys = LinearSystem::try_from(system.clone())?;
                let schedule = match mirror {
                    MirrorChoice::ThroughMeans => None,
                    other => {
                        let stacked = crate::dynamics::stacked_matrices(&sys, *horizon)?;
                        let prior = crate::distributions::gaussian_trajectory_prior(
                            &stacked,
                            &crate::harness::iid_input_prior(input_step, horizon - 1),
                            &initial.to_state()?,
                        )?;
                        Some(other.resolve(&prior)?)
                    }
                };
                run_gaussian_mirror(
                    &sys,
                    *horizon,
                    input_step,
                    &initial.to_state()?,
                    schedule.as_ref(),
                    *samples,
                    seed,
                )?
            }
            Scenario::Quadrotor {
                corpus_size,
                horizon,
                ts,
                bin_width,
                state_weight,
                joint_model,
                held_out,
                mirror,
            } => {
                let setup = QuadrotorSetup {
                    corpus_size: *corpus_size,
                    horizon: *horizon,
                    ts: *ts,
                    bin_width: *bin_width,
                    state_weight: *state_weight,
                    joint_model: *joint_model,
                    held_out: *held_out,
                };
                let corpus = QuadrotorCorpus::generate(&setup, seed)?;
                let schedule = mirror.resolve(&corpus.distribution)?;
                corpus.evaluate(&schedule)?
            }
            Scenario::TrajectoryCodec {
                system,
                horizon,
                init_prior,
                input_step,
                codec,
                samples,
            } => {
                let sys = LinearSystem::try_from(system.clone())?;
                run_trajectory_codec(&sys, init_prior, input_step, codec, *horizon, *samples, seed)?
            }
        };
        report.seed = Some(seed);
        Ok(report)
    }
}
