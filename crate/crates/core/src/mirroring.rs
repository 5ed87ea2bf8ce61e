//! One-bit affine mirroring codec.
//!
//! With key bit `K`, the transmitter sends `Z_t = X_t` when `K = 0` and the
//! reflection `X̃_t = (I - 2 S_tᵀ S_t) X_t + 2 S_tᵀ b_t` across the affine
//! subspace `{x : S_t x = b_t}` when `K = 1`. The receiver undoes the
//! reflection; the eavesdropper is left with two candidate trajectories
//! weighted by the prior density.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distributions::StateDistribution;
use crate::dynamics::GaussianSpec;
use crate::matrix::{from_rows, to_rows};
use crate::parallel::{map_range, map_slice, stream_rng};
use crate::stats::{pairwise_sum, Method, Summary};
use crate::{Error, Result};

/// Relative norm below which Gram–Schmidt declares the rows dependent.
const GRAM_SCHMIDT_BREAKDOWN: f64 = 1e-12;

/// Reflection across `{x : S x = b}` with `S Sᵀ = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMirror {
    s: DMatrix<f64>,
    b: DVector<f64>,
}

impl AffineMirror {
    /// Builds a mirror from any `S` with linearly independent rows. The rows
    /// are orthonormalized and `b` transformed so the subspace is unchanged.
    pub fn new(s: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let (rows, n) = s.shape();
        if rows == 0 || n == 0 {
            return Err(Error::config("mirror matrix S must be non-empty"));
        }
        if b.len() != rows {
            return Err(Error::dim("mirror offset b", rows, b.len()));
        }
        let mut q = s;
        let mut c = b;
        for i in 0..rows {
            let original = q.row(i).norm();
            // Two passes keep the rows orthonormal to working precision
            // even when the input rows are nearly dependent.
            for _ in 0..2 {
                for j in 0..i {
                    let proj = q.row(i).dot(&q.row(j));
                    let qj = q.row(j).into_owned();
                    let updated = q.row(i) - qj * proj;
                    q.row_mut(i).copy_from(&updated);
                    c[i] -= proj * c[j];
                }
            }
            let norm = q.row(i).norm();
            if !(norm > GRAM_SCHMIDT_BREAKDOWN * original.max(f64::MIN_POSITIVE)) || original == 0.0 {
                return Err(Error::config(format!(
                    "mirror matrix S has linearly dependent rows (row {i})"
                )));
            }
            q.row_mut(i).scale_mut(1.0 / norm);
            c[i] /= norm;
        }
        Ok(AffineMirror { s: q, b: c })
    }

    /// Point reflection `x -> 2c - x`.
    pub fn point(center: DVector<f64>) -> Self {
        let n = center.len();
        AffineMirror {
            s: DMatrix::identity(n, n),
            b: center,
        }
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn state_dim(&self) -> usize {
        self.s.ncols()
    }

    /// `S x - b`.
    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.s * x - &self.b
    }

    pub fn reflect(&self, x: &DVector<f64>) -> DVector<f64> {
        x - self.s.transpose() * self.residual(x) * 2.0
    }
}

/// Shared one-bit key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum KeyBit {
    Zero,
    One,
}

impl From<KeyBit> for u8 {
    fn from(k: KeyBit) -> u8 {
        match k {
            KeyBit::Zero => 0,
            KeyBit::One => 1,
        }
    }
}

impl TryFrom<u8> for KeyBit {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(KeyBit::Zero),
            1 => Ok(KeyBit::One),
            _ => Err(format!("key bit must be 0 or 1, got {v}")),
        }
    }
}

impl From<bool> for KeyBit {
    fn from(b: bool) -> Self {
        if b {
            KeyBit::One
        } else {
            KeyBit::Zero
        }
    }
}

pub fn mirror_point(m: &AffineMirror, x: &DVector<f64>) -> DVector<f64> {
    m.reflect(x)
}

pub fn encode_mirror(x: &DVector<f64>, key: KeyBit, m: &AffineMirror) -> DVector<f64> {
    match key {
        KeyBit::Zero => x.clone(),
        KeyBit::One => m.reflect(x),
    }
}

/// The reflection is an involution, so decoding is encoding.
pub fn decode_mirror(z: &DVector<f64>, key: KeyBit, m: &AffineMirror) -> DVector<f64> {
    encode_mirror(z, key, m)
}

/// Per-time mirrors `(S_t, b_t)` for `t = 1..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorSchedule(Vec<AffineMirror>);

impl MirrorSchedule {
    pub fn new(mirrors: Vec<AffineMirror>) -> Result<Self> {
        let Some(first) = mirrors.first() else {
            return Err(Error::config("mirror schedule must not be empty"));
        };
        let n = first.state_dim();
        if let Some(bad) = mirrors.iter().position(|m| m.state_dim() != n) {
            return Err(Error::config(format!(
                "mirror {bad} acts on dimension {}, expected {n}",
                mirrors[bad].state_dim()
            )));
        }
        Ok(MirrorSchedule(mirrors))
    }

    pub fn constant(mirror: AffineMirror, horizon: usize) -> Result<Self> {
        Self::new(vec![mirror; horizon])
    }

    /// `S_t = I`, `b_t = μ_{X_t}`: point reflection through each per-time mean.
    pub fn through_means(moments: &[GaussianSpec]) -> Result<Self> {
        Self::new(
            moments
                .iter()
                .map(|m| AffineMirror::point(m.mean.clone()))
                .collect(),
        )
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    pub fn state_dim(&self) -> usize {
        self.0[0].state_dim()
    }

    pub fn mirrors(&self) -> &[AffineMirror] {
        &self.0
    }

    pub fn check_compatible(&self, state_dim: usize, horizon: usize) -> Result<()> {
        if self.horizon() != horizon {
            return Err(Error::dim("mirror schedule length", horizon, self.horizon()));
        }
        if self.state_dim() != state_dim {
            return Err(Error::dim("mirror dimension", state_dim, self.state_dim()));
        }
        Ok(())
    }

    pub fn reflect_path(&self, path: &[DVector<f64>]) -> Vec<DVector<f64>> {
        path.iter().zip(&self.0).map(|(x, m)| m.reflect(x)).collect()
    }

    pub fn encode_path(&self, path: &[DVector<f64>], key: KeyBit) -> Vec<DVector<f64>> {
        match key {
            KeyBit::Zero => path.to_vec(),
            KeyBit::One => self.reflect_path(path),
        }
    }

    pub fn decode_path(&self, codeword: &[DVector<f64>], key: KeyBit) -> Vec<DVector<f64>> {
        self.encode_path(codeword, key)
    }

    /// `‖S_t x_t - b_t‖²` for every `t`.
    pub fn squared_residuals(&self, path: &[DVector<f64>]) -> Vec<f64> {
        path.iter()
            .zip(&self.0)
            .map(|(x, m)| m.residual(x).norm_squared())
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MirrorDoc {
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Serialize for AffineMirror {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MirrorDoc {
            s: to_rows(&self.s),
            b: self.b.iter().copied().collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for AffineMirror {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let doc = MirrorDoc::deserialize(de)?;
        let s = from_rows(&doc.s, "S").map_err(serde::de::Error::custom)?;
        AffineMirror::new(s, DVector::from_vec(doc.b)).map_err(serde::de::Error::custom)
    }
}

impl Serialize for MirrorSchedule {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MirrorSchedule {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let mirrors = Vec::<AffineMirror>::deserialize(de)?;
        MirrorSchedule::new(mirrors).map_err(serde::de::Error::custom)
    }
}

/// Eavesdropper's posterior given a full codeword sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorPosterior {
    /// Probability that the codeword is the true trajectory, `f(Z) / (f(Z) + f(Z̃))`.
    pub p_z: f64,
    /// `E[X_t | Z]` for every `t`.
    pub estimates: Vec<DVector<f64>>,
}

/// `f(a) / (f(a) + f(b))` from log densities.
fn share_of(ln_a: f64, ln_b: f64) -> Option<f64> {
    match (ln_a == f64::NEG_INFINITY, ln_b == f64::NEG_INFINITY) {
        (true, true) => None,
        (true, false) => Some(0.0),
        (false, true) => Some(1.0),
        (false, false) => Some(1.0 / (1.0 + (ln_b - ln_a).exp())),
    }
}

fn posterior_share(
    z: &[DVector<f64>],
    dist: &dyn StateDistribution,
    schedule: &MirrorSchedule,
) -> Result<f64> {
    schedule.check_compatible(dist.state_dim(), dist.horizon())?;
    if z.len() != schedule.horizon() {
        return Err(Error::dim("codeword length", schedule.horizon(), z.len()));
    }
    let mirrored = schedule.reflect_path(z);
    share_of(dist.ln_density(z), dist.ln_density(&mirrored)).ok_or(Error::UndefinedPosterior)
}

pub fn eve_posterior(
    z: &[DVector<f64>],
    dist: &dyn StateDistribution,
    schedule: &MirrorSchedule,
) -> Result<MirrorPosterior> {
    let p_z = posterior_share(z, dist, schedule)?;
    let estimates = z
        .iter()
        .zip(schedule.mirrors())
        .map(|(zt, m)| zt - m.s().transpose() * m.residual(zt) * (2.0 * (1.0 - p_z)))
        .collect();
    Ok(MirrorPosterior { p_z, estimates })
}

/// `D(t, Z) = 4 p_Z (1 - p_Z) ‖S_t Z_t - b_t‖²` for every `t`.
pub fn conditional_distortion(
    z: &[DVector<f64>],
    dist: &dyn StateDistribution,
    schedule: &MirrorSchedule,
) -> Result<Vec<f64>> {
    let p = posterior_share(z, dist, schedule)?;
    let eta = 4.0 * p * (1.0 - p);
    Ok(schedule
        .squared_residuals(z)
        .into_iter()
        .map(|r| eta * r)
        .collect())
}

/// How [`average_distortion`] takes the expectation over `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluation {
    /// Enumerate the finite support. With `held_out`, each support point's
    /// densities are evaluated with its own record removed from the data
    /// the prior was estimated from (falling back to in-sample densities
    /// when both held-out densities vanish).
    Exact {
        held_out: bool,
        budget: u128,
    },
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
}

impl Evaluation {
    pub const DEFAULT_BUDGET: u128 = 50_000_000;

    pub fn exact() -> Self {
        Evaluation::Exact {
            held_out: false,
            budget: Self::DEFAULT_BUDGET,
        }
    }
}

/// Average distortion `D_E` of the mirroring scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageDistortion {
    pub value: f64,
    pub std_error: Option<f64>,
    /// Time-`t` term of the average (before dividing by `T`).
    pub per_time: Vec<f64>,
    pub method: Method,
    pub points: usize,
}

/// Per-time terms `2 f(X̃) / (f(X) + f(X̃)) · ‖S_t X_t - b_t‖²`.
fn integrand(ln_f: f64, ln_f_mirror: f64, residuals: Vec<f64>) -> Vec<f64> {
    // 2 f(X̃)/(f(X) + f(X̃)) = 2 · share_of(X̃, X); zero when f(X̃) = 0.
    let weight = 2.0 * share_of(ln_f_mirror, ln_f).unwrap_or(0.0);
    residuals.into_iter().map(|r| weight * r).collect()
}

/// Evaluates the average distortion as the expectation over `X` of the
/// mirrored-density weight times the squared distance to the mirror.
pub fn average_distortion(
    dist: &dyn StateDistribution,
    schedule: &MirrorSchedule,
    evaluation: Evaluation,
) -> Result<AverageDistortion> {
    schedule.check_compatible(dist.state_dim(), dist.horizon())?;
    let horizon = schedule.horizon();
    match evaluation {
        Evaluation::Exact { held_out, budget } => {
            let support = dist
                .support(budget)?
                .ok_or_else(|| Error::config("exact evaluation needs a distribution with finite support"))?;
            let terms: Vec<Vec<f64>> = map_slice(&support, |pt| {
                let mirrored = schedule.reflect_path(&pt.path);
                let (mut lf, mut lm) = (dist.ln_density(&pt.path), dist.ln_density(&mirrored));
                if held_out {
                    if let Some(rec) = pt.record {
                        let (hf, hm) = (
                            dist.ln_density_held_out(&pt.path, rec),
                            dist.ln_density_held_out(&mirrored, rec),
                        );
                        if hf > f64::NEG_INFINITY || hm > f64::NEG_INFINITY {
                            (lf, lm) = (hf, hm);
                        }
                    }
                }
                integrand(lf, lm, schedule.squared_residuals(&pt.path))
                    .into_iter()
                    .map(|v| v * pt.mass)
                    .collect()
            });
            let per_time: Vec<f64> = (0..horizon)
                .map(|t| pairwise_sum(&terms.iter().map(|v| v[t]).collect::<Vec<_>>()))
                .collect();
            Ok(AverageDistortion {
                value: pairwise_sum(&per_time) / horizon as f64,
                std_error: None,
                per_time,
                method: Method::Exact,
                points: support.len(),
            })
        }
        Evaluation::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::config("Monte Carlo evaluation needs at least 2 samples"));
            }
            let terms: Vec<Vec<f64>> = map_range(samples, |i| {
                let mut rng = stream_rng(seed, i as u64);
                let x = dist.sample(&mut rng);
                let mirrored = schedule.reflect_path(&x);
                integrand(
                    dist.ln_density(&x),
                    dist.ln_density(&mirrored),
                    schedule.squared_residuals(&x),
                )
            });
            let per_sample: Vec<f64> = terms.iter().map(|v| pairwise_sum(v) / horizon as f64).collect();
            let summary = Summary::of(&per_sample);
            let per_time = (0..horizon)
                .map(|t| pairwise_sum(&terms.iter().map(|v| v[t]).collect::<Vec<_>>()) / samples as f64)
                .collect();
            Ok(AverageDistortion {
                value: summary.mean,
                std_error: Some(summary.std_error),
                per_time,
                method: Method::MonteCarlo,
                points: samples,
            })
        }
    }
}

/// Closed form valid when the schedule leaves the prior invariant
/// (`f(X) = f(X̃)`): `(1/T) Σ tr(S R Sᵀ) + ‖b - S μ‖²`.
pub fn average_distortion_closed_form(moments: &[GaussianSpec], schedule: &MirrorSchedule) -> Result<f64> {
    if moments.len() != schedule.horizon() {
        return Err(Error::dim("moments length", schedule.horizon(), moments.len()));
    }
    let terms: Vec<f64> = moments
        .iter()
        .zip(schedule.mirrors())
        .map(|(m, mirror)| {
            let s = mirror.s();
            (s * &m.cov * s.transpose()).trace() + (mirror.b() - s * &m.mean).norm_squared()
        })
        .collect();
    Ok(pairwise_sum(&terms) / moments.len() as f64)
}

/// No-observation baselines `(D_E^max, D_W^max)`:
/// the time-average and the minimum of `tr(R_{X_t})`.
pub fn max_baselines(moments: &[GaussianSpec]) -> (f64, f64) {
    let traces: Vec<f64> = moments.iter().map(|m| m.cov.trace()).collect();
    let de = pairwise_sum(&traces) / traces.len() as f64;
    let dw = traces.iter().copied().fold(f64::INFINITY, f64::min);
    (de, dw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{random_walk_prior, GaussianTrajectory};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    fn std_normal_1d() -> GaussianTrajectory {
        GaussianTrajectory::new(DVector::zeros(1), DMatrix::identity(1, 1), 1).unwrap()
    }

    #[test]
    fn fixed_points_are_unchanged() {
        let m = AffineMirror::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), v(&[2.0])).unwrap();
        let on = v(&[0.5, 1.5]);
        assert!((m.reflect(&on) - &on).norm() < 1e-15);
    }

    #[test]
    fn point_reflection() {
        let m = AffineMirror::point(v(&[1.0, -2.0]));
        assert_eq!(m.reflect(&v(&[3.0, 0.0])), v(&[-1.0, -4.0]));
    }

    #[test]
    fn forty_five_degree_line() {
        let m = AffineMirror::new(
            DMatrix::from_row_slice(1, 2, &[-FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
            v(&[0.0]),
        )
        .unwrap();
        let r = m.reflect(&v(&[1.0, 0.0]));
        assert!((r - v(&[0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn gram_schmidt_preserves_subspace() {
        // Rows (1,1,0), (1,0,0) with b = (2, 1): the line x = 1, y = 1.
        let s = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let m = AffineMirror::new(s, v(&[2.0, 1.0])).unwrap();
        let sst = m.s() * m.s().transpose();
        assert!((sst - DMatrix::identity(2, 2)).amax() < 1e-12);
        let on = v(&[1.0, 1.0, 7.0]);
        assert!(m.residual(&on).norm() < 1e-12);
        assert!((m.reflect(&v(&[2.0, 3.0, 5.0])) - v(&[0.0, -1.0, 5.0])).norm() < 1e-12);
    }

    #[test]
    fn dependent_rows_rejected() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(AffineMirror::new(s, v(&[0.0, 0.0])).is_err());
        assert!(AffineMirror::new(DMatrix::zeros(1, 2), v(&[0.0])).is_err());
    }

    #[test]
    fn encode_examples() {
        let m = AffineMirror::point(v(&[0.0, 0.0]));
        let x = v(&[3.0, -1.0]);
        assert_eq!(encode_mirror(&x, KeyBit::Zero, &m), x);
        assert_eq!(encode_mirror(&x, KeyBit::One, &m), v(&[-3.0, 1.0]));
        let twice = encode_mirror(&encode_mirror(&x, KeyBit::One, &m), KeyBit::One, &m);
        assert_eq!(twice, x);
        assert_eq!(decode_mirror(&v(&[-3.0, 1.0]), KeyBit::One, &m), x);
    }

    #[test]
    fn symmetric_prior_estimate_is_center() {
        let p = std_normal_1d();
        let sched = MirrorSchedule::constant(AffineMirror::point(v(&[0.0])), 1).unwrap();
        let post = eve_posterior(&[v(&[1.0])], &p, &sched).unwrap();
        assert!((post.p_z - 0.5).abs() < 1e-15);
        assert!(post.estimates[0][0].abs() < 1e-15);
    }

    #[test]
    fn codeword_on_mirror_is_known() {
        let p = std_normal_1d();
        let sched = MirrorSchedule::constant(AffineMirror::point(v(&[0.7])), 1).unwrap();
        let z = [v(&[0.7])];
        let post = eve_posterior(&z, &p, &sched).unwrap();
        assert!((post.estimates[0][0] - 0.7).abs() < 1e-15);
        assert_eq!(conditional_distortion(&z, &p, &sched).unwrap(), vec![0.0]);
    }

    #[test]
    fn two_point_distortion() {
        let p = std_normal_1d();
        let sched = MirrorSchedule::constant(AffineMirror::point(v(&[0.0])), 1).unwrap();
        let d = conditional_distortion(&[v(&[2.0])], &p, &sched).unwrap();
        assert!((d[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn impossible_mirror_means_no_distortion() {
        let w = random_walk_prior(1, 2).unwrap();
        // Mirror about 1: the image of 0 is 2, outside [-1, 1].
        let sched = MirrorSchedule::constant(AffineMirror::point(v(&[1.0])), 2).unwrap();
        let z = [v(&[0.0]), v(&[0.0])];
        let post = eve_posterior(&z, &w, &sched).unwrap();
        assert_eq!(post.p_z, 1.0);
        assert_eq!(conditional_distortion(&z, &w, &sched).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_density_codeword_is_an_error() {
        let w = random_walk_prior(1, 1).unwrap();
        let sched = MirrorSchedule::constant(AffineMirror::point(v(&[0.0])), 1).unwrap();
        let r = eve_posterior(&[v(&[5.0])], &w, &sched);
        assert!(matches!(r, Err(Error::UndefinedPosterior)));
    }

    #[test]
    fn baselines_arithmetic() {
        let m: Vec<GaussianSpec> = [1.0, 4.0, 9.0]
            .iter()
            .map(|s| GaussianSpec::new(v(&[0.0]), DMatrix::from_element(1, 1, *s)).unwrap())
            .collect();
        let (de, dw) = max_baselines(&m);
        assert!((de - 14.0 / 3.0).abs() < 1e-15);
        assert_eq!(dw, 1.0);
        let id = vec![GaussianSpec::standard(3); 4];
        assert_eq!(max_baselines(&id), (3.0, 3.0));
    }

    #[test]
    fn closed_form_second_term_vanishes_at_mean() {
        let m = vec![GaussianSpec::new(
            v(&[1.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
        )
        .unwrap()];
        let s = DMatrix::from_row_slice(1, 2, &[0.6, 0.8]);
        let mirror = AffineMirror::new(s.clone(), &s * &m[0].mean).unwrap();
        let sched = MirrorSchedule::constant(mirror, 1).unwrap();
        let expected = (&s * &m[0].cov * s.transpose())[(0, 0)];
        assert!((average_distortion_closed_form(&m, &sched).unwrap() - expected).abs() < 1e-14);
        let full = MirrorSchedule::through_means(&m).unwrap();
        assert!((average_distortion_closed_form(&m, &full).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn exact_needs_finite_support() {
        let p = std_normal_1d();
        let sched = MirrorSchedule::constant(AffineMirror::point(v(&[0.0])), 1).unwrap();
        assert!(average_distortion(&p, &sched, Evaluation::exact()).is_err());
    }

    #[test]
    fn schedule_json_round_trip() {
        let sched = MirrorSchedule::new(vec![
            AffineMirror::new(
                DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
                v(&[0.0, 0.0]),
            )
            .unwrap(),
            AffineMirror::point(v(&[1.0, 2.0, 3.0])),
        ])
        .unwrap();
        let text = serde_json::to_string(&sched).unwrap();
        assert!(text.starts_with(r#"[{"S":[[0.0,1.0,0.0]"#));
        let back: MirrorSchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sched);
        assert!(serde_json::from_str::<MirrorSchedule>("[]").is_err());
    }
}
