use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{DistributionKind, StateDistribution, SupportPoint};
use crate::dynamics::{GaussianSpec, Trajectory};
use crate::{Error, Result};

type Key = Box<[i32]>;

/// Axis-aligned grid of cubic bins. The bin index of `x` is
/// `floor((x - origin) / bin_width)` componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    bin_width: f64,
    origin: DVector<f64>,
}

impl BinGrid {
    pub fn new(bin_width: f64, origin: DVector<f64>) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::config(format!(
                "bin width must be positive, got {bin_width}"
            )));
        }
        Ok(BinGrid { bin_width, origin })
    }

    /// Grid whose bin centers sit on the lattice `bin_width · Z^dim`, so the
    /// bins are symmetric under `x -> -x`.
    pub fn centered(bin_width: f64, dim: usize) -> Result<Self> {
        Self::new(bin_width, DVector::from_element(dim, -bin_width / 2.0))
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn index(&self, x: &DVector<f64>) -> Vec<i32> {
        x.iter()
            .zip(self.origin.iter())
            .map(|(v, o)| ((v - o) / self.bin_width).floor() as i32)
            .collect()
    }

    pub fn center(&self, index: &[i32]) -> DVector<f64> {
        DVector::from_fn(index.len(), |i, _| {
            self.origin[i] + (index[i] as f64 + 0.5) * self.bin_width
        })
    }
}

/// How the joint mass of a bin sequence is estimated from corpus counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointModel {
    /// Relative frequency of the full bin-index sequence.
    #[default]
    Fingerprint,
    /// Time-inhomogeneous first-order Markov chain fitted to the counts:
    /// `f(X) = f_1(X_1) · Π_t f_{t|t-1}(X_t | X_{t-1})`.
    Markov,
}

/// Binned empirical distribution of a trajectory corpus.
#[derive(Debug, Clone)]
pub struct EmpiricalGrid {
    grid: BinGrid,
    projection: Vec<usize>,
    horizon: usize,
    model: JointModel,
    total: u64,
    /// Distinct bin sequences with their counts, sorted by sequence.
    records: Vec<(Key, u64)>,
    fingerprints: HashMap<Key, u64>,
    marginals: Vec<HashMap<Key, u64>>,
    transitions: Vec<HashMap<Key, u64>>,
}

/// Bins a corpus with a centered grid and the fingerprint model.
pub fn empirical_from_corpus(
    trajectories: &[Trajectory],
    bin_width: f64,
    projection: &[usize],
) -> Result<EmpiricalGrid> {
    EmpiricalGrid::from_corpus(
        trajectories,
        BinGrid::centered(bin_width, projection.len())?,
        projection,
        JointModel::Fingerprint,
    )
}

impl EmpiricalGrid {
    pub fn from_corpus(
        trajectories: &[Trajectory],
        grid: BinGrid,
        projection: &[usize],
        model: JointModel,
    ) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or_else(|| Error::config("empirical distribution needs a non-empty corpus"))?;
        let horizon = first.horizon();
        let state_dim = first.states.first().map_or(0, |x| x.len());
        if projection.is_empty() || projection.iter().any(|&i| i >= state_dim) {
            return Err(Error::config(format!(
                "projection {projection:?} is invalid for state dimension {state_dim}"
            )));
        }
        if grid.dim() != projection.len() {
            return Err(Error::dim("bin grid", projection.len(), grid.dim()));
        }
        let d = projection.len();
        let mut fingerprints: HashMap<Key, u64> = HashMap::new();
        for (k, traj) in trajectories.iter().enumerate() {
            if traj.horizon() != horizon {
                return Err(Error::config(format!(
                    "trajectory {k} has horizon {}, expected {horizon}",
                    traj.horizon()
                )));
            }
            let mut seq = Vec::with_capacity(d * horizon);
            for x in &traj.states {
                if x.len() != state_dim {
                    return Err(Error::dim("corpus state", state_dim, x.len()));
                }
                let projected = DVector::from_iterator(d, projection.iter().map(|&i| x[i]));
                seq.extend(grid.index(&projected));
            }
            *fingerprints.entry(seq.into_boxed_slice()).or_insert(0) += 1;
        }
        Ok(Self::from_counts(
            grid,
            projection.to_vec(),
            horizon,
            model,
            fingerprints,
        ))
    }

    fn from_counts(
        grid: BinGrid,
        projection: Vec<usize>,
        horizon: usize,
        model: JointModel,
        fingerprints: HashMap<Key, u64>,
    ) -> Self {
        let d = projection.len();
        let mut records: Vec<(Key, u64)> = fingerprints.iter().map(|(k, c)| (k.clone(), *c)).collect();
        records.sort();
        let total = records.iter().map(|(_, c)| c).sum();
        let mut marginals = vec![HashMap::new(); horizon];
        let mut transitions = vec![HashMap::new(); horizon.saturating_sub(1)];
        for (seq, count) in &records {
            for t in 0..horizon {
                let key: Key = seq[t * d..(t + 1) * d].into();
                *marginals[t].entry(key).or_insert(0) += count;
                if t + 1 < horizon {
                    let key: Key = seq[t * d..(t + 2) * d].into();
                    *transitions[t].entry(key).or_insert(0) += count;
                }
            }
        }
        EmpiricalGrid {
            grid,
            projection,
            horizon,
            model,
            total,
            records,
            fingerprints,
            marginals,
            transitions,
        }
    }

    pub fn with_model(mut self, model: JointModel) -> Self {
        self.model = model;
        self
    }

    pub fn model(&self) -> JointModel {
        self.model
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct_sequences(&self) -> usize {
        self.records.len()
    }

    /// Count of a per-time bin at 1-based time `t`.
    pub fn bin_count(&self, t: usize, index: &[i32]) -> u64 {
        self.marginals[t - 1].get(index).copied().unwrap_or(0)
    }

    /// Mean position pooled over all records and all time steps.
    pub fn pooled_mean(&self) -> DVector<f64> {
        let moments = self.per_time_moments();
        let sum = moments
            .iter()
            .fold(DVector::zeros(self.projection.len()), |acc, m| acc + &m.mean);
        sum / self.horizon as f64
    }

    fn sequence_of(&self, path: &[DVector<f64>]) -> Option<Vec<i32>> {
        let d = self.projection.len();
        if path.len() != self.horizon || path.iter().any(|x| x.len() != d) {
            return None;
        }
        Some(path.iter().flat_map(|x| self.grid.index(x)).collect())
    }

    fn ln_mass(&self, seq: &[i32], exclude: Option<&[i32]>) -> f64 {
        let d = self.projection.len();
        let held = u64::from(exclude.is_some());
        let less = |table: &HashMap<Key, u64>, lo: usize, hi: usize| -> i64 {
            let c = table.get(&seq[lo..hi]).copied().unwrap_or(0) as i64;
            match exclude {
                Some(ex) if ex[lo..hi] == seq[lo..hi] => c - 1,
                _ => c,
            }
        };
        let n = (self.total - held) as f64;
        if n <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self.model {
            JointModel::Fingerprint => {
                let c = less(&self.fingerprints, 0, seq.len());
                if c <= 0 {
                    f64::NEG_INFINITY
                } else {
                    (c as f64 / n).ln()
                }
            }
            JointModel::Markov => {
                let c0 = less(&self.marginals[0], 0, d);
                if c0 <= 0 {
                    return f64::NEG_INFINITY;
                }
                let mut ln = (c0 as f64 / n).ln();
                for t in 1..self.horizon {
                    let joint = less(&self.transitions[t - 1], (t - 1) * d, (t + 1) * d);
                    if joint <= 0 {
                        return f64::NEG_INFINITY;
                    }
                    let prev = less(&self.marginals[t - 1], (t - 1) * d, t * d);
                    ln += (joint as f64 / prev as f64).ln();
                }
                ln
            }
        }
    }

    fn centers_of(&self, seq: &[i32]) -> Vec<DVector<f64>> {
        seq.chunks(self.projection.len())
            .map(|idx| self.grid.center(idx))
            .collect()
    }

    /// Writes the per-time bin tables as CSV: `t, i0..i{d-1}, count`.
    pub fn write_grid_csv<W: Write>(&self, out: W) -> Result<()> {
        let d = self.projection.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|i| format!("i{i}")));
        header.push("count".into());
        w.write_record(&header)?;
        for (t, table) in self.marginals.iter().enumerate() {
            let mut rows: Vec<_> = table.iter().collect();
            rows.sort();
            for (key, count) in rows {
                let mut rec = vec![(t + 1).to_string()];
                rec.extend(key.iter().map(i32::to_string));
                rec.push(count.to_string());
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl StateDistribution for EmpiricalGrid {
    fn kind(&self) -> DistributionKind {
        DistributionKind::EmpiricalGrid
    }

    fn state_dim(&self) -> usize {
        self.projection.len()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn ln_density(&self, path: &[DVector<f64>]) -> f64 {
        match self.sequence_of(path) {
            Some(seq) => self.ln_mass(&seq, None),
            None => f64::NEG_INFINITY,
        }
    }

    fn ln_density_held_out(&self, path: &[DVector<f64>], record: usize) -> f64 {
        match (self.sequence_of(path), self.records.get(record)) {
            (Some(seq), Some((own, _))) => self.ln_mass(&seq, Some(own)),
            (Some(seq), None) => self.ln_mass(&seq, None),
            (None, _) => f64::NEG_INFINITY,
        }
    }

    /// Draws a corpus record (as bin centers) in proportion to its count.
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<DVector<f64>> {
        let mut u = rng.random_range(0..self.total);
        for (seq, count) in &self.records {
            if u < *count {
                return self.centers_of(seq);
            }
            u -= count;
        }
        unreachable!("record counts sum to total")
    }

    fn per_time_moments(&self) -> Vec<GaussianSpec> {
        let d = self.projection.len();
        let n = self.total as f64;
        (0..self.horizon)
            .map(|t| {
                let mut mean = DVector::zeros(d);
                for (seq, c) in &self.records {
                    mean += self.grid.center(&seq[t * d..(t + 1) * d]) * (*c as f64);
                }
                mean /= n;
                let mut cov = DMatrix::zeros(d, d);
                for (seq, c) in &self.records {
                    let dev = self.grid.center(&seq[t * d..(t + 1) * d]) - &mean;
                    cov += &dev * dev.transpose() * (*c as f64);
                }
                cov /= n;
                GaussianSpec { mean, cov }
            })
            .collect()
    }

    /// One support point per distinct bin sequence of the corpus, located at
    /// the bin centers and weighted by relative frequency.
    fn support(&self, budget: u128) -> Result<Option<Vec<SupportPoint>>> {
        if self.records.len() as u128 > budget {
            return Err(Error::BudgetExceeded {
                needed: self.records.len() as u128,
                budget,
            });
        }
        let n = self.total as f64;
        Ok(Some(
            self.records
                .iter()
                .enumerate()
                .map(|(i, (seq, c))| SupportPoint {
                    path: self.centers_of(seq),
                    mass: *c as f64 / n,
                    record: Some(i),
                })
                .collect(),
        ))
    }
}

/// One trajectory per line.
pub fn write_corpus_ndjson<W: Write>(mut out: W, corpus: &[Trajectory]) -> Result<()> {
    for traj in corpus {
        serde_json::to_writer(&mut out, traj)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_corpus_ndjson<R: BufRead>(input: R) -> Result<Vec<Trajectory>> {
    let mut corpus = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        corpus.push(serde_json::from_str(&line)?);
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(points: &[[f64; 2]]) -> Trajectory {
        Trajectory {
            states: points.iter().map(|p| DVector::from_row_slice(p)).collect(),
            inputs: vec![],
        }
    }

    fn path(points: &[[f64; 2]]) -> Vec<DVector<f64>> {
        traj(points).states
    }

    #[test]
    fn indexing_follows_floor_rule() {
        let g = BinGrid::new(0.2, DVector::from_vec(vec![0.0, -1.0])).unwrap();
        assert_eq!(g.index(&DVector::from_vec(vec![0.39, -1.01])), vec![1, -1]);
        let c = BinGrid::centered(0.2, 1).unwrap();
        assert_eq!(c.index(&DVector::from_element(1, -1.0)), vec![-5]);
        assert!((c.center(&[3])[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn single_trajectory_has_unit_mass() {
        let corpus = vec![traj(&[[0.0, 0.0], [0.5, 0.1]])];
        let g = empirical_from_corpus(&corpus, 0.2, &[0, 1]).unwrap();
        assert_eq!(g.density(&corpus[0].states), 1.0);
        let m = g.with_model(JointModel::Markov);
        assert_eq!(m.density(&corpus[0].states), 1.0);
    }

    #[test]
    fn two_distinct_trajectories_half_each() {
        let corpus = vec![traj(&[[0.0, 0.0], [0.5, 0.1]]), traj(&[[1.0, 1.0], [1.5, 1.1]])];
        let g = empirical_from_corpus(&corpus, 0.2, &[0, 1]).unwrap();
        for t in &corpus {
            assert_eq!(g.density(&t.states), 0.5);
        }
        assert_eq!(g.density(&path(&[[3.0, 3.0], [0.0, 0.0]])), 0.0);
    }

    #[test]
    fn markov_model_mixes_shared_bins() {
        // Both runs pass through bin (0,0) at t = 2; the chain allows the
        // crossed-over sequences, the fingerprint table does not.
        let corpus = vec![
            traj(&[[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]),
            traj(&[[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0]]),
        ];
        let crossed = path(&[[-1.0, 0.0], [0.0, 0.0], [1.0, 1.0]]);
        let fp = empirical_from_corpus(&corpus, 0.2, &[0, 1]).unwrap();
        assert_eq!(fp.density(&crossed), 0.0);
        let mk = fp.with_model(JointModel::Markov);
        assert!((mk.density(&crossed) - 0.25).abs() < 1e-15);
        assert!((mk.density(&corpus[0].states) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn held_out_removes_one_copy() {
        let a = traj(&[[0.0, 0.0], [0.5, 0.1]]);
        let b = traj(&[[1.0, 1.0], [1.5, 1.1]]);
        let corpus = vec![a.clone(), a.clone(), b.clone()];
        let g = empirical_from_corpus(&corpus, 0.2, &[0, 1]).unwrap();
        let support = g.support(10).unwrap().unwrap();
        let ia = support
            .iter()
            .position(|p| (p.mass - 2.0 / 3.0).abs() < 1e-15)
            .unwrap();
        let ib = 1 - ia;
        assert!((g.ln_density_held_out(&a.states, ia).exp() - 0.5).abs() < 1e-15);
        assert_eq!(g.ln_density_held_out(&b.states, ib), f64::NEG_INFINITY);
        assert!((g.ln_density_held_out(&b.states, ia).exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn counts_are_consistent() {
        let corpus: Vec<_> = (0..20)
            .map(|k| traj(&[[k as f64 * 0.07, 0.0], [k as f64 * 0.11, 0.3]]))
            .collect();
        let g = empirical_from_corpus(&corpus, 0.2, &[0, 1]).unwrap();
        for table in &g.marginals {
            assert_eq!(table.values().sum::<u64>(), g.total());
        }
        let support = g.support(1000).unwrap().unwrap();
        let mass: f64 = support.iter().map(|p| p.mass).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_and_bad_projection_rejected() {
        assert!(empirical_from_corpus(&[], 0.2, &[0]).is_err());
        let corpus = vec![traj(&[[0.0, 0.0]])];
        assert!(empirical_from_corpus(&corpus, 0.2, &[2]).is_err());
        assert!(empirical_from_corpus(&corpus, 0.0, &[0]).is_err());
    }

    #[test]
    fn ndjson_and_csv_export() {
        let corpus = vec![traj(&[[0.0, 0.0], [0.5, 0.1]]), traj(&[[1.0, 1.0], [1.5, 1.1]])];
        let mut buf = Vec::new();
        write_corpus_ndjson(&mut buf, &corpus).unwrap();
        assert_eq!(buf.iter().filter(|b| **b == b'\n').count(), 2);
        let back = read_corpus_ndjson(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, corpus);

        let g = empirical_from_corpus(&corpus, 0.2, &[0, 1]).unwrap();
        let mut csv = Vec::new();
        g.write_grid_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,i0,i1,count\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
