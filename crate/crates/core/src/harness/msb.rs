//! Plausibility attack on a naive most-significant-bit flip.
//!
//! A drone on a `2^bits x 2^bits` grid moves at most one cell per axis per
//! step. Flipping the top bit of each coordinate hides the position, but a
//! trajectory that crosses the middle of the region turns into one that
//! jumps across it, which the eavesdropper can reject. Mirroring inside the
//! region preserves adjacency and never gives itself away.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::LinearSystem;
use crate::{Error, Result};

/// Square grid region `{0, .., 2^bits - 1}^d` with king-move adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRegion {
    pub bits: u32,
    pub dim: usize,
}

impl GridRegion {
    pub fn new(bits: u32, dim: usize) -> Result<Self> {
        if !(1..=30).contains(&bits) || dim == 0 {
            return Err(Error::config(format!(
                "invalid grid region: {bits} bits, dimension {dim}"
            )));
        }
        Ok(GridRegion { bits, dim })
    }

    pub fn side(&self) -> i64 {
        1 << self.bits
    }

    pub fn contains(&self, cell: &[i64]) -> bool {
        cell.len() == self.dim && cell.iter().all(|&c| (0..self.side()).contains(&c))
    }

    pub fn adjacent(a: &[i64], b: &[i64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1)
    }

    pub fn msb_flip(&self, cell: &[i64]) -> Vec<i64> {
        cell.iter().map(|&c| c ^ (1 << (self.bits - 1))).collect()
    }

    /// Reflection through the center of the region.
    pub fn mirror(&self, cell: &[i64]) -> Vec<i64> {
        cell.iter().map(|&c| self.side() - 1 - c).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// First (1-based) step at which the candidate breaks a constraint.
    InfeasibleAt(usize),
    Never,
}

/// First step at which `path` leaves the region or makes an illegal move.
pub fn grid_feasibility(region: &GridRegion, path: &[Vec<i64>]) -> Verdict {
    for (t, cell) in path.iter().enumerate() {
        if !region.contains(cell) || (t > 0 && !GridRegion::adjacent(&path[t - 1], cell)) {
            return Verdict::InfeasibleAt(t + 1);
        }
    }
    Verdict::Never
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsbDemo {
    pub flipped: Verdict,
    pub mirrored: Verdict,
}

/// Checks the MSB-flipped and the mirrored version of a feasible grid
/// trajectory against the region and move constraints.
pub fn msb_attack_demo(region: &GridRegion, trajectory: &[Vec<i64>]) -> Result<MsbDemo> {
    if trajectory.is_empty() {
        return Err(Error::config("trajectory must not be empty"));
    }
    if let Verdict::InfeasibleAt(t) = grid_feasibility(region, trajectory) {
        return Err(Error::config(format!(
            "input trajectory is itself infeasible at step {t}"
        )));
    }
    let flipped: Vec<Vec<i64>> = trajectory.iter().map(|c| region.msb_flip(c)).collect();
    let mirrored: Vec<Vec<i64>> = trajectory.iter().map(|c| region.mirror(c)).collect();
    Ok(MsbDemo {
        flipped: grid_feasibility(region, &flipped),
        mirrored: grid_feasibility(region, &mirrored),
    })
}

/// Continuous counterpart: first step where a candidate state leaves the
/// box `bounds` or the one-step residual `‖X_{t+1} - A X_t - B U_t‖`
/// exceeds `tol`.
pub fn continuous_feasibility(
    system: &LinearSystem,
    bounds: &[(f64, f64)],
    states: &[DVector<f64>],
    inputs: &[DVector<f64>],
    tol: f64,
) -> Result<Verdict> {
    if bounds.len() != system.state_dim() {
        return Err(Error::dim("feasibility bounds", system.state_dim(), bounds.len()));
    }
    if inputs.len() + 1 < states.len() {
        return Err(Error::dim(
            "feasibility inputs",
            states.len().saturating_sub(1),
            inputs.len(),
        ));
    }
    for (t, x) in states.iter().enumerate() {
        if x.len() != bounds.len() {
            return Err(Error::dim("candidate state", bounds.len(), x.len()));
        }
        let inside = x.iter().zip(bounds).all(|(v, (lo, hi))| lo <= v && v <= hi);
        let consistent =
            t == 0 || (x - system.a() * &states[t - 1] - system.b() * &inputs[t - 1]).norm() <= tol;
        if !inside || !consistent {
            return Ok(Verdict::InfeasibleAt(t + 1));
        }
    }
    Ok(Verdict::Never)
}
