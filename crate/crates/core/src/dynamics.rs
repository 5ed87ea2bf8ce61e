//! Linear dynamics `X_{t+1} = A X_t + B U_t + w_t`, `Y_t = C X_t + v_t`.
//!
//! Time indices in this module are 1-based in prose and 0-based in code:
//! `states[0]` is `X_1` and `inputs[0]` is `U_1`.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::matrix::{self, check_psd, from_rows, power, to_rows};
use crate::{Error, Result};

/// Relative singular-value threshold below which the terminal constraint
/// of the LQR problem is treated as unreachable.
pub const REACHABILITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    process_noise_cov: DMatrix<f64>,
    obs_noise_cov: DMatrix<f64>,
}

impl LinearSystem {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        process_noise_cov: DMatrix<f64>,
        obs_noise_cov: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::config(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::dim("B rows", n, b.nrows()));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::dim("C columns", n, c.ncols()));
        }
        if process_noise_cov.shape() != (n, n) {
            return Err(Error::dim("process_noise_cov", n, process_noise_cov.nrows()));
        }
        let p = c.nrows();
        if obs_noise_cov.shape() != (p, p) {
            return Err(Error::dim("obs_noise_cov", p, obs_noise_cov.nrows()));
        }
        check_psd(&process_noise_cov, "process_noise_cov")?;
        check_psd(&obs_noise_cov, "obs_noise_cov")?;
        Ok(LinearSystem {
            a,
            b,
            c,
            process_noise_cov,
            obs_noise_cov,
        })
    }

    /// Noise-free system with full state observation (`C = I`).
    pub fn noise_free(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::new(
            a,
            b,
            DMatrix::identity(n, n),
            DMatrix::zeros(n, n),
            DMatrix::zeros(n, n),
        )
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn process_noise_cov(&self) -> &DMatrix<f64> {
        &self.process_noise_cov
    }
    pub fn obs_noise_cov(&self) -> &DMatrix<f64> {
        &self.obs_noise_cov
    }
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_noise_free(&self) -> bool {
        self.process_noise_cov.iter().all(|v| *v == 0.0)
    }

    /// `C = I` and no observation noise.
    pub fn observes_state_exactly(&self) -> bool {
        let n = self.state_dim();
        self.c.shape() == (n, n)
            && self.c == DMatrix::identity(n, n)
            && self.obs_noise_cov.iter().all(|v| *v == 0.0)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SystemDoc = serde_json::from_str(s)?;
        doc.try_into()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SystemDoc::from(self))?)
    }
}

/// JSON form of a [`LinearSystem`]. `C` defaults to the identity and the
/// noise covariances to zero when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process_noise_cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs_noise_cov: Option<Vec<Vec<f64>>>,
}

impl TryFrom<SystemDoc> for LinearSystem {
    type Error = Error;

    fn try_from(doc: SystemDoc) -> Result<Self> {
        let a = from_rows(&doc.a, "A")?;
        let b = from_rows(&doc.b, "B")?;
        let n = a.nrows();
        let c = match &doc.c {
            Some(rows) => from_rows(rows, "C")?,
            None => DMatrix::identity(n, n),
        };
        let p = c.nrows();
        let w = match &doc.process_noise_cov {
            Some(rows) => from_rows(rows, "process_noise_cov")?,
            None => DMatrix::zeros(n, n),
        };
        let v = match &doc.obs_noise_cov {
            Some(rows) => from_rows(rows, "obs_noise_cov")?,
            None => DMatrix::zeros(p, p),
        };
        LinearSystem::new(a, b, c, w, v)
    }
}

impl From<&LinearSystem> for SystemDoc {
    fn from(s: &LinearSystem) -> Self {
        SystemDoc {
            a: to_rows(&s.a),
            b: to_rows(&s.b),
            c: Some(to_rows(&s.c)),
            process_noise_cov: Some(to_rows(&s.process_noise_cov)),
            obs_noise_cov: Some(to_rows(&s.obs_noise_cov)),
        }
    }
}

/// A state trajectory `X_1..X_T` with the inputs `U_1..U_{T-1}` that drove it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(with = "matrix::serde_dvector_seq")]
    pub states: Vec<DVector<f64>>,
    #[serde(with = "matrix::serde_dvector_seq", default)]
    pub inputs: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.states.len()
    }

    /// Stacked `X_a..X_b` (1-based, inclusive) as one column vector.
    pub fn stacked(&self, from: usize, to: usize) -> DVector<f64> {
        stack(&self.states[from - 1..to])
    }
}

pub fn stack(parts: &[DVector<f64>]) -> DVector<f64> {
    let data: Vec<f64> = parts.iter().flat_map(|v| v.iter().copied()).collect();
    DVector::from_vec(data)
}

pub fn unstack(v: &DVector<f64>, block: usize) -> Vec<DVector<f64>> {
    v.as_slice()
        .chunks(block)
        .map(DVector::from_column_slice)
        .collect()
}

/// Mean and covariance of a Gaussian (or just the first two moments of
/// any distribution).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    #[serde(with = "matrix::serde_dvector")]
    pub mean: DVector<f64>,
    #[serde(with = "matrix::serde_dmatrix")]
    pub cov: DMatrix<f64>,
}

impl GaussianSpec {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.shape() != (mean.len(), mean.len()) {
            return Err(Error::dim("GaussianSpec covariance", mean.len(), cov.nrows()));
        }
        check_psd(&cov, "covariance")?;
        Ok(GaussianSpec { mean, cov })
    }

    pub fn standard(dim: usize) -> Self {
        GaussianSpec {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Block matrices with `X_2^T = Q U + Q̃ w + Q̂ X_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedDynamics {
    /// `n(T-1) x m(T-1)`, block `(i, j)` is `A^{i-j} B` for `i >= j`.
    pub q: DMatrix<f64>,
    /// `n(T-1) x n(T-1)`, block `(i, j)` is `A^{i-j}` for `i >= j`.
    pub q_tilde: DMatrix<f64>,
    /// `n(T-1) x n`, row block `r` is `A^r` (1-based).
    pub q_hat: DMatrix<f64>,
    pub state_dim: usize,
    pub input_dim: usize,
    pub horizon: usize,
    pub noise_free: bool,
}

pub fn stacked_matrices(system: &LinearSystem, horizon: usize) -> Result<StackedDynamics> {
    if horizon < 2 {
        return Err(Error::config(format!("horizon must be >= 2, got {horizon}")));
    }
    let n = system.state_dim();
    let m = system.input_dim();
    let steps = horizon - 1;
    let powers: Vec<DMatrix<f64>> =
        std::iter::successors(Some(DMatrix::identity(n, n)), |p| Some(system.a() * p))
            .take(horizon)
            .collect();

    let mut q = DMatrix::zeros(n * steps, m * steps);
    let mut q_tilde = DMatrix::zeros(n * steps, n * steps);
    let mut q_hat = DMatrix::zeros(n * steps, n);
    for i in 0..steps {
        for j in 0..=i {
            let ab = &powers[i - j] * system.b();
            q.view_mut((i * n, j * m), (n, m)).copy_from(&ab);
            q_tilde.view_mut((i * n, j * n), (n, n)).copy_from(&powers[i - j]);
        }
        q_hat.view_mut((i * n, 0), (n, n)).copy_from(&powers[i + 1]);
    }
    Ok(StackedDynamics {
        q,
        q_tilde,
        q_hat,
        state_dim: n,
        input_dim: m,
        horizon,
        noise_free: system.is_noise_free(),
    })
}

/// Mean and covariance of `X_2^T` for a Gaussian input prior and known `X_1`.
pub fn propagate_gaussian(
    stacked: &StackedDynamics,
    input_prior: &GaussianSpec,
    x1: &DVector<f64>,
) -> Result<GaussianSpec> {
    if !stacked.noise_free {
        return Err(Error::config("propagate_gaussian requires a noise-free system"));
    }
    if input_prior.dim() != stacked.q.ncols() {
        return Err(Error::dim("input prior", stacked.q.ncols(), input_prior.dim()));
    }
    if x1.len() != stacked.state_dim {
        return Err(Error::dim("x1", stacked.state_dim, x1.len()));
    }
    let mean = &stacked.q * &input_prior.mean + &stacked.q_hat * x1;
    let cov = &stacked.q * &input_prior.cov * stacked.q.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianSpec { mean, cov })
}

/// Runs the recursion forward from `x1`. Missing noise is treated as zero.
pub fn simulate(
    system: &LinearSystem,
    x1: &DVector<f64>,
    inputs: &[DVector<f64>],
    noise: Option<&[DVector<f64>]>,
) -> Result<Trajectory> {
    let n = system.state_dim();
    if x1.len() != n {
        return Err(Error::dim("x1", n, x1.len()));
    }
    if let Some(w) = noise {
        if w.len() != inputs.len() {
            return Err(Error::dim("noise sequence length", inputs.len(), w.len()));
        }
    }
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(x1.clone());
    for (t, u) in inputs.iter().enumerate() {
        if u.len() != system.input_dim() {
            return Err(Error::dim("input", system.input_dim(), u.len()));
        }
        let mut next = system.a() * &states[t] + system.b() * u;
        if let Some(w) = noise {
            if w[t].len() != n {
                return Err(Error::dim("noise", n, w[t].len()));
            }
            next += &w[t];
        }
        states.push(next);
    }
    Ok(Trajectory {
        states,
        inputs: inputs.to_vec(),
    })
}

/// Point-to-point LQR over a fixed horizon: minimizes
/// `‖U‖² + state_weight·‖X_2^{T-1}‖²` subject to `X_T = target`.
///
/// The KKT matrix depends only on the system, horizon and weight, so it is
/// factored once and reused for every `(x1, target)` pair.
#[derive(Debug, Clone)]
pub struct LqrPlanner {
    state_dim: usize,
    input_dim: usize,
    horizon: usize,
    state_weight: f64,
    q_inner: DMatrix<f64>,
    q_hat_inner: DMatrix<f64>,
    terminal: DMatrix<f64>,
    q_hat_terminal: DMatrix<f64>,
    kkt: LU<f64, Dyn, Dyn>,
}

impl LqrPlanner {
    pub fn new(system: &LinearSystem, horizon: usize, state_weight: f64) -> Result<Self> {
        if !system.is_noise_free() {
            return Err(Error::config("LQR planning assumes a noise-free system"));
        }
        if !(state_weight >= 0.0) {
            return Err(Error::config(format!(
                "state weight must be >= 0, got {state_weight}"
            )));
        }
        let stacked = stacked_matrices(system, horizon)?;
        let n = stacked.state_dim;
        let m = stacked.input_dim;
        let steps = horizon - 1;
        let inner_rows = n * (steps - 1);
        let q_inner = stacked.q.rows(0, inner_rows).into_owned();
        let q_hat_inner = stacked.q_hat.rows(0, inner_rows).into_owned();
        let terminal = stacked.q.rows(inner_rows, n).into_owned();
        let q_hat_terminal = stacked.q_hat.rows(inner_rows, n).into_owned();

        let sv = terminal.clone().singular_values();
        let smax = sv.max();
        let reachable =
            m * steps >= n && sv.len() == n && smax > 0.0 && sv.min() >= REACHABILITY_TOLERANCE * smax;
        if !reachable {
            return Err(Error::Infeasible(format!(
                "terminal state not reachable in {steps} steps"
            )));
        }

        let vars = m * steps;
        let hessian = DMatrix::identity(vars, vars) + q_inner.transpose() * &q_inner * state_weight;
        let mut kkt = DMatrix::zeros(vars + n, vars + n);
        kkt.view_mut((0, 0), (vars, vars)).copy_from(&(hessian * 2.0));
        kkt.view_mut((0, vars), (vars, n))
            .copy_from(&terminal.transpose());
        kkt.view_mut((vars, 0), (n, vars)).copy_from(&terminal);
        Ok(LqrPlanner {
            state_dim: n,
            input_dim: m,
            horizon,
            state_weight,
            q_inner,
            q_hat_inner,
            terminal,
            q_hat_terminal,
            kkt: kkt.lu(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Optimal input sequence `U_1..U_{T-1}`.
    pub fn solve(&self, x1: &DVector<f64>, target: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        let n = self.state_dim;
        if x1.len() != n {
            return Err(Error::dim("x1", n, x1.len()));
        }
        if target.len() != n {
            return Err(Error::dim("target", n, target.len()));
        }
        let vars = self.input_dim * (self.horizon - 1);
        let free_inner = &self.q_hat_inner * x1;
        let linear = self.q_inner.transpose() * free_inner * (-2.0 * self.state_weight);
        let residual = target - &self.q_hat_terminal * x1;
        let mut rhs = DVector::zeros(vars + n);
        rhs.rows_mut(0, vars).copy_from(&linear);
        rhs.rows_mut(vars, n).copy_from(&residual);
        let sol = self
            .kkt
            .solve(&rhs)
            .ok_or_else(|| Error::Infeasible("singular KKT system".into()))?;
        Ok(unstack(&sol.rows(0, vars).into_owned(), self.input_dim))
    }

    /// `‖U‖² + w·‖X_2^{T-1}‖²` for the given inputs.
    pub fn objective(&self, x1: &DVector<f64>, inputs: &[DVector<f64>]) -> f64 {
        let u = stack(inputs);
        let inner = &self.q_inner * &u + &self.q_hat_inner * x1;
        u.norm_squared() + self.state_weight * inner.norm_squared()
    }

    /// Terminal constraint map `X_T = G U + Q̂_T X_1`; returns `G`.
    pub fn terminal_map(&self) -> &DMatrix<f64> {
        &self.terminal
    }
}

pub fn lqr_point_to_point(
    system: &LinearSystem,
    x1: &DVector<f64>,
    target: &DVector<f64>,
    horizon: usize,
    state_weight: f64,
) -> Result<Vec<DVector<f64>>> {
    LqrPlanner::new(system, horizon, state_weight)?.solve(x1, target)
}

/// Stand-in quadrotor model: an independent double integrator per axis,
/// discretized by zero-order hold with sample time `ts`.
///
/// State `(p_x, p_y, p_z, v_x, v_y, v_z)`, input `(a_x, a_y, a_z)`:
///
/// ```text
/// A = [ I  ts·I ]    B = [ ts²/2·I ]
///     [ 0   I   ]        [  ts·I   ]
/// ```
pub fn quadrotor_standin(ts: f64) -> LinearSystem {
    let i3 = DMatrix::<f64>::identity(3, 3);
    let mut a = DMatrix::identity(6, 6);
    a.view_mut((0, 3), (3, 3)).copy_from(&(&i3 * ts));
    let mut b = DMatrix::zeros(6, 3);
    b.view_mut((0, 0), (3, 3)).copy_from(&(&i3 * (ts * ts / 2.0)));
    b.view_mut((3, 0), (3, 3)).copy_from(&(&i3 * ts));
    LinearSystem::noise_free(a, b).expect("stand-in model dimensions are consistent")
}

/// `A^{exp}` for the system matrix.
pub fn state_power(system: &LinearSystem, exp: usize) -> DMatrix<f64> {
    power(system.a(), exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(a: f64, b: f64) -> LinearSystem {
        LinearSystem::noise_free(DMatrix::from_element(1, 1, a), DMatrix::from_element(1, 1, b)).unwrap()
    }

    fn double_integrator() -> LinearSystem {
        LinearSystem::noise_free(
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 1, &[0.5, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn identity_single_step() {
        let sys = LinearSystem::noise_free(DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        let s = stacked_matrices(&sys, 2).unwrap();
        assert_eq!(s.q, DMatrix::identity(2, 2));
        assert_eq!(s.q_tilde, DMatrix::identity(2, 2));
        assert_eq!(s.q_hat, DMatrix::identity(2, 2));
    }

    #[test]
    fn scalar_two_step_by_hand() {
        // X2 = 2 X1 + U1, X3 = 4 X1 + 2 U1 + U2
        let s = stacked_matrices(&scalar(2.0, 1.0), 3).unwrap();
        assert_eq!(s.q, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 1.0]));
        assert_eq!(s.q_hat, DMatrix::from_row_slice(2, 1, &[2.0, 4.0]));
    }

    #[test]
    fn horizon_one_rejected() {
        assert!(stacked_matrices(&scalar(1.0, 1.0), 1).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let r = LinearSystem::noise_free(DMatrix::identity(2, 2), DMatrix::identity(3, 1));
        assert!(matches!(r, Err(Error::Dimension { .. })));
        let r = LinearSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 1),
            DMatrix::identity(1, 3),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(1, 1),
        );
        assert!(r.is_err());
    }

    #[test]
    fn noise_must_be_psd() {
        let r = LinearSystem::new(
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::zeros(1, 1),
        );
        assert!(r.is_err());
    }

    #[test]
    fn stacked_identity_holds_on_random_noisy_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..4);
            let m = rng.random_range(1..3);
            let horizon = rng.random_range(2..8);
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.2..1.2));
            let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
            let sys = LinearSystem::new(
                a,
                b,
                DMatrix::identity(n, n),
                DMatrix::identity(n, n),
                DMatrix::zeros(n, n),
            )
            .unwrap();
            let x1 = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
            let u: Vec<_> = (0..horizon - 1)
                .map(|_| DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let w: Vec<_> = (0..horizon - 1)
                .map(|_| DVector::from_fn(n, |_, _| rng.random_range(-0.1..0.1)))
                .collect();
            let traj = simulate(&sys, &x1, &u, Some(&w)).unwrap();
            let s = stacked_matrices(&sys, horizon).unwrap();
            let lhs = traj.stacked(2, horizon);
            let rhs = &s.q * stack(&u) + &s.q_tilde * stack(&w) + &s.q_hat * &x1;
            assert!((&lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn propagate_zero_mean() {
        let sys = double_integrator();
        let s = stacked_matrices(&sys, 4).unwrap();
        let prior = GaussianSpec::standard(3);
        let g = propagate_gaussian(&s, &prior, &DVector::zeros(2)).unwrap();
        assert_eq!(g.mean, DVector::zeros(6));
        check_psd(&g.cov, "cov").unwrap();
    }

    #[test]
    fn propagate_scalar_by_hand() {
        let s = stacked_matrices(&scalar(2.0, 1.0), 2).unwrap();
        let prior = GaussianSpec::new(DVector::from_element(1, 1.0), DMatrix::identity(1, 1)).unwrap();
        let g = propagate_gaussian(&s, &prior, &DVector::from_element(1, 3.0)).unwrap();
        assert_eq!(g.mean[0], 7.0);
        assert_eq!(g.cov[(0, 0)], 1.0);
    }

    #[test]
    fn propagate_rejects_noisy_system() {
        let sys = LinearSystem::new(
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let s = stacked_matrices(&sys, 2).unwrap();
        assert!(propagate_gaussian(&s, &GaussianSpec::standard(1), &DVector::zeros(1)).is_err());
    }

    #[test]
    fn simulate_fixed_point_and_cumsum() {
        let sys = LinearSystem::noise_free(DMatrix::identity(2, 2), DMatrix::zeros(2, 1)).unwrap();
        let x1 = DVector::from_vec(vec![1.5, -2.0]);
        let u = vec![DVector::from_element(1, 3.0); 4];
        let t = simulate(&sys, &x1, &u, None).unwrap();
        assert!(t.states.iter().all(|x| x == &x1));

        let t = simulate(
            &scalar(1.0, 1.0),
            &DVector::zeros(1),
            &vec![DVector::from_element(1, 1.0); 2],
            None,
        )
        .unwrap();
        let xs: Vec<f64> = t.states.iter().map(|x| x[0]).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn simulate_rejects_bad_noise_length() {
        let sys = scalar(1.0, 1.0);
        let u = vec![DVector::zeros(1); 3];
        let w = vec![DVector::zeros(1); 2];
        assert!(simulate(&sys, &DVector::zeros(1), &u, Some(&w)).is_err());
    }

    #[test]
    fn lqr_zero_problem() {
        let u = lqr_point_to_point(
            &double_integrator(),
            &DVector::zeros(2),
            &DVector::zeros(2),
            5,
            10.0,
        )
        .unwrap();
        assert!(u.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn lqr_one_step_forced() {
        let u = lqr_point_to_point(
            &scalar(1.0, 1.0),
            &DVector::zeros(1),
            &DVector::from_element(1, 5.0),
            2,
            10.0,
        )
        .unwrap();
        assert_relative_eq!(u[0][0], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn lqr_unreachable_target() {
        // Double integrator cannot hit an arbitrary (p, v) in one step.
        let r = lqr_point_to_point(
            &double_integrator(),
            &DVector::zeros(2),
            &DVector::from_vec(vec![1.0, 0.0]),
            2,
            1.0,
        );
        assert!(matches!(r, Err(Error::Infeasible(_))));
        // B = 0 never reaches anything.
        let r = LinearSystem::noise_free(DMatrix::identity(1, 1), DMatrix::zeros(1, 1))
            .and_then(|s| lqr_point_to_point(&s, &DVector::zeros(1), &DVector::from_element(1, 1.0), 4, 1.0));
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }

    #[test]
    fn lqr_hits_target() {
        let sys = quadrotor_standin(0.5);
        let x1 = DVector::from_vec(vec![-1.0, 0.3, -0.7, 0.0, 0.0, 0.0]);
        let xt = DVector::from_vec(vec![1.0, -0.2, 0.9, 0.0, 0.0, 0.0]);
        let u = lqr_point_to_point(&sys, &x1, &xt, 10, 10.0).unwrap();
        let traj = simulate(&sys, &x1, &u, None).unwrap();
        assert!((&traj.states[9] - &xt).norm() < 1e-6);
    }

    #[test]
    fn system_json_round_trip_and_defaults() {
        let sys = double_integrator();
        let back = LinearSystem::from_json_str(&sys.to_json_string().unwrap()).unwrap();
        assert_eq!(sys, back);
        let minimal = LinearSystem::from_json_str(r#"{"A": [[2.0]], "B": [[1.0]]}"#).unwrap();
        assert!(minimal.observes_state_exactly());
        assert!(LinearSystem::from_json_str(r#"{"A": [[2.0]], "B": [[1.0]], "D": 1}"#).is_err());
    }
}
