//! Bayesian A-optimal design utility
//! `g(S) = tr(Σ) − tr((Σ⁻¹ + σ⁻² X_S X_Sᵀ)⁻¹)`.
//!
//! [`AOptState`] keeps `M_S⁻¹` for its cursor set and updates it with the
//! rank-one matrix inversion lemma on every commit, so a marginal gain costs a
//! single matrix-vector product:
//!
//! ```text
//! z_e      = M_S⁻¹ x_e
//! g(e | S) = ‖z_e‖² / (σ² + ⟨x_e, z_e⟩)
//! M_{S+e}⁻¹ = M_S⁻¹ − z_e z_eᵀ / (σ² + ⟨x_e, z_e⟩)
//! ```

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ground::{check_element, check_set, IncrementalOracle, IndexSet, ModularCost, ValueOracle};

const SYMMETRY_TOL: f64 = 1e-10;

/// Measurement vectors (columns of `x`), prior covariance and noise variance.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    x: DMatrix<f64>,
    sigma: DMatrix<f64>,
    sigma_inv: DMatrix<f64>,
    sigma2: f64,
}

impl DesignProblem {
    /// `x` is `d × n`, `sigma` is `d × d` symmetric positive definite and
    /// `sigma2 > 0` is the noise variance.
    pub fn new(x: DMatrix<f64>, sigma: DMatrix<f64>, sigma2: f64) -> Result<Self> {
        let d = x.nrows();
        if d == 0 || x.ncols() == 0 {
            return Err(Error::param("x", "measurement matrix must be non-empty"));
        }
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::param(
                "sigma",
                format!("prior is {}x{}, expected {d}x{d}", sigma.nrows(), sigma.ncols()),
            ));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::param("sigma2", format!("noise variance must be positive, got {sigma2}")));
        }
        if x.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("x", "entries must be finite"));
        }
        let scale = sigma.amax().max(1.0);
        if (&sigma - sigma.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::param("sigma", "prior covariance must be symmetric"));
        }
        let chol = Cholesky::new(sigma.clone())
            .ok_or_else(|| Error::param("sigma", "prior covariance must be positive definite"))?;
        let sigma_inv = symmetrize(chol.inverse());
        Ok(Self {
            x,
            sigma,
            sigma_inv,
            sigma2,
        })
    }

    /// Column-major constructor, `x_data.len() == d * n`.
    pub fn from_column_major(d: usize, n: usize, x_data: &[f64], sigma_data: &[f64], sigma2: f64) -> Result<Self> {
        if x_data.len() != d * n || sigma_data.len() != d * d {
            return Err(Error::param("x", "matrix data length does not match the stated shape"));
        }
        Self::new(
            DMatrix::from_column_slice(d, n, x_data),
            DMatrix::from_column_slice(d, d, sigma_data),
            sigma2,
        )
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `(Σ⁻¹ + σ⁻² X_S X_Sᵀ)⁻¹` by a Cholesky solve against the identity.
    pub fn dense_posterior(&self, set: &IndexSet) -> Result<DMatrix<f64>> {
        check_set(set, self.n())?;
        let d = self.dim();
        let mut m = self.sigma_inv.clone();
        for e in set.iter() {
            let col = self.x.column(e);
            m.ger(1.0 / self.sigma2, &col, &col, 1.0);
        }
        let chol = Cholesky::new(symmetrize(m))
            .ok_or_else(|| Error::Numerical("posterior precision is not positive definite".into()))?;
        Ok(chol.solve(&DMatrix::identity(d, d)))
    }

    /// `g(S)` from scratch; exactly `0` at `∅`, where the round trip through
    /// `Σ⁻¹` would leave conditioning noise.
    pub fn dense_value(&self, set: &IndexSet) -> Result<f64> {
        check_set(set, self.n())?;
        if set.is_empty() {
            return Ok(0.0);
        }
        Ok(self.sigma.trace() - self.dense_posterior(set)?.trace())
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Incremental A-optimality oracle.
#[derive(Debug, Clone)]
pub struct AOptState {
    problem: Arc<DesignProblem>,
    cursor: IndexSet,
    minv: DMatrix<f64>,
    trace_prior: f64,
    self_check: bool,
}

impl AOptState {
    pub fn new(problem: impl Into<Arc<DesignProblem>>) -> Self {
        let problem = problem.into();
        let n = problem.n();
        Self {
            minv: problem.sigma.clone(),
            trace_prior: problem.sigma.trace(),
            cursor: IndexSet::empty(n),
            problem,
            self_check: false,
        }
    }

    /// After each commit, compare against a dense solve and replace `M_S⁻¹`
    /// when the traces disagree by more than `1e-6` relative.
    pub fn with_self_check(mut self, enabled: bool) -> Self {
        self.self_check = enabled;
        self
    }

    pub fn problem(&self) -> &DesignProblem {
        &self.problem
    }

    /// Current `M_S⁻¹`.
    pub fn posterior(&self) -> &DMatrix<f64> {
        &self.minv
    }

    fn gain(&self, e: usize) -> (DVector<f64>, f64, f64) {
        let x = self.problem.x.column(e);
        let z = &self.minv * x;
        let denom = self.problem.sigma2 + x.dot(&z);
        let gain = z.norm_squared() / denom;
        (z, denom, gain)
    }
}

impl ValueOracle for AOptState {
    fn ground_size(&self) -> usize {
        self.problem.n()
    }

    /// Always a dense solve, independent of the cursor.
    fn value(&self, set: &IndexSet) -> Result<f64> {
        self.problem.dense_value(set)
    }
}

impl IncrementalOracle for AOptState {
    fn cursor(&self) -> &IndexSet {
        &self.cursor
    }

    fn marginal(&self, e: usize) -> Result<f64> {
        check_element(e, self.ground_size())?;
        if self.cursor.contains(e) {
            return Ok(0.0);
        }
        Ok(self.gain(e).2)
    }

    fn commit(&mut self, e: usize) -> Result<()> {
        check_element(e, self.ground_size())?;
        if self.cursor.contains(e) {
            return Err(Error::DuplicateCommit(e));
        }
        let (z, denom, _) = self.gain(e);
        self.minv.ger(-1.0 / denom, &z, &z, 1.0);
        self.minv = symmetrize(std::mem::replace(&mut self.minv, DMatrix::zeros(0, 0)));
        self.cursor.insert(e)?;
        if self.self_check {
            let dense = self.problem.dense_posterior(&self.cursor)?;
            let drift = (dense.trace() - self.minv.trace()).abs() / dense.trace().abs().max(f64::MIN_POSITIVE);
            if drift > 1e-6 {
                self.minv = dense;
            }
        }
        Ok(())
    }

    fn reset(&mut self) {
        self.cursor.clear();
        self.minv = self.problem.sigma.clone();
    }

    fn cursor_value(&self) -> Result<f64> {
        Ok(self.trace_prior - self.minv.trace())
    }
}

/// `(1 + (s²/σ²) λ_max(Σ))⁻¹` with `s = max_e ‖x_e‖₂`, a lower bound on the
/// submodularity ratio of `g`.
pub fn gamma_lower_bound(problem: &DesignProblem) -> f64 {
    let s2 = problem
        .x
        .column_iter()
        .map(|c| c.norm_squared())
        .fold(0.0, f64::max);
    let lambda_max = SymmetricEigen::new(problem.sigma.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    1.0 / (1.0 + s2 / problem.sigma2 * lambda_max)
}

/// Factors of a random prior `Σ = A D Aᵀ`: `A_ij ~ N(0, 1)` and
/// `D = diag((i/d)²)` for `i = 1..=d`.
pub fn prior_factors(d: usize, seed: u64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    if d == 0 {
        return Err(Error::param("d", "dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let diag = DVector::from_fn(d, |i, _| ((i + 1) as f64 / d as f64).powi(2));
    Ok((a, diag))
}

/// Random prior covariance `Σ = A D Aᵀ`, deterministic in `seed`.
pub fn generate_prior(d: usize, seed: u64) -> Result<DMatrix<f64>> {
    let (a, diag) = prior_factors(d, seed)?;
    let scaled = &a * DMatrix::from_diagonal(&diag);
    Ok(symmetrize(scaled * a.transpose()))
}

/// Costs `c_e = α g({e})`, frozen at the empty cursor.
pub fn proportional_costs(problem: &DesignProblem, alpha: f64) -> Result<ModularCost> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("cost factor must be non-negative, got {alpha}")));
    }
    let state = AOptState::new(problem.clone());
    let costs = (0..problem.n())
        .map(|e| state.marginal(e).map(|g| alpha * g))
        .collect::<Result<Vec<_>>>()?;
    ModularCost::new(costs)
}

/// Random instance: Gaussian measurement columns, `Σ = A D Aᵀ` prior and
/// `σ² = 1/d`.
pub fn random_problem(d: usize, n: usize, seed: u64) -> Result<DesignProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA0A0_5EED);
    let x = DMatrix::from_fn(d, n, |_, _| StandardNormal.sample(&mut rng));
    DesignProblem::new(x, generate_prior(d, seed)?, 1.0 / d as f64)
}
