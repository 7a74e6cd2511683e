//! Python bindings: graphs and design problems, the maximizers over them,
//! brute-force audits and hardness certification.

use distort_core::aoptimal::{gamma_lower_bound, proportional_costs, random_problem, AOptState, DesignProblem};
use distort_core::cover::{degree_costs, lazy_greedy, random_digraph, star_instance, CoverState, Digraph, LazyMode};
use distort_core::hardness::{certify_properties, CertificationReport, HardnessParams};
use distort_core::maximizers::SweepResult;
use distort_core::verification::{brute_force_instance, exact_submodularity_ratio, RATIO_GUARD};
use distort_core::{
    distorted_greedy, gamma_sweep, objective_value, plain_greedy, stochastic_distorted_greedy,
    unconstrained_distorted_greedy, Error, GammaKnowledge, IncrementalOracle, IndexSet, ModularCost,
    ProblemInstance, RunResult, SweepSubroutine, ValueOracle,
};
use num_rational::Ratio;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn knowledge(gamma: Option<f64>, lower_bound: Option<f64>) -> PyResult<GammaKnowledge> {
    match (gamma, lower_bound) {
        (Some(g), None) => Ok(GammaKnowledge::Exact(g)),
        (None, Some(l)) => Ok(GammaKnowledge::LowerBound(l)),
        (None, None) => Ok(GammaKnowledge::Unknown),
        (Some(_), Some(_)) => Err(PyValueError::new_err("give at most one of gamma and gamma_lower_bound")),
    }
}

/// Directed graph; `f(S)` is the total weight of `S` and its out-neighbors.
#[pyclass(name = "Digraph", module = "distort", frozen, skip_from_py_object)]
struct PyDigraph {
    inner: Digraph,
}

#[pymethods]
impl PyDigraph {
    #[new]
    #[pyo3(signature = (n_vertices, edges, weights=None))]
    fn new(n_vertices: usize, edges: Vec<(usize, usize)>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = match weights {
            Some(w) => Digraph::with_weights(n_vertices, &edges, w),
            None => Digraph::from_edges(n_vertices, &edges),
        }
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// `m` distinct edges without self-loops, drawn uniformly.
    #[staticmethod]
    fn random(n_vertices: usize, m: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: random_digraph(n_vertices, m, seed).map_err(py_err)?,
        })
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    fn out_neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.n_vertices() {
            return Err(py_err(Error::ElementOutOfRange {
                id: v,
                n: self.inner.n_vertices(),
            }));
        }
        Ok(self.inner.out_neighbors(v).to_vec())
    }

    fn coverage(&self, ids: Vec<usize>) -> PyResult<f64> {
        let set = IndexSet::from_ids(self.inner.n_vertices(), ids).map_err(py_err)?;
        CoverState::new(self.inner.clone()).value(&set).map_err(py_err)
    }

    /// `c(v) = 1 + max(d(v) − q, 0)` with `d(v)` the out-degree.
    fn degree_costs(&self, q: f64) -> PyResult<Vec<f64>> {
        Ok(degree_costs(&self.inner, q).map_err(py_err)?.coefficients().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Digraph(n_vertices={}, n_edges={})", self.inner.n_vertices(), self.inner.n_edges())
    }
}

/// Bayesian A-optimal design: `f(S) = tr Σ − tr (Σ⁻¹ + σ⁻² X_S X_Sᵀ)⁻¹`.
#[pyclass(name = "DesignProblem", module = "distort", frozen, skip_from_py_object)]
struct PyDesignProblem {
    inner: DesignProblem,
}

fn column_major(rows: &[Vec<f64>], what: &str) -> PyResult<(usize, usize, Vec<f64>)> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err(format!("{what} rows must all have the same length")));
    }
    Ok((r, c, (0..c).flat_map(|j| rows.iter().map(move |row| row[j])).collect()))
}

#[pymethods]
impl PyDesignProblem {
    /// `x` is `d × n` (one column per candidate), `sigma` the `d × d` prior
    /// covariance, `sigma2` the noise variance.
    #[new]
    fn new(x: Vec<Vec<f64>>, sigma: Vec<Vec<f64>>, sigma2: f64) -> PyResult<Self> {
        let (d, n, x_data) = column_major(&x, "x")?;
        let (sd, sc, s_data) = column_major(&sigma, "sigma")?;
        if sd != d || sc != d {
            return Err(PyValueError::new_err(format!("sigma must be {d} x {d}, got {sd} x {sc}")));
        }
        Ok(Self {
            inner: DesignProblem::from_column_major(d, n, &x_data, &s_data, sigma2).map_err(py_err)?,
        })
    }

    /// Normalized Gaussian features with the synthetic spectrum prior.
    #[staticmethod]
    fn random(d: usize, n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: random_problem(d, n, seed).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn value(&self, ids: Vec<usize>) -> PyResult<f64> {
        let set = IndexSet::from_ids(self.inner.n(), ids).map_err(py_err)?;
        self.inner.dense_value(&set).map_err(py_err)
    }

    fn gamma_lower_bound(&self) -> f64 {
        gamma_lower_bound(&self.inner)
    }

    /// `c_e = α · f({e})`.
    fn proportional_costs(&self, alpha: f64) -> PyResult<Vec<f64>> {
        Ok(proportional_costs(&self.inner, alpha).map_err(py_err)?.coefficients().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("DesignProblem(dim={}, n={})", self.inner.dim(), self.inner.n())
    }
}

/// `(graph, costs)` of the star example with `n` leaves.
#[pyfunction]
fn star(n: usize, epsilon: f64) -> PyResult<(PyDigraph, Vec<f64>)> {
    let (graph, cost) = star_instance(n, epsilon).map_err(py_err)?;
    Ok((PyDigraph { inner: graph }, cost.coefficients().to_vec()))
}

#[pyclass(name = "Run", module = "distort", frozen, get_all)]
struct PyRun {
    solution: Vec<usize>,
    value: f64,
    evals: u64,
    seed: Option<u64>,
    /// Sweep guess that won, `None` for a plain run or when `∅` won.
    winner_gamma: Option<f64>,
    traces: Vec<Py<PyDict>>,
}

#[pymethods]
impl PyRun {
    fn __repr__(&self) -> String {
        format!("Run(value={}, solution={:?}, evals={})", self.value, self.solution, self.evals)
    }
}

fn to_run(py: Python<'_>, run: RunResult, winner_gamma: Option<f64>) -> PyResult<PyRun> {
    let traces = run
        .traces
        .iter()
        .map(|t| {
            let row = PyDict::new(py);
            row.set_item("iter", t.iter)?;
            row.set_item("chosen", t.chosen)?;
            row.set_item("accepted", t.accepted)?;
            row.set_item("psi", t.psi)?;
            row.set_item("phi_before", t.phi_before)?;
            row.set_item("phi_after", t.phi_after)?;
            row.set_item("g_of_S", t.g_of_s)?;
            Ok(row.unbind())
        })
        .collect::<PyResult<_>>()?;
    Ok(PyRun {
        solution: run.solution.ids().to_vec(),
        value: run.value,
        evals: run.evals,
        seed: run.seed,
        winner_gamma,
        traces,
    })
}

fn sweep_run(py: Python<'_>, result: SweepResult) -> PyResult<PyRun> {
    let gamma = result.winner.map(|i| result.guesses[i].gamma);
    to_run(py, result.best, gamma)
}

enum Workload {
    Cover(ProblemInstance<CoverState>),
    Design(ProblemInstance<AOptState>),
}

macro_rules! with_instance {
    ($self:expr, $inst:ident => $body:expr) => {
        match &mut $self.inner {
            Workload::Cover($inst) => $body,
            Workload::Design($inst) => $body,
        }
    };
}

fn subroutine(name: &str) -> PyResult<SweepSubroutine> {
    match name {
        "dg" => Ok(SweepSubroutine::DistortedGreedy),
        "sdg" => Ok(SweepSubroutine::StochasticDistortedGreedy),
        "udg" => Ok(SweepSubroutine::UnconstrainedDistortedGreedy),
        other => Err(PyValueError::new_err(format!("unknown sweep subroutine {other:?}; expected dg, sdg or udg"))),
    }
}

fn brute_force<O: ValueOracle>(inst: &ProblemInstance<O>) -> PyResult<(Vec<usize>, f64)> {
    let (set, value) = brute_force_instance(inst).map_err(py_err)?;
    Ok((set.ids().to_vec(), value))
}

fn exact_ratio<O: IncrementalOracle>(inst: &ProblemInstance<O>) -> PyResult<f64> {
    exact_submodularity_ratio(&inst.oracle, RATIO_GUARD).map_err(py_err)
}

/// `max_{|S| ≤ k} g(S) − c(S)` over a graph or design problem.
///
/// `gamma` declares the exact submodularity ratio used by the fixed-γ
/// algorithms; `gamma_lower_bound` (or neither) is what sweeps consume.
#[pyclass(name = "Instance", module = "distort")]
struct PyInstance {
    inner: Workload,
}

impl PyInstance {
    fn cost_of(costs: Vec<f64>) -> PyResult<ModularCost> {
        ModularCost::new(costs).map_err(py_err)
    }
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    #[pyo3(signature = (graph, costs, k, gamma=Some(1.0), gamma_lower_bound=None))]
    fn cover(
        graph: &PyDigraph,
        costs: Vec<f64>,
        k: usize,
        gamma: Option<f64>,
        gamma_lower_bound: Option<f64>,
    ) -> PyResult<Self> {
        let gamma = knowledge(gamma, gamma_lower_bound)?;
        let inst = ProblemInstance::new(CoverState::new(graph.inner.clone()), Self::cost_of(costs)?, k, gamma)
            .map_err(py_err)?;
        Ok(Self {
            inner: Workload::Cover(inst),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (problem, costs, k, gamma=None, gamma_lower_bound=None))]
    fn design(
        problem: &PyDesignProblem,
        costs: Vec<f64>,
        k: usize,
        gamma: Option<f64>,
        gamma_lower_bound: Option<f64>,
    ) -> PyResult<Self> {
        let gamma = knowledge(gamma, gamma_lower_bound)?;
        let inst = ProblemInstance::new(AOptState::new(problem.inner.clone()), Self::cost_of(costs)?, k, gamma)
            .map_err(py_err)?;
        Ok(Self {
            inner: Workload::Design(inst),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        match &self.inner {
            Workload::Cover(i) => i.ground_size(),
            Workload::Design(i) => i.ground_size(),
        }
    }

    #[getter]
    fn k(&self) -> usize {
        match &self.inner {
            Workload::Cover(i) => i.k,
            Workload::Design(i) => i.k,
        }
    }

    /// `g(S) − c(S)`.
    fn objective(&mut self, ids: Vec<usize>) -> PyResult<f64> {
        let n = self.n();
        let set = IndexSet::from_ids(n, ids).map_err(py_err)?;
        with_instance!(self, inst => objective_value(inst, &set).map_err(py_err))
    }

    fn greedy(&mut self, py: Python<'_>) -> PyResult<PyRun> {
        let run = with_instance!(self, inst => plain_greedy(inst)).map_err(py_err)?;
        to_run(py, run, None)
    }

    fn distorted_greedy(&mut self, py: Python<'_>) -> PyResult<PyRun> {
        let run = with_instance!(self, inst => distorted_greedy(inst)).map_err(py_err)?;
        to_run(py, run, None)
    }

    fn stochastic_distorted_greedy(&mut self, py: Python<'_>, epsilon: f64, seed: u64) -> PyResult<PyRun> {
        let run = with_instance!(self, inst => stochastic_distorted_greedy(inst, epsilon, seed)).map_err(py_err)?;
        to_run(py, run, None)
    }

    /// Ignores `k`.
    fn unconstrained_distorted_greedy(&mut self, py: Python<'_>, seed: u64) -> PyResult<PyRun> {
        let run = with_instance!(self, inst => unconstrained_distorted_greedy(inst, seed)).map_err(py_err)?;
        to_run(py, run, None)
    }

    /// Lazy-evaluation greedy (`distorted=False`) or distorted greedy; the
    /// instance must declare `gamma=1`.
    #[pyo3(signature = (distorted=false))]
    fn lazy_greedy(&mut self, py: Python<'_>, distorted: bool) -> PyResult<PyRun> {
        let mode = if distorted { LazyMode::DistortedGreedy } else { LazyMode::Greedy };
        let run = with_instance!(self, inst => lazy_greedy(inst, mode)).map_err(py_err)?;
        to_run(py, run, None)
    }

    /// Geometric sweep over `γ_r = (1 − δ)^r`; `subroutine` is `dg`, `sdg`
    /// or `udg`.
    #[pyo3(signature = (delta, subroutine="dg", seed=0))]
    fn gamma_sweep(&mut self, py: Python<'_>, delta: f64, subroutine: &str, seed: u64) -> PyResult<PyRun> {
        let sub = self::subroutine(subroutine)?;
        let result = with_instance!(self, inst => gamma_sweep(inst, delta, sub, seed)).map_err(py_err)?;
        sweep_run(py, result)
    }

    /// Exhaustive optimum `(solution, value)`; `n ≤ 24`.
    fn brute_force(&self) -> PyResult<(Vec<usize>, f64)> {
        match &self.inner {
            Workload::Cover(i) => brute_force(i),
            Workload::Design(i) => brute_force(i),
        }
    }

    /// Exact submodularity ratio of `g` by enumeration; `n ≤ 12`.
    fn exact_submodularity_ratio(&self) -> PyResult<f64> {
        match &self.inner {
            Workload::Cover(i) => exact_ratio(i),
            Workload::Design(i) => exact_ratio(i),
        }
    }
}

/// `(property, passed, note)`.
type PropertyRow = (String, bool, String);

/// Certifies the hardness family at `γ`, `ε′ = eps_num / eps_den` and `k`.
/// Returns `(all_passed, [(property, passed, note)])`.
#[pyfunction]
#[pyo3(signature = (gamma, eps_num, eps_den, k, t_size=None))]
fn certify_hardness(
    gamma: f64,
    eps_num: u64,
    eps_den: u64,
    k: u64,
    t_size: Option<u64>,
) -> PyResult<(bool, Vec<PropertyRow>)> {
    if eps_den == 0 {
        return Err(PyValueError::new_err("eps_den must be positive"));
    }
    let params = HardnessParams::new(gamma, Ratio::new(eps_num, eps_den), k).map_err(py_err)?;
    let report: CertificationReport = certify_properties(&params, t_size.unwrap_or(k)).map_err(py_err)?;
    let checks = report
        .checks
        .iter()
        .map(|c| (c.property.to_string(), c.passed, c.note.clone()))
        .collect();
    Ok((report.passed(), checks))
}

#[pyfunction]
fn derive_seed(base: u64, tags: Vec<u64>) -> u64 {
    distort_core::derive_seed(base, &tags)
}

#[pymodule]
fn distort(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDigraph>()?;
    m.add_class::<PyDesignProblem>()?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(certify_hardness, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    Ok(())
}
