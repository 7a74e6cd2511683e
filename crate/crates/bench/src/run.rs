//! Experiment orchestration. Every row gets a fresh oracle and an RNG stream
//! derived from `(seed, algorithm label, k, trial)`.

use std::io;
use std::sync::Arc;
use std::time::Instant;

use distort_core::aoptimal::{gamma_lower_bound, generate_prior, proportional_costs, AOptState, DesignProblem};
use distort_core::cover::{degree_costs, lazy_greedy, random_digraph, star_instance, CoverState, Digraph, LazyMode};
use distort_core::hardness::{certify_properties, CertificationReport, HardnessParams};
use distort_core::maximizers::{gamma_sweep, SweepResult, SweepSubroutine};
use distort_core::seed::rng_from_seed;
use distort_core::verification::{
    audit_value, brute_force_opt, exact_submodularity_ratio, random_costs, AuditRow, WeightedCoverage,
};
use distort_core::{
    derive_seed, distorted_greedy, label_tag, plain_greedy, stochastic_distorted_greedy,
    unconstrained_distorted_greedy, GammaKnowledge, IncrementalOracle, IndexSet, ModularCost, ProblemInstance,
    RunResult, ValueCursor, ValueOracle,
};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::{AlgoSpec, Algorithm, Experiment, ExperimentConfig};
use crate::data::{load_edge_list, load_feature_matrix, normalize};
use crate::error::{BenchError, Result};

pub const RESULT_HEADER: &str = "experiment,algorithm,k,param,trial,value,evals,wall_time_seconds,seed";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub algorithm: String,
    pub k: usize,
    /// `α` for design, `q` for cover, `ε` for the star.
    pub param: f64,
    pub trial: usize,
    pub value: f64,
    pub evals: u64,
    pub wall_time_seconds: f64,
    pub seed: u64,
    #[serde(skip)]
    pub solution: Vec<usize>,
}

/// Stream for one row; independent of which other rows are configured.
pub fn row_seed(base: u64, label: &str, k: usize, trial: usize) -> u64 {
    derive_seed(base, &[label_tag(label), k as u64, trial as u64])
}

/// Stream for instance construction (prior, synthetic data).
pub fn instance_seed(base: u64, what: &str) -> u64 {
    derive_seed(base, &[label_tag(what)])
}

/// The utility and cost an experiment runs on, shared read-only by rows.
#[derive(Debug, Clone)]
pub enum Workload {
    Design {
        problem: Arc<DesignProblem>,
        cost: ModularCost,
        gamma_bound: f64,
    },
    Graph {
        graph: Arc<Digraph>,
        cost: ModularCost,
    },
}

impl Workload {
    pub fn ground_size(&self) -> usize {
        match self {
            Workload::Design { problem, .. } => problem.n(),
            Workload::Graph { graph, .. } => graph.n_vertices(),
        }
    }

    pub fn cost(&self) -> &ModularCost {
        match self {
            Workload::Design { cost, .. } | Workload::Graph { cost, .. } => cost,
        }
    }

    /// `g(S) − c(S)` from a fresh oracle.
    pub fn fresh_value(&self, set: &IndexSet) -> Result<f64> {
        let g = match self {
            Workload::Design { problem, .. } => problem.dense_value(set)?,
            Workload::Graph { graph, .. } => CoverState::new(graph.clone()).value(set)?,
        };
        Ok(g - self.cost().cost(set))
    }
}

/// Builds the experiment's workload and returns it with ingestion warnings.
pub fn build_workload(config: &ExperimentConfig) -> Result<(Workload, Vec<String>)> {
    let mut warnings = Vec::new();
    let workload = match config.experiment {
        Experiment::Aopt => {
            let x = match &config.data {
                Some(path) => {
                    let features = load_feature_matrix(path)?;
                    warnings.extend(features.warnings);
                    features.x
                }
                None => synthetic_features(config.d, config.n, instance_seed(config.seed, "features")),
            };
            let d = x.nrows();
            let prior = generate_prior(d, instance_seed(config.seed, "prior"))?;
            let problem = DesignProblem::new(x, prior, 1.0 / d as f64)?;
            let cost = proportional_costs(&problem, config.alpha)?;
            Workload::Design {
                gamma_bound: gamma_lower_bound(&problem),
                problem: Arc::new(problem),
                cost,
            }
        }
        Experiment::Cover => {
            let graph = match &config.data {
                Some(path) => {
                    let loaded = load_edge_list(path)?;
                    warnings.extend(loaded.warnings);
                    loaded.graph
                }
                None => random_digraph(config.n, config.m, instance_seed(config.seed, "graph"))?,
            };
            let cost = degree_costs(&graph, config.q)?;
            Workload::Graph {
                graph: Arc::new(graph),
                cost,
            }
        }
        Experiment::Star => {
            let (graph, cost) = star_instance(config.n, config.epsilons[0])?;
            Workload::Graph {
                graph: Arc::new(graph),
                cost,
            }
        }
        other => {
            return Err(BenchError::Config(vec![format!("{other} has no result-row workload")]));
        }
    };
    Ok((workload, warnings))
}

/// `d × n` standard normal features, normalized like loaded data.
pub fn synthetic_features(d: usize, n: usize, seed: u64) -> nalgebra::DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    normalize(&rows).0
}

/// Runs one algorithm. `exact` is the `γ` declared to the fixed-γ
/// algorithms; sweeps always start from `L = 0`.
pub fn run_spec<O: IncrementalOracle>(
    inst: &mut ProblemInstance<O>,
    spec: &AlgoSpec,
    exact: f64,
    seed: u64,
) -> Result<RunResult> {
    let accuracy = spec.accuracy.unwrap_or(0.1);
    inst.gamma = GammaKnowledge::Exact(exact);
    let sweep = |inst: &mut ProblemInstance<O>, sub| -> Result<SweepResult> {
        inst.gamma = GammaKnowledge::Unknown;
        Ok(gamma_sweep(inst, accuracy, sub, seed)?)
    };
    let run = match spec.algorithm {
        Algorithm::Greedy => plain_greedy(inst)?,
        Algorithm::Dg => distorted_greedy(inst)?,
        Algorithm::Sdg => stochastic_distorted_greedy(inst, accuracy, seed)?,
        Algorithm::Udg => unconstrained_distorted_greedy(inst, seed)?,
        Algorithm::SweepDg => sweep(inst, SweepSubroutine::DistortedGreedy)?.best,
        Algorithm::SweepSdg => sweep(inst, SweepSubroutine::StochasticDistortedGreedy)?.best,
        Algorithm::SweepUdg => sweep(inst, SweepSubroutine::UnconstrainedDistortedGreedy)?.best,
        Algorithm::LazyGreedy => lazy_greedy(inst, LazyMode::Greedy)?,
        Algorithm::LazyDg => lazy_greedy(inst, LazyMode::DistortedGreedy)?,
    };
    Ok(run)
}

fn run_on_workload(workload: &Workload, spec: &AlgoSpec, k: usize, seed: u64) -> Result<RunResult> {
    let cost = workload.cost().clone();
    match workload {
        Workload::Design {
            problem, gamma_bound, ..
        } => {
            let mut inst = ProblemInstance::new(AOptState::new(problem.clone()), cost, k, GammaKnowledge::Unknown)?;
            run_spec(&mut inst, spec, *gamma_bound, seed)
        }
        Workload::Graph { graph, .. } => {
            let mut inst = ProblemInstance::new(CoverState::new(graph.clone()), cost, k, GammaKnowledge::Unknown)?;
            run_spec(&mut inst, spec, 1.0, seed)
        }
    }
}

fn param(config: &ExperimentConfig) -> f64 {
    match config.experiment {
        Experiment::Aopt => config.alpha,
        Experiment::Cover => config.q,
        _ => config.epsilons[0],
    }
}

/// Every configured `algorithm × k × trial` row, in configuration order.
/// Deterministic algorithms run once per `k`; unconstrained ones run once
/// per trial with `k = n`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<ResultRow>, Vec<String>)> {
    config.validate()?;
    let (workload, warnings) = build_workload(config)?;
    let n = workload.ground_size();
    if let Some(k) = config.ks.iter().find(|&&k| k > n) {
        return Err(BenchError::Config(vec![format!("k = {k} exceeds the ground set size {n}")]));
    }
    let mut rows = Vec::new();
    for spec in config.specs() {
        let label = spec.label();
        let ks = if spec.algorithm.is_unconstrained() {
            vec![n]
        } else {
            config.ks.clone()
        };
        let trials = if spec.algorithm.is_stochastic() { config.trials } else { 1 };
        for &k in &ks {
            for trial in 0..trials {
                let seed = row_seed(config.seed, &label, k, trial);
                let start = Instant::now();
                let run = run_on_workload(&workload, &spec, k, seed)?;
                let wall = start.elapsed().as_secs_f64();
                let fresh = workload.fresh_value(&run.solution)?;
                if (fresh - run.value).abs() > 1e-9 * fresh.abs().max(1.0) {
                    return Err(BenchError::Audit {
                        algorithm: label,
                        k,
                        row: run.value,
                        fresh,
                    });
                }
                rows.push(ResultRow {
                    experiment: config.experiment.name().to_string(),
                    algorithm: label.clone(),
                    k,
                    param: param(config),
                    trial,
                    value: run.value,
                    evals: run.evals,
                    wall_time_seconds: wall,
                    seed,
                    solution: run.solution.ids().to_vec(),
                });
            }
        }
    }
    Ok((rows, warnings))
}

pub fn write_csv<W: io::Write, T: Serialize>(rows: &[T], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One subroutine run inside a sweep; `r = -1` is the empty candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTraceRow {
    pub experiment: String,
    pub algorithm: String,
    pub k: usize,
    pub trial: usize,
    pub r: i64,
    pub gamma: Option<f64>,
    pub value: f64,
    pub evals: u64,
    pub selected: bool,
    pub seed: u64,
}

/// Per-guess values of every configured sweep on the experiment's workload.
pub fn sweep_trace(config: &ExperimentConfig) -> Result<Vec<SweepTraceRow>> {
    config.validate()?;
    let (workload, _) = build_workload(config)?;
    let n = workload.ground_size();
    let mut rows = Vec::new();
    for spec in config.specs() {
        let sub = match spec.algorithm {
            Algorithm::SweepDg => SweepSubroutine::DistortedGreedy,
            Algorithm::SweepSdg => SweepSubroutine::StochasticDistortedGreedy,
            Algorithm::SweepUdg => SweepSubroutine::UnconstrainedDistortedGreedy,
            other => {
                return Err(BenchError::Config(vec![format!("sweep-trace needs a sweep algorithm, got {other}")]));
            }
        };
        let label = spec.label();
        let delta = spec.accuracy.unwrap_or(config.delta);
        let ks = if spec.algorithm.is_unconstrained() {
            vec![n]
        } else {
            config.ks.clone()
        };
        let trials = if spec.algorithm.is_stochastic() { config.trials } else { 1 };
        for &k in &ks {
            for trial in 0..trials {
                let seed = row_seed(config.seed, &label, k, trial);
                let cost = workload.cost().clone();
                let result = match &workload {
                    Workload::Design { problem, .. } => {
                        let oracle = AOptState::new(problem.clone());
                        gamma_sweep(&mut ProblemInstance::new(oracle, cost, k, GammaKnowledge::Unknown)?, delta, sub, seed)?
                    }
                    Workload::Graph { graph, .. } => {
                        let oracle = CoverState::new(graph.clone());
                        gamma_sweep(&mut ProblemInstance::new(oracle, cost, k, GammaKnowledge::Unknown)?, delta, sub, seed)?
                    }
                };
                let row = |r: i64, gamma, value, evals, selected| SweepTraceRow {
                    experiment: config.experiment.name().to_string(),
                    algorithm: label.clone(),
                    k,
                    trial,
                    r,
                    gamma,
                    value,
                    evals,
                    selected,
                    seed,
                };
                rows.push(row(-1, None, result.empty_value, 1, result.winner.is_none()));
                for (i, guess) in result.guesses.iter().enumerate() {
                    rows.push(row(
                        guess.r as i64,
                        Some(guess.gamma),
                        guess.value,
                        guess.evals,
                        result.winner == Some(i),
                    ));
                }
            }
        }
    }
    Ok(rows)
}

/// Certification reports over `gammas × t_sizes` at `(ε′, k)`.
pub fn run_hardness(config: &ExperimentConfig) -> Result<Vec<CertificationReport>> {
    config.validate()?;
    let k = config.ks[0] as u64;
    let t_sizes = if config.t_sizes.is_empty() {
        let mut t = vec![3.min(k), k];
        t.dedup();
        t
    } else {
        config.t_sizes.clone()
    };
    let mut reports = Vec::new();
    for &gamma in &config.gammas {
        let params = HardnessParams::new(gamma, config.eps_prime, k)?;
        for &t in &t_sizes {
            reports.push(certify_properties(&params, t)?);
        }
    }
    Ok(reports)
}

/// `β δ + δ_sub` from the sweep analysis, with `β = e^{−γ}(e − 1)` and
/// `δ_sub = δ` when the subroutine itself carries an error parameter.
pub fn sweep_slack(gamma: f64, delta: f64, stochastic_subroutine: bool) -> f64 {
    let beta = (-gamma).exp() * (std::f64::consts::E - 1.0);
    beta * delta + if stochastic_subroutine { delta } else { 0.0 }
}

fn slack_for(spec: &AlgoSpec, gamma: f64) -> f64 {
    let a = spec.accuracy.unwrap_or(0.0);
    match spec.algorithm {
        Algorithm::Sdg => a,
        Algorithm::SweepDg | Algorithm::SweepUdg => sweep_slack(gamma, a, false),
        Algorithm::SweepSdg => sweep_slack(gamma, a, true),
        _ => 0.0,
    }
}

fn audit_family<O: IncrementalOracle>(
    id: &str,
    oracle: O,
    cost: ModularCost,
    config: &ExperimentConfig,
    instance: usize,
) -> Result<Vec<AuditRow>> {
    let n = oracle.ground_size();
    let gamma = exact_submodularity_ratio(&oracle, 12)?;
    let mut rows = Vec::new();
    let mut inst = ProblemInstance::new(oracle, cost, config.ks[0], GammaKnowledge::Exact(gamma))?;
    let (opt_k, _) = brute_force_opt(&inst.oracle, &inst.cost, config.ks[0])?;
    let (opt_n, _) = brute_force_opt(&inst.oracle, &inst.cost, n)?;
    for spec in config.specs() {
        let label = spec.label();
        let seed = row_seed(config.seed, &label, config.ks[0], instance);
        let run = run_spec(&mut inst, &spec, gamma, seed)?;
        let opt = if spec.algorithm.is_unconstrained() { &opt_n } else { &opt_k };
        let report = audit_value(run.value, opt, &inst.oracle, &inst.cost, gamma, slack_for(&spec, gamma))?;
        rows.push(AuditRow {
            instance: id.to_string(),
            algorithm: label,
            value: run.value,
            opt: report.opt_value,
            bound: report.bound,
            pass: report.pass,
        });
    }
    Ok(rows)
}

/// Audits every configured algorithm on `trials` random small instances,
/// alternating weighted coverage and A-optimal design, against the
/// brute-force optimum and the exact submodularity ratio. Stochastic
/// guarantees hold in expectation, so single-run failures are possible.
pub fn run_verify(config: &ExperimentConfig) -> Result<Vec<AuditRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for i in 0..config.trials {
        let seed = derive_seed(config.seed, &[label_tag("verify"), i as u64]);
        if i % 2 == 0 {
            let g = WeightedCoverage::random(config.n, 3 * config.n / 2, seed);
            let cost = random_costs(&g, 1.2, derive_seed(seed, &[1]))?;
            rows.extend(audit_family(&format!("coverage-{i}"), ValueCursor::new(g), cost, config, i)?);
        } else {
            let x = synthetic_features(config.d, config.n, seed);
            let prior = generate_prior(config.d, derive_seed(seed, &[2]))?;
            let problem = DesignProblem::new(x, prior, 1.0 / config.d as f64)?;
            let cost = proportional_costs(&problem, config.alpha)?;
            rows.extend(audit_family(&format!("design-{i}"), AOptState::new(problem), cost, config, i)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_seeds_are_independent_of_other_rows() {
        let a = row_seed(7, "dg", 3, 0);
        assert_eq!(a, row_seed(7, "dg", 3, 0));
        assert_ne!(a, row_seed(7, "sdg(eps=0.1)", 3, 0));
        assert_ne!(a, row_seed(7, "dg", 3, 1));
        assert_ne!(a, row_seed(8, "dg", 3, 0));
    }

    #[test]
    fn sweep_slack_constant() {
        let s = sweep_slack(0.0, 0.1, true);
        assert!((s - (std::f64::consts::E - 1.0) * 0.1 - 0.1).abs() < 1e-15);
        assert!(sweep_slack(1.0, 0.1, false) < sweep_slack(0.5, 0.1, false));
    }

    #[test]
    fn synthetic_features_are_normalized() {
        let x = synthetic_features(4, 30, 1);
        assert_eq!(x.shape(), (4, 30));
        assert!(x.row_iter().all(|r| r.mean().abs() < 1e-12));
    }
}
