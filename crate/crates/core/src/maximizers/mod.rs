//! Distorted greedy maximizers for `g(S) − c(S)` under a cardinality bound.
//!
//! All algorithms work through [`IncrementalOracle`], reset the oracle's
//! cursor before running, and route every marginal query through a
//! [`CountingOracle`] so that [`RunResult::evals`] is the exact oracle work.
//! Ties between candidates are broken toward the smallest element id.

mod sweep;

use std::io;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{
    check_element, check_set, CountingOracle, GammaKnowledge, IncrementalOracle, IndexSet,
    ModularCost, ProblemInstance, ValueOracle,
};
use crate::seed::rng_from_seed;

pub use sweep::{gamma_sweep, sweep_length, SweepGuess, SweepResult, SweepSubroutine};

/// Geometric weights `(1 − γ/k)^{k−(i+1)}` applied to `g` in iteration `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSchedule {
    k: usize,
    gamma: f64,
    base: f64,
}

impl DistortionSchedule {
    pub fn new(k: usize, gamma: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "horizon must be at least 1"));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::param("gamma", format!("must lie in (0, 1], got {gamma}")));
        }
        Ok(Self {
            k,
            gamma,
            base: 1.0 - gamma / k as f64,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Weight on `g(e | S_i)` in iteration `i ∈ [0, k)`.
    pub fn weight(&self, i: usize) -> f64 {
        debug_assert!(i < self.k);
        self.base.powi((self.k - (i + 1)) as i32)
    }

    /// Weight on `g(T)` in the distorted objective `Φ_i`, for `i ∈ [0, k]`.
    pub fn phi_factor(&self, i: usize) -> f64 {
        debug_assert!(i <= self.k);
        self.base.powi((self.k - i) as i32)
    }
}

/// One iteration of a maximizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iter: usize,
    /// The element maximizing the iteration's score, accepted or not.
    pub chosen: Option<usize>,
    pub accepted: bool,
    pub psi: f64,
    pub phi_before: f64,
    pub phi_after: f64,
    /// `g(S_i)` at the start of the iteration.
    #[serde(rename = "g_of_S")]
    pub g_of_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub solution: IndexSet,
    /// `g − c` of the solution, recomputed from scratch after the run.
    pub value: f64,
    pub evals: u64,
    pub traces: Vec<IterationTrace>,
    pub seed: Option<u64>,
}

/// Writes trace rows with header
/// `iter,chosen,accepted,psi,phi_before,phi_after,g_of_S`.
pub fn write_traces_csv<W: io::Write>(traces: &[IterationTrace], writer: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    if traces.is_empty() {
        out.write_record(["iter", "chosen", "accepted", "psi", "phi_before", "phi_after", "g_of_S"])?;
    }
    for row in traces {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// `Φ_i(T) = (1 − γ/k)^{k−i} g(T) − c(T)`.
pub fn phi<O: ValueOracle>(
    i: usize,
    set: &IndexSet,
    schedule: &DistortionSchedule,
    g: &O,
    cost: &ModularCost,
) -> Result<f64> {
    if i > schedule.k() {
        return Err(Error::param("i", format!("iteration {i} exceeds horizon {}", schedule.k())));
    }
    check_set(set, g.ground_size())?;
    Ok(schedule.phi_factor(i) * g.value(set)? - cost.cost(set))
}

/// `Ψ_i(T, e) = max{0, (1 − γ/k)^{k−(i+1)} g(e | T) − c_e}`.
pub fn psi<O: ValueOracle>(
    i: usize,
    set: &IndexSet,
    e: usize,
    schedule: &DistortionSchedule,
    g: &O,
    cost: &ModularCost,
) -> Result<f64> {
    if i >= schedule.k() {
        return Err(Error::param("i", format!("iteration {i} must be below horizon {}", schedule.k())));
    }
    check_set(set, g.ground_size())?;
    check_element(e, g.ground_size())?;
    let gain = if set.contains(e) {
        0.0
    } else {
        g.value(&set.with(e)?)? - g.value(set)?
    };
    Ok((schedule.weight(i) * gain - cost.coefficient(e)).max(0.0))
}

/// One distorted iteration: score the candidates, accept the best one iff its
/// distorted gain is strictly positive.
fn distorted_step<O, I>(
    oracle: &mut CountingOracle<O>,
    cost: &ModularCost,
    schedule: &DistortionSchedule,
    i: usize,
    candidates: I,
) -> Result<IterationTrace>
where
    O: IncrementalOracle,
    I: IntoIterator<Item = usize>,
{
    let g_before = oracle.cursor_value()?;
    let c_before = cost.cost(oracle.cursor());
    let weight = schedule.weight(i);

    let mut best: Option<(usize, f64)> = None;
    for e in candidates {
        let score = weight * oracle.marginal(e)? - cost.coefficient(e);
        let better = match best {
            None => true,
            Some((b, s)) => score > s || (score == s && e < b),
        };
        if better {
            best = Some((e, score));
        }
    }

    let (accepted, psi) = match best {
        Some((e, score)) if score > 0.0 => {
            oracle.commit(e)?;
            (true, score)
        }
        _ => (false, 0.0),
    };
    let (g_after, c_after) = if accepted {
        (oracle.cursor_value()?, cost.cost(oracle.cursor()))
    } else {
        (g_before, c_before)
    };

    Ok(IterationTrace {
        iter: i,
        chosen: best.map(|(e, _)| e),
        accepted,
        psi,
        phi_before: schedule.phi_factor(i) * g_before - c_before,
        phi_after: schedule.phi_factor(i + 1) * g_after - c_after,
        g_of_s: g_before,
    })
}

fn finish<O: IncrementalOracle>(
    oracle: CountingOracle<&mut O>,
    cost: &ModularCost,
    traces: Vec<IterationTrace>,
    seed: Option<u64>,
) -> Result<RunResult> {
    let evals = oracle.evaluations();
    let solution = oracle.cursor().clone();
    let value = oracle.inner().value(&solution)? - cost.cost(&solution);
    Ok(RunResult {
        solution,
        value,
        evals,
        traces,
        seed,
    })
}

fn exact_gamma<O>(inst: &ProblemInstance<O>) -> Result<f64> {
    match inst.gamma {
        GammaKnowledge::Exact(g) => Ok(g),
        other => Err(Error::param(
            "gamma",
            format!("this algorithm needs an exact gamma, instance declares {other:?}"),
        )),
    }
}

fn check_cost_len(n: usize, cost: &ModularCost) -> Result<()> {
    if cost.len() != n {
        return Err(Error::param(
            "cost",
            format!("cost has {} coefficients for a ground set of size {n}", cost.len()),
        ));
    }
    Ok(())
}

pub(crate) fn run_distorted_greedy<O: IncrementalOracle>(
    oracle: &mut O,
    cost: &ModularCost,
    k: usize,
    gamma: f64,
) -> Result<RunResult> {
    let n = oracle.ground_size();
    check_cost_len(n, cost)?;
    if k > n {
        return Err(Error::param("k", format!("k = {k} exceeds n = {n}")));
    }
    let schedule = DistortionSchedule::new(k, gamma)?;
    oracle.reset();
    let mut counted = CountingOracle::new(oracle);
    let mut traces = Vec::with_capacity(k);
    for i in 0..k {
        traces.push(distorted_step(&mut counted, cost, &schedule, i, 0..n)?);
    }
    finish(counted, cost, traces, None)
}

/// Sample size `⌈(n/k) ln(1/ε)⌉` used per iteration by the stochastic variant.
pub fn sample_size(n: usize, k: usize, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    Ok(((n as f64 / k as f64) * (1.0 / epsilon).ln()).ceil() as usize)
}

pub(crate) fn run_stochastic_distorted_greedy<O: IncrementalOracle>(
    oracle: &mut O,
    cost: &ModularCost,
    k: usize,
    gamma: f64,
    epsilon: f64,
    seed: u64,
) -> Result<RunResult> {
    let n = oracle.ground_size();
    check_cost_len(n, cost)?;
    if k > n {
        return Err(Error::param("k", format!("k = {k} exceeds n = {n}")));
    }
    let s = sample_size(n, k, epsilon)?;
    let schedule = DistortionSchedule::new(k, gamma)?;
    let mut rng = rng_from_seed(seed);
    oracle.reset();
    let mut counted = CountingOracle::new(oracle);
    let mut traces = Vec::with_capacity(k);
    let mut sample = Vec::with_capacity(s);
    for i in 0..k {
        // uniform and independent draws, duplicates allowed
        sample.clear();
        sample.extend((0..s).map(|_| rng.random_range(0..n)));
        traces.push(distorted_step(&mut counted, cost, &schedule, i, sample.iter().copied())?);
    }
    finish(counted, cost, traces, Some(seed))
}

pub(crate) fn run_unconstrained_distorted_greedy<O: IncrementalOracle>(
    oracle: &mut O,
    cost: &ModularCost,
    gamma: f64,
    seed: u64,
) -> Result<RunResult> {
    let n = oracle.ground_size();
    check_cost_len(n, cost)?;
    let schedule = DistortionSchedule::new(n, gamma)?;
    let mut rng = rng_from_seed(seed);
    oracle.reset();
    let mut counted = CountingOracle::new(oracle);
    let mut traces = Vec::with_capacity(n);
    for i in 0..n {
        let e = rng.random_range(0..n);
        traces.push(distorted_step(&mut counted, cost, &schedule, i, [e])?);
    }
    finish(counted, cost, traces, Some(seed))
}

/// Deterministic distorted greedy: `k` iterations, each scoring every element
/// of the ground set (`n·k` marginals in total).
pub fn distorted_greedy<O: IncrementalOracle>(inst: &mut ProblemInstance<O>) -> Result<RunResult> {
    let gamma = exact_gamma(inst)?;
    run_distorted_greedy(&mut inst.oracle, &inst.cost, inst.k, gamma)
}

/// Distorted greedy over `⌈(n/k) ln(1/ε)⌉` elements sampled with replacement
/// in each iteration.
pub fn stochastic_distorted_greedy<O: IncrementalOracle>(
    inst: &mut ProblemInstance<O>,
    epsilon: f64,
    seed: u64,
) -> Result<RunResult> {
    let gamma = exact_gamma(inst)?;
    run_stochastic_distorted_greedy(&mut inst.oracle, &inst.cost, inst.k, gamma, epsilon, seed)
}

/// Unconstrained variant: `n` iterations, each testing one uniformly sampled
/// element against the `k = n` schedule. Ignores `inst.k`.
pub fn unconstrained_distorted_greedy<O: IncrementalOracle>(
    inst: &mut ProblemInstance<O>,
    seed: u64,
) -> Result<RunResult> {
    let gamma = exact_gamma(inst)?;
    run_unconstrained_distorted_greedy(&mut inst.oracle, &inst.cost, gamma, seed)
}

/// Baseline greedy on `g − c`: add the best element while its marginal
/// objective is strictly positive and `|S| < k`.
///
/// Trace rows carry the undistorted objective in the `phi_*` columns.
pub fn plain_greedy<O: IncrementalOracle>(inst: &mut ProblemInstance<O>) -> Result<RunResult> {
    let n = inst.ground_size();
    let cost = &inst.cost;
    inst.oracle.reset();
    let mut counted = CountingOracle::new(&mut inst.oracle);
    let mut traces = Vec::new();
    for i in 0..inst.k {
        let g_before = counted.cursor_value()?;
        let c_before = cost.cost(counted.cursor());
        let mut best: Option<(usize, f64)> = None;
        for e in 0..n {
            if counted.cursor().contains(e) {
                continue;
            }
            let score = counted.marginal(e)? - cost.coefficient(e);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((e, score));
            }
        }
        let Some((e, score)) = best else { break };
        let accepted = score > 0.0;
        if accepted {
            counted.commit(e)?;
        }
        let g_after = counted.cursor_value()?;
        traces.push(IterationTrace {
            iter: i,
            chosen: Some(e),
            accepted,
            psi: score.max(0.0),
            phi_before: g_before - c_before,
            phi_after: g_after - cost.cost(counted.cursor()),
            g_of_s: g_before,
        });
        if !accepted {
            break;
        }
    }
    finish(counted, cost, traces, None)
}
