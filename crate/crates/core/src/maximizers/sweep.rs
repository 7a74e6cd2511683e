use crate::error::{Error, Result};
use crate::ground::{GammaKnowledge, IncrementalOracle, IndexSet, ProblemInstance};
use crate::seed::derive_seed;

use super::{
    run_distorted_greedy, run_stochastic_distorted_greedy, run_unconstrained_distorted_greedy,
    RunResult,
};

/// Algorithm invoked once per guess of the submodularity ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepSubroutine {
    DistortedGreedy,
    /// Runs with error parameter `ε = δ`.
    StochasticDistortedGreedy,
    UnconstrainedDistortedGreedy,
}

/// One subroutine run of the sweep, at `γ_r = (1 − δ)^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGuess {
    pub r: usize,
    pub gamma: f64,
    pub value: f64,
    pub solution: IndexSet,
    pub evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// The best candidate; `evals` is the total over all subroutine calls
    /// plus the single evaluation of `g(∅)`.
    pub best: RunResult,
    pub guesses: Vec<SweepGuess>,
    /// `g(∅) − c(∅)`, the value of the always-present empty candidate.
    pub empty_value: f64,
    /// Index into `guesses` of the winner, `None` when `∅` won.
    pub winner: Option<usize>,
}

/// Last guess index `T = ⌈(1/δ) ln(1/max{δ, L})⌉`.
pub fn sweep_length(delta: f64, lower_bound: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if !(0.0..=1.0).contains(&lower_bound) {
        return Err(Error::param("L", format!("must lie in [0, 1], got {lower_bound}")));
    }
    Ok(((1.0 / delta) * (1.0 / delta.max(lower_bound)).ln()).ceil() as usize)
}

/// Runs `sub` for every guess `γ_r = (1 − δ)^r`, `r = 0..=T`, and returns the
/// best of those sets and `∅`. Ties go to the smaller `r`; `∅` wins only when
/// strictly better than every guess.
///
/// An `Exact(γ)` declaration is used as the lower bound `L = γ`;
/// `Unknown` means `L = 0`. Guess `r` draws from the stream
/// `derive_seed(seed, &[r])`.
pub fn gamma_sweep<O: IncrementalOracle>(
    inst: &mut ProblemInstance<O>,
    delta: f64,
    sub: SweepSubroutine,
    seed: u64,
) -> Result<SweepResult> {
    let lower = match inst.gamma {
        GammaKnowledge::Exact(g) | GammaKnowledge::LowerBound(g) => g,
        GammaKnowledge::Unknown => 0.0,
    };
    let t = sweep_length(delta, lower)?;
    let n = inst.ground_size();

    let mut runs = Vec::with_capacity(t + 1);
    for r in 0..=t {
        let gamma = (1.0 - delta).powi(r as i32);
        let run = match sub {
            SweepSubroutine::DistortedGreedy => {
                run_distorted_greedy(&mut inst.oracle, &inst.cost, inst.k, gamma)?
            }
            SweepSubroutine::StochasticDistortedGreedy => run_stochastic_distorted_greedy(
                &mut inst.oracle,
                &inst.cost,
                inst.k,
                gamma,
                delta,
                derive_seed(seed, &[r as u64]),
            )?,
            SweepSubroutine::UnconstrainedDistortedGreedy => run_unconstrained_distorted_greedy(
                &mut inst.oracle,
                &inst.cost,
                gamma,
                derive_seed(seed, &[r as u64]),
            )?,
        };
        runs.push((gamma, run));
    }
    inst.oracle.reset();

    let empty = IndexSet::empty(n);
    let empty_value = inst.oracle.value(&empty)?;
    let total_evals: u64 = runs.iter().map(|(_, r)| r.evals).sum::<u64>() + 1;

    let mut winner: Option<usize> = None;
    for (idx, (_, run)) in runs.iter().enumerate() {
        if winner.is_none_or(|w| run.value > runs[w].1.value) {
            winner = Some(idx);
        }
    }
    if winner.is_some_and(|w| empty_value > runs[w].1.value) {
        winner = None;
    }

    let guesses = runs
        .iter()
        .enumerate()
        .map(|(r, (gamma, run))| SweepGuess {
            r,
            gamma: *gamma,
            value: run.value,
            solution: run.solution.clone(),
            evals: run.evals,
        })
        .collect();

    let best = match winner {
        Some(w) => {
            let mut run = runs.swap_remove(w).1;
            run.evals = total_evals;
            run.seed = Some(seed);
            run
        }
        None => RunResult {
            solution: empty,
            value: empty_value,
            evals: total_evals,
            traces: Vec::new(),
            seed: Some(seed),
        },
    };

    Ok(SweepResult {
        best,
        guesses,
        empty_value,
        winner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{star_instance, CoverState};
    use crate::ground::ModularCost;

    #[test]
    fn sweep_lengths() {
        assert_eq!(sweep_length(0.1, 0.0).unwrap(), 24);
        assert_eq!(sweep_length(0.1, 0.5).unwrap(), 7);
        assert_eq!(sweep_length(0.1, 1.0).unwrap(), 0);
        assert!(sweep_length(0.0, 0.0).is_err());
        assert!(sweep_length(1.0, 0.0).is_err());
    }

    #[test]
    fn sweep_runs_every_guess() {
        let (graph, cost) = star_instance(10, 0.01).unwrap();
        let mut inst =
            ProblemInstance::new(CoverState::new(graph), cost, 4, GammaKnowledge::Unknown).unwrap();
        let out = gamma_sweep(&mut inst, 0.1, SweepSubroutine::DistortedGreedy, 3).unwrap();
        assert_eq!(out.guesses.len(), 25);
        for (r, g) in out.guesses.iter().enumerate() {
            assert!((g.gamma - 0.9f64.powi(r as i32)).abs() < 1e-15);
            assert!(out.best.value >= g.value);
        }
        assert!(out.best.value >= out.empty_value);
        assert_eq!(out.best.evals, 25 * 40 + 1);
    }

    #[test]
    fn sweep_falls_back_to_empty() {
        let (graph, _) = star_instance(6, 0.01).unwrap();
        let cost = ModularCost::new(vec![50.0; 6]).unwrap();
        let mut inst =
            ProblemInstance::new(CoverState::new(graph), cost, 3, GammaKnowledge::LowerBound(0.5))
                .unwrap();
        for sub in [
            SweepSubroutine::DistortedGreedy,
            SweepSubroutine::StochasticDistortedGreedy,
            SweepSubroutine::UnconstrainedDistortedGreedy,
        ] {
            let out = gamma_sweep(&mut inst, 0.1, sub, 1).unwrap();
            assert!(out.best.solution.is_empty());
            assert_eq!(out.best.value, 0.0);
            assert_eq!(out.guesses.len(), 8);
        }
    }
}
