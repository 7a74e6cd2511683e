//! Lazy (stale upper bound) evaluation for submodular utilities.
//!
//! Valid only when `g(e | S)` is non-increasing in `S`, i.e. `γ = 1`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::ground::{CountingOracle, GammaKnowledge, IncrementalOracle, ProblemInstance};
use crate::maximizers::{DistortionSchedule, IterationTrace, RunResult};

#[derive(Debug, Clone, Copy)]
struct Entry {
    key: f64,
    id: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // larger key first, then smaller id
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Max-priority queue over stale upper bounds of `g(e | S)`.
///
/// Keys are derived from the stored bounds by a caller-supplied function, so a
/// per-iteration distortion can be applied without re-evaluating anything.
#[derive(Debug, Clone)]
pub struct LazyQueue {
    heap: BinaryHeap<Entry>,
    bounds: Vec<f64>,
    fresh_at: Vec<Option<usize>>,
}

impl LazyQueue {
    /// Queue over `n` elements with unknown (infinite) bounds.
    pub fn new(n: usize) -> Self {
        Self {
            heap: BinaryHeap::with_capacity(n),
            bounds: vec![f64::INFINITY; n],
            fresh_at: vec![None; n],
        }
    }

    pub fn bound(&self, e: usize) -> f64 {
        self.bounds[e]
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Re-keys the queue from the stored bounds for the elements in `active`.
    pub fn rebuild<I, K>(&mut self, active: I, key: K)
    where
        I: IntoIterator<Item = usize>,
        K: Fn(usize, f64) -> f64,
    {
        let entries: Vec<_> = active
            .into_iter()
            .map(|id| Entry {
                key: key(id, self.bounds[id]),
                id,
            })
            .collect();
        self.heap = BinaryHeap::from(entries);
    }

    /// Pops the element with the best key, re-evaluating stale tops until the
    /// maximum is fresh for `round`. The returned element is removed from the
    /// queue.
    pub fn pop_best<F, K>(&mut self, round: usize, mut evaluate: F, key: K) -> Result<Option<(usize, f64)>>
    where
        F: FnMut(usize) -> Result<f64>,
        K: Fn(usize, f64) -> f64,
    {
        while let Some(top) = self.heap.pop() {
            if self.fresh_at[top.id] == Some(round) {
                return Ok(Some((top.id, top.key)));
            }
            let gain = evaluate(top.id)?;
            self.bounds[top.id] = gain;
            self.fresh_at[top.id] = Some(round);
            self.heap.push(Entry {
                key: key(top.id, gain),
                id: top.id,
            });
        }
        Ok(None)
    }

    /// Puts an element back with its current bound.
    pub fn push<K: Fn(usize, f64) -> f64>(&mut self, id: usize, key: K) {
        self.heap.push(Entry {
            key: key(id, self.bounds[id]),
            id,
        });
    }
}

/// Which eager algorithm the lazy run reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LazyMode {
    /// Same solution as `plain_greedy`.
    Greedy,
    /// Same solution as `distorted_greedy` with `γ = 1`.
    DistortedGreedy,
}

/// Lazy-evaluation greedy, exact for submodular `g`. The instance must
/// declare `GammaKnowledge::Exact(1.0)`.
pub fn lazy_greedy<O: IncrementalOracle>(inst: &mut ProblemInstance<O>, mode: LazyMode) -> Result<RunResult> {
    if inst.gamma != GammaKnowledge::Exact(1.0) {
        return Err(Error::param(
            "gamma",
            format!("lazy evaluation needs a submodular utility (gamma = 1), instance declares {:?}", inst.gamma),
        ));
    }
    let n = inst.ground_size();
    let k = inst.k;
    let cost = &inst.cost;
    inst.oracle.reset();
    let mut oracle = CountingOracle::new(&mut inst.oracle);
    let mut queue = LazyQueue::new(n);
    let mut traces = Vec::new();

    match mode {
        LazyMode::Greedy => {
            let key = |e: usize, bound: f64| bound - cost.coefficient(e);
            queue.rebuild(0..n, key);
            for i in 0..k {
                let g_before = oracle.cursor_value()?;
                let c_before = cost.cost(oracle.cursor());
                let Some((e, score)) = queue.pop_best(i, |e| oracle.marginal(e), key)? else {
                    break;
                };
                let accepted = score > 0.0;
                if accepted {
                    oracle.commit(e)?;
                }
                traces.push(IterationTrace {
                    iter: i,
                    chosen: Some(e),
                    accepted,
                    psi: score.max(0.0),
                    phi_before: g_before - c_before,
                    phi_after: oracle.cursor_value()? - cost.cost(oracle.cursor()),
                    g_of_s: g_before,
                });
                if !accepted {
                    break;
                }
            }
        }
        LazyMode::DistortedGreedy => {
            let schedule = DistortionSchedule::new(k, 1.0)?;
            for i in 0..k {
                let w = schedule.weight(i);
                let key = |e: usize, bound: f64| w * bound - cost.coefficient(e);
                let active: Vec<usize> = (0..n).filter(|&e| !oracle.cursor().contains(e)).collect();
                queue.rebuild(active, key);

                let g_before = oracle.cursor_value()?;
                let c_before = cost.cost(oracle.cursor());
                let best = queue.pop_best(i, |e| oracle.marginal(e), key)?;
                let (accepted, psi) = match best {
                    Some((e, score)) if score > 0.0 => {
                        oracle.commit(e)?;
                        (true, score)
                    }
                    _ => (false, 0.0),
                };
                traces.push(IterationTrace {
                    iter: i,
                    chosen: best.map(|(e, _)| e),
                    accepted,
                    psi,
                    phi_before: schedule.phi_factor(i) * g_before - c_before,
                    phi_after: schedule.phi_factor(i + 1) * oracle.cursor_value()? - cost.cost(oracle.cursor()),
                    g_of_s: g_before,
                });
            }
        }
    }

    let evals = oracle.evaluations();
    let solution = oracle.cursor().clone();
    let value = oracle.inner().value(&solution)? - cost.cost(&solution);
    Ok(RunResult {
        solution,
        value,
        evals,
        traces,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{star_instance, CoverState};
    use crate::maximizers::{distorted_greedy, plain_greedy};

    #[test]
    fn rejects_non_submodular_declaration() {
        let (g, c) = star_instance(5, 0.01).unwrap();
        let mut inst = ProblemInstance::new(CoverState::new(g), c, 2, GammaKnowledge::Exact(0.5)).unwrap();
        assert!(lazy_greedy(&mut inst, LazyMode::Greedy).is_err());
    }

    #[test]
    fn star_matches_eager() {
        let (g, c) = star_instance(10, 0.01).unwrap();
        let mut inst = ProblemInstance::new(CoverState::new(g), c, 4, GammaKnowledge::Exact(1.0)).unwrap();
        let lazy = lazy_greedy(&mut inst, LazyMode::Greedy).unwrap();
        let eager = plain_greedy(&mut inst).unwrap();
        assert_eq!(lazy.solution.ids(), &[0]);
        assert_eq!(lazy.solution, eager.solution);
        assert!(lazy.evals <= eager.evals);

        let lazy = lazy_greedy(&mut inst, LazyMode::DistortedGreedy).unwrap();
        let eager = distorted_greedy(&mut inst).unwrap();
        assert_eq!(lazy.solution, eager.solution);
        assert!(lazy.evals < eager.evals);
    }

    #[test]
    fn queue_orders_by_key_then_id() {
        let mut q = LazyQueue::new(4);
        let gains = [3.0, 5.0, 5.0, 1.0];
        q.rebuild(0..4, |_, b| b);
        let (e, key) = q.pop_best(0, |e| Ok(gains[e]), |_, b| b).unwrap().unwrap();
        assert_eq!((e, key), (1, 5.0));
        let (e, _) = q.pop_best(0, |e| Ok(gains[e]), |_, b| b).unwrap().unwrap();
        assert_eq!(e, 2);
        assert_eq!(q.bound(3), 1.0);
    }
}
