//! Ground truth for small instances: exhaustive optimum, exact submodularity
//! and weak-DR ratios, and the approximation-guarantee auditor.

use std::io;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{IndexSet, ModularCost, ProblemInstance, ValueOracle};
use crate::seed::rng_from_seed;

/// Largest ground set [`brute_force_opt`] will enumerate.
pub const BRUTE_FORCE_GUARD: usize = 24;
/// Largest ground set the ratio computations will enumerate.
pub const RATIO_GUARD: usize = 12;

const DENOMINATOR_CUTOFF: f64 = 1e-12;

/// Exact maximizer of `g − c` over `|S| ≤ k`; ties go to the
/// lexicographically smallest ascending id sequence.
pub fn brute_force_opt<O: ValueOracle>(g: &O, cost: &ModularCost, k: usize) -> Result<(IndexSet, f64)> {
    let n = g.ground_size();
    if n > BRUTE_FORCE_GUARD {
        return Err(Error::GuardExceeded { n, max: BRUTE_FORCE_GUARD });
    }
    if cost.len() != n {
        return Err(Error::param("cost", "cost length does not match the ground set"));
    }
    let mut best = IndexSet::empty(n);
    let mut best_value = g.value(&best)?;
    for mask in 1u64..(1u64 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let set = IndexSet::from_bitmask(n, mask);
        let v = g.value(&set)? - cost.cost(&set);
        if v > best_value || (v == best_value && set.ids() < best.ids()) {
            best = set;
            best_value = v;
        }
    }
    Ok((best, best_value))
}

pub fn brute_force_instance<O: ValueOracle>(inst: &ProblemInstance<O>) -> Result<(IndexSet, f64)> {
    brute_force_opt(&inst.oracle, &inst.cost, inst.k)
}

/// `g` at every subset, indexed by bitmask.
pub fn value_table<O: ValueOracle>(g: &O, n_guard: usize) -> Result<Vec<f64>> {
    let n = g.ground_size();
    if n > n_guard.min(RATIO_GUARD) {
        return Err(Error::GuardExceeded { n, max: n_guard.min(RATIO_GUARD) });
    }
    (0u64..(1u64 << n))
        .map(|mask| g.value(&IndexSet::from_bitmask(n, mask)))
        .collect()
}

/// Iterates `(A, B)` with `A ⊆ B` as bitmasks.
fn nested_pairs(n: usize) -> impl Iterator<Item = (u64, u64)> {
    (0u64..(1u64 << n)).flat_map(|b| {
        // all submasks of b, including 0 and b itself
        let mut a = b;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let cur = a;
            if a == 0 {
                done = true;
            } else {
                a = (a - 1) & b;
            }
            Some((cur, b))
        })
    })
}

/// Largest `γ` with `Σ_{e∈B\A} g(e|A) ≥ γ (g(B) − g(A))` for all `A ⊆ B`,
/// clamped to `1`. Pairs whose increment is at most `1e-12` are skipped; `1`
/// is returned when none remain.
pub fn exact_submodularity_ratio<O: ValueOracle>(g: &O, n_guard: usize) -> Result<f64> {
    let n = g.ground_size();
    let table = value_table(g, n_guard)?;
    let mut ratio: f64 = 1.0;
    for (a, b) in nested_pairs(n) {
        let increment = table[b as usize] - table[a as usize];
        if increment <= DENOMINATOR_CUTOFF {
            continue;
        }
        let mut rest = b & !a;
        let mut singles = 0.0;
        while rest != 0 {
            let e = rest.trailing_zeros();
            singles += table[(a | 1 << e) as usize] - table[a as usize];
            rest &= rest - 1;
        }
        ratio = ratio.min(singles / increment);
    }
    Ok(ratio)
}

/// Largest `γ` with `g(u|A) ≥ γ g(u|B)` for all `A ⊆ B`, `u ∉ B`, clamped
/// to `1`; pairs with `g(u|B) ≤ 1e-12` are skipped.
pub fn exact_weak_dr_ratio<O: ValueOracle>(g: &O, n_guard: usize) -> Result<f64> {
    let n = g.ground_size();
    let table = value_table(g, n_guard)?;
    let full = (1u64 << n) - 1;
    let mut ratio: f64 = 1.0;
    for (a, b) in nested_pairs(n) {
        let mut outside = full & !b;
        while outside != 0 {
            let u = 1u64 << outside.trailing_zeros();
            outside &= outside - 1;
            let at_b = table[(b | u) as usize] - table[b as usize];
            if at_b <= DENOMINATOR_CUTOFF {
                continue;
            }
            let at_a = table[(a | u) as usize] - table[a as usize];
            ratio = ratio.min(at_a / at_b);
        }
    }
    Ok(ratio)
}

/// Smallest unit marginal over all `(S, e ∉ S)`; monotone iff `≥ 0`.
pub fn min_marginal<O: ValueOracle>(g: &O, n_guard: usize) -> Result<f64> {
    let n = g.ground_size();
    let table = value_table(g, n_guard)?;
    let mut lo = f64::INFINITY;
    for s in 0u64..(1u64 << n) {
        for e in 0..n {
            if s >> e & 1 == 0 {
                lo = lo.min(table[(s | 1 << e) as usize] - table[s as usize]);
            }
        }
    }
    Ok(lo)
}

/// Outcome of checking `value ≥ (1 − e^{−γ} − slack) g(OPT) − c(OPT) − 1e-9`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub value: f64,
    pub opt_value: f64,
    pub opt_g: f64,
    pub opt_c: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Guarantee bound for a known optimum.
pub fn guarantee_bound(opt_g: f64, opt_c: f64, gamma: f64, slack: f64) -> f64 {
    (1.0 - (-gamma).exp() - slack) * opt_g - opt_c
}

pub fn audit_value(value: f64, opt: &IndexSet, g: &impl ValueOracle, cost: &ModularCost, gamma: f64, slack: f64) -> Result<AuditReport> {
    let opt_g = g.value(opt)?;
    let opt_c = cost.cost(opt);
    let bound = guarantee_bound(opt_g, opt_c, gamma, slack);
    Ok(AuditReport {
        value,
        opt_value: opt_g - opt_c,
        opt_g,
        opt_c,
        bound,
        pass: value >= bound - 1e-9,
    })
}

/// Audits a run against the brute-force optimum of `inst`.
pub fn audit_guarantee<O: ValueOracle>(
    result_value: f64,
    inst: &ProblemInstance<O>,
    bound_gamma: f64,
    epsilon_slack: f64,
) -> Result<AuditReport> {
    let (opt, _) = brute_force_instance(inst)?;
    audit_value(result_value, &opt, &inst.oracle, &inst.cost, bound_gamma, epsilon_slack)
}

/// One line of an audit table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub instance: String,
    pub algorithm: String,
    pub value: f64,
    pub opt: f64,
    pub bound: f64,
    pub pass: bool,
}

/// CSV with header `instance,algorithm,value,opt,bound,pass`.
pub fn write_audit_csv<W: io::Write>(rows: &[AuditRow], writer: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Weighted coverage `g(S) = Σ_{u ∈ ∪_{e∈S} C_e} w_u`, a submodular test
/// utility.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoverage {
    covers: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl WeightedCoverage {
    pub fn new(covers: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        if covers.is_empty() {
            return Err(Error::param("covers", "need at least one element"));
        }
        if covers.iter().flatten().any(|&u| u >= weights.len()) {
            return Err(Error::param("covers", "item outside the weighted universe"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::param("weights", "weights must be non-negative"));
        }
        Ok(Self { covers, weights })
    }

    /// `n` elements over a universe of `universe` items; each element covers
    /// 1 to 4 random items, item weights are uniform in `[0.5, 2)`.
    pub fn random(n: usize, universe: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let weights = (0..universe).map(|_| rng.random_range(0.5..2.0)).collect();
        let covers = (0..n)
            .map(|_| {
                let size = rng.random_range(1..=4.min(universe));
                let mut items: Vec<usize> = (0..size).map(|_| rng.random_range(0..universe)).collect();
                items.sort_unstable();
                items.dedup();
                items
            })
            .collect();
        Self { covers, weights }
    }
}

impl ValueOracle for WeightedCoverage {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &IndexSet) -> Result<f64> {
        let mut hit = vec![false; self.weights.len()];
        let mut total = 0.0;
        for e in set.iter() {
            let items = self
                .covers
                .get(e)
                .ok_or(Error::ElementOutOfRange { id: e, n: self.covers.len() })?;
            for &u in items {
                if !hit[u] {
                    hit[u] = true;
                    total += self.weights[u];
                }
            }
        }
        Ok(total)
    }
}

/// Costs `c_e = U(0, scale) · g({e})`, so that singletons have mixed signs
/// of `g − c` when `scale > 1`.
pub fn random_costs<O: ValueOracle>(g: &O, scale: f64, seed: u64) -> Result<ModularCost> {
    let n = g.ground_size();
    let mut rng = rng_from_seed(seed);
    let costs = (0..n)
        .map(|e| {
            let single = g.value(&IndexSet::from_ids(n, [e])?)? - g.value(&IndexSet::empty(n))?;
            Ok(rng.random_range(0.0..scale) * single.max(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    ModularCost::new(costs)
}
