use distort_core::aoptimal::{gamma_lower_bound, proportional_costs, random_problem, AOptState};
use distort_core::cover::{degree_costs, random_digraph, CoverState};
use distort_core::hardness::{f_t_counts, f_t_value, HardnessOracle, HardnessParams};
use distort_core::maximizers::SweepSubroutine;
use distort_core::seed::rng_from_seed;
use distort_core::verification::{
    brute_force_instance, exact_submodularity_ratio, exact_weak_dr_ratio, random_costs, WeightedCoverage,
};
use distort_core::{
    derive_seed, distorted_greedy, gamma_sweep, plain_greedy, stochastic_distorted_greedy,
    unconstrained_distorted_greedy, DistortionSchedule, GammaKnowledge, IncrementalOracle, IndexSet, ModularCost,
    ProblemInstance, ValueCursor, ValueOracle,
};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn design_instance(seed: u64, n: usize, k: usize, alpha: f64) -> ProblemInstance<AOptState> {
    let p = random_problem(3, n, seed).unwrap();
    let c = proportional_costs(&p, alpha).unwrap();
    let gamma = exact_submodularity_ratio(&AOptState::new(p.clone()), 12).unwrap();
    ProblemInstance::new(AOptState::new(p), c, k, GammaKnowledge::Exact(gamma)).unwrap()
}

fn declared_gamma<O>(inst: &ProblemInstance<O>) -> f64 {
    match inst.gamma {
        GammaKnowledge::Exact(g) => g,
        _ => unreachable!(),
    }
}

#[test]
fn telescoping_sum_and_final_value() {
    for i in 0..20 {
        let mut inst = design_instance(derive_seed(11, &[i]), 10, 1 + i as usize % 5, 0.5);
        let gamma = declared_gamma(&inst);
        let schedule = DistortionSchedule::new(inst.k, gamma).unwrap();
        let run = distorted_greedy(&mut inst).unwrap();
        let total: f64 = run.traces.iter().map(|t| t.phi_after - t.phi_before).sum();
        let g_r = inst.oracle.value(&run.solution).unwrap();
        let phi_k = schedule.phi_factor(inst.k) * g_r - inst.cost.cost(&run.solution);
        let phi_0 = schedule.phi_factor(0) * inst.oracle.value(&IndexSet::empty(10)).unwrap();
        assert!((total - (phi_k - phi_0)).abs() <= 1e-9 * total.abs().max(1.0));
        assert!(run.value >= phi_k - phi_0 - 1e-9);
    }
}

#[test]
fn per_iteration_progress_bound() {
    for i in 0..30 {
        let mut inst = design_instance(derive_seed(12, &[i]), 10, 2 + i as usize % 3, 0.3 + 0.1 * (i % 4) as f64);
        let gamma = declared_gamma(&inst);
        let k = inst.k;
        let (opt, _) = brute_force_instance(&inst).unwrap();
        let g_opt = inst.oracle.value(&opt).unwrap();
        let c_opt = inst.cost.cost(&opt);
        let schedule = DistortionSchedule::new(k, gamma).unwrap();
        let run = distorted_greedy(&mut inst).unwrap();
        for t in &run.traces {
            let bound = gamma / k as f64 * schedule.weight(t.iter) * (g_opt - t.g_of_s) - c_opt / k as f64;
            assert!(t.psi >= bound - 1e-9, "instance {i} iter {}: {} < {bound}", t.iter, t.psi);
        }
    }
}

#[test]
fn acceptance_iff_positive_psi() {
    let graph = random_digraph(40, 200, 3).unwrap();
    let cost = degree_costs(&graph, 3.0).unwrap();
    let mut inst = ProblemInstance::new(CoverState::new(graph), cost, 12, GammaKnowledge::Exact(1.0)).unwrap();
    let run = distorted_greedy(&mut inst).unwrap();
    assert!(run.traces.iter().all(|t| t.accepted == (t.psi > 0.0)));
    assert_eq!(run.solution.len(), run.traces.iter().filter(|t| t.accepted).count());
}

#[test]
fn nonpositive_objective_returns_empty() {
    let g = WeightedCoverage::new(vec![vec![0], vec![1], vec![0, 1]], vec![1.0, 1.0]).unwrap();
    let cost = ModularCost::new(vec![2.0, 2.0, 3.0]).unwrap();
    let mut inst = ProblemInstance::new(ValueCursor::new(g), cost, 2, GammaKnowledge::Exact(1.0)).unwrap();
    for run in [distorted_greedy(&mut inst).unwrap(), plain_greedy(&mut inst).unwrap()] {
        assert!(run.solution.is_empty());
        assert_eq!(run.value, 0.0);
    }
}

#[test]
fn sweep_value_dominates_every_candidate() {
    for (i, sub) in [
        SweepSubroutine::DistortedGreedy,
        SweepSubroutine::StochasticDistortedGreedy,
        SweepSubroutine::UnconstrainedDistortedGreedy,
    ]
    .into_iter()
    .enumerate()
    {
        let p = random_problem(4, 15, derive_seed(13, &[i as u64])).unwrap();
        let c = proportional_costs(&p, 0.7).unwrap();
        let mut inst = ProblemInstance::new(AOptState::new(p), c, 5, GammaKnowledge::Unknown).unwrap();
        let result = gamma_sweep(&mut inst, 0.2, sub, 99).unwrap();
        let best_candidate = result.guesses.iter().map(|g| g.value).fold(result.empty_value, f64::max);
        assert_eq!(result.best.value, best_candidate);
        assert!(result.guesses.iter().all(|g| result.best.value >= g.value));
        let again = gamma_sweep(&mut inst, 0.2, sub, 99).unwrap();
        assert_eq!(result.best, again.best);
    }
}

#[test]
fn stochastic_runs_are_seed_determined() {
    let mut inst = design_instance(14, 12, 4, 0.5);
    let a = stochastic_distorted_greedy(&mut inst, 0.1, 5).unwrap();
    assert_eq!(a, stochastic_distorted_greedy(&mut inst, 0.1, 5).unwrap());
    let b = unconstrained_distorted_greedy(&mut inst, 5).unwrap();
    assert_eq!(b, unconstrained_distorted_greedy(&mut inst, 5).unwrap());
}

#[test]
fn hardness_oracle_chain_decomposition() {
    let params = HardnessParams::new(0.6, Ratio::new(1, 7), 7).unwrap();
    let n = params.ground_size() as usize;
    let mut rng = rng_from_seed(15);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..500 {
        order.shuffle(&mut rng);
        let hidden = IndexSet::from_ids(n, order[..7].iter().copied()).unwrap();
        let oracle = HardnessOracle::new(params, hidden).unwrap();
        order.shuffle(&mut rng);
        let a_size = rng.random_range(0..12);
        let b_size = a_size + rng.random_range(1..12);
        let a = IndexSet::from_ids(n, order[..a_size].iter().copied()).unwrap();
        let b = IndexSet::from_ids(n, order[..b_size].iter().copied()).unwrap();
        let f_a = oracle.value(&a).unwrap();
        let lhs = oracle.value(&b).unwrap() - f_a;
        let singles: f64 = order[a_size..b_size]
            .iter()
            .map(|&u| oracle.value(&a.with(u).unwrap()).unwrap() - f_a)
            .sum();
        assert!(lhs <= singles / params.gamma() + 1e-10, "{lhs} > {singles} / gamma");
    }
}

#[test]
fn hardness_values_depend_only_on_counts() {
    let params = HardnessParams::new(0.3, Ratio::new(1, 7), 7).unwrap();
    let n = params.ground_size() as usize;
    let mut rng = rng_from_seed(16);
    let mut order: Vec<usize> = (0..n).collect();
    // S = first a of T plus b elements outside T, for a fresh random layout
    let mut draw = |a: usize, b: usize| {
        order.shuffle(&mut rng);
        let t = IndexSet::from_ids(n, order[..7].iter().copied()).unwrap();
        let s = IndexSet::from_ids(n, order[..a].iter().chain(&order[7..7 + b]).copied()).unwrap();
        f_t_value(&s, &t, &params)
    };
    let mut pick = rng_from_seed(17);
    for _ in 0..1000 {
        let a = pick.random_range(0..=7);
        let b = pick.random_range(0..=40);
        let first = draw(a, b);
        assert_eq!(first, draw(a, b));
        assert_eq!(first, f_t_counts(a as u64, b as u64, &params));
    }
}

#[test]
fn aopt_marginals_match_finite_differences() {
    let p = random_problem(6, 30, 17).unwrap();
    let mut rng = rng_from_seed(18);
    for _ in 0..20 {
        let mut state = AOptState::new(p.clone());
        for _ in 0..rng.random_range(0..15) {
            let e = rng.random_range(0..30);
            if !state.cursor().contains(e) {
                state.commit(e).unwrap();
            }
        }
        let base = p.dense_value(state.cursor()).unwrap();
        for e in 0..30 {
            let fd = p.dense_value(&state.cursor().with(e).unwrap()).unwrap() - base;
            let m = state.marginal(e).unwrap();
            assert!((m - fd).abs() <= 1e-8 * fd.abs().max(1e-6), "e={e}: {m} vs {fd}");
        }
    }
}

#[test]
fn aopt_ratio_respects_lower_bound_at_larger_d() {
    for i in 0..5 {
        let p = random_problem(5, 9, derive_seed(19, &[i])).unwrap();
        let exact = exact_submodularity_ratio(&AOptState::new(p.clone()), 12).unwrap();
        assert!(exact >= gamma_lower_bound(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coverage_is_exactly_submodular(seed in any::<u64>(), n in 3usize..9, m in 0usize..30) {
        let graph = random_digraph(n, m.min(n * (n - 1)), seed).unwrap();
        let oracle = CoverState::new(graph);
        prop_assert_eq!(exact_weak_dr_ratio(&oracle, 12).unwrap(), 1.0);
        prop_assert_eq!(exact_submodularity_ratio(&oracle, 12).unwrap(), 1.0);
    }

    #[test]
    fn no_algorithm_beats_brute_force(seed in any::<u64>(), k in 1usize..5, scale in 0.2f64..2.0) {
        let g = WeightedCoverage::random(9, 14, seed);
        let c = random_costs(&g, scale, seed ^ 3).unwrap();
        let mut inst = ProblemInstance::new(ValueCursor::new(g), c, k, GammaKnowledge::Exact(1.0)).unwrap();
        let (_, opt) = brute_force_instance(&inst).unwrap();
        let dg = distorted_greedy(&mut inst).unwrap();
        let greedy = plain_greedy(&mut inst).unwrap();
        let sdg = stochastic_distorted_greedy(&mut inst, 0.2, seed).unwrap();
        for run in [&dg, &greedy, &sdg] {
            prop_assert!(run.solution.len() <= k);
            prop_assert!(run.value <= opt + 1e-9);
            let fresh = inst.oracle.inner().value(&run.solution).unwrap() - inst.cost.cost(&run.solution);
            prop_assert!((fresh - run.value).abs() <= 1e-9);
        }
        prop_assert!(dg.value >= -1e-9);
        prop_assert_eq!(dg.evals, 2 * 9 * k as u64);
    }
}
