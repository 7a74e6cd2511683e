//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use distort_core::aoptimal::{gamma_lower_bound, proportional_costs, random_problem, AOptState};
use distort_core::cover::{degree_costs, lazy_greedy, random_digraph, star_instance, CoverState, LazyMode};
use distort_core::hardness::{certify_properties, HardnessParams};
use distort_core::maximizers::sample_size;
use distort_core::verification::{
    brute_force_instance, exact_submodularity_ratio, guarantee_bound, random_costs, WeightedCoverage,
};
use distort_core::{
    derive_seed, distorted_greedy, plain_greedy, stochastic_distorted_greedy, unconstrained_distorted_greedy,
    DistortionSchedule, GammaKnowledge, IncrementalOracle, ModularCost, ProblemInstance, Result,
    RunResult, ValueCursor, ValueOracle,
};
use num_rational::Ratio;

const BASE_SEED: u64 = 0x5EED_0001;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Largest relative progress-identity residual over a run's trace rows.
fn identity_residual(run: &RunResult, k: usize, gamma: f64) -> Result<f64> {
    let schedule = DistortionSchedule::new(k, gamma)?;
    let mut worst: f64 = 0.0;
    for t in &run.traces {
        let lhs = t.phi_after - t.phi_before;
        let rhs = t.psi + gamma / k as f64 * schedule.weight(t.iter) * t.g_of_s;
        let scale = [1.0, t.phi_after.abs(), t.phi_before.abs(), t.g_of_s.abs()]
            .into_iter()
            .fold(0.0, f64::max);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}

fn identity_on<O: IncrementalOracle>(oracle: O, cost: ModularCost, k: usize, gamma: f64) -> Result<f64> {
    let mut inst = ProblemInstance::new(oracle, cost, k, GammaKnowledge::Exact(gamma))?;
    let run = distorted_greedy(&mut inst)?;
    identity_residual(&run, k, gamma)
}

fn criterion_1() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for i in 0..50u64 {
        let seed = derive_seed(BASE_SEED, &[1, i]);
        let n = 10 + (i as usize % 21);
        let k = 1 + (i as usize % 10);
        let residual = match i % 3 {
            0 => {
                let g = WeightedCoverage::random(n, 2 * n, seed);
                let c = random_costs(&g, 1.5, seed ^ 1)?;
                identity_on(ValueCursor::new(g), c, k, 1.0)?
            }
            1 => {
                let p = random_problem(2 + (i as usize % 6), n, seed)?;
                let gamma = gamma_lower_bound(&p);
                let c = proportional_costs(&p, 0.6)?;
                identity_on(AOptState::new(p), c, k, gamma)?
            }
            _ => {
                let graph = random_digraph(n, 3 * n, seed)?;
                let c = degree_costs(&graph, 2.0)?;
                identity_on(CoverState::new(graph), c, k, 1.0)?
            }
        };
        rows += k;
        worst = worst.max(residual);
    }
    outcome(worst <= 1e-9, format!("{rows} trace rows, max rel residual {worst:.2e}"))
}

/// Random `n = 12` instance: coverage on even indices, A-optimal design on odd.
enum Small {
    Coverage(ValueCursor<WeightedCoverage>, ModularCost),
    Design(AOptState, ModularCost),
}

fn small_instance(i: u64, n: usize) -> Result<Small> {
    let seed = derive_seed(BASE_SEED, &[2, i, n as u64]);
    if i.is_multiple_of(2) {
        let g = WeightedCoverage::random(n, 18, seed);
        let c = random_costs(&g, 1.2, seed ^ 7)?;
        Ok(Small::Coverage(ValueCursor::new(g), c))
    } else {
        let p = random_problem(3, n, seed)?;
        let alpha = 0.2 + 0.6 * (i % 5) as f64 / 4.0;
        let c = proportional_costs(&p, alpha)?;
        Ok(Small::Design(AOptState::new(p), c))
    }
}

struct Opt {
    g: f64,
    c: f64,
    gamma: f64,
}

fn exact_opt<O: ValueOracle>(oracle: &O, cost: &ModularCost, k: usize) -> Result<Opt> {
    let gamma = exact_submodularity_ratio(oracle, 12)?;
    let inst = ProblemInstance::new(oracle, cost.clone(), k, GammaKnowledge::Exact(gamma))?;
    let (opt, _) = brute_force_instance(&inst)?;
    Ok(Opt {
        g: oracle.value(&opt)?,
        c: cost.cost(&opt),
        gamma,
    })
}

fn dg_audit<O: IncrementalOracle>(oracle: O, cost: ModularCost, k: usize) -> Result<(bool, f64)> {
    let opt = exact_opt(&oracle, &cost, k)?;
    let mut inst = ProblemInstance::new(oracle, cost, k, GammaKnowledge::Exact(opt.gamma))?;
    let run = distorted_greedy(&mut inst)?;
    let bound = guarantee_bound(opt.g, opt.c, opt.gamma, 0.0);
    Ok((run.value >= bound - 1e-9, opt.gamma))
}

fn criterion_2() -> Result<Outcome> {
    let mut passed = 0;
    let mut min_gamma: f64 = 1.0;
    for i in 0..200 {
        let (ok, gamma) = match small_instance(i, 12)? {
            Small::Coverage(g, c) => dg_audit(g, c, 4)?,
            Small::Design(g, c) => dg_audit(g, c, 4)?,
        };
        passed += ok as usize;
        min_gamma = min_gamma.min(gamma);
    }
    outcome(passed == 200, format!("{passed}/200 instances, smallest gamma* {min_gamma:.4}"))
}

fn expectation_check<O, F>(oracle: O, cost: ModularCost, k: usize, slack: f64, mut run: F) -> Result<Outcome>
where
    O: IncrementalOracle,
    F: FnMut(&mut ProblemInstance<O>, u64) -> Result<RunResult>,
{
    let opt = exact_opt(&oracle, &cost, k)?;
    let mut inst = ProblemInstance::new(oracle, cost, k, GammaKnowledge::Exact(opt.gamma))?;
    let values = (0..500u64)
        .map(|t| run(&mut inst, derive_seed(BASE_SEED, &[3, t])).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let (mean, std) = mean_std(&values);
    let bound = guarantee_bound(opt.g, opt.c, opt.gamma, slack) - 3.0 * std / (values.len() as f64).sqrt();
    outcome(
        mean >= bound,
        format!("mean {mean:.5} vs bound {bound:.5} (gamma* {:.4}, std {std:.4})", opt.gamma),
    )
}

fn criterion_3() -> Result<Outcome> {
    let p = random_problem(3, 12, derive_seed(BASE_SEED, &[3]))?;
    let c = proportional_costs(&p, 0.5)?;
    expectation_check(AOptState::new(p), c, 4, 0.1, |inst, seed| {
        stochastic_distorted_greedy(inst, 0.1, seed)
    })
}

fn criterion_4() -> Result<Outcome> {
    let p = random_problem(3, 10, derive_seed(BASE_SEED, &[4]))?;
    let c = proportional_costs(&p, 0.5)?;
    expectation_check(AOptState::new(p), c, 10, 0.0, unconstrained_distorted_greedy)
}

fn criterion_5() -> Result<Outcome> {
    let (n, k) = (506, 15);
    let p = random_problem(13, n, derive_seed(BASE_SEED, &[5]))?;
    let c = proportional_costs(&p, 0.8)?;
    let mut inst = ProblemInstance::new(AOptState::new(p), c, k, GammaKnowledge::Exact(0.5))?;
    let s = sample_size(n, k, 0.05)?;
    let sdg = stochastic_distorted_greedy(&mut inst, 0.05, 1)?.evals;
    let udg = unconstrained_distorted_greedy(&mut inst, 1)?.evals;
    let dg = distorted_greedy(&mut inst)?.evals;
    let pass = s == 102 && sdg == 1530 && udg == n as u64 && dg == (n * k) as u64;
    outcome(pass, format!("s={s}, sdg={sdg}, udg={udg}, dg={dg}"))
}

fn criterion_6() -> Result<Outcome> {
    let (graph, cost) = star_instance(100, 0.01)?;
    let mut inst = ProblemInstance::new(CoverState::new(graph), cost, 20, GammaKnowledge::Exact(1.0))?;
    let greedy = plain_greedy(&mut inst)?.value;
    let dg = distorted_greedy(&mut inst)?.value;
    let target = (1.0 - (-1.0f64).exp()) * 20.0 - 10.0;
    let pass = (greedy - 0.51).abs() <= 1e-12 && dg >= target && dg / greedy >= 5.0;
    outcome(pass, format!("greedy {greedy}, dg {dg}, ratio {:.2}", dg / greedy))
}

fn criterion_7() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let seed = derive_seed(BASE_SEED, &[7, i]);
        let d = 2 + (i as usize % 13);
        let n = 60 + (i as usize * 2);
        let p = random_problem(d, n, seed)?;
        let mut state = AOptState::new(p.clone());
        let mut rng_pick = seed;
        for _ in 0..50 {
            let s = state.cursor().clone();
            let dense_s = p.dense_value(&s)?;
            let scale = p.sigma().trace().max(1e-12);
            worst = worst.max((state.cursor_value()? - dense_s).abs() / dense_s.abs().max(1e-12));
            for e in (0..n).filter(|e| !s.contains(*e)) {
                let dense = p.dense_value(&s.with(e)?)? - dense_s;
                let incremental = state.marginal(e)?;
                worst = worst.max((incremental - dense).abs() / dense.abs().max(scale * 1e-6));
            }
            rng_pick = derive_seed(rng_pick, &[1]);
            let mut e = (rng_pick % n as u64) as usize;
            while s.contains(e) {
                e = (e + 1) % n;
            }
            state.commit(e)?;
        }
    }
    outcome(worst <= 1e-8, format!("max rel err {worst:.2e} over 20 chains of 50"))
}

fn criterion_8() -> Result<Outcome> {
    let mut passed = 0;
    let mut tightest = f64::INFINITY;
    for i in 0..20u64 {
        let p = random_problem(3, 8, derive_seed(BASE_SEED, &[8, i]))?;
        let bound = gamma_lower_bound(&p);
        let exact = exact_submodularity_ratio(&AOptState::new(p), 12)?;
        passed += (exact >= bound) as usize;
        tightest = tightest.min(exact - bound);
    }
    outcome(passed == 20, format!("{passed}/20, smallest gap {tightest:.4}"))
}

fn criterion_9() -> Result<Outcome> {
    let mut passed = 0;
    let mut notes = Vec::new();
    for gamma in [0.3, 0.6, 1.0] {
        let p = HardnessParams::new(gamma, Ratio::new(1, 7), 7)?;
        for t_size in [3, 7] {
            let report = certify_properties(&p, t_size)?;
            let ceiling = 1.0 - (-gamma).exp() + 12.0 / 7.0;
            let ok = p.ground_size() == 147 && p.g() == 2 && report.passed() && report.empty_max <= ceiling;
            passed += ok as usize;
            if !ok {
                notes.push(format!("gamma={gamma} |T|={t_size}"));
            }
        }
    }
    let detail = if notes.is_empty() {
        format!("{passed}/6 grid points certified")
    } else {
        format!("{passed}/6 grid points certified, failing: {}", notes.join(", "))
    };
    outcome(passed == 6, detail)
}

fn criterion_10() -> Result<Outcome> {
    let mut passed = 0;
    let mut saved = 0u64;
    let mut cases = Vec::new();
    for i in 0..10u64 {
        let graph = random_digraph(200, 2000, derive_seed(BASE_SEED, &[10, i]))?;
        let cost = degree_costs(&graph, 6.0)?;
        cases.push((graph, cost, 20));
    }
    cases.push({
        let (graph, cost) = star_instance(100, 0.01)?;
        (graph, cost, 20)
    });
    let total = cases.len();
    for (graph, cost, k) in cases {
        let mut inst = ProblemInstance::new(CoverState::new(graph), cost, k, GammaKnowledge::Exact(1.0))?;
        let eager = plain_greedy(&mut inst)?;
        let lazy = lazy_greedy(&mut inst, LazyMode::Greedy)?;
        let eager_dg = distorted_greedy(&mut inst)?;
        let lazy_dg = lazy_greedy(&mut inst, LazyMode::DistortedGreedy)?;
        let ok = lazy.solution == eager.solution
            && lazy.evals <= eager.evals
            && lazy_dg.solution == eager_dg.solution
            && lazy_dg.evals <= eager_dg.evals;
        passed += ok as usize;
        saved += eager.evals - lazy.evals.min(eager.evals);
    }
    outcome(
        passed == total,
        format!("{passed}/{total} instances identical, {saved} greedy evaluations saved"),
    )
}

fn criterion_11() -> Result<Outcome> {
    let graph = random_digraph(1000, 25000, derive_seed(BASE_SEED, &[11]))?;
    let cost = degree_costs(&graph, 6.0)?;
    let mut inst = ProblemInstance::new(CoverState::new(graph), cost, 130, GammaKnowledge::Exact(1.0))?;
    let greedy = plain_greedy(&mut inst)?.value;
    let dg = distorted_greedy(&mut inst)?.value;
    let mut trials = |eps: f64| -> Result<Vec<f64>> {
        (0..20u64)
            .map(|t| {
                let seed = derive_seed(BASE_SEED, &[11, eps.to_bits(), t]);
                stochastic_distorted_greedy(&mut inst, eps, seed).map(|r| r.value)
            })
            .collect()
    };
    let (fine, fine_std) = mean_std(&trials(0.05)?);
    let (coarse, coarse_std) = mean_std(&trials(0.1)?);
    let sigma = fine_std.max(coarse_std);
    let pass = dg >= greedy && fine >= coarse - 3.0 * sigma;
    outcome(
        pass,
        format!("greedy {greedy:.1}, dg {dg:.1}, sdg(0.05) {fine:.1}, sdg(0.1) {coarse:.1}, sigma {sigma:.2}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Result<Outcome>); 11] = [
        ("progress identity", Duration::from_secs(10), criterion_1),
        ("deterministic guarantee", Duration::from_secs(60), criterion_2),
        ("stochastic expectation", Duration::from_secs(60), criterion_3),
        ("unconstrained expectation", Duration::from_secs(60), criterion_4),
        ("evaluation counts", Duration::from_secs(60), criterion_5),
        ("star separation", Duration::from_secs(1), criterion_6),
        ("woodbury equivalence", Duration::from_secs(60), criterion_7),
        ("gamma lower bound", Duration::from_secs(60), criterion_8),
        ("hardness certification", Duration::from_secs(30), criterion_9),
        ("lazy exactness", Duration::from_secs(60), criterion_10),
        ("large cover ordering", Duration::from_secs(300), criterion_11),
    ];
    let mut failures = 0;
    for (index, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += !pass as usize;
        println!(
            "criterion {:>2} {:<26} {} ({detail}; {:.2}s of {}s)",
            index + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
