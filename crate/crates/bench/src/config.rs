use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Aopt,
    Cover,
    Star,
    Hardness,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Aopt => "aopt",
            Experiment::Cover => "cover",
            Experiment::Star => "star",
            Experiment::Hardness => "hardness",
            Experiment::Verify => "verify",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Greedy,
    Dg,
    Sdg,
    Udg,
    SweepDg,
    SweepSdg,
    SweepUdg,
    LazyGreedy,
    LazyDg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Greedy,
        Algorithm::Dg,
        Algorithm::Sdg,
        Algorithm::Udg,
        Algorithm::SweepDg,
        Algorithm::SweepSdg,
        Algorithm::SweepUdg,
        Algorithm::LazyGreedy,
        Algorithm::LazyDg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Dg => "dg",
            Algorithm::Sdg => "sdg",
            Algorithm::Udg => "udg",
            Algorithm::SweepDg => "sweep-dg",
            Algorithm::SweepSdg => "sweep-sdg",
            Algorithm::SweepUdg => "sweep-udg",
            Algorithm::LazyGreedy => "lazy-greedy",
            Algorithm::LazyDg => "lazy-dg",
        }
    }

    /// Randomized algorithms get one row per trial; the rest run once.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Algorithm::Sdg | Algorithm::Udg | Algorithm::SweepSdg | Algorithm::SweepUdg
        )
    }

    /// Algorithms that ignore `k` and run on the whole ground set.
    pub fn is_unconstrained(self) -> bool {
        matches!(self, Algorithm::Udg | Algorithm::SweepUdg)
    }

    pub fn is_sweep(self) -> bool {
        matches!(self, Algorithm::SweepDg | Algorithm::SweepSdg | Algorithm::SweepUdg)
    }

    pub fn is_lazy(self) -> bool {
        matches!(self, Algorithm::LazyGreedy | Algorithm::LazyDg)
    }

    /// Whether the run depends on an accuracy parameter `ε`.
    pub fn uses_epsilon(self) -> bool {
        matches!(self, Algorithm::Sdg | Algorithm::SweepSdg)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                format!("unknown algorithm {s:?}, expected one of {}", names.join(", "))
            })
    }
}

/// One concrete algorithm run: the algorithm plus its accuracy parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoSpec {
    pub algorithm: Algorithm,
    /// `ε` for `sdg`; `δ = ε` for `sweep-sdg`; `δ` for the other sweeps.
    pub accuracy: Option<f64>,
}

impl AlgoSpec {
    /// Name written to the `algorithm` column, e.g. `sdg(eps=0.05)`.
    pub fn label(&self) -> String {
        match (self.algorithm, self.accuracy) {
            (Algorithm::Sdg, Some(e)) => format!("sdg(eps={e})"),
            (Algorithm::SweepSdg, Some(d)) => format!("sweep-sdg(delta=eps={d})"),
            (a, Some(d)) if a.is_sweep() => format!("{a}(delta={d})"),
            (a, _) => a.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub ks: Vec<usize>,
    /// Cost factor for A-optimal design, `c_e = α g({e})`.
    pub alpha: f64,
    /// Degree threshold for vertex cover costs.
    pub q: f64,
    /// Accuracy values for `sdg` and `sweep-sdg`; for `star` the first entry
    /// is the instance's `ε`.
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub seed: u64,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Ground-set size for synthetic data, the star and verify instances.
    pub n: usize,
    /// Feature dimension for synthetic design data.
    pub d: usize,
    /// Synthetic graph edge count.
    pub m: usize,
    /// `γ` grid for hardness certification.
    pub gammas: Vec<f64>,
    pub eps_prime: Ratio<u64>,
    /// `|T|` values for hardness certification; empty means `{3, k}`.
    pub t_sizes: Vec<u64>,
}

impl ExperimentConfig {
    /// Settings matching the published protocol for each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            ks: vec![],
            alpha: 0.8,
            q: 6.0,
            epsilons: vec![0.1, 0.05],
            delta: 0.1,
            algorithms: vec![],
            trials: 20,
            seed: 0,
            data: None,
            out: None,
            n: 506,
            d: 14,
            m: 25_000,
            gammas: vec![0.3, 0.6, 1.0],
            eps_prime: Ratio::new(1, 7),
            t_sizes: vec![],
        };
        use Algorithm::*;
        match experiment {
            Experiment::Aopt => Self {
                ks: (1..=15).collect(),
                algorithms: vec![Greedy, SweepDg, SweepSdg],
                ..base
            },
            Experiment::Cover => Self {
                ks: (1..=130).collect(),
                n: 1000,
                algorithms: vec![Greedy, Dg, Sdg],
                ..base
            },
            Experiment::Star => Self {
                ks: vec![20],
                n: 100,
                epsilons: vec![0.01],
                trials: 1,
                algorithms: vec![Greedy, Dg, LazyGreedy, LazyDg],
                ..base
            },
            Experiment::Hardness => Self {
                ks: vec![7],
                trials: 1,
                ..base
            },
            Experiment::Verify => Self {
                ks: vec![4],
                n: 12,
                d: 3,
                epsilons: vec![0.1],
                trials: 50,
                algorithms: vec![Dg, Sdg, Udg, SweepDg],
                ..base
            },
        }
    }

    /// Expands `algorithms` into concrete runs, one per accuracy value where
    /// the algorithm takes one.
    pub fn specs(&self) -> Vec<AlgoSpec> {
        let mut specs = Vec::new();
        for &algorithm in &self.algorithms {
            if algorithm.uses_epsilon() {
                specs.extend(self.epsilons.iter().map(|&e| AlgoSpec {
                    algorithm,
                    accuracy: Some(e),
                }));
            } else if algorithm.is_sweep() {
                specs.push(AlgoSpec {
                    algorithm,
                    accuracy: Some(self.delta),
                });
            } else {
                specs.push(AlgoSpec {
                    algorithm,
                    accuracy: None,
                });
            }
        }
        specs
    }

    /// Checks every field, reporting all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let exp = self.experiment;
        if self.ks.is_empty() {
            problems.push("at least one k is required".to_string());
        }
        if self.ks.contains(&0) {
            problems.push("k must be at least 1".to_string());
        }
        if self.trials == 0 {
            problems.push("trials must be at least 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            problems.push(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            problems.push(format!("q must be a finite non-negative number, got {}", self.q));
        }
        if self.epsilons.is_empty() {
            problems.push("at least one epsilon is required".to_string());
        }
        for &e in &self.epsilons {
            if !(e > 0.0 && e < 1.0) {
                problems.push(format!("epsilon must lie in (0, 1), got {e}"));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            problems.push(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !matches!(exp, Experiment::Hardness) && self.algorithms.is_empty() {
            problems.push("at least one algorithm is required".to_string());
        }
        if !matches!(exp, Experiment::Cover | Experiment::Star) {
            for a in self.algorithms.iter().filter(|a| a.is_lazy()) {
                problems.push(format!("{a} needs a submodular utility and only runs on cover or star"));
            }
        }
        if self.data.is_some() && !matches!(exp, Experiment::Aopt | Experiment::Cover) {
            problems.push(format!("--data is not accepted by the {exp} experiment"));
        }
        match exp {
            Experiment::Star if self.n < 2 => problems.push("star needs n ≥ 2".to_string()),
            Experiment::Verify if self.n > 12 => {
                problems.push(format!("verify enumerates all pairs of subsets and needs n ≤ 12, got {}", self.n))
            }
            Experiment::Aopt | Experiment::Cover | Experiment::Verify if self.n == 0 => {
                problems.push("n must be at least 1".to_string())
            }
            _ => {}
        }
        if self.data.is_none() {
            let k_max = self.ks.iter().copied().max().unwrap_or(0);
            if matches!(exp, Experiment::Aopt | Experiment::Cover | Experiment::Star | Experiment::Verify)
                && k_max > self.n
            {
                problems.push(format!("k = {k_max} exceeds the ground set size n = {}", self.n));
            }
            if exp == Experiment::Aopt && self.d == 0 {
                problems.push("d must be at least 1".to_string());
            }
            if exp == Experiment::Cover && self.m > self.n * self.n.saturating_sub(1) {
                problems.push(format!("{} edges do not fit {} vertices", self.m, self.n));
            }
        }
        if exp == Experiment::Hardness {
            for &g in &self.gammas {
                if !(g > 0.0 && g <= 1.0) {
                    problems.push(format!("gamma must lie in (0, 1], got {g}"));
                }
            }
            if self.gammas.is_empty() {
                problems.push("at least one gamma is required".to_string());
            }
            let k = self.ks.first().copied().unwrap_or(0) as u64;
            for &t in &self.t_sizes {
                if t > k {
                    problems.push(format!("|T| = {t} exceeds k = {k}"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Config(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("fast".parse::<Algorithm>().is_err());
    }

    #[test]
    fn defaults_validate() {
        for e in [
            Experiment::Aopt,
            Experiment::Cover,
            Experiment::Star,
            Experiment::Hardness,
            Experiment::Verify,
        ] {
            ExperimentConfig::defaults(e).validate().unwrap();
        }
    }

    #[test]
    fn all_problems_reported() {
        let mut c = ExperimentConfig::defaults(Experiment::Aopt);
        c.alpha = 1.5;
        c.trials = 0;
        c.algorithms.push(Algorithm::LazyDg);
        let Err(BenchError::Config(problems)) = c.validate() else {
            panic!("expected a config error");
        };
        assert_eq!(problems.len(), 3);
    }

    #[test]
    fn specs_expand_accuracy() {
        let c = ExperimentConfig::defaults(Experiment::Aopt);
        let labels: Vec<_> = c.specs().iter().map(AlgoSpec::label).collect();
        assert_eq!(
            labels,
            ["greedy", "sweep-dg(delta=0.1)", "sweep-sdg(delta=eps=0.1)", "sweep-sdg(delta=eps=0.05)"]
        );
    }
}
