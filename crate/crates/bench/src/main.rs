use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distort_bench::run::write_csv;
use distort_bench::{run_experiment, run_hardness, run_verify, sweep_trace, Algorithm, BenchError, Experiment, ExperimentConfig};
use distort_core::hardness::write_certification_csv;
use distort_core::verification::write_audit_csv;
use num_rational::Ratio;

#[derive(Parser)]
#[command(name = "distort-bench", version, about = "Run seeded experiments for distorted greedy and write CSV rows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bayesian A-optimal design with costs c_e = alpha * g({e}).
    Aopt(Common),
    /// Directed vertex cover with costs 1 + max(outdeg - q, 0).
    Cover(Common),
    /// Star instance separating greedy from distorted greedy.
    Star(Common),
    /// Certify the hardness construction on the (a, b) lattice.
    Hardness {
        #[command(flatten)]
        common: Common,
        /// Submodularity ratios to certify.
        #[arg(long, value_delimiter = ',')]
        gamma: Option<Vec<f64>>,
        /// epsilon' as an exact fraction, e.g. 1/7.
        #[arg(long)]
        eps_prime: Option<String>,
        /// Hidden set sizes |T|; default {3, k}.
        #[arg(long, value_delimiter = ',')]
        t_sizes: Option<Vec<u64>>,
    },
    /// Audit algorithms against brute force on small random instances.
    Verify(Common),
    /// Per-guess values of a gamma sweep.
    SweepTrace {
        #[command(flatten)]
        common: Common,
        /// Workload to sweep on.
        #[arg(long, value_enum, default_value_t = Source::Aopt)]
        on: Source,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Aopt,
    Cover,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Cardinality values (comma separated); overrides --k-min/--k-max.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Cost factor for A-optimal design, in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Out-degree threshold for cover costs.
    #[arg(long)]
    q: Option<f64>,
    /// Accuracy values for sdg and sweep-sdg (comma separated); for star, the instance epsilon.
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    /// Sweep step for sweep-dg and sweep-udg.
    #[arg(long)]
    delta: Option<f64>,
    /// Algorithms: greedy, dg, sdg, udg, sweep-dg, sweep-sdg, sweep-udg, lazy-greedy, lazy-dg.
    #[arg(long, value_delimiter = ',')]
    algos: Option<Vec<Algorithm>>,
    /// Trials per stochastic algorithm (instances for verify).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Feature CSV (aopt) or edge list (cover); synthetic data when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ground set size for synthetic data, star and verify instances.
    #[arg(long)]
    n: Option<usize>,
    /// Feature dimension for synthetic design data.
    #[arg(long)]
    d: Option<usize>,
    /// Edge count for the synthetic graph.
    #[arg(long)]
    m: Option<usize>,
}

impl Common {
    fn apply(self, experiment: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(experiment);
        if let Some(ks) = self.k {
            c.ks = ks;
        } else if self.k_min.is_some() || self.k_max.is_some() {
            let lo = self.k_min.unwrap_or(1);
            let hi = self.k_max.unwrap_or_else(|| c.ks.iter().copied().max().unwrap_or(lo));
            c.ks = (lo..=hi).collect();
        }
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field { c.$target = v; })*
            };
        }
        set!(alpha => alpha, q => q, epsilon => epsilons, delta => delta, algos => algorithms,
             trials => trials, seed => seed, n => n, d => d, m => m);
        c.data = self.data;
        c.out = self.out;
        c
    }
}

fn output(config: &ExperimentConfig) -> Result<Box<dyn Write>, BenchError> {
    Ok(match &config.out {
        Some(path) => Box::new(File::create(path).map_err(|source| BenchError::Io {
            path: path.clone(),
            source,
        })?),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(command: Command) -> Result<(), BenchError> {
    match command {
        Command::Aopt(common) => rows(common.apply(Experiment::Aopt)),
        Command::Cover(common) => rows(common.apply(Experiment::Cover)),
        Command::Star(common) => rows(common.apply(Experiment::Star)),
        Command::Hardness {
            common,
            gamma,
            eps_prime,
            t_sizes,
        } => {
            let mut config = common.apply(Experiment::Hardness);
            if let Some(g) = gamma {
                config.gammas = g;
            }
            if let Some(text) = eps_prime {
                config.eps_prime = text
                    .parse::<Ratio<u64>>()
                    .map_err(|e| BenchError::Config(vec![format!("--eps-prime {text:?}: {e}")]))?;
            }
            if let Some(t) = t_sizes {
                config.t_sizes = t;
            }
            let reports = run_hardness(&config)?;
            for r in &reports {
                eprintln!(
                    "{} |T|={}: {} (max f_empty {:.6}, 8eps' bound {})",
                    r.params,
                    r.t_size,
                    if r.passed() { "certified" } else { "FAILED" },
                    r.empty_max,
                    if r.tight_p3 { "held" } else { "failed" }
                );
            }
            write_certification_csv(&reports, output(&config)?)?;
            Ok(())
        }
        Command::Verify(common) => {
            let config = common.apply(Experiment::Verify);
            let audits = run_verify(&config)?;
            let passed = audits.iter().filter(|a| a.pass).count();
            eprintln!("{passed}/{} audits passed", audits.len());
            write_audit_csv(&audits, output(&config)?)?;
            Ok(())
        }
        Command::SweepTrace { common, on } => {
            let defaults_k = common.k.is_none() && common.k_min.is_none() && common.k_max.is_none();
            let defaults_algos = common.algos.is_none();
            let mut config = common.apply(match on {
                Source::Aopt => Experiment::Aopt,
                Source::Cover => Experiment::Cover,
            });
            if defaults_k {
                config.ks = vec![5, 10, 20];
            }
            if defaults_algos {
                config.algorithms = vec![Algorithm::SweepDg, Algorithm::SweepSdg];
            }
            let trace = sweep_trace(&config)?;
            write_csv(&trace, output(&config)?)
        }
    }
}

fn rows(config: ExperimentConfig) -> Result<(), BenchError> {
    let (rows, warnings) = run_experiment(&config)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    write_csv(&rows, output(&config)?)
}

/// Output closed early by the reader, e.g. `| head`.
fn is_broken_pipe(e: &BenchError) -> bool {
    match e {
        BenchError::Csv(c) => matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe),
        _ => false,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
