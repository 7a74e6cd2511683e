//! Distorted greedy maximization of `g(S) − c(S)` where `g` is monotone,
//! non-negative and γ-weakly submodular and `c` is a non-negative modular cost.
//!
//! The crate provides the maximizers (deterministic, stochastic, unconstrained
//! and a γ-sweep wrapper), two utilities with incremental oracles (Bayesian
//! A-optimal design and directed-graph vertex cover), the hardness-instance
//! certifier, and brute-force verification for small instances.

pub mod aoptimal;
pub mod cover;
pub mod error;
pub mod ground;
pub mod hardness;
pub mod maximizers;
pub mod seed;
pub mod verification;

pub use error::{Error, Result};
pub use ground::{
    count_evaluations, objective_value, CountingOracle, GammaKnowledge, GroundSet, IncrementalOracle, IndexSet,
    ModularCost, ProblemInstance, ValueCursor, ValueOracle,
};
pub use maximizers::{
    distorted_greedy, gamma_sweep, plain_greedy, stochastic_distorted_greedy, unconstrained_distorted_greedy,
    DistortionSchedule, IterationTrace, RunResult, SweepResult, SweepSubroutine,
};
pub use seed::{derive_seed, label_tag};
