// Indexed loops are clearer than iterator chains for the matrix kernels here.
#![allow(clippy::needless_range_loop)]

//! Crossover-process toolkit: noise-free mixing of training examples that
//! keeps supervised learnability under explicit control while steering what
//! independence and causal analyses can read off the data.
//!
//! A crossover splits the feature set into an *anchor* part, which stays
//! untouched, and a *shuffle* part, which gets left-multiplied by a
//! column-stochastic shuffle matrix (usually a block-class permutation that
//! only mixes examples within each class). Block-class shuffles preserve the
//! mean operator — the sufficient statistic linear classifiers train on — so
//! the sample keeps its utility, yet joint distributions across the split
//! move freely: odds ratios shift by exact combinatorial amounts, kernel
//! dependence scores (HSIC) can be driven down below significance, partial
//! correlations can be jammed toward a computable floor, and covariate
//! adjustments on a causal graph stop identifying what they used to.
//!
//! The main entry points:
//!
//! - [`data`]: CSV ingestion, class-sorted samples, standardization, mean
//!   operator.
//! - [`cp`]: feature splits, permutations, dense and class-uniform shuffles,
//!   cycle statistics, invariance checks.
//! - [`kernel`] / [`mod@hsic`]: Gaussian kernels, the independence criterion,
//!   O(m) transposition deltas, exact shift identities, permutation p-values.
//! - [`fairness`]: contingency tables, exact odds arithmetic and the
//!   constructive odds-shifting crossover.
//! - [`learn`]: linear models under proper symmetric losses, gradient
//!   descent, cross validation.
//! - [`complexity`]: the Rademacher crossover complexity, exact at desk
//!   scale, plus every computable bound on it.
//! - [`causal`]: partial-correlation jamming and back-door adjustment
//!   interference on small DAGs.
//! - [`search`]: the greedy crossover-learning loop with pluggable
//!   objectives and trace logging.
//! - [`synth`]: data generators for the runnable examples and test suites.
//!
//! The `examples/` directory holds one runnable program per capability;
//! `cpforge` (the single binary) wires the same operations into reproducible
//! command-line runs.

pub mod causal;
pub mod cli;
pub mod complexity;
pub mod cp;
pub mod data;
pub mod error;
pub mod fairness;
pub mod hsic;
pub mod kernel;
pub mod learn;
pub mod parallel;
pub mod search;
pub mod synth;

pub use cp::{apply_cp, FeatureSplit, Permutation, ShuffleSpec};
pub use data::{ingest_csv, mean_operator, standardize, Dataset};
pub use error::{Error, Result};
pub use hsic::hsic;
pub use kernel::{gaussian_kernel, Bandwidth, KernelMatrix};
pub use learn::{train, LinearModel, Loss};
pub use search::{crossover_learn, Objective, SearchConfig};
