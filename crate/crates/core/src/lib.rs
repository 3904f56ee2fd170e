//! Surrogate modeling with factorization machines and slack variables.
//!
//! The crate is organised bottom-up:
//!
//! * [`binopt`] holds QUBO, Ising and HUBO models, conversions between them,
//!   constraint penalties and the pairwise order-reduction gadget.
//! * [`fm`] trains second-order and third-order factorization machines and
//!   extracts them into QUBO/HUBO Hamiltonians.
//! * [`anneal`] minimizes QUBOs by restart-based simulated annealing, with
//!   one-hot groups enforced by the move set, and offers an exhaustive oracle.
//! * [`surrogate`] runs the black-box optimization loops (plain FM, HOFM and
//!   slack-augmented FM), the slack-augmented regression and the grid harness.
//! * [`data`] loads drug-combination response tables, one-hot encodes them,
//!   splits them per scenario and builds table-backed or synthetic black boxes.
//! * [`metrics`] computes Pearson/Spearman correlation, MSE and summaries.

pub mod anneal;
pub mod binopt;
pub mod data;
mod dataset;
mod error;
pub mod fm;
pub mod metrics;
pub mod seed;
pub mod surrogate;

pub use anneal::{brute_force, solve, AnnealConfig, SolveResult};
pub use binopt::{BinaryVector, HuboModel, IsingModel, QuboModel, ReductionResult, SpinVector};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use fm::{FmModel, HofmModel, TrainConfig};
pub use metrics::{mse_loss, pearson, spearman, summarize, MetricSummary};
pub use surrogate::{BlackBox, GridResult, IterationTrace, SurrogateConfig};
