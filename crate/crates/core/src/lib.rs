//! Evolves 2-D benchmark functions with genetic programming so that two
//! configured optimizers behave as differently as possible on them.
//!
//! * [`expr`]: expression-tree genotype, evaluation, variation, text form.
//! * [`optim`]: DE, SHADE and CMA-ES with recorded solution traces.
//! * [`behavior`]: averaged per-coordinate Wasserstein distance between traces.
//! * [`fla`]: fitness distance correlation, neutrality and archive binning.
//! * [`engine`]: the MAP-Elites loop and archive.
//! * [`bench`]: dimensional lifting and the Δx / Δf validation metrics.

pub mod behavior;
pub mod bench;
pub mod engine;
pub mod expr;
pub mod fla;
pub mod optim;
pub mod seed;

pub use behavior::{evaluate_pair, BehaviorScore, DistanceMode, PairSettings};
pub use engine::{best_separating, evolve, Archive, Elite, EngineConfig};
pub use expr::{Domain, ExprTree};
pub use optim::{Objective, OptimizerConfig, SolutionTrace};
