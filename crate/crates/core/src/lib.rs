//! Ant colony optimization for the symmetric TSP with dynamically selected
//! elite ants.
//!
//! Each iteration a statistical classifier (mid-range, mean or median of the
//! iteration's tour lengths) splits the colony into performing and
//! non-performing ants. Performing ants receive a second pheromone
//! reinforcement; the punished variants also strip pheromone from the
//! non-performing tours. Ant System, Elitist AS, Rank-based AS and
//! MAX-MIN AS with pheromone trail smoothing are included as baselines.

pub mod classify;
pub mod colony;
pub mod engine;
pub mod error;
pub mod report;
pub mod tsplib;
pub mod update;

pub use classify::{Boundary, ClassifierKind, MedianRule, Threshold};
pub use colony::{Params, PheromoneField, TourRecord, Variant};
pub use engine::{IterationStats, Options, RunConfig, RunResult, Termination};
pub use error::{Error, Result};
pub use tsplib::{EdgeWeightKind, Instance, Length};
