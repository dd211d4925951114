//! The classical side: Ising and `Sym_n` spin models whose partition functions
//! are the Haar-averaged replica traces.

pub mod action;
pub mod estimate;
pub mod ground;
pub mod metropolis;
pub mod oracle;
pub mod params;
pub mod partition;

pub use action::{action, ising_action, modified_action, oracle_action, symn_action};
pub use estimate::{entropy_estimate, EntropyEstimate, EntropyMethod};
pub use ground::{ground_state, ground_state_with, GroundMethod, GroundState};
pub use metropolis::{metropolis, z_ratio, MetropolisOptions, MetropolisResult};
pub use oracle::{
    solution_count_oracle, solution_count_spin, ConstraintSystem, EdgeConstraint, OracleLimits,
    OracleMethod,
};
pub use params::{ActionParams, Variant, WeightMode};
pub use partition::{exact_partition, exact_partition_with, PartitionResult};
