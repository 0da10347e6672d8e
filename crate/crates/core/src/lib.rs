//! Coalition formation among symmetric players who share a resource in
//! proportion to their bids, facing one adamant player who never joins a
//! coalition.
//!
//! * [`model`]: configurations, coalitions, partitions, profiles, labels.
//! * [`partition`]: which partitions a profile forms, deviations, weakness.
//! * [`rsg`]: equilibrium payoffs of the bidding game for a fixed partition,
//!   plus a numeric solver used as a cross-check.
//! * [`equilibrium`]: Nash equilibria, social optimum, price of anarchy.
//! * [`tables`]: reference regime tables and their verification.

pub mod equilibrium;
pub mod error;
pub mod model;
pub mod partition;
pub mod rsg;
pub mod tables;

/// Absolute tolerance for comparing payoffs.
pub const UTILITY_TOL: f64 = 1e-12;

pub use equilibrium::{
    analyze, best_response_set, enumerate_nash, is_nash, no_multi_partition_equilibria,
    no_weak_equilibrium_partitions, price_of_anarchy, social_optimum, EquilibriumReport,
    NashEnumeration,
};
pub use error::{Error, Result};
pub use model::{
    canonicalize_profile, classify, CPartition, Coalition, GameConfig, PartitionClass,
    PartitionLabel, StrategyProfile,
};
pub use partition::{
    formed_partitions, is_better, is_weak_criterion, is_weak_exact, udp, FormedPartitions,
    MutualGraph,
};
pub use rsg::{
    coalition_sum, coalition_utilities, numeric_rsg_ne, player_share, profile_utility,
    OracleSolution, PartitionOutcome, ShareVector,
};
