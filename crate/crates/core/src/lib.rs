//! Nontransitive route ranking.
//!
//! Routes toward one destination are compared pairwise. The pairwise
//! memberships are turned into a comparison matrix of relativity values,
//! each route is scored by the minimum of its comparison row, and routes are
//! listed from best to worst score.
//!
//! * [`rank`] holds the ranking math.
//! * [`membership`] builds pairwise matrices from raw route metrics.
//! * [`sim`] is a small scenario engine that pits the ranking against
//!   classical route selection policies.
//! * [`formats`] reads and writes the text file formats.

pub mod error;
pub mod formats;
pub mod membership;
pub mod rank;
pub mod sim;

pub use error::{Error, Result};
pub use membership::{
    desirability, fuzzify, normalize, pairwise_from_scores, pairwise_majority, BenefitVector,
    MembershipProvider, MetricBounds, RouteMetrics,
};
pub use rank::{
    comparison_matrix, rank, relativity, row_minima, ComparisonMatrix, PairwiseMatrix, RankedRoute,
    RouteId, RouteRanking,
};
pub use sim::{
    enumerate_routes, path_metrics, select_route, PolicyRun, Route, Scenario, SelectionPolicy,
    SimReport, Topology,
};
