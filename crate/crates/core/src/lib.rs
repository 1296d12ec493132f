//! Reconstruction of several object trajectories from anonymous, time-stamped
//! angle measurements.
//!
//! A candidate set of initial orbits is scored by propagating every object to
//! each observation date, solving one rectangular assignment problem per date
//! between pseudo-measurements and real measurements, and summing the optimal
//! costs. A repulsive particle swarm searches the orbit box for the candidate
//! with the lowest score.

pub mod assignment;
pub mod config;
pub mod formats;
pub mod fitness;
pub mod observation;
pub mod orbit;
pub mod problem;
pub mod scenario;
pub mod swarm;
mod vec3;

pub use assignment::{brute_force_solve, solve, Assignment, AssignmentError, CostMatrix};
pub use fitness::{
    build_cost_matrix, evaluate, pseudo_measurements, Candidate, CampaignError, FitnessError,
    FitnessReport, ObservationSet,
};
pub use observation::{
    assignment_cost, observe, weighted_norm, GroundStation, Measurement, ObservationError,
    UncertaintyProfile,
};
pub use orbit::{
    elements_to_state, propagate, solve_kepler, state_to_elements, GravityModel, OrbitError,
    OrbitalElements, StateVector,
};
pub use config::{ConfigError, RunConfig};
pub use formats::{parse_campaign, write_campaign, CampaignFile, FormatError};
pub use problem::{orbit_bounds, reconstruct, OrbitBox, Reconstruction};
pub use scenario::{
    default_truth, generate, schedule, score_assignments, AssignmentScore, LabeledObservationSet,
    RowLabel, ScenarioConfig, ScenarioError,
};
pub use swarm::{optimize, ConvergenceTrace, SearchBounds, SwarmConfig, SwarmOutcome, Topology, TraceRow};
pub use vec3::Vec3;
