//! Glue between the orbit fitness and the swarm: the search box over
//! flattened candidates and the end-to-end reconstruction call.

use std::f64::consts::PI;

use crate::fitness::{evaluate, fitness_or_infinity, Candidate, FitnessError, FitnessReport, ObservationSet};
use crate::swarm::{optimize, ConvergenceTrace, SearchBounds, SwarmConfig, SwarmError, TraceRow};

/// Geostationary radius, km.
pub const GEO_RADIUS_KM: f64 = 42164.0;

/// Per-object search limits. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitBox {
    pub a_min: f64,
    pub a_max: f64,
    pub e_max: f64,
    pub inc_max: f64,
    pub raan_min: f64,
    pub raan_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for OrbitBox {
    /// GEO ± 200 km, e ∈ [0, 0.1], I ∈ [0°, 1.5°], Ω and θ ∈ [−180°, 180°].
    fn default() -> Self {
        Self {
            a_min: GEO_RADIUS_KM - 200.0,
            a_max: GEO_RADIUS_KM + 200.0,
            e_max: 0.1,
            inc_max: 1.5f64.to_radians(),
            raan_min: -PI,
            raan_max: PI,
            theta_min: -PI,
            theta_max: PI,
        }
    }
}

/// Box over `objects × [a, e, inc, raan, theta]`.
pub fn orbit_bounds(objects: usize, limits: &OrbitBox) -> Result<SearchBounds, SwarmError> {
    let lower = [limits.a_min, 0.0, 0.0, limits.raan_min, limits.theta_min];
    let upper = [
        limits.a_max,
        limits.e_max,
        limits.inc_max,
        limits.raan_max,
        limits.theta_max,
    ];
    SearchBounds::new(
        lower.iter().copied().cycle().take(5 * objects).collect(),
        upper.iter().copied().cycle().take(5 * objects).collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub candidate: Candidate,
    pub report: FitnessReport,
    pub trace: ConvergenceTrace,
    pub evaluations: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ReconstructionError {
    #[error(transparent)]
    Swarm(#[from] SwarmError),
    #[error("best candidate could not be re-evaluated: {0}")]
    Fitness(#[from] FitnessError),
}

/// Searches for `obs.targets()` orbits explaining `obs`.
///
/// `warm_start` candidates seed the first particles of the swarm.
pub fn reconstruct(
    obs: &ObservationSet,
    limits: &OrbitBox,
    config: &SwarmConfig,
    warm_start: &[Candidate],
    progress: Option<&mut dyn FnMut(&TraceRow)>,
) -> Result<Reconstruction, ReconstructionError> {
    let n = obs.targets();
    let bounds = orbit_bounds(n, limits)?;
    let epoch = 0.0;
    let fitness_fn = |x: &[f64]| match Candidate::from_flat(x, epoch) {
        Ok(c) => fitness_or_infinity(&c, obs),
        Err(_) => f64::INFINITY,
    };
    let seeds: Vec<Vec<f64>> = warm_start.iter().map(Candidate::to_flat).collect();
    let outcome = optimize(&fitness_fn, &bounds, config, &seeds, progress)?;
    let mut candidate = Candidate::from_flat(&outcome.best_position, epoch)?;
    for el in &mut candidate.elements {
        *el = el.normalized();
    }
    let report = evaluate(&candidate, obs)?;
    Ok(Reconstruction {
        candidate,
        report,
        trace: outcome.trace,
        evaluations: outcome.evaluations,
    })
}
