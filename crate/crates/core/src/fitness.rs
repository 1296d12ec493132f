//! Fitness of a candidate set of initial conditions.
//!
//! For every observation date the candidate objects are propagated, turned
//! into pseudo-measurements, and matched against that date's anonymous
//! measurements by an exact assignment. The fitness is the sum of the optimal
//! assignment costs, which also equals the sum of each object's accumulated
//! residual.

use thiserror::Error;

use crate::assignment::{self, Assignment, AssignmentError, CostMatrix};
use crate::observation::{
    assignment_cost, observe, GroundStation, Measurement, ObservationError, UncertaintyProfile,
};
use crate::orbit::{propagate, GravityModel, OrbitError, OrbitalElements};

/// Number of scalars describing one object in a flattened candidate.
pub const ELEMENTS_PER_OBJECT: usize = 5;

const DUAL_ACCOUNTING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitnessError {
    #[error("object {object} at date {date}: {source}")]
    Propagation {
        object: usize,
        date: usize,
        source: OrbitError,
    },
    #[error("object {object} at date {date}: {source}")]
    Observation {
        object: usize,
        date: usize,
        source: ObservationError,
    },
    #[error("date {date}: {source}")]
    CostMatrix { date: usize, source: AssignmentError },
    #[error("date index {date} out of range for {dates} dates")]
    DateIndex { date: usize, dates: usize },
    #[error("candidate is empty")]
    EmptyCandidate,
    #[error("flattened candidate length {0} is not a multiple of {ELEMENTS_PER_OBJECT}")]
    FlatLength(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CampaignError {
    #[error("no observation dates")]
    Empty,
    #[error("{field} has {got} entries for {dates} dates")]
    Length {
        field: &'static str,
        got: usize,
        dates: usize,
    },
    #[error("dates must be finite and strictly increasing (date {0})")]
    DateOrder(usize),
    #[error("measurement {row} of date {date} has epoch {got}, expected {expected}")]
    Epoch {
        date: usize,
        row: usize,
        got: f64,
        expected: f64,
    },
    #[error("date {date} has {rows} measurements, fewer than the {targets} targeted objects")]
    TooFewMeasurements { date: usize, rows: usize, targets: usize },
    #[error("target count must be at least 1")]
    NoTargets,
    #[error("date {date}: {source}")]
    Sigma { date: usize, source: ObservationError },
    #[error(transparent)]
    Station(#[from] ObservationError),
}

/// A decision vector: initial elements for each of the `n` objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub elements: Vec<OrbitalElements>,
}

impl Candidate {
    pub fn new(elements: Vec<OrbitalElements>) -> Self {
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Decodes `[a, e, inc, raan, theta]` per object, all at `epoch`.
    pub fn from_flat(values: &[f64], epoch: f64) -> Result<Self, FitnessError> {
        if !values.len().is_multiple_of(ELEMENTS_PER_OBJECT) {
            return Err(FitnessError::FlatLength(values.len()));
        }
        let elements = values
            .chunks_exact(ELEMENTS_PER_OBJECT)
            .map(|c| OrbitalElements {
                a: c[0],
                e: c[1],
                inc: c[2],
                raan: c[3],
                theta: c[4],
                epoch,
            })
            .collect();
        Ok(Self { elements })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.elements
            .iter()
            .flat_map(|el| [el.a, el.e, el.inc, el.raan, el.theta])
            .collect()
    }
}

/// A complete observation campaign. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    dates: Vec<f64>,
    batches: Vec<Vec<Measurement>>,
    sigmas: Vec<UncertaintyProfile>,
    night_membership: Vec<usize>,
    station: GroundStation,
    gravity: GravityModel,
    targets: usize,
}

impl ObservationSet {
    pub fn new(
        dates: Vec<f64>,
        batches: Vec<Vec<Measurement>>,
        sigmas: Vec<UncertaintyProfile>,
        night_membership: Vec<usize>,
        station: GroundStation,
        targets: usize,
    ) -> Result<Self, CampaignError> {
        if dates.is_empty() {
            return Err(CampaignError::Empty);
        }
        let m = dates.len();
        for (field, got) in [
            ("batches", batches.len()),
            ("sigmas", sigmas.len()),
            ("night_membership", night_membership.len()),
        ] {
            if got != m {
                return Err(CampaignError::Length { field, got, dates: m });
            }
        }
        station.validate()?;
        if targets == 0 {
            return Err(CampaignError::NoTargets);
        }
        for (j, &t) in dates.iter().enumerate() {
            if !t.is_finite() || (j > 0 && t <= dates[j - 1]) {
                return Err(CampaignError::DateOrder(j));
            }
            sigmas[j]
                .validate()
                .map_err(|source| CampaignError::Sigma { date: j, source })?;
            if batches[j].len() < targets {
                return Err(CampaignError::TooFewMeasurements {
                    date: j,
                    rows: batches[j].len(),
                    targets,
                });
            }
            if let Some(row) = batches[j].iter().position(|z| z.epoch != t) {
                return Err(CampaignError::Epoch {
                    date: j,
                    row,
                    got: batches[j][row].epoch,
                    expected: t,
                });
            }
        }
        Ok(Self {
            dates,
            batches,
            sigmas,
            night_membership,
            station,
            gravity: GravityModel::default(),
            targets,
        })
    }

    pub fn with_gravity(mut self, gravity: GravityModel) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn date_count(&self) -> usize {
        self.dates.len()
    }

    pub fn batches(&self) -> &[Vec<Measurement>] {
        &self.batches
    }

    pub fn batch(&self, date: usize) -> &[Measurement] {
        &self.batches[date]
    }

    pub fn sigmas(&self) -> &[UncertaintyProfile] {
        &self.sigmas
    }

    pub fn night_membership(&self) -> &[usize] {
        &self.night_membership
    }

    pub fn station(&self) -> &GroundStation {
        &self.station
    }

    pub fn gravity(&self) -> &GravityModel {
        &self.gravity
    }

    /// Number of objects a reconstruction should look for.
    pub fn targets(&self) -> usize {
        self.targets
    }

    /// Smallest batch size: the most objects any reconstruction may target.
    pub fn max_targets(&self) -> usize {
        self.batches.iter().map(Vec::len).min().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessReport {
    pub fitness: f64,
    /// Optimal assignment cost per date.
    pub per_date_costs: Vec<f64>,
    /// `residuals[j][i]`: accumulated residual of object `i` after date `j`.
    pub residuals: Vec<Vec<f64>>,
    pub assignments: Vec<Assignment>,
}

impl FitnessReport {
    pub fn final_residuals(&self) -> &[f64] {
        self.residuals.last().map_or(&[], Vec::as_slice)
    }

    /// Relative disagreement between the per-date and per-object totals.
    pub fn dual_accounting_gap(&self) -> f64 {
        let by_date: f64 = self.per_date_costs.iter().sum();
        let by_object: f64 = self.final_residuals().iter().sum();
        let scale = by_date.abs().max(by_object.abs());
        if scale == 0.0 {
            0.0
        } else {
            (by_date - by_object).abs() / scale
        }
    }
}

/// Pseudo-measurements of every candidate object at date index `date`.
pub fn pseudo_measurements(
    candidate: &Candidate,
    obs: &ObservationSet,
    date: usize,
) -> Result<Vec<Measurement>, FitnessError> {
    let t = *obs.dates.get(date).ok_or(FitnessError::DateIndex {
        date,
        dates: obs.dates.len(),
    })?;
    candidate
        .elements
        .iter()
        .enumerate()
        .map(|(object, el)| {
            let state = propagate(el, t, &obs.gravity)
                .map_err(|source| FitnessError::Propagation { object, date, source })?;
            observe(&state, &obs.station)
                .map_err(|source| FitnessError::Observation { object, date, source })
        })
        .collect()
}

/// `m × n` matrix whose entry `(k, i)` is the cost of giving measurement `k` to object `i`.
pub fn build_cost_matrix(
    pseudo: &[Measurement],
    measured: &[Measurement],
    sigma: &UncertaintyProfile,
    date: usize,
) -> Result<CostMatrix, FitnessError> {
    let n = pseudo.len();
    let m = measured.len();
    if n == 0 || m < n {
        return Err(FitnessError::CostMatrix {
            date,
            source: AssignmentError::Shape { rows: m, cols: n },
        });
    }
    let mut entries = Vec::with_capacity(m * n);
    for z in measured {
        for (object, y) in pseudo.iter().enumerate() {
            let c = assignment_cost(z, y, sigma)
                .map_err(|source| FitnessError::Observation { object, date, source })?;
            entries.push(c);
        }
    }
    CostMatrix::new(m, n, entries).map_err(|source| FitnessError::CostMatrix { date, source })
}

/// Full fitness evaluation of `candidate` against `obs`.
pub fn evaluate(candidate: &Candidate, obs: &ObservationSet) -> Result<FitnessReport, FitnessError> {
    if candidate.is_empty() {
        return Err(FitnessError::EmptyCandidate);
    }
    let n = candidate.len();
    let dates = obs.dates.len();
    let mut fitness = 0.0;
    let mut per_date_costs = Vec::with_capacity(dates);
    let mut residuals = Vec::with_capacity(dates);
    let mut assignments = Vec::with_capacity(dates);
    let mut running = vec![0.0; n];

    for date in 0..dates {
        let pseudo = pseudo_measurements(candidate, obs, date)?;
        let costs = build_cost_matrix(&pseudo, &obs.batches[date], &obs.sigmas[date], date)?;
        let best = assignment::solve(&costs);
        for (object, &row) in best.row_of.iter().enumerate() {
            running[object] += costs.get(row, object);
        }
        fitness += best.total_cost;
        per_date_costs.push(best.total_cost);
        residuals.push(running.clone());
        assignments.push(best);
    }

    let report = FitnessReport {
        fitness,
        per_date_costs,
        residuals,
        assignments,
    };
    debug_assert!(
        report.dual_accounting_gap() < DUAL_ACCOUNTING_TOLERANCE,
        "per-date and per-object fitness totals disagree"
    );
    Ok(report)
}

/// Fitness only; failures become `+∞` so an optimizer can rank them last.
pub fn fitness_or_infinity(candidate: &Candidate, obs: &ObservationSet) -> f64 {
    match evaluate(candidate, obs) {
        Ok(report) if !report.fitness.is_nan() => report.fitness,
        _ => f64::INFINITY,
    }
}
