//! Synthetic GEO observation campaign with ground truth.
//!
//! Ten near-geostationary objects are watched from a telescope at 0° E, 45° N.
//! Photographs are taken every 30 minutes, ten per night, over three nights.
//! Each photograph lists every object plus a few spurious detections, in a
//! shuffled order, so the measurements carry no identity.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::assignment::{solve, CostMatrix};
use crate::fitness::{CampaignError, Candidate, FitnessReport, ObservationSet};
use crate::observation::{observe, GroundStation, Measurement, ObservationError, UncertaintyProfile};
use crate::orbit::{normalize_angle, propagate, GravityModel, OrbitError, OrbitalElements};
use crate::problem::GEO_RADIUS_KM;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// First photograph of night 0, seconds after t₀. Later nights start whole
/// days after it. Chosen with [`best_night_anchor`] on the default scenario:
/// the lowest truth elevation over all 30 photographs is about 24°.
pub const DEFAULT_NIGHT_ANCHOR: f64 = 27_600.0;

/// Spurious rows per photograph, cycled over the dates.
pub const DEFAULT_FICTITIOUS_PATTERN: [usize; 5] = [1, 0, 2, 0, 1];

/// Margin around the true measurements inside which spurious rows are drawn.
const FICTITIOUS_MARGIN: f64 = 0.5 * PI / 180.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario setting `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("night {night} overlaps the next night")]
    OverlappingNights { night: usize },
    #[error("truth object {object} is below the horizon at date {date} (elevation {elevation_deg:.3} deg)")]
    BelowHorizon {
        object: usize,
        date: usize,
        elevation_deg: f64,
    },
    #[error("truth object {object}: {source}")]
    Orbit { object: usize, source: OrbitError },
    #[error("truth object {object}: {source}")]
    Observation { object: usize, source: ObservationError },
    #[error(transparent)]
    Campaign(#[from] CampaignError),
    #[error("report covers {report} dates but labels cover {labels}")]
    DateCount { report: usize, labels: usize },
    #[error("date {date}: row {row} has no label")]
    MissingLabel { date: usize, row: usize },
}

fn config_error(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Config {
        field,
        reason: reason.into(),
    }
}

/// The ten initial conditions used to synthesise the default campaign.
pub fn default_truth() -> Vec<OrbitalElements> {
    // (Δa km, e, I deg, Ω deg, θ deg)
    const ROWS: [(f64, f64, f64, f64, f64); 10] = [
        (-100.0, 0.02, 0.5, 0.0, -40.0),
        (100.0, 0.04, 1.0, 10.0, -52.0),
        (-50.0, 0.06, 0.6, 20.0, -64.0),
        (50.0, 0.08, 1.1, 0.0, -46.0),
        (-20.0, 0.03, 0.7, 10.0, -58.0),
        (20.0, 0.05, 1.2, 20.0, -70.0),
        (-80.0, 0.02, 0.8, 0.0, -42.0),
        (80.0, 0.04, 1.3, 10.0, -54.0),
        (-40.0, 0.06, 0.9, 20.0, -66.0),
        (40.0, 0.08, 1.4, 0.0, -48.0),
    ];
    ROWS.iter()
        .map(|&(da, e, inc, raan, theta)| OrbitalElements {
            a: GEO_RADIUS_KM + da,
            e,
            inc: inc.to_radians(),
            raan: raan.to_radians(),
            theta: theta.to_radians(),
            epoch: 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub truth: Vec<OrbitalElements>,
    pub nights: usize,
    pub photos_per_night: usize,
    /// Seconds between photographs of one night.
    pub photo_interval: f64,
    /// Start of each night; `None` means `DEFAULT_NIGHT_ANCHOR + g·86400`.
    pub night_start_offsets: Option<Vec<f64>>,
    pub station: GroundStation,
    pub sigma: UncertaintyProfile,
    /// Spurious rows per date, cycled when shorter than the schedule.
    pub fictitious_counts: Vec<usize>,
    /// Standard deviation of additive Gaussian noise on both angles, rad.
    pub measurement_noise: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            truth: default_truth(),
            nights: 3,
            photos_per_night: 10,
            photo_interval: 1800.0,
            night_start_offsets: None,
            station: GroundStation::new(0.0, 45f64.to_radians()).expect("valid latitude"),
            sigma: UncertaintyProfile::uniform(0.01f64.to_radians()).expect("positive sigma"),
            fictitious_counts: DEFAULT_FICTITIOUS_PATTERN.to_vec(),
            measurement_noise: 0.0,
            seed: 0x0b5e_2fa7,
        }
    }
}

impl ScenarioConfig {
    pub fn night_starts(&self) -> Vec<f64> {
        match &self.night_start_offsets {
            Some(starts) => starts.clone(),
            None => (0..self.nights)
                .map(|g| DEFAULT_NIGHT_ANCHOR + g as f64 * SECONDS_PER_DAY)
                .collect(),
        }
    }

    pub fn fictitious_at(&self, date: usize) -> usize {
        if self.fictitious_counts.is_empty() {
            0
        } else {
            self.fictitious_counts[date % self.fictitious_counts.len()]
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.truth.is_empty() {
            return Err(config_error("truth", "at least one object is required"));
        }
        for (object, el) in self.truth.iter().enumerate() {
            el.validate()
                .map_err(|source| ScenarioError::Orbit { object, source })?;
        }
        if self.nights == 0 {
            return Err(config_error("nights", "must be at least 1"));
        }
        if self.photos_per_night == 0 {
            return Err(config_error("photos_per_night", "must be at least 1"));
        }
        if !(self.photo_interval.is_finite() && self.photo_interval > 0.0) {
            return Err(config_error("photo_interval", "must be positive"));
        }
        if let Some(starts) = &self.night_start_offsets {
            if starts.len() != self.nights {
                return Err(config_error(
                    "night_start_offsets",
                    format!("has {} entries for {} nights", starts.len(), self.nights),
                ));
            }
            if starts.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(config_error("night_start_offsets", "must be finite and >= 0"));
            }
        }
        self.station
            .validate()
            .map_err(|e| config_error("station_latitude", e.to_string()))?;
        self.sigma
            .validate()
            .map_err(|e| config_error("sigma", e.to_string()))?;
        if !(self.measurement_noise.is_finite() && self.measurement_noise >= 0.0) {
            return Err(config_error("measurement_noise", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Where a campaign row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    /// Index into the truth list.
    Object(usize),
    Fictitious,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledObservationSet {
    pub observations: ObservationSet,
    /// `labels[j][k]` is the source of row `k` at date `j`.
    pub labels: Vec<Vec<RowLabel>>,
    pub truth: Candidate,
}

/// Photograph dates, night by night.
pub fn schedule(config: &ScenarioConfig) -> Result<Vec<f64>, ScenarioError> {
    config.validate()?;
    let starts = config.night_starts();
    let span = (config.photos_per_night - 1) as f64 * config.photo_interval;
    for night in 1..starts.len() {
        if starts[night - 1] + span >= starts[night] {
            return Err(ScenarioError::OverlappingNights { night: night - 1 });
        }
    }
    Ok(starts
        .iter()
        .flat_map(|&start| (0..config.photos_per_night).map(move |p| start + p as f64 * config.photo_interval))
        .collect())
}

fn truth_measurements(
    config: &ScenarioConfig,
    gravity: &GravityModel,
    date: usize,
    t: f64,
) -> Result<Vec<Measurement>, ScenarioError> {
    config
        .truth
        .iter()
        .enumerate()
        .map(|(object, el)| {
            let state = propagate(el, t, gravity).map_err(|source| ScenarioError::Orbit { object, source })?;
            let m = observe(&state, &config.station)
                .map_err(|source| ScenarioError::Observation { object, source })?;
            if m.elevation < 0.0 {
                return Err(ScenarioError::BelowHorizon {
                    object,
                    date,
                    elevation_deg: m.elevation.to_degrees(),
                });
            }
            Ok(m)
        })
        .collect()
}

/// Lowest truth elevation over the whole schedule, rad.
pub fn minimum_truth_elevation(config: &ScenarioConfig) -> Result<f64, ScenarioError> {
    let gravity = GravityModel::default();
    let mut lowest = f64::INFINITY;
    for (date, t) in schedule(config)?.into_iter().enumerate() {
        for m in truth_measurements(config, &gravity, date, t)? {
            lowest = lowest.min(m.elevation);
        }
    }
    Ok(lowest)
}

/// Scans night anchors in `[0, 86400)` with the given step and returns the one
/// whose schedule keeps the lowest truth elevation highest.
pub fn best_night_anchor(config: &ScenarioConfig, step: f64) -> Result<(f64, f64), ScenarioError> {
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut anchor = 0.0;
    while anchor < SECONDS_PER_DAY {
        let trial = ScenarioConfig {
            night_start_offsets: Some((0..config.nights).map(|g| anchor + g as f64 * SECONDS_PER_DAY).collect()),
            ..config.clone()
        };
        match minimum_truth_elevation(&trial) {
            Ok(elev) if elev > best.1 => best = (anchor, elev),
            Ok(_) | Err(ScenarioError::BelowHorizon { .. }) => {}
            Err(e) => return Err(e),
        }
        anchor += step;
    }
    Ok(best)
}

/// Builds the labelled campaign described by `config`.
pub fn generate(config: &ScenarioConfig) -> Result<LabeledObservationSet, ScenarioError> {
    let dates = schedule(config)?;
    let gravity = GravityModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.measurement_noise).map_err(|e| config_error("measurement_noise", e.to_string()))?;

    let mut batches = Vec::with_capacity(dates.len());
    let mut labels = Vec::with_capacity(dates.len());
    for (date, &t) in dates.iter().enumerate() {
        let mut rows: Vec<(Measurement, RowLabel)> = truth_measurements(config, &gravity, date, t)?
            .into_iter()
            .enumerate()
            .map(|(object, mut m)| {
                if config.measurement_noise > 0.0 {
                    m = Measurement::new(m.elevation + noise.sample(&mut rng), m.azimuth + noise.sample(&mut rng), t);
                }
                (m, RowLabel::Object(object))
            })
            .collect();

        // Box around the true rows; azimuth measured relative to the first one
        // so the box never straddles the ±180° seam.
        let reference = rows[0].0.azimuth;
        let (mut el_lo, mut el_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut az_lo, mut az_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (m, _) in &rows {
            el_lo = el_lo.min(m.elevation);
            el_hi = el_hi.max(m.elevation);
            let daz = normalize_angle(m.azimuth - reference);
            az_lo = az_lo.min(daz);
            az_hi = az_hi.max(daz);
        }
        for _ in 0..config.fictitious_at(date) {
            let el = rng.random_range(el_lo - FICTITIOUS_MARGIN..=el_hi + FICTITIOUS_MARGIN);
            let daz = rng.random_range(az_lo - FICTITIOUS_MARGIN..=az_hi + FICTITIOUS_MARGIN);
            rows.push((Measurement::new(el, reference + daz, t), RowLabel::Fictitious));
        }

        rows.shuffle(&mut rng);
        let (batch, label): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        batches.push(batch);
        labels.push(label);
    }

    let nights = dates
        .iter()
        .enumerate()
        .map(|(j, _)| j / config.photos_per_night)
        .collect();
    let observations = ObservationSet::new(
        dates.clone(),
        batches,
        vec![config.sigma; dates.len()],
        nights,
        config.station,
        config.truth.len(),
    )?;
    Ok(LabeledObservationSet {
        observations,
        labels,
        truth: Candidate::new(config.truth.clone()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentScore {
    /// Share of each date's assignments that landed on a real object.
    pub per_date_purity: Vec<f64>,
    pub purity: f64,
    /// Share of all assignments that agree with the best single relabelling
    /// of candidate objects onto truth objects.
    pub consistency: f64,
    /// `identity[i]`: truth object matched to candidate object `i`.
    pub identity: Vec<Option<usize>>,
}

impl AssignmentScore {
    /// One relabelling explains every assignment on every date.
    pub fn permutation_consistent(&self) -> bool {
        self.consistency == 1.0
    }
}

pub fn score_assignments(report: &FitnessReport, labels: &[Vec<RowLabel>]) -> Result<AssignmentScore, ScenarioError> {
    if report.assignments.len() != labels.len() {
        return Err(ScenarioError::DateCount {
            report: report.assignments.len(),
            labels: labels.len(),
        });
    }
    let n = report.assignments.first().map_or(0, |a| a.row_of.len());
    let truth_objects = labels
        .iter()
        .flatten()
        .filter_map(|l| match l {
            RowLabel::Object(t) => Some(t + 1),
            RowLabel::Fictitious => None,
        })
        .max()
        .unwrap_or(0);

    let mut agreement = vec![vec![0usize; n]; truth_objects.max(n)];
    let mut per_date_purity = Vec::with_capacity(labels.len());
    let mut pure = 0usize;
    for (date, (assignment, date_labels)) in report.assignments.iter().zip(labels).enumerate() {
        let mut hits = 0usize;
        for (object, &row) in assignment.row_of.iter().enumerate() {
            match date_labels.get(row) {
                Some(RowLabel::Object(t)) => {
                    hits += 1;
                    agreement[*t][object] += 1;
                }
                Some(RowLabel::Fictitious) => {}
                None => return Err(ScenarioError::MissingLabel { date, row }),
            }
        }
        pure += hits;
        per_date_purity.push(if n == 0 { 1.0 } else { hits as f64 / n as f64 });
    }
    let total = n * labels.len();
    let purity = if total == 0 { 1.0 } else { pure as f64 / total as f64 };

    if n == 0 {
        return Ok(AssignmentScore {
            per_date_purity,
            purity,
            consistency: 1.0,
            identity: Vec::new(),
        });
    }

    // Best relabelling = assignment maximizing agreement.
    let dates = labels.len();
    let costs = CostMatrix::new(
        agreement.len(),
        n,
        agreement
            .iter()
            .flat_map(|row| row.iter().map(|&c| (dates - c) as f64))
            .collect(),
    )
    .expect("agreement matrix is well formed");
    let matched = solve(&costs);
    let agreed: usize = matched
        .row_of
        .iter()
        .enumerate()
        .map(|(object, &t)| agreement[t][object])
        .sum();
    let identity = matched
        .row_of
        .iter()
        .map(|&t| (t < truth_objects).then_some(t))
        .collect();
    Ok(AssignmentScore {
        per_date_purity,
        purity,
        consistency: agreed as f64 / total as f64,
        identity,
    })
}
