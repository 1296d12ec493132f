//! Run configuration read from a flat TOML file.
//!
//! Every key is optional; a missing key takes the default. Angles are in
//! degrees and times in seconds. Unknown keys are rejected so that typos do
//! not silently fall back to defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::observation::{GroundStation, UncertaintyProfile};
use crate::problem::{OrbitBox, GEO_RADIUS_KM};
use crate::scenario::{default_truth, ScenarioConfig, DEFAULT_FICTITIOUS_PATTERN};
use crate::swarm::{SwarmConfig, Topology};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// 1-based rows of the built-in truth table to simulate.
    pub truth_rows: Vec<usize>,
    pub nights: usize,
    pub photos_per_night: usize,
    pub photo_interval_s: f64,
    pub night_start_offsets_s: Option<Vec<f64>>,
    pub station_longitude_deg: f64,
    pub station_latitude_deg: f64,
    pub sigma_deg: f64,
    pub fictitious_counts: Vec<usize>,
    pub measurement_noise_deg: f64,
    pub scenario_seed: u64,

    pub particles: usize,
    pub iterations: usize,
    pub eval_budget: Option<usize>,
    pub neighborhood_size: usize,
    pub topology: String,
    pub local_search_steps: usize,
    pub worst_reset_count: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub perturbation: f64,
    pub velocity_max_frac: f64,
    pub velocity_init_frac: f64,
    pub swarm_seed: u64,
    pub workers: usize,

    pub a_min_km: f64,
    pub a_max_km: f64,
    pub e_max: f64,
    pub inc_max_deg: f64,

    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scenario = ScenarioConfig::default();
        let swarm = SwarmConfig::default();
        let limits = OrbitBox::default();
        Self {
            truth_rows: (1..=default_truth().len()).collect(),
            nights: scenario.nights,
            photos_per_night: scenario.photos_per_night,
            photo_interval_s: scenario.photo_interval,
            night_start_offsets_s: None,
            station_longitude_deg: 0.0,
            station_latitude_deg: 45.0,
            sigma_deg: 0.01,
            fictitious_counts: DEFAULT_FICTITIOUS_PATTERN.to_vec(),
            measurement_noise_deg: 0.0,
            scenario_seed: scenario.seed,

            particles: swarm.particles,
            iterations: swarm.iterations,
            eval_budget: swarm.eval_budget,
            neighborhood_size: swarm.neighborhood_size,
            topology: swarm.topology.to_string(),
            local_search_steps: swarm.local_search_steps,
            worst_reset_count: swarm.worst_reset_count,
            inertia: swarm.inertia,
            cognitive: swarm.cognitive,
            social: swarm.social,
            perturbation: swarm.perturbation,
            velocity_max_frac: swarm.velocity_max_frac,
            velocity_init_frac: swarm.velocity_init_frac,
            swarm_seed: swarm.seed,
            workers: swarm.workers,

            a_min_km: limits.a_min,
            a_max_km: limits.a_max,
            e_max: limits.e_max,
            inc_max_deg: 1.5,

            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Checks every field and the derived scenario and swarm settings.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let truth_len = default_truth().len();
        if self.truth_rows.is_empty() {
            return Err(invalid("truth_rows", "needs at least one row"));
        }
        if let Some(&bad) = self.truth_rows.iter().find(|&&r| r == 0 || r > truth_len) {
            return Err(invalid("truth_rows", format!("row {bad} is outside 1..={truth_len}")));
        }
        let mut seen = self.truth_rows.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.truth_rows.len() {
            return Err(invalid("truth_rows", "rows must be distinct"));
        }
        if !(self.station_latitude_deg.abs() <= 90.0) {
            return Err(invalid("station_latitude_deg", "must lie in [-90, 90]"));
        }
        if !self.station_longitude_deg.is_finite() {
            return Err(invalid("station_longitude_deg", "must be finite"));
        }
        if !(self.sigma_deg.is_finite() && self.sigma_deg > 0.0) {
            return Err(invalid("sigma_deg", "must be positive"));
        }
        if !(self.measurement_noise_deg.is_finite() && self.measurement_noise_deg >= 0.0) {
            return Err(invalid("measurement_noise_deg", "must be non-negative"));
        }
        if !(self.a_min_km.is_finite() && self.a_min_km > 0.0 && self.a_min_km < self.a_max_km && self.a_max_km.is_finite()) {
            return Err(invalid("a_min_km", "need 0 < a_min_km < a_max_km"));
        }
        if !(self.e_max > 0.0 && self.e_max < 1.0) {
            return Err(invalid("e_max", "must lie in (0, 1)"));
        }
        if !(self.inc_max_deg > 0.0 && self.inc_max_deg <= 180.0) {
            return Err(invalid("inc_max_deg", "must lie in (0, 180]"));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        self.topology()?;
        self.scenario()?
            .validate()
            .map_err(|e| invalid("scenario", e.to_string()))?;
        self.swarm()?
            .validate()
            .map_err(|e| invalid("swarm", e.to_string()))?;
        Ok(())
    }

    fn topology(&self) -> Result<Topology, ConfigError> {
        self.topology.parse().map_err(|e: String| invalid("topology", e))
    }

    pub fn scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let truth = default_truth();
        let station = GroundStation::new(
            self.station_longitude_deg.to_radians(),
            self.station_latitude_deg.to_radians(),
        )
        .map_err(|e| invalid("station_latitude_deg", e.to_string()))?;
        let sigma = UncertaintyProfile::uniform(self.sigma_deg.to_radians())
            .map_err(|e| invalid("sigma_deg", e.to_string()))?;
        Ok(ScenarioConfig {
            truth: self.truth_rows.iter().map(|&r| truth[r - 1]).collect(),
            nights: self.nights,
            photos_per_night: self.photos_per_night,
            photo_interval: self.photo_interval_s,
            night_start_offsets: self.night_start_offsets_s.clone(),
            station,
            sigma,
            fictitious_counts: self.fictitious_counts.clone(),
            measurement_noise: self.measurement_noise_deg.to_radians(),
            seed: self.scenario_seed,
        })
    }

    pub fn swarm(&self) -> Result<SwarmConfig, ConfigError> {
        Ok(SwarmConfig {
            particles: self.particles,
            iterations: self.iterations,
            eval_budget: self.eval_budget,
            neighborhood_size: self.neighborhood_size,
            topology: self.topology()?,
            local_search_steps: self.local_search_steps,
            worst_reset_count: self.worst_reset_count,
            inertia: self.inertia,
            cognitive: self.cognitive,
            social: self.social,
            perturbation: self.perturbation,
            velocity_max_frac: self.velocity_max_frac,
            velocity_init_frac: self.velocity_init_frac,
            seed: self.swarm_seed,
            workers: self.workers,
        })
    }

    pub fn orbit_box(&self) -> OrbitBox {
        OrbitBox {
            a_min: self.a_min_km,
            a_max: self.a_max_km,
            e_max: self.e_max,
            inc_max: self.inc_max_deg.to_radians(),
            ..OrbitBox::default()
        }
    }
}

impl OrbitBox {
    /// Box centred on the geostationary radius with the given half-width.
    pub fn around_geo(half_width_km: f64) -> Self {
        Self {
            a_min: GEO_RADIUS_KM - half_width_km,
            a_max: GEO_RADIUS_KM + half_width_km,
            ..Self::default()
        }
    }
}
