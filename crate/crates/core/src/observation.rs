//! Ground-telescope angle measurements and their weighted deviations.
//!
//! The Earth is a rotating sphere whose fixed frame coincides with the
//! inertial frame at `t = rotation_epoch_angle = 0`. No light-time, refraction
//! or aberration corrections are applied.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::orbit::{normalize_angle, StateVector, EARTH_RADIUS_KM};
use crate::vec3::{dot, norm, sub, Vec3};

/// Sidereal rotation rate of the Earth, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_9e-5;

const ZENITH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservationError {
    #[error("object coincides with the station")]
    Coincident,
    #[error("measurement epochs differ: {0} s vs {1} s")]
    EpochMismatch(f64, f64),
    #[error("latitude {0} rad outside [-pi/2, pi/2]")]
    Latitude(f64),
    #[error("uncertainty components must be positive and finite")]
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStation {
    /// rad, east positive
    pub longitude: f64,
    /// rad, geocentric
    pub latitude: f64,
    /// km
    pub earth_radius: f64,
    /// rad/s
    pub earth_rotation_rate: f64,
    /// Offset of the Earth-fixed x-axis from the inertial x-axis at t = 0, rad.
    pub rotation_epoch_angle: f64,
}

impl GroundStation {
    pub fn new(longitude: f64, latitude: f64) -> Result<Self, ObservationError> {
        let station = Self {
            longitude,
            latitude,
            earth_radius: EARTH_RADIUS_KM,
            earth_rotation_rate: EARTH_ROTATION_RATE,
            rotation_epoch_angle: 0.0,
        };
        station.validate()?;
        Ok(station)
    }

    pub fn validate(&self) -> Result<(), ObservationError> {
        if !(self.latitude.abs() <= FRAC_PI_2) {
            return Err(ObservationError::Latitude(self.latitude));
        }
        Ok(())
    }

    /// Inertial longitude of the station meridian at `t`.
    pub fn inertial_longitude(&self, t: f64) -> f64 {
        self.longitude + self.rotation_epoch_angle + self.earth_rotation_rate * t
    }

    pub fn position_inertial(&self, t: f64) -> Vec3 {
        let (sin_lon, cos_lon) = self.inertial_longitude(t).sin_cos();
        let (sin_lat, cos_lat) = self.latitude.sin_cos();
        [
            self.earth_radius * cos_lat * cos_lon,
            self.earth_radius * cos_lat * sin_lon,
            self.earth_radius * sin_lat,
        ]
    }
}

/// One (elevation, azimuth) sighting. Azimuth from North, positive eastwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub elevation: f64,
    pub azimuth: f64,
    pub epoch: f64,
}

impl Measurement {
    pub fn new(elevation: f64, azimuth: f64, epoch: f64) -> Self {
        Self {
            elevation,
            azimuth: normalize_angle(azimuth),
            epoch,
        }
    }

    /// Azimuth is meaningless here and was reported as 0.
    pub fn at_zenith(&self) -> bool {
        (self.elevation - FRAC_PI_2).abs() < ZENITH_TOLERANCE
    }
}

/// Per-component measurement uncertainty, rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyProfile {
    pub elevation: f64,
    pub azimuth: f64,
}

impl UncertaintyProfile {
    pub fn new(elevation: f64, azimuth: f64) -> Result<Self, ObservationError> {
        let sigma = Self { elevation, azimuth };
        sigma.validate()?;
        Ok(sigma)
    }

    pub fn uniform(sigma: f64) -> Result<Self, ObservationError> {
        Self::new(sigma, sigma)
    }

    pub fn validate(&self) -> Result<(), ObservationError> {
        let ok = |s: f64| s.is_finite() && s > 0.0;
        if ok(self.elevation) && ok(self.azimuth) {
            Ok(())
        } else {
            Err(ObservationError::Sigma)
        }
    }
}

/// Topocentric elevation and azimuth of `state` seen from `station`.
pub fn observe(state: &StateVector, station: &GroundStation) -> Result<Measurement, ObservationError> {
    let site = station.position_inertial(state.epoch);
    let los = sub(&state.position, &site);
    if norm(&los) == 0.0 {
        return Err(ObservationError::Coincident);
    }

    let (sin_lon, cos_lon) = station.inertial_longitude(state.epoch).sin_cos();
    let (sin_lat, cos_lat) = station.latitude.sin_cos();
    let east = [-sin_lon, cos_lon, 0.0];
    let north = [-sin_lat * cos_lon, -sin_lat * sin_lon, cos_lat];
    let up = [cos_lat * cos_lon, cos_lat * sin_lon, sin_lat];

    let e = dot(&los, &east);
    let n = dot(&los, &north);
    let u = dot(&los, &up);
    let horizontal = e.hypot(n);

    let elevation = u.atan2(horizontal);
    let azimuth = if horizontal <= ZENITH_TOLERANCE * norm(&los) {
        0.0
    } else {
        e.atan2(n)
    };
    Ok(Measurement::new(elevation, azimuth, state.epoch))
}

/// `Σ (u_k / σ_k)²` over (elevation, azimuth), each residual wrapped into `(−π, π]`.
///
/// This is a sum of squares, not a norm in the metric sense: a 1° residual
/// with σ = 0.01° contributes 10 000.
pub fn weighted_norm(residual: [f64; 2], sigma: &UncertaintyProfile) -> f64 {
    let de = normalize_angle(residual[0]) / sigma.elevation;
    let da = normalize_angle(residual[1]) / sigma.azimuth;
    de * de + da * da
}

/// Cost of explaining measurement `z` by pseudo-measurement `y`.
pub fn assignment_cost(
    z: &Measurement,
    y: &Measurement,
    sigma: &UncertaintyProfile,
) -> Result<f64, ObservationError> {
    if z.epoch != y.epoch {
        return Err(ObservationError::EpochMismatch(z.epoch, y.epoch));
    }
    Ok(weighted_norm(
        [z.elevation - y.elevation, z.azimuth - y.azimuth],
        sigma,
    ))
}
