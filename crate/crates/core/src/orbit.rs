//! Two-body propagation of near-circular orbits.
//!
//! An object is described by five elements `(a, e, I, Ω, θ)` plus an epoch.
//! There is no argument of perigee: perigee sits on the ascending node, so `θ`
//! is at once the true anomaly and the angle travelled from the node. Two-body
//! motion keeps perigee fixed, which means every propagated state still fits
//! this five-element description.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::vec3::{cross, dot, norm, Vec3};

/// WGS-84 gravitational parameter of the Earth, km³/s².
pub const MU_EARTH: f64 = 398_600.441_8;
/// WGS-84 equatorial radius, km.
pub const EARTH_RADIUS_KM: f64 = 6378.137;

const KEPLER_TOLERANCE: f64 = 1e-12;
const KEPLER_MAX_ITERATIONS: usize = 50;
const EQUATORIAL_THRESHOLD: f64 = 1e-9;
const CIRCULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("semi-major axis must be positive and finite, got {0} km")]
    SemiMajorAxis(f64),
    #[error("eccentricity must lie in [0, 1), got {0}")]
    Eccentricity(f64),
    #[error("inclination must lie in [0, pi], got {0} rad")]
    Inclination(f64),
    #[error("angle {name} is not finite")]
    Angle { name: &'static str },
    #[error("kepler iteration did not converge for M={mean_anomaly}, e={eccentricity}")]
    KeplerDivergence { mean_anomaly: f64, eccentricity: f64 },
    #[error("requested epoch {target} s precedes element epoch {epoch} s")]
    Backwards { epoch: f64, target: f64 },
    #[error("state does not describe a bound orbit")]
    Unbound,
    #[error("state has zero angular momentum")]
    Rectilinear,
}

/// Wraps an angle into `(−π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = angle - TAU * (angle / TAU).round();
    if wrapped <= -PI {
        wrapped + TAU
    } else if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityModel {
    /// km³/s²
    pub mu: f64,
}

impl Default for GravityModel {
    fn default() -> Self {
        Self { mu: MU_EARTH }
    }
}

impl GravityModel {
    pub fn period(&self, semi_major_axis: f64) -> f64 {
        TAU * (semi_major_axis.powi(3) / self.mu).sqrt()
    }

    pub fn mean_motion(&self, semi_major_axis: f64) -> f64 {
        (self.mu / semi_major_axis.powi(3)).sqrt()
    }
}

/// Initial condition of one object. Angles in radians, `a` in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    pub a: f64,
    pub e: f64,
    pub inc: f64,
    pub raan: f64,
    pub theta: f64,
    /// Seconds on the scenario timeline.
    pub epoch: f64,
}

impl OrbitalElements {
    pub fn validate(&self) -> Result<(), OrbitError> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(OrbitError::SemiMajorAxis(self.a));
        }
        if !(self.e >= 0.0 && self.e < 1.0) {
            return Err(OrbitError::Eccentricity(self.e));
        }
        if !(0.0..=PI).contains(&self.inc) {
            return Err(OrbitError::Inclination(self.inc));
        }
        if !self.raan.is_finite() {
            return Err(OrbitError::Angle { name: "raan" });
        }
        if !self.theta.is_finite() {
            return Err(OrbitError::Angle { name: "theta" });
        }
        if !self.epoch.is_finite() {
            return Err(OrbitError::Angle { name: "epoch" });
        }
        Ok(())
    }

    /// Same elements with `raan` and `theta` wrapped into `(−π, π]`.
    pub fn normalized(mut self) -> Self {
        self.raan = normalize_angle(self.raan);
        self.theta = normalize_angle(self.theta);
        self
    }

    /// Total longitude `λ = Ω + θ`, wrapped. Well conditioned for near-equatorial orbits.
    pub fn longitude(&self) -> f64 {
        normalize_angle(self.raan + self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    /// km, Earth-centred inertial.
    pub position: Vec3,
    /// km/s
    pub velocity: Vec3,
    pub epoch: f64,
}

impl StateVector {
    pub fn specific_energy(&self, gravity: &GravityModel) -> f64 {
        0.5 * dot(&self.velocity, &self.velocity) - gravity.mu / norm(&self.position)
    }

    pub fn angular_momentum(&self) -> Vec3 {
        cross(&self.position, &self.velocity)
    }
}

/// Which conventions [`state_to_elements`] had to fall back on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Degeneracy {
    /// Node undefined: `raan` reported as 0 and `theta` carries the total longitude.
    pub near_equatorial: bool,
    /// Perigee undefined; `theta` is still measured from the node.
    pub near_circular: bool,
}

pub fn elements_to_state(el: &OrbitalElements, gravity: &GravityModel) -> Result<StateVector, OrbitError> {
    el.validate()?;
    let p = el.a * (1.0 - el.e * el.e);
    let (sin_t, cos_t) = el.theta.sin_cos();
    let r = p / (1.0 + el.e * cos_t);
    let vscale = (gravity.mu / p).sqrt();

    // Perifocal frame with perigee on the node line.
    let r_pf = [r * cos_t, r * sin_t];
    let v_pf = [-vscale * sin_t, vscale * (el.e + cos_t)];

    let (sin_o, cos_o) = el.raan.sin_cos();
    let (sin_i, cos_i) = el.inc.sin_cos();
    // Columns of R3(−Ω)·R1(−I) applied to the in-plane axes.
    let p_axis = [cos_o, sin_o, 0.0];
    let q_axis = [-sin_o * cos_i, cos_o * cos_i, sin_i];

    let combine = |x: f64, y: f64| -> Vec3 {
        [
            x * p_axis[0] + y * q_axis[0],
            x * p_axis[1] + y * q_axis[1],
            x * p_axis[2] + y * q_axis[2],
        ]
    };
    Ok(StateVector {
        position: combine(r_pf[0], r_pf[1]),
        velocity: combine(v_pf[0], v_pf[1]),
        epoch: el.epoch,
    })
}

/// Recovers five-element form from a state produced by this model.
///
/// States with a perigee away from the node cannot be represented; for those
/// the returned `theta` is still the angle from the node but `a`/`e` describe
/// a different orbit shape placement.
pub fn state_to_elements(
    state: &StateVector,
    gravity: &GravityModel,
) -> Result<(OrbitalElements, Degeneracy), OrbitError> {
    let r = state.position;
    let v = state.velocity;
    let r_mag = norm(&r);
    let h = cross(&r, &v);
    let h_mag = norm(&h);
    if h_mag == 0.0 || r_mag == 0.0 {
        return Err(OrbitError::Rectilinear);
    }
    let energy = state.specific_energy(gravity);
    if !(energy < 0.0) {
        return Err(OrbitError::Unbound);
    }
    let a = -gravity.mu / (2.0 * energy);

    let rv = dot(&r, &v);
    let v2 = dot(&v, &v);
    let ecc_vec: Vec3 = std::array::from_fn(|k| ((v2 - gravity.mu / r_mag) * r[k] - rv * v[k]) / gravity.mu);
    let e = norm(&ecc_vec);
    if e >= 1.0 {
        return Err(OrbitError::Unbound);
    }

    let node = [-h[1], h[0], 0.0];
    let node_mag = node[0].hypot(node[1]);
    let inc = node_mag.atan2(h[2]);

    let mut degeneracy = Degeneracy {
        near_circular: e < CIRCULAR_THRESHOLD,
        ..Degeneracy::default()
    };

    let (raan, theta) = if inc < EQUATORIAL_THRESHOLD || node_mag <= EQUATORIAL_THRESHOLD * h_mag {
        degeneracy.near_equatorial = true;
        // True longitude, measured in the direction of motion.
        let lon = r[1].atan2(r[0]);
        let lon = if h[2] >= 0.0 { lon } else { -lon };
        (0.0, normalize_angle(lon))
    } else {
        let raan = node[1].atan2(node[0]);
        // Argument of latitude: angle from node to position in the orbit plane.
        let cos_u = dot(&node, &r) / node_mag;
        let sin_u = dot(&cross(&node, &r), &h) / (node_mag * h_mag);
        (normalize_angle(raan), normalize_angle(sin_u.atan2(cos_u)))
    };

    Ok((
        OrbitalElements {
            a,
            e,
            inc,
            raan,
            theta,
            epoch: state.epoch,
        },
        degeneracy,
    ))
}

/// Newton–Raphson solution of `E − e·sin E = M`, starting from `E = M`.
pub fn solve_kepler(mean_anomaly: f64, e: f64) -> Result<f64, OrbitError> {
    if !(0.0..1.0).contains(&e) {
        return Err(OrbitError::Eccentricity(e));
    }
    let mut ecc_anomaly = mean_anomaly;
    for _ in 0..KEPLER_MAX_ITERATIONS {
        let (s, c) = ecc_anomaly.sin_cos();
        let step = (ecc_anomaly - e * s - mean_anomaly) / (1.0 - e * c);
        ecc_anomaly -= step;
        if step.abs() < KEPLER_TOLERANCE {
            return Ok(ecc_anomaly);
        }
    }
    Err(OrbitError::KeplerDivergence {
        mean_anomaly,
        eccentricity: e,
    })
}

pub fn true_to_eccentric(true_anomaly: f64, e: f64) -> f64 {
    let (s, c) = true_anomaly.sin_cos();
    ((1.0 - e * e).sqrt() * s).atan2(e + c)
}

pub fn eccentric_to_true(ecc_anomaly: f64, e: f64) -> f64 {
    let (s, c) = ecc_anomaly.sin_cos();
    ((1.0 - e * e).sqrt() * s).atan2(c - e)
}

/// Angle from the node at time `t` (perigee on the node, so this is the true anomaly).
pub fn theta_at(el: &OrbitalElements, t: f64, gravity: &GravityModel) -> Result<f64, OrbitError> {
    el.validate()?;
    if t < el.epoch {
        return Err(OrbitError::Backwards {
            epoch: el.epoch,
            target: t,
        });
    }
    let ecc0 = true_to_eccentric(el.theta, el.e);
    let mean0 = ecc0 - el.e * ecc0.sin();
    let mean = normalize_angle(mean0 + gravity.mean_motion(el.a) * (t - el.epoch));
    let ecc = solve_kepler(mean, el.e)?;
    Ok(eccentric_to_true(ecc, el.e))
}

pub fn propagate(el: &OrbitalElements, t: f64, gravity: &GravityModel) -> Result<StateVector, OrbitError> {
    let theta = theta_at(el, t, gravity)?;
    elements_to_state(
        &OrbitalElements {
            theta,
            epoch: t,
            ..*el
        },
        gravity,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GEO: f64 = 42164.0;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn object1() -> OrbitalElements {
        OrbitalElements {
            a: GEO - 100.0,
            e: 0.02,
            inc: deg(0.5),
            raan: 0.0,
            theta: deg(-40.0),
            epoch: 0.0,
        }
    }

    fn object2() -> OrbitalElements {
        OrbitalElements {
            a: GEO + 100.0,
            e: 0.04,
            inc: deg(1.0),
            raan: deg(10.0),
            theta: deg(-52.0),
            epoch: 0.0,
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn dist(a: &Vec3, b: &Vec3) -> f64 {
        norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
    }

    #[test]
    fn circular_equatorial_state() {
        let g = GravityModel::default();
        let el = OrbitalElements {
            a: GEO,
            e: 0.0,
            inc: 0.0,
            raan: 0.0,
            theta: 0.0,
            epoch: 0.0,
        };
        let s = elements_to_state(&el, &g).unwrap();
        assert_eq!(s.position, [GEO, 0.0, 0.0]);
        let speed = (g.mu / GEO).sqrt();
        assert!((s.velocity[1] - speed).abs() < 1e-15);
        assert_eq!(s.velocity[0], 0.0);
        assert_eq!(s.velocity[2], 0.0);
    }

    #[test]
    fn polar_orbit_quarter_turn() {
        let g = GravityModel::default();
        let el = OrbitalElements {
            a: GEO,
            e: 0.0,
            inc: PI / 2.0,
            raan: 0.0,
            theta: PI / 2.0,
            epoch: 0.0,
        };
        let s = elements_to_state(&el, &g).unwrap();
        assert!(dist(&s.position, &[0.0, 0.0, GEO]) < 1e-9);
    }

    #[test]
    fn energy_matches_semi_major_axis() {
        let g = GravityModel::default();
        for el in [object1(), object2()] {
            let s = elements_to_state(&el, &g).unwrap();
            assert!(rel(s.specific_energy(&g), -g.mu / (2.0 * el.a)) < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_elements() {
        let g = GravityModel::default();
        let mut el = object1();
        el.e = 1.0;
        assert_eq!(elements_to_state(&el, &g), Err(OrbitError::Eccentricity(1.0)));
        el.e = 0.1;
        el.a = -5.0;
        assert_eq!(elements_to_state(&el, &g), Err(OrbitError::SemiMajorAxis(-5.0)));
        el.a = GEO;
        el.inc = 4.0;
        assert!(matches!(elements_to_state(&el, &g), Err(OrbitError::Inclination(_))));
        el.inc = 0.0;
        el.theta = f64::NAN;
        assert!(matches!(propagate(&el, 10.0, &g), Err(OrbitError::Angle { name: "theta" })));
    }

    #[test]
    fn round_trip_table_row() {
        let g = GravityModel::default();
        let el = object1();
        let s = elements_to_state(&el, &g).unwrap();
        let (back, deg_flags) = state_to_elements(&s, &g).unwrap();
        assert_eq!(deg_flags, Degeneracy::default());
        assert!(rel(back.a, el.a) < 1e-9);
        assert!(rel(back.e, el.e) < 1e-9);
        assert!((back.inc - el.inc).abs() < 1e-9);
        assert!(normalize_angle(back.raan - el.raan).abs() < 1e-9);
        assert!(normalize_angle(back.theta - el.theta).abs() < 1e-9);
    }

    #[test]
    fn circular_equatorial_recovery_flags_degeneracy() {
        let g = GravityModel::default();
        let s = StateVector {
            position: [GEO, 0.0, 0.0],
            velocity: [0.0, (g.mu / GEO).sqrt(), 0.0],
            epoch: 0.0,
        };
        let (el, flags) = state_to_elements(&s, &g).unwrap();
        assert!(rel(el.a, GEO) < 1e-12);
        assert!(el.e < 1e-12);
        assert!(el.inc < 1e-12);
        assert_eq!(el.raan, 0.0);
        assert!(flags.near_equatorial && flags.near_circular);

        // Equatorial at 30° true longitude.
        let lon = deg(30.0);
        let el = OrbitalElements {
            a: GEO,
            e: 0.0,
            inc: 0.0,
            raan: deg(10.0),
            theta: deg(20.0),
            epoch: 0.0,
        };
        let (back, flags) = state_to_elements(&elements_to_state(&el, &g).unwrap(), &g).unwrap();
        assert!(flags.near_equatorial);
        assert_eq!(back.raan, 0.0);
        assert!((back.theta - lon).abs() < 1e-12);
        assert!((back.longitude() - el.longitude()).abs() < 1e-12);
    }

    #[test]
    fn unbound_state_rejected() {
        let g = GravityModel::default();
        let s = StateVector {
            position: [GEO, 0.0, 0.0],
            velocity: [0.0, 2.0 * (g.mu / GEO).sqrt(), 0.0],
            epoch: 0.0,
        };
        assert_eq!(state_to_elements(&s, &g), Err(OrbitError::Unbound));
        let s = StateVector {
            position: [GEO, 0.0, 0.0],
            velocity: [1.0, 0.0, 0.0],
            epoch: 0.0,
        };
        assert_eq!(state_to_elements(&s, &g), Err(OrbitError::Rectilinear));
    }

    #[test]
    fn kepler_trivial_cases() {
        assert_eq!(solve_kepler(0.0, 0.05).unwrap(), 0.0);
        assert_eq!(solve_kepler(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(solve_kepler(1.234, 0.0).unwrap(), 1.234);
        assert!(solve_kepler(1.0, 1.0).is_err());
    }

    #[test]
    fn kepler_residual_sweep() {
        for e in [0.0, 0.02, 0.08, 0.1] {
            for k in 0..720 {
                // (−π, π]
                let m = -PI + (k + 1) as f64 * TAU / 720.0;
                let ecc = solve_kepler(m, e).unwrap();
                assert!((ecc - e * ecc.sin() - m).abs() < 1e-12, "e={e} M={m}");
            }
        }
    }

    #[test]
    fn geo_period_recurrence() {
        let g = GravityModel::default();
        let el = OrbitalElements {
            a: GEO,
            e: 0.0,
            inc: 0.0,
            raan: 0.0,
            theta: 0.0,
            epoch: 0.0,
        };
        let period = g.period(GEO);
        // 2π√(a³/μ) for a = 42164 km, slightly short of the sidereal day.
        assert!((period - 86163.5706).abs() < 1e-3, "period {period}");
        let s0 = propagate(&el, 0.0, &g).unwrap();
        let s1 = propagate(&el, period, &g).unwrap();
        assert!(dist(&s0.position, &s1.position) < 1e-6);

        // Eccentric, inclined orbits recur too.
        for el in [object1(), object2()] {
            let s0 = elements_to_state(&el, &g).unwrap();
            let s1 = propagate(&el, g.period(el.a), &g).unwrap();
            assert!(dist(&s0.position, &s1.position) < 1e-6);
        }
    }

    #[test]
    fn circular_quarter_period_advances_ninety_degrees() {
        let g = GravityModel::default();
        let el = OrbitalElements {
            a: GEO,
            e: 0.0,
            inc: deg(0.7),
            raan: deg(15.0),
            theta: deg(-30.0),
            epoch: 0.0,
        };
        let s0 = elements_to_state(&el, &g).unwrap();
        let s1 = propagate(&el, g.period(GEO) / 4.0, &g).unwrap();
        let cos_angle = dot(&s0.position, &s1.position) / (norm(&s0.position) * norm(&s1.position));
        assert!(cos_angle.abs() < 1e-12);
        let theta = theta_at(&el, g.period(GEO) / 4.0, &g).unwrap();
        assert!(normalize_angle(theta - (el.theta + PI / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn conservation_over_three_days() {
        let g = GravityModel::default();
        let el = object2();
        let energy0 = -g.mu / (2.0 * el.a);
        let h0 = elements_to_state(&el, &g).unwrap().angular_momentum();
        for k in 0..30 {
            let t = 3.0 * 86400.0 * k as f64 / 29.0;
            let s = propagate(&el, t, &g).unwrap();
            assert!(rel(s.specific_energy(&g), energy0) < 1e-10);
            let h = s.angular_momentum();
            assert!(dist(&h, &h0) / norm(&h0) < 1e-10);
            let (back, _) = state_to_elements(&s, &g).unwrap();
            assert!(rel(back.a, el.a) < 1e-9);
            assert!(rel(back.e, el.e) < 1e-9);
        }
    }

    #[test]
    fn backwards_propagation_rejected() {
        let g = GravityModel::default();
        let mut el = object1();
        el.epoch = 100.0;
        assert_eq!(
            propagate(&el, 50.0, &g),
            Err(OrbitError::Backwards {
                epoch: 100.0,
                target: 50.0
            })
        );
    }

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(deg(181.0)) - deg(-179.0)).abs() < 1e-14);
    }

    fn arb_elements() -> impl Strategy<Value = OrbitalElements> {
        (
            -200.0f64..200.0,
            0.0f64..0.1,
            0.05f64..1.5,
            -180.0f64..180.0,
            -180.0f64..180.0,
        )
            .prop_map(|(da, e, inc, raan, theta)| OrbitalElements {
                a: GEO + da,
                e,
                inc: deg(inc),
                raan: deg(raan),
                theta: deg(theta),
                epoch: 0.0,
            })
    }

    proptest! {
        #[test]
        fn random_states_round_trip(el in arb_elements(), t in 0.0f64..3.0 * 86400.0) {
            let g = GravityModel::default();
            let s = propagate(&el, t, &g).unwrap();
            let (back, _) = state_to_elements(&s, &g).unwrap();
            let again = elements_to_state(&back, &g).unwrap();
            prop_assert!(dist(&s.position, &again.position) < 1e-6);
            prop_assert!(rel(back.a, el.a) < 1e-9);
            prop_assert!((back.e - el.e).abs() < 1e-9 * el.e.max(1e-3));
            prop_assert!(normalize_angle(back.longitude() - theta_at(&el, t, &g).unwrap() - el.raan).abs() < 1e-9);
        }

        #[test]
        fn flow_property(el in arb_elements(), t1 in 0.0f64..86400.0, dt in 0.0f64..2.0 * 86400.0) {
            let g = GravityModel::default();
            let direct = propagate(&el, t1 + dt, &g).unwrap();
            let mid = propagate(&el, t1, &g).unwrap();
            let (restart, _) = state_to_elements(&mid, &g).unwrap();
            let chained = propagate(&restart, t1 + dt, &g).unwrap();
            prop_assert!(dist(&direct.position, &chained.position) < 1e-6);
        }
    }
}
