//! Boundary bookkeeping for the real-matrix model: the Cayley transform
//! C(z) = (z - i)/(z + i) carries R union infinity to the unit circle, so
//! boundary points of the model become angles in [0, 2pi).

use crate::error::{Error, Result};
use crate::math;
use crate::moebius::{Fixed, MapKind, MoebiusMap, SpherePoint};
use crate::tolerances::TOL_TR;

pub const TAU: f64 = 2.0 * core::f64::consts::PI;

/// Angle of C(x) for x on R union infinity.  Infinity maps to angle 0,
/// the origin to pi; the map is continuous through infinity.
pub fn real_point_to_angle(p: SpherePoint) -> Result<f64> {
    match p {
        SpherePoint::Infinity => Ok(0.0),
        SpherePoint::Finite(z) => {
            if math::abs(z.im) > 1e-6 {
                return Err(Error::invalid("boundary point is not real"));
            }
            let x = z.re;
            // (x-i)/(x+i) = (x^2 - 1 - 2xi)/(x^2+1).
            Ok(math::rem_euclid(math::atan2(-2.0 * x, x * x - 1.0), TAU))
        }
    }
}

/// Inverse of the angle map: theta -> -cot(theta/2), with angle 0 at infinity.
pub fn angle_to_real_point(theta: f64) -> SpherePoint {
    let s = math::sin(theta / 2.0);
    if math::abs(s) < 1e-12 {
        return SpherePoint::Infinity;
    }
    SpherePoint::finite(-math::cos(theta / 2.0) / s, 0.0)
}

/// Difference a - b wrapped into [0, 2pi).
pub fn angle_gap(a: f64, b: f64) -> f64 {
    math::rem_euclid(a - b, TAU)
}

/// Absolute angular separation in [0, pi].
pub fn angle_sep(a: f64, b: f64) -> f64 {
    let g = angle_gap(a, b);
    g.min(TAU - g)
}

/// Fixed angles of a real map acting on the circle via the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedAngles {
    /// Parabolic: a single boundary angle.
    One(f64),
    /// Hyperbolic: attracting then repelling angle.
    Two { attracting: f64, repelling: f64 },
}

impl FixedAngles {
    pub fn iter(&self) -> impl Iterator<Item = f64> {
        let (a, b) = match *self {
            FixedAngles::One(a) => (a, None),
            FixedAngles::Two {
                attracting,
                repelling,
            } => (attracting, Some(repelling)),
        };
        core::iter::once(a).chain(b)
    }
}

/// Boundary fixed angles of a real matrix.  Real elliptic maps fix no
/// boundary point (conjugate pair off the circle) and yield None, as do
/// identities.
pub fn real_fixed_angles(map: &MoebiusMap) -> Result<Option<FixedAngles>> {
    if !map.is_real(TOL_TR * 10.0) {
        return Err(Error::invalid("model map must have real entries"));
    }
    let class = map.classify();
    match (class.kind, class.fixed) {
        (MapKind::Identity, _) | (MapKind::Elliptic, _) => Ok(None),
        (MapKind::Parabolic, Fixed::One(p)) => Ok(Some(FixedAngles::One(real_point_to_angle(p)?))),
        (
            MapKind::Hyperbolic,
            Fixed::Attracting {
                attracting,
                repelling,
            },
        ) => Ok(Some(FixedAngles::Two {
            attracting: real_point_to_angle(attracting)?,
            repelling: real_point_to_angle(repelling)?,
        })),
        // A real matrix cannot be loxodromic; anything else is numerical
        // noise worth surfacing.
        _ => Err(Error::invalid("real map with unexpected classification")),
    }
}

/// Image of a boundary angle under a real map, through the model circle.
pub fn apply_to_angle(map: &MoebiusMap, theta: f64) -> Result<f64> {
    let p = angle_to_real_point(theta);
    real_point_to_angle(map.apply(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn real_map(a: f64, b: f64, c: f64, d: f64) -> MoebiusMap {
        MoebiusMap::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(d, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn angle_map_round_trips() {
        for k in 0..64 {
            let theta = TAU * k as f64 / 64.0;
            let p = angle_to_real_point(theta);
            let back = real_point_to_angle(p).unwrap();
            assert!(angle_sep(theta, back) < 1e-9, "theta {theta} back {back}");
        }
    }

    #[test]
    fn landmark_angles() {
        assert!(real_point_to_angle(SpherePoint::Infinity).unwrap() == 0.0);
        let at_zero = real_point_to_angle(SpherePoint::finite(0.0, 0.0)).unwrap();
        assert!((at_zero - core::f64::consts::PI).abs() < 1e-12);
        let at_one = real_point_to_angle(SpherePoint::finite(1.0, 0.0)).unwrap();
        assert!((at_one - 1.5 * core::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn angle_map_is_monotone_through_infinity() {
        // Walking x over the whole real line plus infinity sweeps the circle
        // exactly once.
        let mut pts = alloc::vec::Vec::new();
        for k in -40..=40 {
            pts.push(SpherePoint::finite(k as f64 / 4.0, 0.0));
        }
        pts.push(SpherePoint::Infinity);
        let mut angles: alloc::vec::Vec<f64> = pts
            .iter()
            .map(|p| real_point_to_angle(*p).unwrap())
            .collect();
        angles.sort_by(f64::total_cmp);
        let mut turn = 0.0;
        for i in 0..angles.len() {
            let next = angles[(i + 1) % angles.len()];
            turn += angle_gap(next, angles[i]);
        }
        assert!((turn - TAU).abs() < 1e-9);
    }

    #[test]
    fn hyperbolic_fixed_angles() {
        // z -> 4z fixes 0 (repelling) and infinity (attracting).
        let m = real_map(2.0, 0.0, 0.0, 0.5);
        match real_fixed_angles(&m).unwrap().unwrap() {
            FixedAngles::Two {
                attracting,
                repelling,
            } => {
                assert!(attracting.abs() < 1e-9);
                assert!((repelling - core::f64::consts::PI).abs() < 1e-9);
            }
            other => panic!("expected two angles, got {other:?}"),
        }
    }

    #[test]
    fn parabolic_fixed_angle() {
        let m = real_map(1.0, 1.0, 0.0, 1.0);
        match real_fixed_angles(&m).unwrap().unwrap() {
            FixedAngles::One(a) => assert!(a.abs() < 1e-9),
            other => panic!("expected one angle, got {other:?}"),
        }
    }

    #[test]
    fn elliptic_real_map_has_no_boundary_angles() {
        let m = real_map(0.0, 1.0, -1.0, 0.0);
        assert!(real_fixed_angles(&m).unwrap().is_none());
    }

    #[test]
    fn apply_to_angle_matches_sphere_action() {
        let m = real_map(1.0, 1.0, 1.0, 2.0);
        let theta = 1.234;
        let image = apply_to_angle(&m, theta).unwrap();
        let direct = real_point_to_angle(m.apply(angle_to_real_point(theta))).unwrap();
        assert!(angle_sep(image, direct) < 1e-12);
    }
}
