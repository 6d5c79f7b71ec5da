//! Möbius transformations of the Riemann sphere and their classification.
//!
//! Maps are stored as determinant-one 2x2 complex matrices; a matrix and its
//! negation act identically, so equality quotients by sign.

use core::fmt;
use core::ops::Mul;

pub use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::tolerances::{TOL_DET, TOL_TR};

/// Moduli beyond this are flattened to the point at infinity.  Keeps the
/// chordal formulas away from overflow while staying far below any scale
/// the pipeline distinguishes from infinity.
const INF_CLAMP: f64 = 1e14;

/// Point on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// Unit vector on S^2 under inverse stereographic projection; infinity
    /// is the north pole.  Chordal distance is the Euclidean distance
    /// between these vectors.
    pub fn to_unit_vec3(&self) -> [f64; 3] {
        match self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let n = z.norm_sqr();
                if n > INF_CLAMP {
                    return [0.0, 0.0, 1.0];
                }
                let d = 1.0 + n;
                [2.0 * z.re / d, 2.0 * z.im / d, (n - 1.0) / d]
            }
        }
    }

    /// Inverse stereographic projection from a (not necessarily unit)
    /// direction vector; the north pole maps to infinity.
    pub fn from_unit_vec3(v: [f64; 3]) -> SpherePoint {
        let n = math::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if n <= f64::EPSILON {
            return SpherePoint::Infinity;
        }
        let (x, y, z) = (v[0] / n, v[1] / n, v[2] / n);
        if 1.0 - z <= 1e-12 {
            SpherePoint::Infinity
        } else {
            SpherePoint::finite(x / (1.0 - z), y / (1.0 - z))
        }
    }

    /// Tolerance-based identity in the chordal metric.
    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        chordal_dist(*self, *other) <= tol
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Infinity => write!(f, "inf"),
            SpherePoint::Finite(z) => write!(f, "{:.6}{:+.6}i", z.re, z.im),
        }
    }
}

/// Chordal metric on the sphere, range [0, 2].
pub fn chordal_dist(p: SpherePoint, q: SpherePoint) -> f64 {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(z), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z)) => {
            2.0 / math::sqrt(1.0 + z.norm_sqr())
        }
        (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
            let zz = z.norm_sqr();
            let ww = w.norm_sqr();
            2.0 * (z - w).norm() / math::sqrt((1.0 + zz) * (1.0 + ww))
        }
    }
}

/// Chordal distance from a point to the circle R union infinity (a great
/// circle on the sphere).  Used to test how far a sample strays from a
/// Fuchsian limit set.
pub fn chordal_dist_to_real_circle(p: SpherePoint) -> f64 {
    let v = p.to_unit_vec3();
    // Great circle {y = 0}: nearest sphere point has the same x,z direction.
    let y = v[1];
    let planar = math::sqrt((v[0] * v[0] + v[2] * v[2]).max(0.0));
    if planar <= f64::EPSILON {
        // Poles of the circle's axis: distance is sqrt(2) along the sphere
        // chord to any circle point.
        return math::sqrt(2.0);
    }
    // Chord from (x, y, z) to (x, 0, z)/planar.
    let dx = v[0] - v[0] / planar;
    let dz = v[2] - v[2] / planar;
    math::sqrt(dx * dx + y * y + dz * dz)
}

/// Determinant-normalized fractional linear transformation.
#[derive(Debug, Clone, Copy)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

/// Trace classification of a sphere action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Identity,
    Parabolic,
    Elliptic,
    Hyperbolic,
    Loxodromic,
}

/// Fixed point data attached to a classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fixed {
    /// Identity: every point.
    All,
    /// Parabolic: one point.
    One(SpherePoint),
    /// Hyperbolic or loxodromic: ordered attracting/repelling pair.
    Attracting {
        attracting: SpherePoint,
        repelling: SpherePoint,
    },
    /// Elliptic: unordered pair, neither attracts.
    Neutral(SpherePoint, SpherePoint),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapClass {
    pub kind: MapKind,
    pub fixed: Fixed,
}

impl MapClass {
    pub fn fixed_points(&self) -> impl Iterator<Item = SpherePoint> {
        let (a, b) = match self.fixed {
            Fixed::All => (None, None),
            Fixed::One(p) => (Some(p), None),
            Fixed::Attracting {
                attracting,
                repelling,
            } => (Some(attracting), Some(repelling)),
            Fixed::Neutral(p, q) => (Some(p), Some(q)),
        };
        a.into_iter().chain(b)
    }
}

impl MoebiusMap {
    /// Normalizes to determinant one.  Fails when the determinant vanishes.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() <= TOL_DET {
            return Err(Error::DegenerateMatrix);
        }
        let s = det.sqrt();
        Ok(MoebiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
        .canonical_sign())
    }

    pub fn from_reals(entries: [[f64; 2]; 4]) -> Result<Self> {
        Self::new(
            Complex64::new(entries[0][0], entries[0][1]),
            Complex64::new(entries[1][0], entries[1][1]),
            Complex64::new(entries[2][0], entries[2][1]),
            Complex64::new(entries[3][0], entries[3][1]),
        )
    }

    pub fn identity() -> Self {
        MoebiusMap {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn translation(t: Complex64) -> Self {
        MoebiusMap {
            a: Complex64::new(1.0, 0.0),
            b: t,
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// z maps to k z, k nonzero.
    pub fn scaling(k: Complex64) -> Result<Self> {
        Self::new(
            k,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Fixes the sign ambiguity: the trace gets a non-negative real part,
    /// ties by non-negative imaginary part, and trace-zero maps defer to the
    /// first entry of largest modulus.
    #[must_use]
    pub fn canonical_sign(self) -> Self {
        let pick = |z: Complex64| -> i8 {
            if z.re > TOL_TR {
                1
            } else if z.re < -TOL_TR {
                -1
            } else if z.im > TOL_TR {
                1
            } else if z.im < -TOL_TR {
                -1
            } else {
                0
            }
        };
        let mut sign = pick(self.trace());
        if sign == 0 {
            for entry in [self.a, self.b, self.c, self.d] {
                let s = pick(entry);
                if s != 0 {
                    sign = s;
                    break;
                }
            }
        }
        if sign < 0 {
            MoebiusMap {
                a: -self.a,
                b: -self.b,
                c: -self.c,
                d: -self.d,
            }
        } else {
            self
        }
    }

    /// Inverse without renormalization: det stays one.
    #[must_use]
    pub fn inverse(&self) -> Self {
        MoebiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
        .canonical_sign()
    }

    /// Matrix product with drift correction on the determinant.
    #[must_use]
    pub fn compose(&self, other: &MoebiusMap) -> Self {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        let det = a * d - b * c;
        // Every entry pair here comes from det-one factors, so det is near
        // one; the sqrt keeps rounding from accumulating over long words.
        let s = det.sqrt();
        MoebiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
        .canonical_sign()
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let (num, den) = match p {
            SpherePoint::Finite(z) => (self.a * z + self.b, self.c * z + self.d),
            SpherePoint::Infinity => (self.a, self.c),
        };
        let dn = den.norm();
        if dn == 0.0 || num.norm() > dn * INF_CLAMP {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(num / den)
        }
    }

    /// Entry-wise agreement up to the sign quotient.
    pub fn same_action(&self, other: &MoebiusMap, tol: f64) -> bool {
        let diff = |s: &MoebiusMap, o: &MoebiusMap, sign: f64| -> f64 {
            let mut m: f64 = 0.0;
            for (x, y) in [
                (s.a, o.a),
                (s.b, o.b),
                (s.c, o.c),
                (s.d, o.d),
            ] {
                m = m.max((x - y * sign).norm());
            }
            m
        };
        diff(self, other, 1.0) <= tol || diff(self, other, -1.0) <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.same_action(&MoebiusMap::identity(), tol)
    }

    /// All entries real up to the given tolerance (honest PSL(2,R) input).
    pub fn is_real(&self, tol: f64) -> bool {
        let m = self.canonical_sign();
        math::abs(m.a.im) <= tol
            && math::abs(m.b.im) <= tol
            && math::abs(m.c.im) <= tol
            && math::abs(m.d.im) <= tol
    }

    /// Trace classification with fixed points.
    pub fn classify(&self) -> MapClass {
        let m = self.canonical_sign();
        if m.is_identity(TOL_TR) {
            return MapClass {
                kind: MapKind::Identity,
                fixed: Fixed::All,
            };
        }
        let t = m.trace();
        let t2 = t * t;
        let disc = t2 - Complex64::new(4.0, 0.0);
        if disc.norm() <= TOL_TR {
            // Parabolic: the quadratic degenerates to a double root.
            let p = if m.c.norm() > TOL_DET {
                clamp_point((m.a - m.d) / (m.c * 2.0))
            } else {
                SpherePoint::Infinity
            };
            return MapClass {
                kind: MapKind::Parabolic,
                fixed: Fixed::One(p),
            };
        }
        let (p, q) = m.two_fixed_points(disc);
        if math::abs(t.im) <= TOL_TR && t2.re < 4.0 {
            return MapClass {
                kind: MapKind::Elliptic,
                fixed: order_neutral(p, q),
            };
        }
        let kind = if math::abs(t.im) <= TOL_TR {
            MapKind::Hyperbolic
        } else {
            MapKind::Loxodromic
        };
        let (att, rep) = m.order_by_attraction(p, q);
        MapClass {
            kind,
            fixed: Fixed::Attracting {
                attracting: att,
                repelling: rep,
            },
        }
    }

    /// Both roots of c z^2 + (d-a) z - b = 0, degenerate c handled.
    fn two_fixed_points(&self, disc: Complex64) -> (SpherePoint, SpherePoint) {
        let s = disc.sqrt();
        if self.c.norm() > TOL_DET {
            let p = clamp_point((self.a - self.d + s) / (self.c * 2.0));
            let q = clamp_point((self.a - self.d - s) / (self.c * 2.0));
            (p, q)
        } else {
            // Affine map: infinity plus b/(d-a).
            let q = clamp_point(self.b / (self.d - self.a));
            (SpherePoint::Infinity, q)
        }
    }

    /// Derivative modulus at each fixed point decides attraction; ties fall
    /// back to a lexicographic order so the result stays deterministic.
    fn order_by_attraction(
        &self,
        p: SpherePoint,
        q: SpherePoint,
    ) -> (SpherePoint, SpherePoint) {
        let strength = |pt: SpherePoint| -> f64 {
            match pt {
                // |f'(z)| = |cz + d|^-2; at infinity the chart derivative is |a|^-2.
                SpherePoint::Finite(z) => (self.c * z + self.d).norm(),
                SpherePoint::Infinity => self.a.norm(),
            }
        };
        if strength(p) >= strength(q) {
            (p, q)
        } else {
            (q, p)
        }
    }

    /// Attracting fixed point for non-elliptic maps, single fixed point for
    /// parabolics, None for identity and elliptic.  This is the hot path of
    /// limit sampling, so it avoids building a full MapClass.
    pub fn limit_fixed_point(&self) -> Option<SpherePoint> {
        let m = self.canonical_sign();
        let t = m.trace();
        let t2 = t * t;
        let disc = t2 - Complex64::new(4.0, 0.0);
        if disc.norm() <= TOL_TR {
            if m.is_identity(TOL_TR) {
                return None;
            }
            let p = if m.c.norm() > TOL_DET {
                clamp_point((m.a - m.d) / (m.c * 2.0))
            } else {
                SpherePoint::Infinity
            };
            return Some(p);
        }
        if math::abs(t.im) <= TOL_TR && t2.re < 4.0 {
            return None;
        }
        let (p, q) = m.two_fixed_points(disc);
        Some(m.order_by_attraction(p, q).0)
    }

    /// Principal square root of the sphere action: `(f + I)/sqrt(tr f + 2)`
    /// after sign canonicalization.  The principal complex sqrt puts the
    /// result's trace in the closed right half plane with the boundary tie
    /// resolved upward, and the formula reduces to the Jordan form in the
    /// parabolic case.
    pub fn sqrt(&self) -> Result<Self> {
        let m = self.canonical_sign();
        if m.is_identity(TOL_TR) {
            return Ok(MoebiusMap::identity());
        }
        let t = m.trace();
        let s = (t + 2.0).sqrt();
        if s.norm() <= TOL_DET {
            // Unreachable for canonical-sign inputs (Re tr >= 0 keeps
            // |tr + 2| >= 2), kept as a guard for direct callers.
            return Err(Error::NoSquareRoot);
        }
        Ok(MoebiusMap {
            a: (m.a + 1.0) / s,
            b: m.b / s,
            c: m.c / s,
            d: (m.d + 1.0) / s,
        }
        .canonical_sign())
    }

    /// The other square root branch: the principal root composed with the
    /// half turn about the map's axis.  Only maps with two fixed points
    /// carry it; for a loxodromic f this branch adds a half rotation, which
    /// is the root that can interchange the two sides of an invariant
    /// curve.
    pub fn sqrt_rotated(&self) -> Result<Self> {
        let principal = self.sqrt()?;
        let class = self.classify();
        let (p, q) = match class.fixed {
            Fixed::Attracting {
                attracting,
                repelling,
            } => (attracting, repelling),
            Fixed::Neutral(p, q) => (p, q),
            _ => return Err(Error::NoSquareRoot),
        };
        let h = half_turn(p, q)?;
        Ok(principal.compose(&h).canonical_sign())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;

    fn mul(self, rhs: MoebiusMap) -> MoebiusMap {
        self.compose(&rhs)
    }
}

impl PartialEq for MoebiusMap {
    fn eq(&self, other: &Self) -> bool {
        self.same_action(other, TOL_DET * 10.0)
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:.4}{:+.4}i, {:.4}{:+.4}i], [{:.4}{:+.4}i, {:.4}{:+.4}i]]",
            self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im, self.d.re, self.d.im
        )
    }
}

fn clamp_point(z: Complex64) -> SpherePoint {
    if z.norm() > INF_CLAMP || !z.re.is_finite() || !z.im.is_finite() {
        SpherePoint::Infinity
    } else {
        SpherePoint::Finite(z)
    }
}

fn order_neutral(p: SpherePoint, q: SpherePoint) -> Fixed {
    // Deterministic unordered pair: finite before infinite, then lexicographic.
    let key = |pt: &SpherePoint| -> (u8, f64, f64) {
        match pt {
            SpherePoint::Finite(z) => (0, z.re, z.im),
            SpherePoint::Infinity => (1, 0.0, 0.0),
        }
    };
    let (kp, kq) = (key(&p), key(&q));
    if kp <= kq {
        Fixed::Neutral(p, q)
    } else {
        Fixed::Neutral(q, p)
    }
}

/// Elliptic involution fixing the two given points: conjugate of z -> -z.
pub fn half_turn(p: SpherePoint, q: SpherePoint) -> Result<MoebiusMap> {
    match (p, q) {
        (SpherePoint::Finite(zp), SpherePoint::Finite(zq)) => {
            if (zp - zq).norm() <= TOL_DET {
                return Err(Error::NoSquareRoot);
            }
            // T sends (p, q) to (0, inf); h = T^-1 diag(i, -i) T.
            let t = MoebiusMap::new(
                Complex64::new(1.0, 0.0),
                -zp,
                Complex64::new(1.0, 0.0),
                -zq,
            )?;
            let rot = MoebiusMap::new(
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
            )?;
            Ok(t.inverse().compose(&rot).compose(&t))
        }
        (SpherePoint::Finite(z0), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z0)) => {
            // z -> -z + 2 z0.
            MoebiusMap::new(
                Complex64::new(-1.0, 0.0),
                z0 * 2.0,
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            )
        }
        _ => Err(Error::NoSquareRoot),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn map(a: f64, b: f64, cc: f64, d: f64) -> MoebiusMap {
        MoebiusMap::new(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0)).unwrap()
    }

    #[test]
    fn compose_inverse_is_identity() {
        let a = map(1.0, 1.0, 1.0, 2.0);
        assert!(a.compose(&a.inverse()).is_identity(1e-12));
    }

    #[test]
    fn compose_translations_adds() {
        let t1 = MoebiusMap::translation(c(1.0, 0.0));
        let sum = t1.compose(&t1);
        let z = sum.apply(SpherePoint::finite(0.0, 0.0));
        assert!(z.approx_eq(&SpherePoint::finite(2.0, 0.0), 1e-12));
    }

    #[test]
    fn compose_scaling_then_translation() {
        // z -> 2z after z -> z+1 gives z -> 2z + 2.
        let f = MoebiusMap::scaling(c(2.0, 0.0)).unwrap();
        let g = MoebiusMap::translation(c(1.0, 0.0));
        let h = f.compose(&g);
        let z = h.apply(SpherePoint::finite(3.0, 0.0));
        assert!(z.approx_eq(&SpherePoint::finite(8.0, 0.0), 1e-12));
    }

    #[test]
    fn apply_handles_infinity_and_pole() {
        let t = MoebiusMap::translation(c(1.0, 0.0));
        assert!(t.apply(SpherePoint::Infinity).is_infinity());
        let s = MoebiusMap::scaling(c(2.0, 0.0)).unwrap();
        assert!(s
            .apply(SpherePoint::finite(3.0, 0.0))
            .approx_eq(&SpherePoint::finite(6.0, 0.0), 1e-12));
        // z -> -1/z sends the origin to infinity.
        let inv = MoebiusMap::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(inv.apply(SpherePoint::finite(0.0, 0.0)).is_infinity());
    }

    #[test]
    fn classify_parabolic_translation() {
        let t = MoebiusMap::translation(c(1.0, 0.0));
        let cl = t.classify();
        assert_eq!(cl.kind, MapKind::Parabolic);
        assert_eq!(cl.fixed, Fixed::One(SpherePoint::Infinity));
    }

    #[test]
    fn classify_hyperbolic_scaling() {
        let s = map(2.0, 0.0, 0.0, 0.5);
        let cl = s.classify();
        assert_eq!(cl.kind, MapKind::Hyperbolic);
        match cl.fixed {
            Fixed::Attracting {
                attracting,
                repelling,
            } => {
                assert!(attracting.is_infinity());
                assert!(repelling.approx_eq(&SpherePoint::finite(0.0, 0.0), 1e-12));
            }
            other => panic!("expected attracting pair, got {other:?}"),
        }
    }

    #[test]
    fn classify_elliptic_inversion() {
        // z -> -1/z has trace zero and fixes +-i.
        let e = MoebiusMap::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)).unwrap();
        let cl = e.classify();
        assert_eq!(cl.kind, MapKind::Elliptic);
        match cl.fixed {
            Fixed::Neutral(p, q) => {
                let i = SpherePoint::finite(0.0, 1.0);
                let mi = SpherePoint::finite(0.0, -1.0);
                assert!(
                    (p.approx_eq(&i, 1e-9) && q.approx_eq(&mi, 1e-9))
                        || (p.approx_eq(&mi, 1e-9) && q.approx_eq(&i, 1e-9))
                );
            }
            other => panic!("expected neutral pair, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_of_parabolic_is_half_translation() {
        let t = MoebiusMap::translation(c(1.0, 0.0));
        let r = t.sqrt().unwrap();
        assert!(r.same_action(&MoebiusMap::translation(c(0.5, 0.0)), 1e-12));
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = map(4.0, 0.0, 0.0, 0.25);
        let r = s.sqrt().unwrap();
        assert!(r.same_action(&map(2.0, 0.0, 0.0, 0.5), 1e-12));
    }

    #[test]
    fn sqrt_of_identity() {
        let r = MoebiusMap::identity().sqrt().unwrap();
        assert!(r.is_identity(1e-12));
    }

    #[test]
    fn sqrt_rotated_squares_back_and_swaps_sides() {
        let s = map(2.0, 0.0, 0.0, 0.5);
        let r = s.sqrt_rotated().unwrap();
        let sq = r.compose(&r);
        assert!(sq.same_action(&s, 1e-9));
        // The rotated branch of z -> 4z is z -> -2z: it exchanges the upper
        // and lower half planes.
        let img = r.apply(SpherePoint::finite(0.0, 1.0));
        match img {
            SpherePoint::Finite(z) => assert!(z.im < 0.0),
            _ => panic!("expected finite image"),
        }
    }

    #[test]
    fn chordal_examples() {
        let zero = SpherePoint::finite(0.0, 0.0);
        let one = SpherePoint::finite(1.0, 0.0);
        assert!((chordal_dist(zero, SpherePoint::Infinity) - 2.0).abs() < 1e-15);
        assert_eq!(chordal_dist(one, one), 0.0);
        assert!((chordal_dist(zero, one) - core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn chordal_matches_vec3_embedding() {
        let pts = [
            SpherePoint::finite(0.3, -1.2),
            SpherePoint::finite(5.0, 2.0),
            SpherePoint::Infinity,
            SpherePoint::finite(0.0, 0.0),
        ];
        for p in pts {
            for q in pts {
                let direct = chordal_dist(p, q);
                let vp = p.to_unit_vec3();
                let vq = q.to_unit_vec3();
                let emb = ((vp[0] - vq[0]).powi(2)
                    + (vp[1] - vq[1]).powi(2)
                    + (vp[2] - vq[2]).powi(2))
                .sqrt();
                assert!((direct - emb).abs() < 1e-12, "{p} {q}");
            }
        }
    }

    #[test]
    fn vec3_round_trip() {
        let pts = [
            SpherePoint::finite(0.25, -3.0),
            SpherePoint::finite(0.0, 0.0),
            SpherePoint::Infinity,
        ];
        for p in pts {
            let back = SpherePoint::from_unit_vec3(p.to_unit_vec3());
            assert!(chordal_dist(p, back) < 1e-12, "{p} vs {back}");
        }
    }

    #[test]
    fn real_circle_distance() {
        assert!(chordal_dist_to_real_circle(SpherePoint::finite(0.5, 0.0)) < 1e-12);
        assert!(chordal_dist_to_real_circle(SpherePoint::Infinity) < 1e-12);
        let d = chordal_dist_to_real_circle(SpherePoint::finite(0.0, 1.0));
        assert!((d - 2.0 / (2.0f64).sqrt()).abs() < 1e-12);
    }

    fn arb_map() -> impl Strategy<Value = MoebiusMap> {
        let entry = -3.0..3.0f64;
        (
            (entry.clone(), entry.clone()),
            (entry.clone(), entry.clone()),
            (entry.clone(), entry.clone()),
            (entry.clone(), entry),
        )
            .prop_filter_map("nondegenerate", |((ar, ai), (br, bi), (cr, ci), (dr, di))| {
                MoebiusMap::new(c(ar, ai), c(br, bi), c(cr, ci), c(dr, di)).ok()
            })
    }

    proptest! {
        #[test]
        fn det_stays_one_under_composition(f in arb_map(), g in arb_map(), h in arb_map()) {
            let m = f.compose(&g).compose(&h).compose(&f.inverse());
            prop_assert!((m.det() - c(1.0, 0.0)).norm() <= 1e-9);
        }

        #[test]
        fn classify_is_conjugation_invariant(f in arb_map(), h in arb_map()) {
            let conj = h.compose(&f).compose(&h.inverse());
            // Conjugation can push a borderline trace across the tolerance,
            // so skip maps that classify near the parabolic boundary.
            let t2 = f.trace() * f.trace();
            prop_assume!((t2 - c(4.0, 0.0)).norm() > 1e-4);
            prop_assume!(!f.is_identity(1e-6));
            prop_assume!(f.trace().im.abs() > 1e-4 || f.trace().im.abs() < 1e-9);
            prop_assert_eq!(conj.classify().kind, f.classify().kind);
        }

        #[test]
        fn fixed_points_are_fixed(f in arb_map()) {
            let class = f.classify();
            for p in class.fixed_points() {
                let q = f.apply(p);
                prop_assert!(chordal_dist(p, q) <= 1e-5, "{} moved to {}", p, q);
            }
        }

        #[test]
        fn sqrt_squares_to_input(f in arb_map()) {
            if let Ok(r) = f.sqrt() {
                prop_assert!(r.compose(&r).same_action(&f, 1e-7));
            }
        }

        #[test]
        fn chordal_symmetric_and_bounded(
            (x1, y1) in (-5.0..5.0f64, -5.0..5.0f64),
            (x2, y2) in (-5.0..5.0f64, -5.0..5.0f64),
        ) {
            let p = SpherePoint::finite(x1, y1);
            let q = SpherePoint::finite(x2, y2);
            let d = chordal_dist(p, q);
            prop_assert!((d - chordal_dist(q, p)).abs() < 1e-14);
            prop_assert!((0.0..=2.0).contains(&d));
        }
    }
}
