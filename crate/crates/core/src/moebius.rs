//! PSL(2,C) arithmetic: classification of isometries, complex translation
//! lengths, and the action on horoballs in upper half-space.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Default bound on `|ad - bc - 1|`.
pub const DET_TOLERANCE: f64 = 1e-10;
/// Trace and length comparisons.
pub const TRACE_TOLERANCE: f64 = 1e-9;

const ZERO_ENTRY: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// A determinant-one complex 2x2 matrix standing for an element of PSL(2,C).
///
/// The stored entries are one of the two SL(2,C) lifts; products of lifts are
/// lifts of products, so word evaluation keeps trace signs meaningful. Equality
/// and hashing go through [`ProjectiveMatrix::canonical`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProjectiveMatrix {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl ProjectiveMatrix {
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<Self> {
        Self::with_tolerance(a, b, c, d, DET_TOLERANCE)
    }

    pub fn with_tolerance(a: Complex, b: Complex, c: Complex, d: Complex, tol: f64) -> Result<Self> {
        let m = Self { a, b, c, d };
        if !m.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        let deviation = (m.det() - 1.0).norm();
        if deviation > tol {
            return Err(Error::MalformedMatrix { deviation });
        }
        Ok(m)
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(c64(a, 0.0), c64(b, 0.0), c64(c, 0.0), c64(d, 0.0))
    }

    /// Builds a matrix without checking the determinant. Callers guarantee it.
    pub(crate) fn raw(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Self { a, b, c, d }
    }

    /// Rescales by `1/sqrt(det)`; used on data whose determinant drifted through
    /// rounding (deserialization).
    pub fn renormalized(&self) -> Result<Self> {
        let det = self.det();
        if det.norm() < 1e-300 {
            return Err(Error::MalformedMatrix { deviation: 1.0 });
        }
        let s = det.sqrt().inv();
        Ok(Self::raw(self.a * s, self.b * s, self.c * s, self.d * s))
    }

    pub fn identity() -> Self {
        Self::raw(c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0))
    }

    /// Diagonal matrix `diag(e^{s/2}, e^{-s/2})`: translation by `s` along the imaginary axis.
    pub fn axial_translation(s: f64) -> Self {
        let h = (0.5 * s).exp();
        Self::raw(c64(h, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0 / h, 0.0))
    }

    /// The order-two rotation `z -> -1/z` about `i`.
    pub fn half_turn() -> Self {
        Self::raw(c64(0.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0))
    }

    /// `z -> z + t`.
    pub fn translation(t: Complex) -> Self {
        Self::raw(c64(1.0, 0.0), t, c64(0.0, 0.0), c64(1.0, 0.0))
    }

    /// `z -> s z` for real `s > 0`.
    pub fn dilation(s: f64) -> Self {
        let h = s.sqrt();
        Self::raw(c64(h, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0 / h, 0.0))
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex {
        self.a + self.d
    }

    pub fn trace_squared(&self) -> Complex {
        let t = self.trace();
        t * t
    }

    pub fn inverse(&self) -> Self {
        Self::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn negated(&self) -> Self {
        Self::raw(-self.a, -self.b, -self.c, -self.d)
    }

    /// `n * self * n^{-1}`.
    pub fn conjugated_by(&self, n: &ProjectiveMatrix) -> Self {
        *n * *self * n.inverse()
    }

    /// Sum of squared moduli of the entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Hyperbolic distance that the element moves the basepoint `(0, 1)` of upper half-space.
    pub fn basepoint_displacement(&self) -> f64 {
        (0.5 * self.frobenius_sq()).max(1.0).acosh()
    }

    /// Sign-normalized lift: the first non-negligible entry (row-major) has
    /// argument in `(-pi/2, pi/2]`.
    pub fn canonical(&self) -> Self {
        if self.leading_sign_negative() {
            self.negated()
        } else {
            *self
        }
    }

    fn leading_sign_negative(&self) -> bool {
        for z in self.entries() {
            let n = z.norm();
            if n <= ZERO_ENTRY {
                continue;
            }
            return if z.re.abs() > ZERO_ENTRY * n { z.re < 0.0 } else { z.im < 0.0 };
        }
        false
    }

    /// Entrywise comparison modulo the global sign.
    pub fn approx_eq(&self, other: &ProjectiveMatrix, tol: f64) -> bool {
        let same = self.max_entry_diff(other);
        let flipped = self.max_entry_diff(&other.negated());
        same.min(flipped) <= tol
    }

    fn max_entry_diff(&self, other: &ProjectiveMatrix) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// True when the matrix is `+-I` within `tol` entrywise.
    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Self::identity(), tol)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.entries().iter().all(|z| z.im.abs() <= tol)
    }

    /// Action on the Riemann sphere; `None` encodes infinity.
    pub fn act(&self, z: Option<Complex>) -> Option<Complex> {
        match z {
            None => {
                if self.c.norm() <= ZERO_ENTRY * self.scale() {
                    None
                } else {
                    Some(self.a / self.c)
                }
            }
            Some(z) => {
                let den = self.c * z + self.d;
                if den.norm() <= ZERO_ENTRY * self.scale() * (1.0 + z.norm()) {
                    None
                } else {
                    Some((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Action on upper half-space, points written `(z, t)` with `t > 0`.
    pub fn act_on_point(&self, p: HalfSpacePoint) -> HalfSpacePoint {
        let czd = self.c * p.z + self.d;
        let den = czd.norm_sqr() + self.c.norm_sqr() * p.t * p.t;
        let num = (self.a * p.z + self.b) * czd.conj() + self.a * self.c.conj() * (p.t * p.t);
        HalfSpacePoint { z: num / den, t: p.t / den }
    }

    /// Fixed points on the sphere at infinity (one for parabolics, two otherwise).
    pub fn fixed_points(&self) -> Vec<Option<Complex>> {
        let scale = self.scale();
        if self.c.norm() <= ZERO_ENTRY * scale {
            // Upper triangular: infinity is fixed, and b/(d - a) when a != d.
            let diff = self.d - self.a;
            if diff.norm() <= 1e-9 * scale {
                return vec![None];
            }
            return vec![None, Some(self.b / diff)];
        }
        let disc = (self.trace_squared() - 4.0).sqrt();
        let amd = self.a - self.d;
        let two_c = self.c * 2.0;
        if disc.norm() <= 1e-9 * scale {
            return vec![Some(amd / two_c)];
        }
        vec![Some((amd + disc) / two_c), Some((amd - disc) / two_c)]
    }

    fn scale(&self) -> f64 {
        self.frobenius_sq().sqrt().max(1.0)
    }
}

impl Mul for ProjectiveMatrix {
    type Output = ProjectiveMatrix;

    fn mul(self, o: ProjectiveMatrix) -> ProjectiveMatrix {
        ProjectiveMatrix::raw(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Mul for &ProjectiveMatrix {
    type Output = ProjectiveMatrix;

    fn mul(self, o: &ProjectiveMatrix) -> ProjectiveMatrix {
        *self * *o
    }
}

impl fmt::Display for ProjectiveMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// A point `(z, t)` of upper half-space, `t > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfSpacePoint {
    pub z: Complex,
    pub t: f64,
}

impl HalfSpacePoint {
    pub const BASEPOINT: HalfSpacePoint = HalfSpacePoint { z: Complex::new(0.0, 0.0), t: 1.0 };

    pub fn distance(&self, other: &HalfSpacePoint) -> f64 {
        let num = (self.z - other.z).norm_sqr() + (self.t - other.t).powi(2);
        (1.0 + num / (2.0 * self.t * other.t)).acosh()
    }
}

/// Complex translation length of a loxodromic element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexLength {
    pub length: f64,
    /// Radians in `(-pi, pi]`.
    pub rotation: f64,
}

impl ComplexLength {
    pub fn as_complex(&self) -> Complex {
        c64(self.length, self.rotation)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IsometryKind {
    Identity,
    /// Rotation angle in `(0, pi]`.
    Elliptic(f64),
    Parabolic,
    Loxodromic(ComplexLength),
}

impl IsometryKind {
    pub fn is_loxodromic(&self) -> bool {
        matches!(self, IsometryKind::Loxodromic(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            IsometryKind::Identity => "identity",
            IsometryKind::Elliptic(_) => "elliptic",
            IsometryKind::Parabolic => "parabolic",
            IsometryKind::Loxodromic(_) => "loxodromic",
        }
    }
}

fn check_det(m: &ProjectiveMatrix) -> Result<()> {
    let deviation = (m.det() - 1.0).norm();
    if deviation > DET_TOLERANCE * m.frobenius_sq().max(1.0) || !deviation.is_finite() {
        return Err(Error::MalformedMatrix { deviation });
    }
    Ok(())
}

/// Trace trichotomy. The parabolic test combines `|tr^2 - 4|` with the distance from `+-I`,
/// since the trace alone cannot tell the identity from a parabolic.
pub fn classify(m: &ProjectiveMatrix) -> Result<IsometryKind> {
    check_det(m)?;
    let tol = TRACE_TOLERANCE * (0.5 * m.frobenius_sq()).max(1.0);
    let t2 = m.trace_squared();
    if (t2 - 4.0).norm() <= tol {
        return Ok(if m.is_identity(TRACE_TOLERANCE) {
            IsometryKind::Identity
        } else {
            IsometryKind::Parabolic
        });
    }
    if t2.im.abs() <= tol && t2.re >= -tol && t2.re < 4.0 {
        let half = 0.5 * t2.re.max(0.0).sqrt();
        return Ok(IsometryKind::Elliptic(2.0 * half.min(1.0).acos()));
    }
    Ok(IsometryKind::Loxodromic(loxodromic_length(m)))
}

/// `2 * arccosh(tr/2)` with the branch giving positive real part, rotation folded into `(-pi, pi]`.
pub fn complex_length(m: &ProjectiveMatrix) -> Result<ComplexLength> {
    match classify(m)? {
        IsometryKind::Loxodromic(l) => Ok(l),
        other => Err(Error::NotLoxodromic(other.name().to_string())),
    }
}

fn loxodromic_length(m: &ProjectiveMatrix) -> ComplexLength {
    let t = m.trace() * 0.5;
    let s = (t * t - 1.0).sqrt();
    let (p, q) = (t + s, t - s);
    let lambda = if p.norm() >= q.norm() { p } else { q };
    let length = 2.0 * lambda.norm().ln();
    ComplexLength { length, rotation: fold_angle(2.0 * lambda.arg()) }
}

/// Reduces an angle into `(-pi, pi]`.
pub fn fold_angle(mut x: f64) -> f64 {
    x %= 2.0 * PI;
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// A horoball in upper half-space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Horoball {
    /// Everything above the horizontal plane at `height`.
    AtInfinity { height: f64 },
    /// A Euclidean ball tangent to the boundary plane at `center`.
    Finite { center: Complex, diameter: f64 },
}

impl Horoball {
    pub fn at_infinity(height: f64) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() {
            return Err(Error::InvalidArgument(format!("horoball height {height} must be positive")));
        }
        Ok(Horoball::AtInfinity { height })
    }

    pub fn finite(center: Complex, diameter: f64) -> Result<Self> {
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(Error::InvalidArgument(format!("horoball diameter {diameter} must be positive")));
        }
        if !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::NonFinite("horoball center"));
        }
        Ok(Horoball::Finite { center, diameter })
    }

    pub fn ideal_point(&self) -> Option<Complex> {
        match self {
            Horoball::AtInfinity { .. } => None,
            Horoball::Finite { center, .. } => Some(*center),
        }
    }
}

/// Image of a horoball under the Moebius action. A ball at `z0` of diameter `D`
/// goes to a ball at `m(z0)` of diameter `D / |c z0 + d|^2`; the height-`h` ball at
/// infinity goes to a ball at `a/c` of diameter `1 / (|c|^2 h)`.
pub fn apply_to_horoball(m: &ProjectiveMatrix, h: &Horoball) -> Result<Horoball> {
    check_det(m)?;
    let scale = m.frobenius_sq().sqrt().max(1.0);
    match *h {
        Horoball::AtInfinity { height } => {
            if m.c.norm() <= ZERO_ENTRY * scale {
                Ok(Horoball::AtInfinity { height: height * m.a.norm_sqr() })
            } else {
                Ok(Horoball::Finite { center: m.a / m.c, diameter: 1.0 / (m.c.norm_sqr() * height) })
            }
        }
        Horoball::Finite { center, diameter } => {
            let den = m.c * center + m.d;
            if den.norm() <= ZERO_ENTRY * scale * (1.0 + center.norm()) {
                Ok(Horoball::AtInfinity { height: 1.0 / (m.c.norm_sqr() * diameter) })
            } else {
                Ok(Horoball::Finite { center: (m.a * center + m.b) / den, diameter: diameter / den.norm_sqr() })
            }
        }
    }
}

/// Signed hyperbolic distance between horoballs: zero at tangency, negative on overlap.
pub fn horoball_distance(h1: &Horoball, h2: &Horoball) -> Result<f64> {
    match (*h1, *h2) {
        (Horoball::AtInfinity { .. }, Horoball::AtInfinity { .. }) => Err(Error::SameIdealPoint),
        (Horoball::AtInfinity { height }, Horoball::Finite { diameter, .. })
        | (Horoball::Finite { diameter, .. }, Horoball::AtInfinity { height }) => Ok((height / diameter).ln()),
        (Horoball::Finite { center: z1, diameter: d1 }, Horoball::Finite { center: z2, diameter: d2 }) => {
            let sep = (z1 - z2).norm_sqr();
            if sep <= 1e-24 * (1.0 + z1.norm_sqr()) {
                return Err(Error::SameIdealPoint);
            }
            Ok((sep / (d1 * d2)).ln())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: f64, b: f64, c: f64, d: f64) -> ProjectiveMatrix {
        ProjectiveMatrix::real(a, b, c, d).unwrap()
    }

    #[test]
    fn classify_basic_cases() {
        assert_eq!(classify(&ProjectiveMatrix::identity()).unwrap(), IsometryKind::Identity);
        assert_eq!(classify(&m(-1.0, 0.0, 0.0, -1.0)).unwrap(), IsometryKind::Identity);
        assert_eq!(classify(&m(1.0, 1.0, 0.0, 1.0)).unwrap(), IsometryKind::Parabolic);
        assert_eq!(classify(&m(-1.0, 3.0, 0.0, -1.0)).unwrap(), IsometryKind::Parabolic);
        match classify(&m(2.0, 0.0, 0.0, 0.5)).unwrap() {
            IsometryKind::Loxodromic(l) => {
                assert!((l.length - 2.0 * 1.25f64.acosh()).abs() < 1e-12);
                assert_eq!(l.rotation, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        match classify(&ProjectiveMatrix::half_turn()).unwrap() {
            IsometryKind::Elliptic(theta) => assert!((theta - PI).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_matrix_is_rejected() {
        assert!(matches!(ProjectiveMatrix::real(1.0, 1.0, 1.0, 1.0), Err(Error::MalformedMatrix { .. })));
        let bad = ProjectiveMatrix::raw(c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(2.0, 0.0));
        assert!(matches!(classify(&bad), Err(Error::MalformedMatrix { .. })));
    }

    #[test]
    fn complex_length_examples() {
        let e = std::f64::consts::E;
        let l = complex_length(&m(e, 0.0, 0.0, 1.0 / e)).unwrap();
        assert!((l.length - 2.0).abs() < 1e-12 && l.rotation == 0.0);

        let l = complex_length(&m(3.0, -1.0, 1.0, 0.0)).unwrap();
        let expected = 2.0 * ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((l.length - expected).abs() < 1e-12);
        assert!((l.length - 1.9248473).abs() < 1e-7);

        let l = complex_length(&m(5.0, 2.0, 2.0, 1.0)).unwrap();
        let expected = 2.0 * (3.0 + 2.0 * 2f64.sqrt()).ln();
        assert!((l.length - expected).abs() < 1e-12);
        assert!((l.length - 3.5254943).abs() < 1e-7);

        // negative trace: same element of PSL
        let l2 = complex_length(&m(-5.0, -2.0, -2.0, -1.0)).unwrap();
        assert!((l2.length - l.length).abs() < 1e-14 && l2.rotation == 0.0);
    }

    #[test]
    fn complex_length_with_rotation() {
        // diag(lambda, 1/lambda) with lambda = e^{(1 + i)/2}: length 1, rotation 1
        let lam = c64(0.5, 0.5).exp();
        let g = ProjectiveMatrix::new(lam, c64(0.0, 0.0), c64(0.0, 0.0), lam.inv()).unwrap();
        let l = complex_length(&g).unwrap();
        assert!((l.length - 1.0).abs() < 1e-12);
        assert!((l.rotation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_length_rejects_non_loxodromic() {
        assert!(matches!(complex_length(&m(1.0, 1.0, 0.0, 1.0)), Err(Error::NotLoxodromic(_))));
        assert!(matches!(complex_length(&ProjectiveMatrix::identity()), Err(Error::NotLoxodromic(_))));
    }

    #[test]
    fn canonical_sign() {
        let g = m(-2.0, 1.0, -1.0, 0.0);
        let c = g.canonical();
        assert!(c.a.re > 0.0);
        assert!(c.approx_eq(&g, 0.0));
        let h = m(0.0, -1.0, 1.0, 0.0).canonical();
        assert!(h.b.re > 0.0);
    }

    #[test]
    fn horoball_action_examples() {
        let top = Horoball::at_infinity(1.0).unwrap();
        assert_eq!(apply_to_horoball(&ProjectiveMatrix::identity(), &top).unwrap(), top);
        match apply_to_horoball(&m(0.0, -1.0, 1.0, 0.0), &top).unwrap() {
            Horoball::Finite { center, diameter } => {
                assert!(center.norm() < 1e-15);
                assert!((diameter - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        match apply_to_horoball(&m(1.0, 0.0, 2.0, 1.0), &top).unwrap() {
            Horoball::Finite { center, diameter } => {
                assert!((center - c64(0.5, 0.0)).norm() < 1e-15);
                assert!((diameter - 0.25).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        // ball mapped back to infinity
        let ball = Horoball::finite(c64(0.5, 0.0), 0.25).unwrap();
        let back = apply_to_horoball(&m(1.0, 0.0, -2.0, 1.0), &ball).unwrap();
        match back {
            Horoball::AtInfinity { height } => assert!((height - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horoball_distance_examples() {
        let top = Horoball::at_infinity(1.0).unwrap();
        let full = Horoball::finite(c64(0.3, -2.0), 1.0).unwrap();
        assert!(horoball_distance(&top, &full).unwrap().abs() < 1e-15);
        let small = Horoball::finite(c64(7.0, 1.0), 0.75).unwrap();
        assert!((horoball_distance(&top, &small).unwrap() - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        let b0 = Horoball::finite(c64(0.0, 0.0), 1.0).unwrap();
        let b1 = Horoball::finite(c64(1.0, 0.0), 1.0).unwrap();
        assert!(horoball_distance(&b0, &b1).unwrap().abs() < 1e-15);
        assert_eq!(horoball_distance(&top, &top), Err(Error::SameIdealPoint));
        assert_eq!(horoball_distance(&b0, &b0), Err(Error::SameIdealPoint));
    }

    #[test]
    fn half_space_action_preserves_distance() {
        // det [[1+i, 2], [1/2, 0]] = -1, so scale every entry by i
        let i = c64(0.0, 1.0);
        let g = ProjectiveMatrix::new(c64(1.0, 1.0) * i, c64(2.0, 0.0) * i, c64(0.5, 0.0) * i, c64(0.0, 0.0))
            .unwrap();
        let p = HalfSpacePoint { z: c64(0.3, 0.2), t: 0.7 };
        let q = HalfSpacePoint { z: c64(-1.0, 0.5), t: 2.0 };
        let d0 = p.distance(&q);
        let d1 = g.act_on_point(p).distance(&g.act_on_point(q));
        assert!((d0 - d1).abs() < 1e-12);
        let dj = HalfSpacePoint::BASEPOINT.distance(&g.act_on_point(HalfSpacePoint::BASEPOINT));
        assert!((dj - g.basepoint_displacement()).abs() < 1e-12);
    }
}
