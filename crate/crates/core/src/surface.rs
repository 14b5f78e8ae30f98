//! Marked Fuchsian groups: pairs of pants, genus-two surfaces glued from two
//! one-holed tori, Fenchel-Nielsen twisting along the separating curve, and the
//! hyper-elliptic involution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{c64, classify, IsometryKind, ProjectiveMatrix};
use crate::word::{letter_matrices, Word};

/// Relators must evaluate to `+-I`, peripherals to parabolics, within this.
pub const GROUP_TOLERANCE: f64 = 1e-8;

/// An involution of the surface realized by conjugation: `matrix * rho(x) * matrix^{-1}`
/// equals `rho(images[x])` for every generator `x`.
#[derive(Clone, Debug)]
pub struct Involution {
    pub matrix: ProjectiveMatrix,
    pub images: Vec<Word>,
}

/// Topological type `(genus, punctures or boundary components)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub genus: u32,
    pub punctures: u32,
}

impl Signature {
    pub fn new(genus: u32, punctures: u32) -> Self {
        Signature { genus, punctures }
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.punctures as i64
    }

    pub fn complexity(&self) -> i64 {
        3 * self.genus as i64 + self.punctures as i64 - 3
    }
}

/// Parameters a group was built from. Documents store them so that a group read
/// back from rounded decimals can be rebuilt with exact relators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Construction {
    Pants { cusped: bool, boundary_lengths: [f64; 3] },
    Genus2(FenchelNielsenGenus2),
}

impl Construction {
    pub fn build(&self) -> Result<MarkedGroup> {
        match self {
            Construction::Pants { cusped, boundary_lengths } => pants_group(*cusped, *boundary_lengths),
            Construction::Genus2(fnc) => genus2_from_fn(fnc),
        }
    }
}

/// A finitely generated Fuchsian or Kleinian group with a marking.
#[derive(Clone, Debug)]
pub struct MarkedGroup {
    generators: Vec<ProjectiveMatrix>,
    labels: Vec<String>,
    peripheral: Vec<Word>,
    relators: Vec<Word>,
    signature: Signature,
    involution: Option<Involution>,
    table: Vec<ProjectiveMatrix>,
    construction: Option<Construction>,
}

impl MarkedGroup {
    /// Validates every declared relator and peripheral word.
    pub fn new(
        generators: Vec<ProjectiveMatrix>,
        labels: Vec<String>,
        peripheral: Vec<Word>,
        relators: Vec<Word>,
        signature: Signature,
        involution: Option<Involution>,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("a marked group needs at least one generator".into()));
        }
        if labels.len() != generators.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} generators",
                labels.len(),
                generators.len()
            )));
        }
        if signature.euler_characteristic() >= 0 {
            return Err(Error::NotHyperbolic(signature.euler_characteristic()));
        }
        let table = letter_matrices(&generators);
        let group = MarkedGroup { generators, labels, peripheral, relators, signature, involution, table, construction: None };
        group.validate()?;
        Ok(group)
    }

    fn validate(&self) -> Result<()> {
        let rank = self.rank();
        let check_range = |w: &Word| -> Result<()> {
            match w.max_generator() {
                Some(g) if g >= rank => Err(Error::InvalidWord(format!("{w} uses generator {} of {rank}", g + 1))),
                _ => Ok(()),
            }
        };
        for w in &self.relators {
            check_range(w)?;
            let m = self.evaluate(w);
            if !m.is_identity(GROUP_TOLERANCE * m.frobenius_sq().sqrt().max(1.0)) {
                return Err(Error::InvalidWord(format!("relator {w} does not evaluate to the identity")));
            }
        }
        for w in &self.peripheral {
            check_range(w)?;
            if !is_parabolic(&self.evaluate(w)) {
                return Err(Error::InvalidWord(format!("peripheral word {w} is not parabolic")));
            }
        }
        if let Some(inv) = &self.involution {
            if inv.images.len() != rank {
                return Err(Error::InvalidArgument("involution needs one image per generator".into()));
            }
            for (i, img) in inv.images.iter().enumerate() {
                check_range(img)?;
                let lhs = self.generators[i].conjugated_by(&inv.matrix);
                let rhs = self.evaluate(img);
                if !lhs.approx_eq(&rhs, GROUP_TOLERANCE * lhs.frobenius_sq().sqrt().max(1.0)) {
                    return Err(Error::InvalidArgument(format!(
                        "involution image of generator {} is inconsistent",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[ProjectiveMatrix] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn peripheral(&self) -> &[Word] {
        &self.peripheral
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn involution(&self) -> Option<&Involution> {
        self.involution.as_ref()
    }

    pub fn construction(&self) -> Option<&Construction> {
        self.construction.as_ref()
    }

    fn built_from(mut self, c: Construction) -> Self {
        self.construction = Some(c);
        self
    }

    pub fn is_free(&self) -> bool {
        self.relators.is_empty()
    }

    /// Generators and inverses, indexed by letter code.
    pub fn letter_table(&self) -> &[ProjectiveMatrix] {
        &self.table
    }

    pub fn evaluate(&self, w: &Word) -> ProjectiveMatrix {
        w.evaluate_with(&self.table)
    }

    /// The same marking after conjugating every generator by `n`.
    pub fn conjugated(&self, n: &ProjectiveMatrix) -> Result<Self> {
        let generators = self.generators.iter().map(|g| g.conjugated_by(n)).collect();
        let involution = self.involution.as_ref().map(|inv| Involution {
            matrix: inv.matrix.conjugated_by(n),
            images: inv.images.clone(),
        });
        MarkedGroup::new(
            generators,
            self.labels.clone(),
            self.peripheral.clone(),
            self.relators.clone(),
            self.signature,
            involution,
        )
    }

    /// Subgroup generated by a subset of the generators, as a free marked group.
    pub fn sub_free_group(&self, indices: &[usize], signature: Signature) -> Result<Self> {
        let generators = indices.iter().map(|&i| self.generators[i]).collect();
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        MarkedGroup::new(generators, labels, Vec::new(), Vec::new(), signature, None)
    }
}

fn is_parabolic(m: &ProjectiveMatrix) -> bool {
    let tol = GROUP_TOLERANCE * (0.5 * m.frobenius_sq()).max(1.0);
    (m.trace_squared() - 4.0).norm() <= tol && !m.is_identity(GROUP_TOLERANCE)
}

/// Pair of pants. With `cusp_case` all three ends are cusps and the group is the
/// level-two congruence subgroup `<[[1,2],[0,1]], [[1,0],[-2,1]]>`; otherwise the
/// boundary curves `A`, `B`, `(AB)^{-1}` are geodesics of the given lengths.
pub fn pants_group(cusp_case: bool, boundary_lengths: [f64; 3]) -> Result<MarkedGroup> {
    let labels = vec!["A".to_string(), "B".to_string()];
    if cusp_case {
        if boundary_lengths.iter().any(|&l| l != 0.0) {
            return Err(Error::InvalidBoundaryData("cusped pants require zero boundary lengths".into()));
        }
        let a = ProjectiveMatrix::real(1.0, 2.0, 0.0, 1.0)?;
        let b = ProjectiveMatrix::real(1.0, 0.0, -2.0, 1.0)?;
        let peripheral = vec![Word::from_signed(&[1])?, Word::from_signed(&[2])?, Word::from_signed(&[1, 2])?];
        return Ok(MarkedGroup::new(vec![a, b], labels, peripheral, Vec::new(), Signature::new(0, 3), None)?
            .built_from(Construction::Pants { cusped: true, boundary_lengths }));
    }
    if boundary_lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidBoundaryData(format!(
            "geodesic boundary lengths must all be positive, got {boundary_lengths:?}"
        )));
    }
    let [l1, l2, l3] = boundary_lengths;
    let y = -2.0 * (0.5 * l2).cosh();
    let z = -2.0 * (0.5 * l3).cosh();
    // A = -diag(e^{l1/2}, e^{-l1/2}) translates up the imaginary axis.
    let e = (0.5 * l1).exp();
    let a = ProjectiveMatrix::real(-e, 0.0, 0.0, -1.0 / e)?;
    // B = [[p, q], [r, s]] with p + s = y and tr(AB) = -(e p + s / e) = z.
    let p = (-z - y / e) / (e - 1.0 / e);
    let s = y - p;
    let qr = p * s - 1.0;
    let r = qr.abs().sqrt();
    let q = if r > 0.0 { qr / r } else { 0.0 };
    let b = ProjectiveMatrix::real(p, q, r, s)?;
    Ok(MarkedGroup::new(vec![a, b], labels, Vec::new(), Vec::new(), Signature::new(0, 3), None)?
        .built_from(Construction::Pants { cusped: false, boundary_lengths }))
}

/// Genus-two coordinates: two one-holed tori with trace triples `(tr A, tr B, tr AB)`
/// glued along the separating geodesic of length `separating_length` with a twist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FenchelNielsenGenus2 {
    pub handle1: [f64; 3],
    pub handle2: [f64; 3],
    pub separating_length: f64,
    pub twist: f64,
}

/// `tr [A, B]` for a pair with `(tr A, tr B, tr AB) = (x, y, z)`.
pub fn commutator_trace([x, y, z]: [f64; 3]) -> f64 {
    x * x + y * y + z * z - x * y * z - 2.0
}

impl FenchelNielsenGenus2 {
    /// Both handles carry the triple `(x, x, x)` fixed by the separating length.
    pub fn symmetric(separating_length: f64, twist: f64) -> Result<Self> {
        let x = symmetric_handle_trace(separating_length)?;
        Ok(FenchelNielsenGenus2 { handle1: [x; 3], handle2: [x; 3], separating_length, twist })
    }

    /// Solves for `tr AB` (the larger root) given `tr A` and `tr B` on each handle.
    pub fn from_handle_traces(h1: [f64; 2], h2: [f64; 2], separating_length: f64, twist: f64) -> Result<Self> {
        let z1 = solve_third_trace(h1[0], h1[1], separating_length)?;
        let z2 = solve_third_trace(h2[0], h2[1], separating_length)?;
        Ok(FenchelNielsenGenus2 {
            handle1: [h1[0], h1[1], z1],
            handle2: [h2[0], h2[1], z2],
            separating_length,
            twist,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separating_length > 0.0) || !self.separating_length.is_finite() {
            return Err(Error::IncompatibleTraces(format!(
                "separating length {} must be positive",
                self.separating_length
            )));
        }
        if !self.twist.is_finite() {
            return Err(Error::IncompatibleTraces("twist must be finite".into()));
        }
        let target = -2.0 * (0.5 * self.separating_length).cosh();
        for (i, t) in [self.handle1, self.handle2].iter().enumerate() {
            if !(t[0] > 2.0 && t[1] > 2.0 && t[2] > 2.0) {
                return Err(Error::IncompatibleTraces(format!("handle {} traces {t:?} must exceed 2", i + 1)));
            }
            let ct = commutator_trace(*t);
            if (ct - target).abs() > 1e-8 {
                return Err(Error::IncompatibleTraces(format!(
                    "handle {}: commutator trace {ct} differs from {target}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

fn symmetric_handle_trace(separating_length: f64) -> Result<f64> {
    if !(separating_length > 0.0) {
        return Err(Error::IncompatibleTraces("separating length must be positive".into()));
    }
    // 3x^2 - x^3 - 2 = -2 cosh(l/2) has exactly one root above 3 for l > 0.
    let target = -2.0 * (0.5 * separating_length).cosh();
    let f = |x: f64| 3.0 * x * x - x * x * x - 2.0 - target;
    let (mut lo, mut hi) = (3.0, 4.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn solve_third_trace(x: f64, y: f64, separating_length: f64) -> Result<f64> {
    if !(x > 2.0 && y > 2.0) {
        return Err(Error::IncompatibleTraces(format!("handle traces ({x}, {y}) must exceed 2")));
    }
    let cst = x * x + y * y - 2.0 + 2.0 * (0.5 * separating_length).cosh();
    let disc = x * x * y * y - 4.0 * cst;
    if disc < 0.0 {
        return Err(Error::IncompatibleTraces(format!(
            "no real tr(AB) for traces ({x}, {y}) and length {separating_length}"
        )));
    }
    Ok(0.5 * (x * y + disc.sqrt()))
}

/// One handle in normal form: `[A, B]` is `diag(mu, 1/mu)` with `mu = -e^{l/2}`, so
/// the separating geodesic is the imaginary axis traversed upwards, and the
/// involution inverting `A` and `B` fixes a point on the unit circle.
struct Handle {
    a: ProjectiveMatrix,
    b: ProjectiveMatrix,
    involution: ProjectiveMatrix,
}

fn build_handle([x, y, z]: [f64; 3]) -> Result<Handle> {
    let lam = 0.5 * (x + (x * x - 4.0).sqrt());
    let a0 = ProjectiveMatrix::real(lam, 0.0, 0.0, 1.0 / lam)?;
    let p = (z - y / lam) / (lam - 1.0 / lam);
    let s = y - p;
    let b0 = ProjectiveMatrix::real(p, p * s - 1.0, 1.0, s)?;
    let k = a0 * b0 * a0.inverse() * b0.inverse();

    let tr = k.trace().re;
    let disc = (tr * tr - 4.0).max(0.0).sqrt();
    let mu_big = 0.5 * (tr - disc); // |mu_big| > 1 since tr < -2
    let mu_small = 0.5 * (tr + disc);
    let (k11, k12, k21, k22) = (k.a.re, k.b.re, k.c.re, k.d.re);
    let eigvec = |mu: f64| -> (f64, f64) {
        let u = (k12, mu - k11);
        let v = (mu - k22, k21);
        if u.0.hypot(u.1) >= v.0.hypot(v.1) {
            u
        } else {
            v
        }
    };
    let v1 = eigvec(mu_big);
    let mut v2 = eigvec(mu_small);
    let mut det = v1.0 * v2.1 - v2.0 * v1.1;
    if det < 0.0 {
        v2 = (-v2.0, -v2.1);
        det = -det;
    }
    let sc = det.sqrt();
    let n = ProjectiveMatrix::real(v1.0 / sc, v2.0 / sc, v1.1 / sc, v2.1 / sc)?;
    let ninv = n.inverse();
    let a1 = a0.conjugated_by(&ninv);
    let b1 = b0.conjugated_by(&ninv);

    let e = involution_of_pair(&a1, &b1)?;
    // Rescale z -> sigma z so the involution's fixed point lies on the unit circle.
    let fixed = upper_fixed_point(&e)
        .ok_or_else(|| Error::IncompatibleTraces("handle involution has no interior fixed point".into()))?;
    let dil = ProjectiveMatrix::dilation(1.0 / fixed.norm());
    Ok(Handle { a: a1.conjugated_by(&dil), b: b1.conjugated_by(&dil), involution: e.conjugated_by(&dil).canonical() })
}

/// The order-two element `E` with `E A E^{-1} = A^{-1}` and `E B E^{-1} = B^{-1}`,
/// namely `(AB - BA)` scaled to determinant one.
fn involution_of_pair(a: &ProjectiveMatrix, b: &ProjectiveMatrix) -> Result<ProjectiveMatrix> {
    let ab = *a * *b;
    let ba = *b * *a;
    let raw = ProjectiveMatrix { a: ab.a - ba.a, b: ab.b - ba.b, c: ab.c - ba.c, d: ab.d - ba.d };
    raw.renormalized()
}

fn upper_fixed_point(e: &ProjectiveMatrix) -> Option<num_complex::Complex64> {
    e.fixed_points().into_iter().flatten().find(|z| z.im > 0.0).or_else(|| {
        // Real matrices with trace 0 have conjugate fixed points; pick the upper one.
        e.fixed_points().into_iter().flatten().map(|z| c64(z.re, z.im.abs())).find(|z| z.im > 0.0)
    })
}

/// Images of `A1, B1, A2, B2` under the hyper-elliptic involution, in the normal form
/// built by [`genus2_from_fn`]. The same words serve every twist parameter.
fn genus2_involution_images() -> Vec<Word> {
    [&[-1][..], &[-2], &[-2, -1, -3, 2, 1], &[-1, -2, -4, 1, 2]]
        .iter()
        .map(|s| Word::from_signed(s).expect("static word"))
        .collect()
}

/// Genus-two marked group with generators `A1, B1, A2, B2` and relator `[A1,B1][A2,B2]`.
/// The separating curve `[A1,B1]` has the imaginary axis as its axis; the second handle is
/// the half-turn image of its own normal form, shifted along the axis by the twist. The
/// hyper-elliptic involution is recorded as conjugation by an order-two elliptic.
pub fn genus2_from_fn(fnc: &FenchelNielsenGenus2) -> Result<MarkedGroup> {
    fnc.validate()?;
    let h1 = build_handle(fnc.handle1)?;
    let h2 = build_handle(fnc.handle2)?;
    let j = ProjectiveMatrix::half_turn();
    let shift = ProjectiveMatrix::axial_translation(fnc.twist);
    let a2 = h2.a.conjugated_by(&j).conjugated_by(&shift);
    let b2 = h2.b.conjugated_by(&j).conjugated_by(&shift);
    let relator = Word::from_signed(&[1, 2, -1, -2, 3, 4, -3, -4])?;
    let labels = ["A1", "B1", "A2", "B2"].iter().map(|s| s.to_string()).collect();
    Ok(MarkedGroup::new(
        vec![h1.a, h1.b, a2, b2],
        labels,
        Vec::new(),
        vec![relator],
        Signature::new(2, 0),
        Some(Involution { matrix: h1.involution, images: genus2_involution_images() }),
    )?
    .built_from(Construction::Genus2(*fnc)))
}

/// Distance of `[A1, B1]` from a diagonal matrix; zero when the separating axis is the imaginary axis.
pub fn twist_normalization_defect(g: &MarkedGroup) -> Result<f64> {
    if g.rank() != 4 || g.signature() != Signature::new(2, 0) {
        return Err(Error::NotTwistNormalized(f64::INFINITY));
    }
    let k = g.evaluate(&Word::from_signed(&[1, 2, -1, -2])?);
    Ok(k.b.norm().max(k.c.norm()))
}

/// Cuts along the separating curve and reglues after translating the second handle by
/// `delta` along it. Twists compose additively.
pub fn twist_along_curve(g: &MarkedGroup, delta: f64) -> Result<MarkedGroup> {
    let defect = twist_normalization_defect(g)?;
    if defect > 1e-8 {
        return Err(Error::NotTwistNormalized(defect));
    }
    let shift = ProjectiveMatrix::axial_translation(delta);
    let mut generators = g.generators().to_vec();
    generators[2] = generators[2].conjugated_by(&shift);
    generators[3] = generators[3].conjugated_by(&shift);
    let twisted = MarkedGroup::new(
        generators,
        g.labels().to_vec(),
        g.peripheral().to_vec(),
        g.relators().to_vec(),
        g.signature(),
        g.involution().cloned(),
    )?;
    Ok(match g.construction() {
        Some(Construction::Genus2(fnc)) => {
            twisted.built_from(Construction::Genus2(FenchelNielsenGenus2 { twist: fnc.twist + delta, ..*fnc }))
        }
        _ => twisted,
    })
}

/// Collar criterion: a closed geodesic of length `curve_length` has an embedded collar
/// of total width `n/2` when `coth(l/2) > cosh(n/4)`.
pub fn collar_condition(curve_length: f64, n: f64) -> bool {
    let coth = 1.0 / (0.5 * curve_length).tanh();
    coth > (0.25 * n).cosh()
}

/// Gauss-Bonnet: `-2 pi chi`.
pub fn gauss_bonnet_area(signature: Signature) -> Result<f64> {
    let chi = signature.euler_characteristic();
    if chi >= 0 {
        return Err(Error::NotHyperbolic(chi));
    }
    Ok(-2.0 * PI * chi as f64)
}

/// Image of a word under the recorded hyper-elliptic involution.
pub fn hyperelliptic_action(g: &MarkedGroup, w: &Word) -> Result<Word> {
    let inv = g.involution().ok_or(Error::NotSymmetricForm)?;
    if let Some(m) = w.max_generator() {
        if m >= g.rank() {
            return Err(Error::InvalidWord(format!("{w} uses generator {} of {}", m + 1, g.rank())));
        }
    }
    Ok(w.substitute(&inv.images))
}

/// Kind of every word's image, for quick discreteness heuristics.
pub fn has_elliptic_among(g: &MarkedGroup, words: &[Word]) -> bool {
    words
        .iter()
        .any(|w| matches!(classify(&g.evaluate(w)), Ok(IsometryKind::Elliptic(_))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::complex_length;
    use crate::word::reduced_words;

    fn w(s: &[i32]) -> Word {
        Word::from_signed(s).unwrap()
    }

    #[test]
    fn cusped_pants_traces() {
        let g = pants_group(true, [0.0; 3]).unwrap();
        assert_eq!(g.evaluate(&w(&[1])).trace().re, 2.0);
        assert_eq!(g.evaluate(&w(&[2])).trace().re, 2.0);
        assert_eq!(g.evaluate(&w(&[1, 2])).trace().re, -2.0);
        assert_eq!(g.peripheral().len(), 3);
    }

    #[test]
    fn cusped_pants_shortest_geodesic_by_brute_force() {
        let g = pants_group(true, [0.0; 3]).unwrap();
        let shortest = reduced_words(2, 6)
            .iter()
            .filter_map(|w| complex_length(&g.evaluate(w)).ok())
            .map(|l| l.length)
            .fold(f64::INFINITY, f64::min);
        assert!((shortest - 2.0 * 3f64.acosh()).abs() < 1e-12);
        assert!((shortest - 3.5254943).abs() < 1e-7);
    }

    #[test]
    fn geodesic_pants_traces() {
        let g = pants_group(false, [1.0, 1.0, 1.0]).unwrap();
        let expect = -2.0 * 0.5f64.cosh();
        for word in [w(&[1]), w(&[2]), w(&[1, 2])] {
            assert!((g.evaluate(&word).trace().re - expect).abs() < 1e-12);
        }
        assert!((expect + 2.2552519).abs() < 1e-7);
        assert!(!has_elliptic_among(&g, &reduced_words(2, 6)));
        // A translates upward along the imaginary axis
        let a = g.generators()[0];
        assert!(a.b.norm() == 0.0 && a.c.norm() == 0.0 && (a.a / a.d).re > 1.0);
    }

    #[test]
    fn pants_boundary_data_errors() {
        assert!(matches!(pants_group(true, [1.0, 0.0, 0.0]), Err(Error::InvalidBoundaryData(_))));
        assert!(matches!(pants_group(false, [1.0, 0.0, 1.0]), Err(Error::InvalidBoundaryData(_))));
    }

    #[test]
    fn genus2_relator_and_commutator_trace() {
        for twist in [0.0, 0.7, -1.3] {
            let fnc = FenchelNielsenGenus2::symmetric(0.4, twist).unwrap();
            let g = genus2_from_fn(&fnc).unwrap();
            let rel = g.evaluate(&g.relators()[0]);
            assert!(rel.is_identity(1e-8));
            let k = g.evaluate(&w(&[1, 2, -1, -2]));
            assert!((k.trace().re + 2.0 * 0.2f64.cosh()).abs() < 1e-8);
            assert!(twist_normalization_defect(&g).unwrap() < 1e-10);
        }
    }

    #[test]
    fn genus2_asymmetric_handles() {
        let fnc = FenchelNielsenGenus2::from_handle_traces([3.1, 3.4], [2.8, 4.0], 0.6, 0.25).unwrap();
        let g = genus2_from_fn(&fnc).unwrap();
        assert!(g.evaluate(&g.relators()[0]).is_identity(1e-8));
        assert!((g.evaluate(&w(&[3])).trace().re - 2.8).abs() < 1e-9);
        assert!((g.evaluate(&w(&[3, 4])).trace().re - fnc.handle2[2]).abs() < 1e-9);
        assert!(!has_elliptic_among(&g, &reduced_words(4, 4)));
    }

    #[test]
    fn incompatible_traces_rejected() {
        let bad = FenchelNielsenGenus2 { handle1: [3.0; 3], handle2: [3.0; 3], separating_length: 0.4, twist: 0.0 };
        assert!(matches!(genus2_from_fn(&bad), Err(Error::IncompatibleTraces(_))));
    }

    #[test]
    fn twist_leaves_first_handle_untouched() {
        let g0 = genus2_from_fn(&FenchelNielsenGenus2::symmetric(0.5, 0.0).unwrap()).unwrap();
        let gt = genus2_from_fn(&FenchelNielsenGenus2::symmetric(0.5, 1.1).unwrap()).unwrap();
        for word in reduced_words(2, 5) {
            let a = g0.evaluate(&word).trace();
            let b = gt.evaluate(&word).trace();
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn twist_composition_and_inverse() {
        let g = genus2_from_fn(&FenchelNielsenGenus2::symmetric(0.5, 0.0).unwrap()).unwrap();
        let same = twist_along_curve(&g, 0.0).unwrap();
        for (x, y) in g.generators().iter().zip(same.generators()) {
            assert!(x.approx_eq(y, 0.0));
        }
        let back = twist_along_curve(&twist_along_curve(&g, 0.9).unwrap(), -0.9).unwrap();
        for (x, y) in g.generators().iter().zip(back.generators()) {
            assert!(x.approx_eq(y, 1e-9));
        }
        let two = twist_along_curve(&twist_along_curve(&g, 0.3).unwrap(), 0.4).unwrap();
        let direct = genus2_from_fn(&FenchelNielsenGenus2::symmetric(0.5, 0.7).unwrap()).unwrap();
        for (x, y) in two.generators().iter().zip(direct.generators()) {
            assert!(x.approx_eq(y, 1e-9));
        }
    }

    #[test]
    fn twist_requires_normal_form() {
        let g = genus2_from_fn(&FenchelNielsenGenus2::symmetric(0.5, 0.0).unwrap()).unwrap();
        let moved = g.conjugated(&ProjectiveMatrix::real(1.0, 0.3, 0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(twist_along_curve(&moved, 0.1), Err(Error::NotTwistNormalized(_))));
        let pants = pants_group(true, [0.0; 3]).unwrap();
        assert!(matches!(twist_along_curve(&pants, 0.1), Err(Error::NotTwistNormalized(_))));
    }

    #[test]
    fn collar_condition_examples() {
        assert!(collar_condition(5.0, 0.0));
        assert!(collar_condition(1.5, 4.0));
        assert!(!collar_condition(1.6, 4.0));
        assert!(collar_condition(0.4, 6.0));
    }

    #[test]
    fn gauss_bonnet_examples() {
        assert!((gauss_bonnet_area(Signature::new(2, 0)).unwrap() - 4.0 * PI).abs() < 1e-15);
        assert!((gauss_bonnet_area(Signature::new(0, 3)).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert_eq!(gauss_bonnet_area(Signature::new(1, 0)), Err(Error::NotHyperbolic(0)));
        for g in 0..4u32 {
            for k in 0..5u32 {
                let sig = Signature::new(g, k);
                if let Ok(area) = gauss_bonnet_area(sig) {
                    let pants = (2 * g + k) as f64 - 2.0;
                    assert!((area - pants * 2.0 * PI).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn involution_realized_by_conjugation() {
        for fnc in [
            FenchelNielsenGenus2::symmetric(0.4, 0.0).unwrap(),
            FenchelNielsenGenus2::symmetric(0.4, 0.7).unwrap(),
            FenchelNielsenGenus2::from_handle_traces([3.1, 3.4], [2.8, 4.0], 0.6, 0.25).unwrap(),
        ] {
            let g = genus2_from_fn(&fnc).unwrap();
            let inv = g.involution().unwrap();
            assert!(matches!(classify(&inv.matrix).unwrap(), IsometryKind::Elliptic(t) if (t - PI).abs() < 1e-9));
            let twisted = twist_along_curve(&g, 0.35).unwrap();
            assert!(twisted.involution().is_some());
        }
    }

    #[test]
    fn hyperelliptic_preserves_traces() {
        // A longer separating curve keeps generator entries small enough for
        // long image words to stay well conditioned.
        let g = genus2_from_fn(&FenchelNielsenGenus2::symmetric(2.0, 0.7).unwrap()).unwrap();
        assert_eq!(hyperelliptic_action(&g, &Word::empty()).unwrap(), Word::empty());
        for word in reduced_words(4, 4) {
            let image = hyperelliptic_action(&g, &word).unwrap().cyclically_reduced();
            let t0 = g.evaluate(&word).trace();
            let t1 = g.evaluate(&image).trace();
            assert!((t0 - t1).norm() < 1e-9 * t0.norm().max(1.0), "{word} -> {image}: {t0} vs {t1}");
            let twice = hyperelliptic_action(&g, &hyperelliptic_action(&g, &word).unwrap()).unwrap();
            let t2 = g.evaluate(&twice.cyclically_reduced()).trace();
            assert!((t0 - t2).norm() < 1e-9 * t0.norm().max(1.0));
        }
        let pants = pants_group(true, [0.0; 3]).unwrap();
        assert!(matches!(hyperelliptic_action(&pants, &w(&[1])), Err(Error::NotSymmetricForm)));
    }
}
