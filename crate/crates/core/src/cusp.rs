//! Horoball diagrams seen from a cusp: construction, distinguished lines of
//! tangent full-sized horoballs, isolation and rotation checks, and the
//! constants of the Ford-Voronoi picture of the thrice-punctured sphere.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::moebius::{c64, classify, Complex, IsometryKind, ProjectiveMatrix};
use crate::spectrum::ElementIndex;
use crate::surface::{gauss_bonnet_area, MarkedGroup, Signature};
use crate::word::{Letter, Word};

pub const FULL_SIZE_TOLERANCE: f64 = 1e-6;
pub const TANGENCY_TOLERANCE: f64 = 1e-6;
pub const SYMMETRY_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_DIAGRAM_BUDGET: usize = 200_000;
const OVERLAP_TOLERANCE: f64 = 1e-8;

/// Cusp moved to infinity with its horoball at height 1.
#[derive(Clone, Debug)]
pub struct CuspNormalization {
    pub translations: Vec<Complex>,
    pub conjugator: ProjectiveMatrix,
}

impl PartialEq for CuspNormalization {
    fn eq(&self, other: &Self) -> bool {
        self.translations == other.translations && self.conjugator.entries() == other.conjugator.entries()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramBall {
    pub center: Complex,
    pub diameter: f64,
    /// A parabolic word fixing the ball's ideal point; empty for synthetic balls.
    pub witness: Word,
}

impl DiagramBall {
    pub fn is_full_sized(&self) -> bool {
        (self.diameter - 1.0).abs() <= FULL_SIZE_TOLERANCE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoroballDiagram {
    pub normalization: CuspNormalization,
    pub balls: Vec<DiagramBall>,
    pub floor: f64,
    /// False when the search stopped on its budget.
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistinguishedLine {
    pub basepoint: Complex,
    pub direction: Complex,
    /// Ball indices, sorted and deduplicated.
    pub members: Vec<usize>,
    /// Consecutive centers along the line, not reduced by the lattice.
    pub positions: Vec<Complex>,
    /// Lattice vector translating the line onto itself, with its integer coordinates.
    pub period: Option<(Complex, [i64; 2])>,
}

impl DistinguishedLine {
    /// Angle of the line against the first lattice translation, in (-pi/2, pi/2].
    pub fn slope(&self, lattice: &Lattice) -> f64 {
        let mut a = (self.direction / lattice.t[0]).arg();
        if a <= -std::f64::consts::FRAC_PI_2 {
            a += std::f64::consts::PI;
        } else if a > std::f64::consts::FRAC_PI_2 {
            a -= std::f64::consts::PI;
        }
        a
    }
}

/// Rank-1 or rank-2 translation lattice of a normalized cusp.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    t: Vec<Complex>,
}

impl Lattice {
    pub fn new(t: Vec<Complex>) -> Result<Self> {
        match t.len() {
            1 if t[0].norm() > 1e-12 => Ok(Lattice { t }),
            2 => {
                let area = (t[0].conj() * t[1]).im.abs();
                if area <= 1e-12 * t[0].norm_sqr().max(t[1].norm_sqr()) {
                    Err(Error::DegenerateLattice(area))
                } else {
                    Ok(Lattice { t })
                }
            }
            1 => Err(Error::DegenerateLattice(0.0)),
            n => Err(Error::InvalidDiagram(format!("cusp lattice must have rank 1 or 2, got {n} translations"))),
        }
    }

    pub fn translations(&self) -> &[Complex] {
        &self.t
    }

    pub fn rank(&self) -> usize {
        self.t.len()
    }

    /// Real coordinates of `z` along the translations; for rank 1 the second is
    /// the signed offset across the lattice direction.
    fn coords(&self, z: Complex) -> (f64, f64) {
        if self.t.len() == 1 {
            let q = z / self.t[0];
            (q.re, q.im * self.t[0].norm())
        } else {
            let det = (self.t[0].conj() * self.t[1]).im;
            let u = (z.conj() * self.t[1]).im / det;
            let v = (self.t[0].conj() * z).im / det;
            (u, v)
        }
    }

    fn from_coords(&self, u: f64, v: f64) -> Complex {
        if self.t.len() == 1 {
            let unit = self.t[0] / self.t[0].norm();
            self.t[0] * u + unit * c64(0.0, v)
        } else {
            self.t[0] * u + self.t[1] * v
        }
    }

    /// Representative in the fundamental domain `[0,1)` of the lattice coordinates.
    pub fn reduce(&self, z: Complex) -> Complex {
        let (u, v) = self.coords(z);
        let wrap = |x: f64| {
            let r = x - x.floor();
            if r > 1.0 - 1e-9 {
                0.0
            } else {
                r
            }
        };
        if self.t.len() == 1 {
            self.from_coords(wrap(u), v)
        } else {
            self.from_coords(wrap(u), wrap(v))
        }
    }

    /// Shortest representative of `z` modulo the lattice (for a reduced basis).
    fn centered(&self, z: Complex) -> Complex {
        let (u, v) = self.coords(z);
        let near = |x: f64| x - x.round();
        let base = if self.t.len() == 1 { self.from_coords(near(u), v) } else { self.from_coords(near(u), near(v)) };
        if self.t.len() == 1 {
            return base;
        }
        let mut best = base;
        for (i, j) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)] {
            let w = base + self.t[0] * i as f64 + self.t[1] * j as f64;
            if w.norm() < best.norm() {
                best = w;
            }
        }
        best
    }

    pub fn same_mod(&self, a: Complex, b: Complex, tol: f64) -> bool {
        self.centered(a - b).norm() <= tol
    }

    /// Integer coordinates of `v` if it is a lattice vector.
    pub fn lattice_coords(&self, v: Complex, tol: f64) -> Option<[i64; 2]> {
        let (u, w) = self.coords(v);
        let (m, n) = (u.round(), if self.t.len() == 1 { 0.0 } else { w.round() });
        let back = if self.t.len() == 1 { self.t[0] * m } else { self.t[0] * m + self.t[1] * n };
        ((back - v).norm() <= tol).then_some([m as i64, n as i64])
    }

    /// Lattice vectors of length at most `r`.
    fn vectors_within(&self, r: f64) -> Vec<Complex> {
        let min_len = if self.t.len() == 1 {
            self.t[0].norm()
        } else {
            let area = (self.t[0].conj() * self.t[1]).im.abs();
            area / self.t[0].norm().max(self.t[1].norm())
        };
        let k = (r / min_len).ceil() as i64 + 1;
        let mut out = Vec::new();
        for m in -k..=k {
            if self.t.len() == 1 {
                let v = self.t[0] * m as f64;
                if v.norm() <= r + 1e-9 {
                    out.push(v);
                }
                continue;
            }
            for n in -k..=k {
                let v = self.t[0] * m as f64 + self.t[1] * n as f64;
                if v.norm() <= r + 1e-9 {
                    out.push(v);
                }
            }
        }
        out
    }
}

impl HoroballDiagram {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.normalization.translations.clone())
    }

    /// A diagram given directly by its lattice and balls. Centers are reduced
    /// modulo the lattice; the result is validated.
    pub fn synthetic(translations: Vec<Complex>, balls: Vec<(Complex, f64)>, floor: f64) -> Result<Self> {
        let lattice = Lattice::new(translations.clone())?;
        let balls = balls
            .into_iter()
            .map(|(c, d)| DiagramBall { center: lattice.reduce(c), diameter: d, witness: Word::empty() })
            .collect();
        let d = HoroballDiagram {
            normalization: CuspNormalization { translations, conjugator: ProjectiveMatrix::identity() },
            balls,
            floor,
            complete: true,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks the diagram invariants: diameters in `[floor, 1]`, reduced centers
    /// and no overlapping pair of balls (lattice translates included).
    pub fn validate(&self) -> Result<()> {
        let lattice = self.lattice()?;
        if !(self.floor > 0.0 && self.floor < 1.0) {
            return Err(Error::InvalidDiagram(format!("floor {} must lie in (0, 1)", self.floor)));
        }
        for (i, b) in self.balls.iter().enumerate() {
            if !b.center.re.is_finite() || !b.center.im.is_finite() || !b.diameter.is_finite() {
                return Err(Error::NonFinite("diagram ball"));
            }
            if b.diameter > 1.0 + FULL_SIZE_TOLERANCE || b.diameter < self.floor - 1e-12 {
                return Err(Error::InvalidDiagram(format!("ball {i} has diameter {} outside [floor, 1]", b.diameter)));
            }
            if !lattice.same_mod(b.center, lattice.reduce(b.center), 1e-9) {
                return Err(Error::InvalidDiagram(format!("ball {i} is not lattice-reduced")));
            }
        }
        let shifts = lattice.vectors_within(2.0);
        for i in 0..self.balls.len() {
            for j in i..self.balls.len() {
                let (a, b) = (&self.balls[i], &self.balls[j]);
                for s in &shifts {
                    if i == j && s.norm() < 1e-12 {
                        continue;
                    }
                    let gap = (b.center + s - a.center).norm_sqr();
                    if gap == 0.0 || (gap / (a.diameter * b.diameter)).ln() < -OVERLAP_TOLERANCE {
                        return Err(Error::InvalidDiagram(format!("balls {i} and {j} overlap")));
                    }
                }
            }
        }
        Ok(())
    }

    fn full_sized(&self) -> Vec<usize> {
        (0..self.balls.len()).filter(|&i| self.balls[i].is_full_sized()).collect()
    }

    fn require_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::PossiblyIncompleteDiagram)
        }
    }
}

struct CuspFrame {
    conjugator: ProjectiveMatrix,
    translation: Complex,
    word: Word,
}

/// Conjugator sending the fixed point of a parabolic to infinity, with the
/// resulting translation `z -> z + tau`.
fn parabolic_frame(m: &ProjectiveMatrix) -> Result<(ProjectiveMatrix, Complex)> {
    if !matches!(classify(m)?, IsometryKind::Parabolic) {
        return Err(Error::NotParabolic);
    }
    let n = match m.fixed_points().first().copied().flatten() {
        None => ProjectiveMatrix::identity(),
        Some(p) => ProjectiveMatrix::new(c64(0.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), -p)?,
    };
    let mut t = m.conjugated_by(&n);
    if t.a.re < 0.0 {
        t = t.negated();
    }
    Ok((n, t.b))
}

fn cusp_frames(g: &MarkedGroup) -> Result<Vec<CuspFrame>> {
    let mut out = Vec::new();
    for w in g.peripheral() {
        let m = g.evaluate(w);
        if let Ok(IsometryKind::Parabolic) = classify(&m) {
            let (conjugator, translation) = parabolic_frame(&m)?;
            out.push(CuspFrame { conjugator, translation, word: w.clone() });
        }
    }
    Ok(out)
}

/// Breadth-first search over group elements modulo the translations of the cusp
/// at infinity in `frame`. `visit` sees `frame * g * frame^-1`, the word of `g` and
/// the data its parent returned; returning `None` stops the search below `g`.
/// Returns false when the budget ran out.
fn coset_search<T>(
    g: &MarkedGroup,
    frame: &ProjectiveMatrix,
    translation: Complex,
    budget: usize,
    mut visit: impl FnMut(&ProjectiveMatrix, &Word, Option<&T>) -> Option<T>,
) -> bool {
    let table = g.letter_table();
    let frame_inv = frame.inverse();
    let lattice = Lattice { t: vec![translation] };
    // Left multiplication by the cusp translations does not change the diagram.
    let reduce = |m: &ProjectiveMatrix| -> ProjectiveMatrix {
        let inner = *frame * *m * frame_inv;
        let scale = inner.frobenius_sq().sqrt();
        if inner.c.norm() <= 1e-9 * scale {
            return ProjectiveMatrix::identity();
        }
        let center = inner.a / inner.c;
        let shift = lattice.reduce(center) - center;
        ProjectiveMatrix::translation(shift) * inner
    };
    let mut index = ElementIndex::for_norm_sq(1e4);
    index.insert(&ProjectiveMatrix::identity(), 0);
    let root = ProjectiveMatrix::identity();
    let Some(root_data) = visit(&(*frame * root * frame_inv), &Word::empty(), None) else {
        return true;
    };
    let mut queue: VecDeque<(ProjectiveMatrix, Word, T)> = VecDeque::new();
    queue.push_back((root, Word::empty(), root_data));
    let mut seen = 1usize;
    while let Some((m, w, data)) = queue.pop_front() {
        for l in Letter::alphabet(g.rank()) {
            if w.last() == Some(l.inverse()) {
                continue;
            }
            let next = m * table[l.code()];
            let key = reduce(&next);
            if index.get(&key).is_some() {
                continue;
            }
            if seen >= budget {
                return false;
            }
            index.insert(&key, seen);
            seen += 1;
            let mut nw = w.clone();
            nw.push(l);
            if let Some(d) = visit(&(*frame * next * frame_inv), &nw, Some(&data)) {
                queue.push_back((next, nw, d));
            }
        }
    }
    true
}

/// Horoballs `g H_j` of an element in the frame of `frame`: cusp index, Euclidean
/// center and `|c|` of `frame g N_j^-1`.
fn element_balls(inner: &ProjectiveMatrix, frame: &ProjectiveMatrix, inv: &[ProjectiveMatrix]) -> Vec<(usize, Complex, f64)> {
    let mut out = Vec::new();
    for (j, nj_inv) in inv.iter().enumerate() {
        let m = *inner * *frame * *nj_inv;
        let scale = m.frobenius_sq().sqrt();
        if m.c.norm() > 1e-9 * scale {
            out.push((j, m.a / m.c, m.c.norm()));
        }
    }
    out
}

/// Balls of a child that its parent already had (the step fixed their cusp) do not
/// count towards extending the search; without this a cusp stabilizer would be
/// walked forever.
fn fresh<'a>(balls: &'a [(usize, Complex, f64)], parent: Option<&'a [(usize, Complex, f64)]>) -> impl Iterator<Item = &'a (usize, Complex, f64)> {
    balls.iter().filter(move |(j, z, _)| {
        parent.is_none_or(|p| !p.iter().any(|(k, w, _)| k == j && (z - w).norm() <= 1e-9 * (1.0 + z.norm())))
    })
}

/// Common horocycle length at which the equal-size cusp neighbourhoods first touch.
pub fn equal_cusp_size(g: &MarkedGroup, budget: usize) -> Result<f64> {
    let frames = cusp_frames(g)?;
    if frames.is_empty() {
        return Err(Error::NotParabolic);
    }
    let inv: Vec<ProjectiveMatrix> = frames.iter().map(|f| f.conjugator.inverse()).collect();
    let widths: Vec<f64> = frames.iter().map(|f| f.translation.norm()).collect();
    let mut best = f64::INFINITY;
    for (i, fi) in frames.iter().enumerate() {
        let complete = coset_search(g, &fi.conjugator, fi.translation, budget, |inner, _, parent: Option<&Vec<(usize, Complex, f64)>>| {
            let balls = element_balls(inner, &fi.conjugator, &inv);
            // q = |c| sqrt(t_i t_j); tangency happens at the smallest q
            let q = |&(j, _, c): &(usize, Complex, f64)| c * (widths[i] * widths[j]).sqrt();
            let new_best = fresh(&balls, parent.map(|p| p.as_slice())).map(q).fold(f64::INFINITY, f64::min);
            best = best.min(new_best);
            (parent.is_none() || new_best <= 2.0 * best).then_some(balls)
        });
        if !complete {
            return Err(Error::BudgetExhausted(budget));
        }
    }
    Ok(best)
}

/// Horoball diagram seen from the cusp of `cusp_word`, which must generate the
/// stabilizer of its cusp. All cusps are expanded to equal size until the first
/// tangency, then the frame is scaled so the cusp sits at height 1 with a real
/// positive translation. Fails with `BudgetExhausted` if the search is cut short.
pub fn build_horoball_diagram(g: &MarkedGroup, cusp_word: &Word, floor: f64, budget: usize) -> Result<HoroballDiagram> {
    let d = build_horoball_diagram_partial(g, cusp_word, floor, budget)?;
    if d.complete {
        Ok(d)
    } else {
        Err(Error::BudgetExhausted(budget))
    }
}

/// Like [`build_horoball_diagram`], but returns a budget-truncated diagram flagged
/// as incomplete instead of failing.
pub fn build_horoball_diagram_partial(
    g: &MarkedGroup,
    cusp_word: &Word,
    floor: f64,
    budget: usize,
) -> Result<HoroballDiagram> {
    if !(floor > 0.0 && floor < 1.0) {
        return Err(Error::InvalidArgument(format!("diameter floor {floor} must lie in (0, 1)")));
    }
    if cusp_word.max_generator().is_some_and(|m| m >= g.rank()) || cusp_word.is_empty() {
        return Err(Error::InvalidWord(format!("{cusp_word} is not a word in the generators")));
    }
    let (n0, tau) = parabolic_frame(&g.evaluate(cusp_word))?;
    let lambda = equal_cusp_size(g, budget)?;
    let sigma = (c64(lambda, 0.0) / tau).sqrt();
    let frame = ProjectiveMatrix::new(sigma, c64(0.0, 0.0), c64(0.0, 0.0), sigma.inv())? * n0;
    let lattice = Lattice::new(vec![c64(lambda, 0.0)])?;

    let frames = cusp_frames(g)?;
    let inv: Vec<ProjectiveMatrix> = frames.iter().map(|f| f.conjugator.inverse()).collect();
    let heights: Vec<f64> = frames.iter().map(|f| f.translation.norm() / lambda).collect();
    let mut balls: Vec<DiagramBall> = Vec::new();
    let complete = coset_search(g, &frame, c64(lambda, 0.0), budget, |inner, w, parent: Option<&Vec<(usize, Complex, f64)>>| {
        let found = element_balls(inner, &frame, &inv);
        let diameter = |j: usize, c: f64| 1.0 / (c * c * heights[j]);
        for &(j, z, c) in &found {
            let d = diameter(j, c);
            if d < floor {
                continue;
            }
            let center = lattice.reduce(z);
            if balls.iter().any(|b| lattice.same_mod(b.center, center, 1e-7)) {
                continue;
            }
            let witness = w.concat(&frames[j].word).concat(&w.inverse());
            balls.push(DiagramBall { center, diameter: d, witness });
        }
        let largest = fresh(&found, parent.map(|p| p.as_slice())).map(|&(j, _, c)| diameter(j, c)).fold(0.0, f64::max);
        (parent.is_none() || largest >= 0.25 * floor).then_some(found)
    });
    balls.sort_by(|a, b| {
        a.center.re.total_cmp(&b.center.re).then(a.center.im.total_cmp(&b.center.im)).then(a.diameter.total_cmp(&b.diameter))
    });
    let d = HoroballDiagram {
        normalization: CuspNormalization { translations: vec![c64(lambda, 0.0)], conjugator: frame },
        balls,
        floor,
        complete,
    };
    Ok(d)
}

fn find_full(d: &HoroballDiagram, lattice: &Lattice, full: &[usize], z: Complex) -> Option<usize> {
    full.iter().copied().find(|&i| lattice.same_mod(d.balls[i].center, z, 1e-6))
}

fn canonical_direction(u: Complex) -> Complex {
    if u.re < -1e-12 || (u.re.abs() <= 1e-12 && u.im < 0.0) {
        -u
    } else {
        u
    }
}

const MAX_LINE_STEPS: usize = 4096;

/// Maximal chains of tangent full-sized balls along straight lines, one per
/// lattice orbit.
pub fn find_distinguished_lines(d: &HoroballDiagram) -> Result<Vec<DistinguishedLine>> {
    let lattice = d.lattice()?;
    let full = d.full_sized();
    let shifts = lattice.vectors_within(1.5);
    let mut lines: Vec<DistinguishedLine> = Vec::new();
    let mut keys: Vec<(Complex, Vec<usize>)> = Vec::new();
    for &i in &full {
        let c = d.balls[i].center;
        let mut dirs: Vec<Complex> = Vec::new();
        for &j in &full {
            for s in &shifts {
                let w = d.balls[j].center + s;
                let delta = w - c;
                if (delta.norm_sqr() - 1.0).abs() <= TANGENCY_TOLERANCE {
                    let u = canonical_direction(delta / delta.norm());
                    if !dirs.iter().any(|x| (x - u).norm() < 1e-6) {
                        dirs.push(u);
                    }
                }
            }
        }
        for u in dirs {
            let line = walk_line(d, &lattice, &full, c, u);
            if line.positions.len() < 2 {
                continue;
            }
            let known = keys.iter().any(|(ku, km)| (ku - u).norm() < 1e-6 && *km == line.members);
            if !known {
                keys.push((u, line.members.clone()));
                lines.push(line);
            }
        }
    }
    Ok(lines)
}

fn walk_line(d: &HoroballDiagram, lattice: &Lattice, full: &[usize], start: Complex, u: Complex) -> DistinguishedLine {
    let mut forward = vec![start];
    let mut period = None;
    for k in 1..MAX_LINE_STEPS {
        let z = start + u * k as f64;
        if find_full(d, lattice, full, z).is_none() {
            break;
        }
        forward.push(z);
        if let Some(coords) = lattice.lattice_coords(z - start, 1e-6) {
            period = Some((z - start, coords));
            break;
        }
    }
    let positions = if period.is_some() {
        forward
    } else {
        let mut back = Vec::new();
        for k in 1..MAX_LINE_STEPS {
            let z = start - u * k as f64;
            if find_full(d, lattice, full, z).is_none() {
                break;
            }
            back.push(z);
        }
        back.reverse();
        back.extend(forward);
        back
    };
    let mut members: Vec<usize> = positions.iter().filter_map(|&z| find_full(d, lattice, full, z)).collect();
    members.sort_unstable();
    members.dedup();
    DistinguishedLine { basepoint: positions[0], direction: u, members, positions, period }
}

/// Consecutive balls along the line are full-sized, collinear and tangent, so each
/// tangency contributes boundary length 1 to the cusp annulus.
pub fn check_pairwise_tangent(d: &HoroballDiagram, line: &DistinguishedLine) -> Result<bool> {
    let lattice = d.lattice()?;
    let full = d.full_sized();
    if line.positions.len() < 2 {
        return Ok(false);
    }
    let on_full = line.positions.iter().all(|&z| {
        d.balls
            .iter()
            .any(|b| lattice.same_mod(b.center, z, 1e-6) && (b.diameter - 1.0).abs() <= FULL_SIZE_TOLERANCE)
    });
    let collinear = line.positions.iter().all(|&z| {
        let v = z - line.positions[0];
        (line.direction.conj() * v).im.abs() <= 1e-6
    });
    let tangent = line.positions.windows(2).all(|w| {
        let (Some(a), Some(b)) = (find_full(d, &lattice, &full, w[0]), find_full(d, &lattice, &full, w[1])) else {
            return false;
        };
        let prod = d.balls[a].diameter * d.balls[b].diameter;
        ((w[1] - w[0]).norm_sqr() - prod).abs() <= TANGENCY_TOLERANCE
    });
    let closes = match line.period {
        Some((v, _)) => (*line.positions.last().unwrap() - line.positions[0] - v).norm() <= 1e-6,
        None => true,
    };
    Ok(on_full && collinear && tangent && closes)
}

/// True when no full-sized ball off the line on the given side (+1 is to the left
/// of the line's direction) is tangent to a member of the line.
pub fn check_one_sided_isolation(d: &HoroballDiagram, line: &DistinguishedLine, side: i32) -> Result<bool> {
    if side != 1 && side != -1 {
        return Err(Error::InvalidArgument(format!("side must be +1 or -1, got {side}")));
    }
    d.require_complete()?;
    if d.floor >= 1.0 - 1e-3 {
        return Err(Error::InvalidArgument(format!("diagram floor {} must be below 1 - 1e-3", d.floor)));
    }
    let lattice = d.lattice()?;
    let full = d.full_sized();
    let shifts = lattice.vectors_within(2.0 + lattice.t[0].norm());
    for &p in &line.positions {
        for &j in &full {
            for s in &shifts {
                let w = d.balls[j].center + s;
                let delta = w - p;
                if (delta.norm_sqr() - 1.0).abs() > TANGENCY_TOLERANCE {
                    continue;
                }
                let cross = (line.direction.conj() * delta).im;
                if cross.abs() <= 1e-6 {
                    continue;
                }
                if (cross > 0.0) == (side > 0) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// True when a rotation of the given order about some point maps the diagram to
/// itself modulo the lattice.
pub fn check_rotational_symmetry(d: &HoroballDiagram, order: u32) -> Result<bool> {
    if ![2, 3, 4, 6].contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    d.require_complete()?;
    let lattice = d.lattice()?;
    let omega = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / order as f64);
    let tol = SYMMETRY_TOLERANCE;
    let lattice_invariant = lattice.t.iter().all(|&t| {
        let r = omega * t;
        match lattice.rank() {
            1 => (r - t).norm() <= tol || (r + t).norm() <= tol,
            _ => lattice.lattice_coords(r, tol).is_some(),
        }
    });
    if !lattice_invariant {
        return Ok(false);
    }
    if d.balls.is_empty() {
        return Ok(true);
    }
    let maps_to_itself = |z0: Complex| {
        d.balls.iter().all(|b| {
            let image = z0 + omega * (b.center - z0);
            d.balls.iter().any(|o| (o.diameter - b.diameter).abs() <= tol && lattice.same_mod(o.center, image, tol))
        })
    };
    // A symmetry sends the anchor (a ball of the top tier) to some ball of that
    // tier, which pins the center; torsion points of the lattice are added too.
    let top = d.balls.iter().map(|b| b.diameter).fold(0.0, f64::max);
    let tier: Vec<Complex> = d.balls.iter().filter(|b| (b.diameter - top).abs() <= tol).map(|b| b.center).collect();
    let anchor = tier[0];
    let reach = 2.0 * lattice.t.iter().map(|t| t.norm()).sum::<f64>() + 2.0;
    let shifts = lattice.vectors_within(reach);
    let mut candidates: Vec<Complex> = Vec::new();
    for &c in &tier {
        for s in &shifts {
            candidates.push((c + s - omega * anchor) / (c64(1.0, 0.0) - omega));
        }
    }
    for m in [1u32, 2, 3, 4, 6] {
        for i in 0..m {
            for j in 0..(if lattice.rank() == 2 { m } else { 1 }) {
                let mut z = lattice.t[0] * (i as f64 / m as f64);
                if lattice.rank() == 2 {
                    z += lattice.t[1] * (j as f64 / m as f64);
                }
                candidates.push(z);
            }
        }
    }
    Ok(candidates.into_iter().any(maps_to_itself))
}

/// Constants of the Ford-Voronoi picture of the thrice-punctured sphere: cusp at
/// height 1, full-sized horoballs at the integers, translation 2.
#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiConstants {
    pub max_distance: f64,
    pub vertex_height: f64,
    pub cell_area: f64,
    pub cusp_area: f64,
    pub density: f64,
    pub doubled_path_bound: f64,
    pub clearance: f64,
}

/// Distance from `(z, t)` to the horoball at infinity bounded by height `h`.
fn distance_to_top(t: f64, h: f64) -> f64 {
    (h / t).ln()
}

/// Distance from `(z, t)` to a horoball at `center` of Euclidean diameter `d`.
fn distance_to_ball(z: Complex, t: f64, center: Complex, d: f64) -> f64 {
    (((z - center).norm_sqr() + t * t) / (d * t)).ln()
}

pub fn pants_voronoi_constants() -> VoronoiConstants {
    let (translation, height) = (2.0, 1.0);
    let (left, right) = (c64(0.0, 0.0), c64(1.0, 0.0));
    // The trivalent vertex over the midpoint of two tangent full-sized balls is
    // equidistant from them and from the cusp at infinity.
    let x = (left + right) * 0.5;
    let gap = |t: f64| distance_to_top(t, height) - distance_to_ball(x, t, left, 1.0);
    let (mut lo, mut hi) = (0.1, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let vertex_height = 0.5 * (lo + hi);
    debug_assert!((distance_to_ball(x, vertex_height, right, 1.0) - distance_to_top(vertex_height, height)).abs() < 1e-9);
    let max_distance = distance_to_top(vertex_height, height);
    let pants_area = gauss_bonnet_area(Signature::new(0, 3)).expect("pants are hyperbolic");
    let cell_area = pants_area / 3.0;
    // area above height 1 over one period: translation * integral of dt / t^2
    let cusp_area = translation / height;
    // clearance constant of the closest-horoball estimate
    let clearance = (0.5f64).sqrt() - 3.0 / 8.0;
    VoronoiConstants {
        max_distance,
        vertex_height,
        cell_area,
        cusp_area,
        density: cusp_area / cell_area,
        doubled_path_bound: 2.0 * max_distance,
        clearance,
    }
}

/// Length of the horocyclic segment homotopic to a geodesic arc of the given
/// length through a cusp: `2 sinh(l / 2)`.
pub fn horocycle_shortcut(arc_length: f64) -> Result<f64> {
    if !(arc_length >= 0.0) || !arc_length.is_finite() {
        return Err(Error::DomainError(format!("arc length {arc_length} must be finite and non-negative")));
    }
    Ok(2.0 * (0.5 * arc_length).sinh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{apply_to_horoball, horoball_distance, Horoball};
    use crate::surface::pants_group;
    use proptest::prelude::*;

    fn pants_diagram(floor: f64) -> HoroballDiagram {
        let g = pants_group(true, [0.0; 3]).unwrap();
        build_horoball_diagram(&g, &Word::from_signed(&[1]).unwrap(), floor, DEFAULT_DIAGRAM_BUDGET).unwrap()
    }

    fn multiset(d: &HoroballDiagram) -> Vec<(i64, i64, i64)> {
        let mut v: Vec<(i64, i64, i64)> = d
            .balls
            .iter()
            .map(|b| ((b.center.re * 1e6).round() as i64, (b.center.im * 1e6).round() as i64, (b.diameter * 1e6).round() as i64))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn pants_diagram_is_the_ford_packing() {
        let d = pants_diagram(0.1);
        assert_eq!(d.normalization.translations, vec![c64(2.0, 0.0)]);
        // reduced fractions p/q in [0, 2) with 1/q^2 >= 0.1, i.e. q <= 3
        let mut want: Vec<(f64, f64)> = Vec::new();
        for q in 1..=3i64 {
            for p in 0..2 * q {
                if num_integer::gcd(p, q) == 1 {
                    want.push((p as f64 / q as f64, 1.0 / (q * q) as f64));
                }
            }
        }
        want.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(d.balls.len(), want.len());
        for (b, (x, dia)) in d.balls.iter().zip(&want) {
            assert!((b.center.re - x).abs() < 1e-9 && b.center.im.abs() < 1e-9, "{:?} vs {x}", b.center);
            assert!((b.diameter - dia).abs() < 1e-9);
        }
        d.validate().unwrap();
    }

    #[test]
    fn witnesses_fix_ball_centers() {
        let g = pants_group(true, [0.0; 3]).unwrap();
        let d = pants_diagram(0.2);
        for b in &d.balls {
            let m = g.evaluate(&b.witness).conjugated_by(&d.normalization.conjugator);
            assert!(matches!(classify(&m).unwrap(), IsometryKind::Parabolic));
            let p = m.fixed_points()[0].unwrap();
            let lattice = d.lattice().unwrap();
            assert!(lattice.same_mod(p, b.center, 1e-8));
        }
    }

    #[test]
    fn second_tier_is_quarter_sized_at_half_integers() {
        let d = pants_diagram(0.2);
        let small: Vec<&DiagramBall> = d.balls.iter().filter(|b| !b.is_full_sized()).collect();
        assert_eq!(small.len(), 2);
        for b in small {
            assert!((b.diameter - 0.25).abs() < 1e-9);
            assert!((b.center.re.fract() - 0.5).abs() < 1e-9);
        }
        // the quarter-sized ball is the image of the cusp under a matrix with |c| = 2
        let h = apply_to_horoball(&ProjectiveMatrix::real(1.0, 0.0, 2.0, 1.0).unwrap(), &Horoball::at_infinity(1.0).unwrap()).unwrap();
        assert_eq!(h, Horoball::finite(c64(0.5, 0.0), 0.25).unwrap());
        assert!(d.balls.iter().all(|b| b.diameter <= 1.0 + 1e-12));
    }

    #[test]
    fn non_parabolic_cusp_word_is_rejected() {
        let g = pants_group(true, [0.0; 3]).unwrap();
        let w = Word::from_signed(&[1, 2, 2]).unwrap();
        assert_eq!(build_horoball_diagram(&g, &w, 0.2, 1000), Err(Error::NotParabolic));
    }

    #[test]
    fn budget_truncation_is_flagged() {
        let g = pants_group(true, [0.0; 3]).unwrap();
        let w = Word::from_signed(&[1]).unwrap();
        assert_eq!(build_horoball_diagram(&g, &w, 0.01, 20), Err(Error::BudgetExhausted(20)));
    }

    #[test]
    fn diagram_does_not_depend_on_the_cusp_representative() {
        let g = pants_group(true, [0.0; 3]).unwrap();
        let base = pants_diagram(0.1);
        for w in [vec![-1], vec![2, 1, -2], vec![-2, -1, 2]] {
            let d = build_horoball_diagram(&g, &Word::from_signed(&w).unwrap(), 0.1, DEFAULT_DIAGRAM_BUDGET).unwrap();
            // the frames differ by a translation; anchor on a full-sized ball
            let lattice = d.lattice().unwrap();
            let shift = base.balls[0].center - d.balls.iter().find(|b| b.is_full_sized()).unwrap().center;
            let moved: Vec<(Complex, f64)> = d.balls.iter().map(|b| (b.center + shift, b.diameter)).collect();
            let moved = HoroballDiagram::synthetic(vec![c64(2.0, 0.0)], moved, 0.1).unwrap();
            assert_eq!(multiset(&moved), multiset(&base));
            assert_eq!(lattice.translations(), base.lattice().unwrap().translations());
        }
    }

    #[test]
    fn pants_has_one_isolated_tangent_line() {
        let d = pants_diagram(0.2);
        let lines = find_distinguished_lines(&d).unwrap();
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert!(line.slope(&d.lattice().unwrap()).abs() < 1e-9);
        assert!(check_pairwise_tangent(&d, line).unwrap());
        assert!(check_one_sided_isolation(&d, line, 1).unwrap());
        assert!(check_one_sided_isolation(&d, line, -1).unwrap());
        assert_eq!(line.period.map(|p| p.1), Some([1, 0]));
    }

    #[test]
    fn pants_has_no_order_three_or_four_symmetry() {
        let d = pants_diagram(0.1);
        assert!(!check_rotational_symmetry(&d, 3).unwrap());
        assert!(!check_rotational_symmetry(&d, 4).unwrap());
        assert!(check_rotational_symmetry(&d, 2).unwrap());
        assert_eq!(check_rotational_symmetry(&d, 1), Err(Error::InvalidOrder(1)));
    }

    #[test]
    fn synthetic_line_checks() {
        let none = HoroballDiagram::synthetic(vec![c64(3.0, 0.0)], vec![(c64(0.0, 0.0), 0.5)], 0.1).unwrap();
        assert!(find_distinguished_lines(&none).unwrap().is_empty());

        let spaced =
            HoroballDiagram::synthetic(vec![c64(3.0, 0.0)], vec![(c64(0.0, 0.0), 1.0), (c64(1.5, 0.0), 1.0)], 0.1).unwrap();
        let fake = DistinguishedLine {
            basepoint: c64(0.0, 0.0),
            direction: c64(1.0, 0.0),
            members: vec![0, 1],
            positions: vec![c64(0.0, 0.0), c64(1.5, 0.0), c64(3.0, 0.0)],
            period: Some((c64(3.0, 0.0), [1, 0])),
        };
        assert!(!check_pairwise_tangent(&spaced, &fake).unwrap());

        let small = HoroballDiagram::synthetic(vec![c64(0.9, 0.0)], vec![(c64(0.0, 0.0), 0.9)], 0.1).unwrap();
        let chain = DistinguishedLine {
            basepoint: c64(0.0, 0.0),
            direction: c64(1.0, 0.0),
            members: vec![0],
            positions: vec![c64(0.0, 0.0), c64(0.9, 0.0)],
            period: Some((c64(0.9, 0.0), [1, 0])),
        };
        assert!(!check_pairwise_tangent(&small, &chain).unwrap());
    }

    #[test]
    fn parallel_translates_collapse() {
        let d = HoroballDiagram::synthetic(vec![c64(1.0, 0.0), c64(0.0, 3.0)], vec![(c64(0.0, 0.0), 1.0)], 0.1).unwrap();
        let lines = find_distinguished_lines(&d).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(check_pairwise_tangent(&d, &lines[0]).unwrap());
    }

    #[test]
    fn hexagonal_packing_is_not_isolated() {
        let hex = Complex::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let d = HoroballDiagram::synthetic(vec![c64(1.0, 0.0), hex], vec![(c64(0.0, 0.0), 1.0)], 0.1).unwrap();
        let lines = find_distinguished_lines(&d).unwrap();
        assert_eq!(lines.len(), 3);
        for line in &lines {
            assert!(!check_one_sided_isolation(&d, line, 1).unwrap());
            assert!(!check_one_sided_isolation(&d, line, -1).unwrap());
        }
        assert!(check_rotational_symmetry(&d, 6).unwrap());
        assert!(check_rotational_symmetry(&d, 3).unwrap());
        assert!(!check_rotational_symmetry(&d, 4).unwrap());
    }

    #[test]
    fn one_tangent_ball_above_the_line() {
        let top = c64(0.5, 0.75f64.sqrt());
        let d = HoroballDiagram::synthetic(vec![c64(3.0, 0.0)], vec![(c64(0.0, 0.0), 1.0), (c64(1.0, 0.0), 1.0), (c64(2.0, 0.0), 1.0), (top, 1.0)], 0.1)
            .unwrap();
        let line = find_distinguished_lines(&d)
            .unwrap()
            .into_iter()
            .find(|l| (l.direction - c64(1.0, 0.0)).norm() < 1e-9)
            .unwrap();
        assert!(check_one_sided_isolation(&d, &line, -1).unwrap());
        assert!(!check_one_sided_isolation(&d, &line, 1).unwrap());
    }

    #[test]
    fn square_lattice_has_order_four_symmetry() {
        let d = HoroballDiagram::synthetic(vec![c64(1.0, 0.0), c64(0.0, 1.0)], vec![(c64(0.3, 0.2), 1.0)], 0.1).unwrap();
        assert!(check_rotational_symmetry(&d, 4).unwrap());
        assert!(!check_rotational_symmetry(&d, 3).unwrap());
    }

    #[test]
    fn incomplete_diagrams_are_refused() {
        let mut d = pants_diagram(0.2);
        d.complete = false;
        let line = find_distinguished_lines(&d).unwrap().remove(0);
        assert_eq!(check_one_sided_isolation(&d, &line, 1), Err(Error::PossiblyIncompleteDiagram));
        assert_eq!(check_rotational_symmetry(&d, 3), Err(Error::PossiblyIncompleteDiagram));
    }

    #[test]
    fn overlapping_synthetic_balls_are_rejected() {
        let r = HoroballDiagram::synthetic(vec![c64(4.0, 0.0)], vec![(c64(0.0, 0.0), 1.0), (c64(0.5, 0.0), 1.0)], 0.1);
        assert!(matches!(r, Err(Error::InvalidDiagram(_))));
        assert!(matches!(HoroballDiagram::synthetic(vec![c64(1.0, 0.0), c64(2.0, 0.0)], vec![], 0.1), Err(Error::DegenerateLattice(_))));
    }

    #[test]
    fn voronoi_constants() {
        let v = pants_voronoi_constants();
        assert!((v.max_distance - 0.143_841_0).abs() < 1e-6);
        assert!((v.max_distance - (2.0 / 3f64.sqrt()).ln()).abs() < 1e-12);
        assert!((v.vertex_height - 3f64.sqrt() / 2.0).abs() < 1e-9);
        assert!(v.doubled_path_bound < 0.288);
        assert!(v.clearance > 0.332);
        assert!((v.cell_area - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        assert!((v.cusp_area - 2.0).abs() < 1e-12);
        assert!((v.density - 3.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn voronoi_vertex_is_equidistant_from_the_three_horoballs() {
        let v = pants_voronoi_constants();
        let top = Horoball::at_infinity(1.0).unwrap();
        let a = Horoball::finite(c64(0.0, 0.0), 1.0).unwrap();
        assert_eq!(horoball_distance(&top, &a).unwrap(), 0.0);
        let p = c64(0.5, 0.0);
        let d0 = distance_to_ball(p, v.vertex_height, c64(0.0, 0.0), 1.0);
        let d1 = distance_to_ball(p, v.vertex_height, c64(1.0, 0.0), 1.0);
        assert!((d0 - v.max_distance).abs() < 1e-9 && (d1 - v.max_distance).abs() < 1e-9);
    }

    #[test]
    fn shortcut_examples() {
        assert_eq!(horocycle_shortcut(0.0).unwrap(), 0.0);
        assert!((horocycle_shortcut(2.0).unwrap() - 2.350_402_4).abs() < 1e-7);
        assert!((horocycle_shortcut(1e-6).unwrap() / 1e-6 - 1.0).abs() < 1e-9);
        assert!(horocycle_shortcut(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn shortcut_below_exponential(l in 1e-6f64..30.0) {
            prop_assert!(horocycle_shortcut(l).unwrap() < (l / 2.0).exp());
        }

        #[test]
        fn sinh_is_superadditive(parts in prop::collection::vec(0.01f64..5.0, 1..6)) {
            let total: f64 = parts.iter().sum();
            let sum: f64 = parts.iter().map(|&x| (x / 2.0).sinh()).sum();
            prop_assert!(sum <= (total / 2.0).sinh() * (1.0 + 1e-12));
        }

        #[test]
        fn tangency_is_symmetric_and_translation_invariant(
            x in -3.0f64..3.0, y in -3.0f64..3.0, da in 0.1f64..1.0, db in 0.1f64..1.0, k in -3i64..3,
        ) {
            let lattice = Lattice::new(vec![c64(2.0, 0.0)]).unwrap();
            let a = c64(x, 0.0);
            let b = c64(y, 0.3);
            let t = lattice.translations()[0] * k as f64;
            let tangent = |p: Complex, q: Complex, d1: f64, d2: f64| ((p - q).norm_sqr() - d1 * d2).abs() <= TANGENCY_TOLERANCE;
            prop_assert_eq!(tangent(a, b, da, db), tangent(b, a, db, da));
            prop_assert_eq!(tangent(a, b, da, db), tangent(a + t, b + t, da, db));
        }
    }
}
