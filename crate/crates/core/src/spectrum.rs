//! Length spectra: orbit enumeration, conjugacy-class bookkeeping, counting,
//! comparison and the truncated zeta product.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moebius::{classify, complex_length, Complex, ComplexLength, IsometryKind, ProjectiveMatrix};
use crate::surface::MarkedGroup;
use crate::word::{reduced_words, Letter, Word};

/// Classes whose lengths and rotations differ by less than this share an entry.
pub const BUCKET_RESOLUTION: f64 = 1e-7;
pub const DEFAULT_BUDGET: usize = 10_000_000;
pub const DEFAULT_DIAMETER: f64 = 3.0;
const MAX_WARNINGS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub length: f64,
    pub rotation: f64,
    pub multiplicity: u64,
    pub witness: Word,
}

impl SpectrumEntry {
    pub fn complex_length(&self) -> ComplexLength {
        ComplexLength { length: self.length, rotation: self.rotation }
    }
}

/// An elliptic element met during enumeration; the group is probably not discrete.
#[derive(Clone, Debug, PartialEq)]
pub struct NonDiscreteWarning {
    pub word: Word,
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthSpectrum {
    pub entries: Vec<SpectrumEntry>,
    pub cutoff: f64,
    pub completeness_radius: f64,
    pub warnings: Vec<NonDiscreteWarning>,
}

impl LengthSpectrum {
    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn shortest(&self) -> Option<&SpectrumEntry> {
        self.entries.first()
    }

    /// Same spectrum with every entry above `cutoff` dropped.
    pub fn truncated(&self, cutoff: f64) -> LengthSpectrum {
        LengthSpectrum {
            entries: self.entries.iter().filter(|e| e.length <= cutoff).cloned().collect(),
            cutoff: cutoff.min(self.cutoff),
            completeness_radius: self.completeness_radius,
            warnings: self.warnings.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Caller bound on the diameter of the convex core as seen from the basepoint.
    pub diameter_estimate: f64,
    pub budget: usize,
    /// Number of word-prefix partitions searched independently and merged.
    pub partitions: usize,
    /// Count each geodesic once per orientation.
    pub oriented: bool,
    /// Also list the powers of primitive classes.
    pub include_imprimitive: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            diameter_estimate: DEFAULT_DIAMETER,
            budget: DEFAULT_BUDGET,
            partitions: 1,
            oriented: false,
            include_imprimitive: false,
        }
    }
}

/// A group element reached by the orbit search, with its shortlex-least word.
#[derive(Clone, Debug)]
pub struct OrbitElement {
    pub matrix: ProjectiveMatrix,
    pub word: Word,
    /// `2 cosh d(j, g j)`.
    pub norm_sq: f64,
}

impl OrbitElement {
    pub fn displacement(&self) -> f64 {
        (0.5 * self.norm_sq).max(1.0).acosh()
    }
}

/// Approximate hash index of PSL(2,C) elements: entries are quantized on an
/// absolute grid and sign-normalized. Coordinates that sit near a rounding
/// boundary are probed on both sides so equal elements always collide.
pub struct ElementIndex {
    map: HashMap<[i64; 8], usize>,
    step: f64,
}

const KEY_MARGIN: f64 = 0.2;

impl ElementIndex {
    /// Grid for elements moving `j` at most `radius`. Rounding error of a product
    /// grows like `e^radius` while distinct elements stay `e^{-radius/2}` apart.
    pub fn for_radius(radius: f64) -> Self {
        Self::for_norm_sq(2.0 * radius.cosh())
    }

    /// Same grid keyed by the largest squared Frobenius norm involved.
    pub fn for_norm_sq(norm_sq: f64) -> Self {
        ElementIndex { map: HashMap::new(), step: (1e-12 * norm_sq).max(1e-10) }
    }

    /// Coarser grid for products of two factors whose norms multiply to `scale`.
    /// Distinct elements of that size differ by about `1/sqrt(scale)`, far above the step.
    fn for_products(scale: f64) -> Self {
        ElementIndex { map: HashMap::new(), step: (1e-9 * scale).max(1e-10) }
    }

    fn coords(&self, m: &ProjectiveMatrix) -> [f64; 8] {
        let s = 1.0 / self.step;
        let e = m.entries();
        [e[0].re * s, e[0].im * s, e[1].re * s, e[1].im * s, e[2].re * s, e[2].im * s, e[3].re * s, e[3].im * s]
    }

    fn signed_key(q: [i64; 8]) -> [i64; 8] {
        let neg = q.map(|x| -x);
        q.min(neg)
    }

    fn primary(&self, m: &ProjectiveMatrix) -> [i64; 8] {
        Self::signed_key(self.coords(m).map(|x| x.round() as i64))
    }

    fn candidates(&self, m: &ProjectiveMatrix) -> Vec<[i64; 8]> {
        let c = self.coords(m);
        let base = c.map(|x| x.round() as i64);
        let ambiguous: Vec<usize> = (0..8)
            .filter(|&k| (c[k] - c[k].floor() - 0.5).abs() < KEY_MARGIN)
            .collect();
        let mut out = Vec::with_capacity(1 << ambiguous.len());
        for mask in 0..(1u32 << ambiguous.len()) {
            let mut q = base;
            for (bit, &k) in ambiguous.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    q[k] = if c[k] > base[k] as f64 { base[k] + 1 } else { base[k] - 1 };
                }
            }
            out.push(Self::signed_key(q));
        }
        out
    }

    pub fn get(&self, m: &ProjectiveMatrix) -> Option<usize> {
        self.candidates(m).iter().find_map(|k| self.map.get(k).copied())
    }

    /// Inserts unless an equal element is present; returns the stored index.
    pub fn insert(&mut self, m: &ProjectiveMatrix, idx: usize) -> usize {
        if let Some(i) = self.get(m) {
            return i;
        }
        let key = self.primary(m);
        self.map.insert(key, idx);
        idx
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn partition_roots(rank: usize, partitions: usize, p: usize) -> Vec<Letter> {
    Letter::alphabet(rank).filter(|l| l.code() % partitions == p).collect()
}

/// Elements moving `j` by at most `radius`, each with a short word.
///
/// Free groups are searched breadth-first along generator steps. Groups with
/// relators are treated as cocompact with orbit covering radius at most `rho`:
/// a seed ball slightly larger than `2 rho` is found by a padded generator search
/// and closed under products, then grown with `ball(a + b - 2 rho) = ball(a) ball(b)`,
/// which holds because every point lies within `rho` of the orbit.
pub fn orbit_ball(g: &MarkedGroup, radius: f64, rho: f64, budget: usize, partitions: usize) -> Result<Vec<OrbitElement>> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("orbit radius {radius} must be finite and non-negative")));
    }
    let partitions = partitions.max(1);
    if g.is_free() {
        return generator_ball(g, radius, budget, partitions);
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument("covering radius must be positive for groups with relators".into()));
    }
    let seed = (2.0 * rho + SEED_MARGIN).min(radius.max(2.0 * rho + SEED_MARGIN));
    let mut ball = generator_ball(g, seed + SEED_SLACK, budget, partitions)?;
    ball.retain(|e| e.norm_sq <= norm_limit(seed));
    loop {
        let before = ball.len();
        ball = product_ball(&ball, &ball, seed, budget, partitions)?;
        if ball.len() == before {
            break;
        }
    }
    let mut known = seed;
    while known < radius {
        let next = (2.0 * known - 2.0 * rho).min(radius);
        let half = 0.5 * (next + 2.0 * rho);
        let factors: Vec<OrbitElement> = ball.iter().filter(|e| e.norm_sq <= norm_limit(half)).cloned().collect();
        ball = product_ball(&factors, &factors, next, budget, partitions)?;
        known = next;
    }
    ball.retain(|e| e.norm_sq <= norm_limit(radius));
    Ok(ball)
}

const SEED_MARGIN: f64 = 0.75;
const SEED_SLACK: f64 = 4.0;

fn norm_limit(radius: f64) -> f64 {
    2.0 * radius.cosh() * (1.0 + 1e-12)
}

fn shortlex(x: &OrbitElement, y: &OrbitElement) -> std::cmp::Ordering {
    (x.word.len(), &x.word).cmp(&(y.word.len(), &y.word))
}

/// One element found by [`product_ball`]. The word comes from the shortest
/// factorization and the matrix from the best-conditioned one, so rounding error
/// stays proportional to the element's own size as the ball is regrown.
#[derive(Clone)]
struct Candidate {
    word_key: (usize, usize, usize),
    cond_key: (f64, usize, usize),
    matrix: ProjectiveMatrix,
    norm_sq: f64,
}

impl Candidate {
    fn absorb(&mut self, other: Candidate) {
        if other.word_key < self.word_key {
            self.word_key = other.word_key;
        }
        if other.cond_key.partial_cmp(&self.cond_key) == Some(std::cmp::Ordering::Less) {
            self.cond_key = other.cond_key;
            self.matrix = other.matrix;
            self.norm_sq = other.norm_sq;
        }
    }
}

fn merge_candidate(index: &mut ElementIndex, best: &mut Vec<Candidate>, cand: Candidate) {
    match index.get(&cand.matrix) {
        Some(slot) => best[slot].absorb(cand),
        None => {
            index.insert(&cand.matrix, best.len());
            best.push(cand);
        }
    }
}

/// All products `x y` (plus the factors themselves) within `radius`, deduplicated.
/// Inputs must be sorted shortlex; the output is too.
fn product_ball(
    xs: &[OrbitElement],
    ys: &[OrbitElement],
    radius: f64,
    budget: usize,
    partitions: usize,
) -> Result<Vec<OrbitElement>> {
    let limit = norm_limit(radius);
    let max_x = xs.iter().map(|e| e.norm_sq).fold(2.0, f64::max);
    let max_y = ys.iter().map(|e| e.norm_sq).fold(2.0, f64::max);
    let scale = limit.max((max_x * max_y).sqrt());
    let pairs = xs.len() as f64 * ys.len() as f64;
    if pairs > 1e11 {
        return Err(Error::CutoffTooLarge { budget });
    }
    // Partitions split the left factors by first letter. Both selection keys end in
    // (left index, right index), so the merged result does not depend on the split.
    let parts: Vec<Vec<Candidate>> = (0..partitions)
        .into_par_iter()
        .map(|p| {
            let mut index = ElementIndex::for_products(scale);
            let mut best: Vec<Candidate> = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                let owner = x.word.first().map_or(0, |l| l.code() % partitions);
                if owner != p {
                    continue;
                }
                for (k, y) in ys.iter().enumerate() {
                    let m = x.matrix * y.matrix;
                    let n = m.frobenius_sq();
                    if n > limit {
                        continue;
                    }
                    let cand = Candidate {
                        word_key: (reduced_concat_len(&x.word, &y.word), i, k),
                        cond_key: (x.norm_sq * y.norm_sq, i, k),
                        matrix: m,
                        norm_sq: n,
                    };
                    merge_candidate(&mut index, &mut best, cand);
                }
            }
            best
        })
        .collect();
    let mut index = ElementIndex::for_products(scale);
    let mut best: Vec<Candidate> = Vec::new();
    for part in parts {
        for cand in part {
            merge_candidate(&mut index, &mut best, cand);
        }
    }
    if best.len() > budget {
        return Err(Error::CutoffTooLarge { budget });
    }
    let mut out: Vec<OrbitElement> = best
        .into_iter()
        .map(|c| {
            let (_, i, k) = c.word_key;
            OrbitElement { matrix: c.matrix, word: xs[i].word.concat(&ys[k].word), norm_sq: c.norm_sq }
        })
        .collect();
    out.sort_by(shortlex);
    Ok(out)
}

fn reduced_concat_len(a: &Word, b: &Word) -> usize {
    let (x, y) = (a.letters(), b.letters());
    let mut k = 0;
    while k < x.len() && k < y.len() && x[x.len() - 1 - k] == y[k].inverse() {
        k += 1;
    }
    x.len() + y.len() - 2 * k
}

/// Breadth-first search along generator steps, keeping nodes within `radius`.
/// Each element carries its shortlex-least word among words whose prefixes stay
/// in the ball.
fn generator_ball(g: &MarkedGroup, radius: f64, budget: usize, partitions: usize) -> Result<Vec<OrbitElement>> {
    let limit = norm_limit(radius);
    let parts: Vec<Result<Vec<OrbitElement>>> = (0..partitions)
        .into_par_iter()
        .map(|p| search_partition(g, &partition_roots(g.rank(), partitions, p), limit, budget))
        .collect();
    let mut all = vec![OrbitElement { matrix: ProjectiveMatrix::identity(), word: Word::empty(), norm_sq: 2.0 }];
    for part in parts {
        all.extend(part?);
    }
    all.sort_by(shortlex);
    let mut index = ElementIndex::for_norm_sq(limit);
    let mut out = Vec::with_capacity(all.len());
    for e in all {
        if index.get(&e.matrix).is_none() {
            index.insert(&e.matrix, out.len());
            out.push(e);
        }
    }
    if out.len() > budget {
        return Err(Error::CutoffTooLarge { budget });
    }
    Ok(out)
}

fn search_partition(g: &MarkedGroup, roots: &[Letter], limit: f64, budget: usize) -> Result<Vec<OrbitElement>> {
    let table = g.letter_table();
    let rank = g.rank();
    let mut index = ElementIndex::for_norm_sq(limit);
    index.insert(&ProjectiveMatrix::identity(), usize::MAX);
    let mut found: Vec<OrbitElement> = Vec::new();
    let mut frontier: Vec<OrbitElement> = Vec::new();
    for &l in roots {
        let m = table[l.code()];
        let n = m.frobenius_sq();
        if n <= limit {
            frontier.push(OrbitElement { matrix: m, word: Word::new([l]), norm_sq: n });
        }
    }
    frontier.sort_by(|x, y| x.word.cmp(&y.word));
    let mut level = frontier;
    loop {
        // Dedupe the level against earlier levels and itself; the level is sorted,
        // so the first occurrence carries the least word.
        let mut kept = Vec::with_capacity(level.len());
        for e in level {
            if index.get(&e.matrix).is_none() {
                index.insert(&e.matrix, found.len() + kept.len());
                kept.push(e);
            }
        }
        if kept.is_empty() {
            break;
        }
        if found.len() + kept.len() > budget {
            return Err(Error::CutoffTooLarge { budget });
        }
        let mut children: Vec<OrbitElement> = kept
            .par_iter()
            .flat_map_iter(|e| {
                Letter::alphabet(rank).filter_map(move |l| {
                    if e.word.last() == Some(l.inverse()) {
                        return None;
                    }
                    let m = e.matrix * table[l.code()];
                    let n = m.frobenius_sq();
                    if n > limit {
                        return None;
                    }
                    let mut w = e.word.clone();
                    w.push(l);
                    Some(OrbitElement { matrix: m, word: w, norm_sq: n })
                })
            })
            .collect();
        children.sort_by(|x, y| x.word.cmp(&y.word));
        found.extend(kept);
        level = children;
    }
    Ok(found)
}

/// A primitive (or, on request, imprimitive) conjugacy class found by enumeration.
#[derive(Clone, Debug)]
struct ClassRecord {
    length: ComplexLength,
    witness: Word,
}

/// Distance from `j` to the axis of a loxodromic with displacement `disp`.
fn axis_distance(norm_sq: f64, cl: &ComplexLength) -> f64 {
    let cosh_disp = 0.5 * norm_sq;
    let num = (cosh_disp - cl.length.cosh()).max(0.0);
    let den = cl.length.cosh() - cl.rotation.cos();
    if den <= 0.0 {
        return 0.0;
    }
    (num / den).sqrt().asinh()
}

/// Enumerates unoriented primitive closed geodesics of length at most `cutoff`.
pub fn enumerate_spectrum(g: &MarkedGroup, cutoff: f64, diameter_estimate: f64) -> Result<LengthSpectrum> {
    let opts = SpectrumOptions { diameter_estimate, ..SpectrumOptions::default() };
    enumerate_spectrum_with(g, cutoff, &opts)
}

pub fn enumerate_spectrum_with(g: &MarkedGroup, cutoff: f64, opts: &SpectrumOptions) -> Result<LengthSpectrum> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::InvalidArgument(format!("cutoff {cutoff} must be positive")));
    }
    if !(opts.diameter_estimate >= 0.0) || !opts.diameter_estimate.is_finite() {
        return Err(Error::InvalidArgument("diameter estimate must be non-negative".into()));
    }
    let radius = cutoff + 2.0 * opts.diameter_estimate;
    let ball = orbit_ball(g, radius, opts.diameter_estimate, opts.budget, opts.partitions)?;

    let mut warnings = Vec::new();
    let mut lox: Vec<(usize, ComplexLength)> = Vec::new();
    for (i, e) in ball.iter().enumerate() {
        match classify(&e.matrix)? {
            IsometryKind::Loxodromic(cl) if cl.length <= cutoff + 1e-12 => lox.push((i, cl)),
            IsometryKind::Elliptic(angle) if warnings.len() < MAX_WARNINGS => {
                warnings.push(NonDiscreteWarning { word: e.word.clone(), angle })
            }
            _ => {}
        }
    }

    let mut classes = if g.is_free() {
        free_group_classes(&ball, &lox)
    } else {
        geometric_classes(&ball, &lox, opts.diameter_estimate)
    };
    if opts.include_imprimitive {
        let powers: Vec<ClassRecord> = classes
            .iter()
            .flat_map(|c| {
                (2..)
                    .take_while(move |k| *k as f64 * c.length.length <= cutoff + 1e-12)
                    .map(move |k| {
                        let w = (0..k).fold(Word::empty(), |acc, _| acc.concat(&c.witness));
                        let rotation = crate::moebius::fold_angle(k as f64 * c.length.rotation);
                        ClassRecord { length: ComplexLength { length: k as f64 * c.length.length, rotation }, witness: w }
                    })
            })
            .collect();
        classes.extend(powers);
    }
    let mut entries = bucket_classes(classes);
    if opts.oriented {
        for e in &mut entries {
            e.multiplicity *= 2;
        }
    }
    Ok(LengthSpectrum { entries, cutoff, completeness_radius: radius, warnings })
}

fn free_group_classes(ball: &[OrbitElement], lox: &[(usize, ComplexLength)]) -> Vec<ClassRecord> {
    // canonical word -> (frobenius of best-conditioned member, its complex length)
    let mut classes: BTreeMap<Word, (f64, ComplexLength)> = BTreeMap::new();
    for &(i, cl) in lox {
        let e = &ball[i];
        if e.word.is_proper_power() {
            continue;
        }
        let key = e.word.canonical_unoriented();
        let slot = classes.entry(key).or_insert((f64::INFINITY, cl));
        if e.norm_sq < slot.0 {
            *slot = (e.norm_sq, cl);
        }
    }
    classes.into_iter().map(|(w, (_, cl))| ClassRecord { length: cl, witness: w }).collect()
}

/// Classes in groups with relators. Every class of length at most the cutoff has a
/// representative whose axis passes within the diameter of `j`; two such
/// representatives are conjugate by an element moving `j` at most `2 diam + l/2`.
fn geometric_classes(ball: &[OrbitElement], lox: &[(usize, ComplexLength)], diam: f64) -> Vec<ClassRecord> {
    let near: Vec<(usize, ComplexLength)> = lox
        .iter()
        .copied()
        .filter(|(i, cl)| axis_distance(ball[*i].norm_sq, cl) <= diam + 1e-9)
        .collect();
    let scale = ball.iter().map(|e| e.norm_sq).fold(2.0, f64::max);
    let mut index = ElementIndex::for_norm_sq(scale);
    for (k, (i, _)) in near.iter().enumerate() {
        index.insert(&ball[*i].matrix, k);
    }
    let mut class_of = vec![usize::MAX; near.len()];
    let mut reps: Vec<Vec<usize>> = Vec::new();
    for k in 0..near.len() {
        if class_of[k] != usize::MAX {
            continue;
        }
        let cid = reps.len();
        class_of[k] = cid;
        let mut members = vec![k];
        let (i, cl) = near[k];
        let c = ball[i].matrix;
        let cinv = c.inverse();
        let reach = 2.0 * (2.0 * diam + 0.5 * cl.length + 1e-9).cosh();
        let found: Vec<usize> = ball
            .par_iter()
            .filter(|h| h.norm_sq <= reach)
            .flat_map_iter(|h| {
                let hinv = h.matrix.inverse();
                [h.matrix * c * hinv, h.matrix * cinv * hinv]
            })
            .filter_map(|m| index.get(&m))
            .collect();
        for m in found {
            if class_of[m] == usize::MAX {
                class_of[m] = cid;
                members.push(m);
            }
        }
        reps.push(members);
    }

    // Same axis and an integer fraction of the length means a proper power.
    let mut by_length: Vec<(f64, usize)> = near.iter().enumerate().map(|(k, (_, cl))| (cl.length, k)).collect();
    by_length.sort_by(|a, b| a.0.total_cmp(&b.0));
    let root_of = |k: usize, r: usize, d: usize| -> bool {
        let x = ball[near[k].0].matrix;
        let y = ball[near[r].0].matrix;
        let yd = (1..d).fold(y, |acc, _| acc * y);
        let tol = 1e-7 * x.frobenius_sq().sqrt();
        x.approx_eq(&yd, tol) || x.approx_eq(&yd.inverse(), tol)
    };
    let is_power = |k: usize| -> bool {
        let l = near[k].1.length;
        (2..).take_while(|d| l / *d as f64 >= by_length.first().map_or(f64::INFINITY, |x| x.0) - 1e-9).any(|d| {
            let target = l / d as f64;
            let lo = by_length.partition_point(|x| x.0 < target - 1e-7);
            by_length[lo..].iter().take_while(|x| x.0 <= target + 1e-7).any(|&(_, r)| root_of(k, r, d))
        })
    };

    reps.into_iter()
        .filter(|members| !is_power(members[0]))
        .map(|members| {
            let best = members
                .iter()
                .copied()
                .min_by(|&a, &b| ball[near[a].0].norm_sq.total_cmp(&ball[near[b].0].norm_sq))
                .unwrap();
            let witness = members
                .iter()
                .map(|&m| &ball[near[m].0].word)
                .min_by(|x, y| (x.len(), *x).cmp(&(y.len(), *y)))
                .unwrap()
                .clone();
            ClassRecord { length: near[best].1, witness }
        })
        .collect()
}

fn bucket_classes(mut classes: Vec<ClassRecord>) -> Vec<SpectrumEntry> {
    for c in &mut classes {
        c.length.rotation = c.length.rotation.abs();
    }
    classes.sort_by(|a, b| {
        a.length
            .length
            .total_cmp(&b.length.length)
            .then(a.length.rotation.total_cmp(&b.length.rotation))
            .then_with(|| (a.witness.len(), &a.witness).cmp(&(b.witness.len(), &b.witness)))
    });
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    let mut start = 0;
    while start < classes.len() {
        let base = classes[start].length.length;
        let mut end = start;
        while end < classes.len() && classes[end].length.length - base <= BUCKET_RESOLUTION {
            end += 1;
        }
        let mut group: Vec<&ClassRecord> = classes[start..end].iter().collect();
        group.sort_by(|a, b| a.length.rotation.total_cmp(&b.length.rotation));
        let mut s = 0;
        while s < group.len() {
            let rot = group[s].length.rotation;
            let mut e = s;
            while e < group.len() && group[e].length.rotation - rot <= BUCKET_RESOLUTION {
                e += 1;
            }
            let lead = group[s..e]
                .iter()
                .min_by(|a, b| {
                    a.length
                        .length
                        .total_cmp(&b.length.length)
                        .then_with(|| (a.witness.len(), &a.witness).cmp(&(b.witness.len(), &b.witness)))
                })
                .unwrap();
            entries.push(SpectrumEntry {
                length: lead.length.length,
                rotation: rot,
                multiplicity: (e - s) as u64,
                witness: lead.witness.clone(),
            });
            s = e;
        }
        start = end;
    }
    entries.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.rotation.total_cmp(&b.rotation)));
    entries
}

/// Number of geodesics (with multiplicity) of length at most `l`.
pub fn counting_function(s: &LengthSpectrum, l: f64) -> Result<u64> {
    if l > s.cutoff + 1e-12 {
        return Err(Error::BeyondCutoff { requested: l, cutoff: s.cutoff });
    }
    Ok(s.entries.iter().take_while(|e| e.length <= l).map(|e| e.multiplicity).sum())
}

/// One geodesic's worth of a spectrum entry.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumUnit {
    pub length: f64,
    pub rotation: f64,
    pub witness: Word,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumComparison {
    pub matched: Vec<(SpectrumUnit, SpectrumUnit)>,
    pub only_left: Vec<SpectrumUnit>,
    pub only_right: Vec<SpectrumUnit>,
    pub agree_up_to: f64,
}

fn units(s: &LengthSpectrum, cutoff: f64) -> Vec<SpectrumUnit> {
    s.entries
        .iter()
        .filter(|e| e.length <= cutoff)
        .flat_map(|e| {
            (0..e.multiplicity).map(|_| SpectrumUnit { length: e.length, rotation: e.rotation, witness: e.witness.clone() })
        })
        .collect()
}

fn rotation_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Greedy matching in length order; rotations match up to sign.
pub fn compare_spectra(s1: &LengthSpectrum, s2: &LengthSpectrum, tol: f64) -> Result<SpectrumComparison> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let cutoff = s1.cutoff.min(s2.cutoff);
    let left = units(s1, cutoff);
    let right = units(s2, cutoff);
    let mut used = vec![false; right.len()];
    let mut matched = Vec::new();
    let mut only_left = Vec::new();
    let mut lo = 0;
    for u in left {
        while lo < right.len() && right[lo].length < u.length - tol {
            lo += 1;
        }
        let hit = (lo..right.len()).take_while(|&k| right[k].length <= u.length + tol).find(|&k| {
            !used[k]
                && (rotation_gap(u.rotation, right[k].rotation) <= tol
                    || rotation_gap(u.rotation, -right[k].rotation) <= tol)
        });
        match hit {
            Some(k) => {
                used[k] = true;
                matched.push((u, right[k].clone()));
            }
            None => only_left.push(u),
        }
    }
    let only_right: Vec<SpectrumUnit> =
        right.into_iter().zip(used).filter(|(_, u)| !u).map(|(r, _)| r).collect();
    // Unmatched units within tol of the common cutoff are a truncation artifact.
    let first_miss = only_left
        .iter()
        .chain(only_right.iter())
        .map(|u| u.length)
        .filter(|&l| l < cutoff - tol)
        .fold(f64::INFINITY, f64::min);
    let agree_up_to = if first_miss.is_finite() { (first_miss - tol).max(0.0) } else { cutoff };
    Ok(SpectrumComparison { matched, only_left, only_right, agree_up_to })
}

/// `prod (1 - e^{-z l})^{-mult}` over the entries.
pub fn zeta_truncated(s: &LengthSpectrum, z: Complex) -> Result<Complex> {
    if !(z.re > 0.0) || !z.im.is_finite() {
        return Err(Error::DomainError(format!("zeta needs Re(z) > 0, got {z}")));
    }
    let mut acc = Complex::new(1.0, 0.0);
    for e in &s.entries {
        let factor = Complex::new(1.0, 0.0) - (-z * e.length).exp();
        if factor.norm() < 1e-12 {
            return Err(Error::PoleProximity { length: e.length, modulus: factor.norm() });
        }
        acc /= factor.powu(e.multiplicity as u32);
    }
    Ok(acc)
}

/// Exhaustive reference: every freely reduced word up to `max_word_len`,
/// classes by canonical cyclic word. The result is complete below the returned
/// spectrum's cutoff, the least length among cyclically reduced words of the next
/// two word lengths.
pub fn naive_spectrum(g: &MarkedGroup, max_word_len: usize) -> Result<LengthSpectrum> {
    if !g.is_free() {
        return Err(Error::InvalidArgument("the word oracle needs a free marked group".into()));
    }
    let table = g.letter_table();
    let mut classes: BTreeMap<Word, ComplexLength> = BTreeMap::new();
    for w in reduced_words(g.rank(), max_word_len) {
        if !w.is_cyclically_reduced() || w.is_proper_power() {
            continue;
        }
        let key = w.canonical_unoriented();
        if classes.contains_key(&key) {
            continue;
        }
        if let Ok(cl) = complex_length(&key.evaluate_with(table)) {
            classes.insert(key, cl);
        }
    }
    let horizon = cyclic_words_of_length(g.rank(), max_word_len + 1, max_word_len + 2)
        .filter_map(|w| complex_length(&w.evaluate_with(table)).ok())
        .map(|cl| cl.length)
        .fold(f64::INFINITY, f64::min);
    let records = classes
        .into_iter()
        .filter(|(_, cl)| cl.length < horizon)
        .map(|(w, cl)| ClassRecord { length: cl, witness: w })
        .collect();
    Ok(LengthSpectrum {
        entries: bucket_classes(records),
        cutoff: horizon,
        completeness_radius: horizon,
        warnings: Vec::new(),
    })
}

fn cyclic_words_of_length(rank: usize, lo: usize, hi: usize) -> impl Iterator<Item = Word> {
    // Depth-first to avoid materializing every shorter word.
    let mut stack: Vec<Vec<Letter>> = vec![Vec::new()];
    std::iter::from_fn(move || {
        while let Some(w) = stack.pop() {
            if w.len() < hi {
                for l in Letter::alphabet(rank) {
                    if w.last() != Some(&l.inverse()) {
                        let mut v = w.clone();
                        v.push(l);
                        stack.push(v);
                    }
                }
            }
            if w.len() >= lo {
                let word = Word::new(w);
                if word.is_cyclically_reduced() {
                    return Some(word);
                }
            }
        }
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::c64;
    use crate::surface::{genus2_from_fn, pants_group, FenchelNielsenGenus2};
    use proptest::prelude::*;

    fn cusped() -> MarkedGroup {
        pants_group(true, [0.0; 3]).unwrap()
    }

    #[test]
    fn cusped_pants_shortest_entry() {
        let s = enumerate_spectrum(&cusped(), 4.0, 2.0).unwrap();
        let first = s.shortest().unwrap();
        assert!((first.length - 2.0 * 3f64.acosh()).abs() < 1e-9);
        assert_eq!(first.multiplicity, 3);
        assert_eq!(counting_function(&s, 3.6).unwrap(), 3);
        assert_eq!(counting_function(&s, 1.0).unwrap(), 0);
        assert_eq!(counting_function(&s, 4.0).unwrap(), s.total_multiplicity());
        assert!(matches!(counting_function(&s, 4.5), Err(Error::BeyondCutoff { .. })));
    }

    #[test]
    fn cutoff_below_systole_is_empty() {
        let s = enumerate_spectrum(&cusped(), 3.0, 2.0).unwrap();
        assert!(s.entries.is_empty());
    }

    #[test]
    fn matches_word_oracle_on_pants() {
        for g in [cusped(), pants_group(false, [1.0, 1.0, 1.0]).unwrap()] {
            let oracle = naive_spectrum(&g, 6).unwrap();
            let bfs = enumerate_spectrum(&g, oracle.cutoff, 3.0).unwrap().truncated(oracle.cutoff - 1e-9);
            let oracle = oracle.truncated(oracle.cutoff - 1e-9);
            assert_eq!(bfs.entries.len(), oracle.entries.len());
            for (a, b) in bfs.entries.iter().zip(&oracle.entries) {
                assert!((a.length - b.length).abs() < 1e-7);
                assert_eq!(a.multiplicity, b.multiplicity);
            }
        }
    }

    #[test]
    fn partitions_do_not_change_the_result() {
        let g = pants_group(false, [1.0, 1.0, 1.0]).unwrap();
        let base = enumerate_spectrum(&g, 5.0, 2.0).unwrap();
        for p in [2, 3, 4, 7] {
            let opts = SpectrumOptions { diameter_estimate: 2.0, partitions: p, ..Default::default() };
            assert_eq!(enumerate_spectrum_with(&g, 5.0, &opts).unwrap(), base);
        }
    }

    #[test]
    fn flags_scale_counts() {
        let g = cusped();
        let base = enumerate_spectrum(&g, 8.0, 2.0).unwrap();
        let oriented = SpectrumOptions { diameter_estimate: 2.0, oriented: true, ..Default::default() };
        let o = enumerate_spectrum_with(&g, 8.0, &oriented).unwrap();
        assert_eq!(o.total_multiplicity(), 2 * base.total_multiplicity());
        let imp = SpectrumOptions { diameter_estimate: 2.0, include_imprimitive: true, ..Default::default() };
        let i = enumerate_spectrum_with(&g, 8.0, &imp).unwrap();
        // squares of the three systoles have length 4 arccosh 3 < 8
        assert_eq!(i.total_multiplicity(), base.total_multiplicity() + 3);
    }

    #[test]
    fn genus2_contains_separating_curve() {
        let g = genus2_from_fn(&FenchelNielsenGenus2::symmetric(0.5, 0.0).unwrap()).unwrap();
        let s = enumerate_spectrum(&g, 1.0, 1.5).unwrap();
        let first = s.shortest().unwrap();
        assert!((first.length - 0.5).abs() < 1e-9);
        assert_eq!(first.rotation, 0.0);
        assert_eq!(first.multiplicity, 1);
    }

    #[test]
    fn conjugated_group_has_same_spectrum() {
        let g = pants_group(false, [1.0, 1.5, 2.0]).unwrap();
        let (a, b, c) = (c64(1.0, 0.2), c64(0.3, 0.0), c64(0.1, -0.1));
        let n = ProjectiveMatrix::new(a, b, c, (c64(1.0, 0.0) + b * c) / a).unwrap();
        let h = g.conjugated(&n).unwrap();
        let s1 = enumerate_spectrum(&g, 5.0, 3.0).unwrap();
        let s2 = enumerate_spectrum(&h, 5.0, 3.0).unwrap();
        let cmp = compare_spectra(&s1, &s2, 1e-9).unwrap();
        assert!(cmp.only_left.is_empty() && cmp.only_right.is_empty());
    }

    fn synthetic(lengths: &[(f64, u64)], cutoff: f64) -> LengthSpectrum {
        LengthSpectrum {
            entries: lengths
                .iter()
                .map(|&(l, m)| SpectrumEntry { length: l, rotation: 0.0, multiplicity: m, witness: Word::empty() })
                .collect(),
            cutoff,
            completeness_radius: cutoff,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn comparison_examples() {
        let s = synthetic(&[(1.0, 2), (2.0, 1), (3.5, 4)], 5.0);
        let c = compare_spectra(&s, &s, 1e-9).unwrap();
        assert_eq!(c.agree_up_to, 5.0);
        assert_eq!(c.matched.len(), 7);
        let t = synthetic(&[(1.0, 2), (2.0, 1), (2.7, 1), (3.5, 4)], 5.0);
        let c = compare_spectra(&s, &t, 1e-9).unwrap();
        assert_eq!(c.only_right.len(), 1);
        assert!(c.only_left.is_empty());
        assert!((c.agree_up_to - (2.7 - 1e-9)).abs() < 1e-15);
    }

    #[test]
    fn zeta_examples() {
        let empty = synthetic(&[], 1.0);
        assert_eq!(zeta_truncated(&empty, c64(1.0, 0.0)).unwrap(), c64(1.0, 0.0));
        let one = synthetic(&[(2.0, 1)], 3.0);
        let z = zeta_truncated(&one, c64(1.0, 0.0)).unwrap();
        assert!((z.re - 1.156518).abs() < 1e-6);
        let far = zeta_truncated(&synthetic(&[(2.0, 3), (2.5, 1)], 3.0), c64(50.0, 1.0)).unwrap();
        assert!((far - c64(1.0, 0.0)).norm() < 1e-6);
        assert!(matches!(zeta_truncated(&one, c64(0.0, 1.0)), Err(Error::DomainError(_))));
        assert!(matches!(
            zeta_truncated(&one, c64(1e-14, 0.0)),
            Err(Error::PoleProximity { .. })
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let opts = SpectrumOptions { diameter_estimate: 2.0, budget: 50, ..Default::default() };
        assert_eq!(enumerate_spectrum_with(&cusped(), 6.0, &opts), Err(Error::CutoffTooLarge { budget: 50 }));
    }

    #[test]
    fn element_index_tolerates_noise() {
        let m = ProjectiveMatrix::real(3.0, 1.0, 2.0, 1.0).unwrap();
        let mut idx = ElementIndex::for_radius(4.0);
        idx.insert(&m, 0);
        let noisy = ProjectiveMatrix::new(
            m.a * (1.0 + 1e-14),
            m.b,
            m.c,
            (c64(1.0, 0.0) + m.b * m.c) / (m.a * (1.0 + 1e-14)),
        )
        .unwrap();
        assert_eq!(idx.get(&noisy), Some(0));
        assert_eq!(idx.get(&m.negated()), Some(0));
        assert_eq!(idx.get(&m.inverse()), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn counting_is_monotone(a in 3.0f64..7.0, b in 3.0f64..7.0) {
            let s = enumerate_spectrum(&cusped(), 7.0, 2.0).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(counting_function(&s, lo).unwrap() <= counting_function(&s, hi).unwrap());
        }
    }
}
