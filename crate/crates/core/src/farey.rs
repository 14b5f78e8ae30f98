//! Farey graph: adjacency, distance and stable translation length of SL(2,Z) classes.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::{HashMap, VecDeque};
use std::fmt;

/// Default hard cap on the bit size of matrix entries during iteration.
pub const DEFAULT_BIT_CAP: u64 = 1 << 16;

/// Vertex of the Farey graph: a reduced fraction `p/q` with `q >= 0`, infinity as `1/0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FareySlope {
    p: BigInt,
    q: BigInt,
}

impl FareySlope {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        Self::from_big(BigInt::from(p), BigInt::from(q))
    }

    /// Canonicalizes the sign; rejects non-coprime pairs.
    pub fn from_big(p: BigInt, q: BigInt) -> Result<Self> {
        if !p.gcd(&q).is_one() {
            return Err(Error::InvalidSlope(p.to_string(), q.to_string()));
        }
        Ok(Self::canonical(p, q))
    }

    fn canonical(p: BigInt, q: BigInt) -> Self {
        if q.is_negative() || (q.is_zero() && p.is_negative()) {
            FareySlope { p: -p, q: -q }
        } else {
            FareySlope { p, q }
        }
    }

    pub fn infinity() -> Self {
        FareySlope { p: BigInt::one(), q: BigInt::zero() }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    /// Largest of `|p|` and `q`, used to size oracles.
    pub fn height(&self) -> BigInt {
        self.p.abs().max(self.q.clone())
    }
}

impl fmt::Display for FareySlope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// How an SL(2,Z) class acts, read off from the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingClassKind {
    FiniteOrder,
    Reducible,
    PseudoAnosov,
}

/// Integer matrix of determinant 1 acting on slopes by `p/q -> (a p + b q)/(c p + d q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMappingClass {
    m: [[BigInt; 2]; 2],
}

impl IntegerMappingClass {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        Self::from_big(m.map(|row| row.map(BigInt::from)))
    }

    pub fn from_big(m: [[BigInt; 2]; 2]) -> Result<Self> {
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        if !det.is_one() {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        Ok(IntegerMappingClass { m })
    }

    pub fn identity() -> Self {
        IntegerMappingClass::new([[1, 0], [0, 1]]).unwrap()
    }

    pub fn entries(&self) -> &[[BigInt; 2]; 2] {
        &self.m
    }

    pub fn trace(&self) -> BigInt {
        &self.m[0][0] + &self.m[1][1]
    }

    pub fn kind(&self) -> MappingClassKind {
        let t = self.trace().abs();
        let two = BigInt::from(2);
        if t < two {
            MappingClassKind::FiniteOrder
        } else if t == two {
            MappingClassKind::Reducible
        } else {
            MappingClassKind::PseudoAnosov
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        let (a, b) = (&self.m, &other.m);
        let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        IntegerMappingClass { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        IntegerMappingClass { m: [[m[1][1].clone(), -&m[0][1]], [-&m[1][0], m[0][0].clone()]] }
    }

    pub fn act(&self, s: &FareySlope) -> FareySlope {
        let m = &self.m;
        FareySlope::canonical(&m[0][0] * &s.p + &m[0][1] * &s.q, &m[1][0] * &s.p + &m[1][1] * &s.q)
    }

    fn bits(&self) -> u64 {
        self.m.iter().flatten().map(|x| x.bits()).max().unwrap_or(0)
    }
}

/// True when the slopes span an edge, `|p s - q r| = 1`.
pub fn farey_adjacent(a: &FareySlope, b: &FareySlope) -> bool {
    (&a.p * &b.q - &a.q * &b.p).abs().is_one()
}

/// Graph distance in the Farey graph.
///
/// `a` is moved to infinity by an integer matrix; geodesics from infinity to `x`
/// stay among the convergents of `x`, where consecutive convergents are adjacent
/// and convergents two apart are joined by a path of length 1 or 2 around the
/// fan of the partial quotient between them.
pub fn farey_distance(a: &FareySlope, b: &FareySlope) -> u64 {
    if a == b {
        return 0;
    }
    // [[p, r], [q, s]] sends infinity to a; its inverse sends a to infinity
    let (p, q) = (&a.p, &a.q);
    let eg = p.extended_gcd(q);
    // p x + q y = 1, so r = -y and s = x give p s - q r = 1
    let (r, s) = (-eg.y, eg.x);
    debug_assert!((p * &s - q * &r).is_one());
    let to_inf = IntegerMappingClass { m: [[s, -r], [-q.clone(), p.clone()]] };
    let x = to_inf.act(b);
    distance_from_infinity(&x.p, &x.q)
}

fn distance_from_infinity(p: &BigInt, q: &BigInt) -> u64 {
    if q.is_zero() {
        return 0;
    }
    // partial quotients after the integer part: only whether each equals 1 matters
    let mut unit = Vec::new();
    let (mut num, mut den) = (p.clone(), q.clone());
    let (a0, rem) = num.div_mod_floor(&den);
    let _ = a0;
    num = den;
    den = rem;
    while !den.is_zero() {
        let (a, rem) = num.div_mod_floor(&den);
        unit.push(a.is_one());
        num = den;
        den = rem;
    }
    // node i is the convergent C_{i-1}; node 0 is infinity
    let n = unit.len() + 2;
    let mut dist = vec![u64::MAX; n];
    dist[0] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if dist[i] == u64::MAX {
                continue;
            }
            let mut relax = |j: usize, w: u64, dist: &mut Vec<u64>| {
                if dist[i] + w < dist[j] {
                    dist[j] = dist[i] + w;
                    changed = true;
                }
            };
            if i + 1 < n {
                relax(i + 1, 1, &mut dist);
            }
            if i >= 1 {
                relax(i - 1, 1, &mut dist);
            }
            // edge C_{k-2} -- C_k through fan k, node indices k-1 and k+1
            if i + 2 < n {
                relax(i + 2, if unit[i] { 1 } else { 2 }, &mut dist);
            }
            if i >= 2 {
                relax(i - 2, if unit[i - 2] { 1 } else { 2 }, &mut dist);
            }
        }
    }
    dist[n - 1]
}

/// Breadth-first distances from `source` in the subgraph of slopes with `|p|, q <= bound`.
pub fn bfs_distances(source: &FareySlope, bound: i64) -> HashMap<(i64, i64), u64> {
    let key = |s: &FareySlope| -> Option<(i64, i64)> {
        let p: i64 = (&s.p).try_into().ok()?;
        let q: i64 = (&s.q).try_into().ok()?;
        (p.abs() <= bound && q <= bound).then_some((p, q))
    };
    let mut dist = HashMap::new();
    let Some(start) = key(source) else { return dist };
    dist.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    while let Some((p, q)) = queue.pop_front() {
        let d = dist[&(p, q)];
        for nb in box_neighbors(p, q, bound) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(nb) {
                e.insert(d + 1);
                queue.push_back(nb);
            }
        }
    }
    dist
}

fn box_neighbors(p: i64, q: i64, bound: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    // r/s with p s - q r = e, e = +-1
    for s in 0..=bound {
        for e in [-1i64, 1] {
            if q == 0 {
                if s == 1 {
                    // infinity is adjacent to every integer
                    for r in -bound..=bound {
                        out.push((r, 1));
                    }
                }
                break;
            }
            let t = p * s - e;
            if t % q == 0 {
                let r = t / q;
                if r.abs() <= bound && (s > 0 || r == 1) {
                    out.push((r, s));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Samples of `d(v, phi^n v) / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableLength {
    pub kind: MappingClassKind,
    pub distances: Vec<u64>,
    pub estimates: Vec<f64>,
    /// The estimate at `n_max`.
    pub final_estimate: f64,
    /// Smallest sampled estimate; the limit by subadditivity.
    pub infimum: f64,
    /// Estimate at `n_max` from a neighbouring base vertex.
    pub alternate_final: f64,
    pub subadditive: bool,
}

/// Estimates of the stable translation length of `phi` on the Farey graph.
pub fn stable_translation_length(phi: &IntegerMappingClass, v: &FareySlope, n_max: usize) -> Result<StableLength> {
    stable_translation_length_capped(phi, v, n_max, DEFAULT_BIT_CAP)
}

pub fn stable_translation_length_capped(
    phi: &IntegerMappingClass,
    v: &FareySlope,
    n_max: usize,
    bit_cap: u64,
) -> Result<StableLength> {
    if n_max < 4 {
        return Err(Error::InvalidArgument(format!("n_max must be at least 4, got {n_max}")));
    }
    // a neighbour of v: the first spoke of the ladder, found by the extended gcd
    let eg = v.p.extended_gcd(&v.q);
    let w = FareySlope::canonical(-eg.y, eg.x);
    debug_assert!(farey_adjacent(v, &w));
    let mut power = IntegerMappingClass::identity();
    let mut distances = Vec::with_capacity(n_max);
    let mut alternate = 0;
    for n in 1..=n_max {
        power = power.compose(phi);
        if power.bits() > bit_cap {
            return Err(Error::OverflowGuard(bit_cap));
        }
        distances.push(farey_distance(v, &power.act(v)));
        if n == n_max {
            alternate = farey_distance(&w, &power.act(&w));
        }
    }
    let estimates: Vec<f64> = distances.iter().enumerate().map(|(i, &d)| d as f64 / (i + 1) as f64).collect();
    let subadditive = (1..=n_max)
        .all(|m| (1..=n_max - m).all(|n| distances[m + n - 1] <= distances[m - 1] + distances[n - 1]));
    Ok(StableLength {
        kind: phi.kind(),
        final_estimate: estimates[n_max - 1],
        infimum: estimates.iter().copied().fold(f64::INFINITY, f64::min),
        alternate_final: alternate as f64 / n_max as f64,
        distances,
        estimates,
        subadditive,
    })
}
