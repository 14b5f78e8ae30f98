//! Dehn-filling estimates from normalized slope lengths.

use crate::error::{Error, Result};
use crate::moebius::Complex;
use std::f64::consts::{PI, TAU};

/// Volume of the smallest orientable hyperbolic 3-orbifold (approximate, 5 digits).
pub const MIN_ORBIFOLD_VOLUME: f64 = 0.03905;

/// Default factor standing in for "much larger than".
pub const DEFAULT_MARGIN: f64 = 10.0;

/// Translation lattice of a rank-2 cusp, cusp torus at height 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspLattice {
    pub t1: Complex,
    pub t2: Complex,
}

impl CuspLattice {
    pub fn new(t1: Complex, t2: Complex) -> Result<Self> {
        let c = CuspLattice { t1, t2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.area();
        if !a.is_finite() || a <= 1e-300 * (self.t1.norm_sqr() + self.t2.norm_sqr()).max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateLattice(a));
        }
        Ok(())
    }

    /// Area of the cusp torus, `|Im(conj(t1) t2)|`.
    pub fn area(&self) -> f64 {
        (self.t1.conj() * self.t2).im.abs()
    }

    pub fn scaled(&self, s: Complex) -> Self {
        CuspLattice { t1: self.t1 * s, t2: self.t2 * s }
    }

    /// New basis `(a t1 + b t2, c t1 + d t2)` for `m = [[a, b], [c, d]]` of determinant ±1.
    pub fn change_basis(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        let f = |x: i64| x as f64;
        Ok(CuspLattice {
            t1: self.t1 * f(m[0][0]) + self.t2 * f(m[0][1]),
            t2: self.t1 * f(m[1][0]) + self.t2 * f(m[1][1]),
        })
    }
}

/// Slope `p t1 + q t2` with coprime coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slope {
    pub p: i64,
    pub q: i64,
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if num_integer::gcd(p, q) != 1 {
            return Err(Error::InvalidSlope(p.to_string(), q.to_string()));
        }
        Ok(Slope { p, q })
    }

    pub fn translation(&self, c: &CuspLattice) -> Complex {
        c.t1 * self.p as f64 + c.t2 * self.q as f64
    }

    /// Coordinates of the same curve in the basis produced by `CuspLattice::change_basis(m)`.
    pub fn in_basis(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() != 1 {
            return Err(Error::NotUnimodular(det.to_string()));
        }
        // (p', q') = (p, q) m^-1
        let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
        Slope::new(det * (self.p * d - self.q * c), det * (-self.p * b + self.q * a))
    }
}

/// Slope length divided by the square root of the cusp area.
pub fn normalized_length(s: Slope, c: &CuspLattice) -> Result<f64> {
    c.validate()?;
    Ok(s.translation(c).norm() / c.area().sqrt())
}

/// Core geodesic length `2 pi / L^2` of the filling, with the order `L^-4` of the
/// neglected term.
pub fn core_length_estimate(lhat: f64) -> Result<(f64, f64)> {
    if !(lhat > 0.0) || !lhat.is_finite() {
        return Err(Error::DomainError(format!("normalized length must be positive, got {lhat}")));
    }
    // written so that lhat = sqrt(2 pi) gives exactly 1
    let r = TAU.sqrt() / lhat;
    Ok((r * r, lhat.powi(-4)))
}

/// Volume lost by filling along slopes of the given normalized lengths, `pi^2 sum L^-2`.
pub fn volume_drop_estimate(lhats: &[f64]) -> Result<f64> {
    if let Some(&bad) = lhats.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::DomainError(format!("normalized length must be positive, got {bad}")));
    }
    Ok(PI * PI * lhats.iter().map(|l| l.powi(-2)).sum::<f64>())
}

/// Outcome of the separation test for three fillings.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub holds: bool,
    /// `vol(M) / vol(O_min)`.
    pub v: f64,
    pub margin: f64,
    /// `L1^2 / (V L2^2)` and `L2^2 / (V L3^2)`; the test asks both to be at least `margin`.
    pub ratios: [f64; 2],
    /// Predicted core lengths for the three slopes, in input order.
    pub core_lengths: [f64; 3],
    /// Orders of the neglected terms in `core_lengths`.
    pub error_orders: [f64; 3],
    /// `l(g3) > V l(g2) > V^2 l(g1)` evaluated on the predictions.
    pub chain: [f64; 3],
    pub chain_holds: bool,
}

/// Checks `L1^2 >= margin V L2^2` and `L2^2 >= margin V L3^2` for normalized lengths
/// sorted in descending order.
pub fn sufficiently_different(lhats: &[f64], vol_m: f64, margin: f64) -> Result<SeparationReport> {
    if lhats.len() != 3 {
        return Err(Error::InvalidArgument(format!("expected 3 normalized lengths, got {}", lhats.len())));
    }
    if !(vol_m > 0.0) || !vol_m.is_finite() {
        return Err(Error::InvalidArgument(format!("volume must be positive, got {vol_m}")));
    }
    if !(margin >= 1.0) || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!("margin must be at least 1, got {margin}")));
    }
    if lhats.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::UnsortedInput);
    }
    let mut core_lengths = [0.0; 3];
    let mut error_orders = [0.0; 3];
    for (i, &l) in lhats.iter().enumerate() {
        (core_lengths[i], error_orders[i]) = core_length_estimate(l)?;
    }
    let v = vol_m / MIN_ORBIFOLD_VOLUME;
    let sq = |x: f64| x * x;
    let ratios = [sq(lhats[0]) / (v * sq(lhats[1])), sq(lhats[1]) / (v * sq(lhats[2]))];
    let chain = [core_lengths[2], v * core_lengths[1], v * v * core_lengths[0]];
    Ok(SeparationReport {
        holds: ratios.iter().all(|&r| r >= margin),
        v,
        margin,
        ratios,
        core_lengths,
        error_orders,
        chain,
        chain_holds: chain[0] > chain[1] && chain[1] > chain[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::c64;
    use proptest::prelude::*;

    fn square() -> CuspLattice {
        CuspLattice::new(c64(1.0, 0.0), c64(0.0, 1.0)).unwrap()
    }

    #[test]
    fn normalized_length_examples() {
        assert_eq!(normalized_length(Slope::new(1, 0).unwrap(), &square()).unwrap(), 1.0);
        assert!((normalized_length(Slope::new(3, 4).unwrap(), &square()).unwrap() - 5.0).abs() < 1e-15);
        let big = square().scaled(c64(7.0, 0.0));
        assert!((normalized_length(Slope::new(3, 4).unwrap(), &big).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_lattice_and_bad_slopes() {
        assert!(matches!(CuspLattice::new(c64(1.0, 0.0), c64(2.0, 0.0)), Err(Error::DegenerateLattice(_))));
        assert!(matches!(Slope::new(2, 4), Err(Error::InvalidSlope(..))));
        assert!(matches!(Slope::new(0, 0), Err(Error::InvalidSlope(..))));
        assert!(Slope::new(-1, 0).is_ok());
    }

    #[test]
    fn core_length_examples() {
        assert!((core_length_estimate(10.0).unwrap().0 - 0.0628319).abs() < 1e-7);
        assert_eq!(core_length_estimate(TAU.sqrt()).unwrap().0, 1.0);
        assert_eq!(core_length_estimate(10.0).unwrap().1, 1e-4);
        assert!(core_length_estimate(0.0).is_err());
    }

    #[test]
    fn volume_drop_examples() {
        assert_eq!(volume_drop_estimate(&[]).unwrap(), 0.0);
        assert!((volume_drop_estimate(&[10.0]).unwrap() - 0.0986960).abs() < 1e-7);
        let three = volume_drop_estimate(&[10.0; 3]).unwrap();
        assert!((three - 3.0 * PI * PI / 100.0).abs() < 1e-15);
    }

    #[test]
    fn separation_examples() {
        let r = sufficiently_different(&[100.0, 10.0, 1.0], MIN_ORBIFOLD_VOLUME, 1.0).unwrap();
        assert!(r.holds && r.chain_holds);
        assert!((r.v - 1.0).abs() < 1e-15);
        assert!((r.chain[0] - TAU).abs() < 1e-12);
        assert!((r.chain[1] - TAU / 100.0).abs() < 1e-12);
        assert!((r.chain[2] - TAU / 1e4).abs() < 1e-12);

        let r = sufficiently_different(&[100.0, 10.0, 1.0], 10.0 * MIN_ORBIFOLD_VOLUME, 1.0).unwrap();
        assert!(r.holds && r.chain_holds);
        assert!((r.ratios[0] - 10.0).abs() < 1e-9 && (r.ratios[1] - 10.0).abs() < 1e-9);

        assert!(!sufficiently_different(&[5.0; 3], 1.0, 1.5).unwrap().holds);
        assert_eq!(sufficiently_different(&[1.0, 10.0, 100.0], 1.0, 10.0), Err(Error::UnsortedInput));
        assert!(matches!(sufficiently_different(&[3.0, 2.0, 1.0], 1.0, 0.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(sufficiently_different(&[3.0, 2.0], 1.0, 10.0), Err(Error::InvalidArgument(_))));
    }

    fn unimodular() -> impl Strategy<Value = [[i64; 2]; 2]> {
        // products of elementary moves
        prop::collection::vec(0u8..4, 0..8).prop_map(|moves| {
            let mut m = [[1i64, 0], [0, 1]];
            for mv in moves {
                let e = match mv {
                    0 => [[1, 1], [0, 1]],
                    1 => [[1, -1], [0, 1]],
                    2 => [[1, 0], [1, 1]],
                    _ => [[0, -1], [1, 0]],
                };
                m = [
                    [e[0][0] * m[0][0] + e[0][1] * m[1][0], e[0][0] * m[0][1] + e[0][1] * m[1][1]],
                    [e[1][0] * m[0][0] + e[1][1] * m[1][0], e[1][0] * m[0][1] + e[1][1] * m[1][1]],
                ];
            }
            m
        })
    }

    proptest! {
        #[test]
        fn basis_invariance(m in unimodular(), p in -20i64..20, q in -20i64..20,
                            x in -2.0f64..2.0, y in 0.3f64..3.0) {
            prop_assume!(num_integer::gcd(p, q) == 1);
            let c = CuspLattice::new(c64(1.0, 0.0), c64(x, y)).unwrap();
            let s = Slope::new(p, q).unwrap();
            let c2 = c.change_basis(m).unwrap();
            let s2 = s.in_basis(m).unwrap();
            prop_assert!((s.translation(&c) - s2.translation(&c2)).norm() < 1e-9);
            let a = normalized_length(s, &c).unwrap();
            let b = normalized_length(s2, &c2).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn scale_invariance(p in -30i64..30, q in -30i64..30, x in -2.0f64..2.0, y in 0.3f64..3.0,
                            re in -5.0f64..5.0, im in -5.0f64..5.0) {
            prop_assume!(num_integer::gcd(p, q) == 1 && re.hypot(im) > 1e-2);
            let c = CuspLattice::new(c64(1.0, 0.0), c64(x, y)).unwrap();
            let s = Slope::new(p, q).unwrap();
            let a = normalized_length(s, &c).unwrap();
            let b = normalized_length(s, &c.scaled(c64(re, im))).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn core_length_strictly_decreasing(a in 0.01f64..1e3, f in 1.001f64..10.0) {
            prop_assert!(core_length_estimate(a * f).unwrap().0 < core_length_estimate(a).unwrap().0);
        }

        #[test]
        fn volume_drop_grows_with_slopes(ls in prop::collection::vec(0.1f64..100.0, 0..6), extra in 0.1f64..100.0) {
            let before = volume_drop_estimate(&ls).unwrap();
            let mut more = ls.clone();
            more.push(extra);
            prop_assert!(volume_drop_estimate(&more).unwrap() > before);
        }

        #[test]
        fn margin_anti_monotone(mut ls in prop::collection::vec(0.1f64..1e3, 3), vol in 0.01f64..10.0,
                                m in 1.0f64..50.0, dm in 0.0f64..50.0) {
            ls.sort_by(|a, b| b.total_cmp(a));
            if sufficiently_different(&ls, vol, m + dm).unwrap().holds {
                prop_assert!(sufficiently_different(&ls, vol, m).unwrap().holds);
            }
        }
    }
}
