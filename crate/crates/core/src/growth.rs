//! Geodesic counting asymptotics: the logarithmic integral, the Margulis count,
//! the Pollicott-Sharp lower bound and where it overtakes `e^L / L`.

use crate::error::{Error, Result};

/// Error-term model `pi(L) >= li(e^L) - A e^{cL}` with growth exponent `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingModel {
    pub h: f64,
    pub a: f64,
    pub c: f64,
}

impl CountingModel {
    pub fn new(h: f64, a: f64, c: f64) -> Result<Self> {
        let m = CountingModel { h, a, c };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidArgument(format!("growth exponent h = {} must be positive", self.h)));
        }
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidArgument(format!("A = {} must be non-negative", self.a)));
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::InvalidArgument(format!("c = {} must lie in [0, 1)", self.c)));
        }
        Ok(())
    }
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let center = f(mid);
    let mut kronrod = KRONROD_WEIGHTS[7] * center;
    let mut gauss = GAUSS_WEIGHTS[3] * center;
    for i in 0..7 {
        let x = half * GK_NODES[i];
        let pair = f(mid - x) + f(mid + x);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gauss_kronrod(f, a, b);
    if err <= tol || depth == 0 {
        return value;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// `li(y) = integral from 2 to y of du / log u`, by adaptive Gauss-Kronrod in `t = log u`.
/// The relative error is below 1e-13.
pub fn logarithmic_integral(y: f64) -> Result<f64> {
    if !(y >= 2.0) {
        return Err(Error::DomainError(format!("li(y) needs y >= 2, got {y}")));
    }
    if y.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let (lo, hi) = (2f64.ln(), y.ln());
    if hi <= lo {
        return Ok(0.0);
    }
    let f = |t: f64| t.exp() / t;
    // The integrand is increasing, so a crude bound of the value sets the tolerance.
    let scale = (hi - lo) * f(hi).max(f(lo));
    Ok(adaptive(&f, lo, hi, 1e-14 * scale, 40))
}

/// Asymptotic count `e^{hL} / (hL)` of closed geodesics of length at most `L`.
pub fn margulis_count(length: f64, h: f64) -> Result<f64> {
    if !(length > 0.0) || !(h > 0.0) {
        return Err(Error::DomainError(format!("margulis count needs L > 0 and h > 0, got L = {length}, h = {h}")));
    }
    Ok((h * length).exp() / (h * length))
}

/// `li(e^L) - A e^{cL}`.
pub fn ps_lower_bound(length: f64, m: &CountingModel) -> Result<f64> {
    if !(length >= 2f64.ln()) {
        return Err(Error::DomainError(format!("lower bound needs L >= log 2, got {length}")));
    }
    m.validate()?;
    Ok(logarithmic_integral(length.exp())? - m.a * (m.c * length).exp())
}

/// `li(e^L) - A e^{cL} - e^L / L`, which tends to infinity for any model.
pub fn crossover_difference(length: f64, m: &CountingModel) -> Result<f64> {
    Ok(ps_lower_bound(length, m)? - length.exp() / length)
}

pub const CROSSOVER_CAP: f64 = 200.0;
pub const CROSSOVER_WINDOW: f64 = 20.0;
const CROSSOVER_STEP: f64 = 0.05;

/// Smallest `L0` with the lower bound above `e^L / L` at every sample of
/// `[L0, L0 + 20]`, refined by bisection to 1e-6.
pub fn crossover_length(m: &CountingModel) -> Result<f64> {
    m.validate()?;
    let start = 2f64.ln();
    let window = (CROSSOVER_WINDOW / CROSSOVER_STEP).round() as usize;
    let grid = ((CROSSOVER_CAP - start) / CROSSOVER_STEP).ceil() as usize + window + 1;
    let xs: Vec<f64> = (0..grid).map(|k| start + k as f64 * CROSSOVER_STEP).collect();
    let ds = xs.iter().map(|&x| crossover_difference(x, m)).collect::<Result<Vec<f64>>>()?;

    // Walk backwards keeping the index of the nearest negative sample ahead.
    let mut next_negative = vec![usize::MAX; grid];
    let mut seen = usize::MAX;
    for k in (0..grid).rev() {
        if ds[k] < 0.0 {
            seen = k;
        }
        next_negative[k] = seen;
    }
    let first = (0..grid - window)
        .take_while(|&k| xs[k] <= CROSSOVER_CAP)
        .find(|&k| next_negative[k] > k + window)
        .ok_or(Error::SearchExhausted(CROSSOVER_CAP))?;
    if first == 0 {
        return Ok(start);
    }
    // ds[first - 1] < 0 <= ds[first]
    let (mut lo, mut hi) = (xs[first - 1], xs[first]);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if crossover_difference(mid, m)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Least-squares slope of `log(pi(L) L)` against `L`.
pub fn fit_growth_exponent(counts: &[(f64, f64)]) -> Result<f64> {
    if counts.len() < 5 {
        return Err(Error::InsufficientData(format!("need at least 5 samples, got {}", counts.len())));
    }
    if counts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InsufficientData("sample lengths must be strictly increasing".into()));
    }
    if counts.iter().any(|&(l, p)| !(p >= 1.0) || !(l > 0.0) || !l.is_finite() || !p.is_finite()) {
        return Err(Error::InsufficientData("counts must be at least 1 at positive lengths".into()));
    }
    let n = counts.len() as f64;
    let pts: Vec<(f64, f64)> = counts.iter().map(|&(l, p)| (l, (p * l).ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    // Exponential integral by its power series; all terms are positive for x > 0.
    fn ei_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..400 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-18 * sum {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    }

    fn li_oracle(y: f64) -> f64 {
        ei_series(y.ln()) - ei_series(2f64.ln())
    }

    #[test]
    fn li_examples() {
        assert_eq!(logarithmic_integral(2.0).unwrap(), 0.0);
        let v = logarithmic_integral(2f64.exp()).unwrap();
        assert!((v - 3.909_070_6).abs() < 1e-6, "{v}");
        let y = 30f64.exp();
        let ratio = logarithmic_integral(y).unwrap() * y.ln() / y;
        assert!((ratio - 1.0).abs() < 0.05);
        assert!(matches!(logarithmic_integral(1.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn li_matches_series_oracle() {
        for k in 0..20 {
            let t = 2f64.ln() + (30.0 - 2f64.ln()) * (k as f64 / 19.0);
            let y = t.exp();
            let (got, want) = (logarithmic_integral(y).unwrap(), li_oracle(y));
            let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            assert!(rel < 1e-10, "y = {y}: {got} vs {want}");
        }
    }

    #[test]
    fn margulis_examples() {
        assert!((margulis_count(1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-12);
        assert!((margulis_count(1.0, 2.0).unwrap() - 3.694_528_0).abs() < 1e-7);
        let r = margulis_count(50.0, 1.0).unwrap() / margulis_count(49.0, 1.0).unwrap();
        // the ratio is e (L - 1) / L, so 2% off at L = 50
        assert!((r / std::f64::consts::E - 49.0 / 50.0).abs() < 1e-12);
        assert!((r / std::f64::consts::E - 1.0).abs() < 0.021);
    }

    #[test]
    fn lower_bound_examples() {
        let free = CountingModel::new(1.0, 0.0, 0.5).unwrap();
        assert_eq!(ps_lower_bound(4.0, &free).unwrap(), logarithmic_integral(4f64.exp()).unwrap());
        let m = CountingModel::new(1.0, 10.0, 0.9).unwrap();
        let v = ps_lower_bound(5.0, &m).unwrap();
        assert!((v - (li_oracle(5f64.exp()) - 10.0 * 4.5f64.exp())).abs() < 1e-8);
        assert!(v < 0.0);
        assert!(ps_lower_bound(0.5, &m).is_err());
    }

    #[test]
    fn crossover_without_error_term() {
        let m = CountingModel::new(1.0, 0.0, 0.0).unwrap();
        let l0 = crossover_length(&m).unwrap();
        assert!(l0 < 2.0);
        // bisection oracle for li(e^L) = e^L / L
        let (mut lo, mut hi) = (1.0, 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if li_oracle(f64::exp(mid)) >= mid.exp() / mid {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((l0 - hi).abs() < 1e-6);
    }

    #[test]
    fn crossover_with_error_term_is_increasing_after() {
        let m = CountingModel::new(1.0, 10.0, 0.9).unwrap();
        let l0 = crossover_length(&m).unwrap();
        assert!(l0.is_finite() && l0 < CROSSOVER_CAP);
        let ds: Vec<f64> = (0..=20).map(|k| crossover_difference(l0 + k as f64, &m).unwrap()).collect();
        assert!(ds.windows(2).all(|w| w[1] > w[0]));
        let more = CountingModel::new(1.0, 100.0, 0.9).unwrap();
        assert!(crossover_length(&more).unwrap() > l0);
    }

    #[test]
    fn crossover_cap_is_reported() {
        let m = CountingModel::new(1.0, 1e80, 0.9).unwrap();
        assert_eq!(crossover_length(&m), Err(Error::SearchExhausted(CROSSOVER_CAP)));
    }

    #[test]
    fn model_validation() {
        assert!(CountingModel::new(1.0, 1.0, 1.0).is_err());
        assert!(CountingModel::new(0.0, 1.0, 0.5).is_err());
        assert!(CountingModel::new(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_exponents() {
        for h in [1.0, 2.0] {
            let counts: Vec<(f64, f64)> = (0..10).map(|k| 3.0 + k as f64).map(|l| (l, margulis_count(l, h).unwrap())).collect();
            assert!((fit_growth_exponent(&counts).unwrap() - h).abs() < 0.02);
        }
        assert!(matches!(fit_growth_exponent(&[(1.0, 1.0); 3]), Err(Error::InsufficientData(_))));
    }

    proptest! {
        #[test]
        fn lower_bound_never_exceeds_li(l in 0.7f64..40.0, a in 0.0f64..1e3, c in 0.0f64..0.99) {
            let m = CountingModel::new(1.0, a, c).unwrap();
            prop_assert!(ps_lower_bound(l, &m).unwrap() <= logarithmic_integral(l.exp()).unwrap());
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn difference_increases_past_crossover(a in 0.0f64..1e3, c in 0.0f64..0.95, k in 0usize..30) {
            let m = CountingModel::new(1.0, a, c).unwrap();
            // close to c = 1 the crossover can lie past the search cap
            let l0 = crossover_length(&m);
            prop_assume!(l0.is_ok());
            let x = l0.unwrap() + 5.0 + k as f64;
            prop_assert!(crossover_difference(x + 1.0, &m).unwrap() > crossover_difference(x, &m).unwrap());
        }

        #[test]
        fn crossover_monotone_in_a(a in 0.0f64..100.0, c in 0.0f64..0.9) {
            let lo = crossover_length(&CountingModel::new(1.0, a, c).unwrap()).unwrap();
            let hi = crossover_length(&CountingModel::new(1.0, a * 2.0 + 1.0, c).unwrap()).unwrap();
            prop_assert!(hi >= lo - 1e-6);
        }
    }
}
