//! The acceptance suite as a library, shared by the test target and the CLI.

use std::f64::consts::PI;
use std::time::Instant;

use crate::cusp::{
    build_horoball_diagram, check_one_sided_isolation, check_pairwise_tangent, check_rotational_symmetry,
    find_distinguished_lines, pants_voronoi_constants, DEFAULT_DIAGRAM_BUDGET,
};
use crate::document::WorkbenchDocument;
use crate::error::{Error, Result};
use crate::farey::{bfs_distances, farey_distance, stable_translation_length, FareySlope, IntegerMappingClass};
use crate::filling::{
    core_length_estimate, normalized_length, sufficiently_different, CuspLattice, Slope, MIN_ORBIFOLD_VOLUME,
};
use crate::growth::{
    crossover_difference, crossover_length, fit_growth_exponent, logarithmic_integral, margulis_count, CountingModel,
};
use crate::moebius::{c64, complex_length};
use crate::spectrum::{
    compare_spectra, enumerate_spectrum, enumerate_spectrum_with, naive_spectrum, LengthSpectrum, SpectrumOptions,
};
use crate::surface::{
    collar_condition, gauss_bonnet_area, genus2_from_fn, hyperelliptic_action, pants_group, FenchelNielsenGenus2,
    MarkedGroup, Signature,
};
use crate::word::reduced_words;

pub const CRITERIA: [(u8, &str); 8] = [
    (1, "similar genus-2 surfaces"),
    (2, "thrice-punctured sphere goldens"),
    (3, "Voronoi numeric chain"),
    (4, "counting asymptotics"),
    (5, "enumeration oracle equivalence"),
    (6, "Dehn-filling estimates"),
    (7, "Farey suite"),
    (8, "mutation invariance"),
];

/// Separating length, twists, cutoff and diameter estimate of criterion 1.
pub const SIMILAR_SURFACES: (f64, [f64; 2], f64, f64) = (0.4, [0.0, 0.7], 6.0, 3.75);

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

/// Checks gathered by one criterion; the criterion passes when all hold.
struct Checks(Vec<(String, bool)>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn add(&mut self, what: impl Into<String>, ok: bool) {
        self.0.push((what.into(), ok));
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|(_, ok)| *ok)
    }

    fn detail(&self) -> String {
        let failed: Vec<&str> = self.0.iter().filter(|(_, ok)| !ok).map(|(w, _)| w.as_str()).collect();
        if failed.is_empty() {
            self.0.iter().map(|(w, _)| w.as_str()).collect::<Vec<_>>().join("; ")
        } else {
            format!("failed: {}", failed.join("; "))
        }
    }
}

pub fn run_criterion(id: u8) -> Result<CriterionOutcome> {
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .ok_or_else(|| Error::InvalidArgument(format!("no acceptance criterion {id}")))?;
    let start = Instant::now();
    let result = match id {
        1 => similar_surfaces(),
        2 => punctured_sphere(),
        3 => voronoi_chain(),
        4 => counting(),
        5 => oracle_equivalence(),
        6 => filling(),
        7 => farey(),
        _ => mutation(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok(mut c) => {
            match id {
                1 => c.add(format!("runtime {seconds:.1} s < 60 s"), seconds < 60.0),
                2 => c.add(format!("runtime {seconds:.1} s < 10 s"), seconds < 10.0),
                _ => {}
            }
            (c.passed(), c.detail())
        }
        Err(e) => (false, format!("error {}: {e}", e.kind())),
    };
    Ok(CriterionOutcome { id, name, passed, detail, seconds })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id).expect("known criterion")).collect()
}

fn similar_surfaces() -> Result<Checks> {
    let (l, twists, cutoff, diam) = SIMILAR_SURFACES;
    let mut c = Checks::new();
    c.add(format!("collar condition at l = {l}, n = 6"), collar_condition(l, 6.0));
    let area = gauss_bonnet_area(Signature::new(2, 0))?;
    c.add("area 4 pi", area == 4.0 * PI);
    let groups = twists
        .iter()
        .map(|&t| genus2_from_fn(&FenchelNielsenGenus2::symmetric(l, t)?))
        .collect::<Result<Vec<_>>>()?;
    let spectra = groups.iter().map(|g| enumerate_spectrum(g, cutoff, diam)).collect::<Result<Vec<_>>>()?;
    let cmp = compare_spectra(&spectra[0], &spectra[1], 1e-7)?;
    c.add(
        format!("agreeUpTo {:.3} >= 6 over {} classes", cmp.agree_up_to, spectra[0].total_multiplicity()),
        cmp.agree_up_to >= cutoff,
    );
    // every class up to the cutoff lives in one handle: the two handle spectra,
    // sharing the separating curve, add up to the whole spectrum
    for ((g, s), twist) in groups.iter().zip(&spectra).zip(twists) {
        let h1 = enumerate_spectrum(&g.sub_free_group(&[0, 1], Signature::new(1, 1))?, cutoff, diam)?;
        let h2 = enumerate_spectrum(&g.sub_free_group(&[2, 3], Signature::new(1, 1))?, cutoff, diam)?;
        let union = handle_union(&h1, &h2, l, s.completeness_radius)?;
        let cmp = compare_spectra(s, &union, 1e-7)?;
        c.add(
            format!("twist {twist}: handle spectra account for all {} classes", s.total_multiplicity()),
            cmp.only_left.is_empty() && cmp.only_right.is_empty(),
        );
    }
    Ok(c)
}

/// Both handle spectra with one copy of the shared separating curve removed.
fn handle_union(h1: &LengthSpectrum, h2: &LengthSpectrum, separating: f64, radius: f64) -> Result<LengthSpectrum> {
    let mut entries: Vec<_> = h1.entries.iter().chain(&h2.entries).cloned().collect();
    entries.sort_by(|a, b| a.length.total_cmp(&b.length));
    let k = entries
        .iter()
        .position(|e| (e.length - separating).abs() < 1e-7)
        .ok_or_else(|| Error::InvalidArgument("separating curve missing from handle spectrum".into()))?;
    if entries[k].multiplicity > 1 {
        entries[k].multiplicity -= 1;
    } else {
        entries.remove(k);
    }
    Ok(LengthSpectrum { entries, cutoff: h1.cutoff, completeness_radius: radius, warnings: Vec::new() })
}

fn punctured_sphere() -> Result<Checks> {
    let mut c = Checks::new();
    let g = pants_group(true, [0.0; 3])?;
    let expected = 2.0 * 3f64.acosh();
    let oracle = naive_spectrum(&g, 8)?;
    let bfs = enumerate_spectrum(&g, 4.0, 2.0)?;
    let (o, b) = (oracle.shortest(), bfs.shortest());
    c.add(
        "shortest geodesic 2 arccosh 3 within 1e-9 in both enumerations",
        matches!((o, b), (Some(o), Some(b)) if (o.length - expected).abs() < 1e-9 && (b.length - expected).abs() < 1e-9),
    );
    let d = build_horoball_diagram(&g, &g.peripheral()[0], 0.1, DEFAULT_DIAGRAM_BUDGET)?;
    let lines = find_distinguished_lines(&d)?;
    c.add(format!("{} distinguished line(s), expected 1", lines.len()), lines.len() == 1);
    if let Some(line) = lines.first() {
        c.add("pairwise tangent", check_pairwise_tangent(&d, line)?);
        c.add("isolated on side +1", check_one_sided_isolation(&d, line, 1)?);
        c.add("isolated on side -1", check_one_sided_isolation(&d, line, -1)?);
    }
    c.add("rotation order 3 rejected", !check_rotational_symmetry(&d, 3)?);
    c.add("rotation order 4 rejected", !check_rotational_symmetry(&d, 4)?);
    Ok(c)
}

fn voronoi_chain() -> Result<Checks> {
    let v = pants_voronoi_constants();
    let mut c = Checks::new();
    let target = (2.0 / 3f64.sqrt()).ln();
    c.add(format!("max distance {:.10} = log(2/sqrt 3)", v.max_distance), (v.max_distance - target).abs() < 1e-6);
    c.add(format!("doubled {:.6} < 0.288", v.doubled_path_bound), v.doubled_path_bound < 0.288);
    c.add(format!("clearance {:.6} > 0.332", v.clearance), v.clearance > 0.332);
    c.add(
        format!("vertex height {:.12} = sqrt 3 / 2", v.vertex_height),
        (v.vertex_height - 3f64.sqrt() / 2.0).abs() < 1e-9,
    );
    Ok(c)
}

/// Composite Simpson rule for `li` in the variable `t = log u`.
fn li_simpson(y: f64) -> f64 {
    let (a, b) = (2f64.ln(), y.ln());
    let n = 20_000;
    let h = (b - a) / n as f64;
    let f = |t: f64| t.exp() / t;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    h / 3.0 * (f(a) + inner + f(b))
}

fn counting() -> Result<Checks> {
    let mut c = Checks::new();
    let m = CountingModel::new(1.0, 10.0, 0.9)?;
    let l0 = crossover_length(&m)?;
    let samples = (0..=20).map(|k| crossover_difference(l0 + k as f64, &m)).collect::<Result<Vec<_>>>()?;
    c.add(
        format!("crossover L0 = {l0:.6}, difference increasing on [L0, L0 + 20]"),
        samples.windows(2).all(|w| w[1] > w[0]),
    );
    let mut worst = 0.0f64;
    for k in 0..20 {
        let y = (1.2 + 28.8 * k as f64 / 19.0).exp();
        let r = logarithmic_integral(y)?;
        worst = worst.max((r - li_simpson(y)).abs() / r.abs());
    }
    c.add(format!("li against Simpson: worst relative gap {worst:.1e}"), worst < 1e-6);
    for h in [1.0, 2.0] {
        let counts =
            (0..10).map(|k| 3.0 + k as f64).map(|l| Ok((l, margulis_count(l, h)?))).collect::<Result<Vec<_>>>()?;
        let fit = fit_growth_exponent(&counts)?;
        c.add(format!("fit h = {h}: {fit:.5}"), (fit - h).abs() < 0.02);
    }
    Ok(c)
}

fn oracle_equivalence() -> Result<Checks> {
    let mut c = Checks::new();
    for (name, g) in [("cusped pants", pants_group(true, [0.0; 3])?), ("(1,1,1) pants", pants_group(false, [1.0; 3])?)] {
        let oracle = naive_spectrum(&g, 8)?;
        let cutoff = oracle.cutoff;
        let bfs = enumerate_spectrum(&g, cutoff, 2.0)?.truncated(cutoff - 1e-9);
        let oracle = oracle.truncated(cutoff - 1e-9);
        let same = bfs.entries.len() == oracle.entries.len()
            && bfs.entries.iter().zip(&oracle.entries).all(|(a, b)| {
                (a.length - b.length).abs() < 1e-7 && a.multiplicity == b.multiplicity
            });
        c.add(format!("{name}: {} classes up to {cutoff:.4} match the word oracle", oracle.total_multiplicity()), same);
        let json = |p: usize| -> Result<String> {
            let opts = SpectrumOptions { diameter_estimate: 2.0, partitions: p, ..Default::default() };
            Ok(WorkbenchDocument::Spectrum(enumerate_spectrum_with(&g, cutoff, &opts)?).to_json())
        };
        let one = json(1)?;
        c.add(format!("{name}: 1, 2, 4-way splits byte-identical"), json(2)? == one && json(4)? == one);
    }
    Ok(c)
}

fn filling() -> Result<Checks> {
    let mut c = Checks::new();
    let lattice = CuspLattice::new(c64(1.0, 0.0), c64(0.3, 1.7))?;
    let mut worst = 0.0f64;
    let bases: [[[i64; 2]; 2]; 4] = [[[1, 0], [0, 1]], [[1, 1], [0, 1]], [[2, 1], [1, 1]], [[0, -1], [1, 3]]];
    for p in -7i64..=7 {
        for q in -7i64..=7 {
            let Ok(s) = Slope::new(p, q) else { continue };
            let base = normalized_length(s, &lattice)?;
            for scale in [c64(7.0, 0.0), c64(0.01, 0.0), c64(-2.0, 3.5)] {
                worst = worst.max((normalized_length(s, &lattice.scaled(scale))? - base).abs() / base);
            }
            for m in bases {
                let other = normalized_length(s.in_basis(m)?, &lattice.change_basis(m)?)?;
                worst = worst.max((other - base).abs() / base);
            }
        }
    }
    c.add(format!("scale and basis invariance, worst relative change {worst:.1e}"), worst <= 1e-12);
    c.add("core length at sqrt(2 pi) is exactly 1", core_length_estimate((2.0 * PI).sqrt())?.0 == 1.0);
    let r = sufficiently_different(&[100.0, 10.0, 1.0], 10.0 * MIN_ORBIFOLD_VOLUME, 1.0)?;
    c.add(
        format!(
            "V = 10 example: holds, chain {:.4} > {:.4} > {:.4}",
            r.chain[0], r.chain[1], r.chain[2]
        ),
        r.holds && r.chain_holds && (r.v - 10.0).abs() < 1e-12,
    );
    Ok(c)
}

fn farey() -> Result<Checks> {
    let mut c = Checks::new();
    let mut slopes = vec![FareySlope::infinity()];
    for q in 1..=20i64 {
        for p in -20..=20i64 {
            if num_integer::gcd(p, q) == 1 {
                slopes.push(FareySlope::new(p, q)?);
            }
        }
    }
    let mut mismatches = 0usize;
    let mut pairs = 0usize;
    for a in &slopes {
        let oracle = bfs_distances(a, 40);
        for b in &slopes {
            let key = (i64::try_from(b.p()).unwrap(), i64::try_from(b.q()).unwrap());
            pairs += 1;
            if oracle.get(&key) != Some(&farey_distance(a, b)) {
                mismatches += 1;
            }
        }
    }
    c.add(format!("{pairs} pairs against BFS, {mismatches} mismatches"), mismatches == 0);
    let v = FareySlope::new(0, 1)?;
    let twist = stable_translation_length(&IntegerMappingClass::new([[1, 1], [0, 1]])?, &v, 12)?;
    c.add(format!("[[1,1],[0,1]] estimate {:.4} < 0.2 at n = 12", twist.final_estimate), twist.final_estimate < 0.2);
    let cat = stable_translation_length(&IntegerMappingClass::new([[2, 1], [1, 1]])?, &v, 12)?;
    let gap = (cat.estimates[11] - cat.estimates[10]).abs();
    c.add(
        format!("[[2,1],[1,1]] estimate {:.4} > 0, gap {gap:.4} < 0.1", cat.final_estimate),
        cat.final_estimate > 0.0 && gap < 0.1,
    );
    Ok(c)
}

fn mutation() -> Result<Checks> {
    let mut c = Checks::new();
    let g: MarkedGroup = genus2_from_fn(&FenchelNielsenGenus2::symmetric(2.0, 0.7)?)?;
    let mut worst = 0.0f64;
    let mut fixed = true;
    let words = reduced_words(4, 6);
    for w in &words {
        let image = hyperelliptic_action(&g, w)?.cyclically_reduced();
        let t0 = g.evaluate(w).trace();
        let t1 = g.evaluate(&image).trace();
        worst = worst.max((t0 - t1).norm() / t0.norm().max(1.0));
        if w.is_empty() {
            continue;
        }
        let twice = hyperelliptic_action(&g, &hyperelliptic_action(&g, w)?)?.cyclically_reduced();
        fixed &= match (complex_length(&g.evaluate(w)), complex_length(&g.evaluate(&twice))) {
            (Ok(a), Ok(b)) => {
                (a.length - b.length).abs() < 1e-9 * a.length.max(1.0) && (a.rotation - b.rotation).abs() < 1e-9
            }
            (Err(_), Err(_)) => true,
            _ => false,
        };
    }
    c.add(format!("traces preserved on {} words, worst relative gap {worst:.1e}", words.len()), worst < 1e-9);
    c.add("mu twice fixes every complex length", fixed);
    Ok(c)
}
