//! Python bindings. Groups, spectra and diagrams are classes that round-trip
//! through the JSON document format; reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde_json::{json, Value};

use hypspec_core as core;
use hypspec_core::document::complex_value;
use hypspec_core::spectrum::{DEFAULT_BUDGET, DEFAULT_DIAMETER};
use hypspec_core::{
    FenchelNielsenGenus2, HoroballDiagram, LengthSpectrum, MarkedGroup, SpectrumOptions, WorkbenchDocument, Word,
};

create_exception!(hypspec, HypspecError, PyException);
create_exception!(hypspec, BudgetError, HypspecError);

fn err(e: core::Error) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    if e.is_budget() {
        BudgetError::new_err(msg)
    } else {
        HypspecError::new_err(msg)
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

/// A marked Fuchsian group with its generators, peripheral words and relators.
#[pyclass(module = "hypspec", frozen)]
struct Group {
    inner: MarkedGroup,
}

#[pymethods]
impl Group {
    /// Pair of pants: three cusps, or geodesic boundary of the given lengths.
    #[staticmethod]
    #[pyo3(signature = (lengths=None))]
    fn pants(lengths: Option<[f64; 3]>) -> PyResult<Self> {
        let inner = match lengths {
            Some(l) => core::pants_group(false, l),
            None => core::pants_group(true, [0.0; 3]),
        }
        .py()?;
        Ok(Group { inner })
    }

    /// Closed genus-2 surface. Handles are symmetric unless both trace pairs are given.
    #[staticmethod]
    #[pyo3(signature = (separating, twist=0.0, handle1=None, handle2=None))]
    fn genus2(separating: f64, twist: f64, handle1: Option<[f64; 2]>, handle2: Option<[f64; 2]>) -> PyResult<Self> {
        let fnc = match (handle1, handle2) {
            (Some(h1), Some(h2)) => FenchelNielsenGenus2::from_handle_traces(h1, h2, separating, twist),
            (None, None) => FenchelNielsenGenus2::symmetric(separating, twist),
            _ => return Err(HypspecError::new_err("InvalidArgument: give both handles or neither")),
        }
        .py()?;
        Ok(Group { inner: core::genus2_from_fn(&fnc).py()? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Group { inner: WorkbenchDocument::from_json(text).and_then(|d| d.into_group()).py()? })
    }

    fn to_json(&self) -> String {
        WorkbenchDocument::Group(self.inner.clone()).to_json()
    }

    /// (genus, punctures)
    #[getter]
    fn signature(&self) -> (u32, u32) {
        let s = self.inner.signature();
        (s.genus, s.punctures)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    /// Complex trace of the word given as signed 1-based generator indices.
    fn trace(&self, word: Vec<i32>) -> PyResult<(f64, f64)> {
        let w = Word::from_signed(&word).py()?;
        let t = self.inner.evaluate(&w).trace();
        Ok((t.re, t.im))
    }

    /// (length, rotation) of a loxodromic word.
    fn complex_length(&self, word: Vec<i32>) -> PyResult<(f64, f64)> {
        let w = Word::from_signed(&word).py()?;
        let c = core::complex_length(&self.inner.evaluate(&w)).py()?;
        Ok((c.length, c.rotation))
    }

    /// Same surface with the separating twist increased by `delta`.
    fn twisted(&self, delta: f64) -> PyResult<Self> {
        Ok(Group { inner: core::twist_along_curve(&self.inner, delta).py()? })
    }

    /// Image of a word under the hyper-elliptic involution.
    fn involution_image(&self, word: Vec<i32>) -> PyResult<Vec<i32>> {
        let w = Word::from_signed(&word).py()?;
        Ok(core::hyperelliptic_action(&self.inner, &w).py()?.to_signed())
    }

    #[pyo3(signature = (cutoff, diameter=DEFAULT_DIAMETER, budget=DEFAULT_BUDGET, partitions=1, oriented=false, imprimitive=false))]
    fn spectrum(
        &self,
        py: Python<'_>,
        cutoff: f64,
        diameter: f64,
        budget: usize,
        partitions: usize,
        oriented: bool,
        imprimitive: bool,
    ) -> PyResult<Spectrum> {
        let opts = SpectrumOptions {
            diameter_estimate: diameter,
            budget,
            partitions,
            oriented,
            include_imprimitive: imprimitive,
        };
        let inner = py.detach(|| core::enumerate_spectrum_with(&self.inner, cutoff, &opts)).py()?;
        Ok(Spectrum { inner })
    }

    /// Horoball diagram at the cusp of `cusp` (default: first peripheral word).
    #[pyo3(signature = (floor, cusp=None, budget=core::cusp::DEFAULT_DIAGRAM_BUDGET, partial=false))]
    fn diagram(
        &self,
        py: Python<'_>,
        floor: f64,
        cusp: Option<Vec<i32>>,
        budget: usize,
        partial: bool,
    ) -> PyResult<Diagram> {
        let word = match cusp {
            Some(w) => Word::from_signed(&w).py()?,
            None => self.inner.peripheral().first().cloned().ok_or_else(|| err(core::Error::NotParabolic))?,
        };
        let inner = py
            .detach(|| {
                if partial {
                    core::build_horoball_diagram_partial(&self.inner, &word, floor, budget)
                } else {
                    core::build_horoball_diagram(&self.inner, &word, floor, budget)
                }
            })
            .py()?;
        Ok(Diagram { inner })
    }

    fn __repr__(&self) -> String {
        let (g, k) = self.signature();
        format!("Group(genus={g}, punctures={k}, rank={})", self.inner.rank())
    }
}

/// Unoriented primitive length spectrum up to a cutoff.
#[pyclass(module = "hypspec", frozen)]
struct Spectrum {
    inner: LengthSpectrum,
}

#[pymethods]
impl Spectrum {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Spectrum { inner: WorkbenchDocument::from_json(text).and_then(|d| d.into_spectrum()).py()? })
    }

    fn to_json(&self) -> String {
        WorkbenchDocument::Spectrum(self.inner.clone()).to_json()
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.inner.cutoff
    }

    /// (length, rotation, multiplicity, witness) tuples in increasing length.
    #[getter]
    fn entries(&self) -> Vec<(f64, f64, u64, Vec<i32>)> {
        self.inner
            .entries
            .iter()
            .map(|e| (e.length, e.rotation, e.multiplicity, e.witness.to_signed()))
            .collect()
    }

    /// Number of geodesics of length at most `length`, with multiplicity.
    fn count(&self, length: f64) -> PyResult<u64> {
        core::counting_function(&self.inner, length).py()
    }

    fn truncated(&self, cutoff: f64) -> Self {
        Spectrum { inner: self.inner.truncated(cutoff) }
    }

    /// Match against another spectrum; returns agreeUpTo, matched, onlyLeft, onlyRight.
    #[pyo3(signature = (other, tol=1e-7))]
    fn compare<'py>(&self, py: Python<'py>, other: &Spectrum, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let c = core::compare_spectra(&self.inner, &other.inner, tol).py()?;
        let lengths = |u: &[core::spectrum::SpectrumUnit]| u.iter().map(|x| x.length).collect::<Vec<_>>();
        let agree = if c.agree_up_to.is_finite() { json!(c.agree_up_to) } else { Value::Null };
        to_py(
            py,
            &json!({
                "agreeUpTo": agree,
                "matched": c.matched.len(),
                "onlyLeft": lengths(&c.only_left),
                "onlyRight": lengths(&c.only_right),
            }),
        )
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(cutoff={}, entries={})", self.inner.cutoff, self.inner.entries.len())
    }
}

/// Horoballs seen from one cusp, modulo its translation lattice.
#[pyclass(module = "hypspec", frozen)]
struct Diagram {
    inner: HoroballDiagram,
}

#[pymethods]
impl Diagram {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Diagram { inner: WorkbenchDocument::from_json(text).and_then(|d| d.into_diagram()).py()? })
    }

    fn to_json(&self) -> String {
        WorkbenchDocument::Diagram(self.inner.clone()).to_json()
    }

    #[getter]
    fn complete(&self) -> bool {
        self.inner.complete
    }

    /// Lattice translations as (re, im).
    #[getter]
    fn translations(&self) -> Vec<(f64, f64)> {
        self.inner.normalization.translations.iter().map(|t| (t.re, t.im)).collect()
    }

    /// ((re, im), diameter) per ball.
    #[getter]
    fn balls(&self) -> Vec<((f64, f64), f64)> {
        self.inner.balls.iter().map(|b| ((b.center.re, b.center.im), b.diameter)).collect()
    }

    /// Distinguished lines with their tangency and isolation checks.
    fn lines<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let d = &self.inner;
        let mut out = Vec::new();
        for line in core::find_distinguished_lines(d).py()? {
            out.push(json!({
                "basepoint": complex_value(line.basepoint),
                "direction": complex_value(line.direction),
                "members": line.members,
                "pairwiseTangent": core::check_pairwise_tangent(d, &line).py()?,
                "isolatedPositive": core::check_one_sided_isolation(d, &line, 1).py()?,
                "isolatedNegative": core::check_one_sided_isolation(d, &line, -1).py()?,
            }));
        }
        to_py(py, &Value::Array(out))
    }

    fn rotational_symmetry(&self, order: u32) -> PyResult<bool> {
        core::check_rotational_symmetry(&self.inner, order).py()
    }

    fn __len__(&self) -> usize {
        self.inner.balls.len()
    }
}

#[pyfunction]
fn logarithmic_integral(y: f64) -> PyResult<f64> {
    core::logarithmic_integral(y).py()
}

#[pyfunction]
#[pyo3(signature = (length, h=1.0))]
fn margulis_count(length: f64, h: f64) -> PyResult<f64> {
    core::margulis_count(length, h).py()
}

#[pyfunction]
fn crossover_length(h: f64, a: f64, c: f64) -> PyResult<f64> {
    core::crossover_length(&core::CountingModel::new(h, a, c).py()?).py()
}

#[pyfunction]
fn fit_growth_exponent(samples: Vec<(f64, f64)>) -> PyResult<f64> {
    core::fit_growth_exponent(&samples).py()
}

/// Normalized length of slope (p, q) on the cusp torus spanned by t1, t2.
#[pyfunction]
fn normalized_length(t1: (f64, f64), t2: (f64, f64), slope: (i64, i64)) -> PyResult<f64> {
    let lattice = core::CuspLattice::new(core::c64(t1.0, t1.1), core::c64(t2.0, t2.1)).py()?;
    core::normalized_length(core::Slope::new(slope.0, slope.1).py()?, &lattice).py()
}

/// (estimate, error order) of the core geodesic length.
#[pyfunction]
fn core_length_estimate(lhat: f64) -> PyResult<(f64, f64)> {
    core::core_length_estimate(lhat).py()
}

#[pyfunction]
fn volume_drop_estimate(lhats: Vec<f64>) -> PyResult<f64> {
    core::volume_drop_estimate(&lhats).py()
}

#[pyfunction]
#[pyo3(signature = (lhats, volume, margin=core::DEFAULT_MARGIN))]
fn sufficiently_different<'py>(py: Python<'py>, lhats: Vec<f64>, volume: f64, margin: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = core::sufficiently_different(&lhats, volume, margin).py()?;
    to_py(
        py,
        &json!({
            "holds": r.holds,
            "v": r.v,
            "ratios": r.ratios,
            "coreLengths": r.core_lengths,
            "chain": r.chain,
            "chainHolds": r.chain_holds,
        }),
    )
}

#[pyfunction]
fn farey_distance(a: (i64, i64), b: (i64, i64)) -> PyResult<u64> {
    let a = core::FareySlope::new(a.0, a.1).py()?;
    let b = core::FareySlope::new(b.0, b.1).py()?;
    Ok(core::farey_distance(&a, &b))
}

/// Samples of d(v, phi^n v) / n for the mapping class with matrix [[a, b], [c, d]].
#[pyfunction]
#[pyo3(signature = (matrix, start=(0, 1), n_max=12))]
fn stable_translation_length<'py>(
    py: Python<'py>,
    matrix: [[i64; 2]; 2],
    start: (i64, i64),
    n_max: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let phi = core::IntegerMappingClass::new(matrix).py()?;
    let v = core::FareySlope::new(start.0, start.1).py()?;
    let s = core::stable_translation_length(&phi, &v, n_max).py()?;
    to_py(
        py,
        &json!({
            "kind": format!("{:?}", s.kind),
            "distances": s.distances,
            "final": s.final_estimate,
            "infimum": s.infimum,
        }),
    )
}

/// Run one acceptance criterion; returns (passed, report line).
#[pyfunction]
fn run_criterion(py: Python<'_>, id: u8) -> PyResult<(bool, String)> {
    let o = py.detach(|| core::reproduce::run_criterion(id)).py()?;
    Ok((o.passed, o.line()))
}

#[pymodule]
fn hypspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HypspecError", m.py().get_type::<HypspecError>())?;
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    m.add_class::<Group>()?;
    m.add_class::<Spectrum>()?;
    m.add_class::<Diagram>()?;
    m.add_function(wrap_pyfunction!(logarithmic_integral, m)?)?;
    m.add_function(wrap_pyfunction!(margulis_count, m)?)?;
    m.add_function(wrap_pyfunction!(crossover_length, m)?)?;
    m.add_function(wrap_pyfunction!(fit_growth_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_length, m)?)?;
    m.add_function(wrap_pyfunction!(core_length_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(volume_drop_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(sufficiently_different, m)?)?;
    m.add_function(wrap_pyfunction!(farey_distance, m)?)?;
    m.add_function(wrap_pyfunction!(stable_translation_length, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
