//! JSON documents for groups, spectra, diagrams and reports.
//!
//! Output is canonical: keys sorted, floats rounded to 12 significant digits and
//! printed as the shortest decimal that reads back to the rounded value. Loading
//! re-validates every type invariant.

use serde_json::{json, Map, Value};

use crate::cusp::{CuspNormalization, DiagramBall, HoroballDiagram};
use crate::error::{Error, Result};
use crate::moebius::{c64, Complex, ProjectiveMatrix};
use crate::spectrum::{LengthSpectrum, NonDiscreteWarning, SpectrumEntry};
use crate::surface::{Construction, FenchelNielsenGenus2, Involution, MarkedGroup, Signature};
use crate::word::Word;

pub const DOCUMENT_VERSION: u64 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;
/// Relative determinant slack accepted for matrices read back from 12-digit decimals.
pub const LOAD_DET_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum WorkbenchDocument {
    Group(MarkedGroup),
    Spectrum(LengthSpectrum),
    Diagram(HoroballDiagram),
    /// Free-form result of a CLI check; `payload` must be an object.
    Report(Value),
}

impl WorkbenchDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            WorkbenchDocument::Group(_) => "group",
            WorkbenchDocument::Spectrum(_) => "spectrum",
            WorkbenchDocument::Diagram(_) => "diagram",
            WorkbenchDocument::Report(_) => "report",
        }
    }

    pub fn to_value(&self) -> Value {
        let mut v = match self {
            WorkbenchDocument::Group(g) => group_value(g),
            WorkbenchDocument::Spectrum(s) => spectrum_value(s),
            WorkbenchDocument::Diagram(d) => diagram_value(d),
            WorkbenchDocument::Report(r) => r.clone(),
        };
        let obj = v.as_object_mut().expect("documents are objects");
        obj.insert("kind".into(), json!(self.kind()));
        obj.insert("version".into(), json!(DOCUMENT_VERSION));
        canonical(&v)
    }

    /// Pretty-printed canonical JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| doc("document must be an object"))?;
        let version = obj.get("version").and_then(Value::as_u64).ok_or_else(|| doc("missing version"))?;
        if version != DOCUMENT_VERSION {
            return Err(doc(format!("unsupported version {version}")));
        }
        match str_field(obj, "kind")? {
            "group" => Ok(WorkbenchDocument::Group(parse_group(obj)?)),
            "spectrum" => Ok(WorkbenchDocument::Spectrum(parse_spectrum(obj)?)),
            "diagram" => Ok(WorkbenchDocument::Diagram(parse_diagram(obj)?)),
            "report" => {
                let mut r = v.clone();
                let o = r.as_object_mut().unwrap();
                o.remove("kind");
                o.remove("version");
                Ok(WorkbenchDocument::Report(r))
            }
            other => Err(doc(format!("unknown kind {other:?}"))),
        }
    }

    pub fn into_group(self) -> Result<MarkedGroup> {
        match self {
            WorkbenchDocument::Group(g) => Ok(g),
            other => Err(doc(format!("expected a group document, got {}", other.kind()))),
        }
    }

    pub fn into_spectrum(self) -> Result<LengthSpectrum> {
        match self {
            WorkbenchDocument::Spectrum(s) => Ok(s),
            other => Err(doc(format!("expected a spectrum document, got {}", other.kind()))),
        }
    }

    pub fn into_diagram(self) -> Result<HoroballDiagram> {
        match self {
            WorkbenchDocument::Diagram(d) => Ok(d),
            other => Err(doc(format!("expected a diagram document, got {}", other.kind()))),
        }
    }
}

fn doc(msg: impl Into<String>) -> Error {
    Error::Document(msg.into())
}

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap()
}

/// Rounds every float, leaves integers alone. Object keys come out sorted since
/// `serde_json::Map` is a `BTreeMap` here.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round_sig(n.as_f64().unwrap())),
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), canonical(v))).collect()),
        other => other.clone(),
    }
}

pub fn complex_value(z: Complex) -> Value {
    json!([z.re, z.im])
}

fn matrix_value(m: &ProjectiveMatrix) -> Value {
    json!({"a": complex_value(m.a), "b": complex_value(m.b), "c": complex_value(m.c), "d": complex_value(m.d)})
}

fn word_value(w: &Word) -> Value {
    json!(w.to_signed())
}

/// Stored construction parameters, rounded as they will be written.
fn rounded_construction(c: &Construction) -> Construction {
    match *c {
        Construction::Pants { cusped, boundary_lengths } => {
            Construction::Pants { cusped, boundary_lengths: boundary_lengths.map(round_sig) }
        }
        Construction::Genus2(f) => Construction::Genus2(FenchelNielsenGenus2 {
            handle1: f.handle1.map(round_sig),
            handle2: f.handle2.map(round_sig),
            separating_length: round_sig(f.separating_length),
            twist: round_sig(f.twist),
        }),
    }
}

fn construction_value(c: &Construction) -> Value {
    match c {
        Construction::Pants { cusped, boundary_lengths } => {
            json!({"pants": {"cusped": cusped, "boundaryLengths": boundary_lengths}})
        }
        Construction::Genus2(f) => json!({"genus2": {
            "handle1": f.handle1,
            "handle2": f.handle2,
            "separatingLength": f.separating_length,
            "twist": f.twist,
        }}),
    }
}

fn group_value(g: &MarkedGroup) -> Value {
    // A constructed group is written as rebuilt from its rounded parameters, so
    // that reading it back reproduces the same bytes.
    if let Some(c) = g.construction() {
        let c = rounded_construction(c);
        if let Ok(rebuilt) = c.build() {
            let mut v = plain_group_value(&rebuilt);
            v["construction"] = construction_value(&c);
            return v;
        }
    }
    plain_group_value(g)
}

fn plain_group_value(g: &MarkedGroup) -> Value {
    let s = g.signature();
    let mut v = json!({
        "generators": g.generators().iter().map(matrix_value).collect::<Vec<_>>(),
        "labels": g.labels(),
        "peripheral": g.peripheral().iter().map(word_value).collect::<Vec<_>>(),
        "relators": g.relators().iter().map(word_value).collect::<Vec<_>>(),
        "signature": [s.genus, s.punctures],
    });
    if let Some(inv) = g.involution() {
        v["involution"] = json!({
            "matrix": matrix_value(&inv.matrix),
            "images": inv.images.iter().map(word_value).collect::<Vec<_>>(),
        });
    }
    v
}

fn spectrum_value(s: &LengthSpectrum) -> Value {
    let mut v = json!({
        "entries": s.entries.iter().map(|e| json!({
            "length": e.length,
            "rotation": e.rotation,
            "mult": e.multiplicity,
            "witness": word_value(&e.witness),
        })).collect::<Vec<_>>(),
        "cutoff": s.cutoff,
        "completenessRadius": s.completeness_radius,
    });
    if !s.warnings.is_empty() {
        v["warnings"] = s
            .warnings
            .iter()
            .map(|w| json!({"word": word_value(&w.word), "angle": w.angle}))
            .collect();
    }
    v
}

fn diagram_value(d: &HoroballDiagram) -> Value {
    json!({
        "lattice": d.normalization.translations.iter().map(|&t| complex_value(t)).collect::<Vec<_>>(),
        "conjugator": matrix_value(&d.normalization.conjugator),
        "balls": d.balls.iter().map(|b| json!({
            "center": complex_value(b.center),
            "diameter": b.diameter,
            "witness": word_value(&b.witness),
        })).collect::<Vec<_>>(),
        "floor": d.floor,
        "complete": d.complete,
    })
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| doc(format!("missing field {key:?}")))
}

fn str_field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    field(obj, key)?.as_str().ok_or_else(|| doc(format!("{key:?} must be a string")))
}

fn num(v: &Value, what: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| doc(format!("{what} must be a number")))?;
    if !x.is_finite() {
        return Err(Error::NonFinite("document number"));
    }
    Ok(x)
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| doc(format!("{what} must be an array")))
}

fn parse_complex(v: &Value, what: &str) -> Result<Complex> {
    match array(v, what)?.as_slice() {
        [re, im] => Ok(c64(num(re, what)?, num(im, what)?)),
        _ => Err(doc(format!("{what} must be a [re, im] pair"))),
    }
}

fn parse_matrix(v: &Value) -> Result<ProjectiveMatrix> {
    let o = v.as_object().ok_or_else(|| doc("matrix must be an object"))?;
    let e = |k: &str| parse_complex(field(o, k)?, k);
    let (a, b, c, d) = (e("a")?, e("b")?, e("c")?, e("d")?);
    // rounding error in the determinant scales with the products of entries
    let scale = (a.norm() * d.norm() + b.norm() * c.norm()).max(1.0);
    ProjectiveMatrix::with_tolerance(a, b, c, d, LOAD_DET_TOLERANCE * scale)
}

fn parse_word(v: &Value) -> Result<Word> {
    let letters = array(v, "word")?
        .iter()
        .map(|x| x.as_i64().and_then(|i| i32::try_from(i).ok()).ok_or_else(|| doc("word letters must be integers")))
        .collect::<Result<Vec<i32>>>()?;
    Word::from_signed(&letters)
}

fn parse_words(v: &Value) -> Result<Vec<Word>> {
    array(v, "word list")?.iter().map(parse_word).collect()
}

fn parse_triple(v: &Value, what: &str) -> Result<[f64; 3]> {
    match array(v, what)?.as_slice() {
        [a, b, c] => Ok([num(a, what)?, num(b, what)?, num(c, what)?]),
        _ => Err(doc(format!("{what} must have three entries"))),
    }
}

fn parse_construction(v: &Value) -> Result<Construction> {
    let o = v.as_object().ok_or_else(|| doc("construction must be an object"))?;
    if let Some(p) = o.get("pants").and_then(Value::as_object) {
        let cusped = field(p, "cusped")?.as_bool().ok_or_else(|| doc("cusped must be a boolean"))?;
        return Ok(Construction::Pants { cusped, boundary_lengths: parse_triple(field(p, "boundaryLengths")?, "boundaryLengths")? });
    }
    if let Some(f) = o.get("genus2").and_then(Value::as_object) {
        return Ok(Construction::Genus2(FenchelNielsenGenus2 {
            handle1: parse_triple(field(f, "handle1")?, "handle1")?,
            handle2: parse_triple(field(f, "handle2")?, "handle2")?,
            separating_length: num(field(f, "separatingLength")?, "separatingLength")?,
            twist: num(field(f, "twist")?, "twist")?,
        }));
    }
    Err(doc("construction must be {\"pants\": ...} or {\"genus2\": ...}"))
}

fn parse_group(obj: &Map<String, Value>) -> Result<MarkedGroup> {
    if let Some(c) = obj.get("construction") {
        let rebuilt = parse_construction(c)?.build()?;
        let stored = array(field(obj, "generators")?, "generators")?
            .iter()
            .map(parse_matrix)
            .collect::<Result<Vec<_>>>()?;
        let agrees = stored.len() == rebuilt.rank()
            && stored.iter().zip(rebuilt.generators()).all(|(a, b)| a.approx_eq(b, 1e-9 * b.frobenius_sq().sqrt().max(1.0)));
        if !agrees {
            return Err(doc("stored generators do not match the recorded construction"));
        }
        return Ok(rebuilt);
    }
    let generators = array(field(obj, "generators")?, "generators")?
        .iter()
        .map(parse_matrix)
        .collect::<Result<Vec<_>>>()?;
    let labels = array(field(obj, "labels")?, "labels")?
        .iter()
        .map(|l| l.as_str().map(str::to_owned).ok_or_else(|| doc("labels must be strings")))
        .collect::<Result<Vec<_>>>()?;
    let sig = array(field(obj, "signature")?, "signature")?;
    let sig_part = |i: usize| {
        sig.get(i).and_then(Value::as_u64).and_then(|x| u32::try_from(x).ok()).ok_or_else(|| doc("signature must be [genus, punctures]"))
    };
    if sig.len() != 2 {
        return Err(doc("signature must be [genus, punctures]"));
    }
    let involution = match obj.get("involution") {
        None => None,
        Some(v) => {
            let o = v.as_object().ok_or_else(|| doc("involution must be an object"))?;
            Some(Involution { matrix: parse_matrix(field(o, "matrix")?)?, images: parse_words(field(o, "images")?)? })
        }
    };
    MarkedGroup::new(
        generators,
        labels,
        parse_words(field(obj, "peripheral")?)?,
        parse_words(field(obj, "relators")?)?,
        Signature::new(sig_part(0)?, sig_part(1)?),
        involution,
    )
}

fn parse_spectrum(obj: &Map<String, Value>) -> Result<LengthSpectrum> {
    let cutoff = num(field(obj, "cutoff")?, "cutoff")?;
    let completeness_radius = num(field(obj, "completenessRadius")?, "completenessRadius")?;
    let mut entries = Vec::new();
    for e in array(field(obj, "entries")?, "entries")? {
        let o = e.as_object().ok_or_else(|| doc("entry must be an object"))?;
        let multiplicity = field(o, "mult")?.as_u64().filter(|&m| m > 0).ok_or_else(|| doc("mult must be a positive integer"))?;
        entries.push(SpectrumEntry {
            length: num(field(o, "length")?, "length")?,
            rotation: num(field(o, "rotation")?, "rotation")?,
            multiplicity,
            witness: parse_word(field(o, "witness")?)?,
        });
    }
    if entries.iter().any(|e| e.length <= 0.0 || e.length > cutoff * (1.0 + 1e-11)) {
        return Err(doc("spectrum lengths must lie in (0, cutoff]"));
    }
    if entries.windows(2).any(|w| w[0].length > w[1].length) {
        return Err(doc("spectrum entries must be sorted by length"));
    }
    let warnings = match obj.get("warnings") {
        None => Vec::new(),
        Some(ws) => array(ws, "warnings")?
            .iter()
            .map(|w| {
                let o = w.as_object().ok_or_else(|| doc("warning must be an object"))?;
                Ok(NonDiscreteWarning { word: parse_word(field(o, "word")?)?, angle: num(field(o, "angle")?, "angle")? })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(LengthSpectrum { entries, cutoff, completeness_radius, warnings })
}

fn parse_diagram(obj: &Map<String, Value>) -> Result<HoroballDiagram> {
    let translations = array(field(obj, "lattice")?, "lattice")?
        .iter()
        .map(|t| parse_complex(t, "lattice vector"))
        .collect::<Result<Vec<_>>>()?;
    let conjugator = match obj.get("conjugator") {
        Some(m) => parse_matrix(m)?,
        None => ProjectiveMatrix::identity(),
    };
    let balls = array(field(obj, "balls")?, "balls")?
        .iter()
        .map(|b| {
            let o = b.as_object().ok_or_else(|| doc("ball must be an object"))?;
            Ok(DiagramBall {
                center: parse_complex(field(o, "center")?, "center")?,
                diameter: num(field(o, "diameter")?, "diameter")?,
                witness: match o.get("witness") {
                    Some(w) => parse_word(w)?,
                    None => Word::empty(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let d = HoroballDiagram {
        normalization: CuspNormalization { translations, conjugator },
        balls,
        floor: num(field(obj, "floor")?, "floor")?,
        complete: obj.get("complete").map(|c| c.as_bool().ok_or_else(|| doc("complete must be a boolean"))).transpose()?.unwrap_or(true),
    };
    d.validate()?;
    Ok(d)
}
