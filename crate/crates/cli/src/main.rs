//! Command-line workbench: groups, spectra, horoball diagrams, Dehn-filling and
//! Farey estimates, counting asymptotics and the acceptance suite.

mod svg;

use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hypspec_core::cusp::{build_horoball_diagram_partial, DEFAULT_DIAGRAM_BUDGET};
use hypspec_core::document::complex_value;
use hypspec_core::reproduce::{run_criterion, CRITERIA};
use hypspec_core::spectrum::{DEFAULT_BUDGET, DEFAULT_DIAMETER};
use hypspec_core::*;

#[derive(Parser)]
#[command(name = "hypspec", version, about = "Length spectra and horoball diagrams of hyperbolic surfaces")]
struct Cli {
    /// Write the JSON document here instead of standard output
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a pair-of-pants group
    Pants {
        /// All three ends are cusps
        #[arg(long, conflicts_with = "lengths")]
        cusped: bool,
        /// Geodesic boundary lengths l1,l2,l3
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<f64>>,
    },
    /// Emit a genus-2 group from Fenchel-Nielsen data
    Genus2 {
        /// Length of the separating curve
        #[arg(long)]
        separating: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        twist: f64,
        /// tr A, tr B of the first handle (symmetric handles when omitted)
        #[arg(long, value_delimiter = ',', requires = "handle2")]
        handle1: Option<Vec<f64>>,
        /// tr A, tr B of the second handle
        #[arg(long, value_delimiter = ',', requires = "handle1")]
        handle2: Option<Vec<f64>>,
    },
    /// Enumerate primitive closed geodesics up to a cutoff
    Spectrum {
        #[command(flatten)]
        source: GroupSource,
        #[arg(long)]
        cutoff: f64,
        /// Estimate of the orbit covering radius
        #[arg(long, default_value_t = DEFAULT_DIAMETER)]
        diameter: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        partitions: usize,
        /// Count both orientations of each geodesic
        #[arg(long)]
        oriented: bool,
        /// Include proper powers
        #[arg(long)]
        imprimitive: bool,
    },
    /// Compare two spectrum documents; exits 0 iff they agree up to --require
    Compare {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 0.0)]
        require: f64,
    },
    /// Horoball diagram seen from a cusp
    Diagram {
        #[command(flatten)]
        source: GroupSource,
        /// Smallest diameter kept
        #[arg(long)]
        floor: f64,
        /// Peripheral word of the cusp (signed generator indices); first peripheral by default
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        cusp: Option<Vec<i32>>,
        #[arg(long, default_value_t = DEFAULT_DIAGRAM_BUDGET)]
        budget: usize,
        /// Keep a budget-truncated diagram (flagged incomplete) instead of failing
        #[arg(long)]
        partial: bool,
        /// Also render the diagram as SVG
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Distinguished lines, tangency, isolation and rotation checks on a diagram
    Isolate {
        /// Diagram document
        diagram: PathBuf,
        /// Rotation orders to test
        #[arg(long = "order", default_values_t = [2u32, 3, 4, 6])]
        orders: Vec<u32>,
    },
    /// Dehn-filling estimates from normalized lengths
    Nz {
        #[command(subcommand)]
        command: NzCommand,
    },
    /// Farey graph distances and stable translation lengths
    Farey {
        #[command(subcommand)]
        command: FareyCommand,
    },
    /// Counting-function asymptotics
    Asymptotics {
        #[command(subcommand)]
        command: AsymptoticsCommand,
    },
    /// Run the acceptance suite and print one line per criterion
    Reproduce {
        /// Run only these criteria
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GroupSource {
    /// Group document
    #[arg(long)]
    group: Option<PathBuf>,
    /// Thrice-punctured sphere
    #[arg(long)]
    pants_cusped: bool,
    /// Pants with geodesic boundary lengths l1,l2,l3
    #[arg(long, value_delimiter = ',')]
    pants: Option<Vec<f64>>,
    /// Symmetric genus-2 group: separating length[,twist]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    genus2: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum NzCommand {
    /// Normalized length of a slope on a cusp torus
    Length {
        /// First translation re,im
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        t1: Vec<f64>,
        /// Second translation re,im
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        t2: Vec<f64>,
        /// Slope p,q
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        slope: Vec<i64>,
    },
    /// Core geodesic length of the filled manifold
    Core {
        #[arg(long)]
        lhat: f64,
    },
    /// Volume drop of filling along the given normalized lengths
    Volume {
        #[arg(long, value_delimiter = ',')]
        lhats: Vec<f64>,
    },
    /// Separation test for three normalized lengths in descending order
    Different {
        #[arg(long, value_delimiter = ',')]
        lhats: Vec<f64>,
        /// Volume of the cusped manifold
        #[arg(long)]
        volume: f64,
        #[arg(long, default_value_t = filling::DEFAULT_MARGIN)]
        margin: f64,
    },
}

#[derive(Subcommand)]
enum FareyCommand {
    /// Graph distance between two slopes written p/q
    Distance { from: String, to: String },
    /// d(v, phi^n v) / n for n = 1..n-max
    Stable {
        /// Matrix entries a,b,c,d
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        matrix: Vec<i64>,
        #[arg(long, default_value = "0/1")]
        from: String,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
    },
}

#[derive(Subcommand)]
enum AsymptoticsCommand {
    /// Logarithmic integral li(y)
    Li { y: f64 },
    /// Margulis main term e^{hL} / (hL)
    Margulis {
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
    /// Lower bound li(e^L) - A e^{cL} and its crossover with e^L / L
    Crossover {
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        c: f64,
    },
    /// Growth exponent fitted to the counting function of a spectrum document
    Fit {
        spectrum: PathBuf,
        /// First sample length
        #[arg(long, default_value_t = 1.0)]
        from: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
}

/// Failures of the CLI itself next to library errors.
enum Failure {
    Core(Error),
    Io(String),
    Usage(String),
    /// A check ran and did not pass; the report has been written.
    CheckFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_budget() => 3,
            Failure::Core(_) | Failure::Usage(_) => 2,
            Failure::Io(_) | Failure::CheckFailed => 1,
        }
    }

    fn report(&self) -> Option<Value> {
        let (kind, message) = match self {
            Failure::Core(e) => (e.kind().to_string(), e.to_string()),
            Failure::Io(m) => ("Io".to_string(), m.clone()),
            Failure::Usage(m) => ("Usage".to_string(), m.clone()),
            Failure::CheckFailed => return None,
        };
        Some(json!({"error": {"kind": kind, "message": message, "exitCode": self.exit_code()}}))
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Outcome<WorkbenchDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(WorkbenchDocument::from_json(&text)?)
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn report(name: &str, mut body: Value) -> WorkbenchDocument {
    body["report"] = json!(name);
    WorkbenchDocument::Report(body)
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn pair(v: &[f64], what: &str) -> Outcome<Complex> {
    match v {
        [re, im] => Ok(c64(*re, *im)),
        _ => Err(Failure::Usage(format!("{what} takes two numbers re,im"))),
    }
}

fn parse_slope(s: &str) -> Outcome<FareySlope> {
    let (p, q) = s.split_once('/').ok_or_else(|| Failure::Usage(format!("slope {s:?} must be written p/q")))?;
    let int = |x: &str| x.trim().parse::<i64>().map_err(|_| Failure::Usage(format!("slope {s:?} must be written p/q")));
    Ok(FareySlope::new(int(p)?, int(q)?)?)
}

impl GroupSource {
    fn load(&self) -> Outcome<MarkedGroup> {
        if let Some(p) = &self.group {
            return Ok(read(p)?.into_group()?);
        }
        if self.pants_cusped {
            return Ok(pants_group(true, [0.0; 3])?);
        }
        if let Some(l) = &self.pants {
            let l: [f64; 3] = l.as_slice().try_into().map_err(|_| Failure::Usage("--pants takes three lengths".into()))?;
            return Ok(pants_group(false, l)?);
        }
        match self.genus2.as_deref() {
            Some([l]) => Ok(genus2_from_fn(&FenchelNielsenGenus2::symmetric(*l, 0.0)?)?),
            Some([l, t]) => Ok(genus2_from_fn(&FenchelNielsenGenus2::symmetric(*l, *t)?)?),
            _ => Err(Failure::Usage("--genus2 takes length[,twist]".into())),
        }
    }
}

fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn run(cli: Cli) -> Outcome<()> {
    let out = cli.output.as_deref();
    let emit = |d: WorkbenchDocument| write_text(out, &d.to_json());
    match cli.command {
        Command::Pants { cusped, lengths } => {
            let g = match (cusped, lengths) {
                (true, _) => pants_group(true, [0.0; 3])?,
                (false, Some(l)) => {
                    let l: [f64; 3] =
                        l.as_slice().try_into().map_err(|_| Failure::Usage("--lengths takes three lengths".into()))?;
                    pants_group(false, l)?
                }
                (false, None) => return Err(Failure::Usage("pass --cusped or --lengths l1,l2,l3".into())),
            };
            emit(WorkbenchDocument::Group(g))
        }
        Command::Genus2 { separating, twist, handle1, handle2 } => {
            let fnc = match (handle1, handle2) {
                (Some(h1), Some(h2)) => {
                    let two = |v: Vec<f64>| -> Outcome<[f64; 2]> {
                        v.as_slice().try_into().map_err(|_| Failure::Usage("handle traces take two numbers".into()))
                    };
                    FenchelNielsenGenus2::from_handle_traces(two(h1)?, two(h2)?, separating, twist)?
                }
                _ => FenchelNielsenGenus2::symmetric(separating, twist)?,
            };
            emit(WorkbenchDocument::Group(genus2_from_fn(&fnc)?))
        }
        Command::Spectrum { source, cutoff, diameter, budget, partitions, oriented, imprimitive } => {
            let g = source.load()?;
            let opts = SpectrumOptions {
                diameter_estimate: diameter,
                budget,
                partitions,
                oriented,
                include_imprimitive: imprimitive,
            };
            emit(WorkbenchDocument::Spectrum(enumerate_spectrum_with(&g, cutoff, &opts)?))
        }
        Command::Compare { left, right, tol, require } => {
            let a = read(&left)?.into_spectrum()?;
            let b = read(&right)?.into_spectrum()?;
            let cmp = compare_spectra(&a, &b, tol)?;
            let units = |u: &[spectrum::SpectrumUnit]| -> Vec<Value> {
                u.iter()
                    .map(|x| json!({"length": x.length, "rotation": x.rotation, "witness": x.witness.to_signed()}))
                    .collect()
            };
            let passed = cmp.agree_up_to >= require;
            emit(report(
                "compare",
                json!({
                    "agreeUpTo": finite(cmp.agree_up_to),
                    "tolerance": tol,
                    "require": require,
                    "matched": cmp.matched.len(),
                    "onlyLeft": units(&cmp.only_left),
                    "onlyRight": units(&cmp.only_right),
                    "passed": passed,
                }),
            ))?;
            if passed {
                Ok(())
            } else {
                Err(Failure::CheckFailed)
            }
        }
        Command::Diagram { source, floor, cusp, budget, partial, svg } => {
            let g = source.load()?;
            let word = match cusp {
                Some(w) => Word::from_signed(&w)?,
                None => g.peripheral().first().cloned().ok_or(Error::NotParabolic)?,
            };
            let d = if partial {
                build_horoball_diagram_partial(&g, &word, floor, budget)?
            } else {
                build_horoball_diagram(&g, &word, floor, budget)?
            };
            if let Some(path) = svg {
                write_text(Some(&path), &svg::render(&d)?)?;
            }
            emit(WorkbenchDocument::Diagram(d))
        }
        Command::Isolate { diagram, orders } => {
            let d = read(&diagram)?.into_diagram()?;
            let lattice = d.lattice()?;
            let mut lines = Vec::new();
            for line in find_distinguished_lines(&d)? {
                lines.push(json!({
                    "basepoint": complex_value(line.basepoint),
                    "direction": complex_value(line.direction),
                    "slope": line.slope(&lattice),
                    "members": line.members,
                    "period": line.period.map(|(v, k)| json!({"vector": complex_value(v), "coords": k})),
                    "pairwiseTangent": check_pairwise_tangent(&d, &line)?,
                    "isolatedPositive": check_one_sided_isolation(&d, &line, 1)?,
                    "isolatedNegative": check_one_sided_isolation(&d, &line, -1)?,
                }));
            }
            let mut rotation = serde_json::Map::new();
            for k in orders {
                rotation.insert(k.to_string(), json!(check_rotational_symmetry(&d, k)?));
            }
            emit(report(
                "isolation",
                json!({"lines": lines, "rotation": rotation, "complete": d.complete, "balls": d.balls.len()}),
            ))
        }
        Command::Nz { command } => emit(nz(command)?),
        Command::Farey { command } => emit(farey(command)?),
        Command::Asymptotics { command } => emit(asymptotics(command)?),
        Command::Reproduce { criteria } => {
            let ids: Vec<u8> = if criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { criteria };
            let color = color_enabled();
            let mut all = true;
            let mut text = String::new();
            for id in ids {
                let o = run_criterion(id)?;
                all &= o.passed;
                let line = o.line();
                let line = match (color, o.passed) {
                    (true, true) => line.replacen("[PASS]", "[\x1b[32mPASS\x1b[0m]", 1),
                    (true, false) => line.replacen("[FAIL]", "[\x1b[31mFAIL\x1b[0m]", 1),
                    _ => line,
                };
                text.push_str(&line);
                text.push('\n');
            }
            write_text(out, &text)?;
            if all {
                Ok(())
            } else {
                Err(Failure::CheckFailed)
            }
        }
    }
}

fn nz(command: NzCommand) -> Outcome<WorkbenchDocument> {
    Ok(match command {
        NzCommand::Length { t1, t2, slope } => {
            let lattice = CuspLattice::new(pair(&t1, "--t1")?, pair(&t2, "--t2")?)?;
            let [p, q] = slope.as_slice().try_into().map_err(|_| Failure::Usage("--slope takes p,q".into()))?;
            let s = Slope::new(p, q)?;
            report(
                "normalized-length",
                json!({"slope": [p, q], "area": lattice.area(), "normalizedLength": normalized_length(s, &lattice)?}),
            )
        }
        NzCommand::Core { lhat } => {
            let (estimate, order) = core_length_estimate(lhat)?;
            report("core-length", json!({"lhat": lhat, "estimate": estimate, "errorOrder": order}))
        }
        NzCommand::Volume { lhats } => {
            report("volume-drop", json!({"lhats": lhats, "estimate": volume_drop_estimate(&lhats)?}))
        }
        NzCommand::Different { lhats, volume, margin } => {
            let r = sufficiently_different(&lhats, volume, margin)?;
            report(
                "sufficiently-different",
                json!({
                    "holds": r.holds,
                    "v": r.v,
                    "margin": r.margin,
                    "ratios": r.ratios,
                    "coreLengths": r.core_lengths,
                    "errorOrders": r.error_orders,
                    "chain": r.chain,
                    "chainHolds": r.chain_holds,
                }),
            )
        }
    })
}

fn farey(command: FareyCommand) -> Outcome<WorkbenchDocument> {
    Ok(match command {
        FareyCommand::Distance { from, to } => {
            let (a, b) = (parse_slope(&from)?, parse_slope(&to)?);
            report(
                "farey-distance",
                json!({
                    "from": a.to_string(),
                    "to": b.to_string(),
                    "distance": farey_distance(&a, &b),
                    "adjacent": farey_adjacent(&a, &b),
                }),
            )
        }
        FareyCommand::Stable { matrix, from, n_max } => {
            let [a, b, c, d] =
                matrix.as_slice().try_into().map_err(|_| Failure::Usage("--matrix takes a,b,c,d".into()))?;
            let phi = IntegerMappingClass::new([[a, b], [c, d]])?;
            let v = parse_slope(&from)?;
            let s = stable_translation_length(&phi, &v, n_max)?;
            report(
                "stable-length",
                json!({
                    "kind": format!("{:?}", s.kind),
                    "from": v.to_string(),
                    "distances": s.distances,
                    "estimates": s.estimates,
                    "final": s.final_estimate,
                    "infimum": s.infimum,
                    "alternateFinal": s.alternate_final,
                    "subadditive": s.subadditive,
                }),
            )
        }
    })
}

fn asymptotics(command: AsymptoticsCommand) -> Outcome<WorkbenchDocument> {
    Ok(match command {
        AsymptoticsCommand::Li { y } => report("li", json!({"y": y, "li": logarithmic_integral(y)?})),
        AsymptoticsCommand::Margulis { length, h } => {
            report("margulis", json!({"length": length, "h": h, "count": margulis_count(length, h)?}))
        }
        AsymptoticsCommand::Crossover { h, a, c } => {
            let m = CountingModel::new(h, a, c)?;
            report("crossover", json!({"h": h, "a": a, "c": c, "crossover": crossover_length(&m)?}))
        }
        AsymptoticsCommand::Fit { spectrum, from, step } => {
            let s = read(&spectrum)?.into_spectrum()?;
            if !(step > 0.0) {
                return Err(Failure::Usage("--step must be positive".into()));
            }
            let mut samples = Vec::new();
            let mut l = from;
            while l <= s.cutoff + 1e-12 {
                let n = counting_function(&s, l)?;
                if n > 0 {
                    samples.push((l, n as f64));
                }
                l += step;
            }
            let h = fit_growth_exponent(&samples)?;
            report("growth-fit", json!({"samples": samples.len(), "exponent": h}))
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(r) = f.report() {
                eprintln!("{}", serde_json::to_string(&r).expect("error reports serialize"));
            }
            ExitCode::from(f.exit_code())
        }
    }
}
