//! SVG rendering of horoball diagrams at 100 px per unit.
//!
//! Fuchsian diagrams (one real translation, real centers) are drawn from the side:
//! each horoball is a circle resting on the real line and the cusp at infinity is
//! the horizontal line at height 1. Other diagrams are drawn from above. Either
//! way the fundamental domain and one lattice period on each side are shown.

use std::fmt::Write;

use hypspec_core::{find_distinguished_lines, Complex, HoroballDiagram, Result};

pub const PX_PER_UNIT: f64 = 100.0;
const MARGIN: f64 = 20.0;

const STYLE: &str = ".domain{fill:none;stroke:#999;stroke-dasharray:4 4}\
.axis{stroke:#333;stroke-width:1}\
.ball{fill:none;stroke:#3a5f8f;stroke-width:1}\
.full{fill:none;stroke:#b03030;stroke-width:2}\
.line{stroke:#2a8a2a;stroke-width:1.5}";

/// Fixed three-decimal formatting without negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn class_of(full: bool) -> &'static str {
    if full {
        "full"
    } else {
        "ball"
    }
}

pub fn render(d: &HoroballDiagram) -> Result<String> {
    let lattice = d.lattice()?;
    let t = lattice.translations();
    let side_view = t.len() == 1 && t[0].im.abs() < 1e-12 && d.balls.iter().all(|b| b.center.im.abs() < 1e-9);
    let lines: Vec<(Complex, Complex)> =
        find_distinguished_lines(d)?.into_iter().map(|l| (l.basepoint, l.direction)).collect();
    let mut out = if side_view { side(d, t[0].re.abs(), !lines.is_empty()) } else { top(d, t, &lines) };
    out.push_str("</svg>\n");
    Ok(out)
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height)
    );
    let _ = writeln!(out, "<style>{STYLE}</style>");
}

/// In the side view a distinguished line is the boundary line itself.
fn side(d: &HoroballDiagram, period: f64, has_line: bool) -> String {
    let (x0, x1) = (-period, 2.0 * period);
    let width = (x1 - x0) * PX_PER_UNIT + 2.0 * MARGIN;
    let height = PX_PER_UNIT + 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) * PX_PER_UNIT;
    let py = |y: f64| MARGIN + (1.0 - y) * PX_PER_UNIT;
    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<rect class="domain" x="{}" y="{}" width="{}" height="{}"/>"#,
        num(px(0.0)),
        num(py(1.0)),
        num(period * PX_PER_UNIT),
        num(PX_PER_UNIT)
    );
    for y in [0.0, 1.0] {
        let _ = writeln!(
            out,
            r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(px(x0)),
            num(py(y)),
            num(px(x1)),
            num(py(y))
        );
    }
    if has_line {
        let _ = writeln!(
            out,
            r#"<line class="line" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(px(x0)),
            num(py(0.0)),
            num(px(x1)),
            num(py(0.0))
        );
    }
    for k in -1..=1 {
        for b in &d.balls {
            let x = b.center.re + k as f64 * period;
            let r = 0.5 * b.diameter;
            let _ = writeln!(
                out,
                r#"<circle class="{}" cx="{}" cy="{}" r="{}"/>"#,
                class_of(b.is_full_sized()),
                num(px(x)),
                num(py(r)),
                num(r * PX_PER_UNIT)
            );
        }
    }
    out
}

fn top(d: &HoroballDiagram, t: &[Complex], lines: &[(Complex, Complex)]) -> String {
    let zero = Complex::new(0.0, 0.0);
    let (u, v) = (t[0], t.get(1).copied().unwrap_or(zero));
    let range: Vec<i64> = if t.len() == 2 { vec![-1, 0, 1] } else { vec![0] };
    let shifts: Vec<Complex> = (-1..=1)
        .flat_map(|m| range.iter().map(move |&n| u * m as f64 + v * n as f64))
        .collect();
    let mut lo = Complex::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in &shifts {
        for b in &d.balls {
            let c = b.center + s;
            let r = 0.5 * b.diameter;
            lo = Complex::new(lo.re.min(c.re - r), lo.im.min(c.im - r));
            hi = Complex::new(hi.re.max(c.re + r), hi.im.max(c.im + r));
        }
        for corner in [zero, u, v, u + v] {
            let c = corner + s;
            lo = Complex::new(lo.re.min(c.re), lo.im.min(c.im));
            hi = Complex::new(hi.re.max(c.re), hi.im.max(c.im));
        }
    }
    let width = (hi.re - lo.re) * PX_PER_UNIT + 2.0 * MARGIN;
    let height = (hi.im - lo.im) * PX_PER_UNIT + 2.0 * MARGIN;
    let px = |z: Complex| (MARGIN + (z.re - lo.re) * PX_PER_UNIT, MARGIN + (hi.im - z.im) * PX_PER_UNIT);
    let mut out = String::new();
    header(&mut out, width, height);
    let corners = if t.len() == 2 { vec![zero, u, u + v, v] } else { vec![zero, u] };
    let points: Vec<String> = corners
        .iter()
        .map(|&c| {
            let (x, y) = px(c);
            format!("{},{}", num(x), num(y))
        })
        .collect();
    let _ = writeln!(out, r#"<polygon class="domain" points="{}"/>"#, points.join(" "));
    for s in &shifts {
        for b in &d.balls {
            let (x, y) = px(b.center + s);
            let _ = writeln!(
                out,
                r#"<circle class="{}" cx="{}" cy="{}" r="{}"/>"#,
                class_of(b.is_full_sized()),
                num(x),
                num(y),
                num(0.5 * b.diameter * PX_PER_UNIT)
            );
        }
    }
    // Long enough to cross the whole picture; the viewport clips the rest.
    let reach = (hi - lo).norm();
    for &(base, dir) in lines {
        let u = dir / dir.norm();
        let (x1, y1) = px(base - u * reach);
        let (x2, y2) = px(base + u * reach);
        let _ = writeln!(
            out,
            r#"<line class="line" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }
    out
}
