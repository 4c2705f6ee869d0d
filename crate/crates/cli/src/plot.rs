use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use switchsafe::geometry::{Polytope, PolytopeJson};
use switchsafe::system::SwitchedSystem;

use crate::io::read_json;
use crate::{Artifact, CliError};

const PANEL: f64 = 240.0;
const PAD: f64 = 16.0;
const TITLE: f64 = 22.0;
const COLUMNS: usize = 3;
const CONSTRAINT_FILL: &str = "#f3d55b";
const MEMBER_FILL: &str = "#3d6fb6";

/// One node's drawing: optional constraint set beneath, then the member pieces.
pub struct Panel {
    pub label: String,
    pub constraint: Option<Polytope>,
    pub pieces: Vec<Polytope>,
}

fn pieces_of(path: &Path, node: &str, v: &Value) -> Result<Vec<Polytope>, CliError> {
    let parse = |v: &Value| -> Result<Polytope, CliError> {
        let bad = |m: String| CliError::Parse { path: path.into(), message: format!("set of node {node:?}: {m}") };
        let pj: PolytopeJson = serde_json::from_value(v.clone()).map_err(|e| bad(e.to_string()))?;
        Polytope::try_from(&pj).map_err(|e| bad(e.to_string()))
    };
    match v {
        Value::Array(items) => items.iter().map(parse).collect(),
        other => Ok(vec![parse(other)?]),
    }
}

/// Reads a multi-set file and draws it, or summarizes it in text when the
/// sets are not planar.
pub fn plot_file(path: &Path, sys: Option<&SwitchedSystem>) -> Result<(Artifact, String), CliError> {
    let v: Value = read_json(path)?;
    let sets = v
        .get("sets")
        .and_then(Value::as_object)
        .ok_or_else(|| CliError::Parse { path: path.into(), message: "missing \"sets\" object".into() })?;
    let mut panels = Vec::with_capacity(sets.len());
    for (name, value) in sets {
        let constraint = match sys {
            Some(s) => {
                let j =
                    s.graph().index_of(name).ok_or_else(|| CliError::Input(format!("system has no node {name:?}")))?;
                s.constraints().map(|xs| xs[j].clone())
            }
            None => None,
        };
        panels.push(Panel { label: name.clone(), constraint, pieces: pieces_of(path, name, value)? });
    }
    if panels.iter().flat_map(|p| &p.pieces).any(|p| p.dim() != 2) {
        return Ok((Artifact::Text(text_summary(&panels)), "sets are not planar; wrote a text summary".into()));
    }
    let svg = render_svg(&panels)?;
    Ok((Artifact::Text(svg), format!("drew {} panel(s)", panels.len())))
}

fn text_summary(panels: &[Panel]) -> String {
    let mut out = String::new();
    for p in panels {
        for (k, piece) in p.pieces.iter().enumerate() {
            let n = piece.dim();
            let ranges: Vec<String> = (0..n)
                .map(|i| {
                    let e = nalgebra::DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
                    format!("[{}, {}]", num(-piece.support(&-&e)), num(piece.support(&e)))
                })
                .collect();
            let _ = writeln!(out, "node {} piece {}: {}", p.label, k + 1, ranges.join(" x "));
        }
    }
    out
}

/// Fixed three-decimal formatting without negative zero.
fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// SVG with one panel per node on a shared scale. Output depends only on
/// the panels, so equal inputs give byte-identical files.
pub fn render_svg(panels: &[Panel]) -> Result<String, CliError> {
    let mut polys: Vec<(usize, bool, Vec<[f64; 2]>)> = Vec::new();
    for (i, p) in panels.iter().enumerate() {
        for (is_member, set) in p.constraint.iter().map(|c| (false, c)).chain(p.pieces.iter().map(|s| (true, s))) {
            let pts = set.polygon().map_err(|e| CliError::Input(format!("node {}: {e}", p.label)))?;
            polys.push((i, is_member, pts));
        }
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for pt in polys.iter().flat_map(|p| &p.2) {
        for k in 0..2 {
            lo[k] = lo[k].min(pt[k]);
            hi[k] = hi[k].max(pt[k]);
        }
    }
    if !lo[0].is_finite() {
        (lo, hi) = ([-1.0; 2], [1.0; 2]);
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9) * 1.1;
    let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let inner = PANEL - 2.0 * PAD;
    let cols = panels.len().clamp(1, COLUMNS);
    let rows = panels.len().div_ceil(COLUMNS).max(1);
    let (width, height) = (cols as f64 * PANEL, rows as f64 * (PANEL + TITLE));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(width),
        num(height),
        num(width),
        num(height)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        let (ox, oy) = ((i % COLUMNS) as f64 * PANEL, (i / COLUMNS) as f64 * (PANEL + TITLE));
        let _ = writeln!(s, r#"<g class="panel" transform="translate({},{})">"#, num(ox), num(oy));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="16" font-family="sans-serif" font-size="14" text-anchor="middle">node {}</text>"#,
            num(PANEL / 2.0),
            escape(&p.label)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#999999"/>"##,
            num(PAD),
            num(TITLE + PAD),
            num(inner),
            num(inner)
        );
        for (_, is_member, pts) in polys.iter().filter(|q| q.0 == i) {
            let d: Vec<String> = pts
                .iter()
                .enumerate()
                .map(|(k, pt)| {
                    let x = PAD + ((pt[0] - center[0]) / span + 0.5) * inner;
                    let y = TITLE + PAD + (0.5 - (pt[1] - center[1]) / span) * inner;
                    format!("{}{},{}", if k == 0 { "M" } else { "L" }, num(x), num(y))
                })
                .collect();
            let (class, fill, opacity) =
                if *is_member { ("member", MEMBER_FILL, "0.6") } else { ("constraint", CONSTRAINT_FILL, "1") };
            let _ = writeln!(
                s,
                r#"<path class="{class}" d="{} Z" fill="{fill}" fill-opacity="{opacity}" stroke="{fill}"/>"#,
                d.join(" ")
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
