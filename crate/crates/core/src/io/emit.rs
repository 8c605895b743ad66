//! Result serialization: CSV rows, a JSON document and an SVG plot.
//! Every number is written as an exact reduced fraction.

use std::fmt::Write as _;

use serde::Serialize;

use crate::costfn::{CostFunction, ExtValue, Piece, Rational};

/// Identifies the JSON layout described by `docs/result.schema.json`.
pub const RESULT_FORMAT: &str = "sptg-result/1";

/// A named value function.
#[derive(Clone, Debug)]
pub struct Entry<'a> {
    pub location: &'a str,
    pub function: &'a CostFunction,
}

pub fn entries<'a>(names: &'a [String], values: &'a [CostFunction], keep: impl Fn(usize) -> bool) -> Vec<Entry<'a>> {
    names
        .iter()
        .zip(values)
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (n, f))| Entry { location: n, function: f })
        .collect()
}

fn slope_text(f: &CostFunction, i: usize) -> String {
    match f.pieces().get(i) {
        Some(Piece::Affine(a)) => a.slope.to_string(),
        Some(Piece::PosInf) => "+inf".into(),
        Some(Piece::NegInf) => "-inf".into(),
        None => String::new(),
    }
}

/// Header `location,cutpoint,value,slope_right`, then one row per cutpoint;
/// `slope_right` is empty at the right end of the domain.
pub fn to_csv(entries: &[Entry]) -> String {
    let mut s = String::from("location,cutpoint,value,slope_right\n");
    for e in entries {
        let f = e.function;
        for (i, (c, v)) in f.cutpoints().iter().zip(f.point_values()).enumerate() {
            let _ = writeln!(s, "{},{},{},{}", e.location, c, v, slope_text(f, i));
        }
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct CutpointJson {
    pub x: Rational,
    pub value: ExtValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_right: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceJson {
    pub from: Rational,
    pub to: Rational,
    /// `affine`, `+inf` or `-inf`.
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionJson {
    pub location: String,
    pub cutpoints: Vec<CutpointJson>,
    pub pieces: Vec<PieceJson>,
}

impl FunctionJson {
    pub fn new(e: &Entry) -> Self {
        let f = e.function;
        let cuts = f.cutpoints();
        FunctionJson {
            location: e.location.to_string(),
            cutpoints: cuts
                .iter()
                .zip(f.point_values())
                .enumerate()
                .map(|(i, (c, v))| CutpointJson {
                    x: c.clone(),
                    value: v.clone(),
                    slope_right: (i + 1 < cuts.len()).then(|| slope_text(f, i)),
                })
                .collect(),
            pieces: f
                .pieces()
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let (kind, slope, intercept) = match p {
                        Piece::Affine(a) => ("affine", Some(a.slope.clone()), Some(a.intercept.clone())),
                        Piece::PosInf => ("+inf", None, None),
                        Piece::NegInf => ("-inf", None, None),
                    };
                    PieceJson { from: cuts[i].clone(), to: cuts[i + 1].clone(), kind, slope, intercept }
                })
                .collect(),
        }
    }
}

/// Top-level JSON document. `strategies`, `stats` and `details` depend on the solver used.
#[derive(Clone, Debug, Serialize)]
pub struct ResultFile {
    pub format: &'static str,
    pub solver: String,
    pub clock_bound: Rational,
    pub values: Vec<FunctionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategies: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl ResultFile {
    pub fn new(solver: &str, clock_bound: Rational, entries: &[Entry]) -> Self {
        ResultFile {
            format: RESULT_FORMAT,
            solver: solver.to_string(),
            clock_bound,
            values: entries.iter().map(FunctionJson::new).collect(),
            strategies: None,
            stats: None,
            details: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }
}

const WIDTH: f64 = 640.0;
const PANEL: f64 = 240.0;
const MARGIN: f64 = 56.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One panel per location: the graph of the value function over its domain,
/// a marker and an exact label at every cutpoint.
pub fn to_svg(entries: &[Entry]) -> String {
    let height = PANEL * entries.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="monospace" font-size="11">"#
    );
    for (k, e) in entries.iter().enumerate() {
        panel(&mut s, e, k as f64 * PANEL);
    }
    s.push_str("</svg>\n");
    s
}

fn panel(s: &mut String, e: &Entry, top: f64) {
    let f = e.function;
    let (lo, hi) = (f.lo().to_f64(), f.hi().to_f64());
    let finite: Vec<f64> = f
        .point_values()
        .iter()
        .filter_map(|v| v.finite().map(Rational::to_f64))
        .chain(f.pieces().iter().enumerate().flat_map(|(i, p)| {
            [&f.cutpoints()[i], &f.cutpoints()[i + 1]].map(|c| p.eval(c).finite().map(Rational::to_f64))
        }).flatten())
        .collect();
    let (mut ymin, mut ymax) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !ymin.is_finite() {
        (ymin, ymax) = (0.0, 1.0);
    }
    if ymax - ymin < 1e-9 {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let span_x = if hi > lo { hi - lo } else { 1.0 };
    let px = |x: f64| MARGIN + (x - lo) / span_x * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| top + PANEL - MARGIN + (ymin - y) / (ymax - ymin) * (PANEL - 2.0 * MARGIN + 16.0);
    let base = top + PANEL - MARGIN;
    let _ = writeln!(s, r#"<g class="location" data-location="{}">"#, esc(e.location));
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="{:.2}" font-size="13">{}</text>"#, top + 20.0, esc(e.location));
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}" stroke="#888"/>"##,
        px(lo),
        px(hi)
    );
    for (i, p) in f.pieces().iter().enumerate() {
        let (a, b) = (&f.cutpoints()[i], &f.cutpoints()[i + 1]);
        match p {
            Piece::Affine(g) => {
                let _ = writeln!(
                    s,
                    r##"<polyline fill="none" stroke="#1f5fbf" stroke-width="2" points="{:.2},{:.2} {:.2},{:.2}"/>"##,
                    px(a.to_f64()),
                    py(g.eval(a).to_f64()),
                    px(b.to_f64()),
                    py(g.eval(b).to_f64())
                );
            }
            inf => {
                let label = if matches!(inf, Piece::PosInf) { "+inf" } else { "-inf" };
                let _ = writeln!(
                    s,
                    r##"<text x="{:.2}" y="{:.2}" fill="#b33">{label}</text>"##,
                    (px(a.to_f64()) + px(b.to_f64())) / 2.0,
                    top + 40.0
                );
            }
        }
    }
    for (c, v) in f.cutpoints().iter().zip(f.point_values()) {
        let x = px(c.to_f64());
        let _ = writeln!(s, r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{c}</text>"##, base + 16.0);
        if let Some(y) = v.finite() {
            let yy = py(y.to_f64());
            let _ = writeln!(s, r##"<circle class="cutpoint" cx="{x:.2}" cy="{yy:.2}" r="3" fill="#1f5fbf"/>"##);
            let _ = writeln!(s, r##"<text x="{:.2}" y="{:.2}" fill="#333">{v}</text>"##, x + 4.0, yy - 6.0);
        }
    }
    s.push_str("</g>\n");
}
