//! Deterministic SVG and ASCII space-time diagrams of transport plans.
//!
//! Each atom is drawn as a polyline through its `(time, position)` points
//! with stroke width proportional to its mass, colored by start position.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DiscretePath;
use crate::measures::TransportPlan;
use crate::rational::{format_q, to_f64};

/// Yellow, green, blue from the top start position downward.
pub const DEFAULT_PALETTE: [&str; 3] = ["#e0a800", "#2e8b57", "#1f5fbf"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub width: f64,
    pub height: f64,
    /// Stroke pixels per unit mass.
    pub stroke_scale: f64,
    /// Colors assigned by start position, from the top of the grid, cycling.
    pub palette: Vec<String>,
    pub node_radius: f64,
    pub margin: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 640.0,
            height: 400.0,
            stroke_scale: 40.0,
            palette: DEFAULT_PALETTE.iter().map(|c| c.to_string()).collect(),
            node_radius: 3.0,
            margin: 40.0,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<()> {
        let finite_positive = |v: f64| v.is_finite() && v > 0.0;
        if !finite_positive(self.width) || !finite_positive(self.height) {
            return Err(Error::invalid("canvas size must be positive"));
        }
        if !finite_positive(self.stroke_scale) {
            return Err(Error::invalid("stroke scale must be positive"));
        }
        if self.palette.is_empty() {
            return Err(Error::invalid("palette must not be empty"));
        }
        if !(self.node_radius.is_finite() && self.node_radius >= 0.0) {
            return Err(Error::invalid("node radius must be non-negative"));
        }
        if !(self.margin.is_finite() && self.margin >= 0.0)
            || 2.0 * self.margin >= self.width.min(self.height)
        {
            return Err(Error::invalid("margin leaves no drawing area"));
        }
        Ok(())
    }
}

/// Fixed-point formatting with trailing zeros removed.
fn num(value: f64, decimals: usize) -> String {
    let text = format!("{value:.decimals$}");
    let text = if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    };
    if text == "-0" {
        "0".to_string()
    } else {
        text
    }
}

fn coord(value: f64) -> String {
    num(value, 4)
}

struct Layout {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Layout {
    fn new(plan: &TransportPlan, options: &RenderOptions) -> Self {
        let times: Vec<f64> = plan.timegrid().times().iter().map(to_f64).collect();
        let points: Vec<f64> = plan.grid().points().iter().map(to_f64).collect();
        let (t0, t1) = (times[0], times[times.len() - 1]);
        let (lo, hi) = (points[0], points[points.len() - 1]);
        let inner_w = options.width - 2.0 * options.margin;
        let inner_h = options.height - 2.0 * options.margin;
        Layout {
            xs: times
                .iter()
                .map(|t| options.margin + (t - t0) / (t1 - t0) * inner_w)
                .collect(),
            ys: points
                .iter()
                .map(|p| options.margin + (hi - p) / (hi - lo) * inner_h)
                .collect(),
        }
    }
}

fn color<'a>(plan: &TransportPlan, path: &DiscretePath, options: &'a RenderOptions) -> &'a str {
    let from_top = plan.grid().len() - 1 - path.indices()[0];
    &options.palette[from_top % options.palette.len()]
}

/// SVG 1.1 document with one polyline per atom in lexicographic path order.
pub fn render_svg(plan: &TransportPlan, options: &RenderOptions) -> Result<String> {
    if plan.is_empty() {
        return Err(Error::invalid("cannot render an empty plan"));
    }
    options.validate()?;
    let layout = Layout::new(plan, options);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let (w, h) = (coord(options.width), coord(options.height));
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    )
    .unwrap();
    for (path, mass) in plan.atoms() {
        let points: Vec<String> = path
            .indices()
            .iter()
            .enumerate()
            .map(|(i, &p)| format!("{},{}", coord(layout.xs[i]), coord(layout.ys[p])))
            .collect();
        writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-linecap=\"round\" stroke-linejoin=\"round\" stroke-opacity=\"0.8\"/>",
            points.join(" "),
            color(plan, path, options),
            num(mass.to_f64() * options.stroke_scale, 8)
        )
        .unwrap();
    }
    if options.node_radius > 0.0 {
        for x in &layout.xs {
            for y in &layout.ys {
                writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#404040\"/>",
                    coord(*x),
                    coord(*y),
                    coord(options.node_radius)
                )
                .unwrap();
            }
        }
    }
    let label_y = coord(options.height - options.margin / 3.0);
    for (i, x) in layout.xs.iter().enumerate() {
        writeln!(
            out,
            "<text x=\"{}\" y=\"{label_y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t{i}</text>",
            coord(*x)
        )
        .unwrap();
    }
    let label_x = coord(options.margin / 2.0);
    for (p, y) in plan.grid().points().iter().zip(&layout.ys) {
        writeln!(
            out,
            "<text x=\"{label_x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            coord(y + 4.0),
            format_q(p)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Mass classes from light to heavy, relative to the heaviest atom.
const WEIGHT_MARKS: [char; 4] = ['.', '-', '=', '#'];

fn weight_class(mass: f64, max_mass: f64) -> usize {
    let ratio = mass / max_mass;
    if ratio > 0.75 {
        3
    } else if ratio > 0.5 {
        2
    } else if ratio > 0.25 {
        1
    } else {
        0
    }
}

fn scaled(i: usize, from: usize, to: usize) -> usize {
    if from <= 1 {
        return 0;
    }
    ((i * (to - 1)) as f64 / (from - 1) as f64).round() as usize
}

/// Cells `(row, column)` covered by one path, rows counted from the top.
fn trace(path: &DiscretePath, points: usize, columns: usize, rows: usize) -> Vec<(usize, usize)> {
    let idx = path.indices();
    let col_of = |i: usize| scaled(i, idx.len(), columns);
    let row_of = |p: usize| scaled(points - 1 - p, points, rows);
    let mut cells = vec![(row_of(idx[0]), col_of(0))];
    for i in 1..idx.len() {
        let (c0, c1) = (col_of(i - 1), col_of(i));
        let (r0, r1) = (row_of(idx[i - 1]) as f64, row_of(idx[i]) as f64);
        for c in c0 + 1..=c1 {
            let frac = (c - c0) as f64 / (c1 - c0) as f64;
            cells.push(((r0 + frac * (r1 - r0)).round() as usize, c));
        }
    }
    cells
}

/// Character grid with one mark per covered cell, heavier marks winning overlaps.
pub fn render_ascii(plan: &TransportPlan, columns: usize, rows: usize) -> Result<String> {
    if plan.is_empty() {
        return Err(Error::invalid("cannot render an empty plan"));
    }
    let points = plan.grid().len();
    let times = plan.timegrid().len();
    if rows < points {
        return Err(Error::invalid(format!(
            "{rows} rows cannot show {points} grid positions"
        )));
    }
    if columns < times {
        return Err(Error::invalid(format!(
            "{columns} columns cannot show {times} time points"
        )));
    }
    let max_mass = plan
        .atoms()
        .values()
        .map(|m| m.to_f64())
        .fold(0.0, f64::max);
    let mut canvas: Vec<Vec<Option<usize>>> = vec![vec![None; columns]; rows];
    for (path, mass) in plan.atoms() {
        let class = weight_class(mass.to_f64(), max_mass);
        for (r, c) in trace(path, points, columns, rows) {
            let cell = &mut canvas[r][c];
            *cell = Some(cell.map_or(class, |old| old.max(class)));
        }
    }
    let mut out = String::new();
    for row in canvas {
        let line: String = row
            .iter()
            .map(|cell| cell.map_or(' ', |class| WEIGHT_MARKS[class]))
            .collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}
