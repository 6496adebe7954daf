//! Static SVG figures.

use std::fmt::Write;

use crate::biclustering::BiclusterRun;
use crate::geometry::{DataSet, Model};
use crate::sampling::PreferenceMatrix;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];
const UNASSIGNED: &str = "#c8c8c8";
const SIZE: f64 = 480.0;
const MARGIN: f64 = 20.0;

fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

fn header(out: &mut String, w: f64, h: f64) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
}

struct Frame {
    min: [f64; 2],
    scale: f64,
}

impl Frame {
    fn fit(data: &DataSet) -> Self {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in data.points() {
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        if !min[0].is_finite() {
            return Frame { min: [0.0; 2], scale: SIZE };
        }
        let span = (max[0] - min[0]).max(max[1] - min[1]).max(1e-12);
        Frame {
            min,
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.min[0]) * self.scale,
            SIZE - MARGIN - (y - self.min[1]) * self.scale,
        )
    }

    fn bounds(&self) -> [f64; 4] {
        let span = (SIZE - 2.0 * MARGIN) / self.scale;
        [self.min[0], self.min[1], self.min[0] + span, self.min[1] + span]
    }
}

/// Clips the line `n . x = c` to a box, returning its end points.
fn clip_line(n: [f64; 2], c: f64, b: [f64; 4]) -> Option<([f64; 2], [f64; 2])> {
    let mut hits: Vec<[f64; 2]> = Vec::new();
    for x in [b[0], b[2]] {
        if n[1].abs() > 1e-12 {
            let y = (c - n[0] * x) / n[1];
            if (b[1]..=b[3]).contains(&y) {
                hits.push([x, y]);
            }
        }
    }
    for y in [b[1], b[3]] {
        if n[0].abs() > 1e-12 {
            let x = (c - n[1] * y) / n[0];
            if (b[0]..=b[2]).contains(&x) {
                hits.push([x, y]);
            }
        }
    }
    let first = *hits.first()?;
    let last = hits
        .iter()
        .copied()
        .max_by(|p, q| {
            let d = |r: &[f64; 2]| (r[0] - first[0]).hypot(r[1] - first[1]);
            d(p).total_cmp(&d(q))
        })?;
    Some((first, last))
}

/// Points colored by group (first group wins) with the models drawn on top.
/// Three-dimensional data is projected onto its first two coordinates.
pub fn overlay(data: &DataSet, groups: &[Vec<usize>], models: &[Model]) -> String {
    let frame = Frame::fit(data);
    let mut owner = vec![None; data.len()];
    for (k, g) in groups.iter().enumerate() {
        for &i in g {
            owner[i].get_or_insert(k);
        }
    }
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    for (i, p) in data.points().enumerate() {
        let (x, y) = frame.map(p[0], p[1]);
        let fill = owner[i].map_or(UNASSIGNED, color);
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{fill}"/>"#).unwrap();
    }
    for (k, model) in models.iter().enumerate() {
        let stroke = color(k);
        match *model {
            Model::Line2D { normal, offset } => {
                if let Some((a, b)) = clip_line(normal, offset, frame.bounds()) {
                    let (x1, y1) = frame.map(a[0], a[1]);
                    let (x2, y2) = frame.map(b[0], b[1]);
                    writeln!(
                        out,
                        r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1"/>"#
                    )
                    .unwrap();
                }
            }
            Model::Circle2D { center, radius } => {
                let (cx, cy) = frame.map(center[0], center[1]);
                let r = radius * frame.scale;
                writeln!(
                    out,
                    r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="{stroke}" stroke-width="1"/>"#
                )
                .unwrap();
            }
            Model::Plane3D { .. } => {}
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Preference matrix with rows and columns grouped by bicluster, binned to
/// at most `max_cells` cells per side.
pub fn heatmap(matrix: &PreferenceMatrix, run: &BiclusterRun, max_cells: usize) -> String {
    let (m, n) = (matrix.nrows(), matrix.ncols());
    let order = |lists: Vec<&[usize]>, len: usize| {
        let mut seen = vec![false; len];
        let mut order = Vec::with_capacity(len);
        for list in lists {
            for &i in list {
                if !seen[i] {
                    seen[i] = true;
                    order.push(i);
                }
            }
        }
        order.extend((0..len).filter(|&i| !seen[i]));
        order
    };
    let row_order = order(run.biclusters.iter().map(|b| b.rows.as_slice()).collect(), m);
    let col_order = order(run.biclusters.iter().map(|b| b.cols.as_slice()).collect(), n);
    let mut row_pos = vec![0; m];
    for (p, &i) in row_order.iter().enumerate() {
        row_pos[i] = p;
    }

    let (bins_r, bins_c) = (m.clamp(1, max_cells.max(1)), n.clamp(1, max_cells.max(1)));
    let mut counts = vec![0usize; bins_r * bins_c];
    for (q, &j) in col_order.iter().enumerate() {
        let c = q * bins_c / n.max(1);
        for &i in matrix.column(j) {
            let r = row_pos[i] * bins_r / m.max(1);
            counts[r * bins_c + c] += 1;
        }
    }
    let per_cell = |bins: usize, len: usize| (len as f64 / bins as f64).max(1.0);
    let capacity = per_cell(bins_r, m) * per_cell(bins_c, n);
    let (cw, ch) = (SIZE / bins_c as f64, SIZE / bins_r as f64);

    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    for r in 0..bins_r {
        for c in 0..bins_c {
            let k = counts[r * bins_c + c];
            if k == 0 {
                continue;
            }
            let shade = (k as f64 / capacity).min(1.0);
            let (x, y) = (c as f64 * cw, r as f64 * ch);
            writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="black" fill-opacity="{shade:.3}"/>"#
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

/// One curve of a scaling plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// One log-log chart of a scaling plot.
pub struct Panel<'a> {
    pub title: &'a str,
    pub series: Vec<Series<'a>>,
}

fn log_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| *v > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (lo, hi) = (lo.log10(), hi.log10());
    if lo.is_finite() && hi > lo {
        (lo, hi)
    } else if lo.is_finite() {
        (lo - 0.5, lo + 0.5)
    } else {
        (0.0, 1.0)
    }
}

/// Log-log line charts stacked vertically, sharing the x label.
pub fn scaling_plot(x_label: &str, panels: &[Panel]) -> String {
    let (w, h, left, bottom) = (SIZE, SIZE * 0.75, 60.0, 40.0);
    let mut out = String::new();
    header(&mut out, w, h * panels.len() as f64);
    for (p, panel) in panels.iter().enumerate() {
        let top = h * p as f64;
        let points = || panel.series.iter().flat_map(|s| s.points.iter().copied());
        let (x0, x1) = log_range(points().map(|q| q.0));
        let (y0, y1) = log_range(points().map(|q| q.1));
        let px = |x: f64| left + (x.log10() - x0) / (x1 - x0) * (w - left - MARGIN);
        let py = |y: f64| top + h - bottom - (y.log10() - y0) / (y1 - y0) * (h - bottom - MARGIN);
        let axis_y = top + h - bottom;
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            w / 2.0,
            top + 14.0,
            panel.title
        )
        .unwrap();
        writeln!(out, r#"<line x1="{left}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#, w - MARGIN).unwrap();
        writeln!(out, r#"<line x1="{left}" y1="{}" x2="{left}" y2="{axis_y}" stroke="black"/>"#, top + MARGIN).unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{x_label}</text>"#,
            w / 2.0,
            top + h - 8.0
        )
        .unwrap();
        for (k, s) in panel.series.iter().enumerate() {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0)
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let stroke = color(k);
            writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
                pts.join(" ")
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" fill="{stroke}">{}</text>"#,
                left + 8.0,
                top + MARGIN + 14.0 * (k + 1) as f64,
                s.label
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
