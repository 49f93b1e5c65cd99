//! Deterministic static SVG rendering of chart payloads.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::payload::{
    DensitySeries, PanelContent, ScatterSeries, Series, SpiderSeries, SplomSeries, ViolinSeries, VizPayload,
};
use super::VizKind;
use crate::error::VizError;

const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theme {
    #[default]
    Light,
    Dark,
}

impl Theme {
    fn background(self) -> &'static str {
        match self {
            Theme::Light => "#ffffff",
            Theme::Dark => "#1e1e1e",
        }
    }

    fn foreground(self) -> &'static str {
        match self {
            Theme::Light => "#222222",
            Theme::Dark => "#e0e0e0",
        }
    }

    fn grid(self) -> &'static str {
        match self {
            Theme::Light => "#dddddd",
            Theme::Dark => "#444444",
        }
    }
}

impl std::str::FromStr for Theme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "light" => Ok(Theme::Light),
            "dark" => Ok(Theme::Dark),
            other => Err(format!("unknown theme '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvgOptions {
    pub width: u32,
    pub height: u32,
    pub theme: Theme,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { width: 800, height: 600, theme: Theme::Light }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    r0: f64,
    r1: f64,
}

impl Scale {
    fn new(domain: [f64; 2], r0: f64, r1: f64) -> Self {
        let [mut d0, mut d1] = domain;
        if !(d0.is_finite() && d1.is_finite()) {
            d0 = 0.0;
            d1 = 1.0;
        }
        if d0 == d1 {
            d0 -= 0.5;
            d1 += 0.5;
        }
        Self { d0, d1, r0, r1 }
    }

    fn map(&self, v: f64) -> f64 {
        self.r0 + (v - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)
    }

    fn ticks(&self) -> Vec<f64> {
        let span = self.d1 - self.d0;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(mag * 10.0);
        let first = (self.d0 / step).ceil() as i64;
        let last = (self.d1 / step + 1e-9).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

fn padded(range: [f64; 2]) -> [f64; 2] {
    let [lo, hi] = range;
    if !(lo.is_finite() && hi.is_finite()) {
        return [0.0, 1.0];
    }
    let pad = if hi > lo { (hi - lo) * 0.05 } else { 0.5 };
    [lo - pad, hi + pad]
}

fn extent(values: impl IntoIterator<Item = f64>) -> [f64; 2] {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold([f64::INFINITY, f64::NEG_INFINITY], |[a, b], v| [a.min(v), b.max(v)])
}

struct Canvas {
    out: String,
    opts: SvgOptions,
    groups: Vec<String>,
}

struct Frame {
    left: f64,
    top: f64,
    right: f64,
    bottom: f64,
}

impl Canvas {
    fn color(&self, group: &str) -> &'static str {
        let idx = self.groups.iter().position(|g| g == group).unwrap_or(0);
        PALETTE[idx % PALETTE.len()]
    }

    fn frame(&self) -> Frame {
        Frame { left: 70.0, top: 30.0, right: self.opts.width as f64 - 130.0, bottom: self.opts.height as f64 - 50.0 }
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, extra: &str, content: &str) {
        let _ = writeln!(
            self.out,
            r#"<text x="{}" y="{}" text-anchor="{anchor}" font-size="11" fill="{}"{extra}>{}</text>"#,
            num(x),
            num(y),
            self.opts.theme.foreground(),
            escape(content)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}"{extra}/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }

    /// Frame with ticks and titles for linear axes.
    fn axes(&mut self, f: &Frame, xs: &Scale, ys: &Scale, x_label: &str, y_label: &str) {
        let fg = self.opts.theme.foreground();
        let grid = self.opts.theme.grid();
        self.out.push_str("<g class=\"axes\">\n");
        for t in xs.ticks() {
            let x = xs.map(t);
            self.line(x, f.top, x, f.bottom, grid, "");
            self.line(x, f.bottom, x, f.bottom + 4.0, fg, "");
            self.text(x, f.bottom + 16.0, "middle", "", &tick_label(t));
        }
        for t in ys.ticks() {
            let y = ys.map(t);
            self.line(f.left, y, f.right, y, grid, "");
            self.line(f.left - 4.0, y, f.left, y, fg, "");
            self.text(f.left - 7.0, y + 4.0, "end", "", &tick_label(t));
        }
        self.frame_rect(f);
        self.titles(f, x_label, y_label);
        self.out.push_str("</g>\n");
    }

    fn frame_rect(&mut self, f: &Frame) {
        let _ = writeln!(
            self.out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{}"/>"#,
            num(f.left),
            num(f.top),
            num(f.right - f.left),
            num(f.bottom - f.top),
            self.opts.theme.foreground()
        );
    }

    fn titles(&mut self, f: &Frame, x_label: &str, y_label: &str) {
        self.text((f.left + f.right) / 2.0, f.bottom + 36.0, "middle", "", x_label);
        let cy = (f.top + f.bottom) / 2.0;
        let rot = format!(r#" transform="rotate(-90 {} {})""#, num(18.0), num(cy));
        self.text(18.0, cy, "middle", &rot, y_label);
    }

    fn legend(&mut self, key: Option<&str>) {
        if self.groups.is_empty() {
            return;
        }
        let x = self.opts.width as f64 - 120.0;
        let mut y = 40.0;
        self.out.push_str("<g class=\"legend\">\n");
        if let Some(k) = key {
            self.text(x, y, "start", r#" font-weight="bold""#, k);
            y += 16.0;
        }
        for g in self.groups.clone() {
            let _ = writeln!(
                self.out,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#,
                num(x),
                num(y - 9.0),
                self.color(&g)
            );
            self.text(x + 14.0, y, "start", "", &g);
            y += 16.0;
        }
        self.out.push_str("</g>\n");
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str, sample: &str) {
        let _ = writeln!(
            self.out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" fill-opacity="0.8" data-sample="{}"/>"#,
            num(x),
            num(y),
            num(r),
            escape(sample)
        );
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Renders `payload` as an SVG document. Identical inputs give identical bytes.
pub fn export_svg(payload: &VizPayload, opts: &SvgOptions) -> Result<Vec<u8>, VizError> {
    if opts.width < 300 || opts.height < 200 {
        return Err(VizError::UnsupportedKind(format!("canvas {}x{} is too small", opts.width, opts.height)));
    }
    let mut c = Canvas { out: String::new(), opts: *opts, groups: payload.groups.clone() };
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(c.out, r#"<rect width="100%" height="100%" fill="{}"/>"#, opts.theme.background());
    let label = |i: usize| payload.axis_labels.get(i).cloned().unwrap_or_default();

    match (&payload.series, payload.kind) {
        (Series::Spider(s), VizKind::Spider) => spider(&mut c, s, &label(1)),
        (Series::Scatter(s), VizKind::Scatter2d) => scatter2d(&mut c, s, &label(0), &label(1)),
        (Series::Scatter(s), VizKind::Scatter3d) => scatter3d(&mut c, s, [&label(0), &label(1), &label(2)]),
        (Series::Splom(s), VizKind::Splom) => splom(&mut c, s, &payload.axis_labels),
        (Series::DensityContour(s), VizKind::DensityContour) => density(&mut c, s, &label(0), &label(1)),
        (Series::Violin(s), VizKind::Violin) => violin(&mut c, s, &label(0), &label(1)),
        (_, kind) => return Err(VizError::UnsupportedKind(format!("series does not match kind {kind}"))),
    }
    c.legend(payload.color_key.as_deref());
    c.out.push_str("</svg>\n");
    Ok(c.out.into_bytes())
}

fn spider(c: &mut Canvas, s: &SpiderSeries, y_label: &str) {
    let f = c.frame();
    let n = s.elements.len().max(1);
    let xs = Scale::new([0.0, (n - 1) as f64], f.left + 15.0, f.right - 15.0);
    let logs = extent(s.lines.iter().flat_map(|l| l.values.iter().flatten().map(|v| v.log10())));
    let [lo, hi] = if logs[0].is_finite() { [logs[0].floor(), logs[1].ceil()] } else { [-1.0, 1.0] };
    let ys = Scale::new([lo, if hi > lo { hi } else { lo + 1.0 }], f.bottom, f.top);
    let fg = c.opts.theme.foreground();
    let grid = c.opts.theme.grid();

    c.out.push_str("<g class=\"axes\">\n");
    let mut d = ys.d0;
    while d <= ys.d1 + 1e-9 {
        let y = ys.map(d);
        c.line(f.left, y, f.right, y, grid, "");
        c.text(f.left - 7.0, y + 4.0, "end", "", &tick_label(10f64.powf(d)));
        d += 1.0;
    }
    for (i, e) in s.elements.iter().enumerate() {
        let x = xs.map(i as f64);
        c.line(x, f.bottom, x, f.bottom + 4.0, fg, "");
        c.text(x, f.bottom + 16.0, "middle", "", e.symbol());
    }
    c.frame_rect(&f);
    c.titles(&f, "element", y_label);
    c.out.push_str("</g>\n<g class=\"series\">\n");
    for line in &s.lines {
        let mut path = String::new();
        let mut pen_down = false;
        for (i, v) in line.values.iter().enumerate() {
            match v {
                Some(v) if *v > 0.0 => {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    let _ = write!(path, "{cmd}{} {} ", num(xs.map(i as f64)), num(ys.map(v.log10())));
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        let _ = writeln!(
            c.out,
            r#"<path class="line" d="{}" fill="none" stroke="{}" stroke-width="1.2" data-sample="{}"/>"#,
            path.trim_end(),
            c.color(&line.group),
            escape(&line.sample_id)
        );
    }
    c.out.push_str("</g>\n");
}

fn scatter2d(c: &mut Canvas, s: &ScatterSeries, x_label: &str, y_label: &str) {
    let f = c.frame();
    let xs = Scale::new(padded(extent(s.points.iter().map(|p| p.x))), f.left, f.right);
    let ys = Scale::new(padded(extent(s.points.iter().map(|p| p.y))), f.bottom, f.top);
    c.axes(&f, &xs, &ys, x_label, y_label);
    c.out.push_str("<g class=\"series\">\n");
    for p in &s.points {
        let col = c.color(&p.group);
        c.circle(xs.map(p.x), ys.map(p.y), 3.5, col, &p.sample_id);
    }
    c.out.push_str("</g>\n");
}

/// Orthographic view from a fixed azimuth and elevation.
fn project(v: [f64; 3]) -> (f64, f64, f64) {
    let (az, el) = (35f64.to_radians(), 25f64.to_radians());
    let x = v[0] * az.cos() - v[1] * az.sin();
    let depth = v[0] * az.sin() + v[1] * az.cos();
    let y = v[2] * el.cos() - depth * el.sin();
    let z = v[2] * el.sin() + depth * el.cos();
    (x, y, z)
}

fn scatter3d(c: &mut Canvas, s: &ScatterSeries, labels: [&str; 3]) {
    let f = c.frame();
    let ranges = [
        padded(extent(s.points.iter().map(|p| p.x))),
        padded(extent(s.points.iter().map(|p| p.y))),
        padded(extent(s.points.iter().map(|p| p.z.unwrap_or(0.0)))),
    ];
    let unit = |v: f64, r: [f64; 2]| if r[1] > r[0] { 2.0 * (v - r[0]) / (r[1] - r[0]) - 1.0 } else { 0.0 };
    let half = ((f.right - f.left).min(f.bottom - f.top)) / 3.4;
    let (cx, cy) = ((f.left + f.right) / 2.0, (f.top + f.bottom) / 2.0);
    let to_screen = |p: (f64, f64, f64)| (cx + p.0 * half, cy - p.1 * half);
    let fg = c.opts.theme.foreground();
    let grid = c.opts.theme.grid();

    c.out.push_str("<g class=\"axes\">\n");
    // cube edges
    for a in 0..8u8 {
        for bit in 0..3 {
            let b = a | (1 << bit);
            if b == a {
                continue;
            }
            let corner = |m: u8| [0, 1, 2].map(|k| if m & (1 << k) != 0 { 1.0 } else { -1.0 });
            let (x1, y1) = to_screen(project(corner(a)));
            let (x2, y2) = to_screen(project(corner(b)));
            c.line(x1, y1, x2, y2, grid, "");
        }
    }
    let origin = to_screen(project([-1.0, -1.0, -1.0]));
    for (k, label) in labels.iter().enumerate() {
        let mut tip = [-1.0; 3];
        tip[k] = 1.0;
        let (tx, ty) = to_screen(project(tip));
        c.line(origin.0, origin.1, tx, ty, fg, r#" stroke-width="1.5""#);
        let r = ranges[k];
        c.text(tx, ty - 6.0, "middle", "", &format!("{label} [{}, {}]", tick_label(r[0]), tick_label(r[1])));
    }
    c.out.push_str("</g>\n<g class=\"series\">\n");
    let mut projected: Vec<(f64, usize, f64, f64)> = s
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = project([unit(p.x, ranges[0]), unit(p.y, ranges[1]), unit(p.z.unwrap_or(0.0), ranges[2])]);
            let (sx, sy) = to_screen(q);
            (q.2, i, sx, sy)
        })
        .collect();
    // far points first
    projected.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i, sx, sy) in projected {
        let p = &s.points[i];
        let col = c.color(&p.group);
        c.circle(sx, sy, 3.5, col, &p.sample_id);
    }
    c.out.push_str("</g>\n");
}

fn splom(c: &mut Canvas, s: &SplomSeries, labels: &[String]) {
    let f = c.frame();
    let m = s.indices.len().max(1);
    let gap = 8.0;
    let cell_w = (f.right - f.left - gap * (m - 1) as f64) / m as f64;
    let cell_h = (f.bottom - f.top - gap * (m - 1) as f64) / m as f64;
    let fg = c.opts.theme.foreground();

    c.out.push_str("<g class=\"axes\">\n");
    for k in 0..m {
        let x = f.left + k as f64 * (cell_w + gap) + cell_w / 2.0;
        c.text(x, f.bottom + 16.0, "middle", "", labels.get(k).map_or("", String::as_str));
        let y = f.top + k as f64 * (cell_h + gap) + cell_h / 2.0;
        let rot = format!(r#" transform="rotate(-90 {} {})""#, num(f.left - 10.0), num(y));
        c.text(f.left - 10.0, y, "middle", &rot, labels.get(k).map_or("", String::as_str));
    }
    c.out.push_str("</g>\n<g class=\"series\">\n");
    for panel in &s.panels {
        let x0 = f.left + panel.col as f64 * (cell_w + gap);
        let y0 = f.top + panel.row as f64 * (cell_h + gap);
        let cell = Frame { left: x0, top: y0, right: x0 + cell_w, bottom: y0 + cell_h };
        c.frame_rect(&cell);
        let xs = Scale::new(padded(s.ranges[panel.col]), cell.left, cell.right);
        match &panel.content {
            PanelContent::Histogram(h) => {
                let max = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
                for (b, &count) in h.counts.iter().enumerate() {
                    let xa = xs.map(h.edges[b]);
                    let xb = xs.map(h.edges[b + 1]);
                    let bh = count as f64 / max * (cell_h - 4.0);
                    let _ = writeln!(
                        c.out,
                        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fg}" fill-opacity="0.35"/>"#,
                        num(xa),
                        num(cell.bottom - bh),
                        num((xb - xa).max(0.0)),
                        num(bh)
                    );
                }
            }
            PanelContent::Scatter { points } => {
                let ys = Scale::new(padded(s.ranges[panel.row]), cell.bottom, cell.top);
                for (p, sample) in points.iter().zip(&s.samples) {
                    let col = c.color(&sample.group);
                    c.circle(xs.map(p[0]), ys.map(p[1]), 2.0, col, &sample.sample_id);
                }
            }
        }
    }
    c.out.push_str("</g>\n");
}

fn density(c: &mut Canvas, s: &DensitySeries, x_label: &str, y_label: &str) {
    let f = c.frame();
    let xr = extent(
        s.layers
            .iter()
            .flat_map(|l| [l.grid.x_grid[0], *l.grid.x_grid.last().unwrap()])
            .chain(s.points.iter().map(|p| p.x)),
    );
    let yr = extent(
        s.layers
            .iter()
            .flat_map(|l| [l.grid.y_grid[0], *l.grid.y_grid.last().unwrap()])
            .chain(s.points.iter().map(|p| p.y)),
    );
    let xs = Scale::new(padded(xr), f.left, f.right);
    let ys = Scale::new(padded(yr), f.bottom, f.top);
    c.axes(&f, &xs, &ys, x_label, y_label);
    c.out.push_str("<g class=\"series\">\n");
    for layer in &s.layers {
        let col = c.color(&layer.group);
        let count = layer.grid.contour_levels.len().max(1) as f64;
        for (k, level) in layer.grid.contour_levels.iter().enumerate() {
            let mut d = String::new();
            for seg in &level.segments {
                let _ = write!(
                    d,
                    "M{} {}L{} {}",
                    num(xs.map(seg[0][0])),
                    num(ys.map(seg[0][1])),
                    num(xs.map(seg[1][0])),
                    num(ys.map(seg[1][1]))
                );
            }
            let _ = writeln!(
                c.out,
                r#"<path class="contour" d="{d}" fill="none" stroke="{col}" stroke-opacity="{}" data-group="{}" data-level="{}"/>"#,
                num(0.3 + 0.7 * (k as f64 + 1.0) / count),
                escape(&layer.group),
                k
            );
        }
        let m = &layer.grid.marginal;
        if let Some(rug) = &m.rug {
            for &x in &rug.x {
                c.line(xs.map(x), f.bottom, xs.map(x), f.bottom - 8.0, col, "");
            }
            for &y in &rug.y {
                c.line(f.left, ys.map(y), f.left + 8.0, ys.map(y), col, "");
            }
        }
        if let Some(h) = &m.histogram {
            let strip = 0.12 * (f.bottom - f.top);
            let max_x = h.x.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
            for (b, &count) in h.x.counts.iter().enumerate() {
                let xa = xs.map(h.x.edges[b]);
                let xb = xs.map(h.x.edges[b + 1]);
                let bh = count as f64 / max_x * strip;
                let _ = writeln!(
                    c.out,
                    r#"<rect class="marginal" x="{}" y="{}" width="{}" height="{}" fill="{col}" fill-opacity="0.3"/>"#,
                    num(xa),
                    num(f.top),
                    num((xb - xa).max(0.0)),
                    num(bh)
                );
            }
            let max_y = h.y.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
            for (b, &count) in h.y.counts.iter().enumerate() {
                let ya = ys.map(h.y.edges[b + 1]);
                let yb = ys.map(h.y.edges[b]);
                let bw = count as f64 / max_y * strip;
                let _ = writeln!(
                    c.out,
                    r#"<rect class="marginal" x="{}" y="{}" width="{}" height="{}" fill="{col}" fill-opacity="0.3"/>"#,
                    num(f.right - bw),
                    num(ya),
                    num(bw),
                    num((yb - ya).max(0.0))
                );
            }
        }
    }
    for p in &s.points {
        let col = c.color(&p.group);
        c.circle(xs.map(p.x), ys.map(p.y), 1.5, col, &p.sample_id);
    }
    c.out.push_str("</g>\n");
}

fn violin(c: &mut Canvas, s: &ViolinSeries, x_label: &str, y_label: &str) {
    let f = c.frame();
    let yr = extent(s.violins.iter().flat_map(|v| v.kde.positions.iter().copied()));
    let ys = Scale::new(padded(yr), f.bottom, f.top);
    let n = s.violins.len().max(1);
    let slot = (f.right - f.left) / n as f64;
    let fg = c.opts.theme.foreground();
    let grid = c.opts.theme.grid();

    c.out.push_str("<g class=\"axes\">\n");
    for t in ys.ticks() {
        let y = ys.map(t);
        c.line(f.left, y, f.right, y, grid, "");
        c.text(f.left - 7.0, y + 4.0, "end", "", &tick_label(t));
    }
    for (i, v) in s.violins.iter().enumerate() {
        c.text(f.left + slot * (i as f64 + 0.5), f.bottom + 16.0, "middle", "", &v.group);
    }
    c.frame_rect(&f);
    c.titles(&f, x_label, y_label);
    c.out.push_str("</g>\n<g class=\"series\">\n");
    for (i, v) in s.violins.iter().enumerate() {
        let col = c.color(&v.group);
        let cx = f.left + slot * (i as f64 + 0.5);
        let half = slot * 0.4;
        let max = v.kde.densities.iter().copied().fold(0.0, f64::max);
        let w = |d: f64| if max > 0.0 { d / max * half } else { 0.0 };
        let mut d = String::new();
        for (k, (&pos, &den)) in v.kde.positions.iter().zip(&v.kde.densities).enumerate() {
            let _ = write!(d, "{}{} {}", if k == 0 { 'M' } else { 'L' }, num(cx + w(den)), num(ys.map(pos)));
        }
        for (&pos, &den) in v.kde.positions.iter().zip(&v.kde.densities).rev() {
            let _ = write!(d, "L{} {}", num(cx - w(den)), num(ys.map(pos)));
        }
        d.push('Z');
        let _ = writeln!(
            c.out,
            r#"<path class="violin" d="{d}" fill="{col}" fill-opacity="0.35" stroke="{col}" data-group="{}"/>"#,
            escape(&v.group)
        );
        let bw = half * 0.25;
        c.line(cx, ys.map(v.whiskers[0]), cx, ys.map(v.whiskers[1]), fg, "");
        let _ = writeln!(
            c.out,
            r#"<rect class="box" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{fg}"/>"#,
            num(cx - bw / 2.0),
            num(ys.map(v.q3)),
            num(bw),
            num((ys.map(v.q1) - ys.map(v.q3)).max(0.0)),
            c.opts.theme.background()
        );
        c.line(cx - bw / 2.0, ys.map(v.median), cx + bw / 2.0, ys.map(v.median), fg, r#" stroke-width="2""#);
        for p in &v.points {
            c.circle(cx, ys.map(p.value), 1.5, col, &p.sample_id);
        }
    }
    c.out.push_str("</g>\n");
}
