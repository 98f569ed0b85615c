//! Deterministic SVG 1.1 renderer for [`ChartSpec`].
//!
//! Panels are stacked top to bottom inside the plot area and share the x
//! mapping; x tick labels are emitted once, under the bottom panel. Within a
//! panel the paint order is bands, reference curves, reference lines, data
//! series, markers. Elements carry ids of the form
//! `panel-0.series-weight.point-3` and classes such as `data-point`.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::model::{band_outline, AxisSide, ChartSpec, Domain, Marker, Panel, Point, Scale, Tick, YAxisSpec};
use super::ticks::{log_ticks, nice_ticks};
use super::ChartError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
    pub left: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub width_px: f64,
    pub height_px: f64,
    pub margins: Margins,
    pub font_family: String,
    pub font_size: f64,
    /// Vertical gap between stacked panels.
    pub panel_gap: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width_px: 800.0,
            height_px: 500.0,
            margins: Margins {
                top: 40.0,
                right: 70.0,
                bottom: 50.0,
                left: 70.0,
            },
            font_family: "sans-serif".to_string(),
            font_size: 11.0,
            panel_gap: 12.0,
        }
    }
}

/// Maps axis values to pixels; log axes map `log10(value)` affinely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMap {
    scale: Scale,
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl AxisMap {
    pub fn new(scale: Scale, range: Domain, px_lo: f64, px_hi: f64) -> Self {
        let t = |v: f64| match scale {
            Scale::Linear => v,
            Scale::Log10 => v.log10(),
        };
        AxisMap {
            scale,
            lo: t(range.min),
            hi: t(range.max),
            px_lo,
            px_hi,
        }
    }

    pub fn map(&self, v: f64) -> f64 {
        let v = match self.scale {
            Scale::Linear => v,
            Scale::Log10 => v.log10(),
        };
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

/// Pixel rectangle of one panel's plotting area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRect {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl PanelRect {
    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn y_map(&self, axis: &YAxisSpec) -> AxisMap {
        AxisMap::new(axis.scale, axis.range, self.bottom, self.top)
    }
}

/// Panel rectangles for `spec` under `opts`; heights split by panel weight.
pub fn layout(spec: &ChartSpec, opts: &RenderOptions) -> Result<Vec<PanelRect>, ChartError> {
    let m = &opts.margins;
    let left = m.left;
    let right = opts.width_px - m.right;
    let top = m.top;
    let bottom = opts.height_px - m.bottom;
    let gaps = opts.panel_gap * spec.panels.len().saturating_sub(1) as f64;
    let drawable = bottom - top - gaps;
    let ok = [opts.width_px, opts.height_px]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
        && right > left
        && drawable > 0.0
        && opts.panel_gap >= 0.0
        && opts.font_size > 0.0;
    if !ok {
        return Err(ChartError::InvalidSpec(format!(
            "render size {}x{} leaves no room for {} panel(s)",
            opts.width_px,
            opts.height_px,
            spec.panels.len()
        )));
    }
    let total: f64 = spec.panels.iter().map(|p| p.weight).sum();
    let mut y = top;
    Ok(spec
        .panels
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let h = drawable * p.weight / total;
            let rect = PanelRect {
                left,
                top: y,
                right,
                bottom: if i + 1 == spec.panels.len() { bottom } else { y + h },
            };
            y += h + opts.panel_gap;
            rect
        })
        .collect())
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Rough rendered width of `text` at font size `fs`.
fn text_width(text: &str, fs: f64) -> f64 {
    text.chars().count() as f64 * fs * 0.6
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
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' && c != '\r' => {}
            c => out.push(c),
        }
    }
    out
}

/// Id-safe slug: ASCII alphanumerics kept, everything else becomes `-`.
fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    if s.is_empty() {
        "unnamed".to_string()
    } else {
        s
    }
}

/// Hands out unique slugs within one panel.
struct Slugs(HashSet<String>);

impl Slugs {
    fn take(&mut self, kind: &str, name: &str, index: usize) -> String {
        let base = format!("{kind}-{}", slug(name));
        let id = if self.0.contains(&base) {
            format!("{base}-{index}")
        } else {
            base
        };
        self.0.insert(id.clone());
        id
    }
}

fn points_attr(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    points
        .into_iter()
        .map(|(x, y)| format!("{},{}", num(x), num(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn y_ticks(axis: &YAxisSpec) -> Vec<Tick> {
    if let Some(t) = &axis.ticks {
        return t.clone();
    }
    match axis.scale {
        Scale::Linear => nice_ticks(axis.range, 6).unwrap_or_default(),
        Scale::Log10 => log_ticks(axis.range),
    }
}

struct Ctx<'a> {
    spec: &'a ChartSpec,
    opts: &'a RenderOptions,
    x: AxisMap,
    out: String,
}

/// Renders `spec` as an SVG document. Output is a pure function of the inputs.
pub fn render_svg(spec: &ChartSpec, opts: &RenderOptions) -> Result<String, ChartError> {
    spec.validate()?;
    let rects = layout(spec, opts)?;
    let x = AxisMap::new(Scale::Linear, spec.x_axis.domain, rects[0].left, rects[0].right);
    let mut ctx = Ctx {
        spec,
        opts,
        x,
        out: String::with_capacity(16 * 1024),
    };
    ctx.document(&rects);
    Ok(ctx.out)
}

impl Ctx<'_> {
    fn document(&mut self, rects: &[PanelRect]) {
        let (w, h) = (self.opts.width_px, self.opts.height_px);
        let _ = writeln!(self.out, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
        let _ = writeln!(
            self.out,
            r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" font-family="{}" font-size="{}">"##,
            num(w),
            num(h),
            num(w),
            num(h),
            escape(&self.opts.font_family),
            num(self.opts.font_size)
        );
        let _ = writeln!(self.out, "<title>{}</title>", escape(&self.spec.title));
        self.out.push_str("<defs>\n");
        for (i, r) in rects.iter().enumerate() {
            let _ = writeln!(
                self.out,
                r##"<clipPath id="clip-panel-{i}"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"##,
                num(r.left),
                num(r.top),
                num(r.right - r.left),
                num(r.height())
            );
        }
        self.out.push_str("</defs>\n");
        let _ = writeln!(
            self.out,
            r##"<rect id="background" x="0" y="0" width="{}" height="{}" fill="#ffffff"/>"##,
            num(w),
            num(h)
        );
        let _ = writeln!(
            self.out,
            r##"<text id="chart-title" class="chart-title" x="{}" y="{}" text-anchor="middle" font-size="{}" font-weight="bold">{}</text>"##,
            num(w / 2.0),
            num(self.opts.margins.top / 2.0 + self.opts.font_size / 2.0),
            num(self.opts.font_size * 1.3),
            escape(&self.spec.title)
        );
        for (i, (panel, rect)) in self.spec.panels.iter().zip(rects).enumerate() {
            self.panel(i, panel, rect);
        }
        self.x_axis(rects.last().expect("at least one panel"));
        self.out.push_str("</svg>\n");
    }

    fn panel(&mut self, index: usize, panel: &Panel, rect: &PanelRect) {
        let pid = format!("panel-{index}");
        let clip = format!(r##" clip-path="url(#clip-{pid})""##);
        let map_for = |side: AxisSide| rect.y_map(panel.axis(side).expect("validated axis"));
        let mut slugs = Slugs(HashSet::new());

        let _ = writeln!(self.out, r##"<g id="{pid}" class="panel">"##);
        let _ = writeln!(
            self.out,
            r##"<rect id="{pid}.frame" class="panel-frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444444" stroke-width="1"/>"##,
            num(rect.left),
            num(rect.top),
            num(rect.right - rect.left),
            num(rect.height())
        );
        if !panel.title.is_empty() {
            let _ = writeln!(
                self.out,
                r##"<text id="{pid}.title" class="panel-title" x="{}" y="{}">{}</text>"##,
                num(rect.left + 4.0),
                num(rect.top + self.opts.font_size + 2.0),
                escape(&panel.title)
            );
        }

        // grid
        let _ = writeln!(
            self.out,
            r##"<g id="{pid}.grid" class="grid" stroke="#dddddd" stroke-width="0.5">"##
        );
        for t in &self.spec.x_axis.ticks {
            let px = self.x.map(t.x);
            let _ = writeln!(
                self.out,
                r##"<line class="x-grid" x1="{}" y1="{}" x2="{}" y2="{}"/>"##,
                num(px),
                num(rect.top),
                num(px),
                num(rect.bottom)
            );
        }
        let left_map = map_for(AxisSide::Left);
        for t in y_ticks(&panel.left_axis) {
            let py = left_map.map(t.x);
            let _ = writeln!(
                self.out,
                r##"<line class="y-grid" x1="{}" y1="{}" x2="{}" y2="{}"/>"##,
                num(rect.left),
                num(py),
                num(rect.right),
                num(py)
            );
        }
        self.out.push_str("</g>\n");

        let _ = writeln!(self.out, r##"<g id="{pid}.bands" class="bands"{clip}>"##);
        for (i, band) in panel.bands.iter().enumerate() {
            let map = map_for(band.lower.axis);
            let outline = band_outline(band);
            let upper = outline.iter().map(|&(x, _, hi)| (self.x.map(x), map.map(hi)));
            let lower = outline.iter().rev().map(|&(x, lo, _)| (self.x.map(x), map.map(lo)));
            let id = slugs.take("band", &band.name, i);
            let _ = writeln!(
                self.out,
                r##"<polygon id="{pid}.{id}" class="band" fill="{}" fill-opacity="0.6" stroke="none" points="{}"/>"##,
                band.fill.css(),
                points_attr(upper.chain(lower))
            );
        }
        self.out.push_str("</g>\n");

        let _ = writeln!(
            self.out,
            r##"<g id="{pid}.ref-curves" class="ref-curves" fill="none"{clip}>"##
        );
        for (i, curve) in panel.ref_curves.iter().enumerate() {
            let map = map_for(curve.axis);
            let id = slugs.take("curve", &curve.name, i);
            let dash = if curve.dashed { r#" stroke-dasharray="4 3""# } else { "" };
            let _ = writeln!(
                self.out,
                r##"<polyline id="{pid}.{id}" class="ref-curve" stroke="{}" stroke-width="1"{dash} points="{}"/>"##,
                curve.stroke.css(),
                points_attr(curve.points.iter().map(|&(x, y)| (self.x.map(x), map.map(y))))
            );
        }
        self.out.push_str("</g>\n");

        let _ = writeln!(self.out, r##"<g id="{pid}.ref-lines" class="ref-lines"{clip}>"##);
        for (i, line) in panel.ref_lines.iter().enumerate() {
            let map = map_for(line.axis);
            let id = slugs.take("line", &line.name, i);
            let dash = if line.dashed { r#" stroke-dasharray="6 3""# } else { "" };
            let severity = match line.severity {
                super::model::Severity::Alert => "alert",
                super::model::Severity::Action => "action",
            };
            let _ = writeln!(
                self.out,
                r##"<line id="{pid}.{id}" class="ref-line {severity}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"{dash}/>"##,
                num(self.x.map(line.start.0)),
                num(map.map(line.start.1)),
                num(self.x.map(line.end.0)),
                num(map.map(line.end.1)),
                line.stroke.css()
            );
        }
        self.out.push_str("</g>\n");

        let series_ids: Vec<String> = panel
            .series
            .iter()
            .enumerate()
            .map(|(i, s)| slugs.take("series", &s.name, i))
            .collect();
        let _ = writeln!(
            self.out,
            r##"<g id="{pid}.series" class="series-lines" fill="none"{clip}>"##
        );
        for (s, id) in panel.series.iter().zip(&series_ids) {
            if !s.line || s.points.len() < 2 {
                continue;
            }
            let map = map_for(s.axis);
            let _ = writeln!(
                self.out,
                r##"<polyline id="{pid}.{id}.line" class="series-line" stroke="{}" stroke-width="1.5" points="{}"/>"##,
                s.stroke.css(),
                points_attr(s.points.iter().map(|&(x, y)| (self.x.map(x), map.map(y))))
            );
        }
        self.out.push_str("</g>\n");

        let _ = writeln!(self.out, r##"<g id="{pid}.markers" class="markers"{clip}>"##);
        for (s, id) in panel.series.iter().zip(&series_ids) {
            if s.marker == Marker::None {
                continue;
            }
            let map = map_for(s.axis);
            let _ = writeln!(
                self.out,
                r##"<g id="{pid}.{id}" class="series" fill="{}"><title>{}</title>"##,
                s.stroke.css(),
                escape(&s.name)
            );
            for (k, &(x, y)) in s.points.iter().enumerate() {
                self.marker(
                    &format!("{pid}.{id}.point-{k}"),
                    s.marker,
                    (self.x.map(x), map.map(y)),
                    (x, y),
                );
            }
            self.out.push_str("</g>\n");
        }
        self.out.push_str("</g>\n");

        self.y_axis(&pid, &panel.left_axis, rect, AxisSide::Left);
        if let Some(right) = &panel.right_axis {
            self.y_axis(&pid, right, rect, AxisSide::Right);
        }

        // tick marks on every panel's bottom edge, labels only under the last
        let _ = writeln!(self.out, r##"<g id="{pid}.x-ticks" class="x-ticks" stroke="#444444">"##);
        for t in &self.spec.x_axis.ticks {
            let px = self.x.map(t.x);
            let _ = writeln!(
                self.out,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"##,
                num(px),
                num(rect.bottom),
                num(px),
                num(rect.bottom + 4.0)
            );
        }
        self.out.push_str("</g>\n</g>\n");
    }

    fn marker(&mut self, id: &str, marker: Marker, (px, py): (f64, f64), (x, y): Point) {
        let tip = format!("<title>{}, {}</title>", x, y);
        match marker {
            Marker::Circle => {
                let _ = writeln!(
                    self.out,
                    r##"<circle id="{id}" class="data-point" cx="{}" cy="{}" r="3.5">{tip}</circle>"##,
                    num(px),
                    num(py)
                );
            }
            Marker::Square => {
                let _ = writeln!(
                    self.out,
                    r##"<rect id="{id}" class="data-point" x="{}" y="{}" width="7" height="7">{tip}</rect>"##,
                    num(px - 3.5),
                    num(py - 3.5)
                );
            }
            Marker::Triangle => {
                let _ = writeln!(
                    self.out,
                    r##"<polygon id="{id}" class="data-point" points="{}">{tip}</polygon>"##,
                    points_attr([(px, py - 4.0), (px + 4.0, py + 3.0), (px - 4.0, py + 3.0)])
                );
            }
            Marker::None => {}
        }
    }

    fn y_axis(&mut self, pid: &str, axis: &YAxisSpec, rect: &PanelRect, side: AxisSide) {
        let map = rect.y_map(axis);
        let (edge, dir, anchor, name) = match side {
            AxisSide::Left => (rect.left, -1.0, "end", "left"),
            AxisSide::Right => (rect.right, 1.0, "start", "right"),
        };
        let scale = match axis.scale {
            Scale::Linear => "linear",
            Scale::Log10 => "log10",
        };
        let fs = self.opts.font_size;
        let _ = writeln!(
            self.out,
            r##"<g id="{pid}.y-axis-{name}" class="y-axis {name} {scale}" stroke="#444444" fill="#222222">"##
        );
        let _ = writeln!(
            self.out,
            r##"<line class="axis-line" x1="{}" y1="{}" x2="{}" y2="{}"/>"##,
            num(edge),
            num(rect.top),
            num(edge),
            num(rect.bottom)
        );
        for t in y_ticks(axis) {
            let py = map.map(t.x);
            let _ = writeln!(
                self.out,
                r##"<line class="y-tick" x1="{}" y1="{}" x2="{}" y2="{}"/>"##,
                num(edge),
                num(py),
                num(edge + dir * 4.0),
                num(py)
            );
            let _ = writeln!(
                self.out,
                r##"<text class="y-tick-label" x="{}" y="{}" text-anchor="{anchor}" stroke="none">{}</text>"##,
                num(edge + dir * 6.0),
                num(py + fs / 3.0),
                escape(&t.label)
            );
        }
        let lx = edge + dir * (self.opts.margins.left.min(self.opts.margins.right) - fs - 2.0).max(fs);
        let ly = (rect.top + rect.bottom) / 2.0;
        let label_fs = fs
            .min((rect.bottom - rect.top) / text_width(&axis.label, 1.0))
            .max(fs * 0.6);
        let size = if label_fs < fs {
            format!(r#" font-size="{}""#, num(label_fs))
        } else {
            String::new()
        };
        let _ = writeln!(
            self.out,
            r##"<text class="axis-label" x="{}" y="{}" text-anchor="middle" stroke="none"{size} transform="rotate(-90 {} {})">{}</text>"##,
            num(lx),
            num(ly),
            num(lx),
            num(ly),
            escape(&axis.label)
        );
        self.out.push_str("</g>\n");
    }

    fn x_axis(&mut self, bottom: &PanelRect) {
        let fs = self.opts.font_size;
        let _ = writeln!(
            self.out,
            r##"<g id="x-tick-labels" class="x-tick-labels" text-anchor="middle" fill="#222222">"##
        );
        // crowded labels drop to a second row; a label fitting neither is left out
        let mut row_end = [f64::NEG_INFINITY; 2];
        let mut rows_used = 1;
        for (i, t) in self.spec.x_axis.ticks.iter().enumerate() {
            let px = self.x.map(t.x);
            let half = text_width(&t.label, fs) / 2.0;
            let Some(row) = (0..2).find(|&r| px - half >= row_end[r] + 2.0) else {
                continue;
            };
            row_end[row] = px + half;
            rows_used = rows_used.max(row + 1);
            let _ = writeln!(
                self.out,
                r##"<text id="x-tick-{i}" class="x-tick-label" x="{}" y="{}">{}</text>"##,
                num(px),
                num(bottom.bottom + 6.0 + fs * (1.0 + row as f64)),
                escape(&t.label)
            );
        }
        self.out.push_str("</g>\n");
        let _ = writeln!(
            self.out,
            r##"<text id="x-axis-label" class="axis-label" x="{}" y="{}" text-anchor="middle">{}</text>"##,
            num((bottom.left + bottom.right) / 2.0),
            num(bottom.bottom + 10.0 + (1.2 + rows_used as f64) * fs),
            escape(&self.spec.x_axis.label)
        );
    }
}
