//! Declarative chart description, serializable to JSON.

use serde::{Deserialize, Serialize};

use super::ChartError;
use crate::color::Color;

pub type Point = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: f64,
    pub max: f64,
}

impl Domain {
    pub fn new(min: f64, max: f64) -> Self {
        Domain { min, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min < self.max
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub x: f64,
    pub label: String,
}

/// Chart: stacked panels over one shared x-axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub title: String,
    pub x_axis: XAxisSpec,
    pub panels: Vec<Panel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XAxisSpec {
    pub label: String,
    pub domain: Domain,
    pub ticks: Vec<Tick>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YAxisSpec {
    pub label: String,
    pub scale: Scale,
    pub range: Domain,
    /// Explicit ticks; generated from the scale when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ticks: Option<Vec<Tick>>,
}

impl YAxisSpec {
    pub fn linear(label: impl Into<String>, min: f64, max: f64) -> Self {
        YAxisSpec {
            label: label.into(),
            scale: Scale::Linear,
            range: Domain::new(min, max),
            ticks: None,
        }
    }

    pub fn log10(label: impl Into<String>, min: f64, max: f64) -> Self {
        YAxisSpec {
            label: label.into(),
            scale: Scale::Log10,
            range: Domain::new(min, max),
            ticks: None,
        }
    }

    pub(crate) fn validate(&self, at: &str) -> Result<(), ChartError> {
        if !self.range.is_valid() {
            return Err(ChartError::InvalidSpec(format!(
                "{at}: axis range [{}, {}] must satisfy min < max",
                self.range.min, self.range.max
            )));
        }
        if self.scale == Scale::Log10 && self.range.min <= 0.0 {
            return Err(ChartError::NonPositiveOnLogAxis {
                element: format!("{at} range"),
                value: self.range.min,
            });
        }
        if let Some(ticks) = &self.ticks {
            check_ticks(ticks, &self.range, at)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisSide {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marker {
    #[default]
    Circle,
    Square,
    Triangle,
    None,
}

fn default_true() -> bool {
    true
}

fn default_weight() -> f64 {
    1.0
}

fn default_stroke() -> Color {
    Color::BLACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    #[serde(default)]
    pub axis: AxisSide,
    pub points: Vec<Point>,
    #[serde(default)]
    pub marker: Marker,
    #[serde(default = "default_stroke")]
    pub stroke: Color,
    /// Connect consecutive points with a line.
    #[serde(default = "default_true")]
    pub line: bool,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Self {
        Series {
            name: name.into(),
            axis: AxisSide::Left,
            points,
            marker: Marker::Circle,
            stroke: Color::BLACK,
            line: true,
        }
    }

    pub fn on(mut self, axis: AxisSide) -> Self {
        self.axis = axis;
        self
    }

    pub fn stroke(mut self, color: Color) -> Self {
        self.stroke = color;
        self
    }

    pub fn marker(mut self, marker: Marker) -> Self {
        self.marker = marker;
        self
    }

    pub fn x_extent(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.0, self.points.last()?.0))
    }
}

/// A reference polyline such as an SD line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefCurve {
    pub name: String,
    #[serde(default)]
    pub axis: AxisSide,
    pub points: Vec<Point>,
    #[serde(default = "default_stroke")]
    pub stroke: Color,
    #[serde(default)]
    pub dashed: bool,
}

impl RefCurve {
    pub fn new(name: impl Into<String>, points: Vec<Point>) -> Self {
        RefCurve {
            name: name.into(),
            axis: AxisSide::Left,
            points,
            stroke: Color::BLACK,
            dashed: false,
        }
    }

    /// Linear interpolation at `x`, `None` outside the curve's span.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let pts = &self.points;
        let (first, last) = (pts.first()?, pts.last()?);
        if x < first.0 || x > last.0 {
            return None;
        }
        let i = pts.partition_point(|p| p.0 < x);
        if pts[i].0 == x {
            return Some(pts[i].1);
        }
        let (a, b) = (pts[i - 1], pts[i]);
        Some(a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Alert,
    Action,
}

/// A straight threshold line between two points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefLine {
    pub name: String,
    #[serde(default)]
    pub axis: AxisSide,
    pub start: Point,
    pub end: Point,
    pub severity: Severity,
    #[serde(default = "default_stroke")]
    pub stroke: Color,
    #[serde(default)]
    pub dashed: bool,
}

impl RefLine {
    pub fn new(name: impl Into<String>, start: Point, end: Point, severity: Severity) -> Self {
        let stroke = match severity {
            Severity::Alert => Color::Rgb(0xe0, 0x8a, 0x00),
            Severity::Action => Color::Rgb(0xc6, 0x28, 0x28),
        };
        RefLine {
            name: name.into(),
            axis: AxisSide::Left,
            start,
            end,
            severity,
            stroke,
            dashed: false,
        }
    }

    pub fn check_degenerate(&self) -> Result<(), ChartError> {
        if self.start == self.end {
            Err(ChartError::DegenerateLine(self.name.clone()))
        } else {
            Ok(())
        }
    }
}

/// Fill between two reference curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: String,
    pub lower: RefCurve,
    pub upper: RefCurve,
    pub fill: Color,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    #[serde(default)]
    pub title: String,
    /// Relative height; panels share the drawable height in proportion.
    #[serde(default = "default_weight")]
    pub weight: f64,
    pub left_axis: YAxisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_axis: Option<YAxisSpec>,
    #[serde(default)]
    pub series: Vec<Series>,
    #[serde(default)]
    pub bands: Vec<Band>,
    #[serde(default)]
    pub ref_curves: Vec<RefCurve>,
    #[serde(default)]
    pub ref_lines: Vec<RefLine>,
}

impl Panel {
    pub fn new(left_axis: YAxisSpec) -> Self {
        Panel {
            title: String::new(),
            weight: 1.0,
            left_axis,
            right_axis: None,
            series: Vec::new(),
            bands: Vec::new(),
            ref_curves: Vec::new(),
            ref_lines: Vec::new(),
        }
    }

    pub fn axis(&self, side: AxisSide) -> Option<&YAxisSpec> {
        match side {
            AxisSide::Left => Some(&self.left_axis),
            AxisSide::Right => self.right_axis.as_ref(),
        }
    }
}

fn check_ticks(ticks: &[Tick], domain: &Domain, at: &str) -> Result<(), ChartError> {
    for (i, t) in ticks.iter().enumerate() {
        if !domain.contains(t.x) {
            return Err(ChartError::InvalidSpec(format!("{at}: tick {} outside domain", t.x)));
        }
        if i > 0 && t.x <= ticks[i - 1].x {
            return Err(ChartError::InvalidSpec(format!("{at}: ticks must strictly increase")));
        }
    }
    Ok(())
}

fn check_points(
    points: &[Point],
    x_domain: &Domain,
    axis: &YAxisSpec,
    at: &str,
    strictly: bool,
) -> Result<(), ChartError> {
    for (i, &(x, y)) in points.iter().enumerate() {
        if !x.is_finite() || !y.is_finite() {
            return Err(ChartError::InvalidSpec(format!("{at}: non-finite point {i}")));
        }
        if !x_domain.contains(x) {
            return Err(ChartError::InvalidSpec(format!(
                "{at}: point {i} x = {x} outside x domain [{}, {}]",
                x_domain.min, x_domain.max
            )));
        }
        if i > 0 {
            let prev = points[i - 1].0;
            if x < prev || (strictly && x == prev) {
                return Err(ChartError::InvalidSpec(format!("{at}: points must be sorted by x")));
            }
        }
        if axis.scale == Scale::Log10 && y <= 0.0 {
            return Err(ChartError::NonPositiveOnLogAxis {
                element: format!("{at} point {i}"),
                value: y,
            });
        }
    }
    Ok(())
}

fn resolve_axis<'a>(panel: &'a Panel, side: AxisSide, at: &str) -> Result<&'a YAxisSpec, ChartError> {
    panel
        .axis(side)
        .ok_or_else(|| ChartError::InvalidSpec(format!("{at}: references missing right axis")))
}

impl ChartSpec {
    /// Checks every structural invariant the renderer relies on.
    pub fn validate(&self) -> Result<(), ChartError> {
        let dom = &self.x_axis.domain;
        if !dom.is_valid() {
            return Err(ChartError::InvalidSpec(format!(
                "x domain [{}, {}] must satisfy min < max",
                dom.min, dom.max
            )));
        }
        check_ticks(&self.x_axis.ticks, dom, "x axis")?;
        if self.panels.is_empty() {
            return Err(ChartError::InvalidSpec("chart needs at least one panel".into()));
        }
        for (p, panel) in self.panels.iter().enumerate() {
            let at = format!("panel {p}");
            if !(panel.weight.is_finite() && panel.weight > 0.0) {
                return Err(ChartError::InvalidSpec(format!("{at}: weight must be positive")));
            }
            panel.left_axis.validate(&format!("{at} left axis"))?;
            if let Some(right) = &panel.right_axis {
                right.validate(&format!("{at} right axis"))?;
            }
            for s in &panel.series {
                let at = format!("{at} series `{}`", s.name);
                let axis = resolve_axis(panel, s.axis, &at)?;
                check_points(&s.points, dom, axis, &at, false)?;
            }
            for c in &panel.ref_curves {
                let at = format!("{at} curve `{}`", c.name);
                check_curve(panel, c, dom, &at)?;
            }
            for l in &panel.ref_lines {
                let at = format!("{at} line `{}`", l.name);
                l.check_degenerate()?;
                let axis = resolve_axis(panel, l.axis, &at)?;
                let mut ends = [l.start, l.end];
                ends.sort_by(|a, b| a.0.total_cmp(&b.0));
                check_points(&ends, dom, axis, &at, false)?;
            }
            for b in &panel.bands {
                let at = format!("{at} band `{}`", b.name);
                check_curve(panel, &b.lower, dom, &at)?;
                check_curve(panel, &b.upper, dom, &at)?;
                if b.lower.axis != b.upper.axis {
                    return Err(ChartError::InvalidSpec(format!("{at}: curves on different axes")));
                }
                for (x, lo, hi) in band_outline(b) {
                    if lo > hi + 1e-9 * hi.abs().max(1.0) {
                        return Err(ChartError::InvalidSpec(format!(
                            "{at}: lower curve above upper at x = {x}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chart spec serializes")
    }

    /// Parses and validates a JSON chart spec.
    pub fn from_json(text: &str) -> Result<Self, ChartError> {
        let spec: ChartSpec = serde_json::from_str(text).map_err(|e| ChartError::InvalidSpec(format!("json: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn series_count(&self) -> usize {
        self.panels.iter().map(|p| p.series.len()).sum()
    }
}

fn check_curve(panel: &Panel, c: &RefCurve, dom: &Domain, at: &str) -> Result<(), ChartError> {
    let axis = resolve_axis(panel, c.axis, at)?;
    if c.points.len() < 2 {
        return Err(ChartError::InvalidSpec(format!(
            "{at}: curve `{}` needs two points",
            c.name
        )));
    }
    check_points(&c.points, dom, axis, &format!("{at} curve `{}`", c.name), true)
}

/// `(x, lower(x), upper(x))` over the union of both curves' vertices inside
/// their common span. Empty when the curves do not overlap.
pub(crate) fn band_outline(band: &Band) -> Vec<(f64, f64, f64)> {
    let (lo, hi) = (&band.lower.points, &band.upper.points);
    let (Some(l0), Some(l1), Some(u0), Some(u1)) = (lo.first(), lo.last(), hi.first(), hi.last()) else {
        return Vec::new();
    };
    let start = l0.0.max(u0.0);
    let end = l1.0.min(u1.0);
    if start > end {
        return Vec::new();
    }
    let mut xs: Vec<f64> = lo
        .iter()
        .chain(hi.iter())
        .map(|p| p.0)
        .filter(|&x| x >= start && x <= end)
        .chain([start, end])
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.into_iter()
        .filter_map(|x| Some((x, band.lower.value_at(x)?, band.upper.value_at(x)?)))
        .collect()
}
