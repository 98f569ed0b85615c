use serde::Serialize;

use crate::chart::{RefCurve, RefLine, Severity};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upward,
    Downward,
}

/// A threshold polyline to test a series against.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingLine<T> {
    pub name: String,
    pub severity: Option<Severity>,
    points: Vec<(T, T)>,
}

impl<T: Scalar> CrossingLine<T> {
    /// Polyline through `points`; they are sorted by x.
    pub fn polyline(name: impl Into<String>, mut points: Vec<(T, T)>) -> Self {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        CrossingLine {
            name: name.into(),
            severity: None,
            points,
        }
    }

    pub fn segment(name: impl Into<String>, start: (T, T), end: (T, T), severity: Option<Severity>) -> Self {
        CrossingLine {
            severity,
            ..Self::polyline(name, vec![start, end])
        }
    }

    /// A horizontal threshold over `[x0, x1]`.
    pub fn horizontal(name: impl Into<String>, y: T, x0: T, x1: T) -> Self {
        Self::polyline(name, vec![(x0, y), (x1, y)])
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    /// Value at `x`, `None` outside the line's span.
    pub fn value_at(&self, x: T) -> Option<T> {
        let pts = &self.points;
        let (first, last) = (pts.first()?, pts.last()?);
        if !(x >= first.0 && x <= last.0) {
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

impl From<&RefLine> for CrossingLine<f64> {
    fn from(line: &RefLine) -> Self {
        CrossingLine::segment(line.name.clone(), line.start, line.end, Some(line.severity))
    }
}

impl From<&RefCurve> for CrossingLine<f64> {
    fn from(curve: &RefCurve) -> Self {
        CrossingLine::polyline(curve.name.clone(), curve.points.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing<T> {
    pub x: T,
    pub y: T,
    pub direction: Direction,
    pub line: String,
    pub severity: Option<Severity>,
}

/// Points where `series` crosses `line`, in x order.
///
/// The difference `series - line` is piecewise linear between the union of
/// both polylines' vertices, so each crossing is an exact linear root. Only
/// the part of the series inside the line's x-span is considered. Touching
/// the line and returning to the same side is not a crossing; when the
/// series runs along the line and then leaves on the other side, the
/// crossing is placed where contact began.
pub fn detect_crossings<T: Scalar>(series: &[(T, T)], line: &CrossingLine<T>) -> Vec<Crossing<T>> {
    let mut out = Vec::new();
    let (Some(first), Some(last)) = (line.points.first(), line.points.last()) else {
        return out;
    };
    let (lo, hi) = (first.0, last.0);

    // (x, series - line) samples in order
    let mut samples: Vec<(T, T)> = Vec::new();
    let push = |x: T, y: T, samples: &mut Vec<(T, T)>| {
        if let Some(l) = line.value_at(x) {
            let d = y - l;
            if samples.last() != Some(&(x, d)) {
                samples.push((x, d));
            }
        }
    };
    for seg in series.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        if !(q.0 >= lo && p.0 <= hi) {
            continue;
        }
        let at = |x: T| {
            if q.0 == p.0 {
                p.1
            } else {
                p.1 + (x - p.0) / (q.0 - p.0) * (q.1 - p.1)
            }
        };
        let start = if p.0 < lo { lo } else { p.0 };
        let end = if q.0 > hi { hi } else { q.0 };
        push(start, if start == p.0 { p.1 } else { at(start) }, &mut samples);
        for v in line.points.iter().filter(|v| v.0 > start && v.0 < end) {
            push(v.0, at(v.0), &mut samples);
        }
        push(end, if end == q.0 { q.1 } else { at(end) }, &mut samples);
    }

    let mut last_nonzero: Option<(T, T)> = None;
    let mut contact: Option<T> = None;
    for &(x, d) in &samples {
        if d == T::zero() {
            contact.get_or_insert(x);
            continue;
        }
        if let Some((x0, d0)) = last_nonzero {
            if (d0 > T::zero()) != (d > T::zero()) {
                let cx = contact.unwrap_or_else(|| {
                    let t = d0 / (d0 - d);
                    x0 + t * (x - x0)
                });
                let cy = line.value_at(cx).unwrap_or_else(T::nan);
                out.push(Crossing {
                    x: cx,
                    y: cy,
                    direction: if d > T::zero() {
                        Direction::Upward
                    } else {
                        Direction::Downward
                    },
                    line: line.name.clone(),
                    severity: line.severity,
                });
            }
        }
        last_nonzero = Some((x, d));
        contact = None;
    }
    out
}
