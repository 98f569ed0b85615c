//! Chart model, builders and SVG rendering.
//!
//! A [`ChartSpec`] is a stack of panels over one x-axis. Each panel has a
//! left and optional right y-axis (linear or log10), any number of series,
//! filled bands between reference curves, and straight reference lines.

mod builders;
mod model;
mod render;
mod ticks;

use thiserror::Error;

pub use builders::{
    dual_axis_chart, dual_axis_spec, growth_chart_spec, partograph_spec, DroppedPoint, DualAxisInput, GrowthChart,
    PartographInput,
};
pub use model::{
    AxisSide, Band, ChartSpec, Domain, Marker, Panel, Point, RefCurve, RefLine, Scale, Series, Severity, Tick,
    XAxisSpec, YAxisSpec,
};
pub use render::{layout, render_svg, AxisMap, Margins, PanelRect, RenderOptions};
pub use ticks::{generate_ticks, log_ticks, nice_ticks, Granularity, TickPlan, TickStep};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ChartError {
    #[error("invalid chart: {0}")]
    InvalidSpec(String),
    #[error("{element}: value {value} is not positive on a log axis")]
    NonPositiveOnLogAxis { element: String, value: f64 },
    #[error("empty domain [{min}, {max}]")]
    EmptyDomain { min: f64, max: f64 },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("`{element}` has x = {x} outside the shared domain [{min}, {max}]")]
    DomainMismatch {
        element: String,
        x: f64,
        min: f64,
        max: f64,
    },
    #[error("line `{0}` has identical endpoints")]
    DegenerateLine(String),
}
