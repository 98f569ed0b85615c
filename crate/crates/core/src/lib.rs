//! Individual-patient medical charting and decision support.
//!
//! * [`standards`] parses and stores WHO-style SD reference tables.
//! * [`anthro`] turns a measurement into a decimal z-score and a color zone.
//! * [`chart`] builds growth, partograph and dual-axis charts and renders SVG.
//! * [`rules`] recommends nutrition programs, looks up RUTF rations and finds
//!   where a series crosses an alert line.
//! * [`records`] stores patients and visits as append-only JSON lines.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix them to `f64`, which is what the service and CLI use.

pub mod anthro;
pub mod chart;
pub mod color;
mod csvlines;
pub mod records;
pub mod rules;
pub mod scalar;
pub mod standards;

pub use color::Color;
pub use scalar::Scalar;

pub type Dataset = standards::StandardDataset<f64>;
pub type Palette = anthro::ZonePalette<f64>;
pub type ZScore = anthro::ZScoreResult<f64>;
pub type NutritionInputs = rules::NutritionInputs<f64>;
pub type RationTable = rules::RationTable<f64>;
