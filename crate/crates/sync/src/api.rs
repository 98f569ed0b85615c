//! JSON bodies exchanged over the HTTP API.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use medgraph_core::anthro::LegacySymbol;
use medgraph_core::chart::{ChartSpec, DroppedPoint};
use medgraph_core::rules::{Oedema, Program};
use medgraph_core::Color;
use serde::{Deserialize, Serialize};

pub use medgraph_core::standards::CatalogEntry as StandardSummary;

/// Body of every non-2xx JSON response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    /// Machine-readable reason, e.g. `unknown_patient`.
    pub error: String,
    pub message: String,
}

/// One plotted visit with everything a point inspector shows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub visit_id: String,
    pub date: NaiveDate,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `z` as displayed, e.g. `-2.5`.
    pub z_text: String,
    pub zone: Color,
    /// Enclosing SD band, e.g. `(-3,-2)`.
    pub band: String,
    pub legacy: LegacySymbol,
    pub measures: BTreeMap<String, f64>,
    /// RUTF rations for the visit weight; absent without a ration table or
    /// when the weight is outside it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rutf_rations: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartResponse {
    /// Standard the chart was drawn against.
    pub dataset: String,
    pub palette: String,
    pub spec: ChartSpec,
    pub svg: String,
    pub points: Vec<ChartPoint>,
    pub dropped: Vec<DroppedPoint>,
}

/// Measurements a recommendation was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationInputs {
    pub visit_id: String,
    pub date: NaiveDate,
    pub dataset: String,
    pub z_wfh: f64,
    pub muac_cm: f64,
    pub oedema: Oedema,
    pub recently_discharged_otp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub program: Program,
    pub reasons: Vec<String>,
    pub advisory: String,
    pub inputs: RecommendationInputs,
}
