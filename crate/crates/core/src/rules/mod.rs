//! Clinical decision support: nutrition-program admission, RUTF rations and
//! threshold-line crossings.

mod crossing;
mod nutrition;
mod rations;

use thiserror::Error;

pub use crossing::{detect_crossings, Crossing, CrossingLine, Direction};
pub use nutrition::{
    recommend_program, NutritionInputs, Oedema, Program, ProgramRecommendation, COMPLICATIONS_ADVISORY,
};
pub use rations::{rutf_rations, RationBand, RationTable};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RulesError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("weight {weight} kg outside the ration table [{min}, {max})")]
    WeightOutOfTable { weight: f64, min: f64, max: f64 },
    #[error("ration table line {line}: {message}")]
    InvalidTable { line: usize, message: String },
}
