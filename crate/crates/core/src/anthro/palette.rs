use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::color::Color;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PaletteError {
    #[error("palette has no bands")]
    Empty,
    #[error("band bounds must strictly increase (band {index})")]
    BoundsNotIncreasing { index: usize },
    #[error("band bound must be non-negative (band {index})")]
    NegativeBound { index: usize },
    #[error("last band must be unbounded (`inf`)")]
    FinalBoundNotInfinite,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// One zone: every `|z| <= bound` not claimed by an earlier band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneBand<T> {
    pub bound: T,
    pub color: Color,
}

/// Configurable zone colors, symmetric in z because bounds apply to `|z|`.
///
/// Text form (`#` comments allowed):
///
/// ```text
/// name = passport
/// 2 = green
/// 3 = yellow
/// inf = red
/// ```
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZonePalette<T> {
    name: String,
    bands: Vec<ZoneBand<T>>,
}

impl<T: Scalar> ZonePalette<T> {
    pub fn new(name: impl Into<String>, bands: Vec<ZoneBand<T>>) -> Result<Self, PaletteError> {
        if bands.is_empty() {
            return Err(PaletteError::Empty);
        }
        for (index, band) in bands.iter().enumerate() {
            if band.bound < T::zero() || band.bound.is_nan() {
                return Err(PaletteError::NegativeBound { index });
            }
            if index > 0 && band.bound <= bands[index - 1].bound {
                return Err(PaletteError::BoundsNotIncreasing { index });
            }
        }
        if bands.last().map(|b| b.bound) != Some(T::infinity()) {
            return Err(PaletteError::FinalBoundNotInfinite);
        }
        Ok(ZonePalette {
            name: name.into(),
            bands,
        })
    }

    fn builtin(name: &str, bands: &[(f64, Color)]) -> Self {
        let bands = bands
            .iter()
            .map(|&(bound, color)| ZoneBand {
                bound: T::of(bound),
                color,
            })
            .collect();
        Self::new(name, bands).expect("built-in palette is valid")
    }

    /// Green within one SD, yellow to two, red beyond.
    pub fn who() -> Self {
        Self::builtin(
            "who",
            &[(1.0, Color::Green), (2.0, Color::Yellow), (f64::INFINITY, Color::Red)],
        )
    }

    /// Health-passport coloring: green within two SD, yellow to three, red beyond.
    pub fn passport() -> Self {
        Self::builtin(
            "passport",
            &[(2.0, Color::Green), (3.0, Color::Yellow), (f64::INFINITY, Color::Red)],
        )
    }

    pub fn builtin_named(name: &str) -> Option<Self> {
        match name {
            "who" => Some(Self::who()),
            "passport" => Some(Self::passport()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bands(&self) -> &[ZoneBand<T>] {
        &self.bands
    }

    /// Color of the first band whose bound is `>= |z|`; a z exactly on a
    /// bound belongs to the inner band.
    pub fn classify(&self, z: T) -> Color {
        let magnitude = z.abs();
        self.bands
            .iter()
            .find(|b| b.bound >= magnitude)
            .unwrap_or_else(|| self.bands.last().expect("palette is non-empty"))
            .color
    }

    pub fn parse(text: &str) -> Result<Self, PaletteError> {
        let mut name = None;
        let mut bands = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| PaletteError::Syntax { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "name" {
                name = Some(value.to_string());
                continue;
            }
            let bound = match key {
                "inf" | "infinity" => T::infinity(),
                _ => key
                    .parse::<T>()
                    .ok()
                    .filter(|b| b.is_finite())
                    .ok_or_else(|| syntax(format!("bad bound `{key}`")))?,
            };
            let color = value.parse::<Color>().map_err(|e| syntax(e.to_string()))?;
            bands.push(ZoneBand { bound, color });
        }
        Self::new(name.unwrap_or_else(|| "custom".to_string()), bands)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("name = {}\n", self.name);
        for band in &self.bands {
            if band.bound.is_infinite() {
                let _ = writeln!(out, "inf = {}", band.color);
            } else {
                let _ = writeln!(out, "{} = {}", band.bound, band.color);
            }
        }
        out
    }
}
