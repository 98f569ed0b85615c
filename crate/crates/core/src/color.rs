//! Zone and chart colors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A color used for zones, bands and strokes.
///
/// Serialized as a name (`green`, `yellow`, `red`) or `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Color {
    Green,
    Yellow,
    Red,
    Rgb(u8, u8, u8),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unrecognized color `{0}` (expected green, yellow, red or #rrggbb)")]
pub struct ParseColorError(pub String);

impl Color {
    pub const BLACK: Color = Color::Rgb(0, 0, 0);

    /// CSS color used in rendered SVG.
    pub fn css(&self) -> String {
        match self {
            Color::Green => "#8fd18f".to_string(),
            Color::Yellow => "#f4e27a".to_string(),
            Color::Red => "#ec8b8b".to_string(),
            Color::Rgb(r, g, b) => format!("#{r:02x}{g:02x}{b:02x}"),
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Green => f.write_str("green"),
            Color::Yellow => f.write_str("yellow"),
            Color::Red => f.write_str("red"),
            Color::Rgb(r, g, b) => write!(f, "#{r:02x}{g:02x}{b:02x}"),
        }
    }
}

impl FromStr for Color {
    type Err = ParseColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "green" => return Ok(Color::Green),
            "yellow" => return Ok(Color::Yellow),
            "red" => return Ok(Color::Red),
            _ => {}
        }
        let hex = t
            .strip_prefix('#')
            .filter(|h| h.len() == 6 && h.is_ascii())
            .ok_or_else(|| ParseColorError(s.to_string()))?;
        let channel = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| ParseColorError(s.to_string()));
        Ok(Color::Rgb(channel(0)?, channel(2)?, channel(4)?))
    }
}

impl TryFrom<String> for Color {
    type Error = ParseColorError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Color> for String {
    fn from(c: Color) -> String {
        c.to_string()
    }
}
