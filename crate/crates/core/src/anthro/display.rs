use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Formats a z-score with one decimal, rounding half away from zero on the
/// shortest decimal representation of `z` (so `-2.55` gives `-2.6`).
///
/// Values that round to zero print as `0.0` without a sign.
pub fn format_z<T: Scalar>(z: T) -> String {
    if !z.is_finite() {
        return z.to_string();
    }
    let text = z.abs().to_string();
    let (int_part, frac_part) = text.split_once('.').unwrap_or((text.as_str(), ""));
    let mut frac = frac_part.chars();
    let tenths = frac.next().unwrap_or('0');
    let round_up = frac.next().is_some_and(|c| c >= '5');

    // integer digits followed by the tenths digit, as a decimal string
    let mut digits: Vec<u8> = int_part.bytes().chain(std::iter::once(tenths as u8)).collect();
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    while digits.len() > 2 && digits[0] == b'0' {
        digits.remove(0);
    }
    let zero = digits.iter().all(|&d| d == b'0');
    let (whole, tenth) = digits.split_at(digits.len() - 1);
    let whole = if whole.is_empty() {
        "0"
    } else {
        std::str::from_utf8(whole).unwrap()
    };
    let sign = if z < T::zero() && !zero { "-" } else { "" };
    format!("{sign}{whole}.{}", tenth[0] as char)
}

/// The `<` / `>` / `=` notation used on paper forms for a z-score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LegacySymbol {
    /// `=k` for an integer z.
    Equal { value: i64 },
    /// `>lower` and `<upper`, the integers enclosing a fractional z.
    Between { lower: i64, upper: i64 },
}

impl LegacySymbol {
    /// The notation as separate strings, e.g. `[">-3", "<-2"]` or `["=-2"]`.
    pub fn symbols(&self) -> Vec<String> {
        match *self {
            LegacySymbol::Equal { value } => vec![format!("={value}")],
            LegacySymbol::Between { lower, upper } => vec![format!(">{lower}"), format!("<{upper}")],
        }
    }
}

impl fmt::Display for LegacySymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbols().join(", "))
    }
}

/// Legacy symbol for a finite z. A z within a few ulps of an integer counts
/// as that integer.
pub fn legacy_symbol<T: Scalar>(z: T) -> LegacySymbol {
    let floor = z.floor();
    let nearest = z.round();
    let as_int = |v: T| v.to_i64().expect("finite z within i64 range");
    let tolerance = T::epsilon() * T::of(8.0) * z.abs().max(T::one());
    if (z - nearest).abs() <= tolerance {
        LegacySymbol::Equal { value: as_int(nearest) }
    } else {
        LegacySymbol::Between {
            lower: as_int(floor),
            upper: as_int(z.ceil()),
        }
    }
}
