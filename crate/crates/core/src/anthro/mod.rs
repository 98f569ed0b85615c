//! Decimal z-scores from SD reference tables.
//!
//! The SD lines are interpolated linearly in x between grid rows, and a
//! measurement's z is interpolated linearly between the two SD lines that
//! enclose it. Outside the outermost lines the outermost band's slope is
//! extended.

mod display;
mod palette;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::color::Color;
use crate::scalar::Scalar;
use crate::standards::{Bracket, StandardDataset, ZLabel};

pub use display::{format_z, legacy_symbol, LegacySymbol};
pub use palette::{PaletteError, ZoneBand, ZonePalette};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnthroError {
    #[error("x = {x} outside the table range [{min}, {max}]")]
    XOutOfRange { x: f64, min: f64, max: f64 },
    #[error("measurement must be positive, got {0}")]
    NonPositiveMeasure(f64),
    #[error("z must be finite, got {0}")]
    NonFiniteZ(f64),
}

/// SD-line values interpolated at one x.
#[derive(Debug, Clone, PartialEq)]
pub struct SdProfile<T> {
    pub x: T,
    pub labels: Vec<ZLabel>,
    /// Values in ascending z order, aligned with `labels`.
    pub values: Vec<T>,
}

impl<T: Scalar> SdProfile<T> {
    pub fn value(&self, label: ZLabel) -> Option<T> {
        self.labels.binary_search(&label).ok().map(|i| self.values[i])
    }

    /// Index `i` of the band `[labels[i], labels[i+1]]` used for `y`.
    ///
    /// Values at or below the second line use band 0 (this also covers
    /// extrapolation below); above the last line the top band is used.
    fn band_for_value(&self, y: T) -> usize {
        let n = self.values.len();
        let above = self.values[1..n - 1].partition_point(|v| *v < y);
        above.min(n - 2)
    }

    fn band_for_z(&self, z: T) -> usize {
        let n = self.labels.len();
        let above = self.labels[1..n - 1].partition_point(|l| l.value::<T>() < z);
        above.min(n - 2)
    }

    /// z of measurement `y` under the piecewise-linear band model.
    pub fn z_for(&self, y: T) -> T {
        let i = self.band_for_value(y);
        let (z0, z1) = (self.labels[i].value::<T>(), self.labels[i + 1].value::<T>());
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        if y == v0 {
            return z0;
        }
        z0 + (y - v0) / (v1 - v0) * (z1 - z0)
    }

    /// Measurement value at `z`; exact inverse of [`SdProfile::z_for`].
    pub fn value_for(&self, z: T) -> T {
        let i = self.band_for_z(z);
        let (z0, z1) = (self.labels[i].value::<T>(), self.labels[i + 1].value::<T>());
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        if z == z0 {
            return v0;
        }
        if z == z1 {
            return v1;
        }
        v0 + (z - z0) / (z1 - z0) * (v1 - v0)
    }
}

/// Enclosing SD band of a z-score: `lower < z <= upper`, open-ended beyond
/// the outermost labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ZBand {
    pub lower: Option<ZLabel>,
    pub upper: Option<ZLabel>,
}

impl ZBand {
    fn locate<T: Scalar>(labels: &[ZLabel], z: T) -> Self {
        let i = labels.partition_point(|l| l.value::<T>() < z);
        ZBand {
            lower: i.checked_sub(1).map(|j| labels[j]),
            upper: labels.get(i).copied(),
        }
    }
}

impl fmt::Display for ZBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => write!(f, "({l},{u})"),
            (None, Some(u)) => write!(f, "(-inf,{u})"),
            (Some(l), None) => write!(f, "({l},inf)"),
            (None, None) => f.write_str("(-inf,inf)"),
        }
    }
}

/// A scored measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZScoreResult<T> {
    pub z: T,
    pub zone: Color,
    pub band: ZBand,
}

fn out_of_range<T: Scalar>(ds: &StandardDataset<T>, x: T) -> AnthroError {
    let (min, max) = ds.x_range();
    AnthroError::XOutOfRange {
        x: x.as_f64(),
        min: min.as_f64(),
        max: max.as_f64(),
    }
}

/// SD-line values at `x`, interpolating between the bracketing rows.
pub fn profile_at<T: Scalar>(ds: &StandardDataset<T>, x: T) -> Result<SdProfile<T>, AnthroError> {
    let rows = ds.rows();
    let values = match ds.bracket(x).ok_or_else(|| out_of_range(ds, x))? {
        Bracket::Exact(i) => rows[i].values().to_vec(),
        Bracket::Between(i) => {
            let (a, b) = (&rows[i], &rows[i + 1]);
            let t = (x - a.x()) / (b.x() - a.x());
            a.values()
                .iter()
                .zip(b.values())
                .map(|(&va, &vb)| va + t * (vb - va))
                .collect()
        }
    };
    Ok(SdProfile {
        x,
        labels: ds.z_labels().to_vec(),
        values,
    })
}

/// Decimal z of measurement `y` at `x`, without zone classification.
pub fn z_value<T: Scalar>(ds: &StandardDataset<T>, x: T, y: T) -> Result<T, AnthroError> {
    let profile = profile_at(ds, x)?;
    if y <= T::zero() || !y.is_finite() {
        return Err(AnthroError::NonPositiveMeasure(y.as_f64()));
    }
    Ok(profile.z_for(y))
}

/// Scores measurement `y` at `x` and classifies it under `palette`.
pub fn zscore<T: Scalar>(
    ds: &StandardDataset<T>,
    x: T,
    y: T,
    palette: &ZonePalette<T>,
) -> Result<ZScoreResult<T>, AnthroError> {
    let z = z_value(ds, x, y)?;
    Ok(ZScoreResult {
        z,
        zone: palette.classify(z),
        band: ZBand::locate(ds.z_labels(), z),
    })
}

/// Measurement at `x` that scores exactly `z`.
pub fn value_for_z<T: Scalar>(ds: &StandardDataset<T>, x: T, z: T) -> Result<T, AnthroError> {
    if !z.is_finite() {
        return Err(AnthroError::NonFiniteZ(z.as_f64()));
    }
    Ok(profile_at(ds, x)?.value_for(z))
}

/// Zone color for `z`; see [`ZonePalette::classify`].
pub fn classify<T: Scalar>(z: T, palette: &ZonePalette<T>) -> Color {
    palette.classify(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standards::{DatasetMeta, Indicator, Sex, XUnit};

    const GIRLS: &str = "x,SD3neg,SD2neg,SD1neg,SD0\n\
                         45.0,1.9,2.1,2.3,2.5\n\
                         45.5,2.0,2.1,2.3,2.5\n\
                         46.0,2.0,2.2,2.4,2.6\n\
                         46.5,2.1,2.3,2.5,2.7\n\
                         47.0,2.2,2.4,2.6,2.8\n";

    fn girls() -> StandardDataset<f64> {
        let meta = DatasetMeta::new("wfl-girls", Indicator::WeightForHeight, Sex::Female, XUnit::LengthCm);
        StandardDataset::parse(meta, GIRLS).unwrap()
    }

    fn label(z: i8) -> ZLabel {
        ZLabel::new(z).unwrap()
    }

    #[test]
    fn profile_on_grid_is_exact_row() {
        let p = profile_at(&girls(), 45.0).unwrap();
        assert_eq!(p.values, vec![1.9, 2.1, 2.3, 2.5]);
    }

    #[test]
    fn profile_between_rows() {
        let p = profile_at(&girls(), 45.25).unwrap();
        assert!((p.value(label(-3)).unwrap() - 1.95).abs() < 1e-12);
        assert!((p.value(label(-2)).unwrap() - 2.1).abs() < 1e-12);
    }

    #[test]
    fn profile_out_of_range() {
        let err = profile_at(&girls(), 44.0).unwrap_err();
        assert_eq!(
            err,
            AnthroError::XOutOfRange {
                x: 44.0,
                min: 45.0,
                max: 47.0
            }
        );
        assert!(profile_at(&girls(), 47.01).is_err());
    }

    #[test]
    fn zscore_examples() {
        let ds = girls();
        let pal = ZonePalette::passport();
        let r = zscore(&ds, 45.0, 2.0, &pal).unwrap();
        // -3 + (2.0 - 1.9) / (2.1 - 1.9)
        let oracle = -3.0 + (2.0 - 1.9) / (2.1 - 1.9);
        assert!((r.z - oracle).abs() < 1e-12);
        assert!((r.z + 2.5).abs() < 1e-9);
        assert_eq!(r.zone, Color::Yellow);
        assert_eq!(
            r.band,
            ZBand {
                lower: Some(label(-3)),
                upper: Some(label(-2))
            }
        );
        assert_eq!(r.band.to_string(), "(-3,-2)");

        assert_eq!(z_value(&ds, 45.0, 2.5).unwrap(), 0.0);
        assert_eq!(z_value(&ds, 45.0, 2.1).unwrap(), -2.0);
    }

    #[test]
    fn zscore_errors() {
        let ds = girls();
        assert!(matches!(z_value(&ds, 44.0, 2.0), Err(AnthroError::XOutOfRange { .. })));
        assert_eq!(z_value(&ds, 45.0, 0.0), Err(AnthroError::NonPositiveMeasure(0.0)));
        assert!(z_value(&ds, 45.0, f64::NAN).is_err());
    }

    #[test]
    fn extrapolation_uses_outer_band_slope() {
        let ds = girls();
        let v = value_for_z(&ds, 45.0, -3.5).unwrap();
        assert!((v - (1.9 - 0.5 * (2.1 - 1.9))).abs() < 1e-12);
        assert!((z_value(&ds, 45.0, 1.8).unwrap() + 3.5).abs() < 1e-12);
        // above the median: slope of the (-1, 0) band
        assert!((z_value(&ds, 45.0, 2.6).unwrap() - 0.5).abs() < 1e-12);
        let band = zscore(&ds, 45.0, 2.6, &ZonePalette::who()).unwrap().band;
        assert_eq!(
            band,
            ZBand {
                lower: Some(label(0)),
                upper: None
            }
        );
        let band = zscore(&ds, 45.0, 1.8, &ZonePalette::who()).unwrap().band;
        assert_eq!(band.to_string(), "(-inf,-3)");
    }

    #[test]
    fn value_for_z_identity_on_grid() {
        let ds = girls();
        assert!((value_for_z(&ds, 45.0, -2.5).unwrap() - 2.0).abs() < 1e-12);
        for row in ds.rows() {
            for (l, v) in ds.z_labels().iter().zip(row.values()) {
                assert_eq!(value_for_z(&ds, row.x(), l.value()).unwrap(), *v);
            }
        }
    }

    #[test]
    fn wide_label_spacing() {
        // pregnancy-style chart with only the -1 and +1 lines
        let meta = DatasetMeta::new("gain", Indicator::Custom, Sex::Female, XUnit::AgeDays);
        let ds = StandardDataset::<f64>::parse(meta, "x,SD1neg,SD1\n0,1,3\n10,2,6\n").unwrap();
        assert!((z_value(&ds, 0.0, 2.0).unwrap()).abs() < 1e-12);
        assert!((z_value(&ds, 0.0, 3.5).unwrap() - 1.5).abs() < 1e-12);
        assert!((value_for_z(&ds, 10.0, 0.5).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let meta = DatasetMeta::new("wfl-girls", Indicator::WeightForHeight, Sex::Female, XUnit::LengthCm);
        let ds = StandardDataset::<f32>::parse(meta, GIRLS).unwrap();
        let z = z_value(&ds, 45.0f32, 2.0f32).unwrap();
        assert!((z + 2.5).abs() < 1e-5);
    }
}
