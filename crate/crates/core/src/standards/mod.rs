//! WHO-style standard-deviation reference tables.
//!
//! A [`StandardDataset`] holds one value column per SD line over a sorted
//! x-grid (age or length). Tables are read from a strict CSV format:
//!
//! ```text
//! # comment lines start with '#'
//! x,SD3neg,SD2neg,SD1neg,SD0
//! 45.0,1.9,2.1,2.3,2.5
//! 45.5,2.0,2.1,2.3,2.5
//! ```
//!
//! Column labels come from `SD3neg, SD2neg, SD1neg, SD0, SD1, SD2, SD3` in
//! any order; the canonical serialization always orders them by ascending z.

mod catalog;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::scalar::Scalar;

pub use catalog::{Catalog, CatalogEntry, CatalogError};

/// Errors raised while parsing or validating a reference table.
///
/// Every variant carries the 1-based line number of the offending input line.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StandardsError {
    #[error("line {line}: missing header, expected `x,<label>{{,<label>}}`")]
    MissingHeader { line: usize },
    #[error("line {line}: unknown z label `{label}`")]
    UnknownZLabel { line: usize, label: String },
    #[error("line {line}: duplicate z label `{label}`")]
    DuplicateZLabel { line: usize, label: String },
    #[error("line {line}: x values must strictly increase ({x} after {previous})")]
    NonMonotonicX { line: usize, x: String, previous: String },
    #[error(
        "line {line}: values must strictly increase with z ({lower} at {lower_label} >= {upper} at {upper_label})"
    )]
    NonMonotonicRow {
        line: usize,
        lower_label: ZLabel,
        lower: String,
        upper_label: ZLabel,
        upper: String,
    },
    #[error("line {line}: at least two data rows are required")]
    FewerThanTwoRows { line: usize },
    #[error("line {line}: at least two z labels are required")]
    FewerThanTwoZLabels { line: usize },
    #[error("line {line}, column {column}: malformed number `{text}`")]
    MalformedNumber { line: usize, column: usize, text: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("invalid dataset metadata: {0}")]
    InvalidMeta(String),
}

/// An integer SD line in `-3..=3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub struct ZLabel(i8);

impl ZLabel {
    pub const MIN: ZLabel = ZLabel(-3);
    pub const MAX: ZLabel = ZLabel(3);

    pub fn new(z: i8) -> Option<Self> {
        (-3..=3).contains(&z).then_some(ZLabel(z))
    }

    pub fn get(self) -> i8 {
        self.0
    }

    pub fn value<T: Scalar>(self) -> T {
        T::of(f64::from(self.0))
    }

    /// Column name used in the CSV header (`SD2neg`, `SD0`, `SD1`, ...).
    pub fn column_name(self) -> String {
        if self.0 < 0 {
            format!("SD{}neg", -self.0)
        } else {
            format!("SD{}", self.0)
        }
    }

    pub fn from_column_name(name: &str) -> Option<Self> {
        let digits = name.strip_prefix("SD")?;
        let (digits, negative) = match digits.strip_suffix("neg") {
            Some(d) => (d, true),
            None => (digits, false),
        };
        if digits.len() != 1 {
            return None;
        }
        let magnitude = digits.parse::<i8>().ok()?;
        if negative && magnitude == 0 {
            return None;
        }
        ZLabel::new(if negative { -magnitude } else { magnitude })
    }
}

impl TryFrom<i8> for ZLabel {
    type Error = String;

    fn try_from(z: i8) -> Result<Self, Self::Error> {
        ZLabel::new(z).ok_or_else(|| format!("z label {z} outside -3..=3"))
    }
}

impl From<ZLabel> for i8 {
    fn from(z: ZLabel) -> i8 {
        z.0
    }
}

impl fmt::Display for ZLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! kebab_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!(
                        "unknown {} `{}` (expected one of: {})",
                        stringify!($name),
                        other,
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

kebab_enum!(
    /// Growth indicator a dataset describes.
    Indicator {
        WeightForAge => "weight-for-age",
        HeightForAge => "height-for-age",
        WeightForHeight => "weight-for-height",
        Custom => "custom",
    }
);

kebab_enum!(
    /// Sex a reference table applies to.
    Sex {
        Female => "female",
        Male => "male",
        Any => "any",
    }
);

kebab_enum!(
    /// Unit of the x-grid.
    XUnit {
        AgeDays => "age-days",
        AgeMonths => "age-months",
        LengthCm => "length-cm",
    }
);

/// Descriptive fields of a dataset that do not live in the CSV body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub id: String,
    pub indicator: Indicator,
    pub sex: Sex,
    pub x_unit: XUnit,
    pub x_label: String,
    pub y_label: String,
}

impl DatasetMeta {
    pub fn new(id: impl Into<String>, indicator: Indicator, sex: Sex, x_unit: XUnit) -> Self {
        let x_label = match x_unit {
            XUnit::AgeDays => "Age (days)",
            XUnit::AgeMonths => "Age (months)",
            XUnit::LengthCm => "Length (cm)",
        };
        let y_label = match indicator {
            Indicator::WeightForAge | Indicator::WeightForHeight => "Weight (kg)",
            Indicator::HeightForAge => "Height (cm)",
            Indicator::Custom => "Value",
        };
        DatasetMeta {
            id: id.into(),
            indicator,
            sex,
            x_unit,
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), StandardsError> {
        let id_ok = !self.id.is_empty()
            && self
                .id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !id_ok {
            return Err(StandardsError::InvalidMeta(format!(
                "id `{}` must be non-empty and use only [A-Za-z0-9_-]",
                self.id
            )));
        }
        for (field, text) in [("x_label", &self.x_label), ("y_label", &self.y_label)] {
            if text.contains(['\n', '\r']) {
                return Err(StandardsError::InvalidMeta(format!("{field} must be a single line")));
            }
        }
        Ok(())
    }
}

/// One grid point: SD-line values at `x`, aligned with the dataset's z labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    x: T,
    values: Vec<T>,
}

impl<T: Scalar> Row<T> {
    pub fn new(x: T, values: Vec<T>) -> Self {
        Row { x, values }
    }

    pub fn x(&self) -> T {
        self.x
    }

    /// Values in ascending z order.
    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Position of an x value on the dataset grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket {
    Exact(usize),
    /// `x` lies strictly between rows `i` and `i + 1`.
    Between(usize),
}

/// A validated SD reference table. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardDataset<T> {
    meta: DatasetMeta,
    z_labels: Vec<ZLabel>,
    rows: Vec<Row<T>>,
}

/// Hex SHA-256 over the canonical serialization of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatasetDigest(pub String);

impl DatasetDigest {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DatasetDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Line a row would occupy in the canonical CSV (header is line 1).
fn canonical_line(row_index: usize) -> usize {
    row_index + 2
}

impl<T: Scalar> StandardDataset<T> {
    /// Builds a dataset from in-memory parts, enforcing every invariant.
    ///
    /// `z_labels` may be in any order; row values are given in the same order
    /// as `z_labels`. Line numbers in errors refer to the canonical CSV form.
    pub fn new(meta: DatasetMeta, z_labels: Vec<ZLabel>, rows: Vec<(T, Vec<T>)>) -> Result<Self, StandardsError> {
        let lines = (0..rows.len()).map(canonical_line).collect::<Vec<_>>();
        Self::assemble(meta, z_labels, rows, &lines, 1)
    }

    fn assemble(
        meta: DatasetMeta,
        z_labels: Vec<ZLabel>,
        rows: Vec<(T, Vec<T>)>,
        lines: &[usize],
        header_line: usize,
    ) -> Result<Self, StandardsError> {
        meta.validate()?;
        let mut order: Vec<usize> = (0..z_labels.len()).collect();
        order.sort_by_key(|&i| z_labels[i]);
        let sorted_labels: Vec<ZLabel> = order.iter().map(|&i| z_labels[i]).collect();
        if let Some(w) = sorted_labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(StandardsError::DuplicateZLabel {
                line: header_line,
                label: w[0].column_name(),
            });
        }
        if sorted_labels.len() < 2 {
            return Err(StandardsError::FewerThanTwoZLabels { line: header_line });
        }

        let mut out: Vec<Row<T>> = Vec::with_capacity(rows.len());
        for ((x, values), &line) in rows.into_iter().zip(lines) {
            if values.len() != sorted_labels.len() {
                return Err(StandardsError::FieldCount {
                    line,
                    expected: sorted_labels.len() + 1,
                    found: values.len() + 1,
                });
            }
            if !x.is_finite() {
                return Err(StandardsError::MalformedNumber {
                    line,
                    column: 1,
                    text: x.to_string(),
                });
            }
            if let Some(prev) = out.last() {
                if x <= prev.x {
                    return Err(StandardsError::NonMonotonicX {
                        line,
                        x: x.to_string(),
                        previous: prev.x.to_string(),
                    });
                }
            }
            let sorted: Vec<T> = order.iter().map(|&i| values[i]).collect();
            if let Some((i, v)) = sorted.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(StandardsError::MalformedNumber {
                    line,
                    column: order[i] + 2,
                    text: v.to_string(),
                });
            }
            if let Some(i) = (0..sorted.len() - 1).find(|&i| sorted[i] >= sorted[i + 1]) {
                return Err(StandardsError::NonMonotonicRow {
                    line,
                    lower_label: sorted_labels[i],
                    lower: sorted[i].to_string(),
                    upper_label: sorted_labels[i + 1],
                    upper: sorted[i + 1].to_string(),
                });
            }
            out.push(Row { x, values: sorted });
        }
        if out.len() < 2 {
            let line = lines.last().copied().unwrap_or(header_line);
            return Err(StandardsError::FewerThanTwoRows { line });
        }
        Ok(StandardDataset {
            meta,
            z_labels: sorted_labels,
            rows: out,
        })
    }

    /// Parses the CSV table format into a dataset described by `meta`.
    pub fn parse(meta: DatasetMeta, text: &str) -> Result<Self, StandardsError> {
        let mut records = crate::csvlines::records(text)
            .map_err(|(line, message)| StandardsError::Csv { line, message })?
            .into_iter();
        let header = match records.next() {
            None => return Err(StandardsError::MissingHeader { line: 1 }),
            Some(rec) => rec,
        };
        let header_line = header.number;
        if header.fields.first().map(String::as_str) != Some("x") {
            return Err(StandardsError::MissingHeader { line: header_line });
        }
        let mut labels = Vec::with_capacity(header.fields.len().saturating_sub(1));
        for name in header.fields.iter().skip(1) {
            let label = ZLabel::from_column_name(name).ok_or_else(|| StandardsError::UnknownZLabel {
                line: header_line,
                label: name.to_string(),
            })?;
            if labels.contains(&label) {
                return Err(StandardsError::DuplicateZLabel {
                    line: header_line,
                    label: name.to_string(),
                });
            }
            labels.push(label);
        }
        if labels.len() < 2 {
            return Err(StandardsError::FewerThanTwoZLabels { line: header_line });
        }

        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for rec in records {
            let line = rec.number;
            if rec.fields.len() != labels.len() + 1 {
                return Err(StandardsError::FieldCount {
                    line,
                    expected: labels.len() + 1,
                    found: rec.fields.len(),
                });
            }
            let mut fields = rec
                .fields
                .iter()
                .enumerate()
                .map(|(i, text)| parse_number::<T>(text, line, i + 1));
            let x = fields.next().expect("row has an x field")?;
            let values = fields.collect::<Result<Vec<T>, _>>()?;
            rows.push((x, values));
            lines.push(line);
        }
        Self::assemble(meta, labels, rows, &lines, header_line)
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn id(&self) -> &str {
        &self.meta.id
    }

    /// Labels in ascending z order.
    pub fn z_labels(&self) -> &[ZLabel] {
        &self.z_labels
    }

    pub fn rows(&self) -> &[Row<T>] {
        &self.rows
    }

    pub fn x_range(&self) -> (T, T) {
        (self.rows[0].x, self.rows[self.rows.len() - 1].x)
    }

    pub fn label_index(&self, label: ZLabel) -> Option<usize> {
        self.z_labels.binary_search(&label).ok()
    }

    /// Locates `x` on the grid by binary search. `None` when outside the range
    /// or not a number.
    pub fn bracket(&self, x: T) -> Option<Bracket> {
        let (lo, hi) = self.x_range();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let i = self.rows.partition_point(|r| r.x < x);
        if self.rows[i].x == x {
            Some(Bracket::Exact(i))
        } else {
            Some(Bracket::Between(i - 1))
        }
    }

    /// Canonical CSV: ascending-z header, rows in x order, shortest decimal
    /// rendering, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for label in &self.z_labels {
            out.push(',');
            out.push_str(&label.column_name());
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&render_decimal(row.x));
            for v in &row.values {
                out.push(',');
                out.push_str(&render_decimal(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn digest(&self) -> DatasetDigest {
        let mut hasher = Sha256::new();
        hasher.update(b"medgraph-standard/1\n");
        for (key, value) in [
            ("id", self.meta.id.as_str()),
            ("indicator", self.meta.indicator.as_str()),
            ("sex", self.meta.sex.as_str()),
            ("x_unit", self.meta.x_unit.as_str()),
            ("x_label", self.meta.x_label.as_str()),
            ("y_label", self.meta.y_label.as_str()),
        ] {
            hasher.update(key.as_bytes());
            hasher.update(b"=");
            hasher.update(value.as_bytes());
            hasher.update(b"\n");
        }
        hasher.update(self.to_csv().as_bytes());
        DatasetDigest(hex::encode(hasher.finalize()))
    }

    /// Converts the value type, e.g. `f32` to `f64`, preserving each value's
    /// shortest decimal form (so `1.9f32` becomes `1.9f64`).
    pub fn cast<U: Scalar>(&self) -> StandardDataset<U> {
        let conv = |v: T| v.to_string().parse::<U>().unwrap_or_else(|_| U::of(v.as_f64()));
        StandardDataset {
            meta: self.meta.clone(),
            z_labels: self.z_labels.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| Row {
                    x: conv(r.x),
                    values: r.values.iter().map(|&v| conv(v)).collect(),
                })
                .collect(),
        }
    }
}

/// Renders a finite decimal without trailing zeros (`45.0` becomes `45`).
fn render_decimal<T: Scalar>(v: T) -> String {
    let s = v.to_string();
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn parse_number<T: Scalar>(text: &str, line: usize, column: usize) -> Result<T, StandardsError> {
    let malformed = || StandardsError::MalformedNumber {
        line,
        column,
        text: text.to_string(),
    };
    // Only plain decimals: no exponents, inf or nan spellings.
    let plain = !text.is_empty() && text.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+'));
    if !plain {
        return Err(malformed());
    }
    let v: T = text.parse().map_err(|_| malformed())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(malformed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GIRLS: &str = "x,SD3neg,SD2neg,SD1neg,SD0\n\
                         45.0,1.9,2.1,2.3,2.5\n\
                         45.5,2.0,2.1,2.3,2.5\n\
                         46.0,2.0,2.2,2.4,2.6\n\
                         46.5,2.1,2.3,2.5,2.7\n\
                         47.0,2.2,2.4,2.6,2.8\n";

    fn meta() -> DatasetMeta {
        DatasetMeta::new("wfl-girls", Indicator::WeightForHeight, Sex::Female, XUnit::LengthCm)
    }

    #[test]
    fn parses_girls_excerpt() {
        let ds = StandardDataset::<f64>::parse(meta(), GIRLS).unwrap();
        assert_eq!(ds.rows().len(), 5);
        let labels: Vec<i8> = ds.z_labels().iter().map(|z| z.get()).collect();
        assert_eq!(labels, vec![-3, -2, -1, 0]);
        assert_eq!(ds.rows()[0].x(), 45.0);
        assert_eq!(ds.rows()[0].values(), &[1.9, 2.1, 2.3, 2.5]);
    }

    #[test]
    fn decreasing_x_reports_line() {
        let text = "x,SD2neg,SD0\n46.0,2.2,2.6\n45.0,2.1,2.5\n";
        let err = StandardsError::NonMonotonicX {
            line: 3,
            x: "45".into(),
            previous: "46".into(),
        };
        assert_eq!(StandardDataset::<f64>::parse(meta(), text).unwrap_err(), err);
    }

    #[test]
    fn swapped_row_values_rejected() {
        let text = GIRLS.replace("45.0,1.9,2.1,2.3,2.5", "45.0,1.9,2.3,2.1,2.5");
        let err = StandardDataset::<f64>::parse(meta(), &text).unwrap_err();
        assert!(
            matches!(err, StandardsError::NonMonotonicRow { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn error_paths() {
        let parse = |t: &str| StandardDataset::<f64>::parse(meta(), t).unwrap_err();
        assert_eq!(parse(""), StandardsError::MissingHeader { line: 1 });
        assert_eq!(parse("45,1,2\n46,1,2\n"), StandardsError::MissingHeader { line: 1 });
        assert!(matches!(
            parse("x,SD4\n"),
            StandardsError::UnknownZLabel { line: 1, .. }
        ));
        assert!(matches!(parse("x,SD0neg,SD1\n"), StandardsError::UnknownZLabel { .. }));
        assert!(matches!(parse("x,SD0,SD0\n"), StandardsError::DuplicateZLabel { .. }));
        assert_eq!(
            parse("x,SD0\n1,2\n2,3\n"),
            StandardsError::FewerThanTwoZLabels { line: 1 }
        );
        assert_eq!(
            parse("x,SD0,SD1\n1,2,3\n"),
            StandardsError::FewerThanTwoRows { line: 2 }
        );
        assert_eq!(
            parse("x,SD0,SD1\n1,2,3\n2,abc,4\n"),
            StandardsError::MalformedNumber {
                line: 3,
                column: 2,
                text: "abc".into()
            }
        );
        assert!(matches!(
            parse("x,SD0,SD1\n1,2,3\n2,nan,4\n"),
            StandardsError::MalformedNumber { .. }
        ));
        assert!(matches!(
            parse("x,SD0,SD1\n1,2,3\n2,1e1,40\n"),
            StandardsError::MalformedNumber { .. }
        ));
        assert_eq!(
            parse("x,SD0,SD1\n1,2,3\n2,3\n"),
            StandardsError::FieldCount {
                line: 3,
                expected: 3,
                found: 2
            }
        );
        assert!(matches!(
            parse("x,SD0,SD1\n1,2,3\n1,2,3\n"),
            StandardsError::NonMonotonicX { line: 3, .. }
        ));
    }

    #[test]
    fn comments_crlf_and_blank_lines() {
        let text = "# WHO excerpt\r\nx,SD0,SD1\r\n# row comment\r\n1,2,3\r\n\r\n2,3,4\r\n";
        let ds = StandardDataset::<f64>::parse(meta(), text).unwrap();
        assert_eq!(ds.rows().len(), 2);
        // comment-shifted lines still count
        let bad = "# c\nx,SD0,SD1\n# c\n2,2,3\n1,3,4\n";
        assert!(matches!(
            StandardDataset::<f64>::parse(meta(), bad).unwrap_err(),
            StandardsError::NonMonotonicX { line: 5, .. }
        ));
    }

    #[test]
    fn canonical_csv_and_column_order() {
        let ds = StandardDataset::<f64>::parse(meta(), GIRLS).unwrap();
        assert!(ds
            .to_csv()
            .starts_with("x,SD3neg,SD2neg,SD1neg,SD0\n45,1.9,2.1,2.3,2.5\n45.5,2,"));
        let shuffled = "x,SD0,SD3neg,SD1neg,SD2neg\n\
                        45.0,2.5,1.9,2.3,2.1\n\
                        45.5,2.5,2.0,2.3,2.1\n\
                        46.0,2.6,2.0,2.4,2.2\n\
                        46.5,2.7,2.1,2.5,2.3\n\
                        47.0,2.8,2.2,2.6,2.4\n";
        let other = StandardDataset::<f64>::parse(meta(), shuffled).unwrap();
        assert_eq!(ds, other);
        assert_eq!(ds.digest(), other.digest());
    }

    #[test]
    fn digest_determinism_and_sensitivity() {
        let a = StandardDataset::<f64>::parse(meta(), GIRLS).unwrap();
        let b = StandardDataset::<f64>::parse(meta(), GIRLS).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().as_str().len(), 64);
        let changed = GIRLS.replace("45.0,1.9,2.1,2.3,2.5", "45.0,1.9,2.1,2.3,2.6");
        let c = StandardDataset::<f64>::parse(meta(), &changed).unwrap();
        assert_ne!(a.digest(), c.digest());
        let mut m = meta();
        m.sex = Sex::Male;
        let d = StandardDataset::<f64>::parse(m, GIRLS).unwrap();
        assert_ne!(a.digest(), d.digest());
    }

    #[test]
    fn bracket_search() {
        let ds = StandardDataset::<f64>::parse(meta(), GIRLS).unwrap();
        assert_eq!(ds.bracket(45.0), Some(Bracket::Exact(0)));
        assert_eq!(ds.bracket(47.0), Some(Bracket::Exact(4)));
        assert_eq!(ds.bracket(45.25), Some(Bracket::Between(0)));
        assert_eq!(ds.bracket(46.9), Some(Bracket::Between(3)));
        assert_eq!(ds.bracket(44.9), None);
        assert_eq!(ds.bracket(f64::NAN), None);
    }

    #[test]
    fn f32_tables() {
        let ds = StandardDataset::<f32>::parse(meta(), GIRLS).unwrap();
        assert_eq!(ds.rows()[1].values()[0], 2.0f32);
        assert_eq!(ds.cast::<f64>().to_csv(), ds.to_csv());
    }

    #[test]
    fn z_label_names() {
        for z in -3..=3 {
            let label = ZLabel::new(z).unwrap();
            assert_eq!(ZLabel::from_column_name(&label.column_name()), Some(label));
        }
        assert_eq!(ZLabel::new(4), None);
        assert_eq!(ZLabel::from_column_name("SD10"), None);
    }

    #[test]
    fn meta_id_validation() {
        let mut m = meta();
        m.id = "../etc".into();
        assert!(matches!(
            StandardDataset::<f64>::parse(m, GIRLS),
            Err(StandardsError::InvalidMeta(_))
        ));
    }
}
