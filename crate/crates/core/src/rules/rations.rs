use serde::Serialize;

use super::RulesError;
use crate::scalar::Scalar;

/// Weights in `[lo_kg, hi_kg)` receive `rations`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationBand<T> {
    pub lo_kg: T,
    pub hi_kg: T,
    pub rations: u32,
}

/// Contiguous weight bands mapping a child's weight to RUTF rations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationTable<T> {
    bands: Vec<RationBand<T>>,
}

impl<T: Scalar> RationTable<T> {
    pub fn new(bands: Vec<RationBand<T>>) -> Result<Self, RulesError> {
        Self::checked(bands, |i| i + 1)
    }

    fn checked(bands: Vec<RationBand<T>>, line_of: impl Fn(usize) -> usize) -> Result<Self, RulesError> {
        if bands.is_empty() {
            return Err(RulesError::InvalidTable {
                line: line_of(0),
                message: "table has no bands".into(),
            });
        }
        for (i, b) in bands.iter().enumerate() {
            let bad = |message: String| RulesError::InvalidTable {
                line: line_of(i),
                message,
            };
            if !(b.lo_kg.is_finite() && b.hi_kg.is_finite() && b.lo_kg < b.hi_kg) {
                return Err(bad(format!("band [{}, {}) is empty or not finite", b.lo_kg, b.hi_kg)));
            }
            if i > 0 && bands[i - 1].hi_kg != b.lo_kg {
                return Err(bad(format!(
                    "band starts at {} but the previous band ends at {}",
                    b.lo_kg,
                    bands[i - 1].hi_kg
                )));
            }
        }
        Ok(RationTable { bands })
    }

    /// Parses `lo,hi,rations` CSV (header line required, `#` comments allowed).
    pub fn parse(text: &str) -> Result<Self, RulesError> {
        let records =
            crate::csvlines::records(text).map_err(|(line, message)| RulesError::InvalidTable { line, message })?;
        let mut bands = Vec::new();
        let mut lines = Vec::new();
        let mut header_seen = false;
        for rec in records {
            let line = rec.number;
            let fields: Vec<&str> = rec.fields.iter().map(String::as_str).collect();
            if !header_seen {
                if fields != ["lo", "hi", "rations"] {
                    return Err(RulesError::InvalidTable {
                        line,
                        message: "expected header `lo,hi,rations`".into(),
                    });
                }
                header_seen = true;
                continue;
            }
            if fields.len() != 3 {
                return Err(RulesError::InvalidTable {
                    line,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let number = |s: &str| {
                s.parse::<T>().map_err(|_| RulesError::InvalidTable {
                    line,
                    message: format!("malformed number `{s}`"),
                })
            };
            let rations = fields[2].parse::<u32>().map_err(|_| RulesError::InvalidTable {
                line,
                message: format!("malformed ration count `{}`", fields[2]),
            })?;
            bands.push(RationBand {
                lo_kg: number(fields[0])?,
                hi_kg: number(fields[1])?,
                rations,
            });
            lines.push(line);
        }
        if !header_seen {
            return Err(RulesError::InvalidTable {
                line: 1,
                message: "expected header `lo,hi,rations`".into(),
            });
        }
        let last = lines.last().copied().unwrap_or(1);
        Self::checked(bands, |i| lines.get(i).copied().unwrap_or(last))
    }

    pub fn bands(&self) -> &[RationBand<T>] {
        &self.bands
    }

    pub fn span(&self) -> (T, T) {
        (self.bands[0].lo_kg, self.bands[self.bands.len() - 1].hi_kg)
    }
}

/// Rations for the band containing `weight_kg`.
pub fn rutf_rations<T: Scalar>(weight_kg: T, table: &RationTable<T>) -> Result<u32, RulesError> {
    let i = table.bands.partition_point(|b| b.hi_kg <= weight_kg);
    match table.bands.get(i) {
        Some(b) if b.lo_kg <= weight_kg => Ok(b.rations),
        _ => {
            let (min, max) = table.span();
            Err(RulesError::WeightOutOfTable {
                weight: weight_kg.as_f64(),
                min: min.as_f64(),
                max: max.as_f64(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> RationTable<f64> {
        RationTable::parse("lo,hi,rations\n3.0,5.0,1\n5.0,7.0,2\n7.0,10.0,3\n").unwrap()
    }

    #[test]
    fn lookups() {
        let t = table();
        assert_eq!(rutf_rations(7.1, &t), Ok(3));
        assert_eq!(rutf_rations(5.0, &t), Ok(2));
        assert_eq!(rutf_rations(3.0, &t), Ok(1));
        assert_eq!(rutf_rations(9.999, &t), Ok(3));
    }

    #[test]
    fn out_of_table() {
        let t = table();
        assert_eq!(
            rutf_rations(2.0, &t),
            Err(RulesError::WeightOutOfTable {
                weight: 2.0,
                min: 3.0,
                max: 10.0
            })
        );
        assert!(rutf_rations(10.0, &t).is_err());
        assert!(rutf_rations(f64::NAN, &t).is_err());
    }

    #[test]
    fn invalid_tables() {
        assert!(matches!(
            RationTable::<f64>::parse("lo,hi,rations\n3,5,1\n6,7,2\n"),
            Err(RulesError::InvalidTable { line: 3, .. })
        ));
        assert!(matches!(
            RationTable::<f64>::parse("lo,hi,rations\n5,3,1\n"),
            Err(RulesError::InvalidTable { line: 2, .. })
        ));
        assert!(RationTable::<f64>::parse("3,5,1\n").is_err());
        assert!(RationTable::<f64>::parse("lo,hi,rations\n").is_err());
        assert!(RationTable::<f64>::parse("lo,hi,rations\n3,5,x\n").is_err());
        assert!(RationTable::<f64>::new(vec![]).is_err());
    }
}
