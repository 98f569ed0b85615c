//! Tick generation for time and numeric axes.

use serde::{Deserialize, Serialize};

use super::model::{Domain, Tick};
use super::ChartError;

const MAX_TICKS: usize = 10_000;

/// Calendar granularity of a time axis or of its ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Hours,
    Days,
    Weeks,
    Months,
    Years,
}

impl Granularity {
    /// Length in days. Months and years use mean Gregorian lengths.
    pub fn days(self) -> f64 {
        match self {
            Granularity::Hours => 1.0 / 24.0,
            Granularity::Days => 1.0,
            Granularity::Weeks => 7.0,
            Granularity::Months => 30.4375,
            Granularity::Years => 365.25,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Granularity::Hours => "h",
            Granularity::Days => "d",
            Granularity::Weeks => "w",
            Granularity::Months => "m",
            Granularity::Years => "y",
        }
    }
}

/// Every `every` units of `granularity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TickStep {
    pub granularity: Granularity,
    pub every: f64,
}

impl TickStep {
    pub fn new(granularity: Granularity, every: f64) -> Self {
        TickStep { granularity, every }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TickPlan {
    Uniform {
        step: TickStep,
    },
    /// `fine` up to and including `breakpoint` (axis units), `coarse` beyond.
    Breakpoint {
        breakpoint: f64,
        fine: TickStep,
        coarse: TickStep,
    },
    /// Positions in axis units, labelled with their value.
    Explicit {
        positions: Vec<f64>,
    },
}

/// Ticks over `domain`, whose values are measured in `axis_unit`.
///
/// Uniform ticks are multiples of the step counted from `domain.min`. With a
/// breakpoint the fine spacing runs up to the breakpoint and the coarse
/// spacing (still aligned to `domain.min`) takes over after it.
pub fn generate_ticks(domain: Domain, axis_unit: Granularity, plan: &TickPlan) -> Result<Vec<Tick>, ChartError> {
    if !domain.is_valid() {
        return Err(ChartError::EmptyDomain {
            min: domain.min,
            max: domain.max,
        });
    }
    let label_in = |x: f64, g: Granularity| {
        let value = x * axis_unit.days() / g.days();
        let text = format_number(value);
        if g == axis_unit {
            text
        } else {
            format!("{text}{}", g.suffix())
        }
    };
    let ticks = match plan {
        TickPlan::Uniform { step } => {
            let width = step_width(step, axis_unit)?;
            multiples(domain.min, domain.max, width)?
                .into_iter()
                .map(|x| Tick {
                    x,
                    label: label_in(x, step.granularity),
                })
                .collect()
        }
        TickPlan::Breakpoint {
            breakpoint,
            fine,
            coarse,
        } => {
            let bp = *breakpoint;
            if !domain.contains(bp) {
                return Err(ChartError::InvalidSpec(format!(
                    "tick breakpoint {bp} outside domain [{}, {}]",
                    domain.min, domain.max
                )));
            }
            let fine_w = step_width(fine, axis_unit)?;
            let coarse_w = step_width(coarse, axis_unit)?;
            let mut ticks: Vec<Tick> = multiples(domain.min, bp, fine_w)?
                .into_iter()
                .map(|x| Tick {
                    x,
                    label: label_in(x, fine.granularity),
                })
                .collect();
            let last = ticks.last().map(|t| t.x).unwrap_or(f64::NEG_INFINITY);
            let tol = coarse_w * 1e-9;
            ticks.extend(
                multiples(domain.min, domain.max, coarse_w)?
                    .into_iter()
                    .filter(|&x| x > bp + tol && x > last + tol)
                    .map(|x| Tick {
                        x,
                        label: label_in(x, coarse.granularity),
                    }),
            );
            ticks
        }
        TickPlan::Explicit { positions } => {
            let mut ticks = Vec::with_capacity(positions.len());
            for &x in positions {
                if !domain.contains(x) || ticks.last().is_some_and(|t: &Tick| x <= t.x) {
                    return Err(ChartError::InvalidSpec(format!(
                        "explicit tick {x} outside domain or out of order"
                    )));
                }
                ticks.push(Tick {
                    x,
                    label: format_number(x),
                });
            }
            ticks
        }
    };
    Ok(ticks)
}

fn step_width(step: &TickStep, axis_unit: Granularity) -> Result<f64, ChartError> {
    let width = step.every * step.granularity.days() / axis_unit.days();
    if width.is_finite() && width > 0.0 {
        Ok(width)
    } else {
        Err(ChartError::InvalidSpec(format!(
            "tick step {} must be positive",
            step.every
        )))
    }
}

/// `min + k * width` for every k landing inside `[min, max]`.
fn multiples(min: f64, max: f64, width: f64) -> Result<Vec<f64>, ChartError> {
    let count = ((max - min) / width + 1e-9).floor();
    if count + 1.0 > MAX_TICKS as f64 {
        return Err(ChartError::InvalidSpec(format!(
            "tick step {width} yields more than {MAX_TICKS} ticks"
        )));
    }
    Ok((0..=count as usize)
        .map(|k| (min + k as f64 * width).min(max))
        .collect())
}

/// Evenly spaced "nice" ticks (steps of 1, 2 or 5 times a power of ten)
/// inside `domain`, aiming for about `target` ticks.
pub fn nice_ticks(domain: Domain, target: usize) -> Result<Vec<Tick>, ChartError> {
    if !domain.is_valid() {
        return Err(ChartError::EmptyDomain {
            min: domain.min,
            max: domain.max,
        });
    }
    let step = nice_step(domain.span() / target.max(2).saturating_sub(1) as f64);
    let first = (domain.min / step - 1e-9).ceil();
    let last = (domain.max / step + 1e-9).floor();
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    Ok((first as i64..=last as i64)
        .map(|k| {
            let x = k as f64 * step;
            Tick {
                x: x.clamp(domain.min, domain.max),
                label: format!("{x:.decimals$}"),
            }
        })
        .map(|mut t| {
            if t.label.starts_with('-') && t.label.trim_start_matches(['-', '0', '.']).is_empty() {
                t.label.remove(0);
            }
            t
        })
        .collect())
}

fn nice_step(rough: f64) -> f64 {
    let magnitude = 10f64.powf(rough.log10().floor());
    let norm = rough / magnitude;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * magnitude
}

/// Decade ticks for a log axis, adding 2x and 5x ticks when the range spans
/// fewer than two decades.
pub fn log_ticks(range: Domain) -> Vec<Tick> {
    let lo = range.min.log10().floor() as i32;
    let hi = range.max.log10().ceil() as i32;
    let multipliers: &[f64] = if hi - lo <= 2 { &[1.0, 2.0, 5.0] } else { &[1.0] };
    let mut ticks = Vec::new();
    for e in lo..=hi {
        for m in multipliers {
            let x = m * 10f64.powi(e);
            if x >= range.min * (1.0 - 1e-12) && x <= range.max * (1.0 + 1e-12) {
                ticks.push(Tick {
                    x: x.clamp(range.min, range.max),
                    label: format_log_label(x),
                });
            }
        }
    }
    ticks
}

fn format_log_label(x: f64) -> String {
    if (1e-3..1e7).contains(&x) {
        format_number(x)
    } else {
        format!("{x:e}")
    }
}

/// Up to two decimals, trailing zeros trimmed.
pub(crate) fn format_number(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(ticks: &[Tick]) -> Vec<f64> {
        ticks.iter().map(|t| t.x).collect()
    }

    #[test]
    fn monthly_every_two() {
        let plan = TickPlan::Uniform {
            step: TickStep::new(Granularity::Months, 2.0),
        };
        let ticks = generate_ticks(Domain::new(0.0, 24.0), Granularity::Months, &plan).unwrap();
        assert_eq!(ticks.len(), 13);
        assert_eq!(ticks[12].x, 24.0);
        assert_eq!(ticks[3].label, "6");
    }

    #[test]
    fn breakpoint_changes_spacing() {
        // weekly before week 12, yearly afterwards, on a weeks axis
        let plan = TickPlan::Breakpoint {
            breakpoint: 12.0,
            fine: TickStep::new(Granularity::Weeks, 1.0),
            coarse: TickStep::new(Granularity::Years, 1.0),
        };
        let ticks = generate_ticks(Domain::new(0.0, 160.0), Granularity::Weeks, &plan).unwrap();
        let x = xs(&ticks);
        assert_eq!(&x[..13], &(0..=12).map(f64::from).collect::<Vec<_>>()[..]);
        let gaps: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(gaps[..12].iter().all(|g| (g - 1.0).abs() < 1e-12));
        let year = 365.25 / 7.0;
        assert!((x[13] - year).abs() < 1e-9);
        assert!((x[14] - 2.0 * year).abs() < 1e-9);
        assert_eq!(ticks[13].label, "1y");
        assert_eq!(ticks.len(), 16);
    }

    #[test]
    fn days_axis_with_month_ticks() {
        let plan = TickPlan::Uniform {
            step: TickStep::new(Granularity::Months, 1.0),
        };
        let ticks = generate_ticks(Domain::new(0.0, 365.0), Granularity::Days, &plan).unwrap();
        assert_eq!(ticks.len(), 12);
        assert_eq!(ticks[1].label, "1m");
    }

    #[test]
    fn empty_domain() {
        let plan = TickPlan::Uniform {
            step: TickStep::new(Granularity::Months, 1.0),
        };
        assert_eq!(
            generate_ticks(Domain::new(5.0, 5.0), Granularity::Months, &plan),
            Err(ChartError::EmptyDomain { min: 5.0, max: 5.0 })
        );
        assert!(nice_ticks(Domain::new(1.0, 0.0), 5).is_err());
    }

    #[test]
    fn explicit_ticks_checked() {
        let ok = TickPlan::Explicit {
            positions: vec![0.0, 1.5, 3.0],
        };
        assert_eq!(
            generate_ticks(Domain::new(0.0, 3.0), Granularity::Days, &ok)
                .unwrap()
                .len(),
            3
        );
        let bad = TickPlan::Explicit {
            positions: vec![1.0, 0.5],
        };
        assert!(generate_ticks(Domain::new(0.0, 3.0), Granularity::Days, &bad).is_err());
    }

    #[test]
    fn tiny_steps_rejected() {
        let plan = TickPlan::Uniform {
            step: TickStep::new(Granularity::Hours, 0.0),
        };
        assert!(generate_ticks(Domain::new(0.0, 10.0), Granularity::Days, &plan).is_err());
    }

    #[test]
    fn nice_ticks_cover_range() {
        let ticks = nice_ticks(Domain::new(1.7, 3.1), 6).unwrap();
        let labels: Vec<&str> = ticks.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, vec!["2.0", "2.5", "3.0"]);
        let ticks = nice_ticks(Domain::new(-1.0, 1.0), 5).unwrap();
        assert!(ticks.iter().any(|t| t.label == "0.0"));
        assert!(ticks.iter().all(|t| t.label != "-0.0"));
    }

    #[test]
    fn log_decades() {
        let ticks = log_ticks(Domain::new(10.0, 100_000.0));
        let labels: Vec<&str> = ticks.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, vec!["10", "100", "1000", "10000", "100000"]);
        let ticks = log_ticks(Domain::new(1.0, 50.0));
        assert_eq!(ticks.len(), 6);
    }
}
