//! Builders for the chart types used in primary care.

use serde::{Deserialize, Serialize};

use super::model::{
    AxisSide, Band, ChartSpec, Domain, Marker, Panel, Point, RefCurve, RefLine, Scale, Series, XAxisSpec, YAxisSpec,
};
use super::ticks::{generate_ticks, nice_ticks, Granularity, TickPlan, TickStep};
use super::ChartError;
use crate::anthro::ZonePalette;
use crate::color::Color;
use crate::scalar::Scalar;
use crate::standards::{StandardDataset, XUnit};

/// An observation left out of a growth chart, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedPoint {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthChart {
    pub spec: ChartSpec,
    pub dropped: Vec<DroppedPoint>,
}

fn curve_style(z: i8) -> (Color, bool) {
    match z.abs() {
        0 => (Color::Rgb(0x1b, 0x5e, 0x20), false),
        1 => (Color::Rgb(0x55, 0x55, 0x55), true),
        2 => (Color::Rgb(0xb7, 0x1c, 0x1c), false),
        _ => (Color::Rgb(0x21, 0x21, 0x21), false),
    }
}

fn pick_step(span: f64, candidates: &[f64], max_ticks: f64) -> f64 {
    candidates
        .iter()
        .copied()
        .find(|c| span / c + 1.0 <= max_ticks)
        .unwrap_or(*candidates.last().expect("candidates"))
}

/// Age ticks: finer for young ages, coarser as the span grows.
fn age_ticks(domain: Domain, unit: XUnit) -> Result<Vec<super::model::Tick>, ChartError> {
    let axis_unit = match unit {
        XUnit::AgeDays => Granularity::Days,
        XUnit::AgeMonths => Granularity::Months,
        XUnit::LengthCm => return nice_ticks(domain, 8),
    };
    let days = domain.span() * axis_unit.days();
    let step = if days <= 92.0 {
        TickStep::new(Granularity::Weeks, pick_step(days / 7.0, &[1.0, 2.0], 14.0))
    } else if days <= 2.0 * 365.25 + 1.0 {
        TickStep::new(Granularity::Months, pick_step(days / 30.4375, &[1.0, 2.0, 3.0], 14.0))
    } else {
        TickStep::new(Granularity::Years, pick_step(days / 365.25, &[1.0, 2.0, 5.0], 14.0))
    };
    generate_ticks(domain, axis_unit, &TickPlan::Uniform { step })
}

/// Growth chart: SD curves from `ds`, palette-colored bands between adjacent
/// curves, and the child's observations on top.
///
/// Observations outside the table's x-range (or with a non-positive value)
/// are dropped and reported in [`GrowthChart::dropped`].
pub fn growth_chart_spec<T: Scalar>(
    ds: &StandardDataset<T>,
    observations: &[(T, T)],
    palette: &ZonePalette<T>,
) -> Result<GrowthChart, ChartError> {
    if ds.rows().is_empty() || ds.z_labels().is_empty() {
        return Err(ChartError::EmptyDataset);
    }
    let (x_min, x_max) = ds.x_range();
    let domain = Domain::new(x_min.as_f64(), x_max.as_f64());

    let mut dropped = Vec::new();
    let mut kept: Vec<Point> = Vec::new();
    for (index, &(x, y)) in observations.iter().enumerate() {
        let (xf, yf) = (x.as_f64(), y.as_f64());
        let reason = if !(x >= x_min && x <= x_max) {
            Some(format!("x = {xf} outside table range [{}, {}]", domain.min, domain.max))
        } else if y <= T::zero() || !y.is_finite() {
            Some(format!("value {yf} is not a positive measurement"))
        } else {
            None
        };
        match reason {
            Some(reason) => dropped.push(DroppedPoint {
                index,
                x: xf,
                y: yf,
                reason,
            }),
            None => kept.push((xf, yf)),
        }
    }
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));

    let curves: Vec<RefCurve> = ds
        .z_labels()
        .iter()
        .enumerate()
        .map(|(j, label)| {
            let (stroke, dashed) = curve_style(label.get());
            RefCurve {
                name: format!("SD{}", label.get()),
                axis: AxisSide::Left,
                points: ds
                    .rows()
                    .iter()
                    .map(|r| (r.x().as_f64(), r.values()[j].as_f64()))
                    .collect(),
                stroke,
                dashed,
            }
        })
        .collect();

    let bands: Vec<Band> = curves
        .windows(2)
        .zip(ds.z_labels().windows(2))
        .map(|(pair, labels)| {
            let outer = labels[0].get().abs().max(labels[1].get().abs());
            Band {
                name: format!("band {} {}", labels[0].get(), labels[1].get()),
                lower: pair[0].clone(),
                upper: pair[1].clone(),
                fill: palette.classify(T::of(f64::from(outer))),
            }
        })
        .collect();

    let lowest = curves.first().expect("labels").points.iter().map(|p| p.1);
    let highest = curves.last().expect("labels").points.iter().map(|p| p.1);
    let y_lo = lowest.chain(kept.iter().map(|p| p.1)).fold(f64::INFINITY, f64::min);
    let y_hi = highest
        .chain(kept.iter().map(|p| p.1))
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = ((y_hi - y_lo) * 0.05).max(1e-6);
    let y_range = Domain::new((y_lo - pad).max(0.0), y_hi + pad);

    let meta = ds.meta();
    let mut panel = Panel::new(YAxisSpec {
        label: meta.y_label.clone(),
        scale: Scale::Linear,
        range: y_range,
        ticks: None,
    });
    panel.bands = bands;
    panel.ref_curves = curves;
    panel.series.push(Series {
        name: "observations".to_string(),
        axis: AxisSide::Left,
        points: kept,
        marker: Marker::Circle,
        stroke: Color::Rgb(0x0d, 0x47, 0xa1),
        line: true,
    });

    let spec = ChartSpec {
        title: format!("{}, {}", capitalize(meta.indicator.as_str()), meta.sex),
        x_axis: XAxisSpec {
            label: meta.x_label.clone(),
            domain,
            ticks: age_ticks(domain, meta.x_unit)?,
        },
        panels: vec![panel],
    };
    spec.validate()?;
    Ok(GrowthChart { spec, dropped })
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Inputs of a delivery chart (partograph), x in hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartographInput {
    #[serde(default = "default_labour_hours")]
    pub hours: Domain,
    pub heart_rate: Series,
    pub cervix: Series,
    pub descent: Series,
    pub contractions: Series,
    pub alert: RefLine,
    pub action: RefLine,
}

fn default_labour_hours() -> Domain {
    Domain::new(0.0, 12.0)
}

fn check_in_domain(name: &str, points: &[Point], domain: &Domain) -> Result<(), ChartError> {
    match points.iter().find(|p| !domain.contains(p.0)) {
        Some(p) => Err(ChartError::DomainMismatch {
            element: name.to_string(),
            x: p.0,
            min: domain.min,
            max: domain.max,
        }),
        None => Ok(()),
    }
}

/// Four stacked panels (foetal heart rate, cervix, descent, contractions)
/// over one time axis, with the alert and action lines on the cervix panel.
pub fn partograph_spec(input: &PartographInput) -> Result<ChartSpec, ChartError> {
    let domain = input.hours;
    if !domain.is_valid() {
        return Err(ChartError::EmptyDomain {
            min: domain.min,
            max: domain.max,
        });
    }
    input.alert.check_degenerate()?;
    input.action.check_degenerate()?;
    let series = [
        (
            &input.heart_rate,
            YAxisSpec::linear("Foetal heart rate (bpm)", 80.0, 200.0),
        ),
        (&input.cervix, YAxisSpec::linear("Cervix (cm)", 0.0, 10.0)),
        (&input.descent, YAxisSpec::linear("Descent (fifths)", 0.0, 5.0)),
        (
            &input.contractions,
            YAxisSpec::linear("Contractions / 10 min", 0.0, 5.0),
        ),
    ];
    for (s, _) in &series {
        check_in_domain(&s.name, &s.points, &domain)?;
    }
    for line in [&input.alert, &input.action] {
        check_in_domain(&line.name, &[line.start, line.end], &domain)?;
    }

    let panels = series
        .into_iter()
        .enumerate()
        .map(|(i, (s, axis))| {
            let mut panel = Panel::new(axis);
            panel.title = s.name.clone();
            panel.series.push(Series {
                axis: AxisSide::Left,
                ..s.clone()
            });
            if i == 1 {
                for line in [&input.alert, &input.action] {
                    panel.ref_lines.push(RefLine {
                        axis: AxisSide::Left,
                        ..line.clone()
                    });
                }
            }
            panel
        })
        .collect();

    let every = pick_step(domain.span(), &[1.0, 2.0, 4.0, 6.0, 12.0, 24.0], 25.0);
    let ticks = generate_ticks(
        domain,
        Granularity::Hours,
        &TickPlan::Uniform {
            step: TickStep::new(Granularity::Hours, every),
        },
    )?;
    let spec = ChartSpec {
        title: "Partograph".to_string(),
        x_axis: XAxisSpec {
            label: "Time (hours)".to_string(),
            domain,
            ticks,
        },
        panels,
    };
    spec.validate()?;
    Ok(spec)
}

/// Inputs of a dual-axis chart such as lymphocytes against viral load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualAxisInput {
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub x_label: Option<String>,
    /// Explicit x domain and tick plan; derived from the data when absent.
    #[serde(default)]
    pub x_domain: Option<Domain>,
    #[serde(default)]
    pub x_ticks: Option<(Granularity, TickPlan)>,
    pub left: Series,
    pub right: Series,
    pub left_axis: YAxisSpec,
    pub right_axis: YAxisSpec,
}

/// One panel with a left and a right y-axis, one series on each.
pub fn dual_axis_spec(
    left: &Series,
    right: &Series,
    left_axis: &YAxisSpec,
    right_axis: &YAxisSpec,
) -> Result<ChartSpec, ChartError> {
    dual_axis_chart(&DualAxisInput {
        title: None,
        x_label: None,
        x_domain: None,
        x_ticks: None,
        left: left.clone(),
        right: right.clone(),
        left_axis: left_axis.clone(),
        right_axis: right_axis.clone(),
    })
}

pub fn dual_axis_chart(input: &DualAxisInput) -> Result<ChartSpec, ChartError> {
    input.left_axis.validate("left axis")?;
    input.right_axis.validate("right axis")?;
    for (s, axis) in [(&input.left, &input.left_axis), (&input.right, &input.right_axis)] {
        if axis.scale == Scale::Log10 {
            if let Some(p) = s.points.iter().find(|p| p.1 <= 0.0 || p.1.is_nan()) {
                return Err(ChartError::NonPositiveOnLogAxis {
                    element: format!("series `{}`", s.name),
                    value: p.1,
                });
            }
        }
    }
    let domain = match input.x_domain {
        Some(d) => d,
        None => {
            let xs = input.left.points.iter().chain(&input.right.points).map(|p| p.0);
            let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            if !lo.is_finite() {
                Domain::new(0.0, 1.0)
            } else if lo == hi {
                Domain::new(lo - 1.0, hi + 1.0)
            } else {
                Domain::new(lo, hi)
            }
        }
    };
    let ticks = match &input.x_ticks {
        Some((unit, plan)) => generate_ticks(domain, *unit, plan)?,
        None => nice_ticks(domain, 8)?,
    };
    let mut panel = Panel::new(input.left_axis.clone());
    panel.right_axis = Some(input.right_axis.clone());
    panel.series.push(Series {
        axis: AxisSide::Left,
        ..input.left.clone()
    });
    panel.series.push(Series {
        axis: AxisSide::Right,
        ..input.right.clone()
    });
    let spec = ChartSpec {
        title: input
            .title
            .clone()
            .unwrap_or_else(|| format!("{} and {}", input.left.name, input.right.name)),
        x_axis: XAxisSpec {
            label: input.x_label.clone().unwrap_or_else(|| "Time".to_string()),
            domain,
            ticks,
        },
        panels: vec![panel],
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::model::Severity;
    use crate::standards::{DatasetMeta, Indicator, Sex};

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

    #[test]
    fn growth_chart_bands_follow_palette() {
        let chart = growth_chart_spec(&girls(), &[(45.5, 2.2)], &ZonePalette::passport()).unwrap();
        let panel = &chart.spec.panels[0];
        assert_eq!(panel.ref_curves.len(), 4);
        let names: Vec<&str> = panel.ref_curves.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["SD-3", "SD-2", "SD-1", "SD0"]);
        let fills: Vec<Color> = panel.bands.iter().map(|b| b.fill).collect();
        assert_eq!(fills, vec![Color::Yellow, Color::Green, Color::Green]);
        assert_eq!(panel.ref_curves[0].points.len(), 5);
        assert_eq!(panel.series[0].points, vec![(45.5, 2.2)]);
        assert!(chart.dropped.is_empty());
    }

    #[test]
    fn growth_chart_without_observations() {
        let chart = growth_chart_spec::<f64>(&girls(), &[], &ZonePalette::who()).unwrap();
        assert!(chart.spec.panels[0].series[0].points.is_empty());
        assert_eq!(chart.spec.panels[0].bands[0].fill, Color::Red);
    }

    #[test]
    fn growth_chart_drops_out_of_range() {
        let chart = growth_chart_spec(
            &girls(),
            &[(44.0, 2.0), (46.0, 2.3), (46.0, -1.0)],
            &ZonePalette::passport(),
        )
        .unwrap();
        assert_eq!(chart.dropped.len(), 2);
        assert_eq!(chart.dropped[0].index, 0);
        assert_eq!(chart.spec.panels[0].series[0].points.len(), 1);
    }

    fn partograph_input() -> PartographInput {
        PartographInput {
            hours: Domain::new(0.0, 12.0),
            heart_rate: Series::new("Foetal heart rate", vec![(0.0, 140.0), (1.0, 150.0)]),
            cervix: Series::new("Cervix", vec![(0.0, 4.0), (4.0, 7.0)]),
            descent: Series::new("Descent", vec![(0.0, 5.0), (4.0, 3.0)]),
            contractions: Series::new("Contractions", vec![(0.0, 2.0), (4.0, 3.0)]),
            alert: RefLine::new("alert", (0.0, 4.0), (6.0, 10.0), Severity::Alert),
            action: RefLine::new("action", (4.0, 4.0), (10.0, 10.0), Severity::Action),
        }
    }

    #[test]
    fn partograph_has_four_panels() {
        let spec = partograph_spec(&partograph_input()).unwrap();
        assert_eq!(spec.panels.len(), 4);
        assert_eq!(spec.panels[1].ref_lines.len(), 2);
        assert!(spec
            .panels
            .iter()
            .enumerate()
            .all(|(i, p)| i == 1 || p.ref_lines.is_empty()));
        assert_eq!(spec.x_axis.ticks.len(), 13);
    }

    #[test]
    fn partograph_empty_contractions() {
        let mut input = partograph_input();
        input.contractions.points.clear();
        let spec = partograph_spec(&input).unwrap();
        assert!(spec.panels[3].series[0].points.is_empty());
    }

    #[test]
    fn partograph_errors() {
        let mut input = partograph_input();
        input.alert.end = input.alert.start;
        assert_eq!(partograph_spec(&input), Err(ChartError::DegenerateLine("alert".into())));
        let mut input = partograph_input();
        input.descent.points.push((13.0, 2.0));
        assert!(matches!(
            partograph_spec(&input),
            Err(ChartError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn dual_axis_variants() {
        let cd4 = Series::new("CD4", vec![(0.0, 350.0), (12.0, 500.0)]);
        let vl = Series::new("Viral load", vec![(0.0, 100_000.0), (12.0, 50.0)]);
        let spec = dual_axis_spec(
            &cd4,
            &vl,
            &YAxisSpec::linear("CD4 (cells/uL)", 0.0, 1000.0),
            &YAxisSpec::log10("Viral load (copies/mL)", 10.0, 1e6),
        )
        .unwrap();
        assert_eq!(spec.panels.len(), 1);
        assert_eq!(spec.panels[0].series[1].axis, AxisSide::Right);

        let zero = Series::new("Viral load", vec![(0.0, 0.0)]);
        let err = dual_axis_spec(
            &cd4,
            &zero,
            &YAxisSpec::linear("CD4", 0.0, 1000.0),
            &YAxisSpec::log10("VL", 10.0, 1e6),
        )
        .unwrap_err();
        assert!(matches!(err, ChartError::NonPositiveOnLogAxis { .. }));

        let same = YAxisSpec::linear("v", 0.0, 1000.0);
        assert!(dual_axis_spec(&cd4, &cd4, &same, &same).is_ok());
    }
}
