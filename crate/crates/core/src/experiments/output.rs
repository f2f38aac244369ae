//! CSV and SVG emission.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use plotters::prelude::*;

use super::sweep::{Row, SweepSpec};
use super::CliError;

pub const CSV_HEADER: &str = "swept_value,strategy,analytic_value,mc_value,mc_halfwidth,seed";

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// trimmed, scientific notation outside `1e-5 <= |x| < 1e9`. Independent of
/// locale.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_string(rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (mc, hw) = match r.mc {
            Some(e) => (format_sig9(e.mean), format_sig9(e.half_width)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_sig9(r.swept_value),
            r.strategy,
            format_sig9(r.analytic_value),
            mc,
            hw,
            r.seed
        ));
    }
    out
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    fs::write(path, csv_string(rows)).map_err(|e| CliError::io(path, e))
}

/// Line plot of the analytic values per strategy, with simulated values as
/// markers.
pub fn render_svg(path: &Path, spec: &SweepSpec, rows: &[Row]) -> Result<(), CliError> {
    let mut curves: BTreeMap<&str, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        curves.entry(r.strategy.as_str()).or_default().push(r);
    }
    let (x_min, x_max) = bounds(rows.iter().map(|r| r.swept_value));
    let (y_min, y_max) = bounds(
        rows.iter()
            .flat_map(|r| std::iter::once(r.analytic_value).chain(r.mc.map(|e| e.mean))),
    );
    let pad = ((y_max - y_min) * 0.05).max(1e-9);

    let plot = || -> Result<(), Box<dyn std::error::Error>> {
        let root = SVGBackend::new(path, (900, 600)).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(format!("{} ({} vs {})", spec.preset, spec.metric, spec.swept), ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x_min..x_max, (y_min - pad)..(y_max + pad))?;
        chart
            .configure_mesh()
            .x_desc(spec.swept.to_string())
            .y_desc(spec.metric.to_string())
            .draw()?;
        for (i, (label, pts)) in curves.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(
                    pts.iter().map(|r| (r.swept_value, r.analytic_value)),
                    color.stroke_width(2),
                ))?
                .label(*label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
            chart.draw_series(pts.iter().filter_map(|r| {
                r.mc.map(|e| Circle::new((r.swept_value, e.mean), 3, color.filled()))
            }))?;
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()?;
        root.present()?;
        Ok(())
    };
    plot().map_err(|e| CliError::Plot(e.to_string()))
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::Estimate;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(27.0), "27");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(0.516_286_235_642_908_9), "0.516286236");
        assert_eq!(format_sig9(99.881_412_739_237_6), "99.8814127");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(-2.5), "-2.5");
        assert_eq!(format_sig9(1.234e-7), "1.234e-07");
        assert_eq!(format_sig9(0.0001), "0.0001");
        assert_eq!(format_sig9(123_456_789.0), "123456789");
        assert_eq!(format_sig9(1_234_567_890.0), "1.23456789e+09");
        assert_eq!(format_sig9(9.999_999_999_9), "10");
        assert_eq!(format_sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            Row {
                swept_value: 1.0,
                strategy: "lec/heads=100".into(),
                analytic_value: 0.5222607863,
                mc: Some(Estimate { mean: 0.52, half_width: 0.003, degenerate: false }),
                seed: 42,
            },
            Row { swept_value: 1.1, strategy: "lhp".into(), analytic_value: 25.0, mc: None, seed: 42 },
        ];
        assert_eq!(
            csv_string(&rows),
            "swept_value,strategy,analytic_value,mc_value,mc_halfwidth,seed\n\
             1,lec/heads=100,0.522260786,0.52,0.003,42\n\
             1.1,lhp,25,,,42\n"
        );
    }
}
