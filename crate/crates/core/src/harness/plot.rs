use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::commands::{read_estimate_csv, read_prediction_csv, PREDICTION_COLUMNS};
use super::config::{RunConfig, SCHEMA};
use crate::estimators::EstimateKind;
use crate::fsutil::write_atomic;
use crate::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const BLACK: &str = "#000000";
const GREY: &str = "#888888";
const DASH: &str = "6 4";

/// A curve to draw: points `(θ, value)` in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Measure curves are dashed, set curves solid.
    pub measure: bool,
    /// Lower curves are grey, Assouad curves black.
    pub lower: bool,
    /// Estimates are drawn as markers, predictions as lines.
    pub markers: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlotSummary {
    pub schema: u32,
    pub curves: usize,
    pub markers: usize,
    pub svg: PathBuf,
}

/// Rounds to 1e-6 and prints without trailing zeros, so path data diff cleanly.
pub fn fmt_coord(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    let s = format!("{r:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Prediction curves from a prediction CSV.
pub fn prediction_series(path: &Path) -> Result<Vec<Series>> {
    let rows = read_prediction_csv(path)?;
    Ok(PREDICTION_COLUMNS
        .iter()
        .enumerate()
        .map(|(k, name)| Series {
            name: name.to_string(),
            points: rows.iter().map(|(t, v)| (*t, v[k])).collect(),
            measure: k >= 2,
            lower: k % 2 == 1,
            markers: false,
        })
        .filter(|s| !s.points.is_empty())
        .collect())
}

/// Estimate markers from an estimate CSV; infeasible rows are skipped.
pub fn estimate_series(path: &Path) -> Result<Vec<Series>> {
    let rows = read_estimate_csv(path)?;
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        let Some(v) = r.value else { continue };
        match out.iter_mut().find(|s| s.name == r.kind.name()) {
            Some(s) => s.points.push((r.theta, v)),
            None => out.push(Series {
                name: r.kind.name().to_string(),
                points: vec![(r.theta, v)],
                measure: matches!(
                    r.kind,
                    EstimateKind::MeasureAssouadSpectrum | EstimateKind::MeasureLowerSpectrum
                ),
                lower: r.kind.is_lower(),
                markers: true,
            }),
        }
    }
    Ok(out)
}

/// Vertical axis range: the data range widened to multiples of 0.2.
fn y_range(series: &[Series]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(_, v) in &s.points {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let lo = (lo / 0.2 + 1e-9).floor() * 0.2;
    let mut hi = (hi / 0.2 - 1e-9).ceil() * 0.2;
    if hi - lo < 0.2 {
        hi = lo + 0.2;
    }
    (lo, hi)
}

/// Renders spectra against θ on `[0, 1]`.
pub fn render_svg(series: &[Series]) -> Result<String> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::InvalidConfig("nothing to plot".into()));
    }
    let (y0, y1) = y_range(series);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |t: f64| LEFT + t * pw;
    let py = |v: f64| TOP + (y1 - v) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{} {} L{} {} L{} {}" fill="none" stroke="{BLACK}" stroke-width="1"/>"#,
        fmt_coord(px(0.0)),
        fmt_coord(py(y1)),
        fmt_coord(px(0.0)),
        fmt_coord(py(y0)),
        fmt_coord(px(1.0)),
        fmt_coord(py(y0))
    );
    for i in 0..=10 {
        let t = f64::from(i) / 10.0;
        let (x, y) = (px(t), py(y0));
        let _ = writeln!(
            s,
            r#"<path class="tick" d="M{} {} L{} {}" stroke="{BLACK}"/><text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt_coord(x),
            fmt_coord(y),
            fmt_coord(x),
            fmt_coord(y + 5.0),
            fmt_coord(x),
            fmt_coord(y + 18.0),
            fmt_coord(t)
        );
    }
    let steps = ((y1 - y0) / 0.2).round() as i32;
    for i in 0..=steps {
        let v = y0 + 0.2 * f64::from(i);
        let (x, y) = (px(0.0), py(v));
        let _ = writeln!(
            s,
            r#"<path class="tick" d="M{} {} L{} {}" stroke="{BLACK}"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            fmt_coord(x - 5.0),
            fmt_coord(y),
            fmt_coord(x),
            fmt_coord(y),
            fmt_coord(x - 8.0),
            fmt_coord(y + 4.0),
            fmt_coord(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">θ</text>"#,
        fmt_coord(px(0.5)),
        fmt_coord(HEIGHT - 10.0)
    );

    for (k, ser) in series.iter().enumerate() {
        let colour = if ser.lower { GREY } else { BLACK };
        if ser.markers {
            let fill = if ser.measure { "none" } else { colour };
            for &(t, v) in &ser.points {
                let _ = writeln!(
                    s,
                    r#"<circle class="estimate {}" cx="{}" cy="{}" r="3" fill="{fill}" stroke="{colour}"/>"#,
                    ser.name,
                    fmt_coord(px(t)),
                    fmt_coord(py(v))
                );
            }
        } else {
            let mut d = String::new();
            for (i, &(t, v)) in ser.points.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{} {}",
                    if i == 0 { "M" } else { " L" },
                    fmt_coord(px(t)),
                    fmt_coord(py(v))
                );
            }
            let dash = if ser.measure {
                format!(r#" stroke-dasharray="{DASH}""#)
            } else {
                String::new()
            };
            let _ = writeln!(
                s,
                r#"<path class="curve {}" d="{d}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
                ser.name
            );
        }
        let ly = TOP + 14.0 * (k as f64 + 1.0);
        let _ = writeln!(
            s,
            r#"<text class="legend" x="{}" y="{}" fill="{colour}">{}</text>"#,
            fmt_coord(WIDTH - RIGHT - 170.0),
            fmt_coord(ly),
            ser.name
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Plots a prediction CSV and/or estimate CSVs into `spectra.svg`.
pub fn cmd_plot(
    cfg: &RunConfig,
    prediction: Option<&Path>,
    estimates: &[PathBuf],
) -> Result<PlotSummary> {
    if prediction.is_none() && estimates.is_empty() {
        return Err(Error::InvalidConfig(
            "plot needs a prediction or an estimate file".into(),
        ));
    }
    let mut series = Vec::new();
    if let Some(p) = prediction {
        series.extend(prediction_series(p)?);
    }
    for e in estimates {
        series.extend(estimate_series(e)?);
    }
    let svg = render_svg(&series)?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.plot_svg();
    write_atomic(&path, svg.as_bytes())?;
    Ok(PlotSummary {
        schema: SCHEMA,
        curves: series.iter().filter(|s| !s.markers).count(),
        markers: series
            .iter()
            .filter(|s| s.markers)
            .map(|s| s.points.len())
            .sum(),
        svg: path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_to_micro_units() {
        assert_eq!(fmt_coord(1.0), "1");
        assert_eq!(fmt_coord(0.1234567), "0.123457");
        assert_eq!(fmt_coord(-0.0000001), "0");
        assert_eq!(fmt_coord(2.5), "2.5");
    }

    fn line(name: &str, measure: bool, lower: bool, pts: Vec<(f64, f64)>) -> Series {
        Series {
            name: name.into(),
            points: pts,
            measure,
            lower,
            markers: false,
        }
    }

    #[test]
    fn styles_follow_target_and_mode() {
        let svg = render_svg(&[
            line("set_assouad", false, false, vec![(0.1, 1.0), (0.9, 1.2)]),
            line("measure_lower", true, true, vec![(0.1, 0.8), (0.9, 0.9)]),
        ])
        .unwrap();
        let set = svg
            .lines()
            .find(|l| l.contains("curve set_assouad"))
            .unwrap();
        assert!(set.contains(BLACK) && !set.contains("dasharray"));
        let measure = svg
            .lines()
            .find(|l| l.contains("curve measure_lower"))
            .unwrap();
        assert!(measure.contains(GREY) && measure.contains("dasharray"));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(render_svg(&[]).is_err());
        assert!(render_svg(&[line("x", false, false, vec![])]).is_err());
    }

    #[test]
    fn path_data_maps_linearly() {
        // y range [0.8, 1.2]: value 1.0 lands halfway down the plot area.
        let svg = render_svg(&[line(
            "a",
            false,
            false,
            vec![(0.0, 0.8), (0.5, 1.0), (1.0, 1.2)],
        )])
        .unwrap();
        let ph = HEIGHT - TOP - BOTTOM;
        let expected = format!(
            "M{} {} L{} {} L{} {}",
            fmt_coord(LEFT),
            fmt_coord(TOP + ph),
            fmt_coord(LEFT + 0.5 * (WIDTH - LEFT - RIGHT)),
            fmt_coord(TOP + 0.5 * ph),
            fmt_coord(WIDTH - RIGHT),
            fmt_coord(TOP)
        );
        assert!(svg.contains(&expected), "{svg}");
    }
}
