use serde::{Deserialize, Serialize};

use super::report::{EstimateKind, EstimateReport, Method, ScaleRow, Witness};
use crate::formulas::Mode;
use crate::generators::{MeasureOracle, OracleKind};
use crate::{Error, Result};

/// Log-spaced depths `T` (radii `r = e^{−T}`) at which mass ratios are taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl DepthGrid {
    pub fn new(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) || points < 2 {
            return Err(Error::InvalidParams(format!(
                "bad depth grid [{t_min}, {t_max}] × {points}"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            points,
        })
    }

    /// A grid reaching deep enough for the asymptotic regime of `oracle`
    /// while staying inside every tag's validity range.
    pub fn for_oracle(oracle: &MeasureOracle) -> Self {
        let t_max = match oracle.kind() {
            OracleKind::SyntheticKleinian => 1e5,
            OracleKind::PowerLaw => 1e3,
            OracleKind::SyntheticJulia => (0..oracle.tags().len())
                .map(|t| oracle.max_depth(t))
                .fold(f64::INFINITY, f64::min)
                .min(1e5),
        };
        Self {
            t_min: 1.0,
            t_max,
            points: 2000,
        }
    }

    pub fn depths(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

/// `(log m(θT) − log m(T)) / ((1−θ)T)` for one tag and depth.
fn ratio(oracle: &MeasureOracle, tag: usize, theta: f64, t: f64) -> Result<(f64, f64)> {
    let big = oracle.log_mass_at_depth(tag, theta * t)?;
    let small = oracle.log_mass_at_depth(tag, t)?;
    let log_ratio = (1.0 - theta) * t;
    Ok((big - small, log_ratio))
}

/// Supremum (Assouad mode) or infimum (lower mode) over tags and grid
/// depths of the mass-ratio exponent `log(m(r^θ)/m(r)) / log(r^{θ−1})`.
/// Depths beyond a tag's validity range are skipped for that tag.
pub fn measure_spectrum_estimate(
    oracle: &MeasureOracle,
    theta: f64,
    tags: Option<&[usize]>,
    grid: &DepthGrid,
    mode: Mode,
) -> Result<EstimateReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "θ must lie in (0, 1), got {theta}"
        )));
    }
    let all: Vec<usize> = (0..oracle.tags().len()).collect();
    let tags = tags.unwrap_or(&all);
    if let Some(t) = tags.iter().find(|&&t| t >= all.len()) {
        return Err(Error::InvalidParams(format!("unknown tag {t}")));
    }
    let lower = mode == Mode::Lower;
    let mut rows = Vec::new();
    for t in grid.depths() {
        let mut best: Option<(f64, f64, usize)> = None;
        for &tag in tags.iter().filter(|&&tag| t <= oracle.max_depth(tag)) {
            let (num, den) = ratio(oracle, tag, theta, t)?;
            let better = match best {
                None => true,
                Some((b, d, _)) => {
                    if lower {
                        num / den < b / d
                    } else {
                        num / den > b / d
                    }
                }
            };
            if better {
                best = Some((num, den, tag));
            }
        }
        if let Some((num, den, tag)) = best {
            rows.push(ScaleRow {
                r: (-t).exp(),
                big_r: (-theta * t).exp(),
                log_ratio: den,
                log_count: num,
                center: None,
                tag: Some(tag),
                shift: 0,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Window(
            "no grid depth lies inside the oracle's validity range".into(),
        ));
    }
    let (raw, w) = extremum(&rows, lower);
    let wr = &rows[w];
    let tag = wr.tag.expect("measure rows carry tags");
    let depth = wr.log_ratio / (1.0 - theta);
    Ok(EstimateReport {
        kind: if lower {
            EstimateKind::MeasureLowerSpectrum
        } else {
            EstimateKind::MeasureAssouadSpectrum
        },
        theta: Some(theta),
        method: Method::Raw,
        value: raw.max(0.0),
        raw_value: raw,
        half_width: 0.0,
        witness: Witness {
            center: None,
            coords: Vec::new(),
            tag: Some(oracle.tags()[tag].name.clone()),
            r: (-depth).exp(),
            big_r: (-theta * depth).exp(),
            count: wr.log_count.exp(),
            slope: wr.slope(),
            shift: 0,
        },
        rows,
    })
}

fn extremum(rows: &[ScaleRow], lower: bool) -> (f64, usize) {
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        let better = if lower {
            r.slope() < rows[best].slope()
        } else {
            r.slope() > rows[best].slope()
        };
        if better {
            best = i;
        }
    }
    (rows[best].slope(), best)
}

pub fn measure_spectrum_estimates(
    oracle: &MeasureOracle,
    thetas: &[f64],
    grid: &DepthGrid,
    mode: Mode,
) -> Result<Vec<EstimateReport>> {
    thetas
        .iter()
        .map(|&t| measure_spectrum_estimate(oracle, t, None, grid, mode))
        .collect()
}

/// Re-evaluates the witnessing tag and depth against the oracle.
pub fn reproduce_measure_witness(oracle: &MeasureOracle, report: &EstimateReport) -> Result<f64> {
    let theta = report
        .theta
        .ok_or_else(|| Error::InvalidParams("measure reports carry θ".into()))?;
    let name = report
        .witness
        .tag
        .as_deref()
        .ok_or_else(|| Error::InvalidParams("witness has no tag".into()))?;
    let tag = oracle
        .tags()
        .iter()
        .position(|t| t.name == name)
        .ok_or_else(|| Error::InvalidParams(format!("oracle has no tag {name}")))?;
    let depth = -report.witness.r.ln();
    let (num, den) = ratio(oracle, tag, theta, depth)?;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{
        default_theta_grid, julia_measure_spectrum, kleinian_measure_spectrum, JuliaParams,
        KleinianParams,
    };
    use crate::generators::{julia_preset_tags, kleinian_preset_tags, HoroballItinerary};

    #[test]
    fn power_law_is_exact() {
        let o = MeasureOracle::power_law(0.8).unwrap();
        let g = DepthGrid::for_oracle(&o);
        for mode in [Mode::Assouad, Mode::Lower] {
            let r = measure_spectrum_estimate(&o, 0.3, None, &g, mode).unwrap();
            assert!((r.value - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn kleinian_first_branch_example() {
        let p = KleinianParams::new(0.6, 1, 1).unwrap();
        let tags = vec![
            (
                "parabolic".to_string(),
                HoroballItinerary::parabolic_center(0.0, 1).unwrap(),
            ),
            (
                "tent".to_string(),
                HoroballItinerary::tent(0.0, 100.0, 1).unwrap(),
            ),
        ];
        let o = MeasureOracle::synthetic_kleinian(p, tags).unwrap();
        let r =
            measure_spectrum_estimate(&o, 0.25, None, &DepthGrid::for_oracle(&o), Mode::Assouad)
                .unwrap();
        assert!((r.value - (0.6 + 0.4 / 3.0)).abs() < 0.02, "{}", r.value);
        assert!((reproduce_measure_witness(&o, &r).unwrap() - r.raw_value).abs() < 1e-9);
    }

    #[test]
    fn julia_lower_example() {
        let p = JuliaParams::new(1.4, 1, 4).unwrap();
        let o = MeasureOracle::synthetic_julia(p, julia_preset_tags(&p)).unwrap();
        let r = measure_spectrum_estimate(&o, 0.1, None, &DepthGrid::for_oracle(&o), Mode::Lower)
            .unwrap();
        assert!(
            (r.value - (1.4 - 0.4 * 0.4 / 0.9)).abs() < 0.02,
            "{}",
            r.value
        );
    }

    #[test]
    fn presets_recover_closed_forms() {
        let kle = [
            (0.6, 1, 1),
            (1.7, 1, 2),
            (1.2, 1, 2),
            (2.6, 1, 3),
            (1.9, 2, 2),
        ];
        for (d, a, b) in kle {
            let p = KleinianParams::new(d, a, b).unwrap();
            let o = MeasureOracle::synthetic_kleinian(p, kleinian_preset_tags(&p)).unwrap();
            let g = DepthGrid::for_oracle(&o);
            for mode in [Mode::Assouad, Mode::Lower] {
                let prof = kleinian_measure_spectrum(&p, mode);
                for t in default_theta_grid() {
                    let v = measure_spectrum_estimate(&o, t, None, &g, mode)
                        .unwrap()
                        .value;
                    let e = prof.value(t).unwrap();
                    assert!(
                        (v - e).abs() < 0.05,
                        "δ={d} k=[{a},{b}] {mode:?} θ={t}: {v} vs {e}"
                    );
                }
            }
        }
        for (h, pm) in [(1.4, 4), (0.7, 2), (0.9, 1), (1.2, 1)] {
            let p = JuliaParams::new(h, 1, pm).unwrap();
            let o = MeasureOracle::synthetic_julia(p, julia_preset_tags(&p)).unwrap();
            let g = DepthGrid::for_oracle(&o);
            for mode in [Mode::Assouad, Mode::Lower] {
                let prof = julia_measure_spectrum(&p, mode);
                for t in default_theta_grid() {
                    let v = measure_spectrum_estimate(&o, t, None, &g, mode)
                        .unwrap()
                        .value;
                    let e = prof.value(t).unwrap();
                    assert!(
                        (v - e).abs() < 0.05,
                        "h={h} p={pm} {mode:?} θ={t}: {v} vs {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn lower_never_exceeds_assouad() {
        let p = KleinianParams::new(1.3, 1, 2).unwrap();
        let o = MeasureOracle::synthetic_kleinian(p, kleinian_preset_tags(&p)).unwrap();
        let g = DepthGrid::new(1.0, 1e4, 300).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let a = measure_spectrum_estimate(&o, t, None, &g, Mode::Assouad)
                .unwrap()
                .value;
            let l = measure_spectrum_estimate(&o, t, None, &g, Mode::Lower)
                .unwrap()
                .value;
            assert!(l <= a);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let o = MeasureOracle::power_law(0.8).unwrap();
        let g = DepthGrid::for_oracle(&o);
        assert!(measure_spectrum_estimate(&o, 1.0, None, &g, Mode::Assouad).is_err());
        assert!(measure_spectrum_estimate(&o, 0.5, Some(&[3]), &g, Mode::Assouad).is_err());
        assert!(DepthGrid::new(2.0, 1.0, 10).is_err());
    }
}
