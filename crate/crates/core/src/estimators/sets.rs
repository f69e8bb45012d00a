use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{
    GridIndex, ScaleWindow, DEFAULT_OUTER_LEVEL, DEFAULT_SAFETY, DEFAULT_TOP_LEVEL, MIN_LEVELS,
};
use super::report::{summarize, EstimateKind, EstimateReport, Method, ScaleRow, Witness};
use crate::{Error, Result};

/// Which cloud points serve as ball centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy")]
pub enum CenterPolicy {
    /// Every point up to `threshold` points; beyond that `count` uniform
    /// samples plus all special points.
    Auto {
        threshold: usize,
        count: usize,
    },
    All,
    /// `count` uniform samples plus all special points.
    Sample {
        count: usize,
    },
}

impl Default for CenterPolicy {
    fn default() -> Self {
        CenterPolicy::Auto {
            threshold: 100_000,
            count: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorOptions {
    /// `r_min >= safety · ε_min`.
    pub safety: f64,
    /// Defaults to `[safety · ε_min, root cell side]`.
    pub window: Option<ScaleWindow>,
    pub centers: CenterPolicy,
    pub method: Method,
    pub seed: u64,
    /// Scale pairs need `R/r >= 2^min_ratio_levels`.
    pub min_ratio_levels: u32,
    /// Coarsest dyadic level admitted for the covering scale `r`.
    pub top_level: u32,
    /// Coarsest dyadic level admitted for the outer scale `R`.
    pub outer_level: u32,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            safety: DEFAULT_SAFETY,
            window: None,
            centers: CenterPolicy::default(),
            method: Method::Regression,
            seed: 0,
            min_ratio_levels: MIN_RATIO_LEVELS,
            top_level: DEFAULT_TOP_LEVEL,
            outer_level: DEFAULT_OUTER_LEVEL,
        }
    }
}

impl EstimatorOptions {
    pub fn window_for(&self, index: &GridIndex) -> Result<ScaleWindow> {
        match self.window {
            Some(w) => Ok(w),
            None => ScaleWindow::for_index(index, self.safety),
        }
    }

    fn levels(&self, index: &GridIndex) -> Result<Vec<u32>> {
        self.window_for(index)?.levels(index, self.safety)
    }
}

/// Indices of the centres used under `policy`, sorted.
pub fn select_centers(index: &GridIndex, policy: CenterPolicy, seed: u64) -> Vec<usize> {
    let n = index.len();
    let sampled = |count: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<usize> = sample(&mut rng, n, count.min(n)).into_vec();
        v.extend_from_slice(index.special());
        v.sort_unstable();
        v.dedup();
        v
    };
    match policy {
        CenterPolicy::All => (0..n).collect(),
        CenterPolicy::Auto { threshold, .. } if n <= threshold => (0..n).collect(),
        CenterPolicy::Auto { count, .. } | CenterPolicy::Sample { count } => sampled(count),
    }
}

/// Extremal count of occupied level-`level` cells inside a box of side
/// `side(parent)` holding each centre, over the dyadic grid and its
/// half-cell shifts; ties go to the smallest index, then the smallest shift.
/// Lower mode skips boxes that leave the bounding box. `None` if no box is
/// admissible.
fn extremal(
    index: &GridIndex,
    centers: &[usize],
    parent: u32,
    level: u32,
    lower: bool,
) -> Option<(u64, usize, u32)> {
    let better = |a: (u64, usize, u32), b: (u64, usize, u32)| {
        let ord = if lower { a.0.cmp(&b.0) } else { b.0.cmp(&a.0) };
        match ord.then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)) {
            std::cmp::Ordering::Greater => b,
            _ => a,
        }
    };
    let shifts = 1u32 << index.dim();
    centers
        .par_iter()
        .flat_map_iter(|&i| (0..shifts).map(move |s| (i, s)))
        .filter_map(|(i, s)| {
            if lower && !index.shifted_box_inside_bbox(i, parent, s) {
                return None;
            }
            Some((index.shifted_cell_count(i, parent, level, s), i, s))
        })
        .reduce_with(better)
}

fn row(index: &GridIndex, m: u32, j: u32, count: u64, center: Option<(usize, u32)>) -> ScaleRow {
    ScaleRow {
        r: index.side(j),
        big_r: index.side(m),
        log_ratio: f64::from(j - m) * std::f64::consts::LN_2,
        log_count: (count as f64).ln(),
        center: center.map(|c| c.0),
        tag: None,
        shift: center.map_or(0, |c| c.1),
    }
}

fn finish(
    index: &GridIndex,
    kind: EstimateKind,
    theta: Option<f64>,
    method: Method,
    rows: Vec<ScaleRow>,
) -> Result<EstimateReport> {
    let (raw, half_width, w) = summarize(&rows, method, kind.is_lower())?;
    let wr = &rows[w];
    let witness = Witness {
        center: wr.center,
        coords: wr
            .center
            .map(|c| index.point(c).to_vec())
            .unwrap_or_default(),
        tag: None,
        r: wr.r,
        big_r: wr.big_r,
        count: wr.log_count.exp().round(),
        slope: wr.slope(),
        shift: wr.shift,
    };
    Ok(EstimateReport {
        kind,
        theta,
        method,
        value: raw.clamp(0.0, index.dim() as f64),
        raw_value: raw,
        half_width,
        witness,
        rows,
    })
}

/// Slope of `log N_r(F)` against `−log r` over the dyadic levels of the window.
pub fn box_dimension_estimate(
    index: &GridIndex,
    opts: &EstimatorOptions,
) -> Result<EstimateReport> {
    let levels = opts.levels(index)?;
    let fine: Vec<u32> = levels
        .iter()
        .copied()
        .filter(|&j| j >= opts.top_level)
        .collect();
    if fine.len() < MIN_LEVELS {
        return Err(Error::Window(format!(
            "{} dyadic levels at or below level {}; at least {MIN_LEVELS} required",
            fine.len(),
            opts.top_level
        )));
    }
    let top = fine[0];
    let rows: Vec<ScaleRow> = fine[1..]
        .iter()
        .map(|&j| row(index, top, j, index.occupied_at(j) as u64, None))
        .collect();
    // Box counting is a plain regression regardless of the extremal method.
    finish(
        index,
        EstimateKind::BoxDimension,
        None,
        Method::Regression,
        rows,
    )
}

/// Scale pairs `(m, j)` with `R = side(m)` the dyadic rounding of `r^θ`
/// (in units of the root cell) and `r = side(j)`.
fn coupled_pairs(levels: &[u32], theta: f64, opts: &EstimatorOptions) -> Result<Vec<(u32, u32)>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "θ must lie in (0, 1), got {theta}"
        )));
    }
    let (lo, hi) = (levels[0], *levels.last().expect("non-empty"));
    let pairs: Vec<(u32, u32)> = levels
        .iter()
        .map(|&j| ((theta * f64::from(j)).round() as u32, j))
        .filter(|&(m, j)| {
            m >= lo.max(opts.outer_level)
                && m <= hi
                && j >= opts.top_level
                && j >= m + opts.min_ratio_levels.max(1)
        })
        .collect();
    if pairs.len() < MIN_LEVELS {
        return Err(Error::Window(format!(
            "window too narrow for θ = {theta}: {} coupled scale pairs, at least {MIN_LEVELS} needed",
            pairs.len()
        )));
    }
    Ok(pairs)
}

fn spectrum(
    index: &GridIndex,
    theta: f64,
    opts: &EstimatorOptions,
    lower: bool,
) -> Result<EstimateReport> {
    let levels = opts.levels(index)?;
    let pairs = coupled_pairs(&levels, theta, opts)?;
    let centers = select_centers(index, opts.centers, opts.seed);
    let rows: Vec<ScaleRow> = pairs
        .iter()
        .filter_map(|&(m, j)| {
            extremal(index, &centers, m, j, lower)
                .map(|(c, i, s)| row(index, m, j, c, Some((i, s))))
        })
        .collect();
    let mut gaps: Vec<u32> = pairs.iter().map(|&(m, j)| j - m).collect();
    gaps.dedup();
    if gaps.len() < MIN_GAPS {
        return Err(Error::Window(format!(
            "window too narrow for θ = {theta}: coupled pairs span {} scale ratios, at least {MIN_GAPS} needed",
            gaps.len()
        )));
    }
    let kind = if lower {
        EstimateKind::LowerSpectrum
    } else {
        EstimateKind::AssouadSpectrum
    };
    finish(index, kind, Some(theta), opts.method, rows)
}

/// Extremal growth of `N_r(B(x, r^θ) ∩ F)` over centres and scales.
pub fn assouad_spectrum_estimate(
    index: &GridIndex,
    theta: f64,
    opts: &EstimatorOptions,
) -> Result<EstimateReport> {
    spectrum(index, theta, opts, false)
}

/// Dual of [`assouad_spectrum_estimate`] with minima over centres whose
/// `r^θ`-ball lies inside the bounding box.
pub fn lower_spectrum_estimate(
    index: &GridIndex,
    theta: f64,
    opts: &EstimatorOptions,
) -> Result<EstimateReport> {
    spectrum(index, theta, opts, true)
}

/// Default minimal ratio `R/r = 2^k` for scale pairs; below it counts are
/// dominated by the `2^{dk}` subcells of a single box.
pub const MIN_RATIO_LEVELS: u32 = 4;
/// Minimal number of distinct level gaps for the dimension regressions.
const MIN_GAPS: usize = 3;

fn dimension(index: &GridIndex, opts: &EstimatorOptions, lower: bool) -> Result<EstimateReport> {
    let levels = opts.levels(index)?;
    let centers = select_centers(index, opts.centers, opts.seed);
    // For each level gap k, the extremum over all pairs (m, m + k) and centres.
    // Gaps are capped at half the window so every gap slides over at least
    // half of it; larger gaps only see the coarsest scales.
    let span = levels.len() as u32 - 1;
    let mut best: BTreeMap<u32, (u64, (usize, u32), u32)> = BTreeMap::new();
    let min_gap = opts.min_ratio_levels.max(1);
    for &m in levels.iter().filter(|&&m| m >= opts.outer_level) {
        for &j in levels
            .iter()
            .filter(|&&j| j >= opts.top_level && j >= m + min_gap && j - m <= span / 2)
        {
            let Some((c, i, s)) = extremal(index, &centers, m, j, lower) else {
                continue;
            };
            let k = j - m;
            let e = best.entry(k).or_insert((c, (i, s), m));
            if (lower && c < e.0) || (!lower && c > e.0) {
                *e = (c, (i, s), m);
            }
        }
    }
    let rows: Vec<ScaleRow> = best
        .iter()
        .map(|(&k, &(c, i, m))| row(index, m, m + k, c, Some(i)))
        .collect();
    if rows.len() < MIN_GAPS {
        return Err(Error::Window(format!(
            "window admits {} scale ratios >= 2^{min_gap}; at least {MIN_GAPS} needed",
            rows.len()
        )));
    }
    let kind = if lower {
        EstimateKind::LowerDimension
    } else {
        EstimateKind::AssouadDimension
    };
    finish(index, kind, None, opts.method, rows)
}

/// Extremal two-scale growth over all dyadic pairs with `R/r >= 2^min_ratio_levels`.
pub fn assouad_dimension_estimate(
    index: &GridIndex,
    opts: &EstimatorOptions,
) -> Result<EstimateReport> {
    dimension(index, opts, false)
}

pub fn lower_dimension_estimate(
    index: &GridIndex,
    opts: &EstimatorOptions,
) -> Result<EstimateReport> {
    dimension(index, opts, true)
}

/// Spectrum estimates over a θ grid.
pub fn spectrum_estimates(
    index: &GridIndex,
    thetas: &[f64],
    opts: &EstimatorOptions,
    lower: bool,
) -> Result<Vec<EstimateReport>> {
    thetas
        .iter()
        .map(|&t| spectrum(index, t, opts, lower))
        .collect()
}

/// Recounts every row at its recorded centre and refits; the result equals
/// the reported raw value when the witness is genuine.
pub fn reproduce_from_witness(index: &GridIndex, report: &EstimateReport) -> Result<f64> {
    let mut rows = report.rows.clone();
    for r in &mut rows {
        let j = index.level_for(r.r)?;
        let count = match r.center {
            Some(c) => index.shifted_cell_count(c, index.level_for(r.big_r)?, j, r.shift),
            None => index.occupied_at(j) as u64,
        };
        r.log_count = (count as f64).ln();
    }
    Ok(summarize(&rows, report.method, report.kind.is_lower())?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{decreasing_sequence, PointCloud};

    fn segment(n: usize) -> PointCloud {
        let pts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        PointCloud::new(1, pts, 1.0 / (n - 1) as f64, "segment").unwrap()
    }

    fn opts() -> EstimatorOptions {
        EstimatorOptions::default()
    }

    #[test]
    fn segment_estimates() {
        let idx = GridIndex::new(&segment(100_000)).unwrap();
        let b = box_dimension_estimate(&idx, &opts()).unwrap();
        assert!((b.value - 1.0).abs() < 0.05, "{}", b.value);
        for t in [0.2, 0.35, 0.5] {
            let a = assouad_spectrum_estimate(&idx, t, &opts()).unwrap();
            let l = lower_spectrum_estimate(&idx, t, &opts()).unwrap();
            assert!((a.value - 1.0).abs() < 0.05, "θ={t} {}", a.value);
            assert!((l.value - 1.0).abs() < 0.05, "θ={t} {}", l.value);
        }
        // R/r >= 16 at R = r^0.9 needs r below 2^-40 of the extent.
        assert!(matches!(
            assouad_spectrum_estimate(&idx, 0.9, &opts()),
            Err(Error::Window(_))
        ));
        let a = assouad_dimension_estimate(&idx, &opts()).unwrap();
        let l = lower_dimension_estimate(&idx, &opts()).unwrap();
        assert!(
            (a.value - 1.0).abs() < 0.05 && (l.value - 1.0).abs() < 0.05,
            "{} {}",
            a.value,
            l.value
        );
    }

    #[test]
    fn single_point_box_is_zero() {
        let idx = GridIndex::new(&PointCloud::new(2, vec![0.5, 0.5], 1e-9, "pt").unwrap()).unwrap();
        let o = EstimatorOptions {
            window: Some(ScaleWindow::new(1e-6, 1.0).unwrap()),
            ..opts()
        };
        assert_eq!(box_dimension_estimate(&idx, &o).unwrap().value, 0.0);
    }

    #[test]
    fn harmonic_sequence_estimates() {
        let c = decreasing_sequence(1.0, 100_000).unwrap();
        let idx = GridIndex::new(&c).unwrap();
        let b = box_dimension_estimate(&idx, &opts()).unwrap();
        assert!((b.value - 0.5).abs() < 0.05, "box {}", b.value);
        let a = assouad_spectrum_estimate(&idx, 0.5, &opts()).unwrap();
        assert!((a.value - 1.0).abs() < 0.1, "θ=0.5 {}", a.value);
        let ad = assouad_dimension_estimate(&idx, &opts()).unwrap();
        let ld = lower_dimension_estimate(&idx, &opts()).unwrap();
        assert!((ad.value - 1.0).abs() < 0.1, "assouad {}", ad.value);
        assert!(ld.value < 0.1, "lower {}", ld.value);
        for r in [&b, &a, &ad, &ld] {
            assert!((reproduce_from_witness(&idx, r).unwrap() - r.raw_value).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_lower_spectrum_vanishes() {
        let idx = GridIndex::new(&decreasing_sequence(1.0, 100_000).unwrap()).unwrap();
        let l = lower_spectrum_estimate(&idx, 0.75, &opts()).unwrap();
        assert!(l.value <= 0.1, "{}", l.value);
        // Isolated-point witness: the ball holds at most two points.
        assert!(l.witness.count <= 2.0);
    }

    #[test]
    fn raw_mode_reproduces_witness_slope() {
        let idx = GridIndex::new(&decreasing_sequence(1.0, 10_000).unwrap()).unwrap();
        let o = EstimatorOptions {
            method: Method::Raw,
            ..opts()
        };
        let a = assouad_spectrum_estimate(&idx, 0.4, &o).unwrap();
        let w = &a.witness;
        let c = w.center.unwrap();
        let count = idx.cell_count(
            c,
            idx.level_for(w.big_r).unwrap(),
            idx.level_for(w.r).unwrap(),
        ) as f64;
        assert!((count.ln() / (w.big_r / w.r).ln() - a.raw_value).abs() < 1e-9);
    }

    #[test]
    fn estimates_are_scale_and_translation_invariant() {
        let c = decreasing_sequence(1.0, 5000).unwrap();
        let moved = c.transformed(0.5, &[3.25]).unwrap();
        let (i1, i2) = (GridIndex::new(&c).unwrap(), GridIndex::new(&moved).unwrap());
        let run = |i: &GridIndex| {
            vec![
                box_dimension_estimate(i, &opts()).unwrap().value,
                assouad_spectrum_estimate(i, 0.3, &opts()).unwrap().value,
                lower_spectrum_estimate(i, 0.6, &opts()).unwrap().value,
                assouad_dimension_estimate(i, &opts()).unwrap().value,
            ]
        };
        assert_eq!(run(&i1), run(&i2));
    }

    #[test]
    fn hierarchy_on_test_clouds() {
        for c in [
            decreasing_sequence(1.0, 20_000).unwrap(),
            decreasing_sequence(2.0, 20_000).unwrap(),
            segment(100_000),
        ] {
            let idx = GridIndex::new(&c).unwrap();
            let b = box_dimension_estimate(&idx, &opts()).unwrap().value;
            let a = assouad_dimension_estimate(&idx, &opts()).unwrap().value;
            // Every θ the window supports, and at least three of them.
            let mut feasible = 0;
            for t in (1..10).map(|k| f64::from(k) / 10.0) {
                let Ok(s) = assouad_spectrum_estimate(&idx, t, &opts()) else {
                    continue;
                };
                feasible += 1;
                assert!(
                    s.value >= b - 0.05 && s.value <= a + 0.05,
                    "θ={t}: box {b} spectrum {} assouad {a}",
                    s.value
                );
            }
            assert!(feasible >= 3);
        }
    }

    #[test]
    fn narrow_window_and_bad_theta_rejected() {
        let idx = GridIndex::new(&segment(1000)).unwrap();
        let o = EstimatorOptions {
            window: Some(ScaleWindow::new(0.01, 0.2).unwrap()),
            ..opts()
        };
        assert!(assouad_spectrum_estimate(&idx, 0.5, &o).is_err());
        assert!(assouad_spectrum_estimate(&idx, 1.0, &opts()).is_err());
        assert!(assouad_spectrum_estimate(&idx, 0.99, &opts()).is_err());
    }

    #[test]
    fn center_policies() {
        let c = decreasing_sequence(1.0, 200_000).unwrap();
        let idx = GridIndex::new(&c).unwrap();
        let auto = select_centers(&idx, CenterPolicy::default(), 1);
        assert!(auto.len() <= 10_001 && auto.len() >= 9_990);
        assert!(auto.contains(&c.special()[0]));
        assert_eq!(select_centers(&idx, CenterPolicy::All, 0).len(), c.len());
        assert_eq!(auto, select_centers(&idx, CenterPolicy::default(), 1));
    }
}
