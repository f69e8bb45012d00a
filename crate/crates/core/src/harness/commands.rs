use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{validate_thetas, RunConfig, CLOUD_TOLERANCE, ORACLE_TOLERANCE, SCHEMA};
use crate::estimators::{
    assouad_dimension_estimate, assouad_spectrum_estimate, box_dimension_estimate,
    lower_dimension_estimate, lower_spectrum_estimate, measure_spectrum_estimate, outcomes_to_csv,
    DepthGrid, EstimateKind, EstimateReport, GridIndex, ScaleWindow,
};
use crate::formulas::{Mode, Params, SpectrumProfile, Target};
use crate::fsutil::write_atomic;
use crate::generators::{
    generate_preset, julia_preset_tags, kleinian_preset_tags, MeasureOracle, PointCloud,
};
use crate::{Error, Result};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub schema: u32,
    pub preset: String,
    pub seed: u64,
    pub points: usize,
    pub dim: usize,
    pub eps_min: f64,
    pub cap_exceeded: bool,
    pub csv: PathBuf,
    pub binary: PathBuf,
}

/// Generates the configured preset cloud and writes it as CSV and binary.
///
/// When the point cap stops generation, the partial cloud is still written
/// and [`Error::CapExceeded`] is returned afterwards.
pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateSummary> {
    cfg.validate()?;
    let preset = cfg
        .generator
        .preset()?
        .ok_or_else(|| Error::InvalidConfig("generate needs generator.preset".into()))?;
    let opts = cfg.preset_options();
    let generated = generate_preset(preset, &opts)?;
    let options = serde_json::to_string(&opts)?;
    let cloud = generated.cloud.clone().with_provenance(format!(
        "{} seed={} options={options} aslab/{}",
        preset.name(),
        cfg.seed,
        env!("CARGO_PKG_VERSION")
    ));
    ensure_dir(&cfg.output.dir)?;
    let (csv, binary) = (cfg.output.cloud_csv(), cfg.output.cloud_bin());
    cloud.save_csv(&csv)?;
    cloud.save_binary(&binary)?;
    if generated.cap_exceeded {
        return Err(Error::CapExceeded {
            emitted: cloud.len(),
            cap: opts.cap.unwrap_or(crate::generators::DEFAULT_CAP),
        });
    }
    Ok(GenerateSummary {
        schema: SCHEMA,
        preset: preset.name().to_string(),
        seed: cfg.seed,
        points: cloud.len(),
        dim: cloud.dim(),
        eps_min: cloud.eps_min(),
        cap_exceeded: false,
        csv,
        binary,
    })
}

/// Summary written next to the estimate CSVs.
///
/// `runtime_ms` is the only field that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub schema: u32,
    pub seed: u64,
    pub source: String,
    pub cloud_size: Option<usize>,
    pub eps_min: Option<f64>,
    pub window: Option<ScaleWindow>,
    pub thetas: Vec<f64>,
    pub box_dimension: Option<f64>,
    pub assouad_dimension: Option<f64>,
    pub lower_dimension: Option<f64>,
    /// Estimate CSV files, one per mode.
    pub files: Vec<PathBuf>,
    /// θ values the window could not support, per file.
    pub infeasible: Vec<usize>,
    pub notes: Vec<String>,
    pub runtime_ms: u64,
}

enum Source {
    Cloud(PointCloud, String),
    Oracle(MeasureOracle, String),
}

fn oracle_for(params: Params) -> Result<MeasureOracle> {
    match params {
        Params::Kleinian(p) => MeasureOracle::synthetic_kleinian(p, kleinian_preset_tags(&p)),
        Params::Julia(p) => MeasureOracle::synthetic_julia(p, julia_preset_tags(&p)),
    }
}

fn source(cfg: &RunConfig) -> Result<Source> {
    let g = &cfg.generator;
    if let Some(path) = &g.cloud {
        return Ok(Source::Cloud(
            PointCloud::load(path)?,
            format!("cloud {}", path.display()),
        ));
    }
    if let Some(params) = g.oracle {
        return Ok(Source::Oracle(
            oracle_for(params)?,
            format!("oracle {}", serde_json::to_string(&params)?),
        ));
    }
    if let Some(preset) = g.preset()? {
        let generated = generate_preset(preset, &cfg.preset_options())?;
        if generated.cap_exceeded {
            return Err(Error::CapExceeded {
                emitted: generated.cloud.len(),
                cap: cfg
                    .generator
                    .options
                    .cap
                    .unwrap_or(crate::generators::DEFAULT_CAP),
            });
        }
        return Ok(Source::Cloud(
            generated.cloud,
            format!("preset {} seed={}", preset.name(), cfg.seed),
        ));
    }
    Err(Error::InvalidConfig(
        "estimate needs generator.preset, generator.cloud or generator.oracle".into(),
    ))
}

/// Estimates the configured spectra and writes one CSV per mode (one row
/// per θ, in grid order) plus `estimate.json`.
///
/// A window that violates the safety factor fails the whole command with
/// [`Error::Window`]; θ values the window is merely too narrow for keep
/// their CSV row, marked infeasible.
pub fn cmd_estimate(cfg: &RunConfig) -> Result<EstimateSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let thetas = &cfg.estimator.thetas;
    let mut summary = EstimateSummary {
        schema: SCHEMA,
        seed: cfg.seed,
        source: String::new(),
        cloud_size: None,
        eps_min: None,
        window: None,
        thetas: thetas.clone(),
        box_dimension: None,
        assouad_dimension: None,
        lower_dimension: None,
        files: Vec::new(),
        infeasible: Vec::new(),
        notes: Vec::new(),
        runtime_ms: 0,
    };
    let mut outputs: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    match source(cfg)? {
        Source::Cloud(cloud, name) => {
            summary.source = name;
            let index = GridIndex::new(&cloud)?;
            let opts = cfg.estimator_options();
            let window = opts.window_for(&index)?;
            window.levels(&index, opts.safety)?;
            summary.cloud_size = Some(cloud.len());
            summary.eps_min = Some(cloud.eps_min());
            summary.window = Some(window);
            if cfg.estimator.dimensions {
                summary.box_dimension = Some(box_dimension_estimate(&index, &opts)?.value);
                let mut dim = |r: Result<EstimateReport>, what: &str| match r {
                    Ok(r) => Some(r.value),
                    Err(e) => {
                        summary.notes.push(format!("{what}: {e}"));
                        None
                    }
                };
                let a = dim(
                    assouad_dimension_estimate(&index, &opts),
                    "assouad dimension",
                );
                let l = dim(lower_dimension_estimate(&index, &opts), "lower dimension");
                summary.assouad_dimension = a;
                summary.lower_dimension = l;
            }
            for &mode in &cfg.estimator.modes {
                let outcomes: Vec<(f64, Result<EstimateReport>)> = thetas
                    .iter()
                    .map(|&t| {
                        let r = match mode {
                            Mode::Assouad => assouad_spectrum_estimate(&index, t, &opts),
                            Mode::Lower => lower_spectrum_estimate(&index, t, &opts),
                        };
                        (t, r)
                    })
                    .collect();
                let kind = match mode {
                    Mode::Assouad => EstimateKind::AssouadSpectrum,
                    Mode::Lower => EstimateKind::LowerSpectrum,
                };
                summary
                    .infeasible
                    .push(outcomes.iter().filter(|o| o.1.is_err()).count());
                let path = cfg.output.estimate_csv(false, mode);
                outputs.push((path, outcomes_to_csv(kind, &outcomes)?));
            }
        }
        Source::Oracle(oracle, name) => {
            summary.source = name;
            let grid = DepthGrid::for_oracle(&oracle);
            for &mode in &cfg.estimator.modes {
                let outcomes: Vec<(f64, Result<EstimateReport>)> = thetas
                    .iter()
                    .map(|&t| (t, measure_spectrum_estimate(&oracle, t, None, &grid, mode)))
                    .collect();
                let kind = match mode {
                    Mode::Assouad => EstimateKind::MeasureAssouadSpectrum,
                    Mode::Lower => EstimateKind::MeasureLowerSpectrum,
                };
                summary
                    .infeasible
                    .push(outcomes.iter().filter(|o| o.1.is_err()).count());
                let path = cfg.output.estimate_csv(true, mode);
                outputs.push((path, outcomes_to_csv(kind, &outcomes)?));
            }
        }
    }
    ensure_dir(&cfg.output.dir)?;
    for (path, bytes) in &outputs {
        write_atomic(path, bytes)?;
        summary.files.push(path.clone());
    }
    summary.runtime_ms = start.elapsed().as_millis() as u64;
    write_json(&cfg.output.estimate_json(), &summary)?;
    Ok(summary)
}

/// Column names of the prediction CSV, after `theta`.
pub const PREDICTION_COLUMNS: [&str; 4] = [
    "set_assouad",
    "set_lower",
    "measure_assouad",
    "measure_lower",
];

const CURVES: [(Target, Mode); 4] = [
    (Target::Set, Mode::Assouad),
    (Target::Set, Mode::Lower),
    (Target::Measure, Mode::Assouad),
    (Target::Measure, Mode::Lower),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEndpoints {
    pub curve: String,
    pub limit_at_zero: f64,
    pub limit_at_one: f64,
    pub phase_transition: Option<f64>,
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSummary {
    pub schema: u32,
    pub params: Params,
    pub thetas: usize,
    /// Phase transition of the setting, from any non-constant curve.
    pub rho_pt: Option<f64>,
    pub curves: Vec<CurveEndpoints>,
    pub csv: PathBuf,
}

/// The four predicted curves for `params`, in [`PREDICTION_COLUMNS`] order.
pub fn prediction_profiles(params: &Params) -> [SpectrumProfile; 4] {
    CURVES.map(|(t, m)| params.profile(t, m))
}

/// CSV bytes of the predicted curves on `thetas`.
pub fn prediction_csv(params: &Params, thetas: &[f64]) -> Result<Vec<u8>> {
    validate_thetas(thetas)?;
    let profiles = prediction_profiles(params);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["theta"];
    header.extend(PREDICTION_COLUMNS);
    w.write_record(&header)?;
    for &t in thetas {
        let mut row = vec![t.to_string()];
        for p in &profiles {
            row.push(p.value(t)?.to_string());
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

/// Writes `prediction.csv` and the endpoint summary `prediction.json`.
pub fn cmd_predict(cfg: &RunConfig) -> Result<PredictionSummary> {
    cfg.validate()?;
    let params = cfg
        .prediction
        .params
        .ok_or_else(|| Error::InvalidConfig("predict needs prediction.params".into()))?;
    let thetas = &cfg.prediction.thetas;
    let bytes = prediction_csv(&params, thetas)?;
    let profiles = prediction_profiles(&params);
    let curves: Vec<CurveEndpoints> = profiles
        .iter()
        .zip(PREDICTION_COLUMNS)
        .map(|(p, name)| CurveEndpoints {
            curve: name.to_string(),
            limit_at_zero: p.limit_at_zero(),
            limit_at_one: p.limit_at_one(),
            phase_transition: p.phase_transition(),
            constant: p.is_constant(),
        })
        .collect();
    let summary = PredictionSummary {
        schema: SCHEMA,
        params,
        thetas: thetas.len(),
        rho_pt: profiles.iter().find_map(|p| p.phase_transition()),
        curves,
        csv: cfg.output.prediction_csv(),
    };
    ensure_dir(&cfg.output.dir)?;
    write_atomic(&summary.csv, &bytes)?;
    write_json(&cfg.output.prediction_json(), &summary)?;
    Ok(summary)
}

/// One row of an estimate CSV as read back by `compare` and `plot`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub kind: EstimateKind,
    pub theta: f64,
    pub value: Option<f64>,
    pub status: String,
}

fn parse_kind(s: &str) -> Result<EstimateKind> {
    use EstimateKind::*;
    [
        BoxDimension,
        AssouadSpectrum,
        LowerSpectrum,
        AssouadDimension,
        LowerDimension,
        MeasureAssouadSpectrum,
        MeasureLowerSpectrum,
    ]
    .into_iter()
    .find(|k| k.name() == s)
    .ok_or_else(|| Error::Format(format!("unknown estimate kind '{s}'")))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Format(format!("bad {what} '{s}': {e}")))
}

pub fn read_estimate_csv(path: &Path) -> Result<Vec<EstimateRow>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("{} has no '{name}' column", path.display())))
    };
    let (ck, ct, cv) = (col("kind")?, col("theta")?, col("value")?);
    let cs = headers.iter().position(|h| h == "status");
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let value = match field(cv) {
            "" => None,
            v => Some(parse_f64(v, "value")?),
        };
        rows.push(EstimateRow {
            kind: parse_kind(field(ck))?,
            theta: parse_f64(field(ct), "theta")?,
            value,
            status: cs
                .map(|c| field(c).to_string())
                .unwrap_or_else(|| "ok".into()),
        });
    }
    Ok(rows)
}

/// Rows of a prediction CSV: `(θ, [set_assouad, set_lower, measure_assouad, measure_lower])`.
pub fn read_prediction_csv(path: &Path) -> Result<Vec<(f64, [f64; 4])>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let mut expected = vec!["theta"];
    expected.extend(PREDICTION_COLUMNS);
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Format(format!(
            "{} is not a prediction CSV",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut v = [0.0; 4];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = parse_f64(&rec[k + 1], PREDICTION_COLUMNS[k])?;
        }
        rows.push((parse_f64(&rec[0], "theta")?, v));
    }
    Ok(rows)
}

/// Prediction column compared against an estimate kind.
pub fn prediction_column(kind: EstimateKind) -> Option<usize> {
    match kind {
        EstimateKind::AssouadSpectrum => Some(0),
        EstimateKind::LowerSpectrum => Some(1),
        EstimateKind::MeasureAssouadSpectrum => Some(2),
        EstimateKind::MeasureLowerSpectrum => Some(3),
        _ => None,
    }
}

/// Default tolerance for an estimate kind.
pub fn default_tolerance(kind: EstimateKind) -> f64 {
    match kind {
        EstimateKind::MeasureAssouadSpectrum | EstimateKind::MeasureLowerSpectrum => {
            ORACLE_TOLERANCE
        }
        _ => CLOUD_TOLERANCE,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub theta: f64,
    pub predicted: f64,
    pub estimated: Option<f64>,
    pub abs_error: Option<f64>,
    pub pass: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSeries {
    pub kind: EstimateKind,
    pub column: String,
    pub tolerance: f64,
    pub rows: Vec<ComparisonRow>,
    pub failed: usize,
}

/// Endpoint limits of the prediction against θ-free dimension estimates.
/// Informational: they do not affect `all_pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointComparison {
    pub name: String,
    pub predicted: f64,
    pub estimated: f64,
    pub abs_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMetadata {
    pub source: String,
    pub cloud_size: Option<usize>,
    pub eps_min: Option<f64>,
    pub window: Option<ScaleWindow>,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: u32,
    pub series: Vec<ComparisonSeries>,
    pub endpoints: Vec<EndpointComparison>,
    pub metadata: Option<ComparisonMetadata>,
    pub all_pass: bool,
}

impl ComparisonReport {
    pub fn failing_rows(&self) -> impl Iterator<Item = (&ComparisonSeries, &ComparisonRow)> {
        self.series
            .iter()
            .flat_map(|s| s.rows.iter().filter(|r| !r.pass).map(move |r| (s, r)))
    }
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or_else(|| Path::new(".")).join(name)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Option<T> {
    std::fs::read(path)
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
}

/// Compares estimate CSVs against a prediction CSV.
///
/// Each row passes when `|estimated − predicted| <= tolerance`; rows whose
/// estimate is missing fail. The θ grids must agree exactly (to 1e-9), in
/// order. `tolerance` defaults by kind. When `estimate.json` and
/// `prediction.json` sit next to the inputs, endpoint comparisons and run
/// metadata are added.
pub fn compare_files(
    estimates: &[PathBuf],
    prediction: &Path,
    tolerance: Option<f64>,
) -> Result<ComparisonReport> {
    if estimates.is_empty() {
        return Err(Error::InvalidConfig(
            "compare needs at least one estimate file".into(),
        ));
    }
    let predicted = read_prediction_csv(prediction)?;
    if predicted.is_empty() {
        return Err(Error::Format(format!(
            "{} has no rows",
            prediction.display()
        )));
    }
    let mut series = Vec::new();
    for path in estimates {
        let rows = read_estimate_csv(path)?;
        if rows.is_empty() {
            return Err(Error::Format(format!("{} has no rows", path.display())));
        }
        let mut kinds: Vec<EstimateKind> = Vec::new();
        for r in &rows {
            if !kinds.contains(&r.kind) {
                kinds.push(r.kind);
            }
        }
        for kind in kinds {
            let col = prediction_column(kind).ok_or_else(|| {
                Error::Format(format!("{} rows have no predicted curve", kind.name()))
            })?;
            let mine: Vec<&EstimateRow> = rows.iter().filter(|r| r.kind == kind).collect();
            let grid_ok = mine.len() == predicted.len()
                && mine
                    .iter()
                    .zip(&predicted)
                    .all(|(e, p)| (e.theta - p.0).abs() <= 1e-9);
            if !grid_ok {
                return Err(Error::InvalidConfig(format!(
                    "θ grid mismatch between {} ({} values) and {} ({} values)",
                    path.display(),
                    mine.len(),
                    prediction.display(),
                    predicted.len()
                )));
            }
            let tol = tolerance.unwrap_or_else(|| default_tolerance(kind));
            let cmp: Vec<ComparisonRow> = mine
                .iter()
                .zip(&predicted)
                .map(|(e, p)| {
                    let pred = p.1[col];
                    let err = e.value.map(|v| (v - pred).abs());
                    ComparisonRow {
                        theta: e.theta,
                        predicted: pred,
                        estimated: e.value,
                        abs_error: err,
                        pass: err.is_some_and(|d| d <= tol),
                        status: e.status.clone(),
                    }
                })
                .collect();
            series.push(ComparisonSeries {
                kind,
                column: PREDICTION_COLUMNS[col].to_string(),
                tolerance: tol,
                failed: cmp.iter().filter(|r| !r.pass).count(),
                rows: cmp,
            });
        }
    }

    let est: Option<EstimateSummary> = read_json(&sibling(&estimates[0], "estimate.json"));
    let pred: Option<PredictionSummary> = read_json(&sibling(prediction, "prediction.json"));
    let mut endpoints = Vec::new();
    if let (Some(est), Some(pred)) = (&est, &pred) {
        let curve = |name: &str| pred.curves.iter().find(|c| c.curve == name);
        let tol = tolerance.unwrap_or(CLOUD_TOLERANCE);
        let pairs = [
            (
                "box dimension",
                curve("set_assouad").map(|c| c.limit_at_zero),
                est.box_dimension,
            ),
            (
                "assouad dimension",
                curve("set_assouad").map(|c| c.limit_at_one),
                est.assouad_dimension,
            ),
            (
                "lower dimension",
                curve("set_lower").map(|c| c.limit_at_one),
                est.lower_dimension,
            ),
        ];
        for (name, p, e) in pairs {
            if let (Some(p), Some(e)) = (p, e) {
                endpoints.push(EndpointComparison {
                    name: name.to_string(),
                    predicted: p,
                    estimated: e,
                    abs_error: (e - p).abs(),
                    pass: (e - p).abs() <= tol,
                });
            }
        }
    }
    let metadata = est.map(|e| ComparisonMetadata {
        source: e.source,
        cloud_size: e.cloud_size,
        eps_min: e.eps_min,
        window: e.window,
        runtime_ms: e.runtime_ms,
    });
    let all_pass = series.iter().all(|s| s.failed == 0);
    Ok(ComparisonReport {
        schema: SCHEMA,
        series,
        endpoints,
        metadata,
        all_pass,
    })
}

/// [`compare_files`], then writes `comparison.json` into the output directory.
pub fn cmd_compare(
    cfg: &RunConfig,
    estimates: &[PathBuf],
    prediction: &Path,
    tolerance: Option<f64>,
) -> Result<ComparisonReport> {
    let report = compare_files(estimates, prediction, tolerance.or(cfg.tolerance))?;
    ensure_dir(&cfg.output.dir)?;
    write_json(&cfg.output.comparison_json(), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{JuliaParams, KleinianParams};

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn cfg_in(dir: &Path) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.output.dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn generate_zlattice_counts_points() {
        let d = tmp();
        let mut cfg = cfg_in(d.path());
        cfg.generator.preset = Some("zlattice1".into());
        cfg.generator.options.n = Some(1000);
        let s = cmd_generate(&cfg).unwrap();
        assert_eq!(s.points, 2001);
        let back = PointCloud::load(&s.binary).unwrap();
        assert_eq!(back.len(), 2001);
        assert!(back.provenance().starts_with("zlattice1 seed=0"));
        assert_eq!(PointCloud::load(&s.csv).unwrap().len(), 2001);
    }

    #[test]
    fn generate_unknown_preset_writes_nothing() {
        let d = tmp();
        let mut cfg = cfg_in(d.path());
        cfg.generator.preset = Some("nope".into());
        assert!(matches!(cmd_generate(&cfg), Err(Error::UnknownPreset(_))));
        assert_eq!(std::fs::read_dir(d.path()).unwrap().count(), 0);
    }

    #[test]
    fn generate_cap_writes_partial_cloud() {
        let d = tmp();
        let mut cfg = cfg_in(d.path());
        cfg.generator.preset = Some("apollonian".into());
        cfg.generator.options.eps_proj = Some(1e-3);
        cfg.generator.options.cap = Some(500);
        assert!(matches!(cmd_generate(&cfg), Err(Error::CapExceeded { .. })));
        let partial = PointCloud::load(cfg.output.cloud_bin()).unwrap();
        assert!(!partial.is_empty() && partial.len() <= 500);
    }

    fn zlattice_estimate_cfg(dir: &Path) -> RunConfig {
        let mut cfg = cfg_in(dir);
        cfg.generator.preset = Some("zlattice1".into());
        cfg.generator.options.n = Some(20_000);
        cfg.estimator.thetas = (1..=9).map(|i| f64::from(i) / 10.0).collect();
        cfg.estimator.modes = vec![Mode::Assouad];
        cfg
    }

    #[test]
    fn estimate_shape_and_determinism() {
        let (a, b) = (tmp(), tmp());
        let s = cmd_estimate(&zlattice_estimate_cfg(a.path())).unwrap();
        cmd_estimate(&zlattice_estimate_cfg(b.path())).unwrap();
        assert_eq!(s.files.len(), 1);
        let rows = read_estimate_csv(&s.files[0]).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.kind == EstimateKind::AssouadSpectrum));
        let name = s.files[0].file_name().unwrap();
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y);
        assert_eq!(s.cloud_size, Some(40_001));
    }

    #[test]
    fn estimate_rejects_unsafe_window() {
        let d = tmp();
        let mut cfg = zlattice_estimate_cfg(d.path());
        cfg.estimator.options.window = Some(ScaleWindow::new(1e-14, 1.0).unwrap());
        assert!(matches!(cmd_estimate(&cfg), Err(Error::Window(_))));
    }

    #[test]
    fn estimate_oracle_writes_measure_rows() {
        let d = tmp();
        let mut cfg = cfg_in(d.path());
        cfg.generator.oracle = Some(Params::Kleinian(KleinianParams::new(1.2, 1, 2).unwrap()));
        cfg.estimator.thetas = vec![0.2, 0.5, 0.8];
        let s = cmd_estimate(&cfg).unwrap();
        assert_eq!(s.files.len(), 2);
        let rows = read_estimate_csv(&cfg.output.estimate_csv(true, Mode::Assouad)).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.value.is_some()));
    }

    #[test]
    fn predict_kleinian_small_delta() {
        let d = tmp();
        let mut cfg = cfg_in(d.path());
        cfg.prediction.params = Some(Params::Kleinian(KleinianParams::new(0.6, 1, 1).unwrap()));
        cfg.prediction.thetas = vec![0.25, 0.5, 0.75];
        let s = cmd_predict(&cfg).unwrap();
        assert_eq!(s.rho_pt, Some(0.5));
        let rows = read_prediction_csv(&s.csv).unwrap();
        // δ + min{1, θ/(1−θ)}(1 − δ) at θ = 1/4 is 0.6 + 0.4/3.
        assert!((rows[0].1[0] - (0.6 + 0.4 / 3.0)).abs() < 1e-12);
        assert_eq!(rows[1].1[0], 1.0);
        assert_eq!(rows[2].1[1], 0.6);
        let back: PredictionSummary = read_json(&cfg.output.prediction_json()).unwrap();
        assert_eq!(back, s);
    }

    fn write_estimate(path: &Path, kind: EstimateKind, rows: &[(f64, Option<f64>)]) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "theta", "value", "status"])
            .unwrap();
        for (t, v) in rows {
            let v = v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([kind.name(), &t.to_string(), &v, "ok"])
                .unwrap();
        }
        std::fs::write(path, w.into_inner().unwrap()).unwrap();
    }

    fn julia_prediction(dir: &Path, thetas: Vec<f64>) -> PathBuf {
        let mut cfg = cfg_in(dir);
        cfg.prediction.params = Some(Params::Julia(JuliaParams::new(1.4, 1, 4).unwrap()));
        cfg.prediction.thetas = thetas;
        cmd_predict(&cfg).unwrap().csv
    }

    #[test]
    fn compare_pass_fail_and_mismatch() {
        let d = tmp();
        let pred = julia_prediction(d.path(), vec![0.1, 0.5, 0.9]);
        let est = d.path().join("e.csv");
        // Set-Assouad spectrum of h = 1.4 ≥ 1 is the constant h.
        write_estimate(
            &est,
            EstimateKind::AssouadSpectrum,
            &[(0.1, Some(1.45)), (0.5, Some(1.35)), (0.9, Some(1.4))],
        );
        let rep = compare_files(std::slice::from_ref(&est), &pred, None).unwrap();
        assert!(rep.all_pass);
        assert_eq!(rep.series[0].tolerance, CLOUD_TOLERANCE);

        write_estimate(
            &est,
            EstimateKind::AssouadSpectrum,
            &[(0.1, Some(1.45)), (0.5, Some(1.6)), (0.9, None)],
        );
        let rep = compare_files(std::slice::from_ref(&est), &pred, Some(0.1)).unwrap();
        assert!(!rep.all_pass);
        let failing: Vec<f64> = rep.failing_rows().map(|(_, r)| r.theta).collect();
        assert_eq!(failing, vec![0.5, 0.9]);

        write_estimate(
            &est,
            EstimateKind::AssouadSpectrum,
            &[(0.1, Some(1.4)), (0.5, Some(1.4))],
        );
        assert!(matches!(
            compare_files(std::slice::from_ref(&est), &pred, None),
            Err(Error::InvalidConfig(_))
        ));
        write_estimate(
            &est,
            EstimateKind::AssouadSpectrum,
            &[(0.1, Some(1.4)), (0.6, Some(1.4)), (0.9, Some(1.4))],
        );
        assert!(matches!(
            compare_files(&[est], &pred, None),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn compare_tolerance_is_inclusive() {
        let d = tmp();
        let pred = julia_prediction(d.path(), vec![0.5]);
        let est = d.path().join("e.csv");
        write_estimate(&est, EstimateKind::LowerSpectrum, &[(0.5, Some(1.5))]);
        // Set-lower at θ = 1/2 ≥ 1/(1+p_max) is 1.
        let rep = compare_files(std::slice::from_ref(&est), &pred, Some(0.5)).unwrap();
        assert!(rep.all_pass);
        let rep = compare_files(&[est], &pred, Some(0.4999)).unwrap();
        assert!(!rep.all_pass);
    }
}
