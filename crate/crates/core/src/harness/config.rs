use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::estimators::EstimatorOptions;
use crate::formulas::{default_theta_grid, JuliaParams, KleinianParams, Mode, Params};
use crate::generators::{Preset, PresetOptions};
use crate::{Error, Result};

/// Version tag carried by every JSON document the harness reads or writes.
pub const SCHEMA: u32 = 1;

/// Tolerance for estimates taken on point clouds.
pub const CLOUD_TOLERANCE: f64 = 0.1;
/// Tolerance for estimates taken on measure oracles.
pub const ORACLE_TOLERANCE: f64 = 0.05;
/// Tolerance for formula-against-formula identities.
pub const FORMULA_TOLERANCE: f64 = 1e-12;

/// Where the estimator gets its input from. At most one source may be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    /// Named cloud generator.
    pub preset: Option<String>,
    pub options: PresetOptions,
    /// Previously written cloud (CSV or binary).
    pub cloud: Option<PathBuf>,
    /// Synthetic measure oracle built from these parameters.
    pub oracle: Option<Params>,
}

impl GeneratorSpec {
    pub fn preset(&self) -> Result<Option<Preset>> {
        self.preset.as_deref().map(str::parse).transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSpec {
    pub thetas: Vec<f64>,
    pub modes: Vec<Mode>,
    /// Window, centre sampling policy, safety factor and regression options.
    pub options: EstimatorOptions,
    /// Also estimate the θ-free box, Assouad and lower dimensions.
    pub dimensions: bool,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        Self {
            thetas: default_theta_grid(),
            modes: vec![Mode::Assouad, Mode::Lower],
            options: EstimatorOptions::default(),
            dimensions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictionSpec {
    pub params: Option<Params>,
    pub thetas: Vec<f64>,
}

impl Default for PredictionSpec {
    fn default() -> Self {
        Self {
            params: None,
            thetas: default_theta_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
        }
    }
}

impl OutputSpec {
    pub fn cloud_csv(&self) -> PathBuf {
        self.dir.join("cloud.csv")
    }
    pub fn cloud_bin(&self) -> PathBuf {
        self.dir.join("cloud.bin")
    }
    pub fn estimate_csv(&self, measure: bool, mode: Mode) -> PathBuf {
        let m = match mode {
            Mode::Assouad => "assouad",
            Mode::Lower => "lower",
        };
        let prefix = if measure {
            "estimate-measure-"
        } else {
            "estimate-"
        };
        self.dir.join(format!("{prefix}{m}.csv"))
    }
    pub fn estimate_json(&self) -> PathBuf {
        self.dir.join("estimate.json")
    }
    pub fn prediction_csv(&self) -> PathBuf {
        self.dir.join("prediction.csv")
    }
    pub fn prediction_json(&self) -> PathBuf {
        self.dir.join("prediction.json")
    }
    pub fn comparison_json(&self) -> PathBuf {
        self.dir.join("comparison.json")
    }
    pub fn plot_svg(&self) -> PathBuf {
        self.dir.join("spectra.svg")
    }
    pub fn selftest_json(&self) -> PathBuf {
        self.dir.join("selftest.json")
    }
}

/// Everything one run needs; identical configs give identical artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    /// Master seed; overrides the generator and estimator seeds.
    pub seed: u64,
    pub generator: GeneratorSpec,
    pub estimator: EstimatorSpec,
    pub prediction: PredictionSpec,
    pub output: OutputSpec,
    /// Comparison tolerance; defaults by estimate kind when unset.
    pub tolerance: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA,
            seed: 0,
            generator: GeneratorSpec::default(),
            estimator: EstimatorSpec::default(),
            prediction: PredictionSpec::default(),
            output: OutputSpec::default(),
            tolerance: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema {}, expected {SCHEMA}",
                self.schema
            )));
        }
        validate_thetas(&self.estimator.thetas)?;
        validate_thetas(&self.prediction.thetas)?;
        if self.estimator.modes.is_empty() {
            return Err(Error::InvalidConfig("estimator.modes is empty".into()));
        }
        let g = &self.generator;
        let sources = usize::from(g.preset.is_some())
            + usize::from(g.cloud.is_some())
            + usize::from(g.oracle.is_some());
        if sources > 1 {
            return Err(Error::InvalidConfig(
                "set at most one of generator.preset, generator.cloud, generator.oracle".into(),
            ));
        }
        g.preset()?;
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "tolerance must be finite and >= 0, got {t}"
                )));
            }
        }
        Ok(())
    }

    /// Preset options with the master seed applied.
    pub fn preset_options(&self) -> PresetOptions {
        PresetOptions {
            seed: self.seed,
            ..self.generator.options.clone()
        }
    }

    /// Estimator options with the master seed applied.
    pub fn estimator_options(&self) -> EstimatorOptions {
        EstimatorOptions {
            seed: self.seed,
            ..self.estimator.options.clone()
        }
    }
}

/// A θ grid must be non-empty, strictly inside (0,1) and strictly increasing.
pub fn validate_thetas(thetas: &[f64]) -> Result<()> {
    if thetas.is_empty() {
        return Err(Error::InvalidConfig("θ grid is empty".into()));
    }
    if let Some(t) = thetas.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::InvalidConfig(format!(
            "θ grid must lie strictly inside (0,1), got {t}"
        )));
    }
    if thetas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "θ grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Reads parameters from JSON, either tagged (`{"kleinian": {...}}`,
/// `{"julia": {...}}`) or bare (`{"delta", "k_min", "k_max"}`,
/// `{"h", "p_min", "p_max"}`).
pub fn params_from_json(text: &str) -> Result<Params> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidConfig("parameters must be a JSON object".into()))?;
    let invalid = |e: serde_json::Error| {
        let msg = e.to_string();
        Error::InvalidParams(msg.trim_start_matches("invalid parameters: ").to_string())
    };
    if obj.contains_key("kleinian") || obj.contains_key("julia") {
        serde_json::from_value(v).map_err(invalid)
    } else if obj.contains_key("delta") {
        serde_json::from_value::<KleinianParams>(v)
            .map(Params::Kleinian)
            .map_err(invalid)
    } else if obj.contains_key("h") {
        serde_json::from_value::<JuliaParams>(v)
            .map(Params::Julia)
            .map_err(invalid)
    } else {
        Err(Error::InvalidConfig(
            "parameters need either `delta` or `h`".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_json_str(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(back.estimator.thetas.len(), 33);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_json_str(r#"{"schema": 2}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"estimator": {"thetas": [0.0, 0.5]}}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"estimator": {"thetas": [0.5, 1.0]}}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"estimator": {"thetas": [0.5, 0.4]}}"#).is_err());
        assert!(RunConfig::from_json_str(r#"{"unknown": 1}"#).is_err());
        assert!(matches!(
            RunConfig::from_json_str(r#"{"generator": {"preset": "mandelbrot"}}"#),
            Err(Error::UnknownPreset(_))
        ));
        assert!(RunConfig::from_json_str(
            r#"{"generator": {"preset": "zlattice1", "cloud": "x.csv"}}"#
        )
        .is_err());
    }

    #[test]
    fn seed_overrides_components() {
        let cfg =
            RunConfig::from_json_str(r#"{"seed": 9, "generator": {"preset": "cauliflower"}}"#)
                .unwrap();
        assert_eq!(cfg.preset_options().seed, 9);
        assert_eq!(cfg.estimator_options().seed, 9);
        assert_eq!(cfg.generator.preset().unwrap(), Some(Preset::Cauliflower));
    }

    #[test]
    fn params_forms() {
        let k = params_from_json(r#"{"delta": 0.6, "k_min": 1, "k_max": 1}"#).unwrap();
        assert!(matches!(k, Params::Kleinian(_)));
        let j = params_from_json(r#"{"julia": {"h": 1.4, "p_max": 4}}"#).unwrap();
        assert!(matches!(j, Params::Julia(p) if p.p_min() == 1 && p.p_max() == 4));
        let bad = params_from_json(r#"{"h": 0.5, "p_max": 2}"#).unwrap_err();
        assert!(
            matches!(bad, Error::InvalidParams(ref m) if m.contains("p_max/(1+p_max)")),
            "{bad}"
        );
        assert!(params_from_json("[1]").is_err());
        assert!(params_from_json(r#"{"x": 1}"#).is_err());
    }
}
