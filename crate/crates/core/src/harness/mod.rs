//! Run configuration, the `generate → estimate → predict → compare → plot`
//! pipeline behind the `aslab` binary, and the self-test.
//!
//! Every command writes its artifacts atomically into the configured output
//! directory and returns a serialisable summary. [`exit_code`] maps errors
//! to the process exit codes used by the CLI.

mod commands;
mod config;
mod plot;
mod selftest;
mod sweep;

pub use commands::{
    cmd_compare, cmd_estimate, cmd_generate, cmd_predict, compare_files, default_tolerance,
    prediction_column, prediction_csv, prediction_profiles, read_estimate_csv, read_prediction_csv,
    ComparisonMetadata, ComparisonReport, ComparisonRow, ComparisonSeries, CurveEndpoints,
    EndpointComparison, EstimateRow, EstimateSummary, GenerateSummary, PredictionSummary,
    PREDICTION_COLUMNS,
};
pub use config::{
    params_from_json, validate_thetas, EstimatorSpec, GeneratorSpec, OutputSpec, PredictionSpec,
    RunConfig, CLOUD_TOLERANCE, FORMULA_TOLERANCE, ORACLE_TOLERANCE, SCHEMA,
};
pub use plot::{
    cmd_plot, estimate_series, fmt_coord, prediction_series, render_svg, PlotSummary, Series,
};
pub use selftest::{cmd_selftest, run_selftest, Mutation, SelftestReport, SuiteResult};
pub use sweep::parameter_sweep;

use crate::Error;

/// A comparison or self-test found rows outside tolerance.
pub const EXIT_FAILED: i32 = 1;
/// Bad input: configuration, parameters, unknown preset, unreadable files.
pub const EXIT_INPUT: i32 = 2;
/// The scale window or an oracle cannot support the estimate.
pub const EXIT_ESTIMATE: i32 = 3;
/// The point cap stopped generation; a partial cloud was written.
pub const EXIT_CAP: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Window(_) | Error::Oracle(_) => EXIT_ESTIMATE,
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::InvalidParams(_)
        | Error::OutsideModel(_)
        | Error::InvalidConfig(_)
        | Error::UnknownPreset(_)
        | Error::Format(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => EXIT_INPUT,
    }
}

/// One-line diagnostic: `ERR: <message>` with newlines folded.
pub fn diagnostic(e: &Error) -> String {
    format!("ERR: {}", e.to_string().replace(['\n', '\r'], " "))
}
