//! Covering-number and mass-ratio estimators.

mod grid;
mod measure;
mod report;
mod sets;

pub use grid::{
    GridIndex, ScaleWindow, DEFAULT_OUTER_LEVEL, DEFAULT_SAFETY, DEFAULT_TOP_LEVEL, MIN_LEVELS,
};
pub use measure::{
    measure_spectrum_estimate, measure_spectrum_estimates, reproduce_measure_witness, DepthGrid,
};
pub use report::{
    linear_fit, outcomes_to_csv, reports_to_csv, EstimateKind, EstimateReport, Method, ScaleRow,
    Witness, CSV_HEADER,
};
pub use sets::{
    assouad_dimension_estimate, assouad_spectrum_estimate, box_dimension_estimate,
    lower_dimension_estimate, lower_spectrum_estimate, reproduce_from_witness, select_centers,
    spectrum_estimates, CenterPolicy, EstimatorOptions, MIN_RATIO_LEVELS,
};
