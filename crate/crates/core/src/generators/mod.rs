//! Point clouds and measure oracles.

mod cloud;
mod io;
mod julia;
mod oracle;
mod orbit;
mod presets;
mod sequences;

pub use cloud::PointCloud;
pub use julia::{
    julia_inverse_iteration, petal_number, BranchPolicy, JuliaOptions, JuliaPreset, Polynomial,
};
pub use oracle::{
    julia_preset_tags, kleinian_preset_tags, HoroballItinerary, HoroballWindow, MeasureOracle,
    OracleKind, OracleTag, ProfileKind, TagProfile, WindowShape, ZoomSequence, JULIA_PRESET_DEPTH,
};
pub use orbit::{
    apollonian_cusps, apollonian_mirrors, apollonian_orbit, kleinian_orbit, Isometry, OrbitOptions,
    OrbitOutput,
};
pub use presets::{
    generate_preset, Generated, Preset, PresetOptions, APOLLONIAN_DEPTH, APOLLONIAN_EPS,
    DEFAULT_CAP, ZLATTICE1_N, ZLATTICE2_N,
};
pub use sequences::{decreasing_sequence, inverted_lattice};
