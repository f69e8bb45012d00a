//! Closed-form dimensions and spectra.

mod dictionary;
mod global;
mod params;
mod spectra;

pub use dictionary::{sullivan_dictionary_report, Configuration, DictionaryReport, Setting};
pub use global::{
    julia_log_phi, julia_log_phi_terminating, julia_phi, julia_phi_terminating,
    julia_phi_threshold, sv_global_log_measure, sv_global_measure,
};
pub use params::{JuliaParams, KleinianParams};
pub use spectra::{
    general_spectrum_bounds, julia_dims, julia_measure_spectrum, julia_set_spectrum, kleinian_dims,
    kleinian_measure_box, kleinian_measure_spectrum, kleinian_set_spectrum, phase_transition_form,
    JuliaDims, KleinianDims, Mode, SpectrumProfile, Target,
};

/// The default θ grid: 33 points 0.03, 0.06, …, 0.99.
pub fn default_theta_grid() -> Vec<f64> {
    (1..=33).map(|i| f64::from(3 * i) / 100.0).collect()
}

/// Either parameter family.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Params {
    Kleinian(KleinianParams),
    Julia(JuliaParams),
}

impl Params {
    pub fn set_spectrum(&self, mode: Mode) -> SpectrumProfile {
        match self {
            Params::Kleinian(p) => kleinian_set_spectrum(p, mode),
            Params::Julia(p) => julia_set_spectrum(p, mode),
        }
    }

    pub fn measure_spectrum(&self, mode: Mode) -> SpectrumProfile {
        match self {
            Params::Kleinian(p) => kleinian_measure_spectrum(p, mode),
            Params::Julia(p) => julia_measure_spectrum(p, mode),
        }
    }

    pub fn profile(&self, target: Target, mode: Mode) -> SpectrumProfile {
        match target {
            Target::Set => self.set_spectrum(mode),
            Target::Measure => self.measure_spectrum(mode),
        }
    }
}
