use serde::{Deserialize, Serialize};

use super::params::{JuliaParams, KleinianParams};
use crate::{Error, Result};

/// Which member of the dimension pair a profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Assouad,
    Lower,
}

/// Whether a profile belongs to the fractal set or to the conformal measure on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Set,
    Measure,
}

/// Dimensions of a Kleinian limit set and its Patterson–Sullivan measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KleinianDims {
    pub assouad_set: f64,
    pub lower_set: f64,
    pub assouad_measure: f64,
    pub lower_measure: f64,
    pub hausdorff: f64,
}

/// Dimensions of a parabolic Julia set and its h-conformal measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JuliaDims {
    pub assouad_set: f64,
    pub lower_set: f64,
    pub assouad_measure: f64,
    pub lower_measure: f64,
    pub box_measure: f64,
}

/// A spectrum θ ↦ dim on (0,1).
///
/// Every closed form in both settings has the shape
/// `base + min{1, rate·θ/(1−θ)}·swing`, so that is how profiles are stored.
/// `rate` is 1 for Kleinian groups and `p_max` for Julia sets; a zero
/// `swing` means the profile is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumProfile {
    pub mode: Mode,
    pub target: Target,
    base: f64,
    swing: f64,
    rate: f64,
    /// Box dimension of the underlying set or measure.
    pub box_dim: f64,
    /// Assouad dimension of the underlying set or measure.
    pub assouad_dim: f64,
    /// Lower dimension of the underlying set or measure.
    pub lower_dim: f64,
}

impl SpectrumProfile {
    /// Evaluates the profile at `theta`, which must lie in the open interval (0,1).
    pub fn value(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "theta must lie in (0,1), got {theta}"
            )));
        }
        Ok(self.eval(theta))
    }

    pub(crate) fn eval(&self, theta: f64) -> f64 {
        if self.swing == 0.0 {
            return self.base;
        }
        let t = (self.rate * theta / (1.0 - theta)).min(1.0);
        self.base + t * self.swing
    }

    pub fn is_constant(&self) -> bool {
        self.swing == 0.0
    }

    /// Limit of the profile as θ → 0.
    pub fn limit_at_zero(&self) -> f64 {
        self.base
    }

    /// Limit of the profile as θ → 1.
    pub fn limit_at_one(&self) -> f64 {
        self.base + self.swing
    }

    /// The unique phase transition `1/(1+rate)`, or `None` for a constant profile.
    pub fn phase_transition(&self) -> Option<f64> {
        if self.is_constant() {
            None
        } else {
            Some(1.0 / (1.0 + self.rate))
        }
    }
}

pub fn kleinian_dims(p: &KleinianParams) -> KleinianDims {
    let (d, kmin, kmax) = (p.delta(), p.kmin_f(), p.kmax_f());
    KleinianDims {
        assouad_set: d.max(kmax),
        lower_set: d.min(kmin),
        assouad_measure: (2.0 * d - kmin).max(kmax),
        lower_measure: (2.0 * d - kmax).min(kmin),
        hausdorff: d,
    }
}

/// Box dimension of the Patterson–Sullivan measure.
pub fn kleinian_measure_box(p: &KleinianParams) -> f64 {
    p.delta().max(2.0 * p.delta() - p.kmin_f())
}

pub fn kleinian_measure_spectrum(p: &KleinianParams, mode: Mode) -> SpectrumProfile {
    let (d, kmin, kmax) = (p.delta(), p.kmin_f(), p.kmax_f());
    let mid = (kmin + kmax) / 2.0;
    let (base, swing) = match mode {
        Mode::Assouad => {
            if d < kmin {
                (d, kmax - d)
            } else if d < mid {
                (2.0 * d - kmin, kmin + kmax - 2.0 * d)
            } else {
                (2.0 * d - kmin, 0.0)
            }
        }
        Mode::Lower => {
            if d > kmax {
                (d, -(d - kmin))
            } else if d > mid {
                (2.0 * d - kmax, -(2.0 * d - kmin - kmax))
            } else {
                (2.0 * d - kmax, 0.0)
            }
        }
    };
    let dims = kleinian_dims(p);
    SpectrumProfile {
        mode,
        target: Target::Measure,
        base,
        swing,
        rate: 1.0,
        box_dim: kleinian_measure_box(p),
        assouad_dim: dims.assouad_measure,
        lower_dim: dims.lower_measure,
    }
}

pub fn kleinian_set_spectrum(p: &KleinianParams, mode: Mode) -> SpectrumProfile {
    let (d, kmin, kmax) = (p.delta(), p.kmin_f(), p.kmax_f());
    let swing = match mode {
        Mode::Assouad if d < kmax => kmax - d,
        Mode::Lower if d > kmin => -(d - kmin),
        _ => 0.0,
    };
    let dims = kleinian_dims(p);
    SpectrumProfile {
        mode,
        target: Target::Set,
        base: d,
        swing,
        rate: 1.0,
        box_dim: d,
        assouad_dim: dims.assouad_set,
        lower_dim: dims.lower_set,
    }
}

pub fn julia_dims(p: &JuliaParams) -> JuliaDims {
    let (h, pm) = (p.h(), p.pmax_f());
    let deep = h + (h - 1.0) * pm;
    JuliaDims {
        assouad_set: h.max(1.0),
        lower_set: h.min(1.0),
        assouad_measure: deep.max(1.0),
        lower_measure: deep.min(1.0),
        box_measure: deep.max(h),
    }
}

pub fn julia_measure_spectrum(p: &JuliaParams, mode: Mode) -> SpectrumProfile {
    let (h, pm) = (p.h(), p.pmax_f());
    let deep = h + (h - 1.0) * pm;
    let (base, swing) = match (mode, h < 1.0) {
        (Mode::Assouad, true) => (h, 1.0 - h),
        (Mode::Assouad, false) => (deep, 0.0),
        (Mode::Lower, true) => (deep, 0.0),
        (Mode::Lower, false) => (h, 1.0 - h),
    };
    let dims = julia_dims(p);
    SpectrumProfile {
        mode,
        target: Target::Measure,
        base,
        swing,
        rate: pm,
        box_dim: dims.box_measure,
        assouad_dim: dims.assouad_measure,
        lower_dim: dims.lower_measure,
    }
}

pub fn julia_set_spectrum(p: &JuliaParams, mode: Mode) -> SpectrumProfile {
    let h = p.h();
    let swing = match (mode, h < 1.0) {
        (Mode::Assouad, true) | (Mode::Lower, false) => 1.0 - h,
        _ => 0.0,
    };
    let dims = julia_dims(p);
    SpectrumProfile {
        mode,
        target: Target::Set,
        base: h,
        swing,
        rate: p.pmax_f(),
        box_dim: h,
        assouad_dim: dims.assouad_set,
        lower_dim: dims.lower_set,
    }
}

/// Interval that any Assouad spectrum value at `theta` must lie in, given
/// the upper box and Assouad dimensions: `[box, min{assouad, box/(1−θ)}]`.
pub fn general_spectrum_bounds(box_upper: f64, assouad: f64, theta: f64) -> Result<(f64, f64)> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "theta must lie in (0,1), got {theta}"
        )));
    }
    Ok((box_upper, assouad.min(box_upper / (1.0 - theta))))
}

/// The Assouad spectrum written purely through box dimension, Assouad
/// dimension and phase transition `rho`.
pub fn phase_transition_form(box_dim: f64, assouad: f64, rho: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "theta must lie in (0,1), got {theta}"
        )));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "phase transition must lie in (0,1], got {rho}"
        )));
    }
    let grow = (1.0 - rho) * theta / ((1.0 - theta) * rho);
    Ok((box_dim + grow * (assouad - box_dim)).min(assouad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp(d: f64, a: u32, b: u32) -> KleinianParams {
        KleinianParams::new(d, a, b).unwrap()
    }

    fn jp(h: f64, p: u32) -> JuliaParams {
        JuliaParams::new(h, 1, p).unwrap()
    }

    #[test]
    fn kleinian_dimension_values() {
        let d = kleinian_dims(&kp(1.9, 1, 1));
        assert!((d.assouad_measure - 2.8).abs() < 1e-12);
        assert!((d.assouad_set - 1.9).abs() < 1e-12);
        let d = kleinian_dims(&kp(0.6, 1, 1));
        assert_eq!(d.assouad_set, 1.0);
        assert!((d.lower_set - 0.6).abs() < 1e-12);
        assert!((d.lower_measure - 0.2).abs() < 1e-12);
        let d = kleinian_dims(&kp(1.0, 1, 1));
        for v in [
            d.assouad_set,
            d.lower_set,
            d.assouad_measure,
            d.lower_measure,
        ] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn measure_box() {
        assert!((kleinian_measure_box(&kp(0.6, 1, 1)) - 0.6).abs() < 1e-12);
        assert!((kleinian_measure_box(&kp(1.7, 1, 2)) - 2.4).abs() < 1e-12);
        assert_eq!(kleinian_measure_box(&kp(2.0, 2, 2)), 2.0);
    }

    #[test]
    fn kleinian_measure_branches() {
        let a = kleinian_measure_spectrum(&kp(0.6, 1, 1), Mode::Assouad);
        assert!((a.value(0.25).unwrap() - (0.6 + 0.4 / 3.0)).abs() < 1e-12);
        assert_eq!(a.phase_transition(), Some(0.5));

        let l = kleinian_measure_spectrum(&kp(1.7, 1, 2), Mode::Lower);
        for theta in [0.5, 0.6, 0.9] {
            assert!((l.value(theta).unwrap() - 1.0).abs() < 1e-12);
        }

        let c = kleinian_measure_spectrum(&kp(1.6, 1, 2), Mode::Assouad);
        assert!(c.is_constant());
        assert!((c.value(0.3).unwrap() - 2.2).abs() < 1e-12);
        assert_eq!(c.phase_transition(), None);
    }

    #[test]
    fn kleinian_set_branches() {
        let a = kleinian_set_spectrum(&kp(0.6, 1, 1), Mode::Assouad);
        assert!((a.value(0.5).unwrap() - 1.0).abs() < 1e-12);
        let l = kleinian_set_spectrum(&kp(1.9, 1, 1), Mode::Lower);
        assert!((l.value(0.25).unwrap() - 1.6).abs() < 1e-12);
        let c = kleinian_set_spectrum(&kp(2.5, 1, 2), Mode::Assouad);
        assert!(c.is_constant());
        assert_eq!(c.value(0.7).unwrap(), 2.5);
    }

    #[test]
    fn julia_values() {
        let d = julia_dims(&jp(1.4, 4));
        assert!((d.assouad_measure - 3.0).abs() < 1e-12);
        assert!((d.assouad_set - 1.4).abs() < 1e-12);
        let d = julia_dims(&jp(0.7, 2));
        assert!((d.lower_measure - 0.1).abs() < 1e-12);
        let d = julia_dims(&jp(1.0, 3));
        for v in [
            d.assouad_set,
            d.lower_set,
            d.assouad_measure,
            d.lower_measure,
        ] {
            assert_eq!(v, 1.0);
        }

        let a = julia_set_spectrum(&jp(0.7, 2), Mode::Assouad);
        assert!((a.value(1.0 / 3.0).unwrap() - 1.0).abs() < 1e-12);
        let l = julia_set_spectrum(&jp(1.4, 4), Mode::Lower);
        assert!((l.value(0.1).unwrap() - (1.4 - 0.4 * 0.4 / 0.9)).abs() < 1e-12);
        assert!(julia_set_spectrum(&jp(0.8, 1), Mode::Lower).is_constant());
        assert!(julia_set_spectrum(&jp(1.3, 1), Mode::Assouad).is_constant());
    }

    #[test]
    fn bounds_and_phase_form() {
        let (lo, hi) = general_spectrum_bounds(0.6, 1.0, 0.5).unwrap();
        assert_eq!((lo, hi), (0.6, 1.0));
        let v = phase_transition_form(0.6, 1.0, 0.5, 0.25).unwrap();
        assert!((v - (0.6 + 0.4 / 3.0)).abs() < 1e-12);
        let v = phase_transition_form(0.7, 1.0, 1.0 / 3.0, 0.25).unwrap();
        assert!((v - 0.9).abs() < 1e-12);
        assert_eq!(
            phase_transition_form(0.7, 1.0, 1.0 / 3.0, 0.5).unwrap(),
            1.0
        );
        assert!(phase_transition_form(0.7, 1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn theta_endpoints_rejected() {
        let a = kleinian_set_spectrum(&kp(0.6, 1, 1), Mode::Assouad);
        assert!(a.value(0.0).is_err());
        assert!(a.value(1.0).is_err());
        assert!(general_spectrum_bounds(1.0, 1.0, 1.0).is_err());
    }
}
