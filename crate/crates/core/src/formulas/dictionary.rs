//! Checks of the places where the Kleinian/Julia correspondence breaks.

use serde::Serialize;

use super::params::{JuliaParams, KleinianParams};
use super::spectra::{
    julia_dims, julia_measure_spectrum, julia_set_spectrum, kleinian_dims,
    kleinian_measure_spectrum, kleinian_set_spectrum, Mode,
};

/// Ordering of lower (L), Hausdorff (H) and Assouad (A) dimension of a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Configuration {
    #[serde(rename = "L=H=A")]
    AllEqual,
    #[serde(rename = "L=H<A")]
    LowerEqualsHausdorff,
    #[serde(rename = "L<H=A")]
    HausdorffEqualsAssouad,
    #[serde(rename = "L<H<A")]
    AllDistinct,
}

impl Configuration {
    pub fn classify(lower: f64, hausdorff: f64, assouad: f64) -> Self {
        let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        match (eq(lower, hausdorff), eq(hausdorff, assouad)) {
            (true, true) => Configuration::AllEqual,
            (true, false) => Configuration::LowerEqualsHausdorff,
            (false, true) => Configuration::HausdorffEqualsAssouad,
            (false, false) => Configuration::AllDistinct,
        }
    }

    pub const ALL: [Configuration; 4] = [
        Configuration::AllEqual,
        Configuration::LowerEqualsHausdorff,
        Configuration::HausdorffEqualsAssouad,
        Configuration::AllDistinct,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Fuchsian,
    Kleinian,
    Julia,
}

impl Setting {
    /// Whether the configuration can occur in this setting.
    pub fn allows(self, c: Configuration) -> bool {
        match self {
            Setting::Fuchsian => matches!(
                c,
                Configuration::AllEqual | Configuration::LowerEqualsHausdorff
            ),
            Setting::Kleinian => true,
            Setting::Julia => c != Configuration::AllDistinct,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConfigurationCounts {
    #[serde(rename = "L=H=A")]
    pub all_equal: usize,
    #[serde(rename = "L=H<A")]
    pub lower_equals_hausdorff: usize,
    #[serde(rename = "L<H=A")]
    pub hausdorff_equals_assouad: usize,
    #[serde(rename = "L<H<A")]
    pub all_distinct: usize,
}

impl ConfigurationCounts {
    fn bump(&mut self, c: Configuration) {
        match c {
            Configuration::AllEqual => self.all_equal += 1,
            Configuration::LowerEqualsHausdorff => self.lower_equals_hausdorff += 1,
            Configuration::HausdorffEqualsAssouad => self.hausdorff_equals_assouad += 1,
            Configuration::AllDistinct => self.all_distinct += 1,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct DictionaryReport {
    pub kleinian_checked: usize,
    pub julia_checked: usize,
    /// Julia tuples with `dim_A J >= 2`.
    pub assouad_full_violations: usize,
    /// Julia tuples with `dim_L J <= p_max/(1+p_max)`.
    pub lower_bound_violations: usize,
    /// Tuples whose (L,H,A) configuration is ruled out for their setting.
    pub forbidden_configurations: usize,
    pub fuchsian: ConfigurationCounts,
    pub kleinian: ConfigurationCounts,
    pub julia: ConfigurationCounts,
    /// Parameter pairs in the `k_min = k_max = p_max = 1` case, δ = h, that were compared.
    pub coincidence_cases: usize,
    /// Of those, how many disagreed anywhere on the θ grid.
    pub coincidence_mismatches: usize,
    pub messages: Vec<String>,
}

impl DictionaryReport {
    pub fn violations(&self) -> usize {
        self.assouad_full_violations
            + self.lower_bound_violations
            + self.forbidden_configurations
            + self.coincidence_mismatches
    }
}

/// Evaluates the dictionary non-entries over the given parameter tuples.
///
/// Kleinian tuples with `k_min = k_max = 1` and `δ ≤ 1` are also classified
/// as Fuchsian. Every pair of a Kleinian tuple with `k_min = k_max = 1` and
/// a Julia tuple with `p_max = 1` and `h = δ` is compared on `theta_grid`.
pub fn sullivan_dictionary_report(
    kleinian: &[KleinianParams],
    julia: &[JuliaParams],
    theta_grid: &[f64],
) -> DictionaryReport {
    let mut report = DictionaryReport {
        kleinian_checked: kleinian.len(),
        julia_checked: julia.len(),
        ..Default::default()
    };

    for p in kleinian {
        let dims = kleinian_dims(p);
        let c = Configuration::classify(dims.lower_set, dims.hausdorff, dims.assouad_set);
        report.kleinian.bump(c);
        if !Setting::Kleinian.allows(c) {
            report.forbidden_configurations += 1;
        }
        if p.k_max() == 1 && p.delta() <= 1.0 {
            report.fuchsian.bump(c);
            if !Setting::Fuchsian.allows(c) {
                report.forbidden_configurations += 1;
                report
                    .messages
                    .push(format!("Fuchsian tuple {p:?} realizes {c:?}"));
            }
        }
    }

    for p in julia {
        let dims = julia_dims(p);
        let floor = f64::from(p.p_max()) / (1.0 + f64::from(p.p_max()));
        if dims.assouad_set >= 2.0 {
            report.assouad_full_violations += 1;
            report.messages.push(format!("dim_A J >= 2 for {p:?}"));
        }
        if dims.lower_set <= floor {
            report.lower_bound_violations += 1;
            report
                .messages
                .push(format!("dim_L J <= p_max/(1+p_max) for {p:?}"));
        }
        let c = Configuration::classify(dims.lower_set, p.h(), dims.assouad_set);
        report.julia.bump(c);
        if !Setting::Julia.allows(c) {
            report.forbidden_configurations += 1;
            report
                .messages
                .push(format!("Julia tuple {p:?} realizes {c:?}"));
        }
    }

    for k in kleinian.iter().filter(|k| k.k_min() == 1 && k.k_max() == 1) {
        let Ok(j) = JuliaParams::new(k.delta(), 1, 1) else {
            continue;
        };
        report.coincidence_cases += 1;
        if !coincides(k, &j, theta_grid) {
            report.coincidence_mismatches += 1;
            report
                .messages
                .push(format!("special case mismatch for delta=h={}", k.delta()));
        }
    }
    for j in julia.iter().filter(|j| j.p_max() == 1) {
        let Ok(k) = KleinianParams::new(j.h(), 1, 1) else {
            continue;
        };
        report.coincidence_cases += 1;
        if !coincides(&k, j, theta_grid) {
            report.coincidence_mismatches += 1;
            report
                .messages
                .push(format!("special case mismatch for delta=h={}", j.h()));
        }
    }
    report
}

fn coincides(k: &KleinianParams, j: &JuliaParams, theta_grid: &[f64]) -> bool {
    let kd = kleinian_dims(k);
    let jd = julia_dims(j);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let dims_agree = close(kd.assouad_set, jd.assouad_set)
        && close(kd.lower_set, jd.lower_set)
        && close(kd.assouad_measure, jd.assouad_measure)
        && close(kd.lower_measure, jd.lower_measure);
    dims_agree
        && [Mode::Assouad, Mode::Lower].into_iter().all(|mode| {
            let pairs = [
                (kleinian_set_spectrum(k, mode), julia_set_spectrum(j, mode)),
                (
                    kleinian_measure_spectrum(k, mode),
                    julia_measure_spectrum(j, mode),
                ),
            ];
            pairs
                .iter()
                .all(|(a, b)| theta_grid.iter().all(|&t| close(a.eval(t), b.eval(t))))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::default_theta_grid;

    #[test]
    fn distinct_ranks_tuple_is_all_distinct() {
        let k = KleinianParams::new(1.7, 1, 2).unwrap();
        let r = sullivan_dictionary_report(&[k], &[], &default_theta_grid());
        assert_eq!(r.kleinian.all_distinct, 1);
        assert_eq!(r.violations(), 0);
    }

    #[test]
    fn julia_configurations() {
        let j = JuliaParams::new(1.4, 1, 4).unwrap();
        let r = sullivan_dictionary_report(&[], &[j], &default_theta_grid());
        assert_eq!(r.julia.hausdorff_equals_assouad, 1);
        let j = JuliaParams::new(0.8, 1, 2).unwrap();
        let r = sullivan_dictionary_report(&[], &[j], &default_theta_grid());
        assert_eq!(r.julia.lower_equals_hausdorff, 1);
    }

    #[test]
    fn rank_one_coincidence() {
        let grid = default_theta_grid();
        let ks: Vec<_> = [0.6, 0.9, 1.0, 1.3, 1.9]
            .iter()
            .map(|&d| KleinianParams::new(d, 1, 1).unwrap())
            .collect();
        let r = sullivan_dictionary_report(&ks, &[], &grid);
        assert_eq!(r.coincidence_cases, 5);
        assert_eq!(r.coincidence_mismatches, 0);
    }

    #[test]
    fn classification() {
        assert_eq!(
            Configuration::classify(1.0, 1.0, 1.0),
            Configuration::AllEqual
        );
        assert_eq!(
            Configuration::classify(0.5, 1.0, 1.5),
            Configuration::AllDistinct
        );
        assert!(!Setting::Julia.allows(Configuration::AllDistinct));
        assert!(!Setting::Fuchsian.allows(Configuration::HausdorffEqualsAssouad));
    }
}
