use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, FORMULA_TOLERANCE, ORACLE_TOLERANCE, SCHEMA};
use super::sweep::parameter_sweep;
use crate::estimators::{
    assouad_spectrum_estimate, measure_spectrum_estimate, DepthGrid, EstimatorOptions, GridIndex,
};
use crate::formulas::{
    default_theta_grid, general_spectrum_bounds, julia_dims, julia_log_phi, julia_phi_threshold,
    kleinian_dims, kleinian_measure_box, phase_transition_form, sullivan_dictionary_report,
    JuliaParams, KleinianParams, Mode, Params, Target,
};
use crate::fsutil::write_atomic;
use crate::generators::{
    decreasing_sequence, julia_preset_tags, kleinian_preset_tags, MeasureOracle, PointCloud,
};
use crate::geometry::{
    circle_angle_grid, circle_lemma_check, cross_ratio_distance, escape_function,
    horoball_radius_sequence, hyperbolic_distance, BallPoint, HalfSpaceHoroball, Horoball,
    MobiusMap, SpherePoint,
};
use crate::{Error, Result};

/// Deliberate perturbations of formula constants, used to check that the
/// self-test notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Kleinian phase transition 1/2 → 1/2 + 1e-3.
    KleinianRho,
    /// Julia phase transition 1/(1+p_max) → 1/(1+p_max) + 1e-3.
    JuliaRho,
    /// Expected θ → 0 limit shifted by 1e-9.
    BoxLimit,
}

impl FromStr for Mutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kleinian-rho" => Ok(Mutation::KleinianRho),
            "julia-rho" => Ok(Mutation::JuliaRho),
            "box-limit" => Ok(Mutation::BoxLimit),
            _ => Err(Error::InvalidConfig(format!(
                "unknown mutation '{s}' (kleinian-rho, julia-rho, box-limit)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    /// First few failure messages.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub schema: u32,
    pub mutation: Option<Mutation>,
    pub suites: Vec<SuiteResult>,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
    pub runtime_ms: u64,
}

const MAX_MESSAGES: usize = 10;

struct Suite {
    result: SuiteResult,
}

impl Suite {
    fn new(name: &str) -> Self {
        Self {
            result: SuiteResult {
                name: name.into(),
                passed: 0,
                failed: 0,
                failures: Vec::new(),
            },
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if ok {
            self.result.passed += 1;
        } else {
            self.result.failed += 1;
            if self.result.failures.len() < MAX_MESSAGES {
                self.result.failures.push(msg());
            }
        }
    }

    fn close(&mut self, a: f64, b: f64, tol: f64, what: impl FnOnce() -> String) {
        self.check((a - b).abs() <= tol, || format!("{}: {a} vs {b}", what()));
    }

    fn ok<T>(&mut self, r: Result<T>, what: &str) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{what}: {e}"));
                None
            }
        }
    }
}

fn formulas_suite(
    kleinian: &[KleinianParams],
    julia: &[JuliaParams],
    m: Option<Mutation>,
) -> SuiteResult {
    let mut s = Suite::new("formulas");
    let grid = default_theta_grid();
    let shift = if m == Some(Mutation::BoxLimit) {
        1e-9
    } else {
        0.0
    };
    let tol = FORMULA_TOLERANCE;
    let params = kleinian
        .iter()
        .map(|p| Params::Kleinian(*p))
        .chain(julia.iter().map(|p| Params::Julia(*p)));
    for p in params {
        let (assouad, lower, box_set, box_measure, dims) = match p {
            Params::Kleinian(k) => {
                let d = kleinian_dims(&k);
                (
                    d.assouad_set,
                    d.lower_set,
                    k.delta(),
                    kleinian_measure_box(&k),
                    [d.assouad_measure, d.lower_measure],
                )
            }
            Params::Julia(j) => {
                let d = julia_dims(&j);
                (
                    d.assouad_set,
                    d.lower_set,
                    j.h(),
                    d.box_measure,
                    [d.assouad_measure, d.lower_measure],
                )
            }
        };
        let rho = match (p, m) {
            (Params::Kleinian(_), Some(Mutation::KleinianRho)) => 0.5 + 1e-3,
            (Params::Kleinian(_), _) => 0.5,
            (Params::Julia(j), Some(Mutation::JuliaRho)) => {
                1.0 / (1.0 + f64::from(j.p_max())) + 1e-3
            }
            (Params::Julia(j), _) => 1.0 / (1.0 + f64::from(j.p_max())),
        };
        let sa = p.profile(Target::Set, Mode::Assouad);
        let sl = p.profile(Target::Set, Mode::Lower);
        let ma = p.profile(Target::Measure, Mode::Assouad);
        let ml = p.profile(Target::Measure, Mode::Lower);
        s.close(sa.limit_at_one(), assouad, tol, || {
            format!("{p:?} set-assouad θ→1")
        });
        s.close(sl.limit_at_one(), lower, tol, || {
            format!("{p:?} set-lower θ→1")
        });
        s.close(ma.limit_at_one(), dims[0], tol, || {
            format!("{p:?} measure-assouad θ→1")
        });
        s.close(ml.limit_at_one(), dims[1], tol, || {
            format!("{p:?} measure-lower θ→1")
        });
        s.close(sa.limit_at_zero(), box_set + shift, tol, || {
            format!("{p:?} set-assouad θ→0")
        });
        s.close(ma.limit_at_zero(), box_measure + shift, tol, || {
            format!("{p:?} measure-assouad θ→0")
        });
        if !sa.is_constant() {
            s.check(rho > 1.0 - box_set / assouad, || {
                format!("{p:?}: ρ_pt not above 1 − box/assouad")
            });
        }
        for &t in &grid {
            let v = [sa, sl, ma, ml].map(|q| q.value(t).unwrap_or(f64::NAN));
            if let Some(form) = s.ok(
                phase_transition_form(box_set, assouad, rho, t),
                "phase-transition form",
            ) {
                s.close(v[0], form, tol, || {
                    format!("{p:?} θ={t} phase-transition form")
                });
            }
            s.check(
                v[3] <= v[1] + tol && v[1] <= v[0] + tol && v[0] <= v[2] + tol,
                || format!("{p:?} θ={t} ordering {v:?}"),
            );
            if let Some((lo, hi)) = s.ok(
                general_spectrum_bounds(box_set, assouad, t),
                "general bounds",
            ) {
                s.check(v[0] >= lo - tol && v[0] <= hi + tol, || {
                    format!("{p:?} θ={t} outside [{lo}, {hi}]")
                });
            }
        }
    }
    s.result
}

fn reference_curves_suite() -> SuiteResult {
    let mut s = Suite::new("reference-curves");
    let tol = FORMULA_TOLERANCE;
    let k06 = Params::Kleinian(KleinianParams::new(0.6, 1, 1).expect("valid"));
    let sa = k06.profile(Target::Set, Mode::Assouad);
    for (t, want) in [
        (0.25, 0.6 + 0.4 / 3.0),
        (1.0 / 3.0, 0.8),
        (0.5, 1.0),
        (0.75, 1.0),
    ] {
        s.close(sa.value(t).unwrap_or(f64::NAN), want, tol, || {
            format!("(0.6, 1, 1) set-assouad θ={t}")
        });
    }
    let j14 = Params::Julia(JuliaParams::new(1.4, 1, 4).expect("valid"));
    let sl = j14.profile(Target::Set, Mode::Lower);
    s.close(
        sl.value(0.1).unwrap_or(f64::NAN),
        1.4 - 0.4 * 0.4 / 0.9,
        tol,
        || "(h 1.4, p 4) set-lower θ=0.1".into(),
    );
    for t in [0.2, 0.25, 0.5, 0.75] {
        s.close(sl.value(t).unwrap_or(f64::NAN), 1.0, tol, || {
            format!("(h 1.4, p 4) set-lower θ={t}")
        });
    }
    let k17 = Params::Kleinian(KleinianParams::new(1.7, 1, 2).expect("valid"));
    let ma = k17.profile(Target::Measure, Mode::Assouad);
    let sl = k17.profile(Target::Set, Mode::Lower);
    for t in [0.25, 1.0 / 3.0, 0.5, 0.75] {
        s.close(ma.value(t).unwrap_or(f64::NAN), 2.4, tol, || {
            format!("(1.7, 1, 2) measure-assouad θ={t}")
        });
    }
    for t in [0.5, 0.75] {
        s.close(sl.value(t).unwrap_or(f64::NAN), 1.0, tol, || {
            format!("(1.7, 1, 2) set-lower θ={t}")
        });
    }
    s.result
}

fn dictionary_suite(kleinian: &[KleinianParams], julia: &[JuliaParams]) -> SuiteResult {
    let mut s = Suite::new("dictionary");
    let rep = sullivan_dictionary_report(kleinian, julia, &default_theta_grid());
    s.check(rep.violations() == 0, || {
        format!("{} violations: {:?}", rep.violations(), rep.messages)
    });
    s.check(rep.julia.all_distinct == 0, || {
        "a Julia tuple realizes L < H < A".into()
    });
    let witness = KleinianParams::new(1.7, 1, 2).expect("valid");
    let one = sullivan_dictionary_report(&[witness], &[], &default_theta_grid());
    s.check(one.kleinian.all_distinct == 1, || {
        "(1.7, 1, 2) does not realize L < H < A".into()
    });
    s.result
}

fn geometry_suite() -> SuiteResult {
    let mut s = Suite::new("geometry");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let point = |rng: &mut ChaCha8Rng| loop {
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-0.95..0.95)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < 0.9 {
            return BallPoint::new(v).expect("inside the ball");
        }
    };
    for _ in 0..1000 {
        let (p, q) = (point(&mut rng), point(&mut rng));
        if let Some(c) = s.ok(cross_ratio_distance(&p, &q), "cross ratio") {
            s.close(c, hyperbolic_distance(&p, &q), 1e-6, || {
                "cross ratio vs distance".into()
            });
        }
    }
    for r in [0.1, 1.0, 10.0] {
        if let Some(rep) = s.ok(
            circle_lemma_check(r, &circle_angle_grid(200)),
            "circle lemma",
        ) {
            s.check(rep.all_hold, || format!("circle lemma fails for R={r}"));
        }
    }
    let h = MobiusMap::from_real(2.0, 1.0, 1.0, 1.0).expect("invertible");
    let f = MobiusMap::translation(Complex64::new(1.0, 0.0)).conjugate_by(&h);
    let seed = HalfSpaceHoroball::new(Complex64::new(0.0, 0.0).into(), 0.5)
        .expect("valid")
        .image(&h);
    if let Some(seq) = s.ok(horoball_radius_sequence(&f, &seed, 1000), "radius sequence") {
        let (lo, hi) = seq.bracket(10);
        s.check(seq.within(50.0, 10), || {
            format!("radius bracket [{lo}, {hi}] outside [1/50, 50]")
        });
    }
    if let Some(p) = s.ok(SpherePoint::project(&[0.6, 0.8, 0.0]), "sphere point") {
        if let Some(ball) = s.ok(Horoball::new(p.clone(), 0.3, 1), "horoball") {
            for t in [20.0, 30.0, 50.0] {
                if let Some(e) = s.ok(
                    escape_function(&p, t, std::slice::from_ref(&ball)),
                    "escape",
                ) {
                    s.check(e.rho / t >= 0.9, || {
                        format!("escape ρ/T = {} at T={t}", e.rho / t)
                    });
                }
            }
        }
    }
    s.result
}

fn estimators_suite() -> SuiteResult {
    let mut s = Suite::new("estimators");
    let Some(cloud) = s.ok(decreasing_sequence(1.0, 100_000), "sequence") else {
        return s.result;
    };
    let Some(index) = s.ok(GridIndex::new(&cloud), "grid") else {
        return s.result;
    };
    let opts = EstimatorOptions::default();
    for (t, want) in [(0.3, 1.0 / 1.4), (0.5, 1.0)] {
        if let Some(r) = s.ok(assouad_spectrum_estimate(&index, t, &opts), "spectrum") {
            s.close(r.value, want, 0.1, || {
                format!("{{1/n}} assouad spectrum θ={t}")
            });
        }
    }
    s.result
}

fn oracles_suite() -> SuiteResult {
    let mut s = Suite::new("oracles");
    let k = KleinianParams::new(1.2, 1, 2).expect("valid");
    let j = JuliaParams::new(0.9, 1, 2).expect("valid");
    let oracles = [
        (
            Params::Kleinian(k),
            MeasureOracle::synthetic_kleinian(k, kleinian_preset_tags(&k)),
        ),
        (
            Params::Julia(j),
            MeasureOracle::synthetic_julia(j, julia_preset_tags(&j)),
        ),
    ];
    for (params, oracle) in oracles {
        let Some(oracle) = s.ok(oracle, "oracle") else {
            continue;
        };
        let grid = DepthGrid::for_oracle(&oracle);
        for mode in [Mode::Assouad, Mode::Lower] {
            let profile = params.profile(Target::Measure, mode);
            for t in [0.2, 0.5, 0.8] {
                if let Some(r) = s.ok(
                    measure_spectrum_estimate(&oracle, t, None, &grid, mode),
                    "measure estimate",
                ) {
                    let want = profile.value(t).unwrap_or(f64::NAN);
                    s.close(r.value, want, ORACLE_TOLERANCE, || {
                        format!("{params:?} {mode:?} θ={t}")
                    });
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let p: u32 = rng.random_range(1..=9);
        let h: f64 = rng.random_range(0.95..1.95);
        let r_j: f64 = rng.random_range(1e-3..1.0);
        let r_next = r_j * rng.random_range(1e-6..0.5);
        let tau = julia_phi_threshold(p, r_j, r_next);
        let above = julia_log_phi(h, p, (tau * (1.0 + 1e-13)).min(r_j), r_j, r_next);
        let below = julia_log_phi(h, p, (tau * (1.0 - 1e-13)).max(r_next), r_j, r_next);
        if let (Some(a), Some(b)) = (s.ok(above, "φ above"), s.ok(below, "φ below")) {
            s.close(a, b, 1e-9, || format!("φ continuity p={p} h={h}"));
        }
    }
    s.result
}

fn io_suite() -> SuiteResult {
    let mut s = Suite::new("io");
    let Some(cloud) = s.ok(decreasing_sequence(0.5, 500), "sequence") else {
        return s.result;
    };
    if let Some(bytes) = s.ok(cloud.to_csv_bytes(), "csv write") {
        if let Some(back) = s.ok(PointCloud::from_csv_reader(bytes.as_slice()), "csv read") {
            s.check(back == cloud, || "CSV round trip changed the cloud".into());
        }
    }
    if let Some(back) = s.ok(
        PointCloud::from_binary_bytes(&cloud.to_binary_bytes()),
        "binary read",
    ) {
        s.check(back == cloud, || {
            "binary round trip changed the cloud".into()
        });
    }
    s.result
}

/// Runs every suite at reduced scale.
pub fn run_selftest(mutation: Option<Mutation>) -> SelftestReport {
    let start = Instant::now();
    let (kleinian, julia) = parameter_sweep(1000, 1);
    let suites = vec![
        formulas_suite(&kleinian, &julia, mutation),
        reference_curves_suite(),
        dictionary_suite(&kleinian, &julia),
        geometry_suite(),
        estimators_suite(),
        oracles_suite(),
        io_suite(),
    ];
    let passed = suites.iter().map(|s| s.passed).sum();
    let failed: usize = suites.iter().map(|s| s.failed).sum();
    SelftestReport {
        schema: SCHEMA,
        mutation,
        suites,
        passed,
        failed,
        all_pass: failed == 0,
        runtime_ms: start.elapsed().as_millis() as u64,
    }
}

/// [`run_selftest`], then writes `selftest.json` into the output directory.
pub fn cmd_selftest(cfg: &RunConfig, mutation: Option<Mutation>) -> Result<SelftestReport> {
    let report = run_selftest(mutation);
    std::fs::create_dir_all(&cfg.output.dir)?;
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    write_atomic(&cfg.output.selftest_json(), &bytes)?;
    Ok(report)
}
