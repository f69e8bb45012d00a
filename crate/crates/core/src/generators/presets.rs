use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use super::julia::{julia_inverse_iteration, BranchPolicy, JuliaOptions, JuliaPreset};
use super::orbit::apollonian_orbit;
use super::sequences::inverted_lattice;
use crate::{Error, Result};

/// Named cloud generators reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Apollonian,
    Cauliflower,
    Petal2,
    Petal4,
    Zlattice1,
    Zlattice2,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Apollonian,
        Preset::Cauliflower,
        Preset::Petal2,
        Preset::Petal4,
        Preset::Zlattice1,
        Preset::Zlattice2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Apollonian => "apollonian",
            Preset::Cauliflower => "cauliflower",
            Preset::Petal2 => "petal2",
            Preset::Petal4 => "petal4",
            Preset::Zlattice1 => "zlattice1",
            Preset::Zlattice2 => "zlattice2",
        }
    }

    fn julia(self) -> Option<JuliaPreset> {
        match self {
            Preset::Cauliflower => Some(JuliaPreset::Cauliflower),
            Preset::Petal2 => Some(JuliaPreset::Petal { p: 2 }),
            Preset::Petal4 => Some(JuliaPreset::Petal { p: 4 }),
            _ => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Overrides for preset generation; `None` keeps the preset default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PresetOptions {
    /// Word length (orbits).
    pub depth: Option<usize>,
    /// Boundary-projection threshold (orbits).
    pub eps_proj: Option<f64>,
    /// Lattice radius.
    pub n: Option<usize>,
    /// Inverse-iteration steps.
    pub iterations: Option<usize>,
    /// Number of random backward walks.
    pub seeds: Option<usize>,
    pub policy: Option<BranchPolicy>,
    pub resolution: Option<f64>,
    /// Cap on emitted points (default 8 000 000).
    pub cap: Option<usize>,
    pub seed: u64,
}

/// Word-length safety bound; the resolution decides where words stop.
pub const APOLLONIAN_DEPTH: usize = 10_000;
/// Sampling resolution; the default estimator window then reaches dyadic
/// level 12 of the gasket's extent.
pub const APOLLONIAN_EPS: f64 = 5e-5;
pub const DEFAULT_CAP: usize = 8_000_000;
pub const ZLATTICE1_N: usize = 100_000;
pub const ZLATTICE2_N: usize = 300;

#[derive(Debug, Clone)]
pub struct Generated {
    pub cloud: PointCloud,
    /// Set when the point cap stopped generation early.
    pub cap_exceeded: bool,
}

pub fn generate_preset(preset: Preset, opts: &PresetOptions) -> Result<Generated> {
    let cap = opts.cap.unwrap_or(DEFAULT_CAP);
    if let Some(jp) = preset.julia() {
        let defaults = JuliaOptions::default();
        let jo = JuliaOptions {
            iterations: opts.iterations.unwrap_or(defaults.iterations),
            seeds: opts.seeds.unwrap_or(defaults.seeds),
            rng_seed: opts.seed,
            policy: opts.policy.unwrap_or(defaults.policy),
            resolution: opts.resolution.unwrap_or(defaults.resolution),
            cap,
        };
        let cloud = julia_inverse_iteration(jp, &jo)?;
        return Ok(Generated {
            cap_exceeded: cloud.len() >= cap,
            cloud,
        });
    }
    match preset {
        Preset::Apollonian => {
            let out = apollonian_orbit(
                opts.eps_proj.unwrap_or(APOLLONIAN_EPS),
                opts.depth.unwrap_or(APOLLONIAN_DEPTH),
                cap,
            )?;
            Ok(Generated {
                cloud: out.cloud,
                cap_exceeded: out.cap_exceeded,
            })
        }
        Preset::Zlattice1 => Ok(Generated {
            cloud: inverted_lattice(1, opts.n.unwrap_or(ZLATTICE1_N))?,
            cap_exceeded: false,
        }),
        Preset::Zlattice2 => Ok(Generated {
            cloud: inverted_lattice(2, opts.n.unwrap_or(ZLATTICE2_N))?,
            cap_exceeded: false,
        }),
        _ => unreachable!("julia presets handled above"),
    }
}
