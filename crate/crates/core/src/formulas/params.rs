use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of a geometrically finite Kleinian group with parabolics:
/// the Poincaré exponent and the extreme ranks of its parabolic points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKleinian", into = "RawKleinian")]
pub struct KleinianParams {
    delta: f64,
    k_min: u32,
    k_max: u32,
}

#[derive(Serialize, Deserialize)]
struct RawKleinian {
    delta: f64,
    k_min: u32,
    k_max: u32,
}

impl TryFrom<RawKleinian> for KleinianParams {
    type Error = Error;
    fn try_from(raw: RawKleinian) -> Result<Self> {
        KleinianParams::new(raw.delta, raw.k_min, raw.k_max)
    }
}

impl From<KleinianParams> for RawKleinian {
    fn from(p: KleinianParams) -> Self {
        RawKleinian {
            delta: p.delta,
            k_min: p.k_min,
            k_max: p.k_max,
        }
    }
}

impl KleinianParams {
    /// Requires `1 <= k_min <= k_max` and `delta > k_max / 2`.
    pub fn new(delta: f64, k_min: u32, k_max: u32) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "delta must be positive and finite, got {delta}"
            )));
        }
        if k_min == 0 || k_min > k_max {
            return Err(Error::InvalidParams(format!(
                "ranks must satisfy 1 <= k_min <= k_max, got k_min={k_min}, k_max={k_max}"
            )));
        }
        if delta <= f64::from(k_max) / 2.0 {
            return Err(Error::InvalidParams(format!(
                "delta > k_max/2 violated: delta={delta}, k_max={k_max}"
            )));
        }
        Ok(Self {
            delta,
            k_min,
            k_max,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn k_min(&self) -> u32 {
        self.k_min
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub(crate) fn kmin_f(&self) -> f64 {
        f64::from(self.k_min)
    }

    pub(crate) fn kmax_f(&self) -> f64 {
        f64::from(self.k_max)
    }
}

/// Parameters of a parabolic rational map: the Hausdorff dimension `h` of
/// its Julia set and the extreme petal numbers of its parabolic points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJulia", into = "RawJulia")]
pub struct JuliaParams {
    h: f64,
    p_min: u32,
    p_max: u32,
}

#[derive(Serialize, Deserialize)]
struct RawJulia {
    h: f64,
    #[serde(default)]
    p_min: Option<u32>,
    p_max: u32,
}

impl TryFrom<RawJulia> for JuliaParams {
    type Error = Error;
    fn try_from(raw: RawJulia) -> Result<Self> {
        JuliaParams::new(raw.h, raw.p_min.unwrap_or(1), raw.p_max)
    }
}

impl From<JuliaParams> for RawJulia {
    fn from(p: JuliaParams) -> Self {
        RawJulia {
            h: p.h,
            p_min: Some(p.p_min),
            p_max: p.p_max,
        }
    }
}

impl JuliaParams {
    /// Requires `1 <= p_min <= p_max` and `p_max/(1+p_max) < h < 2`.
    pub fn new(h: f64, p_min: u32, p_max: u32) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::InvalidParams(format!("h must be finite, got {h}")));
        }
        if p_min == 0 || p_min > p_max {
            return Err(Error::InvalidParams(format!(
                "petal numbers must satisfy 1 <= p_min <= p_max, got p_min={p_min}, p_max={p_max}"
            )));
        }
        let floor = f64::from(p_max) / (1.0 + f64::from(p_max));
        if h <= floor {
            return Err(Error::InvalidParams(format!(
                "h > p_max/(1+p_max) violated: h={h}, p_max={p_max}"
            )));
        }
        if h >= 2.0 {
            return Err(Error::InvalidParams(format!("h < 2 violated: h={h}")));
        }
        Ok(Self { h, p_min, p_max })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn p_min(&self) -> u32 {
        self.p_min
    }

    pub fn p_max(&self) -> u32 {
        self.p_max
    }

    pub(crate) fn pmax_f(&self) -> f64 {
        f64::from(self.p_max)
    }
}
