use serde::{Deserialize, Serialize};

use crate::formulas::{
    julia_log_phi, julia_log_phi_terminating, sv_global_log_measure, JuliaParams, KleinianParams,
};
use crate::{Error, Result};

/// Shape of the escape function inside one horoball window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowShape {
    /// `ρ = min{T − T_enter, T_exit − T}`: the ray passes through the horoball.
    Tent,
    /// `ρ = T − T_enter` with no exit: the ray ends at the parabolic point.
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoroballWindow {
    pub enter: f64,
    /// `None` for a ramp.
    pub exit: Option<f64>,
    pub rank: u32,
    pub shape: WindowShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    None,
    ParabolicCenter,
    Tent,
    Dragged,
}

/// Escape-function schedule `T ↦ (ρ(T), k(T))` along one geodesic ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawItinerary")]
pub struct HoroballItinerary {
    windows: Vec<HoroballWindow>,
    kind: ProfileKind,
}

#[derive(Deserialize)]
struct RawItinerary {
    windows: Vec<HoroballWindow>,
    kind: ProfileKind,
}

impl TryFrom<RawItinerary> for HoroballItinerary {
    type Error = Error;
    fn try_from(r: RawItinerary) -> Result<Self> {
        Self::new(r.windows, r.kind)
    }
}

impl HoroballItinerary {
    pub fn new(windows: Vec<HoroballWindow>, kind: ProfileKind) -> Result<Self> {
        let mut prev_exit = f64::NEG_INFINITY;
        for (i, w) in windows.iter().enumerate() {
            if !(w.enter >= 0.0) || !w.enter.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "window {i}: entry time must be finite and >= 0"
                )));
            }
            if w.rank == 0 {
                return Err(Error::InvalidParams(format!(
                    "window {i}: rank must be positive"
                )));
            }
            if w.enter < prev_exit {
                return Err(Error::InvalidParams(format!(
                    "window {i} overlaps its predecessor"
                )));
            }
            match (w.shape, w.exit) {
                (WindowShape::Tent, Some(exit)) if exit > w.enter && exit.is_finite() => {
                    prev_exit = exit
                }
                (WindowShape::Tent, _) => {
                    return Err(Error::InvalidParams(format!(
                        "window {i}: tent needs a finite exit after its entry"
                    )))
                }
                (WindowShape::Ramp, None) if i + 1 == windows.len() => prev_exit = f64::INFINITY,
                (WindowShape::Ramp, _) => {
                    return Err(Error::InvalidParams(format!(
                        "window {i}: a ramp has no exit and must come last"
                    )))
                }
            }
        }
        Ok(Self { windows, kind })
    }

    /// Ray that meets no horoball.
    pub fn empty() -> Self {
        Self {
            windows: Vec::new(),
            kind: ProfileKind::None,
        }
    }

    /// Ray ending at a parabolic point: `ρ = T − S` for `T ≥ S`.
    pub fn parabolic_center(s: f64, rank: u32) -> Result<Self> {
        Self::new(
            vec![HoroballWindow {
                enter: s,
                exit: None,
                rank,
                shape: WindowShape::Ramp,
            }],
            ProfileKind::ParabolicCenter,
        )
    }

    /// One pass through a horoball during `[t0, t1]`.
    pub fn tent(t0: f64, t1: f64, rank: u32) -> Result<Self> {
        Self::new(
            vec![HoroballWindow {
                enter: t0,
                exit: Some(t1),
                rank,
                shape: WindowShape::Tent,
            }],
            ProfileKind::Tent,
        )
    }

    /// A pass through a rank-`first` horoball on `[0, b]`, followed by a
    /// ray into a rank-`second` parabolic point entered at `b`.
    pub fn dragged(b: f64, first: u32, second: u32) -> Result<Self> {
        Self::new(
            vec![
                HoroballWindow {
                    enter: 0.0,
                    exit: Some(b),
                    rank: first,
                    shape: WindowShape::Tent,
                },
                HoroballWindow {
                    enter: b,
                    exit: None,
                    rank: second,
                    shape: WindowShape::Ramp,
                },
            ],
            ProfileKind::Dragged,
        )
    }

    pub fn windows(&self) -> &[HoroballWindow] {
        &self.windows
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// `(ρ(T), k(T))`, `(0, 0)` outside every window.
    pub fn escape(&self, t: f64) -> (f64, u32) {
        for w in &self.windows {
            let inside = t >= w.enter && w.exit.is_none_or(|e| t <= e);
            if inside {
                let rho = match (w.shape, w.exit) {
                    (WindowShape::Tent, Some(e)) => (t - w.enter).min(e - t),
                    _ => t - w.enter,
                };
                return (rho, w.rank);
            }
        }
        (0.0, 0)
    }
}

/// Hyperbolic zoom radii `r_1 > r_2 > ⋯ > r_l` stored as depths
/// `u_j = −log r_j`, with the petal number of each window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawZoom")]
pub struct ZoomSequence {
    depths: Vec<f64>,
    petals: Vec<u32>,
    terminating: bool,
}

#[derive(Deserialize)]
struct RawZoom {
    radii: Vec<f64>,
    petals: Vec<u32>,
    #[serde(default)]
    terminating: bool,
}

impl TryFrom<RawZoom> for ZoomSequence {
    type Error = Error;
    fn try_from(r: RawZoom) -> Result<Self> {
        Self::from_radii(&r.radii, r.petals, r.terminating)
    }
}

impl ZoomSequence {
    /// `petals[j]` belongs to the window `[r_{j+1}, r_j]`; a terminating
    /// sequence carries one more petal number for the tail below `r_l`.
    pub fn from_depths(depths: Vec<f64>, petals: Vec<u32>, terminating: bool) -> Result<Self> {
        if depths.is_empty() {
            return Err(Error::InvalidParams(
                "zoom sequence needs at least one radius".into(),
            ));
        }
        if !(depths[0] >= 0.0) {
            return Err(Error::InvalidParams("zoom radii must not exceed 1".into()));
        }
        if depths.iter().any(|u| !u.is_finite()) || depths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(
                "zoom radii must be strictly decreasing".into(),
            ));
        }
        let expected = depths.len() - 1 + usize::from(terminating);
        if petals.len() != expected {
            return Err(Error::InvalidParams(format!(
                "expected {expected} petal numbers, got {}",
                petals.len()
            )));
        }
        if petals.contains(&0) {
            return Err(Error::InvalidParams(
                "petal numbers must be positive".into(),
            ));
        }
        Ok(Self {
            depths,
            petals,
            terminating,
        })
    }

    pub fn from_radii(radii: &[f64], petals: Vec<u32>, terminating: bool) -> Result<Self> {
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidParams("zoom radii must be positive".into()));
        }
        Self::from_depths(radii.iter().map(|r| -r.ln()).collect(), petals, terminating)
    }

    /// `r_j = λ^j` down to depth `max_depth`.
    pub fn geometric(lambda: f64, p: u32, max_depth: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParams(format!(
                "geometric ratio must lie in (0, 1), got {lambda}"
            )));
        }
        let step = -lambda.ln();
        let n = (max_depth / step).ceil() as usize + 1;
        let depths: Vec<f64> = (1..=n).map(|j| j as f64 * step).collect();
        Self::from_depths(depths, vec![p; n - 1], false)
    }

    /// `r_j = exp(−β^j)` for `j ≥ 0`, down to depth `max_depth`.
    pub fn doubly_exponential(beta: f64, p: u32, max_depth: f64) -> Result<Self> {
        if !(beta > 1.0) {
            return Err(Error::InvalidParams(format!(
                "growth rate must exceed 1, got {beta}"
            )));
        }
        let mut depths = vec![1.0];
        while *depths.last().expect("non-empty") < max_depth {
            let next = depths.last().expect("non-empty") * beta;
            depths.push(next);
        }
        let n = depths.len();
        Self::from_depths(depths, vec![p; n - 1], false)
    }

    /// Pre-parabolic sequence: geometric windows down to `r_l = λ^windows`,
    /// then the terminating tail with petal number `p`.
    pub fn terminating(lambda: f64, windows: usize, p: u32) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) || windows == 0 {
            return Err(Error::InvalidParams(
                "terminating zooms need λ in (0, 1) and at least one window".into(),
            ));
        }
        let step = -lambda.ln();
        let depths: Vec<f64> = (1..=windows).map(|j| j as f64 * step).collect();
        Self::from_depths(depths, vec![p; windows], true)
    }

    /// A single long excursion near a parabolic point: `r_1 = 1`, `r_2 = e^{−U}`.
    pub fn excursion(depth: f64, p: u32) -> Result<Self> {
        Self::from_depths(vec![0.0, depth], vec![p], false)
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn radii(&self) -> Vec<f64> {
        self.depths.iter().map(|u| (-u).exp()).collect()
    }

    pub fn petals(&self) -> &[u32] {
        &self.petals
    }

    pub fn is_terminating(&self) -> bool {
        self.terminating
    }

    /// Deepest depth at which the sequence determines `φ`.
    pub fn max_depth(&self) -> f64 {
        if self.terminating {
            f64::INFINITY
        } else {
            *self.depths.last().expect("non-empty")
        }
    }

    /// `log φ` at depth `u = −log r`.
    pub fn log_phi(&self, h: f64, u: f64) -> Result<f64> {
        let d = &self.depths;
        if u <= d[0] {
            return Ok(0.0);
        }
        let last = *d.last().expect("non-empty");
        if u > last {
            return if self.terminating {
                julia_log_phi_terminating(
                    h,
                    *self.petals.last().expect("tail petal"),
                    (-u).exp(),
                    (-last).exp(),
                )
                .or_else(|_| {
                    Ok(-(h - 1.0)
                        * f64::from(*self.petals.last().expect("tail petal"))
                        * (u - last))
                })
            } else {
                Err(Error::Oracle(format!(
                    "depth {u} beyond the last zoom radius (depth {last})"
                )))
            };
        }
        let j = d.partition_point(|&x| x < u) - 1;
        let (uj, un) = (d[j], d[j + 1]);
        let p = self.petals[j];
        let (r, rj, rn) = ((-u).exp(), (-uj).exp(), (-un).exp());
        if rn > 0.0 && r > 0.0 {
            julia_log_phi(h, p, r.clamp(rn, rj), rj, rn)
        } else {
            // Radii below the smallest positive double: same formula in depths.
            let threshold = uj + (un - uj) / (1.0 + f64::from(p));
            Ok(if u <= threshold {
                -(h - 1.0) * f64::from(p) * (u - uj)
            } else {
                (h - 1.0) * (u - un)
            })
        }
    }
}

/// Kind of measure behind an oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    SyntheticKleinian,
    SyntheticJulia,
    PowerLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TagProfile {
    Horoball(HoroballItinerary),
    Zoom(ZoomSequence),
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleTag {
    pub name: String,
    pub profile: TagProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum OracleParams {
    Kleinian(KleinianParams),
    Julia(JuliaParams),
    Power(f64),
}

/// `(tag, r) ↦ mass` where tags stand for centres through their geometric
/// itineraries. Masses are evaluated in log form from the depth
/// `T = −log r`, so arbitrarily small radii are supported.
#[derive(Debug, Clone)]
pub struct MeasureOracle {
    kind: OracleKind,
    params: OracleParams,
    tags: Vec<OracleTag>,
}

impl MeasureOracle {
    /// Realises `e^{−Tδ} e^{−ρ(T)(δ − k(T))}` along each itinerary.
    pub fn synthetic_kleinian(
        params: KleinianParams,
        tags: Vec<(String, HoroballItinerary)>,
    ) -> Result<Self> {
        let (d, kmin, kmax) = (params.delta(), params.k_min(), params.k_max());
        for (name, it) in &tags {
            for w in it.windows() {
                if w.rank < kmin || w.rank > kmax {
                    return Err(Error::InvalidParams(format!(
                        "tag {name}: rank {} outside [{kmin}, {kmax}]",
                        w.rank
                    )));
                }
                // d log m / dT = −δ − ρ'(δ − k) must be <= 0 on each linear piece.
                let k = f64::from(w.rank);
                let slopes: &[f64] = match w.shape {
                    WindowShape::Tent => &[1.0, -1.0],
                    WindowShape::Ramp => &[1.0],
                };
                if slopes.iter().any(|s| -d - s * (d - k) > 1e-12) {
                    return Err(Error::InvalidParams(format!(
                        "tag {name}: itinerary makes the mass decrease in r"
                    )));
                }
            }
        }
        Self::build(
            OracleKind::SyntheticKleinian,
            OracleParams::Kleinian(params),
            tags.into_iter().map(|(n, i)| (n, TagProfile::Horoball(i))),
        )
    }

    /// Realises `r^h φ(ξ, r)` along each zoom sequence.
    pub fn synthetic_julia(params: JuliaParams, tags: Vec<(String, ZoomSequence)>) -> Result<Self> {
        for (name, z) in &tags {
            if let Some(p) = z
                .petals()
                .iter()
                .find(|&&p| p < params.p_min() || p > params.p_max())
            {
                return Err(Error::InvalidParams(format!(
                    "tag {name}: petal number {p} outside [{}, {}]",
                    params.p_min(),
                    params.p_max()
                )));
            }
        }
        Self::build(
            OracleKind::SyntheticJulia,
            OracleParams::Julia(params),
            tags.into_iter().map(|(n, z)| (n, TagProfile::Zoom(z))),
        )
    }

    /// `mass(r) = r^s` (single tag).
    pub fn power_law(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidParams(format!(
                "exponent must be positive, got {exponent}"
            )));
        }
        Self::build(
            OracleKind::PowerLaw,
            OracleParams::Power(exponent),
            std::iter::once(("power".to_string(), TagProfile::Power)),
        )
    }

    fn build(
        kind: OracleKind,
        params: OracleParams,
        tags: impl Iterator<Item = (String, TagProfile)>,
    ) -> Result<Self> {
        let tags: Vec<OracleTag> = tags
            .map(|(name, profile)| OracleTag { name, profile })
            .collect();
        if tags.is_empty() {
            return Err(Error::InvalidParams("oracle needs at least one tag".into()));
        }
        Ok(Self { kind, params, tags })
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn tags(&self) -> &[OracleTag] {
        &self.tags
    }

    pub fn kleinian_params(&self) -> Option<KleinianParams> {
        match self.params {
            OracleParams::Kleinian(p) => Some(p),
            _ => None,
        }
    }

    pub fn julia_params(&self) -> Option<JuliaParams> {
        match self.params {
            OracleParams::Julia(p) => Some(p),
            _ => None,
        }
    }

    /// Largest depth at which `tag` is defined.
    pub fn max_depth(&self, tag: usize) -> f64 {
        match &self.tags[tag].profile {
            TagProfile::Zoom(z) => z.max_depth(),
            _ => f64::INFINITY,
        }
    }

    /// `log mass(tag, e^{−depth})`, clamped to `<= 0`.
    pub fn log_mass_at_depth(&self, tag: usize, depth: f64) -> Result<f64> {
        let t = self
            .tags
            .get(tag)
            .ok_or_else(|| Error::Oracle(format!("unknown tag {tag}")))?;
        if depth.is_nan() {
            return Err(Error::Oracle("depth is NaN".into()));
        }
        if depth <= 0.0 {
            return Ok(0.0);
        }
        let v = match (&t.profile, self.params) {
            (TagProfile::Horoball(it), OracleParams::Kleinian(p)) => {
                let (rho, k) = it.escape(depth);
                sv_global_log_measure(p.delta(), k, depth, rho)
            }
            (TagProfile::Zoom(z), OracleParams::Julia(p)) => {
                -p.h() * depth + z.log_phi(p.h(), depth)?
            }
            (TagProfile::Power, OracleParams::Power(s)) => -s * depth,
            _ => {
                return Err(Error::Oracle(
                    "tag profile does not match the oracle kind".into(),
                ))
            }
        };
        if !v.is_finite() {
            return Err(Error::Oracle(format!(
                "non-finite log mass at depth {depth}"
            )));
        }
        Ok(v.min(0.0))
    }

    pub fn log_mass(&self, tag: usize, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Oracle(format!("radius must be positive, got {r}")));
        }
        self.log_mass_at_depth(tag, -r.ln())
    }

    pub fn mass(&self, tag: usize, r: f64) -> Result<f64> {
        let m = self.log_mass(tag, r)?.exp();
        if m == 0.0 {
            return Err(Error::Oracle(format!(
                "mass underflows at r = {r}; use log_mass"
            )));
        }
        Ok(m)
    }

    /// Checks `mass(·, r)` is non-decreasing in `r` over `points` log-spaced
    /// depths in `(0, max_depth]` for every tag.
    pub fn check_monotone(&self, max_depth: f64, points: usize) -> Result<()> {
        for tag in 0..self.tags.len() {
            let top = max_depth.min(self.max_depth(tag));
            let mut prev = 0.0f64;
            for i in 0..points {
                let u = top * (i as f64 + 1.0) / points as f64;
                let v = self.log_mass_at_depth(tag, u)?;
                if v > prev + 1e-9 * (1.0 + prev.abs()) {
                    return Err(Error::Oracle(format!(
                        "tag {} mass increases as r decreases at depth {u}",
                        self.tags[tag].name
                    )));
                }
                prev = v;
            }
        }
        Ok(())
    }
}

/// Itineraries realising the extremal configurations for every branch of
/// the measure spectra: a free ray, parabolic centres of the extreme ranks,
/// tents of the extreme ranks, and dragged profiles in both rank orders.
pub fn kleinian_preset_tags(params: &KleinianParams) -> Vec<(String, HoroballItinerary)> {
    let (kmin, kmax) = (params.k_min(), params.k_max());
    let mut tags = vec![("free".to_string(), HoroballItinerary::empty())];
    for (label, k) in [("kmin", kmin), ("kmax", kmax)] {
        for s in [0.0, 5.0] {
            tags.push((
                format!("parabolic-{label}-s{s}"),
                HoroballItinerary::parabolic_center(s, k).expect("valid"),
            ));
        }
        for b in [10.0, 100.0] {
            tags.push((
                format!("tent-{label}-b{b}"),
                HoroballItinerary::tent(0.0, b, k).expect("valid"),
            ));
        }
    }
    for b in [10.0, 100.0] {
        tags.push((
            format!("dragged-down-b{b}"),
            HoroballItinerary::dragged(b, kmax, kmin).expect("valid"),
        ));
        tags.push((
            format!("dragged-up-b{b}"),
            HoroballItinerary::dragged(b, kmin, kmax).expect("valid"),
        ));
    }
    tags
}

/// Depth down to which Julia preset zoom sequences are generated.
pub const JULIA_PRESET_DEPTH: f64 = 600.0;

/// Zoom presets: geometric (λ = 0.5, 0.1), doubly exponential (β = 1.5, 2),
/// terminating, and a single long excursion starting at `r = 1`, all with
/// the maximal petal number.
pub fn julia_preset_tags(params: &JuliaParams) -> Vec<(String, ZoomSequence)> {
    let p = params.p_max();
    let depth = JULIA_PRESET_DEPTH;
    vec![
        (
            "geometric-0.5".into(),
            ZoomSequence::geometric(0.5, p, depth).expect("valid"),
        ),
        (
            "geometric-0.1".into(),
            ZoomSequence::geometric(0.1, p, depth).expect("valid"),
        ),
        (
            "doubly-exponential-1.5".into(),
            ZoomSequence::doubly_exponential(1.5, p, depth).expect("valid"),
        ),
        (
            "doubly-exponential-2".into(),
            ZoomSequence::doubly_exponential(2.0, p, depth).expect("valid"),
        ),
        (
            "terminating".into(),
            ZoomSequence::terminating(0.5, 8, p).expect("valid"),
        ),
        (
            "excursion".into(),
            ZoomSequence::excursion(0.5 * depth, p).expect("valid"),
        ),
    ]
}
