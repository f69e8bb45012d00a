use std::collections::HashMap;

use crate::{Error, Result};

/// Finite point set in `R^d` (`1 <= d <= 3`) with a recorded resolution.
///
/// Points are stored flat (`dim` coordinates per point). `special` lists
/// indices of designated points (parabolic points, preimages, the lattice
/// origin) that estimators always include among their centres.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    eps_min: f64,
    provenance: String,
    special: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PointCloud {
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        eps_min: f64,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParams(format!(
                "cloud dimension must be 1..=3, got {dim}"
            )));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidParams(
                "coordinate count is not a multiple of the dimension".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("non-finite coordinate".into()));
        }
        if !(eps_min > 0.0) || !eps_min.is_finite() {
            return Err(Error::InvalidParams(format!(
                "resolution must be positive, got {eps_min}"
            )));
        }
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if coords.is_empty() {
            lo.fill(0.0);
            hi.fill(0.0);
        }
        Ok(Self {
            dim,
            coords,
            eps_min,
            provenance: provenance.into(),
            special: Vec::new(),
            lo,
            hi,
        })
    }

    pub fn with_special(mut self, special: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = special.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidParams(format!(
                "special index {bad} out of range"
            )));
        }
        self.special = special;
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn special(&self) -> &[usize] {
        &self.special
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bbox(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    /// Largest side of the bounding box.
    pub fn extent(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max)
    }

    /// Image under `x ↦ scale·x + shift`; the resolution scales with it.
    pub fn transformed(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        if !(scale > 0.0) || shift.len() != self.dim {
            return Err(Error::InvalidParams(
                "transform needs a positive scale and a matching shift".into(),
            ));
        }
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(shift).map(|(x, s)| scale * x + s))
            .collect();
        Self::new(
            self.dim,
            coords,
            self.eps_min * scale,
            self.provenance.clone(),
        )?
        .with_special(self.special.clone())
    }

    /// Concatenation of two clouds of the same dimension.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidParams(
                "cannot join clouds of different dimension".into(),
            ));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let special = self
            .special
            .iter()
            .copied()
            .chain(other.special.iter().map(|i| i + self.len()))
            .collect();
        Self::new(
            self.dim,
            coords,
            self.eps_min.min(other.eps_min),
            format!("{} + {}", self.provenance, other.provenance),
        )?
        .with_special(special)
    }

    /// Nearest-neighbour distance quantile (`q` in `[0, 1]`).
    pub fn nn_quantile(&self, q: f64) -> Option<f64> {
        nn_quantile(self.dim, &self.coords, q)
    }
}

type Cell = [i64; 3];

fn cell_of(p: &[f64], h: f64) -> Cell {
    let mut c = [0i64; 3];
    for (k, x) in p.iter().enumerate() {
        c[k] = (x / h).floor() as i64;
    }
    c
}

fn neighbours(c: Cell, dim: usize) -> impl Iterator<Item = Cell> {
    let span = |k: usize| if k < dim { -1..=1 } else { 0..=0 };
    let (r0, r1, r2) = (span(0), span(1), span(2));
    r0.flat_map(move |a| {
        let r2 = r2.clone();
        r1.clone()
            .flat_map(move |b| r2.clone().map(move |d| [c[0] + a, c[1] + b, c[2] + d]))
    })
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Greedy thinning: keeps points in order, dropping any point closer than
/// `radius` to an already kept one. Returns the kept indices.
pub(crate) fn thin(dim: usize, coords: &[f64], radius: f64) -> Vec<usize> {
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    let mut kept = Vec::new();
    let r2 = radius * radius;
    for (i, p) in coords.chunks_exact(dim).enumerate() {
        let c = cell_of(p, radius);
        let clash = neighbours(c, dim).any(|n| {
            grid.get(&n).is_some_and(|v| {
                v.iter()
                    .any(|&j| dist_sq(p, &coords[j * dim..(j + 1) * dim]) < r2)
            })
        });
        if !clash {
            grid.entry(c).or_default().push(i);
            kept.push(i);
        }
    }
    kept
}

/// Nearest-neighbour distances below `h` (`None` for larger ones).
fn nn_within(dim: usize, coords: &[f64], h: f64) -> Vec<Option<f64>> {
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (i, p) in coords.chunks_exact(dim).enumerate() {
        grid.entry(cell_of(p, h)).or_default().push(i);
    }
    coords
        .chunks_exact(dim)
        .enumerate()
        .map(|(i, p)| {
            let mut best = f64::INFINITY;
            for n in neighbours(cell_of(p, h), dim) {
                if let Some(v) = grid.get(&n) {
                    for &j in v {
                        if j != i {
                            best = best.min(dist_sq(p, &coords[j * dim..(j + 1) * dim]));
                        }
                    }
                }
            }
            let d = best.sqrt();
            (d <= h).then_some(d)
        })
        .collect()
}

/// `q`-quantile of nearest-neighbour distances (`None` for fewer than two points).
pub(crate) fn nn_quantile(dim: usize, coords: &[f64], q: f64) -> Option<f64> {
    let n = coords.len() / dim;
    if n < 2 {
        return None;
    }
    let rank = ((q.clamp(0.0, 1.0)) * (n - 1) as f64).floor() as usize;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in coords.chunks_exact(dim) {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    if extent == 0.0 {
        return Some(0.0);
    }
    let mut h = extent / (n as f64).powf(1.0 / dim as f64);
    loop {
        let found = nn_within(dim, coords, h);
        let mut exact: Vec<f64> = found.iter().flatten().copied().collect();
        if exact.len() > rank || h > 2.0 * extent {
            exact.sort_by(f64::total_cmp);
            return exact.get(rank).copied().or_else(|| exact.last().copied());
        }
        h *= 2.0;
    }
}

/// Thins `coords` at the generation resolution, estimates the resolution as
/// the 1st-percentile nearest-neighbour distance, and thins once more at half
/// that value so that distinct points are at least `eps_min/2` apart.
///
/// The first `pinned` points are kept first (they win ties); the returned
/// special list maps them to their new positions.
pub(crate) fn finalize_cloud(
    dim: usize,
    coords: Vec<f64>,
    pinned: usize,
    generation_radius: f64,
    provenance: String,
) -> Result<PointCloud> {
    let keep = thin(dim, &coords, generation_radius);
    let mut thinned = Vec::with_capacity(keep.len() * dim);
    for &i in &keep {
        thinned.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
    }
    let eps = nn_quantile(dim, &thinned, 0.01)
        .unwrap_or(generation_radius)
        .max(generation_radius);
    let keep2 = thin(dim, &thinned, 0.5 * eps);
    let mut out = Vec::with_capacity(keep2.len() * dim);
    for &i in &keep2 {
        out.extend_from_slice(&thinned[i * dim..(i + 1) * dim]);
    }
    let pinned_kept = keep.iter().take_while(|&&i| i < pinned).count();
    let special: Vec<usize> = keep2
        .iter()
        .enumerate()
        .filter(|(_, &i)| i < pinned_kept)
        .map(|(k, _)| k)
        .collect();
    PointCloud::new(dim, out, eps, provenance)?.with_special(special)
}
