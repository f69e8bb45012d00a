use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::generators::PointCloud;
use crate::{Error, Result};

/// Default ratio between the smallest admissible scale and `ε_min`.
pub const DEFAULT_SAFETY: f64 = 8.0;
/// Minimum number of dyadic levels a window must contain.
pub const MIN_LEVELS: usize = 4;
/// Coarsest level used for the covering scale `r` by default: at the
/// three coarsest levels a fractal still fills its bounding box.
pub const DEFAULT_TOP_LEVEL: u32 = 3;
/// Coarsest level used for the outer scale `R` by default: boxes at level 0
/// hold the whole cloud.
pub const DEFAULT_OUTER_LEVEL: u32 = 1;

/// Hierarchical dyadic grid over a point cloud.
///
/// Level `ℓ` has cells of side `root_side·2^{−ℓ}`, anchored at the lower
/// corner of the bounding box; `root_side` is the largest side of the
/// bounding box, so the grid moves with the cloud under similarities. Points are sorted by Morton key at
/// the finest level, so every cell at every level is a contiguous range.
#[derive(Debug)]
pub struct GridIndex {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    root_side: f64,
    max_level: u32,
    eps_min: f64,
    keys: Vec<u64>,
    pos: Vec<u32>,
    coords: Vec<f64>,
    occupied: Vec<usize>,
    starts: Vec<OnceLock<Vec<u32>>>,
    special: Vec<usize>,
}

fn interleave(q: &[u64], bits: u32) -> u64 {
    match q.len() {
        1 => q[0],
        d => {
            let mut key = 0u64;
            for b in (0..bits).rev() {
                for c in q {
                    key = (key << 1) | ((c >> b) & 1);
                }
            }
            debug_assert!(d * bits as usize <= 64);
            key
        }
    }
}

impl GridIndex {
    pub fn new(cloud: &PointCloud) -> Result<Self> {
        let (lo, _) = cloud.bbox();
        let extent = cloud.extent();
        let root_side = if extent > 0.0 { extent } else { 1.0 };
        Self::with_frame(cloud, lo, root_side)
    }

    /// Index on a given frame: grid anchored at `lo` with root cell side
    /// `root_side`, which must cover the cloud.
    pub fn with_frame(cloud: &PointCloud, lo: &[f64], root_side: f64) -> Result<Self> {
        let dim = cloud.dim();
        let n = cloud.len();
        if n == 0 {
            return Err(Error::InvalidParams("cannot index an empty cloud".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidParams("cloud too large to index".into()));
        }
        let (clo, chi) = cloud.bbox();
        if lo.len() != dim || !(root_side > 0.0) {
            return Err(Error::InvalidParams(
                "grid frame does not match the cloud".into(),
            ));
        }
        let slack = 1e-12 * root_side;
        if clo
            .iter()
            .zip(chi)
            .zip(lo)
            .any(|((a, b), l)| *a < *l || *b > l + root_side + slack)
        {
            return Err(Error::InvalidParams(
                "grid frame does not cover the cloud".into(),
            ));
        }
        let (lo, hi) = (lo.to_vec(), chi.to_vec());
        let max_level = (62 / dim).min(62) as u32;
        let cells = (1u64 << max_level) as f64;
        let top = (1u64 << max_level) - 1;
        let quantize = |p: &[f64]| -> Vec<u64> {
            p.iter()
                .zip(&lo)
                .map(|(x, l)| (((x - l) / root_side * cells).floor().max(0.0) as u64).min(top))
                .collect()
        };
        let raw: Vec<u64> = cloud
            .points()
            .map(|p| interleave(&quantize(p), max_level))
            .collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by_key(|&i| raw[i as usize]);
        let keys: Vec<u64> = order.iter().map(|&i| raw[i as usize]).collect();
        let mut pos = vec![0u32; n];
        for (s, &i) in order.iter().enumerate() {
            pos[i as usize] = s as u32;
        }
        let mut coords = Vec::with_capacity(n * dim);
        for &i in &order {
            coords.extend_from_slice(cloud.point(i as usize));
        }
        let occupied = (0..=max_level)
            .map(|l| {
                let shift = dim as u32 * (max_level - l);
                1 + keys
                    .windows(2)
                    .filter(|w| w[0] >> shift != w[1] >> shift)
                    .count()
            })
            .collect();
        Ok(Self {
            dim,
            lo,
            hi,
            root_side,
            max_level,
            eps_min: cloud.eps_min(),
            keys,
            pos,
            coords,
            occupied,
            starts: (0..=max_level).map(|_| OnceLock::new()).collect(),
            special: cloud.special().to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    pub fn root_side(&self) -> f64 {
        self.root_side
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// Grid anchor and upper corner of the cloud's bounding box.
    pub fn bbox(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    /// Indices (into the original cloud) of designated special points.
    pub fn special(&self) -> &[usize] {
        &self.special
    }

    /// Coordinates of original point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        self.sorted_point(self.pos[i] as usize)
    }

    pub fn side(&self, level: u32) -> f64 {
        self.root_side * 2f64.powi(-(level as i32))
    }

    /// Level whose cell side lies in `[r, 2r)`; levels coarser than the root
    /// clamp to 0.
    pub fn level_for(&self, r: f64) -> Result<u32> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Window(format!(
                "scale must be positive and finite, got {r}"
            )));
        }
        let mut l = (self.root_side / r).log2().floor();
        if l < 0.0 {
            return Ok(0);
        }
        while l > 0.0 && self.root_side * 2f64.powf(-l) < r {
            l -= 1.0;
        }
        while self.root_side * 2f64.powf(-(l + 1.0)) >= r {
            l += 1.0;
        }
        if l > f64::from(self.max_level) {
            return Err(Error::Window(format!(
                "scale {r:e} is finer than the grid resolution"
            )));
        }
        Ok(l as u32)
    }

    fn check_resolution(&self, r: f64, safety: f64) -> Result<()> {
        if r < safety * self.eps_min {
            return Err(Error::Window(format!(
                "scale {r:e} is below the resolution {:e} (= {safety} × ε_min)",
                safety * self.eps_min
            )));
        }
        Ok(())
    }

    /// Occupied cells at `level`.
    pub fn occupied_at(&self, level: u32) -> usize {
        self.occupied[level as usize]
    }

    /// Occupied cells at the level with side in `[r, 2r)`.
    pub fn covering_count(&self, r: f64, safety: f64) -> Result<usize> {
        self.check_resolution(r, safety)?;
        Ok(self.occupied_at(self.level_for(r)?))
    }

    /// Cells at the level with side in `[r, 2r)` that contain a point within
    /// distance `big_r` of `x`.
    pub fn local_covering_count(&self, x: &[f64], big_r: f64, r: f64, safety: f64) -> Result<u64> {
        if x.len() != self.dim {
            return Err(Error::InvalidParams(format!(
                "expected a {}-dimensional point",
                self.dim
            )));
        }
        if !(r < big_r) {
            return Err(Error::Window(format!(
                "need r < R, got r = {r:e}, R = {big_r:e}"
            )));
        }
        self.check_resolution(r, safety)?;
        Ok(self.local_count(x, big_r, self.level_for(r)?))
    }

    /// Occupied level-`level` cells inside the level-`parent` cell that
    /// contains original point `i`.
    pub fn cell_count(&self, i: usize, parent: u32, level: u32) -> u64 {
        let s = self.pos[i] as usize;
        let shift = self.shift(parent.min(level));
        let prefix = self.keys[s] >> shift;
        let a = self.keys.partition_point(|&k| k >> shift < prefix);
        let b = self.keys.partition_point(|&k| k >> shift <= prefix);
        self.distinct(level, a, b)
    }

    /// Occupied level-`level` cells inside the box of side `side(parent)`
    /// containing original point `i` on the dyadic grid shifted by half a
    /// cell along the axes set in `shift` (bit `d − 1 − a` for axis `a`).
    /// `shift = 0` is [`GridIndex::cell_count`]. Needs `level > parent`.
    pub fn shifted_cell_count(&self, i: usize, parent: u32, level: u32, shift: u32) -> u64 {
        if shift == 0 || level <= parent {
            return self.cell_count(i, parent, level);
        }
        let half = parent + 1;
        let corner = self.shifted_corner(i, half, shift);
        let n = 1i64 << half;
        let sh = self.shift(half);
        let mut total = 0;
        for j in 0..(1u32 << self.dim) {
            let mut c = [0u64; 3];
            let mut inside = true;
            for a in 0..self.dim {
                let q = corner[a] + i64::from((j >> (self.dim - 1 - a)) & 1);
                inside &= (0..n).contains(&q);
                c[a] = q.max(0) as u64;
            }
            if !inside {
                continue;
            }
            let prefix = interleave(&c[..self.dim], half);
            let a = self.keys.partition_point(|&k| k >> sh < prefix);
            let b = self.keys.partition_point(|&k| k >> sh <= prefix);
            total += self.distinct(level, a, b);
        }
        total
    }

    /// Whether the shifted box of [`GridIndex::shifted_cell_count`] lies
    /// inside the bounding box of the cloud.
    pub fn shifted_box_inside_bbox(&self, i: usize, parent: u32, shift: u32) -> bool {
        if shift == 0 {
            return self.cell_inside_bbox(i, parent);
        }
        let half = parent + 1;
        let side = self.side(half);
        let corner = self.shifted_corner(i, half, shift);
        (0..self.dim).all(|a| {
            corner[a] >= 0
                && self.lo[a] + (corner[a] + 2) as f64 * side <= self.hi[a] * (1.0 + 1e-12) + 1e-300
        })
    }

    /// Level-`half` index of the lower corner of the shifted box holding
    /// original point `i`: boxes span two level-`half` cells per axis and
    /// start at odd indices along shifted axes.
    fn shifted_corner(&self, i: usize, half: u32, shift: u32) -> [i64; 3] {
        let q = self.cell_coords(self.keys[self.pos[i] as usize], half);
        let mut out = [0i64; 3];
        for a in 0..self.dim {
            let o = i64::from((shift >> (self.dim - 1 - a)) & 1);
            let qa = q[a] as i64;
            out[a] = qa - (qa - o).rem_euclid(2);
        }
        out
    }

    /// Per-axis cell indices at `level` of a finest-level key.
    fn cell_coords(&self, key: u64, level: u32) -> [u64; 3] {
        let k = key >> self.shift(level);
        let mut out = [0u64; 3];
        for b in 0..level {
            for (a, o) in out.iter_mut().enumerate().take(self.dim) {
                let bit = (k >> (b as usize * self.dim + (self.dim - 1 - a))) & 1;
                *o |= bit << b;
            }
        }
        out
    }

    /// Whether the level-`level` cell containing original point `i` lies
    /// inside the bounding box of the cloud.
    pub fn cell_inside_bbox(&self, i: usize, level: u32) -> bool {
        let side = self.side(level);
        let p = self.point(i);
        (0..self.dim).all(|a| {
            let c = ((p[a] - self.lo[a]) / side)
                .floor()
                .min(f64::from(1u32 << level.min(31)) - 1.0)
                .max(0.0);
            self.lo[a] + (c + 1.0) * side <= self.hi[a] * (1.0 + 1e-12) + 1e-300
        })
    }

    fn shift(&self, level: u32) -> u32 {
        self.dim as u32 * (self.max_level - level)
    }

    fn cell_starts(&self, level: u32) -> &[u32] {
        self.starts[level as usize].get_or_init(|| {
            let shift = self.shift(level);
            let mut out = Vec::with_capacity(self.keys.len() + 1);
            out.push(0u32);
            let mut acc = 0u32;
            for (i, k) in self.keys.iter().enumerate() {
                if i == 0 || self.keys[i - 1] >> shift != k >> shift {
                    acc += 1;
                }
                out.push(acc);
            }
            out
        })
    }

    /// Distinct level-`level` cells among sorted points `a..b`.
    fn distinct(&self, level: u32, a: usize, b: usize) -> u64 {
        if b <= a {
            return 0;
        }
        let s = self.cell_starts(level);
        u64::from(1 + s[b] - s[a + 1])
    }

    fn sorted_point(&self, s: usize) -> &[f64] {
        &self.coords[s * self.dim..(s + 1) * self.dim]
    }

    /// Exact count of level-`level` cells holding a point within `big_r` of `x`.
    pub fn local_count(&self, x: &[f64], big_r: f64, level: u32) -> u64 {
        if self.dim == 1 {
            let a = self.coords.partition_point(|&p| p < x[0] - big_r);
            let b = self.coords.partition_point(|&p| p <= x[0] + big_r);
            return self.distinct(level, a, b);
        }
        // Start from the finest level whose cells are at least as large as R.
        let start = match self.level_for(big_r) {
            Ok(m) => m.min(level),
            Err(_) => level,
        };
        let side = self.side(start);
        let top = (1i64 << start) - 1;
        let mut ranges = [(0i64, 0i64); 3];
        for (i, r) in ranges.iter_mut().enumerate().take(self.dim) {
            let a = ((x[i] - big_r - self.lo[i]) / side).floor() as i64;
            let b = ((x[i] + big_r - self.lo[i]) / side).floor() as i64;
            *r = (a.clamp(0, top), b.clamp(0, top));
        }
        let mut total = 0;
        let mut cell = [0u64; 3];
        self.for_each_cell(&ranges[..self.dim], 0, &mut cell, &mut |c| {
            let prefix = interleave(&c[..self.dim], start);
            let shift = self.shift(start);
            let a = self.keys.partition_point(|&k| k >> shift < prefix);
            let b = self.keys.partition_point(|&k| k >> shift <= prefix);
            total += self.descend(x, big_r * big_r, level, start, c, a, b);
        });
        total
    }

    fn for_each_cell(
        &self,
        ranges: &[(i64, i64)],
        axis: usize,
        cell: &mut [u64; 3],
        f: &mut impl FnMut([u64; 3]),
    ) {
        if axis == ranges.len() {
            f(*cell);
            return;
        }
        for c in ranges[axis].0..=ranges[axis].1 {
            cell[axis] = c as u64;
            self.for_each_cell(ranges, axis + 1, cell, f);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        x: &[f64],
        r2: f64,
        target: u32,
        level: u32,
        cell: [u64; 3],
        a: usize,
        b: usize,
    ) -> u64 {
        if b <= a {
            return 0;
        }
        let side = self.side(level);
        let slack = 1e-9 * side;
        let (mut near, mut far) = (0.0, 0.0);
        for i in 0..self.dim {
            let c0 = self.lo[i] + cell[i] as f64 * side;
            let c1 = c0 + side;
            let dn = (c0 - x[i]).max(x[i] - c1).max(0.0);
            let df = (x[i] - c0).abs().max((c1 - x[i]).abs());
            near += (dn - slack).max(0.0).powi(2);
            far += (df + slack).powi(2);
        }
        if near > r2 {
            return 0;
        }
        if far <= r2 {
            return self.distinct(target, a, b);
        }
        if level == target {
            let hit = (a..b).any(|s| {
                let p = self.sorted_point(s);
                p.iter().zip(x).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() <= r2
            });
            return u64::from(hit);
        }
        let child_shift = self.shift(level + 1);
        let base = self.keys[a] >> self.shift(level) << self.dim;
        let mut total = 0;
        let mut lo = a;
        for j in 0..(1u64 << self.dim) {
            let prefix = base | j;
            let hi = lo + self.keys[lo..b].partition_point(|&k| k >> child_shift <= prefix);
            if hi > lo {
                let mut child = cell;
                for (axis, c) in child.iter_mut().enumerate().take(self.dim) {
                    let bit = (j >> (self.dim - 1 - axis)) & 1;
                    *c = (*c << 1) | bit;
                }
                total += self.descend(x, r2, target, level + 1, child, lo, hi);
            }
            lo = hi;
        }
        total
    }
}

/// Scale range `[r_min, r_max]` for an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleWindow {
    pub r_min: f64,
    pub r_max: f64,
}

impl ScaleWindow {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::Window(format!(
                "need 0 < r_min < r_max, got [{r_min:e}, {r_max:e}]"
            )));
        }
        Ok(Self { r_min, r_max })
    }

    /// `[safety·ε_min, root side]`.
    pub fn for_index(index: &GridIndex, safety: f64) -> Result<Self> {
        let r_min = (safety * index.eps_min()).max(index.side(index.max_level()));
        Self::new(r_min, index.root_side())
    }

    /// Dyadic levels whose cell side lies inside the window, checked
    /// against the index resolution.
    pub fn levels(&self, index: &GridIndex, safety: f64) -> Result<Vec<u32>> {
        if self.r_min < safety * index.eps_min() * (1.0 - 1e-12) {
            return Err(Error::Window(format!(
                "r_min = {:e} is below {safety} × ε_min = {:e}",
                self.r_min,
                safety * index.eps_min()
            )));
        }
        if self.r_max > index.root_side() * (1.0 + 1e-12) {
            return Err(Error::Window(format!(
                "r_max = {:e} exceeds the cloud extent {:e}",
                self.r_max,
                index.root_side()
            )));
        }
        let levels: Vec<u32> = (0..=index.max_level())
            .filter(|&l| {
                let s = index.side(l);
                s >= self.r_min * (1.0 - 1e-12) && s <= self.r_max * (1.0 + 1e-12)
            })
            .collect();
        if levels.len() < MIN_LEVELS {
            return Err(Error::Window(format!(
                "window [{:e}, {:e}] spans {} dyadic levels; at least {MIN_LEVELS} required",
                self.r_min,
                self.r_max,
                levels.len()
            )));
        }
        Ok(levels)
    }
}
