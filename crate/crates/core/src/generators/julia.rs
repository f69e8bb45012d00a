use std::collections::HashSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::{finalize_cloud, PointCloud};
use crate::{Error, Result};

/// Polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.len() < 3 {
            return Err(Error::InvalidParams(
                "map must have degree at least 2".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, c)| {
                acc * z + c * k as f64
            })
    }

    /// Coefficients of `w ↦ P(ω + w)`.
    pub fn taylor_at(&self, omega: Complex64) -> Vec<Complex64> {
        // Repeated synthetic division by (z − ω).
        let mut a = self.coeffs.clone();
        let n = a.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let hi = a[j + 1];
                a[j] += hi * omega;
            }
        }
        a
    }

    /// All solutions of `P(w) = z` (Durand–Kerner with Newton polishing).
    pub fn preimages(&self, z: Complex64) -> Vec<Complex64> {
        let d = self.degree();
        let lead = self.coeffs[d];
        let mut q: Vec<Complex64> = self.coeffs.iter().map(|c| c / lead).collect();
        q[0] -= z / lead;
        if d == 2 {
            let (b, c) = (q[1], q[0]);
            let disc = (b * b - 4.0 * c).sqrt();
            return vec![(-b + disc) / 2.0, (-b - disc) / 2.0];
        }
        let eval = |w: Complex64| {
            q.iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
        };
        let bound = 1.0 + q[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let seed = Complex64::from_polar(0.4 * bound, 0.9);
        let mut roots: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32 + 1)).collect();
        for _ in 0..500 {
            let mut delta: f64 = 0.0;
            for i in 0..d {
                let mut den = Complex64::new(1.0, 0.0);
                for j in 0..d {
                    if i != j {
                        den *= roots[i] - roots[j];
                    }
                }
                if den.norm() == 0.0 {
                    continue;
                }
                let step = eval(roots[i]) / den;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-15 * bound {
                break;
            }
        }
        let deriv = |w: Complex64| {
            q.iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, (k, c)| {
                    acc * w + c * k as f64
                })
        };
        for r in &mut roots {
            for _ in 0..2 {
                let dp = deriv(*r);
                if dp.norm() > 0.0 {
                    *r -= eval(*r) / dp;
                }
            }
        }
        roots
    }
}

/// Parabolic polynomial presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "map")]
pub enum JuliaPreset {
    /// `z² + 1/4`, parabolic fixed point `1/2`.
    Cauliflower,
    /// `z(1 + z^p) = z + z^{p+1}`, parabolic fixed point `0`.
    Petal { p: u32 },
}

impl JuliaPreset {
    pub fn polynomial(&self) -> Polynomial {
        let c = |x: f64| Complex64::new(x, 0.0);
        match *self {
            JuliaPreset::Cauliflower => {
                Polynomial::new(vec![c(0.25), c(0.0), c(1.0)]).expect("degree 2")
            }
            JuliaPreset::Petal { p } => {
                let mut v = vec![c(0.0); p as usize + 2];
                v[1] = c(1.0);
                v[p as usize + 1] = c(1.0);
                Polynomial::new(v).expect("degree p+1")
            }
        }
    }

    pub fn parabolic_point(&self) -> Complex64 {
        match self {
            JuliaPreset::Cauliflower => Complex64::new(0.5, 0.0),
            JuliaPreset::Petal { .. } => Complex64::new(0.0, 0.0),
        }
    }

    pub fn name(&self) -> String {
        match self {
            JuliaPreset::Cauliflower => "cauliflower".into(),
            JuliaPreset::Petal { p } => format!("petal{p}"),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            JuliaPreset::Petal { p } if *p == 0 => {
                Err(Error::InvalidParams("petal number must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Petal number at a parabolic fixed point `ω` read from the Taylor
/// expansion `P(ω + w) = ω + w + a w^{p+1} + ⋯`. Errors if `ω` is not a
/// fixed point with multiplier 1.
pub fn petal_number(poly: &Polynomial, omega: Complex64) -> Result<u32> {
    let t = poly.taylor_at(omega);
    let scale = 1.0 + omega.norm();
    if (t[0] - omega).norm() > 1e-12 * scale || (t[1] - 1.0).norm() > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "{omega} is not a parabolic fixed point with multiplier 1"
        )));
    }
    let size = t.iter().map(|c| c.norm()).fold(0.0, f64::max);
    t.iter()
        .enumerate()
        .skip(2)
        .find(|(_, c)| c.norm() > 1e-12 * size)
        .map(|(k, _)| k as u32 - 1)
        .ok_or_else(|| Error::InvalidParams("map is affine near the fixed point".into()))
}

/// How inverse branches are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BranchPolicy {
    /// Independent random walks choosing a uniformly random preimage per step.
    #[default]
    Random,
    /// Breadth-first expansion of the full preimage tree, pruning nodes
    /// whose grid cell (side = resolution) was already reached.
    GridPruned,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JuliaOptions {
    /// Steps per walk (random) or maximal tree depth (grid-pruned).
    pub iterations: usize,
    /// Number of random walks (ignored when grid-pruned).
    pub seeds: usize,
    pub rng_seed: u64,
    pub policy: BranchPolicy,
    /// Grid cell used for pruning and for thinning the output.
    pub resolution: f64,
    pub cap: usize,
}

impl Default for JuliaOptions {
    fn default() -> Self {
        Self {
            iterations: 22,
            seeds: 20_000,
            rng_seed: 0,
            policy: BranchPolicy::Random,
            resolution: 1e-4,
            cap: 2_000_000,
        }
    }
}

/// Starting points: the parabolic point and its other preimages (all in `J`).
fn start_points(poly: &Polynomial, omega: Complex64) -> Vec<Complex64> {
    let mut pts = vec![omega];
    for w in poly.preimages(omega) {
        if (w - omega).norm() > 1e-9 && pts.iter().all(|q| (q - w).norm() > 1e-9) {
            pts.push(w);
        }
    }
    pts
}

/// Backward-orbit point cloud of a parabolic polynomial preset.
pub fn julia_inverse_iteration(preset: JuliaPreset, opts: &JuliaOptions) -> Result<PointCloud> {
    preset.validate()?;
    let poly = preset.polynomial();
    let omega = preset.parabolic_point();
    petal_number(&poly, omega)?;
    if opts.iterations == 0 {
        return Err(Error::InvalidParams("iterations must be at least 1".into()));
    }
    if !(opts.resolution > 0.0) {
        return Err(Error::InvalidParams("resolution must be positive".into()));
    }
    let starts = start_points(&poly, omega);
    let mut coords: Vec<f64> = starts.iter().flat_map(|z| [z.re, z.im]).collect();
    let pinned = starts.len();
    match opts.policy {
        BranchPolicy::Random => {
            let walks: Vec<Vec<f64>> = (0..opts.seeds)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed.wrapping_add(k as u64));
                    let mut z = starts[k % starts.len()];
                    let mut out = Vec::with_capacity(2 * opts.iterations);
                    for _ in 0..opts.iterations {
                        let pre = poly.preimages(z);
                        z = pre[rng.random_range(0..pre.len())];
                        out.extend_from_slice(&[z.re, z.im]);
                    }
                    out
                })
                .collect();
            for w in walks {
                coords.extend(w);
                if coords.len() / 2 >= opts.cap {
                    break;
                }
            }
        }
        BranchPolicy::GridPruned => {
            let key = |z: Complex64| {
                (
                    (z.re / opts.resolution).floor() as i64,
                    (z.im / opts.resolution).floor() as i64,
                )
            };
            let mut seen: HashSet<(i64, i64)> = starts.iter().map(|&z| key(z)).collect();
            let mut frontier = starts.clone();
            for _ in 0..opts.iterations {
                let children: Vec<Vec<Complex64>> =
                    frontier.par_iter().map(|&z| poly.preimages(z)).collect();
                let mut next = Vec::new();
                for w in children.into_iter().flatten() {
                    if seen.insert(key(w)) {
                        next.push(w);
                        coords.extend_from_slice(&[w.re, w.im]);
                    }
                }
                if next.is_empty() || coords.len() / 2 >= opts.cap {
                    break;
                }
                frontier = next;
            }
        }
    }
    let provenance = format!(
        "julia_inverse_iteration preset={} policy={:?} iterations={} seeds={} rng_seed={} resolution={:e}",
        preset.name(),
        opts.policy,
        opts.iterations,
        opts.seeds,
        opts.rng_seed,
        opts.resolution
    );
    finalize_cloud(2, coords, pinned, opts.resolution, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cauliflower_is_parabolic_with_one_petal() {
        let p = JuliaPreset::Cauliflower.polynomial();
        assert_eq!(p.eval(c(0.5, 0.0)), c(0.5, 0.0));
        assert_eq!(p.derivative_at(c(0.5, 0.0)), c(1.0, 0.0));
        assert_eq!(petal_number(&p, c(0.5, 0.0)).unwrap(), 1);
    }

    #[test]
    fn petal_family_numbers() {
        for p in 1..=4 {
            let preset = JuliaPreset::Petal { p };
            assert_eq!(
                petal_number(&preset.polynomial(), preset.parabolic_point()).unwrap(),
                p
            );
        }
    }

    #[test]
    fn non_parabolic_rejected() {
        let poly = Polynomial::new(vec![c(0.3, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(petal_number(&poly, c(0.5, 0.0)).is_err());
        assert!(Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0)]).is_err());
        assert!(
            julia_inverse_iteration(JuliaPreset::Petal { p: 0 }, &JuliaOptions::default()).is_err()
        );
    }

    #[test]
    fn preimages_solve_the_equation() {
        for preset in [
            JuliaPreset::Cauliflower,
            JuliaPreset::Petal { p: 2 },
            JuliaPreset::Petal { p: 4 },
        ] {
            let poly = preset.polynomial();
            for z in [c(0.1, 0.2), c(-0.7, 0.05), c(0.0, 0.0), c(2.0, -1.0)] {
                let pre = poly.preimages(z);
                assert_eq!(pre.len(), poly.degree());
                for w in pre {
                    assert!((poly.eval(w) - z).norm() < 1e-10, "{preset:?} {z} {w}");
                }
            }
        }
    }

    #[test]
    fn taylor_shift() {
        let poly = JuliaPreset::Cauliflower.polynomial();
        let t = poly.taylor_at(c(0.5, 0.0));
        // (1/2 + w)² + 1/4 = 1/2 + w + w²
        assert!(
            (t[0] - 0.5).norm() < 1e-15
                && (t[1] - 1.0).norm() < 1e-15
                && (t[2] - 1.0).norm() < 1e-15
        );
    }

    fn forward_invariance(preset: JuliaPreset, policy: BranchPolicy) {
        let opts = JuliaOptions {
            iterations: 14,
            seeds: 400,
            policy,
            resolution: 2e-3,
            ..Default::default()
        };
        let cloud = julia_inverse_iteration(preset, &opts).unwrap();
        let poly = preset.polynomial();
        let pts: Vec<Complex64> = cloud.points().map(|p| c(p[0], p[1])).collect();
        let tol = 2.0 * cloud.eps_min().max(opts.resolution);
        let mut good = 0;
        let mut total = 0;
        for z in pts.iter().step_by(7) {
            let w = poly.eval(*z);
            total += 1;
            if pts.iter().any(|q| (q - w).norm() <= tol) {
                good += 1;
            }
        }
        assert!(
            good as f64 >= 0.95 * total as f64,
            "{preset:?} {policy:?}: {good}/{total}"
        );
    }

    #[test]
    fn clouds_are_forward_invariant() {
        forward_invariance(JuliaPreset::Cauliflower, BranchPolicy::Random);
        forward_invariance(JuliaPreset::Cauliflower, BranchPolicy::GridPruned);
        forward_invariance(JuliaPreset::Petal { p: 2 }, BranchPolicy::GridPruned);
    }

    #[test]
    fn deterministic_given_seed() {
        let opts = JuliaOptions {
            iterations: 10,
            seeds: 50,
            rng_seed: 9,
            ..Default::default()
        };
        let a = julia_inverse_iteration(JuliaPreset::Cauliflower, &opts).unwrap();
        let b = julia_inverse_iteration(JuliaPreset::Cauliflower, &opts).unwrap();
        assert_eq!(a, b);
    }
}
