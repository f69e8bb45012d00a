use serde::Serialize;

use super::ball::{dist_sq, norm_sq, BallPoint, SpherePoint};
use super::halfspace::{cayley_boundary, cayley_infinity};
use super::mobius::{HalfSpaceHoroball, Riemann};
use crate::{Error, Result};

/// Slack used when validating horoball families for disjointness.
pub const DISJOINT_SLACK: f64 = 1e-12;

/// Euclidean ball inside the Poincaré ball, internally tangent to the
/// boundary sphere at `basepoint`.
#[derive(Debug, Clone, PartialEq)]
pub struct Horoball {
    basepoint: SpherePoint,
    diameter: f64,
    rank: u32,
}

impl Horoball {
    pub fn new(basepoint: SpherePoint, diameter: f64, rank: u32) -> Result<Self> {
        if !(diameter > 0.0 && diameter <= 2.0) {
            return Err(Error::InvalidParams(format!(
                "horoball diameter must lie in (0, 2], got {diameter}"
            )));
        }
        if rank == 0 {
            return Err(Error::InvalidParams(
                "horoball rank must be positive".into(),
            ));
        }
        Ok(Self {
            basepoint,
            diameter,
            rank,
        })
    }

    /// Ball-model image (under the Cayley transform) of a horoball in the
    /// upper half-space with base `a ∈ R^{n−1}` and Euclidean diameter `d`.
    pub fn from_halfspace(base: &[f64], diameter: f64, rank: u32) -> Result<Self> {
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(Error::InvalidParams(format!(
                "horoball diameter must be positive, got {diameter}"
            )));
        }
        let p = cayley_boundary(base)?;
        Self::new(p, 2.0 * diameter / (1.0 + norm_sq(base) + diameter), rank)
    }

    /// Ball-model image of a horoball of `H³`.
    pub fn from_upper(hb: &HalfSpaceHoroball, rank: u32) -> Result<Self> {
        match hb.base {
            Riemann::Finite(a) => Self::from_halfspace(&[a.re, a.im], hb.size, rank),
            Riemann::Infinity => Self::new(cayley_infinity(3)?, 2.0 / (1.0 + hb.size), rank),
        }
    }

    pub fn basepoint(&self) -> &SpherePoint {
        &self.basepoint
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn center(&self) -> Vec<f64> {
        let s = 1.0 - self.radius();
        self.basepoint.coords().iter().map(|c| c * s).collect()
    }

    pub fn contains_origin(&self) -> bool {
        self.diameter >= 1.0
    }

    /// Hyperbolic distance from the tip of the horoball to the origin.
    pub fn depth_offset(&self) -> f64 {
        ((2.0 - self.diameter) / self.diameter).ln()
    }

    pub fn disjoint(&self, other: &Self, slack: f64) -> bool {
        let gap = dist_sq(&self.center(), &other.center()).sqrt();
        gap >= self.radius() + other.radius() - slack
    }
}

/// Checks that a family is pairwise disjoint (tangency allowed), lives in a
/// single dimension and avoids the origin.
pub fn validate_family(horoballs: &[Horoball]) -> Result<()> {
    for (i, h) in horoballs.iter().enumerate() {
        if h.contains_origin() {
            return Err(Error::InvalidConfig(format!(
                "horoball {i} contains the origin"
            )));
        }
        for (j, g) in horoballs.iter().enumerate().skip(i + 1) {
            if h.basepoint.dim() != g.basepoint.dim() {
                return Err(Error::InvalidConfig(format!(
                    "horoballs {i} and {j} differ in dimension"
                )));
            }
            if !h.disjoint(g, DISJOINT_SLACK) {
                return Err(Error::InvalidConfig(format!(
                    "horoballs {i} and {j} overlap"
                )));
            }
        }
    }
    Ok(())
}

/// Value of the escape function at `z_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Escape {
    /// Hyperbolic depth of `z_T` inside its horoball (0 outside).
    pub rho: f64,
    /// Rank of that horoball (0 outside).
    pub rank: u32,
}

/// `z_T` expressed in the plane spanned by a basepoint `p = e1` and `z`, with
/// `1 − a` (where `a = z_T · p`) kept to full relative precision.
struct LocalRay {
    one_minus_a: f64,
    b: f64,
    conformal: f64,
}

impl LocalRay {
    fn new(z: &SpherePoint, p: &SpherePoint, t: f64) -> Self {
        let e = (-t).exp();
        let s = (1.0 - e) / (1.0 + e);
        let gap_sq = dist_sq(z.coords(), p.coords());
        let one_minus_cos = 0.5 * gap_sq;
        let sin = (gap_sq * (1.0 - 0.25 * gap_sq)).max(0.0).sqrt();
        Self {
            one_minus_a: 2.0 * e / (1.0 + e) + s * one_minus_cos,
            b: s * sin,
            conformal: 4.0 * e / ((1.0 + e) * (1.0 + e)),
        }
    }

    /// `|z_T − c|² − r²` for the horoball of radius `r` at `p`.
    fn power(&self, r: f64) -> f64 {
        self.one_minus_a * self.one_minus_a + self.b * self.b - 2.0 * r * self.one_minus_a
    }

    /// Hyperbolic distance to the horocycle point with parameter `x`; the
    /// parameter is the horizontal coordinate after sending `p` to `∞`.
    fn distance_to_horocycle(&self, r: f64, x: f64) -> f64 {
        let w = 1.0 / (1.0 + x * x);
        let d1 = 2.0 * r * w - self.one_minus_a;
        let d2 = self.b - 2.0 * r * x * w;
        let conf_q = 4.0 * r * (1.0 - r) * w;
        2.0 * ((d1 * d1 + d2 * d2).sqrt() / (self.conformal * conf_q).sqrt()).asinh()
    }
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
pub(crate) fn golden_section(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x).min(f1).min(f2))
}

/// Escape function `ρ(z, T)` and rank `k(z, T)`.
///
/// `ρ` is found by golden-section minimisation (tolerance `1e-8` in an
/// `asinh`-scaled horocycle parameter) of the distance from `z_T` to the
/// horosphere, restricted to the plane through the origin, the basepoint and
/// `z_T`, which contains the nearest point by rotational symmetry.
pub fn escape_function(z: &SpherePoint, t: f64, horoballs: &[Horoball]) -> Result<Escape> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "ray time must be finite and >= 0, got {t}"
        )));
    }
    for h in horoballs {
        if h.basepoint.dim() != z.dim() {
            return Err(Error::InvalidParams(
                "horoball and ray live in different dimensions".into(),
            ));
        }
        let r = h.radius();
        let ray = LocalRay::new(z, &h.basepoint, t);
        let power = ray.power(r);
        if power > 1e-12 * r * ray.one_minus_a {
            continue;
        }
        if power >= 0.0 {
            return Ok(Escape {
                rho: 0.0,
                rank: h.rank,
            });
        }
        let f = |u: f64| ray.distance_to_horocycle(r, u.sinh());
        // Coarse scan on a log-scaled grid to bracket the unique minimum.
        let step = 0.5;
        let n = 200;
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for i in 0..=n {
            let v = f(-50.0 + step * i as f64);
            if v < best_val {
                best_val = v;
                best = i;
            }
        }
        let lo = -50.0 + step * (best.max(1) - 1) as f64;
        let hi = -50.0 + step * (best.min(n - 1) + 1) as f64;
        let (_, rho) = golden_section(f, lo, hi, 1e-8);
        return Ok(Escape {
            rho: rho.min(best_val).max(0.0),
            rank: h.rank,
        });
    }
    Ok(Escape { rho: 0.0, rank: 0 })
}

/// Euclidean containment of an interior point in a closed horoball.
pub fn point_in_horoball(x: &BallPoint, h: &Horoball) -> bool {
    dist_sq(x.coords(), &h.center()) <= h.radius() * h.radius()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ball::ray_point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Busemann-function depth of `x` in the horoball at `p` with diameter `d`.
    fn busemann_depth(p: &[f64], d: f64, x: &[f64], conformal: f64) -> f64 {
        (d / (2.0 - d)).ln() - (dist_sq(p, x) / conformal).ln()
    }

    fn sphere(v: &[f64]) -> SpherePoint {
        SpherePoint::project(v).unwrap()
    }

    #[test]
    fn outside_all_horoballs() {
        let h = Horoball::new(sphere(&[1.0, 0.0, 0.0]), 0.5, 2).unwrap();
        let z = sphere(&[0.0, 1.0, 0.0]);
        assert_eq!(
            escape_function(&z, 5.0, &[h]).unwrap(),
            Escape { rho: 0.0, rank: 0 }
        );
        assert_eq!(
            escape_function(&z, 5.0, &[]).unwrap(),
            Escape { rho: 0.0, rank: 0 }
        );
    }

    #[test]
    fn parabolic_point_depth_grows_like_t() {
        let p = sphere(&[0.6, 0.8]);
        let h = Horoball::new(p.clone(), 0.3, 1).unwrap();
        for t in [20.0, 25.0, 30.0, 40.0, 60.0] {
            let e = escape_function(&p, t, std::slice::from_ref(&h)).unwrap();
            assert_eq!(e.rank, 1);
            assert!(
                (e.rho - (t - h.depth_offset())).abs() < 1e-6,
                "t={t} rho={}",
                e.rho
            );
            assert!(e.rho / t >= 0.9);
        }
    }

    #[test]
    fn on_horosphere_is_zero() {
        let p = sphere(&[0.0, 0.0, 1.0]);
        let h = Horoball::new(p.clone(), 0.4, 3).unwrap();
        let e = escape_function(&p, h.depth_offset(), &[h]).unwrap();
        assert_eq!(e.rank, 3);
        assert!(e.rho.abs() < 1e-7);
    }

    #[test]
    fn matches_busemann_oracle_off_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = sphere(&[1.0, 0.0, 0.0]);
        let h = Horoball::new(p.clone(), 0.2, 2).unwrap();
        let mut checked = 0;
        for _ in 0..400 {
            let ang: f64 = rng.random_range(0.0..0.12);
            let z = sphere(&[ang.cos(), ang.sin() * 0.6, ang.sin() * 0.8]);
            let t: f64 = rng.random_range(0.0..15.0);
            let x = ray_point(&z, t).unwrap();
            let e = escape_function(&z, t, std::slice::from_ref(&h)).unwrap();
            if point_in_horoball(&x, &h) {
                let oracle = busemann_depth(p.coords(), h.diameter(), x.coords(), x.conformal());
                assert!(
                    (e.rho - oracle).abs() < 1e-6,
                    "rho {} oracle {oracle}",
                    e.rho
                );
                assert_eq!(e.rank, 2);
                checked += 1;
            } else {
                assert_eq!(e.rank, 0);
            }
        }
        assert!(checked > 50, "only {checked} points landed inside");
    }

    #[test]
    fn jumps_only_at_containment_changes() {
        let p = sphere(&[1.0, 0.0]);
        let h = Horoball::new(p, 0.3, 1).unwrap();
        let z = sphere(&[0.01f64.cos(), 0.01f64.sin()]);
        let hs = [h];
        let mut prev = escape_function(&z, 0.0, &hs).unwrap();
        for i in 1..4000 {
            let t = i as f64 * 0.005;
            let cur = escape_function(&z, t, &hs).unwrap();
            if cur.rank == prev.rank {
                assert!((cur.rho - prev.rho).abs() <= 0.0051, "jump at t={t}");
            } else {
                assert!(cur.rho < 0.01 && prev.rho < 0.01);
            }
            prev = cur;
        }
    }

    #[test]
    fn family_validation() {
        let a = Horoball::new(sphere(&[1.0, 0.0]), 0.5, 1).unwrap();
        let b = Horoball::new(sphere(&[-1.0, 0.0]), 0.5, 1).unwrap();
        assert!(validate_family(&[a.clone(), b]).is_ok());
        let c = Horoball::new(sphere(&[1.0, 0.1]), 0.5, 1).unwrap();
        assert!(validate_family(&[a.clone(), c]).is_err());
        let big = Horoball::new(sphere(&[0.0, 1.0]), 1.2, 1).unwrap();
        assert!(validate_family(&[big]).is_err());
        assert!(Horoball::new(sphere(&[0.0, 1.0]), 2.5, 1).is_err());
        assert!(Horoball::new(sphere(&[0.0, 1.0]), 0.5, 0).is_err());
    }

    #[test]
    fn halfspace_conversion_is_tangent_and_consistent() {
        use crate::geometry::halfspace::{cayley_transform, HalfSpacePoint};
        let h = Horoball::from_halfspace(&[0.5, -0.25], 0.4, 1).unwrap();
        // The top of the half-space horoball maps onto the ball horosphere.
        let top = cayley_transform(&HalfSpacePoint::new(vec![0.5, -0.25, 0.4]).unwrap());
        let gap = dist_sq(top.coords(), &h.center()).sqrt();
        assert!((gap - h.radius()).abs() < 1e-12);
        let inf = Horoball::from_upper(&HalfSpaceHoroball::new(Riemann::Infinity, 1.0).unwrap(), 1)
            .unwrap();
        assert!((inf.diameter() - 1.0).abs() < 1e-15);
    }
}
