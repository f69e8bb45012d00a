use num_complex::Complex64;
use serde::Serialize;

use super::ball::{dist_sq, SpherePoint};
use super::halfspace::{cayley_boundary, cayley_infinity, cayley_transform, HalfSpacePoint};
use super::horoball::{Horoball, DISJOINT_SLACK};
use super::mobius::{HalfSpaceHoroball, MobiusMap, Riemann};
use crate::{Error, Result};

/// Largest angle accepted by [`circle_lemma_check`].
pub const CIRCLE_THETA_MAX: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct CircleRow {
    pub theta: f64,
    pub x: f64,
    pub y: f64,
    /// `x / √(R y)`; tends to `√2` as `θ → 0`.
    pub ratio: f64,
    /// `√(R y)/2 ≤ x`
    pub x_lower: bool,
    /// `x ≤ 2√(R y)`
    pub x_upper: bool,
    /// `x²/(4R) ≤ y`
    pub y_lower: bool,
    /// `y ≤ 4x²/R`
    pub y_upper: bool,
}

impl CircleRow {
    pub fn holds(&self) -> bool {
        self.x_lower && self.x_upper && self.y_lower && self.y_upper
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CircleLemmaReport {
    pub radius: f64,
    pub rows: Vec<CircleRow>,
    pub all_hold: bool,
}

/// Evaluates the four comparison inequalities between `x(θ) = R sin θ` and
/// `y(θ) = R(1 − cos θ)` on the circle of radius `R` centred at `(0, R)`.
pub fn circle_lemma_check(radius: f64, angles: &[f64]) -> Result<CircleLemmaReport> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParams(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let mut rows = Vec::with_capacity(angles.len());
    for &theta in angles {
        if !(theta > 0.0 && theta <= CIRCLE_THETA_MAX) {
            return Err(Error::InvalidParams(format!(
                "angle {theta} outside (0, {CIRCLE_THETA_MAX}]"
            )));
        }
        let x = radius * theta.sin();
        let half = (0.5 * theta).sin();
        let y = 2.0 * radius * half * half;
        let sqrt_ry = (radius * y).sqrt();
        rows.push(CircleRow {
            theta,
            x,
            y,
            ratio: x / sqrt_ry,
            x_lower: 0.5 * sqrt_ry <= x,
            x_upper: x <= 2.0 * sqrt_ry,
            y_lower: x * x / (4.0 * radius) <= y,
            y_upper: y <= 4.0 * x * x / radius,
        });
    }
    let all_hold = rows.iter().all(CircleRow::holds);
    Ok(CircleLemmaReport {
        radius,
        rows,
        all_hold,
    })
}

/// `n` evenly spaced angles in `(0, CIRCLE_THETA_MAX]`.
pub fn circle_angle_grid(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| CIRCLE_THETA_MAX * i as f64 / n as f64)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusRow {
    pub n: u32,
    /// `|f^n(p') − p|` in the ball model.
    pub distance: f64,
    /// Euclidean diameter of `f^n(H_{p'})` in the ball model.
    pub diameter: f64,
    /// Largest deviation of mapped seed horosphere points from the
    /// predicted image sphere.
    pub tangency_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusSequence {
    pub fixed_point: Vec<f64>,
    pub rows: Vec<RadiusRow>,
}

impl RadiusSequence {
    /// Range of `n·distance` and `n²·diameter` over rows with `n >= n_from`.
    pub fn bracket(&self, n_from: u32) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in self.rows.iter().filter(|r| r.n >= n_from) {
            let n = r.n as f64;
            for v in [n * r.distance, n * n * r.diameter] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Whether both scaled sequences stay in `[1/c, c]` for `n >= n_from`.
    pub fn within(&self, c: f64, n_from: u32) -> bool {
        let (lo, hi) = self.bracket(n_from);
        lo >= 1.0 / c && hi <= c
    }
}

fn to_sphere(z: Riemann) -> Result<SpherePoint> {
    match z {
        Riemann::Finite(w) => cayley_boundary(&[w.re, w.im]),
        Riemann::Infinity => cayley_infinity(3),
    }
}

/// Sample points on the boundary of a half-space horoball with finite base.
fn horosphere_samples(hb: &HalfSpaceHoroball) -> Vec<(Complex64, f64)> {
    let Riemann::Finite(a) = hb.base else {
        return Vec::new();
    };
    let r = 0.5 * hb.size;
    [
        (0.5f64, 0.0f64),
        (1.2, 1.0),
        (2.0, 2.5),
        (std::f64::consts::PI, 0.0),
    ]
    .iter()
    .map(|&(phi, psi)| {
        let rho = r * phi.sin();
        (a + Complex64::from_polar(rho, psi), r - r * phi.cos())
    })
    .collect()
}

/// Iterates a parabolic map on a seed horoball `H_{p'}` and records the
/// ball-model distance of `f^n(p')` to the fixed point `p` and the diameter
/// of `f^n(H_{p'})`.
pub fn horoball_radius_sequence(
    f: &MobiusMap,
    seed: &HalfSpaceHoroball,
    n_max: u32,
) -> Result<RadiusSequence> {
    if !f.is_parabolic() {
        return Err(Error::InvalidParams(
            "horoball radius sequence needs a parabolic map".into(),
        ));
    }
    let p = f.fixed_points()[0];
    if seed.base == p {
        return Err(Error::InvalidParams(
            "seed horoball is based at the fixed point".into(),
        ));
    }
    if !seed.disjoint(&seed.image(f), DISJOINT_SLACK) {
        return Err(Error::InvalidParams(
            "seed horoball meets its image under f".into(),
        ));
    }
    let p_ball = to_sphere(p)?;
    let samples = horosphere_samples(seed);
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut g = MobiusMap::identity();
    for n in 1..=n_max {
        g = f.compose(&g);
        let image = seed.image(&g);
        let ball = Horoball::from_upper(&image, 1)?;
        let center = ball.center();
        let mut residual: f64 = 0.0;
        for &(z, t) in &samples {
            let (w, s) = g.apply_upper(z, t);
            let x = cayley_transform(&HalfSpacePoint::new(vec![w.re, w.im, s])?);
            residual = residual.max((dist_sq(x.coords(), &center).sqrt() - ball.radius()).abs());
        }
        rows.push(RadiusRow {
            n,
            distance: dist_sq(ball.basepoint().coords(), p_ball.coords()).sqrt(),
            diameter: ball.diameter(),
            tangency_residual: residual,
        });
    }
    Ok(RadiusSequence {
        fixed_point: p_ball.coords().to_vec(),
        rows,
    })
}
