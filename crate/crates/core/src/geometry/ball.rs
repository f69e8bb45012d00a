use crate::{Error, Result};

pub(crate) const BOUNDARY_TOL: f64 = 1e-12;

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(n: usize) -> Result<()> {
    if (2..=4).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "ambient dimension must be 2..=4, got {n}"
        )))
    }
}

/// Interior point of the Poincaré ball `{|z| < 1}` in `R^{d+1}`, `d <= 3`.
///
/// Keeps `1 − |z|²` alongside the coordinates; for points produced in
/// closed form (geodesic ray points, Cayley images) it is exact rather than
/// the result of a cancelling subtraction.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
    conformal: f64,
}

impl BallPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::OutsideModel("non-finite coordinate".into()));
        }
        let conformal = 1.0 - norm_sq(&coords);
        if conformal <= 0.0 {
            return Err(Error::OutsideModel(format!(
                "ball point must satisfy |z| < 1, got |z|^2 = {}",
                1.0 - conformal
            )));
        }
        Ok(Self { coords, conformal })
    }

    pub(crate) fn with_conformal(coords: Vec<f64>, conformal: f64) -> Result<Self> {
        if !(conformal > 0.0) {
            return Err(Error::OutsideModel(
                "point lies on or beyond the boundary sphere".into(),
            ));
        }
        Ok(Self { coords, conformal })
    }

    pub fn origin(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            coords: vec![0.0; dim],
            conformal: 1.0,
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `1 − |z|²`.
    pub fn conformal(&self) -> f64 {
        self.conformal
    }
}

/// Point of the boundary sphere `S^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Accepts a vector of norm 1 within `1e-12` and renormalises it.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let n = norm_sq(&coords).sqrt();
        if (n - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::OutsideModel(format!(
                "boundary point must have |z| = 1, got {n}"
            )));
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / n).collect(),
        })
    }

    /// Radial projection of a non-zero vector onto the sphere.
    pub fn project(v: &[f64]) -> Result<Self> {
        check_dim(v.len())?;
        let n = norm_sq(v).sqrt();
        if !(n > 0.0) {
            return Err(Error::OutsideModel("cannot project the origin".into()));
        }
        Ok(Self {
            coords: v.iter().map(|c| c / n).collect(),
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Hyperbolic distance in the Poincaré ball, `ds = 2|dz|/(1−|z|²)`.
pub fn hyperbolic_distance(p: &BallPoint, q: &BallPoint) -> f64 {
    let e = dist_sq(&p.coords, &q.coords).sqrt();
    2.0 * (e / (p.conformal * q.conformal).sqrt()).asinh()
}

/// Point at hyperbolic distance `t` from the origin on the ray towards `z`.
pub fn ray_point(z: &SpherePoint, t: f64) -> Result<BallPoint> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "ray time must be finite and >= 0, got {t}"
        )));
    }
    let e = (-t).exp();
    let s = (1.0 - e) / (1.0 + e);
    let conformal = 4.0 * e / ((1.0 + e) * (1.0 + e));
    BallPoint::with_conformal(z.coords.iter().map(|c| c * s).collect(), conformal)
}

/// `z_T`: the point on the geodesic ray from the origin to `endpoint` at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicRayPoint {
    pub endpoint: SpherePoint,
    pub time: f64,
}

impl GeodesicRayPoint {
    pub fn point(&self) -> Result<BallPoint> {
        ray_point(&self.endpoint, self.time)
    }
}

/// Hyperbolic distance through the cross ratio of `P`, `Q` and the endpoints
/// `A`, `B` of the geodesic through them: `log(|AQ||BP| / (|AP||BQ|))`.
///
/// Computed in the 2-plane through the origin, `P` and `Q`, where the
/// geodesic is a circle orthogonal to the unit circle (or a diameter).
pub fn cross_ratio_distance(p: &BallPoint, q: &BallPoint) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidParams("points of different dimension".into()));
    }
    if p.coords == q.coords {
        return Ok(0.0);
    }
    let (pc, qc) = (&p.coords, &q.coords);
    // Orthonormal frame (e1, e2) of a plane containing 0, P and Q.
    let anchor = if norm_sq(pc) >= norm_sq(qc) { pc } else { qc };
    let a_norm = norm_sq(anchor).sqrt();
    let (p2, q2) = if a_norm == 0.0 {
        unreachable!("distinct points cannot both be the origin")
    } else {
        let e1: Vec<f64> = anchor.iter().map(|c| c / a_norm).collect();
        let other = if std::ptr::eq(anchor, pc) { qc } else { pc };
        let along = dot(other, &e1);
        let perp: Vec<f64> = other.iter().zip(&e1).map(|(o, e)| o - along * e).collect();
        let perp_norm = norm_sq(&perp).sqrt();
        let project = |v: &[f64]| -> [f64; 2] {
            let x = dot(v, &e1);
            let y = if perp_norm > 1e-15 * a_norm {
                dot(v, &perp) / perp_norm
            } else {
                0.0
            };
            [x, y]
        };
        (project(pc), project(qc))
    };

    // Cross product of P and Q in the plane: zero means the geodesic is a diameter.
    let cross = p2[0] * q2[1] - p2[1] * q2[0];
    let (a, b) = if cross.abs() < 1e-14 {
        let dir = if p2[0].abs() + p2[1].abs() > q2[0].abs() + q2[1].abs() {
            p2
        } else {
            q2
        };
        let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        let u = [dir[0] / n, dir[1] / n];
        // Endpoints ±u; A is the one closer to P.
        let plus = [u[0], u[1]];
        let minus = [-u[0], -u[1]];
        let to_p = |x: [f64; 2]| (x[0] - p2[0]).powi(2) + (x[1] - p2[1]).powi(2);
        let to_q = |x: [f64; 2]| (x[0] - q2[0]).powi(2) + (x[1] - q2[1]).powi(2);
        if to_p(plus) - to_q(plus) < to_p(minus) - to_q(minus) {
            (plus, minus)
        } else {
            (minus, plus)
        }
    } else {
        // Centre c of the orthogonal circle: 2 c·P = 1 + |P|², 2 c·Q = 1 + |Q|².
        let rp = 0.5 * (1.0 + p2[0] * p2[0] + p2[1] * p2[1]);
        let rq = 0.5 * (1.0 + q2[0] * q2[0] + q2[1] * q2[1]);
        let c = [
            (rp * q2[1] - rq * p2[1]) / cross,
            (p2[0] * rq - q2[0] * rp) / cross,
        ];
        let c_sq = c[0] * c[0] + c[1] * c[1];
        let c_norm = c_sq.sqrt();
        // The two intersections with the unit circle lie symmetric about the
        // line through the origin and c, at angle acos(1/|c|).
        let half = (1.0 / c_norm).acos();
        let base = c[1].atan2(c[0]);
        let e1 = [(base + half).cos(), (base + half).sin()];
        let e2 = [(base - half).cos(), (base - half).sin()];
        let d = |x: [f64; 2], y: [f64; 2]| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        if d(e1, p2) / d(e1, q2) < d(e2, p2) / d(e2, q2) {
            (e1, e2)
        } else {
            (e2, e1)
        }
    };
    let d = |x: [f64; 2], y: [f64; 2]| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    Ok(((d(a, q2) * d(b, p2)) / (d(a, p2) * d(b, q2))).ln())
}

/// Isometry of the ball taking `a` to the origin.
pub fn move_to_origin(a: &[f64], x: &[f64]) -> Vec<f64> {
    let a2 = norm_sq(a);
    let x2 = norm_sq(x);
    let xa = dot(x, a);
    let diff_sq = dist_sq(x, a);
    let den = 1.0 - 2.0 * xa + x2 * a2;
    x.iter()
        .zip(a)
        .map(|(xi, ai)| ((1.0 - a2) * (xi - ai) - diff_sq * ai) / den)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Simpson quadrature of `2/(1−s²)` over `[0, r]`.
    fn radial_integral(r: f64) -> f64 {
        let n = 20_000;
        let h = r / n as f64;
        let f = |s: f64| 2.0 / (1.0 - s * s);
        let mut acc = f(0.0) + f(r);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn origin_distance_zero() {
        let o = BallPoint::origin(3).unwrap();
        assert_eq!(hyperbolic_distance(&o, &o), 0.0);
    }

    #[test]
    fn radial_distance_matches_quadrature() {
        let o = BallPoint::origin(2).unwrap();
        let z = BallPoint::new(vec![0.5, 0.0]).unwrap();
        let oracle = radial_integral(0.5);
        assert!((oracle - 3f64.ln()).abs() < 1e-10);
        assert!((hyperbolic_distance(&o, &z) - oracle).abs() < 1e-10);
        assert!((cross_ratio_distance(&o, &z).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn general_pairs_match_quadrature_after_isometry() {
        let p = BallPoint::new(vec![0.3, -0.2, 0.1]).unwrap();
        let q = BallPoint::new(vec![-0.4, 0.5, 0.2]).unwrap();
        let moved = move_to_origin(p.coords(), q.coords());
        let oracle = radial_integral(norm_sq(&moved).sqrt());
        assert!((hyperbolic_distance(&p, &q) - oracle).abs() < 1e-9);
    }

    #[test]
    fn rejects_points_off_the_ball() {
        assert!(BallPoint::new(vec![1.0, 0.0]).is_err());
        assert!(BallPoint::new(vec![0.9, 0.9]).is_err());
        assert!(BallPoint::new(vec![0.1]).is_err());
        assert!(SpherePoint::new(vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn ray_points() {
        let z = SpherePoint::new(vec![0.6, 0.8]).unwrap();
        let o = BallPoint::origin(2).unwrap();
        assert_eq!(ray_point(&z, 0.0).unwrap().coords(), &[0.0, 0.0]);
        let p2 = GeodesicRayPoint {
            endpoint: z.clone(),
            time: 2.0,
        }
        .point()
        .unwrap();
        assert!((hyperbolic_distance(&o, &p2) - 2.0).abs() < 1e-9);
        let a = ray_point(&z, 3.0).unwrap();
        let b = ray_point(&z, 7.0).unwrap();
        assert!((hyperbolic_distance(&a, &b) - 4.0).abs() < 1e-9);
        for t in [5.0, 8.0, 12.0, 16.0, 20.0] {
            let pt = ray_point(&z, t).unwrap();
            let gap = dist_sq(pt.coords(), z.coords()).sqrt();
            let ratio = gap / (-t).exp();
            assert!((0.1..=10.0).contains(&ratio), "t={t} ratio={ratio}");
            assert!((hyperbolic_distance(&o, &pt) - t).abs() < 1e-9);
        }
    }

    #[test]
    fn cross_ratio_degenerate_and_diameter() {
        let p = BallPoint::new(vec![0.2, 0.1]).unwrap();
        assert_eq!(cross_ratio_distance(&p, &p).unwrap(), 0.0);
        let q = BallPoint::new(vec![-0.4, -0.2]).unwrap();
        assert!((cross_ratio_distance(&p, &q).unwrap() - hyperbolic_distance(&p, &q)).abs() < 1e-9);
    }

    fn interior(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-0.55f64..0.55, dim).prop_filter("inside", |v| norm_sq(v) < 0.81)
    }

    proptest! {
        #[test]
        fn metric_axioms(a in interior(3), b in interior(3), c in interior(3)) {
            let (a, b, c) = (BallPoint::new(a).unwrap(), BallPoint::new(b).unwrap(), BallPoint::new(c).unwrap());
            let ab = hyperbolic_distance(&a, &b);
            prop_assert_eq!(ab, hyperbolic_distance(&b, &a));
            prop_assert!(ab <= hyperbolic_distance(&a, &c) + hyperbolic_distance(&c, &b) + 1e-12);
        }

        #[test]
        fn cross_ratio_agrees(a in interior(3), b in interior(3)) {
            let (a, b) = (BallPoint::new(a).unwrap(), BallPoint::new(b).unwrap());
            let h = hyperbolic_distance(&a, &b);
            prop_assert!((cross_ratio_distance(&a, &b).unwrap() - h).abs() < 1e-6);
        }
    }
}
