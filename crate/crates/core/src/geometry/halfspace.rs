use super::ball::{dist_sq, norm_sq, BallPoint, SpherePoint};
use crate::{Error, Result};

/// Point of the upper half-space `{x ∈ R^n : x_n > 0}`, `2 <= n <= 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePoint {
    coords: Vec<f64>,
}

impl HalfSpacePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if !(2..=4).contains(&coords.len()) {
            return Err(Error::InvalidParams(format!(
                "ambient dimension must be 2..=4, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::OutsideModel("non-finite coordinate".into()));
        }
        if !(coords[coords.len() - 1] > 0.0) {
            return Err(Error::OutsideModel(
                "half-space point needs a positive last coordinate".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Hyperbolic distance in the upper half-space, `ds = |dx|/x_n`.
pub fn halfspace_distance(x: &HalfSpacePoint, y: &HalfSpacePoint) -> f64 {
    let e = dist_sq(&x.coords, &y.coords).sqrt();
    2.0 * (e / (2.0 * (x.height() * y.height()).sqrt())).asinh()
}

/// `x ↦ −e_n + 2(x + e_n)/|x + e_n|²`; an involution of `R^n ∪ {∞}`.
fn invert(x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut shifted = x.to_vec();
    shifted[n - 1] += 1.0;
    let s = norm_sq(&shifted);
    let mut out: Vec<f64> = shifted.iter().map(|c| 2.0 * c / s).collect();
    out[n - 1] -= 1.0;
    (out, s)
}

/// Cayley transform from the upper half-space onto the Poincaré ball.
pub fn cayley_transform(x: &HalfSpacePoint) -> BallPoint {
    let (y, s) = invert(&x.coords);
    BallPoint::with_conformal(y, 4.0 * x.height() / s)
        .expect("positive height maps inside the ball")
}

/// Inverse of [`cayley_transform`].
pub fn inverse_cayley_transform(y: &BallPoint) -> Result<HalfSpacePoint> {
    let (mut x, s) = invert(y.coords());
    let n = x.len();
    x[n - 1] = y.conformal() / s;
    HalfSpacePoint::new(x)
}

/// Boundary version for a finite point of `R^{n−1}`; see [`cayley_infinity`] for `∞`.
pub fn cayley_boundary(x: &[f64]) -> Result<SpherePoint> {
    let mut full = x.to_vec();
    full.push(0.0);
    let (y, _) = invert(&full);
    SpherePoint::project(&y)
}

/// `−e_n` in `R^n`: the boundary image of `∞`.
pub fn cayley_infinity(n: usize) -> Result<SpherePoint> {
    let mut v = vec![0.0; n];
    if let Some(last) = v.last_mut() {
        *last = -1.0;
    }
    SpherePoint::new(v)
}

/// Boundary point of the half-space (`R^{n−1}`) for a sphere point other than `−e_n`.
pub fn inverse_cayley_boundary(p: &SpherePoint) -> Result<Vec<f64>> {
    let c = p.coords();
    let n = c.len();
    let mut shifted = c.to_vec();
    shifted[n - 1] += 1.0;
    if norm_sq(&shifted).sqrt() < 1e-12 {
        return Err(Error::OutsideModel(
            "the sphere point −e_n corresponds to infinity".into(),
        ));
    }
    let (x, _) = invert(c);
    Ok(x[..n - 1].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ball::hyperbolic_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> HalfSpacePoint {
        let mut v: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
        v.push(rng.random_range(0.01..3.0));
        HalfSpacePoint::new(v).unwrap()
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let x = random_point(&mut rng, 2 + i % 3);
            let back = inverse_cayley_transform(&cayley_transform(&x)).unwrap();
            worst = worst.max(dist_sq(x.coords(), back.coords()).sqrt());
        }
        assert!(worst < 1e-12, "worst round-trip error {worst}");
    }

    #[test]
    fn preserves_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = random_point(&mut rng, 3);
            let y = random_point(&mut rng, 3);
            let d_half = halfspace_distance(&x, &y);
            let d_ball = hyperbolic_distance(&cayley_transform(&x), &cayley_transform(&y));
            assert!((d_half - d_ball).abs() < 1e-9, "{d_half} vs {d_ball}");
        }
    }

    #[test]
    fn distinguished_points() {
        let j = HalfSpacePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(norm_sq(cayley_transform(&j).coords()) < 1e-30);
        assert_eq!(cayley_infinity(3).unwrap().coords(), &[0.0, 0.0, -1.0]);
        let zero = cayley_boundary(&[0.0, 0.0]).unwrap();
        assert_eq!(zero.coords(), &[0.0, 0.0, 1.0]);
        assert!(inverse_cayley_boundary(&cayley_infinity(3).unwrap()).is_err());
        let b = cayley_boundary(&[0.3, -1.2]).unwrap();
        let back = inverse_cayley_boundary(&b).unwrap();
        assert!((back[0] - 0.3).abs() < 1e-12 && (back[1] + 1.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_lower_half_space() {
        assert!(HalfSpacePoint::new(vec![0.0, 0.0]).is_err());
        assert!(HalfSpacePoint::new(vec![1.0, -1.0]).is_err());
    }
}
