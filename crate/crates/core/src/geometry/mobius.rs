use crate::{Error, Result};
use num_complex::Complex64;

/// Tolerance on `|tr² − 4|` for classifying a map as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-9;

/// A point of the Riemann sphere `Ĉ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Riemann {
    Finite(Complex64),
    Infinity,
}

impl Riemann {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Riemann::Finite(z) => Some(z),
            Riemann::Infinity => None,
        }
    }
}

impl From<Complex64> for Riemann {
    fn from(z: Complex64) -> Self {
        Riemann::Finite(z)
    }
}

/// Element of `PSL(2, C)` acting on `Ĉ` and, by Poincaré extension, on
/// the upper half-space `H³ = {(z, t) : t > 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl MobiusMap {
    /// Builds `z ↦ (az + b)/(cz + d)` rescaled to determinant 1.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = [a, b, c, d].iter().map(|x| x.norm_sqr()).sum::<f64>();
        if !det.is_finite() || det.norm() <= 1e-12 * scale {
            return Err(Error::InvalidParams(format!(
                "singular Möbius matrix (det = {det})"
            )));
        }
        let s = det.sqrt();
        Ok(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    /// From `[a_re, a_im, b_re, b_im, c_re, c_im, d_re, d_im]`.
    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() != 8 {
            return Err(Error::InvalidConfig(format!(
                "generator needs 8 reals, got {}",
                v.len()
            )));
        }
        let c = |i: usize| Complex64::new(v[2 * i], v[2 * i + 1]);
        Self::new(c(0), c(1), c(2), c(3))
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let r = |x: f64| Complex64::new(x, 0.0);
        Self::new(r(a), r(b), r(c), r(d))
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self {
            a: o,
            b: z,
            c: z,
            d: o,
        }
    }

    /// `z ↦ z + w`.
    pub fn translation(w: Complex64) -> Self {
        Self {
            b: w,
            ..Self::identity()
        }
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn flat(&self) -> [f64; 8] {
        let [a, b, c, d] = self.entries();
        [a.re, a.im, b.re, b.im, c.re, c.im, d.re, d.im]
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// `self ∘ other`, renormalised to determinant 1.
    pub fn compose(&self, other: &Self) -> Self {
        let m = Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        };
        let s = m.determinant().sqrt();
        Self {
            a: m.a / s,
            b: m.b / s,
            c: m.c / s,
            d: m.d / s,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `h ∘ self ∘ h⁻¹`.
    pub fn conjugate_by(&self, h: &Self) -> Self {
        h.compose(self).compose(&h.inverse())
    }

    pub fn power(&self, n: u32) -> Self {
        let mut acc = Self::identity();
        let mut base = *self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        let tol = 1e-12;
        self.b.norm() < tol && self.c.norm() < tol && (self.a - self.d).norm() < tol
    }

    /// Parabolic iff `tr² = 4` (within [`PARABOLIC_TOL`]) and not the identity.
    pub fn is_parabolic(&self) -> bool {
        let t = self.trace();
        (t * t - 4.0).norm() < PARABOLIC_TOL && !self.is_identity()
    }

    /// Fixed points in `Ĉ` (one for parabolic maps, two otherwise).
    pub fn fixed_points(&self) -> Vec<Riemann> {
        if self.is_identity() {
            return Vec::new();
        }
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        if c.norm() < 1e-14 {
            let mut pts = vec![Riemann::Infinity];
            if (a - d).norm() > 1e-12 {
                pts.push(Riemann::Finite(b / (d - a)));
            }
            return pts;
        }
        if self.is_parabolic() {
            return vec![Riemann::Finite((a - d) / (2.0 * c))];
        }
        // c z² + (d − a) z − b = 0, discriminant tr² − 4.
        let t = self.trace();
        let root = (t * t - 4.0).sqrt();
        vec![
            Riemann::Finite((a - d + root) / (2.0 * c)),
            Riemann::Finite((a - d - root) / (2.0 * c)),
        ]
    }

    pub fn apply(&self, z: Riemann) -> Riemann {
        match z {
            Riemann::Infinity => {
                if self.c.norm() == 0.0 {
                    Riemann::Infinity
                } else {
                    Riemann::Finite(self.a / self.c)
                }
            }
            Riemann::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    Riemann::Infinity
                } else {
                    Riemann::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// `1/(cz + d)²`; `None` at the pole.
    pub fn derivative(&self, z: Complex64) -> Option<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            None
        } else {
            Some(1.0 / (den * den))
        }
    }

    /// Poincaré extension to `H³`: `(z, t) ↦ (z', t')`.
    pub fn apply_upper(&self, z: Complex64, t: f64) -> (Complex64, f64) {
        let w = self.c * z + self.d;
        let n = w.norm_sqr() + self.c.norm_sqr() * t * t;
        let num = (self.a * z + self.b) * w.conj() + self.a * self.c.conj() * t * t;
        (num / n, t / n)
    }
}

/// Horoball in the upper half-space `H³`. A finite base carries its
/// Euclidean diameter; a base at `∞` carries the height of its horizontal
/// boundary plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpaceHoroball {
    pub base: Riemann,
    pub size: f64,
}

impl HalfSpaceHoroball {
    pub fn new(base: Riemann, size: f64) -> Result<Self> {
        if !(size > 0.0) || !size.is_finite() {
            return Err(Error::InvalidParams(format!(
                "horoball size must be positive, got {size}"
            )));
        }
        Ok(Self { base, size })
    }

    /// Image under `g`.
    pub fn image(&self, g: &MobiusMap) -> Self {
        let [_, _, c, d] = g.entries();
        match self.base {
            Riemann::Finite(a) => {
                let w = c * a + d;
                if w.norm_sqr() == 0.0 {
                    Self {
                        base: Riemann::Infinity,
                        size: 1.0 / (self.size * c.norm_sqr()),
                    }
                } else {
                    Self {
                        base: g.apply(self.base),
                        size: self.size / w.norm_sqr(),
                    }
                }
            }
            Riemann::Infinity => {
                if c.norm_sqr() == 0.0 {
                    // z ↦ a² z + ab: heights scale by |a|² = 1/|d|².
                    Self {
                        base: Riemann::Infinity,
                        size: self.size / d.norm_sqr(),
                    }
                } else {
                    Self {
                        base: g.apply(Riemann::Infinity),
                        size: 1.0 / (self.size * c.norm_sqr()),
                    }
                }
            }
        }
    }

    /// Disjoint (tangency allowed) up to `slack`.
    pub fn disjoint(&self, other: &Self, slack: f64) -> bool {
        match (self.base, other.base) {
            (Riemann::Finite(a), Riemann::Finite(b)) => {
                (a - b).norm_sqr() >= self.size * other.size - slack
            }
            (Riemann::Finite(_), Riemann::Infinity) => self.size <= other.size + slack,
            (Riemann::Infinity, Riemann::Finite(_)) => other.size <= self.size + slack,
            (Riemann::Infinity, Riemann::Infinity) => false,
        }
    }

    /// Whether the point `(z, t)` of `H³` lies in the closed horoball.
    pub fn contains(&self, z: Complex64, t: f64) -> bool {
        match self.base {
            Riemann::Infinity => t >= self.size,
            Riemann::Finite(a) => {
                let r = 0.5 * self.size;
                (z - a).norm_sqr() + (t - r) * (t - r) <= r * r
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::halfspace::{halfspace_distance, HalfSpacePoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_map(rng: &mut ChaCha8Rng) -> MobiusMap {
        loop {
            let mut e = [c(0.0, 0.0); 4];
            for x in &mut e {
                let r: f64 = rng.random_range(0.0..2.0);
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                *x = Complex64::from_polar(r, th);
            }
            if let Ok(m) = MobiusMap::new(e[0], e[1], e[2], e[3]) {
                let [a, b, cc, d] = m.entries();
                if [a, b, cc, d].iter().all(|x| x.norm() < 20.0) {
                    return m;
                }
            }
        }
    }

    #[test]
    fn normalises_determinant() {
        let m = MobiusMap::from_real(2.0, 1.0, 1.0, 3.0).unwrap();
        assert!((m.determinant() - 1.0).norm() < 1e-12);
        assert!(MobiusMap::from_real(1.0, 2.0, 2.0, 4.0).is_err());
        assert!(MobiusMap::from_flat(&[1.0; 7]).is_err());
    }

    #[test]
    fn composition_is_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (f, g) = (random_map(&mut rng), random_map(&mut rng));
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let lhs = f.compose(&g).apply(z.into()).finite().unwrap();
            let rhs = f.apply(g.apply(z.into())).finite().unwrap();
            assert!((lhs - rhs).norm() < 1e-8 * (1.0 + lhs.norm()));
            assert!((f.compose(&g).determinant() - 1.0).norm() < 1e-12);
            assert!(f.compose(&f.inverse()).is_identity());
        }
    }

    #[test]
    fn parabolic_classification() {
        let t = MobiusMap::translation(c(1.0, 0.0));
        assert!(t.is_parabolic());
        assert_eq!(t.fixed_points(), vec![Riemann::Infinity]);
        assert!(!MobiusMap::identity().is_parabolic());
        let h = MobiusMap::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
        let f = t.conjugate_by(&h);
        assert!(f.is_parabolic());
        let fp = f.fixed_points();
        assert_eq!(fp.len(), 1);
        assert!((fp[0].finite().unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        let loxo = MobiusMap::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
        assert!(!loxo.is_parabolic());
        // |tr| = 2 with tr = 2i is loxodromic, not parabolic.
        let r2 = 2f64.sqrt();
        let twist =
            MobiusMap::new(c(0.0, 1.0 + r2), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0 - r2)).unwrap();
        assert!((twist.trace().norm() - 2.0).abs() < 1e-12);
        assert!(!twist.is_parabolic());
    }

    #[test]
    fn preserves_hyperbolic_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let g = random_map(&mut rng);
            let pts: Vec<(Complex64, f64)> = (0..2)
                .map(|_| {
                    (
                        c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                        rng.random_range(0.05..2.0),
                    )
                })
                .collect();
            let to_pt =
                |(z, t): (Complex64, f64)| HalfSpacePoint::new(vec![z.re, z.im, t]).unwrap();
            let before = halfspace_distance(&to_pt(pts[0]), &to_pt(pts[1]));
            let after = halfspace_distance(
                &to_pt(g.apply_upper(pts[0].0, pts[0].1)),
                &to_pt(g.apply_upper(pts[1].0, pts[1].1)),
            );
            assert!(
                (before - after).abs() < 1e-9 * (1.0 + before),
                "{before} vs {after}"
            );
        }
    }

    #[test]
    fn extension_agrees_with_boundary_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_map(&mut rng);
        let z = c(0.3, -0.7);
        let (w, t) = g.apply_upper(z, 1e-9);
        assert!((w - g.apply(z.into()).finite().unwrap()).norm() < 1e-6);
        assert!(t > 0.0);
    }

    #[test]
    fn horoball_images_match_pointwise_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let g = random_map(&mut rng);
            let a = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let hb = HalfSpaceHoroball::new(a.into(), rng.random_range(0.01..1.0)).unwrap();
            let img = hb.image(&g);
            let r = hb.size / 2.0;
            // Sample points of the horosphere and map them.
            for k in 0..8 {
                let phi = k as f64 * 0.7 + 0.3;
                let psi = k as f64 * 1.1;
                let (x, y, t) = (
                    r * phi.sin() * psi.cos(),
                    r * phi.sin() * psi.sin(),
                    r - r * phi.cos(),
                );
                let (w, s) = g.apply_upper(a + c(x, y), t);
                match img.base {
                    Riemann::Finite(b) => {
                        let rr = img.size / 2.0;
                        let dist = ((w - b).norm_sqr() + (s - rr).powi(2)).sqrt();
                        assert!((dist - rr).abs() < 1e-8 * (1.0 + rr), "{dist} vs {rr}");
                    }
                    Riemann::Infinity => assert!((s - img.size).abs() < 1e-8 * img.size),
                }
            }
        }
    }

    #[test]
    fn horoball_disjointness() {
        let a = HalfSpaceHoroball::new(c(0.0, 0.0).into(), 1.0).unwrap();
        let b = HalfSpaceHoroball::new(c(1.0, 0.0).into(), 1.0).unwrap();
        assert!(a.disjoint(&b, 1e-12));
        let b2 = HalfSpaceHoroball::new(c(0.9, 0.0).into(), 1.0).unwrap();
        assert!(!a.disjoint(&b2, 1e-12));
        let top = HalfSpaceHoroball::new(Riemann::Infinity, 1.0).unwrap();
        assert!(a.disjoint(&top, 1e-12));
        assert!(!top.disjoint(&top, 1e-12));
        assert!(a.contains(c(0.0, 0.0), 0.5));
        assert!(!a.contains(c(0.6, 0.0), 0.5));
    }
}
