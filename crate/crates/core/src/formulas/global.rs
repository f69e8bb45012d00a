//! The two global measure formulae, evaluated with unit constants.

use crate::{Error, Result};

/// `log` of the Stratmann–Velani right-hand side `e^{−Tδ} e^{−ρ(δ−k)}`.
pub fn sv_global_log_measure(delta: f64, k: u32, t: f64, rho: f64) -> f64 {
    -t * delta - rho * (delta - f64::from(k))
}

/// Measure of the ball of radius `e^{−T}` about a limit point whose escape
/// function at time `T` is `rho` inside a horoball of rank `k`
/// (`k = 0` and `rho = 0` outside all horoballs).
pub fn sv_global_measure(delta: f64, k: u32, t: f64, rho: f64) -> f64 {
    sv_global_log_measure(delta, k, t, rho).exp()
}

/// Radius inside the zoom window `[r_next, r_j]` at which the two branches of φ meet.
pub fn julia_phi_threshold(p: u32, r_j: f64, r_next: f64) -> f64 {
    r_j * (r_next / r_j).powf(1.0 / (1.0 + f64::from(p)))
}

/// `log φ(ξ, r)` for a radial point whose zoom window is `[r_next, r_j]`
/// and whose orbit lingers near a parabolic point with petal number `p`.
pub fn julia_log_phi(h: f64, p: u32, r: f64, r_j: f64, r_next: f64) -> Result<f64> {
    if !(r_next > 0.0 && r_next < r_j) {
        return Err(Error::InvalidParams(format!(
            "zoom window must satisfy 0 < r_next < r_j, got [{r_next}, {r_j}]"
        )));
    }
    if !(r >= r_next && r <= r_j) {
        return Err(Error::InvalidParams(format!(
            "radius {r} outside zoom window [{r_next}, {r_j}]"
        )));
    }
    let pf = f64::from(p);
    let threshold = julia_phi_threshold(p, r_j, r_next);
    Ok(if r > threshold {
        (h - 1.0) * pf * (r / r_j).ln()
    } else {
        (h - 1.0) * (r_next / r).ln()
    })
}

pub fn julia_phi(h: f64, p: u32, r: f64, r_j: f64, r_next: f64) -> Result<f64> {
    julia_log_phi(h, p, r, r_j, r_next).map(f64::exp)
}

/// `log φ` below the last zoom radius `r_last` of a pre-parabolic point.
pub fn julia_log_phi_terminating(h: f64, p: u32, r: f64, r_last: f64) -> Result<f64> {
    if !(r > 0.0 && r <= r_last) {
        return Err(Error::InvalidParams(format!(
            "terminating branch needs 0 < r <= r_last, got r={r}, r_last={r_last}"
        )));
    }
    Ok((h - 1.0) * f64::from(p) * (r / r_last).ln())
}

pub fn julia_phi_terminating(h: f64, p: u32, r: f64, r_last: f64) -> Result<f64> {
    julia_log_phi_terminating(h, p, r, r_last).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sv_values() {
        assert!((sv_global_measure(0.6, 0, 10.0, 0.0) - (-6.0f64).exp()).abs() < 1e-15);
        assert_eq!(sv_global_measure(1.0, 1, 3.0, 7.0), (-3.0f64).exp());
        let expect = (-6.0f64).exp() * 1.6f64.exp();
        assert!((sv_global_measure(0.6, 1, 10.0, 4.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn phi_top_of_window_is_one() {
        assert!((julia_phi(1.4, 4, 0.5, 0.5, 0.01).unwrap() - 1.0).abs() < 1e-15);
        assert!((julia_phi(0.7, 2, 0.01, 0.5, 0.01).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_rejects_outside_window() {
        assert!(julia_phi(1.2, 1, 0.6, 0.5, 0.1).is_err());
        assert!(julia_phi(1.2, 1, 0.05, 0.5, 0.1).is_err());
        assert!(julia_phi(1.2, 1, 0.3, 0.1, 0.5).is_err());
        assert!(julia_phi_terminating(1.2, 1, 0.3, 0.1).is_err());
    }

    #[test]
    fn phi_branches_meet_at_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p: u32 = rng.random_range(1..=6);
            let h = rng.random_range(0.5..1.95);
            let r_j: f64 = rng.random_range(1e-3..1.0);
            let r_next = r_j * rng.random_range(1e-6..0.9);
            let t = julia_phi_threshold(p, r_j, r_next);
            let left = (h - 1.0) * f64::from(p) * (t / r_j).ln();
            let right = (h - 1.0) * (r_next / t).ln();
            let closed = (h - 1.0) * f64::from(p) / (1.0 + f64::from(p)) * (r_next / r_j).ln();
            assert!((left.exp() - right.exp()).abs() < 1e-9 * right.exp().max(1.0));
            assert!((left - closed).abs() < 1e-9);
        }
    }

    #[test]
    fn terminating_h_one_is_flat() {
        assert_eq!(julia_phi_terminating(1.0, 3, 1e-4, 1e-2).unwrap(), 1.0);
    }
}
