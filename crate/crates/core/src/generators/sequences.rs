use super::cloud::PointCloud;
use crate::{Error, Result};

/// `{n^{−1/p} : 1 ≤ n ≤ N} ∪ {0}`, with `eps_min = N^{−1/p} − (N+1)^{−1/p}`.
pub fn decreasing_sequence(p: f64, n: usize) -> Result<PointCloud> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParams(format!(
            "exponent p must be positive, got {p}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "N must be at least 2, got {n}"
        )));
    }
    let mut coords: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-1.0 / p)).collect();
    coords.push(0.0);
    let last = (n as f64).powf(-1.0 / p);
    // N^{-1/p}(1 − (N/(N+1))^{1/p}) without cancellation.
    let eps = -last * ((-1.0 / (n as f64 + 1.0)).ln_1p() / p).exp_m1();
    PointCloud::new(1, coords, eps, format!("decreasing_sequence p={p} N={n}"))?
        .with_special(vec![n])
}

/// Inverted lattice `{v/|v|² : v ∈ Z^k, 0 < |v| ≤ N} ∪ {0}` for `k ∈ {1, 2}`.
///
/// The resolution is the spacing of the outermost shell, `1/N − 1/(N+1)`.
pub fn inverted_lattice(k: usize, n: usize) -> Result<PointCloud> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "N must be at least 2, got {n}"
        )));
    }
    let eps = 1.0 / (n as f64 * (n as f64 + 1.0));
    let provenance = format!("inverted_lattice k={k} N={n}");
    match k {
        1 => {
            let mut coords = Vec::with_capacity(2 * n + 1);
            for m in 1..=n {
                let x = 1.0 / m as f64;
                coords.push(x);
                coords.push(-x);
            }
            coords.push(0.0);
            PointCloud::new(1, coords, eps, provenance)?.with_special(vec![2 * n])
        }
        2 => {
            let r = n as i64;
            let mut coords = Vec::new();
            for a in -r..=r {
                for b in -r..=r {
                    let s = a * a + b * b;
                    if s == 0 || s > r * r {
                        continue;
                    }
                    let s = s as f64;
                    coords.push(a as f64 / s);
                    coords.push(b as f64 / s);
                }
            }
            let origin = coords.len() / 2;
            coords.extend_from_slice(&[0.0, 0.0]);
            PointCloud::new(2, coords, eps, provenance)?.with_special(vec![origin])
        }
        _ => Err(Error::InvalidParams(format!(
            "lattice rank must be 1 or 2, got {k}"
        ))),
    }
}
