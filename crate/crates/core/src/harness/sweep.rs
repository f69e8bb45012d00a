use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formulas::{JuliaParams, KleinianParams};

/// Branch seams and named examples that every sweep includes.
fn fixed_kleinian() -> Vec<KleinianParams> {
    let mut out = Vec::new();
    for dim in 1..=3u32 {
        for k_max in 1..=dim {
            for k_min in 1..=k_max {
                let (a, b) = (f64::from(k_min), f64::from(k_max));
                for d in [a, (a + b) / 2.0, b, f64::from(dim)] {
                    if let Ok(p) = KleinianParams::new(d, k_min, k_max) {
                        out.push(p);
                    }
                }
            }
        }
    }
    for (d, a, b) in [
        (0.6, 1, 1),
        (1.2, 1, 2),
        (1.7, 1, 2),
        (1.4, 1, 2),
        (1.3057, 1, 1),
    ] {
        out.push(KleinianParams::new(d, a, b).expect("valid fixed tuple"));
    }
    out
}

fn fixed_julia() -> Vec<JuliaParams> {
    let mut out = Vec::new();
    for p in 1..=9u32 {
        for h in [
            1.0,
            0.5 * (f64::from(p) / (1.0 + f64::from(p)) + 1.0),
            1.5,
            1.999,
        ] {
            if let Ok(j) = JuliaParams::new(h, 1, p) {
                out.push(j);
            }
        }
    }
    for (h, a, b) in [(1.4, 1, 4), (0.9, 1, 2), (1.2, 2, 3)] {
        out.push(JuliaParams::new(h, a, b).expect("valid fixed tuple"));
    }
    out
}

/// `n` valid Kleinian tuples and `n` valid Julia tuples (or more, when `n`
/// is smaller than the fixed seam set).
///
/// Kleinian tuples act on `H^{d+1}` with `d ∈ {1, 2, 3}`: ranks
/// `1 <= k_min <= k_max <= d` and `k_max/2 < δ <= d`. Julia tuples have
/// `1 <= p_min <= p_max <= 9` and `p_max/(1+p_max) < h < 2`. Seams
/// (`δ ∈ {k_min, (k_min+k_max)/2, k_max}`, `h = 1`) are always included.
pub fn parameter_sweep(n: usize, seed: u64) -> (Vec<KleinianParams>, Vec<JuliaParams>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kleinian = fixed_kleinian();
    while kleinian.len() < n {
        let dim: u32 = rng.random_range(1..=3);
        let k_max = rng.random_range(1..=dim);
        let k_min = rng.random_range(1..=k_max);
        let lo = f64::from(k_max) / 2.0;
        let d = lo + (f64::from(dim) - lo) * (1.0 - rng.random::<f64>());
        if let Ok(p) = KleinianParams::new(d, k_min, k_max) {
            kleinian.push(p);
        }
    }
    let mut julia = fixed_julia();
    while julia.len() < n {
        let p_max: u32 = rng.random_range(1..=9);
        let p_min = rng.random_range(1..=p_max);
        let floor = f64::from(p_max) / (1.0 + f64::from(p_max));
        let h = floor + (2.0 - floor) * rng.random::<f64>();
        if let Ok(j) = JuliaParams::new(h, p_min, p_max) {
            julia.push(j);
        }
    }
    (kleinian, julia)
}
