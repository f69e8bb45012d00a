use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;

use super::cloud::{finalize_cloud, PointCloud};
use crate::geometry::MobiusMap;
use crate::{Error, Result};

/// Isometry of `H³` given by a matrix in `SL(2, C)`: either the Möbius map
/// itself or its composition with complex conjugation (`z ↦ A·z̄`), which is
/// how inversions in circles are represented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Isometry {
    Mobius(MobiusMap),
    AntiMobius(MobiusMap),
}

impl Isometry {
    /// Inversion in the circle `|z − c| = r`.
    pub fn circle_inversion(c: Complex64, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParams(
                "inversion radius must be positive".into(),
            ));
        }
        let one = Complex64::new(1.0, 0.0);
        Ok(Isometry::AntiMobius(MobiusMap::new(
            c,
            r * r - c.norm_sqr() * one,
            one,
            -c.conj(),
        )?))
    }

    /// Reflection in the line through `p` with unit direction `e^{iφ}`.
    pub fn line_reflection(p: Complex64, phi: f64) -> Result<Self> {
        // z ↦ p + e^{2iφ} conj(z − p)
        let u = Complex64::from_polar(1.0, phi);
        let one = Complex64::new(1.0, 0.0);
        Ok(Isometry::AntiMobius(MobiusMap::new(
            u,
            p * u.conj() - p.conj() * u,
            Complex64::new(0.0, 0.0),
            u.conj() * one,
        )?))
    }

    pub fn apply_upper(&self, z: Complex64, t: f64) -> (Complex64, f64) {
        match self {
            Isometry::Mobius(m) => m.apply_upper(z, t),
            Isometry::AntiMobius(m) => m.apply_upper(z.conj(), t),
        }
    }

    pub fn apply_boundary(&self, z: Complex64) -> Option<Complex64> {
        match self {
            Isometry::Mobius(m) => m.apply(z.into()).finite(),
            Isometry::AntiMobius(m) => m.apply(z.conj().into()).finite(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let conj = |m: &MobiusMap| {
            let [a, b, c, d] = m.entries();
            MobiusMap::new(a.conj(), b.conj(), c.conj(), d.conj())
                .expect("conjugate of a unimodular matrix")
        };
        match (self, other) {
            (Isometry::Mobius(a), Isometry::Mobius(b)) => Isometry::Mobius(a.compose(b)),
            (Isometry::Mobius(a), Isometry::AntiMobius(b)) => Isometry::AntiMobius(a.compose(b)),
            (Isometry::AntiMobius(a), Isometry::Mobius(b)) => {
                Isometry::AntiMobius(a.compose(&conj(b)))
            }
            (Isometry::AntiMobius(a), Isometry::AntiMobius(b)) => {
                Isometry::Mobius(a.compose(&conj(b)))
            }
        }
    }

    pub fn identity() -> Self {
        Isometry::Mobius(MobiusMap::identity())
    }
}

#[derive(Debug, Clone)]
pub struct OrbitOptions {
    /// Maximal word length.
    pub depth: usize,
    /// Orbit points with height at most this are projected to the boundary.
    pub eps_proj: f64,
    /// Cap on emitted points and on the breadth-first frontier.
    pub cap: usize,
    /// Starting point `(z, t)` in the upper half-space.
    pub basepoint: (Complex64, f64),
    /// Boundary points forced into the cloud (parabolic points and the like).
    pub special: Vec<Complex64>,
    /// Limit point whose images are emitted in place of the vertical
    /// projections, placing every emitted point exactly on the limit set.
    pub anchor: Option<Complex64>,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            depth: 64,
            eps_proj: 1e-3,
            cap: 2_000_000,
            basepoint: (Complex64::new(0.0, 0.0), 1.0),
            special: Vec::new(),
            anchor: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitOutput {
    pub cloud: PointCloud,
    /// Whether enumeration stopped at the point cap (the cloud is partial).
    pub cap_exceeded: bool,
    pub words_visited: usize,
}

#[derive(Clone, Copy)]
struct Node {
    z: Complex64,
    t: f64,
    last: usize,
    /// Image of the anchor under the same word.
    a: Option<Complex64>,
}

impl Node {
    fn emitted(&self) -> Complex64 {
        self.a.unwrap_or(self.z)
    }
}

/// Orbit of a basepoint under the group generated by `alphabet`, with
/// `inverse[i]` the index of the inverse of letter `i`.
pub(crate) fn enumerate_orbit(
    alphabet: &[Isometry],
    inverse: &[usize],
    opts: &OrbitOptions,
    provenance: String,
) -> Result<OrbitOutput> {
    if alphabet.is_empty() {
        return Err(Error::InvalidParams(
            "orbit enumeration needs at least one generator".into(),
        ));
    }
    if !(opts.eps_proj > 0.0) || !(opts.basepoint.1 > 0.0) {
        return Err(Error::InvalidParams(
            "projection threshold and basepoint height must be positive".into(),
        ));
    }
    let mut coords: Vec<f64> = opts.special.iter().flat_map(|z| [z.re, z.im]).collect();
    let pinned = opts.special.len();
    let mut emitted = 0usize;
    let mut visited = 1usize;
    let mut cap_exceeded = false;
    let (z0, t0) = opts.basepoint;
    let cell = 0.25 * opts.eps_proj;
    let key = |z: Complex64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
    let mut occupied = HashSet::new();
    let root = Node {
        z: z0,
        t: t0,
        last: usize::MAX,
        a: opts.anchor,
    };
    if t0 <= opts.eps_proj {
        let e = root.emitted();
        coords.extend_from_slice(&[e.re, e.im]);
        emitted += 1;
        occupied.insert(key(e));
    }
    let mut frontier = vec![root];
    for _ in 0..opts.depth {
        if frontier.is_empty() {
            break;
        }
        let children: Vec<Vec<Node>> = frontier
            .par_iter()
            .map(|node| {
                alphabet
                    .iter()
                    .enumerate()
                    .filter(|&(g, _)| node.last == usize::MAX || g != inverse[node.last])
                    .map(|(g, map)| {
                        let (z, t) = map.apply_upper(node.z, node.t);
                        let a = node.a.and_then(|a| map.apply_boundary(a));
                        Node { z, t, last: g, a }
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for node in children.into_iter().flatten() {
            visited += 1;
            if node.t <= opts.eps_proj {
                // Near-boundary words are followed only while they reach new cells.
                let e = node.emitted();
                if occupied.insert(key(e)) {
                    coords.extend_from_slice(&[e.re, e.im]);
                    emitted += 1;
                    next.push(node);
                }
            } else {
                next.push(node);
            }
            if emitted >= opts.cap || next.len() >= opts.cap {
                cap_exceeded = true;
                break;
            }
        }
        if cap_exceeded {
            break;
        }
        frontier = next;
    }
    if coords.len() / 2 < 2 {
        return Err(Error::InvalidParams(format!(
            "orbit produced {} boundary points; increase depth or eps_proj",
            coords.len() / 2
        )));
    }
    let cloud = finalize_cloud(2, coords, pinned, 0.25 * opts.eps_proj, provenance)?;
    Ok(OrbitOutput {
        cloud,
        cap_exceeded,
        words_visited: visited,
    })
}

/// Boundary projections of the orbit of `opts.basepoint` under the group
/// generated by `generators` (inverses added automatically), enumerated
/// breadth-first over reduced words.
pub fn kleinian_orbit(generators: &[MobiusMap], opts: &OrbitOptions) -> Result<OrbitOutput> {
    if generators.is_empty() {
        return Err(Error::InvalidParams("empty generator list".into()));
    }
    let mut alphabet = Vec::new();
    let mut inverse = Vec::new();
    for g in generators {
        let i = alphabet.len();
        if g.compose(g).is_identity() {
            alphabet.push(Isometry::Mobius(*g));
            inverse.push(i);
        } else {
            alphabet.push(Isometry::Mobius(*g));
            alphabet.push(Isometry::Mobius(g.inverse()));
            inverse.push(i + 1);
            inverse.push(i);
        }
    }
    let provenance = format!(
        "kleinian_orbit generators={} depth={} eps_proj={:e}",
        generators.len(),
        opts.depth,
        opts.eps_proj
    );
    enumerate_orbit(&alphabet, &inverse, opts, provenance)
}

/// Mirrors of the dual configuration of the Apollonian packing bounded by the
/// unit circle and the circles `|z ∓ 1/2| = 1/2`, `|z − 2i/3| = 1/3`: the
/// real line and the circles `|z ∓ 1 − i| = 1`, `|z − i/4| = 1/4`.
pub fn apollonian_mirrors() -> Vec<Isometry> {
    let c = Complex64::new;
    vec![
        Isometry::line_reflection(c(0.0, 0.0), 0.0).expect("valid mirror"),
        Isometry::circle_inversion(c(-1.0, 1.0), 1.0).expect("valid mirror"),
        Isometry::circle_inversion(c(1.0, 1.0), 1.0).expect("valid mirror"),
        Isometry::circle_inversion(c(0.0, 0.25), 0.25).expect("valid mirror"),
    ]
}

/// Tangency points of the packing (the parabolic fixed points of the
/// reflection group) and their mirror images in the real line.
pub fn apollonian_cusps() -> Vec<Complex64> {
    let c = Complex64::new;
    vec![
        c(0.0, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
        c(0.0, 1.0),
        c(0.0, -1.0),
        c(0.2, 0.4),
        c(-0.2, 0.4),
        c(0.2, -0.4),
        c(-0.2, -0.4),
    ]
}

/// A reflection of the boundary together with the closed disc (or half-plane)
/// on the side away from the fundamental domain.
#[derive(Debug, Clone, Copy)]
struct Mirror {
    map: Isometry,
    /// Three points on the mirror circle.
    rim: [Complex64; 3],
    /// A limit point on the mirror circle.
    anchor: Complex64,
}

/// Diameter of the circle through three points; infinite for a line or a
/// circle through `∞`.
fn circle_diameter(p: [Option<Complex64>; 3]) -> f64 {
    let [Some(a), Some(b), Some(c)] = p else {
        return f64::INFINITY;
    };
    let (ab, ac, bc) = ((b - a).norm(), (c - a).norm(), (c - b).norm());
    let cross = ((b - a).conj() * (c - a)).im.abs();
    if cross <= 1e-15 * ab * ac {
        return f64::INFINITY;
    }
    // Circumdiameter = product of the sides over twice the triangle area.
    ab * ac * bc / cross
}

/// Limit set of a group generated by reflections in mutually tangent or
/// disjoint circles. A reduced word `s_1 … s_n` indexes the disc
/// `s_1 ∘ … ∘ s_{n−1}(D_{s_n})`, and these discs nest as words grow; a word
/// is a leaf once its disc has diameter at most `eps`, and emits the image of
/// the anchor of `s_n`. The emitted set is `eps`-dense in the limit set.
fn reflection_limit_set(
    mirrors: &[Mirror],
    opts: &OrbitOptions,
    provenance: String,
) -> Result<OrbitOutput> {
    #[derive(Clone, Copy)]
    struct Word {
        prefix: Isometry,
        last: usize,
        len: usize,
    }
    enum Visit {
        Leaf(Option<Complex64>),
        Inner,
    }
    let max_len = opts.depth.max(1);
    let visit = |w: &Word, out: &mut Vec<Word>| -> Visit {
        let m = &mirrors[w.last];
        let d = circle_diameter(m.rim.map(|z| w.prefix.apply_boundary(z)));
        if d <= opts.eps_proj || w.len >= max_len {
            return Visit::Leaf(w.prefix.apply_boundary(m.anchor));
        }
        let prefix = w.prefix.compose(&m.map);
        // Reversed so that a stack pops children in alphabet order.
        out.extend(
            (0..mirrors.len())
                .rev()
                .filter(|&t| t != w.last)
                .map(|last| Word {
                    prefix,
                    last,
                    len: w.len + 1,
                }),
        );
        Visit::Inner
    };

    // Expand breadth-first into enough subtrees to spread over threads, then
    // walk each subtree depth-first.
    let mut coords: Vec<f64> = opts.special.iter().flat_map(|z| [z.re, z.im]).collect();
    let pinned = opts.special.len();
    let mut roots: Vec<Word> = (0..mirrors.len())
        .map(|last| Word {
            prefix: Isometry::identity(),
            last,
            len: 1,
        })
        .collect();
    let mut visited = 0usize;
    let mut early = Vec::new();
    while !roots.is_empty() && roots.len() < 512 {
        let mut next = Vec::new();
        for w in &roots {
            visited += 1;
            let mut kids = Vec::new();
            if let Visit::Leaf(Some(z)) = visit(w, &mut kids) {
                early.push(z);
            }
            kids.reverse();
            next.extend(kids);
        }
        roots = next;
    }
    let cell = 0.5 * opts.eps_proj;
    let key = |z: Complex64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
    let emitted = AtomicUsize::new(early.len());
    let stop = AtomicBool::new(early.len() >= opts.cap);
    let walks: Vec<(Vec<Complex64>, usize)> = roots
        .par_iter()
        .map(|root| {
            let mut pts = Vec::new();
            // Leaves of one subtree often share a half-resolution cell; one
            // representative per cell is enough.
            let mut cells = HashSet::new();
            let mut count = 0usize;
            let mut stack = vec![*root];
            while let Some(w) = stack.pop() {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                count += 1;
                if let Visit::Leaf(Some(z)) = visit(&w, &mut stack) {
                    if !cells.insert(key(z)) {
                        continue;
                    }
                    pts.push(z);
                    if emitted.fetch_add(1, Ordering::Relaxed) + 1 >= opts.cap {
                        stop.store(true, Ordering::Relaxed);
                    }
                }
            }
            (pts, count)
        })
        .collect();
    for z in early.iter().chain(walks.iter().flat_map(|(p, _)| p.iter())) {
        coords.extend_from_slice(&[z.re, z.im]);
    }
    visited += walks.iter().map(|(_, c)| c).sum::<usize>();
    let cap_exceeded = stop.load(Ordering::Relaxed);
    if coords.len() / 2 < 2 {
        return Err(Error::InvalidParams(format!(
            "limit set produced {} points; increase depth",
            coords.len() / 2
        )));
    }
    let cloud = finalize_cloud(2, coords, pinned, opts.eps_proj, provenance)?;
    Ok(OrbitOutput {
        cloud,
        cap_exceeded,
        words_visited: visited,
    })
}

/// Limit set of the reflection group of the Apollonian dual configuration
/// (the residual set of the packing inside the unit disc), sampled so that
/// every point of the set lies within `eps` of the cloud. `depth` bounds the
/// word length and `cap` the number of emitted points.
pub fn apollonian_orbit(eps: f64, depth: usize, cap: usize) -> Result<OrbitOutput> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParams("resolution must be positive".into()));
    }
    let c = Complex64::new;
    let maps = apollonian_mirrors();
    let circle = |z0: Complex64, r: f64| [z0 + r, z0 - r, z0 + c(0.0, r)];
    let mirrors = [
        Mirror {
            map: maps[0],
            rim: [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            anchor: c(0.0, 0.0),
        },
        Mirror {
            map: maps[1],
            rim: circle(c(-1.0, 1.0), 1.0),
            anchor: c(-1.0, 0.0),
        },
        Mirror {
            map: maps[2],
            rim: circle(c(1.0, 1.0), 1.0),
            anchor: c(1.0, 0.0),
        },
        Mirror {
            map: maps[3],
            rim: circle(c(0.0, 0.25), 0.25),
            anchor: c(0.0, 0.0),
        },
    ];
    let opts = OrbitOptions {
        depth,
        eps_proj: eps,
        cap,
        special: apollonian_cusps(),
        ..Default::default()
    };
    reflection_limit_set(
        &mirrors,
        &opts,
        format!("apollonian eps={eps:e} depth={depth}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inversions_are_involutions_fixing_their_circle() {
        for m in apollonian_mirrors() {
            for z in [c(0.3, 0.7), c(-2.0, 0.1), c(0.05, 0.2)] {
                let w = m.apply_boundary(m.apply_boundary(z).unwrap()).unwrap();
                assert!((w - z).norm() < 1e-12);
                let (u, s) = m.apply_upper(z, 0.4);
                let (v, t) = m.apply_upper(u, s);
                assert!((v - z).norm() < 1e-12 && (t - 0.4).abs() < 1e-12);
            }
        }
        let inv = Isometry::circle_inversion(c(0.0, 0.25), 0.25).unwrap();
        let on = c(0.25, 0.25);
        assert!((inv.apply_boundary(on).unwrap() - on).norm() < 1e-12);
        let refl = Isometry::line_reflection(c(0.0, 0.0), 0.0).unwrap();
        assert!((refl.apply_boundary(c(0.3, 0.4)).unwrap() - c(0.3, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn mirrors_are_mutually_tangent() {
        // Dual circles: centres and radii; each pair of circles is tangent.
        let circles = [
            (c(-1.0, 1.0), 1.0),
            (c(1.0, 1.0), 1.0),
            (c(0.0, 0.25), 0.25),
        ];
        for i in 0..3 {
            for j in i + 1..3 {
                let d = (circles[i].0 - circles[j].0).norm();
                assert!((d - circles[i].1 - circles[j].1).abs() < 1e-12);
            }
            // Tangent to the real line.
            assert!((circles[i].0.im - circles[i].1).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_generators_rejected() {
        assert!(kleinian_orbit(&[], &OrbitOptions::default()).is_err());
    }

    #[test]
    fn parabolic_orbit_accumulates_at_rate_one_over_n() {
        // z ↦ z/(z+1) fixes 0; its orbit of (1, 1) approaches 0 like 1/n.
        let f = MobiusMap::from_real(1.0, 0.0, 1.0, 1.0).unwrap();
        let opts = OrbitOptions {
            depth: 50,
            eps_proj: 1e-3,
            basepoint: (c(1.0, 0.0), 1.0),
            ..Default::default()
        };
        let out = kleinian_orbit(&[f], &opts).unwrap();
        assert!(!out.cap_exceeded);
        // Points sit near f^n(1) = 1/(n+1) for n > 0 and 1/(1−n) for n < 0,
        // so 1/|z| advances in unit steps on each side of the fixed point.
        for side in [1.0, -1.0] {
            let mut inv: Vec<f64> = out
                .cloud
                .points()
                .filter(|p| p[0] * side > 0.0)
                .map(|p| 1.0 / p[0].hypot(p[1]))
                .collect();
            inv.sort_by(f64::total_cmp);
            assert!(inv.len() >= 10);
            for w in inv.windows(2) {
                assert!((w[1] - w[0] - 1.0).abs() < 0.1, "step {}", w[1] - w[0]);
            }
        }
    }

    #[test]
    fn cap_returns_partial_output() {
        let out = apollonian_orbit(1e-4, 200, 50_000).unwrap();
        assert!(out.cap_exceeded);
        assert!(out.cloud.len() > 100);
    }

    #[test]
    fn apollonian_coverage_is_stable_under_refinement() {
        use crate::estimators::GridIndex;
        let coarse =
            GridIndex::new(&apollonian_orbit(1e-3, 10_000, 1_000_000).unwrap().cloud).unwrap();
        let fine =
            GridIndex::new(&apollonian_orbit(2.5e-4, 10_000, 1_000_000).unwrap().cloud).unwrap();
        assert_eq!(coarse.root_side(), fine.root_side());
        // Cells at least 16 times the coarse resolution are all found.
        for level in 0..=6 {
            assert_eq!(
                coarse.occupied_at(level),
                fine.occupied_at(level),
                "level {level}"
            );
        }
    }

    #[test]
    fn apollonian_cloud_lies_in_closed_disc_and_is_invariant() {
        let out = apollonian_orbit(2e-3, 400, 2_000_000).unwrap();
        assert!(!out.cap_exceeded);
        let cloud = &out.cloud;
        assert!(cloud.points().all(|p| p[0].hypot(p[1]) <= 1.0 + 1e-2));
        assert_eq!(cloud.special().len(), apollonian_cusps().len());
        // Generator invariance up to resolution.
        let eps = cloud.eps_min();
        let pts: Vec<Complex64> = cloud.points().map(|p| c(p[0], p[1])).collect();
        let tol = 2.0 * eps.max(2e-3);
        for m in apollonian_mirrors() {
            let mut good = 0;
            let mut total = 0;
            for z in pts.iter().step_by(37) {
                let Some(w) = m.apply_boundary(*z) else {
                    continue;
                };
                total += 1;
                if pts.iter().any(|q| (q - w).norm() <= tol) {
                    good += 1;
                }
            }
            assert!(good as f64 >= 0.95 * total as f64, "{good}/{total}");
        }
    }
}
