use alloc::format;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SampleSet;
use crate::error::{Error, Result};

/// Points discarded at the start of a chaos-game orbit.
pub const CHAOS_BURN_IN: usize = 100;

/// The deterministic algorithm stops refining before exceeding this many points.
pub const DETERMINISTIC_POINT_CAP: usize = 2_000_000;

/// `w(x, y) = (a x + e, c x + d y + f)` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMap {
    pub a: BigRational,
    pub e: BigRational,
    pub c: BigRational,
    pub d: BigRational,
    pub f: BigRational,
}

impl ExactMap {
    pub fn apply(&self, x: &BigRational, y: &BigRational) -> (BigRational, BigRational) {
        (&self.a * x + &self.e, &self.c * x + &self.d * y + &self.f)
    }
}

/// A fractal interpolation system in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct Fif {
    pub nodes: Vec<(BigRational, BigRational)>,
    pub maps: Vec<ExactMap>,
    /// Certified radius of each node's `y` (zero for exact nodes).
    pub node_radii: Vec<f64>,
}

/// Builds the shear maps interpolating `nodes` with vertical scaling `d` on
/// every map: `w_j` sends the first node to node `j-1` and the last node to
/// node `j`.
pub fn fif_from_nodes(nodes: Vec<(BigRational, BigRational)>, d: BigRational) -> Result<Fif> {
    if nodes.len() < 3 {
        return Err(Error::DegenerateNodes(format!(
            "need at least 3 nodes (2 maps), got {}",
            nodes.len()
        )));
    }
    if d.abs() >= BigRational::one() {
        return Err(Error::InvalidArgument(format!("vertical scaling |{d}| must be below 1")));
    }
    if let Some(w) = nodes.windows(2).find(|w| w[0].0 >= w[1].0) {
        return Err(Error::DegenerateNodes(format!(
            "x values must be strictly increasing ({} then {})",
            w[0].0, w[1].0
        )));
    }
    let (x0, y0) = nodes[0].clone();
    let (xn, yn) = nodes[nodes.len() - 1].clone();
    let width = &xn - &x0;
    let maps = nodes
        .windows(2)
        .map(|w| {
            let (xp, yp) = (&w[0].0, &w[0].1);
            let (xj, yj) = (&w[1].0, &w[1].1);
            ExactMap {
                a: (xj - xp) / &width,
                e: (&xn * xp - &x0 * xj) / &width,
                c: (yj - yp - &d * (&yn - &y0)) / &width,
                f: (&xn * yp - &x0 * yj - &d * (&xn * &y0 - &x0 * &yn)) / &width,
                d: d.clone(),
            }
        })
        .collect();
    let node_radii = alloc::vec![0.0; nodes.len()];
    Ok(Fif { nodes, maps, node_radii })
}

/// Interpolation system through the sample nodes. With `augment_endpoints`
/// the node at `x = 1` is appended so that the domain is all of `[0, 1]`.
/// Node `y` values are interval midpoints; their radii are kept.
pub fn build_fif_ifs(samples: &SampleSet, d: f64, augment_endpoints: bool) -> Result<Fif> {
    let d = BigRational::from_float(d)
        .ok_or_else(|| Error::InvalidArgument(format!("vertical scaling {d} is not finite")))?;
    let mut pairs: Vec<_> = samples.pairs.iter().collect();
    if augment_endpoints {
        pairs.push(&samples.upper);
    }
    let mut nodes = Vec::with_capacity(pairs.len());
    let mut radii = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let xv = x.exact_value().ok_or(Error::UnknownTail)?;
        nodes.push((xv, y.midpoint()));
        radii.push(y.to_real().radius);
    }
    let mut fif = fif_from_nodes(nodes, d)?;
    fif.node_radii = radii;
    Ok(fif)
}

impl Fif {
    /// Checks `w_j(x_0, y_0) = (x_{j-1}, y_{j-1})` and
    /// `w_j(x_N, y_N) = (x_j, y_j)` exactly for every map.
    pub fn verify_endpoint_conditions(&self) -> bool {
        let first = &self.nodes[0];
        let last = &self.nodes[self.nodes.len() - 1];
        self.maps.iter().enumerate().all(|(j, w)| {
            w.apply(&first.0, &first.1) == self.nodes[j]
                && w.apply(&last.0, &last.1) == self.nodes[j + 1]
        })
    }

    /// All `|a_j| < 1`.
    pub fn is_contractive_in_x(&self) -> bool {
        self.maps.iter().all(|w| w.a.abs() < BigRational::one())
    }

    pub fn to_ifs(&self) -> Result<Ifs> {
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        let maps = self
            .maps
            .iter()
            .map(|w| AffineMap { a: f(&w.a), e: f(&w.e), c: f(&w.c), d: f(&w.d), f: f(&w.f) })
            .collect();
        let nodes = self.nodes.iter().map(|(x, y)| [f(x), f(y)]).collect();
        Ifs::new(maps, nodes)
    }

    /// Value of the piecewise-linear interpolant of the nodes, exactly.
    pub fn linear_interpolant(&self, x: &BigRational) -> Option<BigRational> {
        let j = self.nodes.windows(2).position(|w| &w[0].0 <= x && x <= &w[1].0)?;
        let (x0, y0) = &self.nodes[j];
        let (x1, y1) = &self.nodes[j + 1];
        if x1 == x0 {
            return Some(y0.clone());
        }
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

/// `w(x, y) = (a x + e, c x + d y + f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub a: f64,
    pub e: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
}

impl AffineMap {
    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [self.a * p[0] + self.e, self.c * p[0] + self.d * p[1] + self.f]
    }
}

/// Invariant rectangle of an IFS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Frame {
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn diameter(&self) -> f64 {
        libm::hypot(self.x_max - self.x_min, self.height())
    }

    pub fn contains(&self, p: [f64; 2], slack: f64) -> bool {
        p[0] >= self.x_min - slack
            && p[0] <= self.x_max + slack
            && p[1] >= self.y_min - slack
            && p[1] <= self.y_max + slack
    }
}

/// A float IFS of interpolation shear maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs {
    pub maps: Vec<AffineMap>,
    pub nodes: Vec<[f64; 2]>,
    pub d_max: f64,
    pub frame: Frame,
}

impl Ifs {
    /// Validates contractivity and computes `d_max` and the invariant frame.
    pub fn new(maps: Vec<AffineMap>, nodes: Vec<[f64; 2]>) -> Result<Self> {
        if maps.len() < 2 || nodes.len() != maps.len() + 1 {
            return Err(Error::DegenerateNodes(format!(
                "{} maps need {} nodes, got {}",
                maps.len(),
                maps.len() + 1,
                nodes.len()
            )));
        }
        if let Some(w) = maps.iter().find(|w| !(w.a.abs() < 1.0 && w.d.abs() < 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "map with a = {}, d = {} is not contractive",
                w.a, w.d
            )));
        }
        let x_min = nodes[0][0];
        let x_max = nodes[nodes.len() - 1][0];
        let d_max = maps.iter().map(|w| w.d.abs()).fold(0.0, f64::max);
        // Range of the sheared part c x + f over the domain, per map.
        let ends = |w: &AffineMap| {
            let (u, v) = (w.c * x_min + w.f, w.c * x_max + w.f);
            (u.min(v), u.max(v))
        };
        let (y_min, y_max) = if d_max == 0.0 {
            maps.iter().map(ends).fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (lo, hi)| {
                (acc.0.min(lo), acc.1.max(hi))
            })
        } else {
            let reach = maps
                .iter()
                .map(|w| {
                    let (lo, hi) = ends(w);
                    lo.abs().max(hi.abs())
                })
                .fold(0.0, f64::max);
            let bound = reach / (1.0 - d_max);
            (-bound, bound)
        };
        let frame = Frame { x_min, x_max, y_min, y_max };
        Ok(Ifs { maps, nodes, d_max, frame })
    }

    /// `max_j max(|a_j|, |d_j|)`.
    pub fn contraction_factor(&self) -> f64 {
        self.maps.iter().map(|w| w.a.abs().max(w.d.abs())).fold(0.0, f64::max)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.frame.x_min, self.frame.x_max)
    }

    /// Index of the map whose image interval `[x_{j-1}, x_j]` contains `x`.
    fn piece(&self, x: f64) -> usize {
        let n = self.maps.len();
        let idx = self.nodes[1..].partition_point(|p| p[0] < x);
        idx.min(n - 1)
    }
}

/// How [`attractor_points`] approximates the attractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttractorMode {
    /// Seeded random orbit with uniform map choice.
    Chaos,
    /// Repeated union of the images of all maps, starting from the nodes.
    Deterministic,
}

/// Points approximating an attractor, with how they were generated.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 2]>,
    pub mode: AttractorMode,
    pub iterations: usize,
    /// Refinement rounds actually performed (deterministic mode).
    pub rounds: usize,
    pub seed: u64,
}

/// Seeded uniform map indices for the chaos game.
pub fn chaos_selectors(seed: u64, n_maps: usize, count: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(0..n_maps)).collect()
}

/// Orbit of the first node under the given map sequence; one point per step.
pub fn chaos_orbit(ifs: &Ifs, selectors: &[usize]) -> Vec<[f64; 2]> {
    let mut p = ifs.nodes[0];
    selectors
        .iter()
        .map(|&j| {
            p = ifs.maps[j].apply(p);
            p
        })
        .collect()
}

pub fn attractor_points(ifs: &Ifs, mode: AttractorMode, iters: usize, seed: u64) -> PointCloud {
    match mode {
        AttractorMode::Chaos => {
            let selectors = chaos_selectors(seed, ifs.maps.len(), iters + CHAOS_BURN_IN);
            let mut points = chaos_orbit(ifs, &selectors);
            points.drain(..CHAOS_BURN_IN.min(points.len()));
            PointCloud { points, mode, iterations: iters, rounds: iters, seed }
        }
        AttractorMode::Deterministic => {
            let mut points = ifs.nodes.clone();
            let mut rounds = 0;
            while rounds < iters && points.len() * ifs.maps.len() <= DETERMINISTIC_POINT_CAP {
                points = ifs
                    .maps
                    .iter()
                    .flat_map(|w| points.iter().map(move |&p| w.apply(p)))
                    .collect();
                rounds += 1;
            }
            PointCloud { points, mode, iterations: iters, rounds, seed }
        }
    }
}

/// Value of the interpolation function at `x`, following the address of `x`
/// through at most `depth` inverse maps. Returns the value and a bound on its
/// distance to the attractor's value: the product of the `|d_j|` along the
/// path times half the frame height.
pub fn eval_fif(ifs: &Ifs, x: f64, depth: usize) -> Result<(f64, f64)> {
    let (lo, hi) = ifs.domain();
    if !(lo..=hi).contains(&x) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("evaluation depth must be at least 1".into()));
    }
    let mut u = x;
    let mut acc = 0.0;
    let mut scale = 1.0;
    for _ in 0..depth {
        let w = &ifs.maps[ifs.piece(u)];
        let pre = ((u - w.e) / w.a).clamp(lo, hi);
        acc += scale * (w.c * pre + w.f);
        scale *= w.d;
        u = pre;
        if scale == 0.0 {
            return Ok((acc, 0.0));
        }
    }
    let mid = 0.5 * (ifs.frame.y_min + ifs.frame.y_max);
    Ok((acc + scale * mid, scale.abs() * 0.5 * ifs.frame.height()))
}

#[cfg(test)]
pub(crate) fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn q(n: i64, d: i64) -> BigRational {
        rational(n, d)
    }

    fn diagonal() -> Fif {
        fif_from_nodes(vec![(q(0, 1), q(0, 1)), (q(1, 2), q(1, 2)), (q(1, 1), q(1, 1))], q(0, 1))
            .unwrap()
    }

    fn tent() -> Fif {
        fif_from_nodes(vec![(q(0, 1), q(0, 1)), (q(1, 2), q(1, 1)), (q(1, 1), q(0, 1))], q(0, 1))
            .unwrap()
    }

    #[test]
    fn diagonal_maps_halve() {
        let f = diagonal();
        assert_eq!(
            f.maps[0],
            ExactMap { a: q(1, 2), e: q(0, 1), c: q(1, 2), d: q(0, 1), f: q(0, 1) }
        );
        assert_eq!(
            f.maps[1],
            ExactMap { a: q(1, 2), e: q(1, 2), c: q(1, 2), d: q(0, 1), f: q(1, 2) }
        );
        assert!(f.verify_endpoint_conditions());
    }

    #[test]
    fn tent_first_map_hits_peak() {
        let f = tent();
        assert_eq!(f.maps[0].apply(&q(1, 1), &q(0, 1)), (q(1, 2), q(1, 1)));
        assert!(f.verify_endpoint_conditions());
        let ifs = f.to_ifs().unwrap();
        assert_eq!(eval_fif(&ifs, 0.5, 10).unwrap(), (1.0, 0.0));
        assert_eq!(eval_fif(&ifs, 0.25, 10).unwrap().0, 0.5);
    }

    #[test]
    fn nonzero_scaling_keeps_endpoint_conditions() {
        let nodes = vec![(q(0, 1), q(1, 3)), (q(1, 3), q(1, 1)), (q(2, 3), q(0, 1)), (q(1, 1), q(1, 2))];
        let f = fif_from_nodes(nodes, q(-3, 10)).unwrap();
        assert!(f.verify_endpoint_conditions());
        let ifs = f.to_ifs().unwrap();
        for (x, y) in [(0.0, 1.0 / 3.0), (1.0 / 3.0, 1.0), (2.0 / 3.0, 0.0), (1.0, 0.5)] {
            let (v, bound) = eval_fif(&ifs, x, 60).unwrap();
            assert!((v - y).abs() <= bound + 1e-12, "x = {x}: {v} vs {y} ± {bound}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        let two = vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1))];
        assert!(matches!(fif_from_nodes(two, q(0, 1)), Err(Error::DegenerateNodes(_))));
        let dup = vec![(q(0, 1), q(0, 1)), (q(0, 1), q(1, 1)), (q(1, 1), q(1, 1))];
        assert!(matches!(fif_from_nodes(dup, q(0, 1)), Err(Error::DegenerateNodes(_))));
        let ok = vec![(q(0, 1), q(0, 1)), (q(1, 2), q(1, 1)), (q(1, 1), q(0, 1))];
        assert!(fif_from_nodes(ok, q(1, 1)).is_err());
    }

    #[test]
    fn diagonal_chaos_game_stays_on_diagonal() {
        let ifs = diagonal().to_ifs().unwrap();
        let cloud = attractor_points(&ifs, AttractorMode::Chaos, 10_000, 5);
        assert_eq!(cloud.points.len(), 10_000);
        assert!(cloud.points.iter().all(|p| (p[0] - p[1]).abs() < 1e-9));
        assert_eq!(cloud, attractor_points(&ifs, AttractorMode::Chaos, 10_000, 5));
    }

    #[test]
    fn diagonal_evaluation_is_identity() {
        let ifs = diagonal().to_ifs().unwrap();
        let (y, bound) = eval_fif(&ifs, 0.3, 40).unwrap();
        assert!((y - 0.3).abs() <= 1e-9);
        assert_eq!(bound, 0.0);
        assert!(matches!(eval_fif(&ifs, 1.5, 40), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn deterministic_rounds_grow_geometrically() {
        let ifs = tent().to_ifs().unwrap();
        let cloud = attractor_points(&ifs, AttractorMode::Deterministic, 5, 0);
        assert_eq!(cloud.rounds, 5);
        assert_eq!(cloud.points.len(), 3 * 32);
        assert!(cloud.points.iter().all(|p| ifs.frame.contains(*p, 1e-12)));
    }
}
