//! Hausdorff topology on configurations.
//!
//! Configurations are lifted to the unit sphere by stereographic projection
//! with the point at infinity adjoined as the north pole. Two configurations
//! are close when their lifted center sets are close in the Hausdorff
//! distance built on great-circle distance.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::config::Configuration;
use crate::geometry::{InternalPoint, PaperPoint, Rect};
use crate::math;

/// Spherical coordinates: polar angle from the north pole and azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub alpha: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub const NORTH: SpherePoint = SpherePoint { alpha: 0.0, phi: 0.0 };

    pub fn new(alpha: f64, phi: f64) -> Self {
        if alpha == 0.0 {
            return SpherePoint::NORTH;
        }
        SpherePoint {
            alpha,
            phi: math::rem_euclid(phi, TAU),
        }
    }

    pub fn is_north(&self) -> bool {
        self.alpha == 0.0
    }

    fn cartesian(&self) -> [f64; 3] {
        let s = math::sin(self.alpha);
        [s * math::cos(self.phi), s * math::sin(self.phi), math::cos(self.alpha)]
    }
}

/// Stereographic lift: `alpha = 2 atan(1 / r)`, `phi` the polar angle of `z`.
pub fn lift(z: PaperPoint) -> SpherePoint {
    let r = z.norm();
    let alpha = 2.0 * math::atan2(1.0, r);
    let phi = if r == 0.0 { 0.0 } else { math::atan2(z.y, z.x) };
    SpherePoint::new(alpha, phi)
}

#[inline]
fn central_angle(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let cx = p[1] * q[2] - p[2] * q[1];
    let cy = p[2] * q[0] - p[0] * q[2];
    let cz = p[0] * q[1] - p[1] * q[0];
    let cross = math::sqrt(cx * cx + cy * cy + cz * cz);
    let dot = p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    math::atan2(cross, dot)
}

/// Great-circle distance on the unit sphere, in `[0, π]`.
pub fn sphere_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    central_angle(&p.cartesian(), &q.cartesian()).clamp(0.0, PI)
}

/// Lifted points of `{z in g : |z| <= radius}` plus the north pole, which
/// comes first.
fn lifted_points(g: &Configuration, radius: f64) -> Vec<[f64; 3]> {
    let mut out = alloc::vec![SpherePoint::NORTH.cartesian()];
    for p in points_within(g, radius) {
        out.push(lift(p).cartesian());
    }
    out
}

/// Centers of `g` with Euclidean norm `<= radius`, lexicographically sorted.
pub fn points_within(g: &Configuration, radius: f64) -> Vec<PaperPoint> {
    let mut pts = Vec::new();
    // the Euclidean disc is rotation invariant, so the bounding square in
    // the internal frame has the same half-width
    let r = Rect::square(InternalPoint::new(0.0, 0.0), radius);
    g.for_each_center_in(&r, |p, _| {
        if p.norm() <= radius {
            pts.push(p)
        }
    });
    pts.sort_by(PaperPoint::lex_cmp);
    pts.dedup();
    pts
}

fn directed(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let mut worst = 0.0f64;
    for p in a {
        let mut nearest = f64::INFINITY;
        for q in b {
            let d = central_angle(p, q);
            if d < nearest {
                nearest = d;
                if nearest == 0.0 {
                    break;
                }
            }
        }
        worst = worst.max(nearest);
    }
    worst
}

fn hausdorff_lifted(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    f64::max(directed(a, b), directed(b, a))
}

/// Hausdorff distance and truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub value: f64,
    /// Every omitted point lifts within this distance of the north pole.
    pub error_bound: f64,
}

/// Hausdorff distance between the lifts of `g1` and `g2` truncated to
/// `|z| <= radius`.
pub fn hausdorff(g1: &Configuration, g2: &Configuration, radius: f64) -> Distance {
    let a = lifted_points(g1, radius);
    let b = lifted_points(g2, radius);
    Distance {
        value: hausdorff_lifted(&a, &b),
        error_bound: 2.0 * math::atan2(1.0, radius),
    }
}

/// Hausdorff distance between the lifts of two finite point lists, each
/// with the north pole adjoined.
pub fn hausdorff_points(a: &[PaperPoint], b: &[PaperPoint]) -> f64 {
    let lift_all = |pts: &[PaperPoint]| {
        let mut v = alloc::vec![SpherePoint::NORTH.cartesian()];
        v.extend(pts.iter().map(|&p| lift(p).cartesian()));
        v
    };
    hausdorff_lifted(&lift_all(a), &lift_all(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    Yes,
    No,
    Undecided,
}

/// Whether `d_H(g1, g2) < eps`, accounting for the truncation bound.
pub fn in_epsilon_neighborhood(g1: &Configuration, g2: &Configuration, eps: f64, radius: f64) -> Neighborhood {
    let d = hausdorff(g1, g2, radius);
    // identical truncations with nothing omitted beyond the radius
    if d.value + d.error_bound < eps || (d.value == 0.0 && g1 == g2) {
        Neighborhood::Yes
    } else if d.value - d.error_bound >= eps {
        Neighborhood::No
    } else {
        Neighborhood::Undecided
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("stage {stage} keeps only {survivors} configuration(s); at least 3 are needed")]
    InsufficientData { stage: u32, survivors: usize },
    #[error("empty sequence")]
    EmptySequence,
}

/// Result of the accumulation-point procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulation {
    /// Indices into the input sequence that survive every stage.
    pub indices: Vec<usize>,
    pub limit: Configuration,
}

/// Radius of `B_eps = {z : ρ(lift z, ∞) > eps}`.
pub fn ball_radius(eps: f64) -> f64 {
    1.0 / math::tan(eps / 2.0)
}

/// Extracts a subsequence converging in the Hausdorff topology, following
/// the diagonal compactness argument for `depth` stages with `ε_n = 1/n`.
///
/// Stage `n` keeps the indices whose number of points in `B_{ε_n}` is the
/// most frequent value (ties go to the value seen last), then keeps those
/// within `ε_n / 4` of the last survivor. The limit is the medoid of the
/// final survivors, restricted to `B_{ε_depth}`.
pub fn accumulation_candidate(seq: &[Configuration], depth: u32) -> Result<Accumulation, MetricError> {
    if seq.is_empty() {
        return Err(MetricError::EmptySequence);
    }
    let mut alive: Vec<usize> = (0..seq.len()).collect();
    let mut points: Vec<Vec<PaperPoint>> = Vec::new();
    for stage in 1..=depth.max(1) {
        let eps = 1.0 / stage as f64;
        let radius = ball_radius(eps);
        points = alive.iter().map(|&j| open_ball_points(&seq[j], radius)).collect();

        // most frequent cardinality, latest index on ties
        let mut best: Option<(usize, usize, usize)> = None; // (count, last index, cardinality)
        for (pos, pts) in points.iter().enumerate() {
            let card = pts.len();
            let freq = points.iter().filter(|q| q.len() == card).count();
            let cand = (freq, pos, card);
            best = match best {
                Some(b) if (b.0, b.1) >= (cand.0, cand.1) => Some(b),
                _ => Some(cand),
            };
        }
        let card = best.unwrap().2;
        let mut kept: Vec<(usize, Vec<PaperPoint>)> = alive
            .iter()
            .zip(points.drain(..))
            .filter(|(_, p)| p.len() == card)
            .map(|(&j, p)| (j, p))
            .collect();

        let tail = kept.last().unwrap().1.clone();
        kept.retain(|(_, p)| hausdorff_points(p, &tail) <= eps / 4.0);
        if kept.len() < 3 {
            return Err(MetricError::InsufficientData {
                stage,
                survivors: kept.len(),
            });
        }
        alive = kept.iter().map(|(j, _)| *j).collect();
        points = kept.into_iter().map(|(_, p)| p).collect();
    }

    // medoid: the survivor minimising its largest distance to the others
    let mut medoid = 0;
    let mut best = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let worst = points.iter().map(|q| hausdorff_points(p, q)).fold(0.0, f64::max);
        if worst < best {
            best = worst;
            medoid = i;
        }
    }
    let s = seq[alive[medoid]].s();
    let limit = Configuration::new_unchecked(s, points.swap_remove(medoid), None).expect("finite points from a valid configuration");
    Ok(Accumulation { indices: alive, limit })
}

fn open_ball_points(g: &Configuration, radius: f64) -> Vec<PaperPoint> {
    let mut pts = points_within(g, radius);
    pts.retain(|p| p.norm() < radius);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::FRAC_PI_2;

    fn single(x: f64, y: f64) -> Configuration {
        Configuration::explicit(1.0, vec![PaperPoint::new(x, y)]).unwrap()
    }

    // haversine form of the central angle with colatitudes
    fn haversine(p: &SpherePoint, q: &SpherePoint) -> f64 {
        let dlat = p.alpha - q.alpha;
        let dphi = p.phi - q.phi;
        let h = libm::sin(dlat / 2.0).powi(2) + libm::sin(p.alpha) * libm::sin(q.alpha) * libm::sin(dphi / 2.0).powi(2);
        2.0 * libm::asin(libm::sqrt(h.min(1.0)))
    }

    #[test]
    fn lift_fixtures() {
        assert!((lift(PaperPoint::new(1.0, 0.0)).alpha - FRAC_PI_2).abs() < 1e-15);
        assert!((lift(PaperPoint::new(0.0, -1.0)).alpha - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(lift(PaperPoint::ORIGIN).alpha, PI);
        assert!(lift(PaperPoint::new(1e300, 0.0)).alpha < 1e-299);
        let p = lift(PaperPoint::new(0.0, -2.0));
        assert!((p.phi - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn distance_fixtures() {
        let e0 = SpherePoint::new(FRAC_PI_2, 0.0);
        let e1 = SpherePoint::new(FRAC_PI_2, PI);
        assert_eq!(sphere_distance(&e0, &e0), 0.0);
        assert!((sphere_distance(&e0, &e1) - PI).abs() < 1e-15);
        assert!((sphere_distance(&e0, &SpherePoint::NORTH) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn distance_agrees_with_haversine() {
        let mut x = 0.123f64;
        for _ in 0..2000 {
            x = (x * 9301.0 + 0.49297).fract();
            let a1 = x * PI;
            x = (x * 9301.0 + 0.49297).fract();
            let p1 = x * TAU;
            x = (x * 9301.0 + 0.49297).fract();
            let a2 = x * PI;
            x = (x * 9301.0 + 0.49297).fract();
            let p2 = x * TAU;
            let (p, q) = (SpherePoint::new(a1, p1), SpherePoint::new(a2, p2));
            assert!((sphere_distance(&p, &q) - haversine(&p, &q)).abs() < 1e-12);
        }
    }

    #[test]
    fn hausdorff_fixtures() {
        let empty = Configuration::empty(1.0).unwrap();
        let d = hausdorff(&single(1.0, 0.0), &empty, 10.0);
        assert!((d.value - FRAC_PI_2).abs() < 1e-12);
        let d = hausdorff(&single(1.0, 0.0), &single(-1.0, 0.0), 10.0);
        assert!((d.value - FRAC_PI_2).abs() < 1e-12);
        let g = single(0.3, 0.4);
        assert_eq!(hausdorff(&g, &g, 10.0).value, 0.0);
        assert!((hausdorff(&g, &g, 10.0).error_bound - 2.0 * libm::atan(0.1)).abs() < 1e-15);
    }

    #[test]
    fn neighborhood_fixtures() {
        let empty = Configuration::empty(1.0).unwrap();
        let g = single(1.0, 0.0);
        assert_eq!(in_epsilon_neighborhood(&g, &g, 1e-6, 10.0), Neighborhood::Yes);
        assert_eq!(in_epsilon_neighborhood(&g, &empty, 1.0, 1e9), Neighborhood::No);
        assert_eq!(in_epsilon_neighborhood(&g, &empty, 1.58, 1e9), Neighborhood::Yes);
        assert_eq!(in_epsilon_neighborhood(&g, &empty, 1.58, 10.0), Neighborhood::Undecided);
    }

    #[test]
    fn constant_sequence() {
        let g = Configuration::explicit(1.0, vec![PaperPoint::new(0.0, 0.0), PaperPoint::new(2.0, 1.0)]).unwrap();
        let seq = vec![g.clone(); 6];
        let acc = accumulation_candidate(&seq, 5).unwrap();
        assert_eq!(acc.indices, (0..6).collect::<Vec<_>>());
        assert_eq!(acc.limit.core(), g.core());
    }

    #[test]
    fn escaping_singletons() {
        let seq: Vec<_> = (1..=200).map(|j| single(j as f64, 0.0)).collect();
        let acc = accumulation_candidate(&seq, 10).unwrap();
        assert!(acc.limit.core().is_empty());
    }

    #[test]
    fn converging_singletons() {
        let seq: Vec<_> = (1..=200).map(|j| single(1.0 + 1.0 / j as f64, 0.0)).collect();
        let depth = 8;
        let acc = accumulation_candidate(&seq, depth).unwrap();
        assert_eq!(acc.limit.core().len(), 1);
        let d = hausdorff_points(acc.limit.core(), &[PaperPoint::new(1.0, 0.0)]);
        assert!(d <= 0.25 / depth as f64, "d = {d}");
    }

    #[test]
    fn too_few_survivors() {
        let seq = vec![single(1.0, 0.0), single(5.0, 0.0)];
        assert!(matches!(accumulation_candidate(&seq, 2), Err(MetricError::InsufficientData { .. })));
    }
}
