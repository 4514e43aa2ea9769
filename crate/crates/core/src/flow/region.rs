use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::geometry::{DirectionVector, InternalPoint, PaperPoint, Rect};

/// A finite union of closed internal-frame rectangles with positive area.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    rects: Vec<Rect>,
}

impl Region {
    /// `None` if the union has zero area.
    pub fn union(rects: Vec<Rect>) -> Option<Region> {
        let r = Region { rects };
        (r.area() > 0.0).then_some(r)
    }

    pub fn rect(r: Rect) -> Option<Region> {
        Region::union(alloc::vec![r])
    }

    /// The window `|x| + |y| <= n s`.
    pub fn window(n: u32, s: f64) -> Region {
        let h = n as f64 * s * FRAC_1_SQRT_2;
        Region {
            rects: alloc::vec![Rect::square(InternalPoint::new(0.0, 0.0), h)],
        }
    }

    /// The open interior of an `n`-ring of diameter `s`, as a closed square.
    pub fn inside_ring(n: u32, s: f64) -> Region {
        let h = (n as f64 - 0.5) * s * FRAC_1_SQRT_2;
        Region {
            rects: alloc::vec![Rect::square(InternalPoint::new(0.0, 0.0), h)],
        }
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    #[inline]
    pub fn contains(&self, p: InternalPoint) -> bool {
        self.rects.iter().any(|r| r.contains(p))
    }

    pub fn contains_paper(&self, p: PaperPoint) -> bool {
        self.contains(p.to_internal())
    }

    /// Area of the union, by coordinate compression.
    pub fn area(&self) -> f64 {
        let mut us: Vec<f64> = self.rects.iter().flat_map(|r| [r.u0, r.u1]).collect();
        let mut vs: Vec<f64> = self.rects.iter().flat_map(|r| [r.v0, r.v1]).collect();
        us.sort_by(f64::total_cmp);
        us.dedup();
        vs.sort_by(f64::total_cmp);
        vs.dedup();
        let mut total = 0.0;
        for wu in us.windows(2) {
            for wv in vs.windows(2) {
                let c = InternalPoint::new(0.5 * (wu[0] + wu[1]), 0.5 * (wv[0] + wv[1]));
                if self.contains(c) {
                    total += (wu[1] - wu[0]) * (wv[1] - wv[0]);
                }
            }
        }
        total
    }

    /// Times in `(t0, t1)` at which `p + t d` crosses a rectangle boundary,
    /// sorted and deduplicated, written to `out`.
    pub fn crossings(&self, p: InternalPoint, d: DirectionVector, t0: f64, t1: f64, out: &mut Vec<f64>) {
        out.clear();
        for r in &self.rects {
            if let Some((a, b)) = r.clip_line(p, d) {
                for t in [a, b] {
                    if t > t0 && t < t1 {
                        out.push(t);
                    }
                }
            }
        }
        if out.len() > 1 {
            out.sort_by(f64::total_cmp);
            out.dedup();
        }
    }

    /// Maximal subintervals of `[t0, t1]` during which `p + t d` is in the
    /// region.
    pub fn inside_intervals(&self, p: InternalPoint, d: DirectionVector, t0: f64, t1: f64) -> Vec<(f64, f64)> {
        let mut cuts = Vec::new();
        self.crossings(p, d, t0, t1, &mut cuts);
        let mut knots = Vec::with_capacity(cuts.len() + 2);
        knots.push(t0);
        knots.extend_from_slice(&cuts);
        knots.push(t1);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in knots.windows(2) {
            let mid = p.advance(d, 0.5 * (w[0] + w[1]));
            if self.contains(mid) {
                match out.last_mut() {
                    Some(last) if last.1 == w[0] => last.1 = w[1],
                    _ => out.push((w[0], w[1])),
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn window_area() {
        let r = Region::window(3, 1.0);
        // rhombus |x|+|y| <= 3 has area 2 * 3^2
        assert!((r.area() - 18.0).abs() < 1e-12);
        assert!(r.contains_paper(PaperPoint::new(1.5, -1.5)));
        assert!(!r.contains_paper(PaperPoint::new(1.6, -1.5)));
    }

    #[test]
    fn overlapping_union_area() {
        let r = Region::union(vec![Rect::new(0.0, 0.0, 2.0, 2.0), Rect::new(1.0, 1.0, 3.0, 3.0)]).unwrap();
        assert!((r.area() - 7.0).abs() < 1e-12);
        assert!(Region::union(vec![Rect::new(0.0, 0.0, 0.0, 1.0)]).is_none());
    }

    #[test]
    fn intervals_of_a_line() {
        let r = Region::union(vec![Rect::new(0.0, -1.0, 1.0, 1.0), Rect::new(2.0, -1.0, 3.0, 1.0)]).unwrap();
        let iv = r.inside_intervals(InternalPoint::new(-1.0, 0.0), DirectionVector::new(1.0, 0.0), 0.0, 10.0);
        assert_eq!(iv, vec![(1.0, 2.0), (3.0, 4.0)]);
        // touching rectangles merge
        let r = Region::union(vec![Rect::new(0.0, -1.0, 1.0, 1.0), Rect::new(1.0, -1.0, 3.0, 1.0)]).unwrap();
        let iv = r.inside_intervals(InternalPoint::new(-1.0, 0.0), DirectionVector::new(1.0, 0.0), 0.0, 10.0);
        assert_eq!(iv, vec![(1.0, 4.0)]);
    }
}
