//! Frames, directions and reflections.
//!
//! The paper frame places obstacles as L1 balls ("rhombi") whose sides lie
//! on lines `y = ±x`. The internal frame is the paper frame rotated by
//! `-π/4`; there every obstacle becomes an axis-aligned square and the L1
//! distance becomes `sqrt(2)` times the Chebyshev distance:
//!
//! ```text
//! u = (x + y) / sqrt(2)        x = (u - v) / sqrt(2)
//! v = (y - x) / sqrt(2)        y = (u + v) / sqrt(2)
//! ```
//!
//! Angles accepted by [`DirectionClass::new`] are internal-frame angles. A
//! paper-frame angle `φ` corresponds to the internal angle `φ - π/4`.

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use thiserror::Error;

use crate::math;

/// Tolerance below which an angle is treated as parallel to an obstacle edge.
const AXIS_PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("direction {0} rad is parallel to the obstacle edges")]
    DegenerateAngle(f64),
    #[error("angle {0} is not finite")]
    NonFinite(f64),
}

/// A point in the paper frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PaperPoint {
    pub x: f64,
    pub y: f64,
}

impl PaperPoint {
    pub const ORIGIN: PaperPoint = PaperPoint { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        PaperPoint { x, y }
    }

    /// L1 distance, the metric whose balls are the obstacles.
    #[inline]
    pub fn l1(self, other: PaperPoint) -> f64 {
        math::abs(self.x - other.x) + math::abs(self.y - other.y)
    }

    /// L1 norm.
    #[inline]
    pub fn l1_norm(self) -> f64 {
        math::abs(self.x) + math::abs(self.y)
    }

    /// Euclidean norm.
    #[inline]
    pub fn norm(self) -> f64 {
        math::hypot(self.x, self.y)
    }

    #[inline]
    pub fn to_internal(self) -> InternalPoint {
        to_internal(self)
    }

    /// Lexicographic total order on `(x, y)`.
    pub fn lex_cmp(&self, other: &PaperPoint) -> core::cmp::Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

/// A point in the internal frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InternalPoint {
    pub u: f64,
    pub v: f64,
}

impl InternalPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        InternalPoint { u, v }
    }

    /// Chebyshev distance.
    #[inline]
    pub fn linf(self, other: InternalPoint) -> f64 {
        f64::max(math::abs(self.u - other.u), math::abs(self.v - other.v))
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::hypot(self.u, self.v)
    }

    #[inline]
    pub fn advance(self, d: DirectionVector, t: f64) -> InternalPoint {
        InternalPoint {
            u: self.u + d.du * t,
            v: self.v + d.dv * t,
        }
    }

    #[inline]
    pub fn to_paper(self) -> PaperPoint {
        to_paper(self)
    }
}

/// Closed axis-aligned rectangle in the internal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl Rect {
    /// Rectangle from two opposite corners in any order.
    pub fn new(u0: f64, v0: f64, u1: f64, v1: f64) -> Self {
        Rect {
            u0: f64::min(u0, u1),
            v0: f64::min(v0, v1),
            u1: f64::max(u0, u1),
            v1: f64::max(v0, v1),
        }
    }

    /// Square of half-width `h` centred at `c`.
    pub fn square(c: InternalPoint, h: f64) -> Self {
        Rect {
            u0: c.u - h,
            v0: c.v - h,
            u1: c.u + h,
            v1: c.v + h,
        }
    }

    #[inline]
    pub fn contains(&self, p: InternalPoint) -> bool {
        p.u >= self.u0 && p.u <= self.u1 && p.v >= self.v0 && p.v <= self.v1
    }

    pub fn expand(&self, by: f64) -> Rect {
        Rect {
            u0: self.u0 - by,
            v0: self.v0 - by,
            u1: self.u1 + by,
            v1: self.v1 + by,
        }
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.u0 <= other.u1 && other.u0 <= self.u1 && self.v0 <= other.v1 && other.v0 <= self.v1
    }

    pub fn area(&self) -> f64 {
        (self.u1 - self.u0) * (self.v1 - self.v0)
    }

    pub fn corners(&self) -> [InternalPoint; 4] {
        [
            InternalPoint::new(self.u0, self.v0),
            InternalPoint::new(self.u1, self.v0),
            InternalPoint::new(self.u0, self.v1),
            InternalPoint::new(self.u1, self.v1),
        ]
    }

    /// Parameter interval `[t0, t1]` during which `p + t d` lies in the
    /// rectangle, or `None` if the line misses it.
    pub fn clip_line(&self, p: InternalPoint, d: DirectionVector) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (x, dx, a, b) in [(p.u, d.du, self.u0, self.u1), (p.v, d.dv, self.v0, self.v1)] {
            if dx == 0.0 {
                if x < a || x > b {
                    return None;
                }
            } else {
                let t0 = (a - x) / dx;
                let t1 = (b - x) / dx;
                let (n, f) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                lo = f64::max(lo, n);
                hi = f64::min(hi, f);
            }
        }
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }
}

/// Rotates a paper-frame point into the internal frame.
#[inline]
pub fn to_internal(p: PaperPoint) -> InternalPoint {
    InternalPoint {
        u: (p.x + p.y) * FRAC_1_SQRT_2,
        v: (p.y - p.x) * FRAC_1_SQRT_2,
    }
}

/// Inverse of [`to_internal`].
#[inline]
pub fn to_paper(q: InternalPoint) -> PaperPoint {
    PaperPoint {
        x: (q.u - q.v) * FRAC_1_SQRT_2,
        y: (q.u + q.v) * FRAC_1_SQRT_2,
    }
}

/// A velocity in the internal frame. Unit length is expected but not
/// enforced, so axis-parallel probes can be built for ray casting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionVector {
    pub du: f64,
    pub dv: f64,
}

impl DirectionVector {
    pub const fn new(du: f64, dv: f64) -> Self {
        DirectionVector { du, dv }
    }

    pub fn from_angle(theta: f64) -> Self {
        DirectionVector {
            du: math::cos(theta),
            dv: math::sin(theta),
        }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::hypot(self.du, self.dv)
    }

    /// In the paper frame.
    pub fn to_paper(self) -> (f64, f64) {
        (
            (self.du - self.dv) * FRAC_1_SQRT_2,
            (self.du + self.dv) * FRAC_1_SQRT_2,
        )
    }
}

impl core::ops::Neg for DirectionVector {
    type Output = DirectionVector;

    #[inline]
    fn neg(self) -> Self {
        DirectionVector {
            du: -self.du,
            dv: -self.dv,
        }
    }
}

/// Orientation of the obstacle edge a particle reflects from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Edge parallel to the `v` axis; reflection negates `du`.
    VerticalEdge,
    /// Edge parallel to the `u` axis; reflection negates `dv`.
    HorizontalEdge,
}

/// Elastic reflection off an axis-aligned edge.
#[inline]
pub fn reflect(d: DirectionVector, axis: Axis) -> DirectionVector {
    match axis {
        Axis::VerticalEdge => DirectionVector { du: -d.du, dv: d.dv },
        Axis::HorizontalEdge => DirectionVector { du: d.du, dv: -d.dv },
    }
}

/// Index of a member of a [`DirectionClass`].
///
/// The numbering follows the member list `{θ, π−θ, −θ, θ−π}` for the
/// canonical `θ ∈ (0, π/2)`, so each index pins the signs of `(du, dv)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum DirIndex {
    /// `θ`: `(+, +)`.
    I1 = 1,
    /// `π − θ`: `(−, +)`.
    I2 = 2,
    /// `−θ`: `(+, −)`.
    I3 = 3,
    /// `θ − π`: `(−, −)`.
    I4 = 4,
}

impl DirIndex {
    pub const ALL: [DirIndex; 4] = [DirIndex::I1, DirIndex::I2, DirIndex::I3, DirIndex::I4];

    /// 1-based member number.
    #[inline]
    pub fn number(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn slot(self) -> usize {
        self as usize - 1
    }

    pub fn from_number(n: u8) -> Option<DirIndex> {
        match n {
            1 => Some(DirIndex::I1),
            2 => Some(DirIndex::I2),
            3 => Some(DirIndex::I3),
            4 => Some(DirIndex::I4),
            _ => None,
        }
    }

    /// Index from the signs of a velocity. Zero components count as positive.
    #[inline]
    pub fn from_signs(du: f64, dv: f64) -> DirIndex {
        match (du.is_sign_negative() && du != 0.0, dv.is_sign_negative() && dv != 0.0) {
            (false, false) => DirIndex::I1,
            (true, false) => DirIndex::I2,
            (false, true) => DirIndex::I3,
            (true, true) => DirIndex::I4,
        }
    }

    #[inline]
    pub fn u_negative(self) -> bool {
        matches!(self, DirIndex::I2 | DirIndex::I4)
    }

    #[inline]
    pub fn v_negative(self) -> bool {
        matches!(self, DirIndex::I3 | DirIndex::I4)
    }

    /// Index after reflecting off an edge of the given orientation.
    #[inline]
    pub fn reflect(self, axis: Axis) -> DirIndex {
        match (self, axis) {
            (DirIndex::I1, Axis::VerticalEdge) => DirIndex::I2,
            (DirIndex::I2, Axis::VerticalEdge) => DirIndex::I1,
            (DirIndex::I3, Axis::VerticalEdge) => DirIndex::I4,
            (DirIndex::I4, Axis::VerticalEdge) => DirIndex::I3,
            (DirIndex::I1, Axis::HorizontalEdge) => DirIndex::I3,
            (DirIndex::I3, Axis::HorizontalEdge) => DirIndex::I1,
            (DirIndex::I2, Axis::HorizontalEdge) => DirIndex::I4,
            (DirIndex::I4, Axis::HorizontalEdge) => DirIndex::I2,
        }
    }

    /// Velocity reversal.
    #[inline]
    pub fn reverse(self) -> DirIndex {
        match self {
            DirIndex::I1 => DirIndex::I4,
            DirIndex::I2 => DirIndex::I3,
            DirIndex::I3 => DirIndex::I2,
            DirIndex::I4 => DirIndex::I1,
        }
    }

    /// Standard quadrant number (1: `(+,+)`, 2: `(−,+)`, 3: `(−,−)`, 4: `(+,−)`).
    #[inline]
    pub fn quadrant(self) -> u8 {
        match self {
            DirIndex::I1 => 1,
            DirIndex::I2 => 2,
            DirIndex::I3 => 4,
            DirIndex::I4 => 3,
        }
    }
}

/// The four directions `{θ, π−θ, −θ, θ−π}` reachable from `θ` by reflections
/// off axis-aligned edges, stored by the canonical `θ ∈ (0, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionClass {
    theta: f64,
    cos: f64,
    sin: f64,
}

impl DirectionClass {
    /// Class of the internal-frame angle `theta`.
    pub fn new(theta: f64) -> Result<Self, GeometryError> {
        if !theta.is_finite() {
            return Err(GeometryError::NonFinite(theta));
        }
        let c = math::abs(math::cos(theta));
        let s = math::abs(math::sin(theta));
        if c < AXIS_PARALLEL_EPS || s < AXIS_PARALLEL_EPS {
            return Err(GeometryError::DegenerateAngle(theta));
        }
        let canonical = math::atan2(s, c);
        Ok(DirectionClass {
            theta: canonical,
            cos: math::cos(canonical),
            sin: math::sin(canonical),
        })
    }

    /// Canonical representative in `(0, π/2)`.
    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit vector of member `i`.
    #[inline]
    pub fn member(&self, i: DirIndex) -> DirectionVector {
        let du = if i.u_negative() { -self.cos } else { self.cos };
        let dv = if i.v_negative() { -self.sin } else { self.sin };
        DirectionVector { du, dv }
    }

    pub fn members(&self) -> [DirectionVector; 4] {
        DirIndex::ALL.map(|i| self.member(i))
    }

    /// Angle of member `i`, in `(−π, π]`.
    pub fn member_angle(&self, i: DirIndex) -> f64 {
        match i {
            DirIndex::I1 => self.theta,
            DirIndex::I2 => PI - self.theta,
            DirIndex::I3 => -self.theta,
            DirIndex::I4 => self.theta - PI,
        }
    }

    /// Member index of an exact member vector, `None` otherwise.
    pub fn index_of(&self, d: DirectionVector) -> Option<DirIndex> {
        if math::abs(d.du) == self.cos && math::abs(d.dv) == self.sin {
            Some(DirIndex::from_signs(d.du, d.dv))
        } else {
            None
        }
    }

    /// Member index reached by the angle `theta`, if it belongs to this class.
    pub fn index_of_angle(&self, theta: f64) -> Option<DirIndex> {
        let other = DirectionClass::new(theta).ok()?;
        if !self.same_class(&other) {
            return None;
        }
        Some(DirIndex::from_signs(math::cos(theta), math::sin(theta)))
    }

    /// Class equality up to rounding of the canonical angle.
    pub fn same_class(&self, other: &DirectionClass) -> bool {
        math::abs(self.theta - other.theta) <= 1e-12
    }

    /// The numerically sensible range of the canonical angle.
    pub fn is_canonical(theta: f64) -> bool {
        theta > 0.0 && theta < FRAC_PI_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, SQRT_2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    #[test]
    fn origin_is_fixed() {
        assert_eq!(to_internal(PaperPoint::ORIGIN), InternalPoint::new(0.0, 0.0));
    }

    #[test]
    fn unit_x_maps_through_rotation_matrix() {
        // rotation by -π/4 written out with cos/sin as an independent route
        let (c, s) = (math::cos(-FRAC_PI_4), math::sin(-FRAC_PI_4));
        let q = to_internal(PaperPoint::new(1.0, 0.0));
        assert!(close(q.u, c * 1.0 - s * 0.0, 1e-15));
        assert!(close(q.v, s * 1.0 + c * 0.0, 1e-15));
        assert!(close(q.u, FRAC_1_SQRT_2, 1e-15) && close(q.v, -FRAC_1_SQRT_2, 1e-15));
    }

    #[test]
    fn l1_ball_maps_onto_axis_square() {
        // boundary samples of |x|+|y| = 1/2 land on max(|u|,|v|) = 1/(2 sqrt 2)
        let (c, s) = (math::cos(-FRAC_PI_4), math::sin(-FRAC_PI_4));
        for k in 0..400 {
            // walk the diamond through its four vertices
            let verts = [(0.5, 0.0), (0.0, 0.5), (-0.5, 0.0), (0.0, -0.5)];
            let t = k as f64 / 100.0;
            let (j, f) = ((t as usize) % 4, t.fract());
            let (a, b) = (verts[j], verts[(j + 1) % 4]);
            let (x, y) = (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1));
            let p = PaperPoint::new(x, y);
            assert!(close(p.l1_norm(), 0.5, 1e-12));
            let q = to_internal(p);
            let ru = c * x - s * y;
            let rv = s * x + c * y;
            assert!(close(q.u, ru, 1e-14) && close(q.v, rv, 1e-14));
            let side = f64::max(math::abs(q.u), math::abs(q.v)) * 2.0;
            assert!(close(side, FRAC_1_SQRT_2, 1e-12));
        }
    }

    #[test]
    fn l1_to_linf_ratio() {
        let p = PaperPoint::new(0.0, 0.0);
        let q = PaperPoint::new(1.0, 1.0);
        assert_eq!(p.l1(q), 2.0);
        let d = to_internal(p).linf(to_internal(q));
        assert!(close(d, SQRT_2, 1e-15));
        assert!(close(p.l1(q) / d, SQRT_2, 1e-15));
    }

    #[test]
    fn reflect_examples() {
        let d = DirectionVector::new(1.0, 0.0);
        assert_eq!(reflect(d, Axis::VerticalEdge), DirectionVector::new(-1.0, 0.0));
        let th = 0.3;
        let d = DirectionVector::from_angle(th);
        let r = reflect(d, Axis::HorizontalEdge);
        assert_eq!(r, DirectionVector::new(math::cos(th), -math::sin(th)));
        assert_eq!(reflect(reflect(d, Axis::VerticalEdge), Axis::VerticalEdge), d);
    }

    #[test]
    fn symmetric_class_members() {
        let dc = DirectionClass::new(FRAC_PI_4).unwrap();
        let want = [FRAC_PI_4, 3.0 * FRAC_PI_4, -FRAC_PI_4, -3.0 * FRAC_PI_4];
        for (i, w) in DirIndex::ALL.iter().zip(want) {
            let m = dc.member(*i);
            assert!(close(m.du, math::cos(w), 1e-15) && close(m.dv, math::sin(w), 1e-15));
            assert!(close(dc.member_angle(*i), w, 1e-15));
        }
    }

    #[test]
    fn one_radian_class() {
        let dc = DirectionClass::new(1.0).unwrap();
        assert_eq!(dc.theta(), 1.0);
        let want = [1.0, PI - 1.0, -1.0, 1.0 - PI];
        for (i, w) in DirIndex::ALL.iter().zip(want) {
            assert!(close(dc.member_angle(*i), w, 1e-15));
            let m = dc.member(*i);
            assert!(close(m.du, math::cos(w), 1e-15) && close(m.dv, math::sin(w), 1e-15));
        }
        for alt in [PI - 1.0, -1.0, 1.0 - PI, 1.0 + 2.0 * PI] {
            assert!(DirectionClass::new(alt).unwrap().same_class(&dc));
        }
        assert_eq!(dc.index_of_angle(PI - 1.0), Some(DirIndex::I2));
        assert_eq!(dc.index_of_angle(-1.0), Some(DirIndex::I3));
        assert_eq!(dc.index_of_angle(1.0 - PI), Some(DirIndex::I4));
        assert_eq!(dc.index_of_angle(0.5), None);
    }

    #[test]
    fn degenerate_angles_rejected() {
        for th in [0.0, FRAC_PI_2, PI, -FRAC_PI_2, 2.0 * PI] {
            assert!(matches!(DirectionClass::new(th), Err(GeometryError::DegenerateAngle(_))));
        }
        assert!(DirectionClass::new(f64::NAN).is_err());
    }

    #[test]
    fn index_reflection_matches_vector_reflection() {
        let dc = DirectionClass::new(0.7).unwrap();
        for i in DirIndex::ALL {
            for axis in [Axis::VerticalEdge, Axis::HorizontalEdge] {
                let r = reflect(dc.member(i), axis);
                assert_eq!(dc.index_of(r), Some(i.reflect(axis)));
                assert_eq!(r, dc.member(i.reflect(axis)));
            }
            assert_eq!(dc.member(i.reverse()), -dc.member(i));
            let m = dc.member(i);
            assert_eq!(DirIndex::from_signs(m.du, m.dv), i);
        }
    }

    #[test]
    fn quadrant_numbers() {
        assert_eq!(DirIndex::ALL.map(|i| i.quadrant()), [1, 2, 4, 3]);
    }

    #[test]
    fn members_are_unit() {
        let dc = DirectionClass::new(1.234).unwrap();
        for m in dc.members() {
            assert!(close(m.norm(), 1.0, 1e-12));
        }
    }
}
