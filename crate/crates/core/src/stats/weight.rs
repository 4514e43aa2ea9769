use crate::geometry::{DirectionVector, InternalPoint, PaperPoint};
use crate::math;
use crate::quad::adaptive_simpson;

/// Spatial weight of the weighted direction observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightForm {
    /// `min(1, |z|^-3)`: bounded and integrable over the plane.
    #[default]
    Corrected,
    /// `1 / min(1, |z|^3)` as literally printed; grows like `|z|^3` and is
    /// kept only for comparison.
    Literal,
}

/// `min(1, |z|^-3)`.
#[inline]
pub fn weight(z: PaperPoint) -> f64 {
    weight_r(z.norm())
}

#[inline]
fn weight_r(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else {
        1.0 / (r * r * r)
    }
}

pub fn weight_with(form: WeightForm, z: PaperPoint) -> f64 {
    match form {
        WeightForm::Corrected => weight(z),
        WeightForm::Literal => {
            let r = z.norm();
            1.0 / f64::min(1.0, r * r * r)
        }
    }
}

/// `∫_{x0}^{x1} (x^2 + h^2)^{-3/2} dx` for `0 <= x0 <= x1` and
/// `x0^2 + h^2 >= 1`, in a form that stays accurate as `h -> 0`.
fn tail(x0: f64, x1: f64, h: f64) -> f64 {
    if x1 <= x0 {
        return 0.0;
    }
    let g = |x: f64| {
        let s = math::sqrt(1.0 + (h / x) * (h / x));
        1.0 / (x * x * s * (1.0 + s))
    };
    if x0 > 0.0 {
        let far = if x1.is_finite() { g(x1) } else { 0.0 };
        g(x0) - far
    } else {
        // x0 = 0 forces h >= 1
        if x1.is_finite() {
            x1 / (h * h * math::hypot(x1, h))
        } else {
            1.0 / (h * h)
        }
    }
}

/// `∫_0^len w(p + t d) dt` along an internal-frame segment with unit `d`.
pub fn segment_weight_integral(form: WeightForm, p: InternalPoint, d: DirectionVector, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if form == WeightForm::Literal {
        let mut f = |t: f64| weight_with(form, p.advance(d, t).to_paper());
        return adaptive_simpson(&mut f, 0.0, len, 1e-8);
    }
    // |p + t d|^2 = (t + b)^2 + h^2
    let b = p.u * d.du + p.v * d.dv;
    let h = math::abs(p.u * d.dv - p.v * d.du);
    let (x0, x1) = (b, b + len);
    let mut total = 0.0;
    // inner disc |z| <= 1 contributes its chord length
    let (c0, c1) = if h < 1.0 {
        let c = math::sqrt(1.0 - h * h);
        (-c, c)
    } else {
        (0.0, 0.0)
    };
    if c1 > c0 {
        let lo = f64::max(x0, c0);
        let hi = f64::min(x1, c1);
        if hi > lo {
            total += hi - lo;
        }
    }
    // outer pieces, folded onto x >= 0
    let edge = c1;
    let right_lo = f64::max(x0, edge);
    if x1 > right_lo {
        total += tail(right_lo, x1, h);
    }
    let left_hi = f64::min(x1, -edge);
    if left_hi > x0 {
        total += tail(-left_hi, -x0, h);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_fixtures() {
        assert_eq!(weight(PaperPoint::new(2.0, 0.0)), 0.125);
        assert_eq!(weight(PaperPoint::new(0.3, -0.4)), 1.0);
        assert_eq!(weight(PaperPoint::ORIGIN), 1.0);
        assert!((weight(PaperPoint::new(0.0, 10.0)) - 1e-3).abs() < 1e-18);
        assert_eq!(weight_with(WeightForm::Literal, PaperPoint::new(2.0, 0.0)), 1.0);
        assert_eq!(weight_with(WeightForm::Literal, PaperPoint::new(0.5, 0.0)), 8.0);
    }

    #[test]
    fn analytic_matches_quadrature() {
        let mut x = 0.77f64;
        let mut rnd = || {
            x = (x * 4099.0 + 0.3141).fract();
            x
        };
        for _ in 0..500 {
            let p = InternalPoint::new((rnd() - 0.5) * 8.0, (rnd() - 0.5) * 8.0);
            let a = rnd() * core::f64::consts::TAU;
            let d = DirectionVector::from_angle(a);
            let len = rnd() * 10.0;
            let got = segment_weight_integral(WeightForm::Corrected, p, d, len);
            let mut f = |t: f64| weight(p.advance(d, t).to_paper());
            let want = adaptive_simpson(&mut f, 0.0, len, 1e-12);
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn near_radial_segments_are_stable() {
        let p = InternalPoint::new(2.0, 1e-14);
        let d = DirectionVector::new(1.0, 0.0);
        let got = segment_weight_integral(WeightForm::Corrected, p, d, 3.0);
        let want = 0.5 * (1.0 / 4.0 - 1.0 / 25.0);
        assert!((got - want).abs() < 1e-15);
        // through the origin
        let p = InternalPoint::new(-3.0, 0.0);
        let got = segment_weight_integral(WeightForm::Corrected, p, d, 6.0);
        let want = 2.0 + 2.0 * 0.5 * (1.0 - 1.0 / 9.0);
        assert!((got - want).abs() < 1e-14);
    }
}
