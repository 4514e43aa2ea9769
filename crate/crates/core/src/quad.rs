//! Adaptive Simpson quadrature.

use crate::math;

/// Maximum bisection depth before a subinterval is accepted as is.
pub const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` with adaptive
/// Simpson and Richardson correction.
pub fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn step(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || math::abs(delta) <= 15.0 * tol || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = adaptive_simpson(&mut |x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-12);
        assert!((v - 3.75).abs() < 1e-12);
    }

    #[test]
    fn smooth_function() {
        let v = adaptive_simpson(&mut |x| libm::exp(-x * x), 0.0, 3.0, 1e-10);
        // erf(3) * sqrt(pi) / 2
        let want = libm::erf(3.0) * libm::sqrt(core::f64::consts::PI) / 2.0;
        assert!((v - want).abs() < 1e-9);
    }

    #[test]
    fn kink_is_resolved() {
        let v = adaptive_simpson(&mut |x: f64| x.abs().min(0.3), -1.0, 1.0, 1e-10);
        let want = 2.0 * (0.3 * 0.3 / 2.0 + 0.3 * 0.7);
        assert!((v - want).abs() < 1e-8);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(&mut |_| 1.0, 2.0, 2.0, 1e-9), 0.0);
    }
}
