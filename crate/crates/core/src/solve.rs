//! Scalar root finding and 1-D maximization used by the solver modules.
//!
//! Everything here works on bracketed, monotone-or-unimodal functions, so
//! bisection and golden-section search converge unconditionally.

/// Bisection for a root of `f` on `[lo, hi]`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite (or zero) signs. Returns the
/// midpoint of the final bracket, which is within `tol` of a sign change.
pub(crate) fn bisect_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    const MAX_ITER: usize = 200;
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let rising = f_lo < 0.0;
    for _ in 0..MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == rising {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let _ = f_lo;
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Returns `(x_max, f_max)`. Assumes `f` is unimodal on the bracket.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Dense scan of `f` over `n` points on `[lo, hi]`, then golden-section
/// refinement around the best cell. Ties go to the smallest argument.
///
/// Returns `(x_max, f_max)`.
pub(crate) fn sweep_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, tol: f64) -> (f64, f64) {
    assert!(n >= 3);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(lo + step * i as f64);
        if v > best + 1e-12 {
            best = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let (x, fx) = golden_max(&f, a, b, tol);
    if fx >= best {
        (x, fx)
    } else {
        (lo + step * best_i as f64, best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_quadratic_root() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn bisect_handles_decreasing_function() {
        let r = bisect_root(|x| 1.0 - x, 0.0, 3.0, 1e-12);
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn golden_max_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn sweep_max_ties_break_to_smallest() {
        // Flat function: every cell ties; smallest argument wins.
        let (x, _) = sweep_max(|_| 1.0, 0.0, 1.0, 101, 1e-10);
        assert!(x < 0.02);
    }
}
