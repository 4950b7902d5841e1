//! Bracketed bisection followed by a safeguarded Newton polish.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions<T> {
    /// Bisection stops once the bracket is narrower than this (relative to
    /// the bracket's upper end).
    pub bisect_rel_width: T,
    /// Accept a point once `|f(x)|` is at most this.
    pub residual_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for RootOptions<T> {
    fn default() -> Self {
        RootOptions {
            bisect_rel_width: T::tol(1e-6, 16.0),
            residual_tol: T::tol(1e-12, 8.0),
            max_iter: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<T> {
    pub x: T,
    pub residual: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootError<T> {
    /// `f(lo)` and `f(hi)` do not straddle zero.
    NotBracketed { f_lo: T, f_hi: T },
    /// Iteration budget exhausted; carries the best point found.
    Budget { best: T, residual: T },
}

/// Finds a root of `f` in `[lo, hi]` given its derivative `df`.
///
/// Requires `f(lo)` and `f(hi)` of opposite sign (or one of them zero).
/// Bisection narrows the bracket to `bisect_rel_width`, then Newton steps
/// polish the residual; any Newton step leaving the current bracket is
/// replaced by a bisection step, so the bracket invariant always holds.
pub fn bisect_newton<T, F, D>(
    f: F,
    df: D,
    mut lo: T,
    mut hi: T,
    opts: &RootOptions<T>,
) -> Result<Root<T>, RootError<T>>
where
    T: Real,
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Ok(Root { x: lo, residual: T::zero(), iterations: 0 });
    }
    if f_hi == T::zero() {
        return Ok(Root { x: hi, residual: T::zero(), iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NotBracketed { f_lo, f_hi });
    }

    let half = T::lit(0.5);
    let scale = lo.abs().max(hi.abs()).max(T::min_positive_value());
    let mut iterations = 0;

    while (hi - lo) > opts.bisect_rel_width * scale && iterations < opts.max_iter {
        let mid = lo + (hi - lo) * half;
        let f_mid = f(mid);
        iterations += 1;
        if f_mid == T::zero() {
            return Ok(Root { x: mid, residual: T::zero(), iterations });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    let mut x = lo + (hi - lo) * half;
    let mut fx = f(x);
    let mut best = (x, fx.abs());
    while iterations < opts.max_iter {
        if fx.abs() <= opts.residual_tol {
            return Ok(Root { x, residual: fx.abs(), iterations });
        }
        // keep the bracket tight around the current point
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        x = if slope != T::zero() && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            lo + (hi - lo) * half
        };
        fx = f(x);
        iterations += 1;
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if hi - lo <= T::epsilon() * scale && fx.abs() > opts.residual_tol {
            break;
        }
    }
    if best.1 <= opts.residual_tol {
        return Ok(Root { x: best.0, residual: best.1, iterations });
    }
    Err(RootError::Budget { best: best.0, residual: best.1 })
}
