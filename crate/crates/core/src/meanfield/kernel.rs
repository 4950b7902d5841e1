//! Gaussian fluctuation kernel H(ω) around the stationary point.
//!
//! All evaluators take the Matsubara frequency through `x = ω²`, so the
//! analytic continuation `iω → E` is just `x = −E²`.
//!
//! Three routes compute the same function:
//! * [`h_general`]: the general form, valid in either phase;
//! * [`h_normal`] / [`h_superradiant`]: the per-phase specialisations, the
//!   latter with the gap identity `tanh(βΩ_Δ/2) = ω0 Ω_Δ / G²` substituted;
//! * [`kernel_from_rs`]: `(S(ω)S(−ω) − R(ω)²)/(ω² + ω0²)` from the
//!   quadratic-form entries R and S, finite only for `g1 ≠ g2`.

use num_complex::Complex;

use super::{check_gap, GapSolution, Phase};
use crate::error::{DickeError, Result};
use crate::model::{InverseTemperature, ModelParams};
use crate::scalar::Real;

/// Values of the fluctuation kernel at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationKernel<T> {
    /// R(ω); `None` when g1 = g2, where R and S individually diverge.
    pub r: Option<Complex<T>>,
    /// S(ω).
    pub s_plus: Option<Complex<T>>,
    /// S(−ω).
    pub s_minus: Option<Complex<T>>,
    /// H(ω), always finite.
    pub h: T,
}

impl<T: Real> FluctuationKernel<T> {
    /// `(S(ω) S(−ω) − R²) / (ω² + ω0²)` from the stored entries.
    pub fn h_from_entries(&self, omega: T, omega0: T) -> Option<Complex<T>> {
        let (r, sp, sm) = (self.r?, self.s_plus?, self.s_minus?);
        Some((sp * sm - r * r) / Complex::from(omega * omega + omega0 * omega0))
    }
}

/// `H − 1` in the general form, as a function of `x = ω²`.
pub(crate) fn excess_general<T: Real>(p: &ModelParams<T>, t: T, omega_delta: T, x: T) -> T {
    let two = T::lit(2.0);
    let (g1, g2, w0, s, od) = (p.g1, p.g2, p.omega0, p.splitting, omega_delta);
    let a = g1 * g1 - g2 * g2;
    let sum_sq = g1 * g1 + g2 * g2;
    let den = (x + od * od) * (x + w0 * w0);
    let quad = a * a * s * s * t * t / (od * od * den);
    let lin = (two * a * s * x - sum_sq * (s * s + od * od) * w0
        + two * g1 * g2 * (od * od - s * s) * w0)
        * t
        / (od * den);
    quad + lin
}

/// `H_I − 1` (normal phase, Ω_Δ = Ω) with `t = tanh(βΩ/2)`.
pub(crate) fn excess_normal<T: Real>(p: &ModelParams<T>, t: T, x: T) -> T {
    let two = T::lit(2.0);
    let (g1, g2, w0, s) = (p.g1, p.g2, p.omega0, p.splitting);
    let a = g1 * g1 - g2 * g2;
    let den = (x + s * s) * (x + w0 * w0);
    (a * a * t * t + (two * a * x - two * (g1 * g1 + g2 * g2) * s * w0) * t) / den
}

/// `H_II − 1` (superradiant phase) with the gap identity substituted.
pub(crate) fn excess_superradiant<T: Real>(p: &ModelParams<T>, omega_delta: T, x: T) -> T {
    let two = T::lit(2.0);
    let (g1, g2, w0, s, od) = (p.g1, p.g2, p.omega0, p.splitting, omega_delta);
    let g_sq = (g1 + g2) * (g1 + g2);
    let den = (x + od * od) * (x + w0 * w0);
    // numerator minus denominator of the rational form
    let lin = two * (g1 * g1 - g2 * g2) / g_sq * w0 * s;
    let constant = T::lit(4.0) * g1 * g2 / g_sq * w0 * w0 * (od * od - s * s) - od * od * w0 * w0;
    (lin * x + constant) / den
}

fn check_frequency<T: Real>(p: &ModelParams<T>, omega: T) -> Result<()> {
    if !omega.is_finite() || omega * omega + p.omega0 * p.omega0 == T::zero() {
        return Err(DickeError::domain(format!("kernel undefined at omega = {omega}")));
    }
    Ok(())
}

/// H(ω) from the general expression, using `t = tanh(β Ω_Δ / 2)`.
pub fn h_general<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    gap: &GapSolution<T>,
    omega: T,
) -> Result<T> {
    check_gap(p, beta, gap)?;
    check_frequency(p, omega)?;
    let t = beta.tanh_half(gap.omega_delta);
    Ok(T::one() + excess_general(p, t, gap.omega_delta, omega * omega))
}

/// H_I(ω), the normal-phase kernel.
pub fn h_normal<T: Real>(p: &ModelParams<T>, beta: InverseTemperature<T>, omega: T) -> T {
    let t = beta.tanh_half(p.splitting);
    T::one() + excess_normal(p, t, omega * omega)
}

/// H_II(ω), the superradiant kernel. Requires a superradiant gap.
pub fn h_superradiant<T: Real>(p: &ModelParams<T>, gap: &GapSolution<T>, omega: T) -> Result<T> {
    if gap.phase != Phase::Superradiant {
        return Err(DickeError::Phase("H_II needs a superradiant gap solution".into()));
    }
    check_frequency(p, omega)?;
    // assembled as one rational function so the zero-frequency value is
    // exactly zero whenever g1 g2 = 0
    let (g1, g2, w0, s, od) = (p.g1, p.g2, p.omega0, p.splitting, gap.omega_delta);
    let g_sq = (g1 + g2) * (g1 + g2);
    let x = omega * omega;
    let lin = T::lit(2.0) * (g1 * g1 - g2 * g2) / g_sq * w0 * s;
    let c4 = T::lit(4.0) * g1 * g2 / g_sq * w0 * w0 * (od * od - s * s);
    Ok((x * (x + od * od + w0 * w0 + lin) + c4) / ((x + od * od) * (x + w0 * w0)))
}

/// R(ω), S(ω), S(−ω) from the quadratic form of the fluctuation action.
///
/// Returns `None` when `g1 = g2`: the entries carry factors of
/// `1/(g2² − g1²)` that cancel only in the combination forming H.
pub fn kernel_from_rs<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    gap: &GapSolution<T>,
    omega: T,
) -> Option<(Complex<T>, Complex<T>, Complex<T>)> {
    let d = p.g2 * p.g2 - p.g1 * p.g1;
    if d == T::zero() {
        return None;
    }
    let two = T::lit(2.0);
    let (w0, s, od) = (p.omega0, p.splitting, gap.omega_delta);
    let t = beta.tanh_half(od);
    let den = od * (omega * omega + od * od);
    let r = two * w0 * p.g1 * p.g2 / d - (od * od - s * s) * d * t / (two * den);
    let re_s = -w0 * (p.g1 * p.g1 + p.g2 * p.g2) / d + (od * od + s * s) * d * t / (two * den);
    let im_s = omega * (T::one() - s * d * t / den);
    Some((
        Complex::new(r, T::zero()),
        Complex::new(re_s, im_s),
        Complex::new(re_s, -im_s),
    ))
}

/// Fluctuation kernel at frequency `omega`: H from the general expression
/// plus, when defined, the R and S entries it is built from.
pub fn kernel<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    gap: &GapSolution<T>,
    omega: T,
) -> Result<FluctuationKernel<T>> {
    let h = h_general(p, beta, gap, omega)?;
    let entries = kernel_from_rs(p, beta, gap, omega);
    Ok(FluctuationKernel {
        r: entries.map(|e| e.0),
        s_plus: entries.map(|e| e.1),
        s_minus: entries.map(|e| e.2),
        h,
    })
}

/// Coefficients `(B, C)` of `y² − B y + C` whose roots are `y = E²` of
/// `H(−iE) = 0`, read off the general kernel's numerator.
///
/// The constant term factorises as
/// `(ω0Ω_Δ − (g1−g2)² t)(ω0Ω_Δ − G² t Ω²/Ω_Δ²)`. Both factors contain the
/// stationarity residual `r = ω0Ω_Δ − G² t`, which is identically zero on
/// the superradiant branch and at the critical point; there it is dropped
/// so that exact zero modes come out exactly zero.
pub(crate) fn continued_quadratic<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    gap: &GapSolution<T>,
) -> (T, T) {
    let two = T::lit(2.0);
    let (g1, g2, w0, s, od) = (p.g1, p.g2, p.omega0, p.splitting, gap.omega_delta);
    let g_sq = (g1 + g2) * (g1 + g2);
    let t = beta.tanh_half(od);
    let b = od * od + w0 * w0 + two * (g1 * g1 - g2 * g2) * s * t / od;
    let residual = match gap.phase {
        Phase::Normal => w0 * od - g_sq * t,
        Phase::Superradiant | Phase::Critical => T::zero(),
    };
    let first = residual + T::lit(4.0) * g1 * g2 * t;
    let second = residual + g_sq * t * (od * od - s * s) / (od * od);
    (b, first * second)
}

#[cfg(test)]
mod tests {
    use super::super::solve_gap;
    use super::*;

    fn params(w: f64, s: f64, g1: f64, g2: f64) -> ModelParams<f64> {
        ModelParams::new(w, s, g1, g2).unwrap()
    }

    fn fin(b: f64) -> InverseTemperature<f64> {
        InverseTemperature::finite(b).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn uncoupled_kernel_is_one() {
        let p = params(1.3, 0.7, 0.0, 0.0);
        let gap = GapSolution { phase: Phase::Normal, omega_delta: 0.7, b0_sq: 0.0 };
        for &w in &[0.0, 0.5, 10.0] {
            assert_eq!(h_general(&p, fin(2.0), &gap, w).unwrap(), 1.0);
            assert_eq!(h_normal(&p, fin(2.0), w), 1.0);
        }
    }

    #[test]
    fn normal_kernel_at_zero_frequency() {
        // oracle: (1 − g1² t / (ω0 Ω))² for g2 = 0
        let p = params(1.0, 1.0, 0.5, 0.0);
        let t = 0.5f64.tanh();
        let oracle = (1.0 - 0.25 * t).powi(2);
        assert!((oracle - 0.78229).abs() < 1e-5);
        assert!(rel(h_normal(&p, fin(1.0), 0.0), oracle) < 1e-14);
        let gap = solve_gap(&p, fin(1.0)).unwrap();
        assert!(rel(h_general(&p, fin(1.0), &gap, 0.0).unwrap(), oracle) < 1e-14);
    }

    #[test]
    fn goldstone_kernel_vanishes_at_zero_frequency() {
        for p in [params(1.0, 1.0, 1.2, 0.0), params(0.7, 1.1, 0.0, 1.9)] {
            let gap = solve_gap(&p, fin(10.0)).unwrap();
            assert_eq!(h_superradiant(&p, &gap, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn superradiant_zero_frequency_closed_form() {
        let p = params(1.0, 1.0, 0.9, 0.4);
        let gap = solve_gap(&p, fin(8.0)).unwrap();
        let od = gap.omega_delta;
        let expected = 4.0 * 0.9 * 0.4 * (od * od - 1.0) / (1.3f64.powi(2) * od * od);
        assert!(rel(h_superradiant(&p, &gap, 0.0).unwrap(), expected) < 1e-13);
    }

    #[test]
    fn rs_route_agrees_with_general_form() {
        for &(w, s, g1, g2, b) in &[
            (1.0, 1.0, 0.3, 0.5, 1.0),
            (1.3, 0.7, 0.9, 0.2, 3.0),
            (1.0, 1.0, 0.9, 0.4, 8.0),
            (0.6, 1.4, 0.0, 1.8, 5.0),
        ] {
            let p = params(w, s, g1, g2);
            let gap = solve_gap(&p, fin(b)).unwrap();
            for &omega in &[0.0, 0.4, 2.5, 40.0] {
                let k = kernel(&p, fin(b), &gap, omega).unwrap();
                let via_rs = k.h_from_entries(omega, w).unwrap();
                assert!(via_rs.im.abs() < 1e-14);
                // H vanishes at the Goldstone point, so compare on the O(1) scale
                assert!((via_rs.re - k.h).abs() < 1e-12 * k.h.abs().max(1.0), "{} vs {}", via_rs.re, k.h);
            }
        }
    }

    #[test]
    fn rs_entries_undefined_when_couplings_equal() {
        let p = params(1.0, 1.0, 0.6, 0.6);
        let gap = solve_gap(&p, fin(1.0)).unwrap();
        let k = kernel(&p, fin(1.0), &gap, 1.0).unwrap();
        assert!(k.r.is_none() && k.s_plus.is_none());
        assert!(k.h.is_finite());
    }

    #[test]
    fn superradiant_kernel_requires_superradiant_gap() {
        let p = params(1.0, 1.0, 0.6, 0.6);
        let gap = solve_gap(&p, fin(1.0)).unwrap();
        assert!(matches!(h_superradiant(&p, &gap, 1.0), Err(DickeError::Phase(_))));
    }

    #[test]
    fn kernel_rejects_non_finite_frequency() {
        let p = params(1.0, 1.0, 0.6, 0.6);
        let gap = solve_gap(&p, fin(1.0)).unwrap();
        assert!(kernel(&p, fin(1.0), &gap, f64::NAN).is_err());
    }
}
