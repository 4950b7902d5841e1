//! Asymptotic `ln(Z/Z0)` for large N: the per-atom exponent φ plus the
//! O(1) Gaussian fluctuation product over bosonic Matsubara frequencies.

use super::kernel::{excess_normal, excess_superradiant};
use super::{phi_shift, solve_gap, GapSolution, Phase};
use crate::error::{DickeError, Result};
use crate::model::{InverseTemperature, ModelParams, SymmetryClass};
use crate::scalar::{x_over_sinh, Real};

/// Relative disagreement between successive tail-coefficient estimates
/// beyond which the tail correction is declared unstable.
pub const TAIL_REL_AGREEMENT: f64 = 0.1;
/// Tail disagreements whose effect on `ln(Z/Z0)` is below this are ignored.
pub const TAIL_ABS_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionAsymptotics<T> {
    pub n_atoms: u64,
    pub cutoff: usize,
    /// Per-atom exponent φ; zero in the normal phase.
    pub phi: T,
    /// `−½ ln H(0)`, or `½ ln N − ln A0` when the zero mode is a Goldstone mode.
    pub zero_mode: T,
    /// `ln 2` for the two discrete superradiant saddles, else zero.
    pub multiplicity: T,
    /// `−Σ_{n≥1} ln H(ω_n)` including the analytic tail beyond the cutoff.
    pub matsubara: T,
    /// Tail part of `matsubara` (already included there).
    pub tail: T,
    /// Sum of the O(1) and O(ln N) pieces.
    pub log_correction: T,
    pub goldstone_case: bool,
}

impl<T: Real> PartitionAsymptotics<T> {
    /// `ln(Z/Z0) = N φ + log_correction`.
    pub fn log_ratio(&self) -> T {
        T::from_u64(self.n_atoms).expect("atom count representable") * self.phi + self.log_correction
    }
}

/// Zero-mode amplitude
/// `A0 = g / (Ω_Δ sqrt(π β ω0)) · (1 − β Ω_Δ / sinh(β Ω_Δ))^{1/2}`
/// with `g` the non-vanishing coupling.
pub fn goldstone_amplitude<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    gap: &GapSolution<T>,
) -> Result<T> {
    let g = match p.symmetry() {
        SymmetryClass::U1Sum => p.g1,
        SymmetryClass::U1Diff => p.g2,
        other => {
            return Err(DickeError::domain(format!(
                "zero-mode amplitude needs exactly one vanishing coupling, got {other}"
            )))
        }
    };
    let b = beta
        .value()
        .ok_or_else(|| DickeError::domain("zero-mode amplitude needs finite beta"))?;
    if gap.phase != Phase::Superradiant {
        return Err(DickeError::domain("zero-mode amplitude needs a superradiant gap"));
    }
    super::check_gap(p, beta, gap)?;
    let od = gap.omega_delta;
    let x = b * od;
    Ok(g / (od * (T::PI() * b * p.omega0).sqrt()) * (T::one() - x_over_sinh(x)).sqrt())
}

/// Hurwitz zeta `ζ(s, a) = Σ_{n≥0} (n + a)^{−s}` for integer `s ≥ 2`, `a ≥ 1`.
pub(crate) fn hurwitz_zeta<T: Real>(s: i32, a: T) -> T {
    let shift = T::lit(16.0);
    let mut acc = T::zero();
    let mut a = a;
    while a < shift {
        acc = acc + a.powi(-s);
        a = a + T::one();
    }
    // Euler–Maclaurin with B2..B8
    let sf = T::lit(f64::from(s));
    let mut total = a.powi(1 - s) / (sf - T::one()) + a.powi(-s) / T::lit(2.0);
    let bernoulli_over_fact = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    let mut rising = sf; // s (s+1) ... (s+2k-2)
    let mut power = a.powi(-s - 1);
    for (k, &coef) in bernoulli_over_fact.iter().enumerate() {
        total = total + T::lit(coef) * rising * power;
        let m = T::lit((2 * k + 1) as f64);
        rising = rising * (sf + m) * (sf + m + T::one());
        power = power / (a * a);
    }
    acc + total
}

/// Tail coefficients of `ln H(ω) ≈ c2/ω² + c4/ω⁴` fitted through the
/// points `n_a < n_b`.
fn fit_tail<T: Real>(ln_h: &[T], omega: impl Fn(usize) -> T, n_a: usize, n_b: usize) -> (T, T) {
    let xa = omega(n_a).powi(-2);
    let xb = omega(n_b).powi(-2);
    let ya = ln_h[n_a - 1] / xa;
    let yb = ln_h[n_b - 1] / xb;
    if n_a == n_b {
        return (yb, T::zero());
    }
    let c4 = (ya - yb) / (xa - xb);
    (ya - c4 * xa, c4)
}

/// `Σ_{n>K} ln H(ω_n)` from the two-term tail fit, checked against the fit
/// one octave lower.
fn matsubara_tail<T: Real>(ln_h: &[T], beta: T) -> Result<T> {
    let k = ln_h.len();
    let step = T::lit(2.0) * T::PI() / beta;
    let omega = |n: usize| step * T::from_usize_lossy(n);
    let (c2, c4) = fit_tail(ln_h, omega, (k / 2).max(1), k);
    let inv = T::one() / step;
    let a = T::from_usize_lossy(k + 1);
    let z2 = inv.powi(2) * hurwitz_zeta(2, a);
    let z4 = inv.powi(4) * hurwitz_zeta(4, a);
    if k >= 4 {
        let (c2_low, _) = fit_tail(ln_h, omega, k / 4, k / 2);
        let diff = (c2 - c2_low).abs();
        let scale = c2.abs().max(c2_low.abs());
        if diff > T::lit(TAIL_REL_AGREEMENT) * scale && diff * z2 > T::lit(TAIL_ABS_FLOOR) {
            return Err(DickeError::Convergence(format!(
                "Matsubara tail unstable: c2 estimates {c2} and {c2_low} disagree; raise the cutoff"
            )));
        }
    }
    Ok(c2 * z2 + c4 * z4)
}

fn ln_kernel<T: Real>(excess: T, omega: T) -> Result<T> {
    if !(excess > -T::one()) {
        return Err(DickeError::Convergence(format!(
            "fluctuation kernel non-positive at omega = {omega} (H = {})",
            T::one() + excess
        )));
    }
    Ok(excess.ln_1p())
}

/// Asymptotic `ln(Z/Z0)` with a Matsubara cutoff and analytic tail.
///
/// * normal phase: `−½ ln H_I(0) − Σ ln H_I(ω_n)`;
/// * superradiant, both couplings on: `N φ + ln 2 − ½ ln H_II(0) − Σ ln H_II(ω_n)`;
/// * superradiant, one coupling off: `N φ + ½ ln N − ln A0 − Σ ln H_II(ω_n)`.
pub fn log_partition_ratio<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    n_atoms: u64,
    cutoff: usize,
) -> Result<PartitionAsymptotics<T>> {
    let b = beta.value().ok_or_else(|| {
        DickeError::domain("partition asymptotics are not defined at beta = inf")
    })?;
    if cutoff == 0 {
        return Err(DickeError::domain("Matsubara cutoff must be >= 1"));
    }
    if n_atoms == 0 {
        return Err(DickeError::domain("atom number must be >= 1"));
    }
    let zero = T::zero();
    if p.coupling_sum() == zero {
        return Ok(PartitionAsymptotics {
            n_atoms,
            cutoff,
            phi: zero,
            zero_mode: zero,
            multiplicity: zero,
            matsubara: zero,
            tail: zero,
            log_correction: zero,
            goldstone_case: false,
        });
    }

    let gap = solve_gap(p, beta)?;
    let half = T::lit(0.5);
    let t_normal = beta.tanh_half(p.splitting);
    let excess = |x: T| match gap.phase {
        Phase::Superradiant => excess_superradiant(p, gap.omega_delta, x),
        _ => excess_normal(p, t_normal, x),
    };

    let (phi, zero_mode, multiplicity, goldstone_case) = match gap.phase {
        Phase::Critical => {
            return Err(DickeError::domain(
                "H(0) vanishes at the critical point; partition asymptotics diverge",
            ))
        }
        Phase::Normal => (zero, -half * ln_kernel(excess(zero), zero)?, zero, false),
        Phase::Superradiant => {
            let phi = phi_shift(p, beta, &gap)?.value();
            if p.symmetry().is_continuous() {
                let a0 = goldstone_amplitude(p, beta, &gap)?;
                let n = T::from_u64(n_atoms).expect("atom count representable");
                (phi, half * n.ln() - a0.ln(), zero, true)
            } else {
                let zm = -half * ln_kernel(excess(zero), zero)?;
                (phi, zm, T::LN_2(), false)
            }
        }
    };

    let step = T::lit(2.0) * T::PI() / b;
    let mut ln_h = Vec::with_capacity(cutoff);
    for n in 1..=cutoff {
        let w = step * T::from_usize_lossy(n);
        ln_h.push(ln_kernel(excess(w * w), w)?);
    }
    // sum smallest terms first
    let partial = ln_h.iter().rev().fold(zero, |acc, &v| acc + v);
    let tail = matsubara_tail(&ln_h, b)?;
    let matsubara = -(partial + tail);

    Ok(PartitionAsymptotics {
        n_atoms,
        cutoff,
        phi,
        zero_mode,
        multiplicity,
        matsubara,
        tail: -tail,
        log_correction: zero_mode + multiplicity + matsubara,
        goldstone_case,
    })
}
