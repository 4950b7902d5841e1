//! Thermodynamic-limit mean-field solution: critical temperature, gap
//! equation, order parameter, free energy, fluctuation kernels and the
//! asymptotic log-partition ratio.
//!
//! Every routine depends on the couplings through `G = g1 + g2` for the
//! stationary point, and on `g1`, `g2` separately only in the Gaussian
//! fluctuations around it.

pub(crate) mod kernel;
mod partition;

pub use kernel::{h_general, h_normal, h_superradiant, kernel, kernel_from_rs, FluctuationKernel};
pub use partition::{goldstone_amplitude, log_partition_ratio, PartitionAsymptotics};

use std::fmt;

use crate::error::{DickeError, Result};
use crate::model::{InverseTemperature, ModelParams};
use crate::roots::{bisect_newton, RootError, RootOptions};
use crate::scalar::{ln_cosh_ratio, ln_two_cosh, Real};

/// Relative window around βc inside which a run is labelled critical.
pub const CRITICAL_REL_WINDOW: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Normal,
    Superradiant,
    Critical,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Normal => "NORMAL",
            Phase::Superradiant => "SUPERRADIANT",
            Phase::Critical => "CRITICAL",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Stationary point of the mean-field action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSolution<T> {
    pub phase: Phase,
    /// Effective atomic frequency Ω_Δ = sqrt(Ω² + 4 G² |b0|²).
    pub omega_delta: T,
    /// Per-atom condensate density |b0|².
    pub b0_sq: T,
}

impl<T: Real> GapSolution<T> {
    fn normal(p: &ModelParams<T>, phase: Phase) -> Self {
        GapSolution {
            phase,
            omega_delta: p.splitting,
            b0_sq: T::zero(),
        }
    }

    /// `ω0 Ω_Δ / G² − tanh(β Ω_Δ / 2)`; zero at a superradiant solution.
    pub fn residual(&self, p: &ModelParams<T>, beta: InverseTemperature<T>) -> T {
        let g = p.coupling_sum();
        p.omega0 * self.omega_delta / (g * g) - beta.tanh_half(self.omega_delta)
    }
}

/// `|b0|²` from Ω_Δ.
fn order_parameter<T: Real>(p: &ModelParams<T>, omega_delta: T) -> T {
    let g = p.coupling_sum();
    (omega_delta * omega_delta - p.splitting * p.splitting) / (T::lit(4.0) * g * g)
}

fn require_coupling<T: Real>(p: &ModelParams<T>) -> Result<T> {
    let g = p.coupling_sum();
    if g <= T::zero() {
        return Err(DickeError::domain("g1 + g2 must be > 0"));
    }
    Ok(g)
}

/// Inverse critical temperature, `None` when `(g1+g2)² ≤ ω0 Ω`.
///
/// βc solves `ω0 Ω / (g1+g2)² = tanh(βc Ω / 2)`, i.e.
/// `βc = (2/Ω) atanh(ω0 Ω / (g1+g2)²)`.
pub fn critical_beta<T: Real>(p: &ModelParams<T>) -> Result<Option<T>> {
    let g = require_coupling(p)?;
    let ratio = p.omega0 * p.splitting / (g * g);
    if ratio >= T::one() {
        return Ok(None);
    }
    let beta_c = T::lit(2.0) / p.splitting * ratio.atanh();
    if !beta_c.is_finite() {
        return Ok(None);
    }
    let residual = ((beta_c * p.splitting / T::lit(2.0)).tanh() - ratio).abs();
    if residual > T::tol(1e-12, 16.0) * ratio {
        return Err(DickeError::Convergence(format!(
            "critical temperature residual {residual} too large"
        )));
    }
    Ok(Some(beta_c))
}

/// Solves the gap equation `ω0 Ω_Δ / G² = tanh(β Ω_Δ / 2)`.
///
/// Below βc (or with no transition at all) the solution is the normal
/// stationary point Ω_Δ = Ω. Above βc the superradiant root is the unique
/// solution in `(Ω, G²/ω0]`, bracketed because tanh < 1.
pub fn solve_gap<T: Real>(p: &ModelParams<T>, beta: InverseTemperature<T>) -> Result<GapSolution<T>> {
    let g = require_coupling(p)?;
    let Some(beta_c) = critical_beta(p)? else {
        return Ok(GapSolution::normal(p, Phase::Normal));
    };
    let g_sq = g * g;
    let upper = g_sq / p.omega0;
    let b = match beta {
        InverseTemperature::Infinite => {
            return Ok(GapSolution {
                phase: Phase::Superradiant,
                omega_delta: upper,
                b0_sq: order_parameter(p, upper),
            });
        }
        InverseTemperature::Finite(b) => b,
    };
    if (b - beta_c).abs() <= T::tol(CRITICAL_REL_WINDOW, 16.0) * beta_c {
        return Ok(GapSolution::normal(p, Phase::Critical));
    }
    if b < beta_c {
        return Ok(GapSolution::normal(p, Phase::Normal));
    }

    let half = T::lit(0.5);
    let f = |x: T| p.omega0 * x / g_sq - (b * x * half).tanh();
    let df = |x: T| {
        let t = (b * x * half).tanh();
        p.omega0 / g_sq - b * half * (T::one() - t * t)
    };
    let opts = RootOptions::default();
    // tanh(β G²/(2ω0)) rounds to one deep in the ordered phase; the root then
    // sits at the bracket end to working precision
    if f(upper) <= opts.residual_tol {
        return Ok(GapSolution {
            phase: Phase::Superradiant,
            omega_delta: upper,
            b0_sq: order_parameter(p, upper),
        });
    }
    let root = bisect_newton(f, df, p.splitting, upper, &opts).map_err(|e| match e {
        RootError::NotBracketed { f_lo, f_hi } => DickeError::Convergence(format!(
            "gap equation not bracketed: f(Omega)={f_lo}, f(G^2/omega0)={f_hi}"
        )),
        RootError::Budget { best, residual } => DickeError::Convergence(format!(
            "gap equation residual {residual} at Omega_Delta={best} after iteration budget"
        )),
    })?;
    let omega_delta = root.x;
    if omega_delta <= p.splitting {
        // the bracket end itself; only reachable when β is a hair above βc
        return Ok(GapSolution::normal(p, Phase::Critical));
    }
    Ok(GapSolution {
        phase: Phase::Superradiant,
        omega_delta,
        b0_sq: order_parameter(p, omega_delta),
    })
}

/// Rejects a gap solution that does not belong to `(p, beta)`.
pub(crate) fn check_gap<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    gap: &GapSolution<T>,
) -> Result<()> {
    match gap.phase {
        Phase::Normal | Phase::Critical => {
            if gap.omega_delta != p.splitting || gap.b0_sq != T::zero() {
                return Err(DickeError::domain(
                    "normal-phase gap must have Omega_Delta = Omega and b0_sq = 0",
                ));
            }
        }
        Phase::Superradiant => {
            if p.coupling_sum() <= T::zero() || gap.omega_delta <= p.splitting {
                return Err(DickeError::domain(
                    "superradiant gap must have Omega_Delta > Omega and g1 + g2 > 0",
                ));
            }
            let r = gap.residual(p, beta).abs();
            if r > T::tol(1e-9, 1e3) {
                return Err(DickeError::domain(format!(
                    "gap solution does not satisfy the gap equation (residual {r})"
                )));
            }
        }
    }
    Ok(())
}

/// Per-atom exponent of `Z/Z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiShift<T> {
    /// φ at finite β.
    Value(T),
    /// Zero temperature: φ grows linearly in β; this is the coefficient.
    Rate(T),
}

impl<T: Real> PhiShift<T> {
    pub fn value(&self) -> T {
        match *self {
            PhiShift::Value(v) | PhiShift::Rate(v) => v,
        }
    }
}

/// `φ = −ω0 β (Ω_Δ² − Ω²) / (4 G²) + ln(cosh(β Ω_Δ / 2) / cosh(β Ω / 2))`.
///
/// Zero in the normal phase. At β = ∞ returns the rate form
/// `(Ω_Δ − Ω)/2 − ω0 (Ω_Δ² − Ω²) / (4 G²)`.
pub fn phi_shift<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
    gap: &GapSolution<T>,
) -> Result<PhiShift<T>> {
    check_gap(p, beta, gap)?;
    let zero = match beta {
        InverseTemperature::Finite(_) => PhiShift::Value(T::zero()),
        InverseTemperature::Infinite => PhiShift::Rate(T::zero()),
    };
    if gap.phase != Phase::Superradiant {
        return Ok(zero);
    }
    let g = p.coupling_sum();
    let od = gap.omega_delta;
    let s = p.splitting;
    let condensate = p.omega0 * (od * od - s * s) / (T::lit(4.0) * g * g);
    let half = T::lit(0.5);
    Ok(match beta {
        InverseTemperature::Finite(b) => {
            PhiShift::Value(-b * condensate + ln_cosh_ratio(b * od * half, b * s * half))
        }
        InverseTemperature::Infinite => PhiShift::Rate((od - s) * half - condensate),
    })
}

/// Free energy per atom in the thermodynamic limit,
/// `f = −(1/β) [ln(2 cosh(β Ω / 2)) + φ]`.
///
/// At β = ∞ this is the ground-state energy per atom.
pub fn free_energy_per_atom<T: Real>(p: &ModelParams<T>, beta: InverseTemperature<T>) -> Result<T> {
    let half = T::lit(0.5);
    if p.coupling_sum() == T::zero() {
        return Ok(match beta {
            InverseTemperature::Finite(b) => -ln_two_cosh(b * p.splitting * half) / b,
            InverseTemperature::Infinite => -p.splitting * half,
        });
    }
    let gap = solve_gap(p, beta)?;
    let g = p.coupling_sum();
    let od = gap.omega_delta;
    let condensate = p.omega0 * (od * od - p.splitting * p.splitting) / (T::lit(4.0) * g * g);
    Ok(match beta {
        InverseTemperature::Finite(b) => -ln_two_cosh(b * od * half) / b + condensate,
        InverseTemperature::Infinite => -od * half + condensate,
    })
}
