//! Collective excitation spectrum: closed forms per phase and coupling
//! case, and an independent route through the roots of the analytically
//! continued kernel `H(−iE) = 0`.

use std::fmt;

use crate::error::{DickeError, Result};
use crate::meanfield::{critical_beta, kernel::continued_quadratic, solve_gap, GapSolution, Phase};
use crate::model::{InverseTemperature, ModelParams, SymmetryClass};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    Normal,
    Critical,
    SrZ2,
    SrU1Sum,
    SrU1Diff,
}

impl CaseTag {
    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::Normal => "NORMAL",
            CaseTag::Critical => "CRITICAL",
            CaseTag::SrZ2 => "SR_Z2",
            CaseTag::SrU1Sum => "SR_U1_SUM",
            CaseTag::SrU1Diff => "SR_U1_DIFF",
        }
    }

    fn superradiant(class: SymmetryClass) -> Self {
        match class {
            SymmetryClass::U1Sum => CaseTag::SrU1Sum,
            SymmetryClass::U1Diff => CaseTag::SrU1Diff,
            _ => CaseTag::SrZ2,
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Excitation energies, ascending, all real and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult<T> {
    pub energies: Vec<T>,
    /// Set when `energies[0]` is a symmetry-protected exact zero.
    pub goldstone: bool,
    pub case_tag: CaseTag,
}

fn sqrt_checked<T: Real>(e_sq: T, what: &str) -> Result<T> {
    if e_sq < T::zero() || !e_sq.is_finite() {
        return Err(DickeError::Nonreal(format!("{what}: E^2 = {e_sq}")));
    }
    Ok(e_sq.sqrt())
}

fn sorted<T: Real>(mut energies: Vec<T>) -> Vec<T> {
    energies.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
    energies
}

fn gap_or_free<T: Real>(p: &ModelParams<T>, beta: InverseTemperature<T>) -> Result<GapSolution<T>> {
    if p.coupling_sum() == T::zero() {
        return Ok(GapSolution {
            phase: Phase::Normal,
            omega_delta: p.splitting,
            b0_sq: T::zero(),
        });
    }
    solve_gap(p, beta)
}

/// Normal-phase branches
/// `2E² = ω0² + Ω² + 2(g1² − g2²)t ± [(ω0² − Ω²)² + 4(g1²(ω0+Ω)² − g2²(ω0−Ω)²)t]^{1/2}`,
/// `t = tanh(βΩ/2)`.
///
/// At the critical point the lower branch is the exact zero of the gap
/// closing (not a Goldstone mode) and `t` takes its critical value.
pub fn spectrum_normal<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
) -> Result<SpectrumResult<T>> {
    let gap = gap_or_free(p, beta)?;
    let (w0, s, g1, g2) = (p.omega0, p.splitting, p.g1, p.g2);
    let g_sq = p.coupling_sum() * p.coupling_sum();
    let t = match gap.phase {
        Phase::Superradiant => {
            return Err(DickeError::Phase(
                "normal-phase spectrum requested in the superradiant regime".into(),
            ))
        }
        Phase::Critical => w0 * s / g_sq,
        Phase::Normal => beta.tanh_half(s),
    };
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let b = w0 * w0 + s * s + two * (g1 * g1 - g2 * g2) * t;
    let diff = w0 * w0 - s * s;
    let disc = diff * diff
        + four * (g1 * g1 * (w0 + s) * (w0 + s) - g2 * g2 * (w0 - s) * (w0 - s)) * t;
    if disc < T::zero() {
        return Err(DickeError::Nonreal(format!("normal-phase discriminant {disc} < 0")));
    }
    let upper_sq = (b + disc.sqrt()) / two;
    // lower branch via the product of the two roots, (B² − disc)/4, in its
    // factorised form; the critical factor vanishes identically at βc
    let critical_factor = match gap.phase {
        Phase::Critical => T::zero(),
        _ => w0 * s - g_sq * t,
    };
    let product = (w0 * s - (g1 - g2) * (g1 - g2) * t) * critical_factor;
    let lower_sq = if upper_sq > T::zero() { product / upper_sq } else { T::zero() };
    let energies = sorted(vec![
        sqrt_checked(lower_sq, "normal lower branch")?,
        sqrt_checked(upper_sq, "normal upper branch")?,
    ]);
    Ok(SpectrumResult {
        energies,
        goldstone: false,
        case_tag: if gap.phase == Phase::Critical { CaseTag::Critical } else { CaseTag::Normal },
    })
}

/// Rotating-wave form of the normal-phase spectrum,
/// `2E = ω0 + Ω ± [(ω0 − Ω)² + 4 g1² t]^{1/2}` (valid for g2 = 0).
pub fn spectrum_normal_rwa<T: Real>(p: &ModelParams<T>, t: T) -> [T; 2] {
    let two = T::lit(2.0);
    let root = ((p.omega0 - p.splitting).powi(2) + T::lit(4.0) * p.g1 * p.g1 * t).sqrt();
    let sum = p.omega0 + p.splitting;
    [(sum - root) / two, (sum + root) / two]
}

/// Upper root at the critical point,
/// `E2 = [(g1(Ω + ω0)² + g2(Ω − ω0)²) / (g1 + g2)]^{1/2}`.
pub fn spectrum_critical_e2<T: Real>(p: &ModelParams<T>) -> Result<T> {
    if p.coupling_sum() == T::zero() || critical_beta(p)?.is_none() {
        return Err(DickeError::domain("no critical point: (g1+g2)^2 <= omega0*Omega"));
    }
    let (w0, s) = (p.omega0, p.splitting);
    let num = p.g1 * (s + w0) * (s + w0) + p.g2 * (s - w0) * (s - w0);
    sqrt_checked(num / p.coupling_sum(), "critical upper root")
}

/// Superradiant spectrum.
///
/// * both couplings on: `2E² = P ± [P² − 16 g1 g2 ω0² (Ω_Δ² − Ω²)/G²]^{1/2}`,
///   `P = ω0² + Ω_Δ² + 2(g1² − g2²) Ω ω0 / G²`;
/// * g2 = 0: `{0, (ω0² + Ω_Δ² + 2ω0Ω)^{1/2}}`;
/// * g1 = 0: `{0, (ω0² + Ω_Δ² − 2ω0Ω)^{1/2}}`.
pub fn spectrum_superradiant<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
) -> Result<SpectrumResult<T>> {
    let gap = gap_or_free(p, beta)?;
    if gap.phase != Phase::Superradiant {
        return Err(DickeError::Phase(format!(
            "superradiant spectrum requested in the {} phase",
            gap.phase
        )));
    }
    let (w0, s, g1, g2, od) = (p.omega0, p.splitting, p.g1, p.g2, gap.omega_delta);
    let two = T::lit(2.0);
    let class = p.symmetry();
    let case_tag = CaseTag::superradiant(class);
    match class {
        SymmetryClass::U1Sum | SymmetryClass::U1Diff => {
            let cross = two * w0 * s;
            let e2_sq = if class == SymmetryClass::U1Sum {
                w0 * w0 + od * od + cross
            } else {
                w0 * w0 + od * od - cross
            };
            Ok(SpectrumResult {
                energies: vec![T::zero(), sqrt_checked(e2_sq, "Goldstone partner")?],
                goldstone: true,
                case_tag,
            })
        }
        _ => {
            let g_sq = p.coupling_sum() * p.coupling_sum();
            let big_p = w0 * w0 + od * od + two * (g1 * g1 - g2 * g2) / g_sq * s * w0;
            let q = T::lit(4.0) * g1 * g2 / g_sq * w0 * w0 * (od * od - s * s);
            let disc = big_p * big_p - T::lit(4.0) * q;
            if disc < T::zero() {
                return Err(DickeError::Nonreal(format!(
                    "superradiant discriminant {disc} < 0"
                )));
            }
            let upper_sq = (big_p + disc.sqrt()) / two;
            let lower_sq = q / upper_sq;
            Ok(SpectrumResult {
                energies: sorted(vec![
                    sqrt_checked(lower_sq, "superradiant lower branch")?,
                    sqrt_checked(upper_sq, "superradiant upper branch")?,
                ]),
                goldstone: false,
                case_tag,
            })
        }
    }
}

/// Closed-form spectrum for whichever phase `(p, beta)` falls in.
pub fn spectrum<T: Real>(p: &ModelParams<T>, beta: InverseTemperature<T>) -> Result<SpectrumResult<T>> {
    match gap_or_free(p, beta)?.phase {
        Phase::Superradiant => spectrum_superradiant(p, beta),
        _ => spectrum_normal(p, beta),
    }
}

/// Spectrum from the non-negative real roots of `H(−iE) = 0`, with the
/// quadratic in `E²` assembled from the general kernel and solved by the
/// cancellation-free quadratic formula.
pub fn spectrum_via_kernel_roots<T: Real>(
    p: &ModelParams<T>,
    beta: InverseTemperature<T>,
) -> Result<SpectrumResult<T>> {
    let gap = gap_or_free(p, beta)?;
    let (b, c) = continued_quadratic(p, beta, &gap);
    if !b.is_finite() || !c.is_finite() {
        return Err(DickeError::Convergence(format!(
            "non-finite kernel polynomial coefficients B={b}, C={c}"
        )));
    }
    let two = T::lit(2.0);
    let mut disc = b * b - T::lit(4.0) * c;
    if disc < T::zero() {
        // a double root lands here through rounding only
        if -disc <= T::lit(16.0) * T::epsilon() * b * b {
            disc = T::zero();
        } else {
            return Err(DickeError::Nonreal(format!("kernel quadratic discriminant {disc} < 0")));
        }
    }
    let big = (b + b.signum() * disc.sqrt()) / two;
    let small = if big == T::zero() { T::zero() } else { c / big };
    let energies = sorted(vec![
        sqrt_checked(small, "kernel root")?,
        sqrt_checked(big, "kernel root")?,
    ]);
    let case_tag = match gap.phase {
        Phase::Normal => CaseTag::Normal,
        Phase::Critical => CaseTag::Critical,
        Phase::Superradiant => CaseTag::superradiant(p.symmetry()),
    };
    let goldstone = gap.phase == Phase::Superradiant && energies[0] == T::zero();
    Ok(SpectrumResult { energies, goldstone, case_tag })
}
