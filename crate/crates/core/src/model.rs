//! Model parameters, inverse temperature and the symmetry classification of
//! the full Dicke Hamiltonian
//!
//! ```text
//! H = (Ω/2) Σ σz + ω0 b†b + (g1/√N) Σ (b σ+ + b† σ-) + (g2/√N) Σ (b σ- + b† σ+)
//! ```
//!
//! Units are ħ = k_B = 1 throughout.

use std::fmt;

use crate::error::{DickeError, Result};
use crate::scalar::Real;

/// The four Hamiltonian constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Boson mode frequency ω0.
    pub omega0: T,
    /// Atomic level splitting Ω.
    pub splitting: T,
    /// Rotating (excitation-conserving) coupling.
    pub g1: T,
    /// Counter-rotating coupling.
    pub g2: T,
}

impl<T: Real> ModelParams<T> {
    /// Builds and validates a parameter set.
    pub fn new(omega0: T, splitting: T, g1: T, g2: T) -> Result<Self> {
        validate_params(ModelParams {
            omega0,
            splitting,
            g1,
            g2,
        })
    }

    /// g1 + g2, the only combination the gap equation depends on.
    #[inline]
    pub fn coupling_sum(&self) -> T {
        self.g1 + self.g2
    }

    /// Copy of the parameters with the two couplings exchanged.
    pub fn swapped_couplings(&self) -> Self {
        ModelParams {
            g1: self.g2,
            g2: self.g1,
            ..*self
        }
    }

    pub fn symmetry(&self) -> SymmetryClass {
        classify_symmetry(self)
    }
}

/// Checks ω0 > 0, Ω > 0, g1 ≥ 0, g2 ≥ 0, all finite. Returns the input
/// unchanged on success.
pub fn validate_params<T: Real>(p: ModelParams<T>) -> Result<ModelParams<T>> {
    let fields = [
        ("omega0", p.omega0),
        ("Omega", p.splitting),
        ("g1", p.g1),
        ("g2", p.g2),
    ];
    for (name, v) in fields {
        if !v.is_finite() {
            return Err(DickeError::domain(format!("{name} must be finite, got {v}")));
        }
    }
    if p.omega0 <= T::zero() {
        return Err(DickeError::domain(format!("omega0 must be > 0, got {}", p.omega0)));
    }
    if p.splitting <= T::zero() {
        return Err(DickeError::domain(format!("Omega must be > 0, got {}", p.splitting)));
    }
    if p.g1 < T::zero() {
        return Err(DickeError::domain(format!("g1 must be >= 0, got {}", p.g1)));
    }
    if p.g2 < T::zero() {
        return Err(DickeError::domain(format!("g2 must be >= 0, got {}", p.g2)));
    }
    Ok(p)
}

/// Inverse temperature, with zero temperature as a first-class value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> InverseTemperature<T> {
    pub fn finite(beta: T) -> Result<Self> {
        if beta.is_finite() && beta > T::zero() {
            Ok(InverseTemperature::Finite(beta))
        } else if beta.is_infinite() && beta > T::zero() {
            Ok(InverseTemperature::Infinite)
        } else {
            Err(DickeError::domain(format!("beta must be > 0, got {beta}")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, InverseTemperature::Infinite)
    }

    /// The finite value, or `None` at zero temperature.
    pub fn value(&self) -> Option<T> {
        match *self {
            InverseTemperature::Finite(b) => Some(b),
            InverseTemperature::Infinite => None,
        }
    }

    /// β as a plain scalar, `+inf` at zero temperature.
    pub fn as_scalar(&self) -> T {
        self.value().unwrap_or_else(T::infinity)
    }

    /// `tanh(β x / 2)` for `x > 0`; exactly one at zero temperature.
    pub fn tanh_half(&self, x: T) -> T {
        match *self {
            InverseTemperature::Finite(b) => (b * x / T::lit(2.0)).tanh(),
            InverseTemperature::Infinite => T::one(),
        }
    }
}

impl<T: Real> fmt::Display for InverseTemperature<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InverseTemperature::Finite(b) => write!(f, "{b}"),
            InverseTemperature::Infinite => f.write_str("inf"),
        }
    }
}

/// Which symmetry the Hamiltonian retains, decided by the zero pattern of
/// the couplings. A coupling counts as zero only when it is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    /// g1 > 0, g2 = 0: U(1), conserves n + m.
    U1Sum,
    /// g1 = 0, g2 > 0: U(1), conserves n − m.
    U1Diff,
    /// g1 > 0, g2 > 0: only parity exp(iπ(n + m)) survives.
    Z2Only,
    /// g1 = g2 = 0: decoupled.
    Free,
}

impl SymmetryClass {
    pub fn tag(&self) -> &'static str {
        match self {
            SymmetryClass::U1Sum => "U1_SUM",
            SymmetryClass::U1Diff => "U1_DIFF",
            SymmetryClass::Z2Only => "Z2_ONLY",
            SymmetryClass::Free => "FREE",
        }
    }

    /// The conserved quantity, in terms of photon number n and Jz eigenvalue m.
    pub fn conserved(&self) -> &'static str {
        match self {
            SymmetryClass::U1Sum => "n+m",
            SymmetryClass::U1Diff => "n-m",
            SymmetryClass::Z2Only => "parity",
            SymmetryClass::Free => "all",
        }
    }

    /// True for the two cases with a continuous symmetry.
    pub fn is_continuous(&self) -> bool {
        matches!(self, SymmetryClass::U1Sum | SymmetryClass::U1Diff)
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn classify_symmetry<T: Real>(p: &ModelParams<T>) -> SymmetryClass {
    let g1_on = p.g1 != T::zero();
    let g2_on = p.g2 != T::zero();
    match (g1_on, g2_on) {
        (true, false) => SymmetryClass::U1Sum,
        (false, true) => SymmetryClass::U1Diff,
        (true, true) => SymmetryClass::Z2Only,
        (false, false) => SymmetryClass::Free,
    }
}
