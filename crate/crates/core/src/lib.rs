//! Finite-temperature phase structure of the full Dicke model (rotating and
//! counter-rotating couplings) in the thermodynamic limit, with a finite-N
//! exact-diagonalization oracle.
//!
//! All numerics are generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the `*64` aliases below pin the common choice.

pub mod error;
pub mod exact_diag;
pub mod meanfield;
pub mod model;
pub mod roots;
pub mod scalar;
pub mod spectrum;

pub use error::{DickeError, Result};
pub use exact_diag::{
    build_hamiltonian, default_cutoff, symmetry_residuals, thermal_observables, EdConfig, EdResult,
    EdScalar,
};
pub use meanfield::{
    critical_beta, free_energy_per_atom, goldstone_amplitude, h_general, h_normal, h_superradiant,
    kernel, kernel_from_rs, log_partition_ratio, phi_shift, solve_gap, FluctuationKernel,
    GapSolution, PartitionAsymptotics, Phase, PhiShift,
};
pub use model::{classify_symmetry, validate_params, InverseTemperature, ModelParams, SymmetryClass};
pub use scalar::Real;
pub use spectrum::{
    spectrum, spectrum_critical_e2, spectrum_normal, spectrum_superradiant,
    spectrum_via_kernel_roots, CaseTag, SpectrumResult,
};

pub type ModelParams64 = ModelParams<f64>;
pub type InverseTemperature64 = InverseTemperature<f64>;
pub type GapSolution64 = GapSolution<f64>;
pub type SpectrumResult64 = SpectrumResult<f64>;
pub type PartitionAsymptotics64 = PartitionAsymptotics<f64>;
pub type FluctuationKernel64 = FluctuationKernel<f64>;
pub type EdConfig64 = EdConfig<f64>;
pub type EdResult64 = EdResult<f64>;

pub type ModelParams32 = ModelParams<f32>;
pub type InverseTemperature32 = InverseTemperature<f32>;
