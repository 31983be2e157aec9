//! Landau levels of an electron confined near the pole of a sphere in a
//! strong normal magnetic field, with the grand-canonical free energy and
//! de Haas–van Alphen magnetization built on them.
//!
//! ```
//! use sphere_landau::{energy_level, EigenvalueOmega, PhysicalParams};
//!
//! let p = PhysicalParams::natural();
//! // m = 0 is the planar Landau ladder
//! assert_eq!(energy_level(&p, 100.0, 0, 2, EigenvalueOmega::Mode), 250.0);
//! ```
//!
//! The guide in `book/` walks through each module.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod magnetization;
pub mod numeric;
pub mod oracle;
pub mod params;
pub mod spectrum;
pub mod thermo;

pub use classical::{
    check_confinement, hamiltonian, integrate, ClassicalState, Confinement, Integrator, Trajectory,
};
pub use error::{Error, Result};
pub use magnetization::{
    dhva_extract, magnetization_analytic, magnetization_analytic_with, magnetization_numeric,
    magnetization_planar, Bracket, DhvaSpectrum, MagnetizationSweep, Spacing, SweepGrid,
    SweepSource,
};
pub use oracle::{certify_spectrum, solve_mode, Certification, EigenResult, GridSpec};
pub use params::{
    validate, Conventions, EigenvalueOmega, FieldPoint, LSum, PhaseConvention, PhysicalParams,
    SignConvention, Truncation, UnitsMode,
};
pub use spectrum::{
    build_spectrum, energy_level, harmonic_count, planar_level, truncation_for, Level, LevelTable,
    ModeDerived, Spin,
};
pub use thermo::{
    chemical_potential, fermi, free_energy_analytic, free_energy_direct, partition_function,
    z_density, FermiParams, FreeEnergyBreakdown,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/thermodynamics.md")]
    mod thermodynamics {}
    #[doc = include_str!("../../../book/src/magnetization.md")]
    mod magnetization {}
    #[doc = include_str!("../../../book/src/orbits.md")]
    mod orbits {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
