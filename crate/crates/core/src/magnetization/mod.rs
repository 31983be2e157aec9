//! Oscillatory magnetization and its cross-checks.
//!
//! [`magnetization_analytic`] evaluates the leading-term series
//!
//! ```text
//! M = (e/4πħ²) Σ_m Σ_n (−1)ⁿ/(4βn) · sin φ_{m,n} · cos(nπω₀/2ω_m) / sinh x_{m,n}
//!                       · (1 + 2π²n e ω_c / (tanh x_{m,n} · μ ω_m³ β ħ))
//! x_{m,n} = 2π²n/(βħω_m)
//! ```
//!
//! and [`magnetization_numeric`] differentiates the level-sum free energy
//! by central differences.

mod dhva;
mod sweep;

pub use dhva::{dhva_extract, spectral_peaks, DhvaSpectrum, MIN_POINTS};
pub use sweep::{MagnetizationSweep, Spacing, SweepGrid, SweepSource};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{inv_sinh, pairwise_sum};
use crate::params::{Conventions, PhaseConvention, PhysicalParams, SignConvention, Truncation};
use crate::spectrum::{build_spectrum, LevelTable, ModeDerived};
use crate::thermo::{
    damping_argument, free_energy_direct, harmonic_phase, harmonic_term, spin_cosine, FermiParams,
};

/// Second factor multiplying every harmonic of M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bracket {
    /// 1 + 2π²neω_c/(tanh x · μω_m³βħ).
    #[default]
    Literal,
    /// 1 + b · 2π²neω_c/(tanh x · μω_m³βħ), the exact b-derivative of
    /// eb/sinh x.
    Rederived,
    /// 1, the planar series.
    Unity,
}

/// 2π²neω_c/(tanh x · μω_m³βħ), the correction term inside the bracket.
pub fn bracket_correction(params: &PhysicalParams, b: f64, beta: f64, n: u32, m: i64) -> f64 {
    let mode = ModeDerived::new(params, b, m);
    correction(params, beta, n, &mode)
}

fn correction(params: &PhysicalParams, beta: f64, n: u32, mode: &ModeDerived) -> f64 {
    let x = damping_argument(n, beta, mode, params.hbar);
    2.0 * PI * PI * f64::from(n) * params.e * mode.omega_c
        / (x.tanh() * params.mu * mode.omega_m.powi(3) * beta * params.hbar)
}

fn bracket_value(
    params: &PhysicalParams,
    b: f64,
    beta: f64,
    n: u32,
    mode: &ModeDerived,
    bracket: Bracket,
) -> f64 {
    match bracket {
        Bracket::Literal => 1.0 + correction(params, beta, n, mode),
        Bracket::Rederived => 1.0 + b * correction(params, beta, n, mode),
        Bracket::Unity => 1.0,
    }
}

fn series(
    params: &PhysicalParams,
    b: f64,
    fp: FermiParams,
    n_max: u32,
    modes: &[ModeDerived],
    phase: PhaseConvention,
    bracket: Bracket,
) -> f64 {
    let mut per_m = vec![0.0; modes.len()];
    let per_n: Vec<f64> = (1..=n_max)
        .map(|n| {
            for (slot, mode) in per_m.iter_mut().zip(modes) {
                *slot = harmonic_term(n, fp, mode, params.hbar, phase)
                    * bracket_value(params, b, fp.beta, n, mode, bracket);
            }
            pairwise_sum(&per_m)
        })
        .collect();
    pairwise_sum(&per_n)
}

fn prefactor(params: &PhysicalParams) -> f64 {
    params.e / (4.0 * PI * params.hbar * params.hbar)
}

/// Leading-term magnetization per unit area with the literal bracket.
pub fn magnetization_analytic(
    params: &PhysicalParams,
    b: f64,
    fp: FermiParams,
    truncation: &Truncation,
    conventions: &Conventions,
) -> Result<f64> {
    magnetization_analytic_with(params, b, fp, truncation, conventions, Bracket::Literal)
}

/// [`magnetization_analytic`] with an explicit choice of bracket.
pub fn magnetization_analytic_with(
    params: &PhysicalParams,
    b: f64,
    fp: FermiParams,
    truncation: &Truncation,
    conventions: &Conventions,
    bracket: Bracket,
) -> Result<f64> {
    truncation.validate()?;
    let modes: Vec<ModeDerived> = truncation
        .m_values(conventions.even_m_only)
        .into_iter()
        .map(|m| ModeDerived::new(params, b, m))
        .collect();
    let sum = series(
        params,
        b,
        fp,
        truncation.n_max,
        &modes,
        conventions.phase,
        bracket,
    );
    Ok(conventions
        .sign_convention
        .apply(prefactor(params) * conventions.l_sum.factor() * sum))
}

/// Planar Landau magnetization, the m = 0 series with unit bracket.
pub fn magnetization_planar(params: &PhysicalParams, b: f64, fp: FermiParams, n_max: u32) -> f64 {
    let mode = ModeDerived::new(params, b, 0);
    prefactor(params)
        * series(
            params,
            b,
            fp,
            n_max,
            &[mode],
            PhaseConvention::PaperLiteral,
            Bracket::Unity,
        )
}

/// |n-th harmonic| envelope of the planar series, (e/4πħ²)/(4βn sinh x).
pub fn planar_amplitude(params: &PhysicalParams, b: f64, beta: f64, n: u32) -> f64 {
    let mode = ModeDerived::new(params, b, 0);
    prefactor(params) / (4.0 * beta * f64::from(n))
        * inv_sinh(damping_argument(n, beta, &mode, params.hbar))
}

/// Oscillatory free energy with the phase and spin factor held at
/// `b_frozen`; only the explicit eb prefactor and the damping follow `b`.
///
/// Its b-derivative at `b = b_frozen` is the [`Bracket::Rederived`] series.
pub fn free_energy_leading(
    params: &PhysicalParams,
    b: f64,
    b_frozen: f64,
    fp: FermiParams,
    truncation: &Truncation,
    conventions: &Conventions,
) -> Result<f64> {
    truncation.validate()?;
    let ms = truncation.m_values(conventions.even_m_only);
    let mut per_m = vec![0.0; ms.len()];
    let per_n: Vec<f64> = (1..=truncation.n_max)
        .map(|n| {
            for (slot, &m) in per_m.iter_mut().zip(&ms) {
                let now = ModeDerived::new(params, b, m);
                let frozen = ModeDerived::new(params, b_frozen, m);
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                *slot = sign / (4.0 * fp.beta * f64::from(n))
                    * harmonic_phase(n, fp.nu, &frozen, params.hbar, conventions.phase).sin()
                    * spin_cosine(n, &frozen)
                    * inv_sinh(damping_argument(n, fp.beta, &now, params.hbar));
            }
            pairwise_sum(&per_m)
        })
        .collect();
    Ok(params.areal_weight(b) * conventions.l_sum.factor() * pairwise_sum(&per_n))
}

/// Central difference (f(b+h) − f(b−h))/(2h) with h = `rel_step`·b.
///
/// The estimate at h is checked against the one at h/2; a disagreement
/// above 10% is reported as [`Error::StepTooSmall`].
pub fn central_derivative<F>(f: F, b: f64, rel_step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(rel_step > 1e-8 && rel_step < 1e-2) {
        return Err(Error::InvalidArgument(format!(
            "relative step {rel_step} outside (1e-8, 1e-2)"
        )));
    }
    let h = rel_step * b;
    let coarse = (f(b + h)? - f(b - h)?) / (2.0 * h);
    let fine = (f(b + 0.5 * h)? - f(b - 0.5 * h)?) / h;
    if (coarse - fine).abs() > 0.1 * coarse.abs().max(fine.abs()) {
        return Err(Error::StepTooSmall { coarse, fine });
    }
    Ok(coarse)
}

/// Richardson combination (4·D(h/2) − D(h))/3 of two central differences.
pub fn richardson_derivative<F>(f: F, b: f64, rel_step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = central_derivative(&f, b, rel_step)?;
    let fine = central_derivative(&f, b, 0.5 * rel_step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Anything that can produce a level table and its degeneracy at a field.
pub trait LevelSource {
    fn levels(&self, b: f64) -> Result<LevelTable>;
    fn weight(&self, b: f64) -> f64;
}

/// The closed-form spectrum with a fixed truncation.
#[derive(Debug, Clone, Copy)]
pub struct SphereLevels {
    pub params: PhysicalParams,
    pub truncation: Truncation,
    pub with_spin: bool,
    pub conventions: Conventions,
}

impl LevelSource for SphereLevels {
    fn levels(&self, b: f64) -> Result<LevelTable> {
        build_spectrum(
            &self.params,
            b,
            &self.truncation,
            self.with_spin,
            &self.conventions,
        )
    }

    fn weight(&self, b: f64) -> f64 {
        self.params.areal_weight(b)
    }
}

/// ±∂F/∂b of the level-sum free energy, levels rebuilt at b ± h.
pub fn magnetization_numeric_from<S: LevelSource>(
    source: &S,
    b: f64,
    fp: FermiParams,
    n_electrons: f64,
    rel_step: f64,
    sign: SignConvention,
) -> Result<f64> {
    let f = |bb: f64| -> Result<f64> {
        let table = source.levels(bb)?;
        Ok(free_energy_direct(
            &table,
            fp,
            n_electrons,
            source.weight(bb),
        ))
    };
    central_derivative(f, b, rel_step).map(|d| sign.apply(d))
}

/// [`magnetization_numeric_from`] on the closed-form spectrum.
#[allow(clippy::too_many_arguments)]
pub fn magnetization_numeric(
    params: &PhysicalParams,
    b: f64,
    fp: FermiParams,
    n_electrons: f64,
    truncation: &Truncation,
    with_spin: bool,
    conventions: &Conventions,
    rel_step: f64,
) -> Result<f64> {
    let source = SphereLevels {
        params: *params,
        truncation: *truncation,
        with_spin,
        conventions: *conventions,
    };
    magnetization_numeric_from(
        &source,
        b,
        fp,
        n_electrons,
        rel_step,
        conventions.sign_convention,
    )
}
