//! Grand-canonical thermodynamics of the level spectrum.
//!
//! Two independent routes to the free energy live here:
//!
//! * [`free_energy_direct`] sums ln(1 + e^{β(ν−E)}) over an explicit
//!   [`LevelTable`].
//! * [`free_energy_analytic`] evaluates the closed form obtained from the
//!   poles of Z(β)/β², a smooth part plus damped harmonics
//!
//! ```text
//! F = Nν + (eb/4πħ²) Σ_m { (ν−α_m)²/(ħω_m) + [½(gω₀/2ω_m)² − 1/6] ħω_m }
//!       + (eb/4πħ²) Σ_m Σ_n (−1)ⁿ/(4βn) · sin φ_{m,n} · cos(nπω₀/2ω_m)
//!                                       / sinh(2π²n/(βħω_m))
//! ```
//!
//! The two are not expected to agree in absolute normalization (the
//! analytic route inherits the l-sum factor of two, see [`LSum`]); they
//! are compared through periods and phases only.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{
    bisect_increasing, inv_sinh, ln_two_cosh, log_sum_exp, pairwise_sum, softplus,
};
use crate::params::{
    Conventions, EigenvalueOmega, LSum, PhaseConvention, PhysicalParams, Truncation,
};
use crate::spectrum::{energy_level, free_electron_frequency, LevelTable, ModeDerived};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiParams {
    pub nu: f64,
    pub beta: f64,
}

impl FermiParams {
    pub fn new(nu: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::NonPositiveParameter("beta"));
        }
        if !nu.is_finite() {
            return Err(Error::InvalidArgument("nu must be finite".into()));
        }
        Ok(FermiParams { nu, beta })
    }
}

/// 1/(1 + e^{β(E−ν)}), saturating cleanly at both ends.
pub fn fermi(energy: f64, fp: FermiParams) -> f64 {
    let x = fp.beta * (energy - fp.nu);
    if x > 0.0 {
        let t = (-x).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Occupation weight·Σ f(E).
pub fn particle_number(table: &LevelTable, fp: FermiParams, weight: f64) -> f64 {
    let terms: Vec<f64> = table.energies().map(|e| fermi(e, fp)).collect();
    weight * pairwise_sum(&terms)
}

/// Nν − (weight/β) Σ ln(1 + e^{β(ν−E)}).
///
/// `weight` is the degeneracy attached to each level; the physical choice
/// is [`PhysicalParams::areal_weight`].
pub fn free_energy_direct(
    table: &LevelTable,
    fp: FermiParams,
    n_electrons: f64,
    weight: f64,
) -> f64 {
    let terms: Vec<f64> = table
        .energies()
        .map(|e| softplus(fp.beta * (fp.nu - e)))
        .collect();
    n_electrons * fp.nu - weight / fp.beta * pairwise_sum(&terms)
}

/// Chemical potential that places `n_electrons` particles in `table`.
///
/// Bisection on [min E − 50/β, max E + 50/β]; the occupation is strictly
/// increasing in ν so the root is unique.
pub fn chemical_potential(
    table: &LevelTable,
    beta: f64,
    n_electrons: f64,
    weight: f64,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::NonPositiveParameter("beta"));
    }
    let capacity = weight * table.len() as f64;
    if table.is_empty() || !(n_electrons > 0.0 && n_electrons < capacity) {
        return Err(Error::Unbracketable {
            target: n_electrons,
            min: 0.0,
            max: capacity,
        });
    }
    let lo_e = table.energies().fold(f64::INFINITY, f64::min);
    let hi_e = table.energies().fold(f64::NEG_INFINITY, f64::max);
    let excess = |nu: f64| particle_number(table, FermiParams { nu, beta }, weight) - n_electrons;
    let lo = lo_e - 50.0 / beta;
    let hi = hi_e + 50.0 / beta;
    if excess(lo) > 0.0 || excess(hi) < 0.0 {
        return Err(Error::Unbracketable {
            target: n_electrons,
            min: excess(lo) + n_electrons,
            max: excess(hi) + n_electrons,
        });
    }
    Ok(bisect_increasing(excess, lo, hi, 0.0))
}

fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
}

/// ln Z per unit area, evaluated in log space.
pub fn log_partition_function(
    params: &PhysicalParams,
    b: f64,
    beta: f64,
    truncation: &Truncation,
    with_spin: bool,
    conventions: &Conventions,
) -> Result<f64> {
    truncation.validate()?;
    if !(beta > 0.0) {
        return Err(Error::NonPositiveParameter("beta"));
    }
    let hbar = params.hbar;
    let exponents: Vec<f64> = truncation
        .m_values(conventions.even_m_only)
        .into_iter()
        .map(|m| {
            let mode = ModeDerived::new(params, b, m);
            let ladder = match conventions.eigenvalue_omega {
                EigenvalueOmega::Mode => mode.omega_m,
                EigenvalueOmega::Cyclotron => mode.omega_c,
            };
            // offset of the l = 0 level above ħΩ/2
            let offset =
                energy_level(params, b, m, 0, conventions.eigenvalue_omega) - 0.5 * hbar * ladder;
            let l_sum = match conventions.l_sum {
                LSum::PaperLiteral => -ln_sinh(0.5 * beta * hbar * ladder),
                LSum::GeometricExact => {
                    -ln_sinh(0.5 * beta * hbar * ladder) - std::f64::consts::LN_2
                }
            };
            -beta * offset + l_sum
        })
        .collect();
    let spin = if with_spin {
        ln_two_cosh(beta * params.g_factor * hbar * free_electron_frequency(params, b) / 4.0)
    } else {
        0.0
    };
    Ok(params.areal_weight(b).ln() + spin + log_sum_exp(&exponents))
}

/// Z per unit area, with the l-sum in closed form (see [`LSum`]).
pub fn partition_function(
    params: &PhysicalParams,
    b: f64,
    beta: f64,
    truncation: &Truncation,
    with_spin: bool,
    conventions: &Conventions,
) -> Result<f64> {
    log_partition_function(params, b, beta, truncation, with_spin, conventions).map(f64::exp)
}

/// Spin factor cos(nπω₀/(2ω_m)) as it enters each harmonic.
pub(crate) fn spin_cosine(n: u32, mode: &ModeDerived) -> f64 {
    (f64::from(n) * PI * mode.omega_0 / (2.0 * mode.omega_m)).cos()
}

/// Phase φ_{m,n} of harmonic n, for chemical potential `nu`.
pub(crate) fn harmonic_phase(
    n: u32,
    nu: f64,
    mode: &ModeDerived,
    hbar: f64,
    convention: PhaseConvention,
) -> f64 {
    let hw = hbar * mode.omega_m;
    let k = 2.0 * f64::from(n) * PI / hw;
    match convention {
        PhaseConvention::PaperLiteral => k * nu - mode.alpha_m / hw,
        PhaseConvention::DerivationConsistent => k * (nu - mode.alpha_m),
    }
}

/// Damping argument 2π²n/(βħω_m).
pub(crate) fn damping_argument(n: u32, beta: f64, mode: &ModeDerived, hbar: f64) -> f64 {
    2.0 * PI * PI * f64::from(n) / (beta * hbar * mode.omega_m)
}

/// (−1)ⁿ/(4βn) · sin φ · cos(nπω₀/2ω_m) / sinh(2π²n/(βħω_m)), one (m, n)
/// term of the oscillatory free energy without the areal prefactor.
pub(crate) fn harmonic_term(
    n: u32,
    fp: FermiParams,
    mode: &ModeDerived,
    hbar: f64,
    convention: PhaseConvention,
) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let phase = harmonic_phase(n, fp.nu, mode, hbar, convention);
    sign / (4.0 * fp.beta * f64::from(n))
        * phase.sin()
        * spin_cosine(n, mode)
        * inv_sinh(damping_argument(n, fp.beta, mode, hbar))
}

/// Non-oscillatory per-m bracket at energy `x`:
/// (x − α_m)²/(ħω_m) + [½(gω₀/2ω_m)² − 1/6] ħω_m.
fn smooth_term(params: &PhysicalParams, x: f64, mode: &ModeDerived) -> f64 {
    let hw = params.hbar * mode.omega_m;
    let ratio = params.g_factor * mode.omega_0 / (2.0 * mode.omega_m);
    (x - mode.alpha_m).powi(2) / hw + (0.5 * ratio * ratio - 1.0 / 6.0) * hw
}

fn modes(
    params: &PhysicalParams,
    b: f64,
    truncation: &Truncation,
    conventions: &Conventions,
) -> Vec<ModeDerived> {
    truncation
        .m_values(conventions.even_m_only)
        .into_iter()
        .map(|m| ModeDerived::new(params, b, m))
        .collect()
}

/// Pole-sum density z(E), with the harmonic series cut at `n_max`.
pub fn z_density(
    params: &PhysicalParams,
    b: f64,
    energy: f64,
    truncation: &Truncation,
    conventions: &Conventions,
) -> Result<f64> {
    truncation.validate()?;
    if !(energy >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "z(E) needs E >= 0, got {energy}"
        )));
    }
    let hbar = params.hbar;
    let per_m: Vec<f64> = modes(params, b, truncation, conventions)
        .iter()
        .map(|mode| {
            let hw = hbar * mode.omega_m;
            let series: Vec<f64> = (1..=truncation.n_max)
                .map(|n| {
                    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                    let npi = f64::from(n) * PI;
                    let arg = 2.0 * npi / hw * (energy - mode.alpha_m);
                    -0.5 * hw * sign * spin_cosine(n, mode) * arg.cos() / (npi * npi)
                })
                .collect();
            smooth_term(params, energy, mode) + pairwise_sum(&series)
        })
        .collect();
    Ok(params.areal_weight(b) * conventions.l_sum.factor() * pairwise_sum(&per_m))
}

/// Smooth part, per-harmonic contributions and their total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergyBreakdown {
    /// Nν plus the smooth m-sum.
    pub smooth: f64,
    /// Entry `i` is harmonic n = i + 1, summed over m.
    pub harmonics: Vec<f64>,
    /// smooth + Σ harmonics (fixed pairwise order).
    pub total: f64,
    pub convention: PhaseConvention,
}

impl FreeEnergyBreakdown {
    pub fn oscillatory(&self) -> f64 {
        pairwise_sum(&self.harmonics)
    }

    /// CSV rows `component,n,value` for smooth, each harmonic, and total.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("component,n,value\n");
        let _ = writeln!(out, "smooth,,{:e}", self.smooth);
        for (i, h) in self.harmonics.iter().enumerate() {
            let _ = writeln!(out, "harmonic,{},{:e}", i + 1, h);
        }
        let _ = writeln!(out, "total,,{:e}", self.total);
        out
    }
}

/// Closed-form free energy per unit area.
pub fn free_energy_analytic(
    params: &PhysicalParams,
    b: f64,
    fp: FermiParams,
    n_electrons: f64,
    truncation: &Truncation,
    conventions: &Conventions,
) -> Result<FreeEnergyBreakdown> {
    truncation.validate()?;
    let scale = params.areal_weight(b) * conventions.l_sum.factor();
    let modes = modes(params, b, truncation, conventions);
    let smooth_terms: Vec<f64> = modes
        .iter()
        .map(|mode| smooth_term(params, fp.nu, mode))
        .collect();
    let smooth = n_electrons * fp.nu + scale * pairwise_sum(&smooth_terms);
    let harmonics = oscillatory_harmonics(params, fp, truncation.n_max, &modes, conventions.phase)
        .into_iter()
        .map(|h| scale * h)
        .collect::<Vec<_>>();
    let total = smooth + pairwise_sum(&harmonics);
    Ok(FreeEnergyBreakdown {
        smooth,
        harmonics,
        total,
        convention: conventions.phase,
    })
}

/// Σ_m of the harmonic term, for n = 1..=n_max, without prefactor.
pub(crate) fn oscillatory_harmonics(
    params: &PhysicalParams,
    fp: FermiParams,
    n_max: u32,
    modes: &[ModeDerived],
    convention: PhaseConvention,
) -> Vec<f64> {
    let mut per_m = vec![0.0; modes.len()];
    (1..=n_max)
        .map(|n| {
            for (slot, mode) in per_m.iter_mut().zip(modes) {
                *slot = harmonic_term(n, fp, mode, params.hbar, convention);
            }
            pairwise_sum(&per_m)
        })
        .collect()
}

/// Upper envelope of |harmonic n|: prefactor · Σ_m 1/(4βn sinh(2π²n/(βħω_m))).
pub fn harmonic_envelope(
    params: &PhysicalParams,
    b: f64,
    beta: f64,
    n: u32,
    truncation: &Truncation,
    conventions: &Conventions,
) -> f64 {
    let terms: Vec<f64> = modes(params, b, truncation, conventions)
        .iter()
        .map(|mode| {
            inv_sinh(damping_argument(n, beta, mode, params.hbar)) / (4.0 * beta * f64::from(n))
        })
        .collect();
    params.areal_weight(b) * conventions.l_sum.factor() * pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Truncation;
    use crate::spectrum::{build_spectrum, harmonic_count, Level, Spin};

    const NATURAL: PhysicalParams = PhysicalParams::natural();

    fn toy(energies: &[f64]) -> LevelTable {
        LevelTable {
            levels: energies
                .iter()
                .enumerate()
                .map(|(i, &energy)| Level {
                    m: 0,
                    l: i as u32,
                    spin: Spin::None,
                    energy,
                })
                .collect(),
            truncation: Truncation {
                m_max: 0,
                l_max: energies.len() as u32 - 1,
                n_max: 1,
                theta_cut: 0.5,
            },
            b: 1.0,
        }
    }

    fn trunc(m_max: u32, n_max: u32) -> Truncation {
        Truncation {
            m_max,
            l_max: 0,
            n_max,
            theta_cut: 0.5,
        }
    }

    #[test]
    fn fermi_examples() {
        let fp = FermiParams { nu: 2.0, beta: 3.0 };
        assert_eq!(fermi(2.0, fp), 0.5);
        let e = 2.0 + 3f64.ln() / 3.0;
        assert!((fermi(e, fp) - 0.25).abs() < 1e-15);
        assert_eq!(fermi(2.0 + 300.0, fp), 0.0);
        assert_eq!(fermi(2.0 - 300.0, fp), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn fermi_particle_hole(nu in -50f64..50.0, beta in 1e-2f64..1e3, d in 0f64..100.0) {
            let fp = FermiParams { nu, beta };
            proptest::prop_assert!((fermi(nu + d, fp) + fermi(nu - d, fp) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn fermi_decreasing(nu in -5f64..5.0, beta in 1e-2f64..10.0, e in -5f64..5.0, d in 1e-3f64..1.0) {
            let fp = FermiParams { nu, beta };
            proptest::prop_assert!(fermi(e + d, fp) <= fermi(e, fp));
        }
    }

    #[test]
    fn single_level_free_energy() {
        let f = free_energy_direct(&toy(&[1.3]), FermiParams { nu: 1.3, beta: 4.0 }, 0.0, 1.0);
        assert!((f + 2f64.ln() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_temperature_limit() {
        let table = toy(&[0.5, 1.5, 2.5]);
        let fp = FermiParams { nu: 2.0, beta: 1e4 };
        let f = free_energy_direct(&table, fp, 3.0, 0.7);
        let limit = 3.0 * 2.0 - 0.7 * ((2.0 - 0.5) + (2.0 - 1.5));
        assert!((f - limit).abs() <= 1e-6);
    }

    #[test]
    fn toy_free_energy_matches_high_precision() {
        // −½ Σ ln(1 + e^{2(1−E)}) over {0.5, 1.5, 2.5}, 50-digit value
        let f = free_energy_direct(
            &toy(&[0.5, 1.5, 2.5]),
            FermiParams { nu: 1.0, beta: 2.0 },
            0.0,
            1.0,
        );
        assert!((f - -0.837_555_363_305_094).abs() < 1e-15);
    }

    #[test]
    fn free_energy_increases_with_beta() {
        let table = toy(&[0.5, 1.5, 2.5]);
        let mut last = f64::NEG_INFINITY;
        for beta in [0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
            let f = free_energy_direct(&table, FermiParams { nu: 1.0, beta }, 1.0, 1.0);
            assert!(f >= last);
            last = f;
        }
    }

    #[test]
    fn chemical_potential_examples() {
        let single = toy(&[0.8]);
        let nu = chemical_potential(&single, 5.0, 0.5 * 2.0, 2.0).unwrap();
        assert!((nu - 0.8).abs() < 1e-12);

        let ladder = toy(&[0.5, 1.5, 2.5, 3.5]);
        for k in 1..4 {
            let nu = chemical_potential(&ladder, 1e4, k as f64, 1.0).unwrap();
            assert!(nu > ladder.levels[k - 1].energy && nu < ladder.levels[k].energy);
        }

        let table = toy(&[0.5, 1.5, 2.5]);
        let nu = chemical_potential(&table, 2.0, 1.0, 1.0).unwrap();
        let back = particle_number(&table, FermiParams { nu, beta: 2.0 }, 1.0);
        assert!((back - 1.0).abs() <= 1e-10);

        assert!(matches!(
            chemical_potential(&table, 2.0, 3.0, 1.0),
            Err(Error::Unbracketable { .. })
        ));
        assert!(matches!(
            chemical_potential(&table, 2.0, 0.0, 1.0),
            Err(Error::Unbracketable { .. })
        ));
    }

    #[test]
    fn partition_geometric_identity() {
        let conv = Conventions {
            l_sum: LSum::GeometricExact,
            ..Conventions::default()
        };
        let (b, beta) = (3.0, 0.7);
        let z = partition_function(&NATURAL, b, beta, &trunc(0, 1), false, &conv).unwrap();
        let direct: f64 = (0..2000)
            .map(|l| (-beta * (l as f64 + 0.5) * b).exp())
            .sum();
        let ratio = z / (NATURAL.areal_weight(b) * direct);
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_literal_is_twice_exact() {
        for (b, beta, m) in [(10.0, 1.0, 3), (2.0, 0.3, 5), (50.0, 0.02, 1)] {
            let exact = Conventions {
                l_sum: LSum::GeometricExact,
                ..Conventions::default()
            };
            let lit = partition_function(
                &NATURAL,
                b,
                beta,
                &trunc(m, 1),
                true,
                &Conventions::default(),
            )
            .unwrap();
            let ex = partition_function(&NATURAL, b, beta, &trunc(m, 1), true, &exact).unwrap();
            assert!((lit / ex - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn partition_matches_high_precision() {
        // 50-digit term-by-term sums, natural units, b = 10, β = 1, |m| ≤ 3, spin on
        let exact = Conventions {
            l_sum: LSum::GeometricExact,
            ..Conventions::default()
        };
        let z = partition_function(&NATURAL, 10.0, 1.0, &trunc(3, 1), true, &exact).unwrap();
        assert!((z / 4.556_352_423_482_077 - 1.0).abs() < 1e-13);
        let z = partition_function(
            &NATURAL,
            10.0,
            1.0,
            &trunc(3, 1),
            true,
            &Conventions::default(),
        )
        .unwrap();
        assert!((z / 9.112_704_846_964_155 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn partition_survives_huge_beta_in_log_space() {
        let ln_z = log_partition_function(
            &NATURAL,
            100.0,
            1e4,
            &trunc(2, 1),
            true,
            &Conventions::default(),
        )
        .unwrap();
        assert!(ln_z.is_finite());
    }

    #[test]
    fn z_density_smooth_terms() {
        // m = 0 only, natural units: ω₀ = ω_c so the g-bracket is ½(g/2)² − 1/6
        let b = 7.0;
        let t = trunc(0, 1);
        let at_alpha = z_density(&NATURAL, b, 0.0, &t, &Conventions::default()).unwrap();
        let series = 0.5 * b * (PI / 2.0).cos() / (PI * PI);
        let want = NATURAL.areal_weight(b) * ((0.5 * 1.0 - 1.0 / 6.0) * b + series);
        assert!((at_alpha - want).abs() < 1e-13 * want.abs());
    }

    #[test]
    fn z_density_harmonics_decay_as_inverse_square() {
        // isolate the n-th term by differencing truncations
        let b = 3.0;
        let conv = Conventions::default();
        let e = 0.1;
        let z = |n: u32| z_density(&NATURAL, b, e, &trunc(0, n), &conv).unwrap();
        let term = |n: u32| z(n) - z(n - 1);
        // even n: spin cosine is ±1, cos(2nπE/b) bounded, amplitude ∝ 1/n²
        let amp = |n: u32| {
            let arg = 2.0 * f64::from(n) * PI / b * e;
            (term(n) / arg.cos()).abs()
        };
        assert!((amp(2) / amp(4) - 4.0).abs() < 1e-9);
        assert!((amp(4) / amp(8) - 4.0).abs() < 1e-9);
    }

    fn scenario() -> (f64, FermiParams, Truncation) {
        let b = 100.0;
        let fp = FermiParams {
            nu: 10.0,
            beta: 50.0,
        };
        (b, fp, trunc(5, harmonic_count(&NATURAL, b, 50.0)))
    }

    #[test]
    fn breakdown_reconstructs_total() {
        let (b, fp, t) = scenario();
        let f = free_energy_analytic(&NATURAL, b, fp, 0.3, &t, &Conventions::default()).unwrap();
        assert_eq!(f.total, f.smooth + pairwise_sum(&f.harmonics));
        assert_eq!(f.harmonics.len(), t.n_max as usize);
        assert_eq!(f.total.to_bits(), (f.smooth + f.oscillatory()).to_bits());
    }

    #[test]
    fn harmonics_under_non_increasing_envelope() {
        let (b, fp, t) = scenario();
        let conv = Conventions::default();
        let f = free_energy_analytic(&NATURAL, b, fp, 0.0, &t, &conv).unwrap();
        let mut last = f64::INFINITY;
        for n in 1..200u32 {
            let env = harmonic_envelope(&NATURAL, b, fp.beta, n, &t, &conv);
            assert!(env <= last);
            assert!(f.harmonics[n as usize - 1].abs() <= env * (1.0 + 1e-12));
            last = env;
        }
    }

    #[test]
    fn conventions_agree_at_m_zero() {
        let (b, fp, _) = scenario();
        let t = trunc(0, 400);
        let lit = Conventions {
            phase: PhaseConvention::PaperLiteral,
            ..Conventions::default()
        };
        let a = free_energy_analytic(&NATURAL, b, fp, 1.0, &t, &lit).unwrap();
        let d = free_energy_analytic(&NATURAL, b, fp, 1.0, &t, &Conventions::default()).unwrap();
        assert_eq!(a.harmonics, d.harmonics);
        assert_eq!(a.total, d.total);
        // but not once m ≠ 0 modes are present
        let t = trunc(3, 400);
        let a = free_energy_analytic(&NATURAL, b, fp, 1.0, &t, &lit).unwrap();
        let d = free_energy_analytic(&NATURAL, b, fp, 1.0, &t, &Conventions::default()).unwrap();
        assert_ne!(a.harmonics, d.harmonics);
    }

    #[test]
    fn damping_ratio_between_temperatures() {
        let b = 100.0;
        let t = trunc(0, 5);
        let conv = Conventions::default();
        let (b1, b2) = (20.0, 60.0);
        let f1 = free_energy_analytic(
            &NATURAL,
            b,
            FermiParams { nu: 13.7, beta: b1 },
            0.0,
            &t,
            &conv,
        )
        .unwrap();
        let f2 = free_energy_analytic(
            &NATURAL,
            b,
            FermiParams { nu: 13.7, beta: b2 },
            0.0,
            &t,
            &conv,
        )
        .unwrap();
        for n in 1..=5 {
            let x = |beta: f64| 2.0 * PI * PI * n as f64 / (beta * b);
            let want = (b2 * x(b2).sinh()) / (b1 * x(b1).sinh());
            let got = f1.harmonics[n - 1] / f2.harmonics[n - 1];
            assert!((got / want - 1.0).abs() <= 1e-10, "n = {n}");
        }
    }

    #[test]
    fn harmonic_truncation_is_negligible() {
        let (b, fp, t) = scenario();
        let conv = Conventions::default();
        let f = free_energy_analytic(&NATURAL, b, fp, 0.0, &t, &conv).unwrap();
        let wide = Truncation {
            n_max: 2 * t.n_max,
            ..t
        };
        let g = free_energy_analytic(&NATURAL, b, fp, 0.0, &wide, &conv).unwrap();
        assert!(((f.total - g.total) / g.total).abs() < 1e-12);
    }

    #[test]
    fn geometric_l_sum_halves_z_terms_only() {
        let (b, fp, t) = scenario();
        let exact = Conventions {
            l_sum: LSum::GeometricExact,
            ..Conventions::default()
        };
        let lit = free_energy_analytic(&NATURAL, b, fp, 2.0, &t, &Conventions::default()).unwrap();
        let ex = free_energy_analytic(&NATURAL, b, fp, 2.0, &t, &exact).unwrap();
        let n_nu = 2.0 * fp.nu;
        assert!(((ex.smooth - n_nu) * 2.0 - (lit.smooth - n_nu)).abs() < 1e-12 * lit.smooth.abs());
        assert_eq!(ex.harmonics[0] * 2.0, lit.harmonics[0]);
    }

    #[test]
    fn direct_route_on_built_spectrum_is_finite() {
        let t = Truncation {
            m_max: 5,
            l_max: 12,
            n_max: 1,
            theta_cut: 0.5,
        };
        let table = build_spectrum(&NATURAL, 100.0, &t, true, &Conventions::default()).unwrap();
        let f = free_energy_direct(
            &table,
            FermiParams {
                nu: 10.0,
                beta: 50.0,
            },
            0.0,
            NATURAL.areal_weight(100.0),
        );
        assert!(f.is_finite() && f < 0.0);
    }
}
