//! Closed-form level structure of the small-angle Hamiltonian.
//!
//! Near the pole the θ-mode equation reduces, after θ = ρ_m y and
//! x = y + λ_m/2, to a unit harmonic oscillator. Every quantity here is a
//! direct consequence of that reduction:
//!
//! ```text
//! ω_c = eb/μ          ω₀ = eb/m₀          ω_m = √(ω_c² + m²/μ²)
//! ρ_m = √(ħ/(μω_m))   λ_m = (2embr/ħ²)(ħ/(μω_m))^{3/2}
//! α_m = ħ²m²/(2μ) + λ_m²/2
//! E_{m,l} = ħ²m²/(2μ) + ħω_m(l + ½) − ħω_m λ_m²/8
//! ```

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::inv_sinh;
use crate::params::{Conventions, EigenvalueOmega, PhysicalParams, Truncation};

/// Relative size below which a harmonic's damping factor is dropped.
pub const HARMONIC_CUTOFF: f64 = 1e-12;

/// Upper limit on the number of harmonics kept when β is very large.
pub const MAX_HARMONICS: u32 = 1_000_000;

/// eb/μ.
pub fn cyclotron_frequency(params: &PhysicalParams, b: f64) -> f64 {
    params.e * b / params.mu
}

/// eb/m₀, the frequency that sets the spin splitting.
pub fn free_electron_frequency(params: &PhysicalParams, b: f64) -> f64 {
    params.e * b / params.m0
}

/// √(ω_c² + m²/μ²). Returns ω_c itself for m = 0.
pub fn mode_frequency(params: &PhysicalParams, b: f64, m: i64) -> f64 {
    let omega_c = cyclotron_frequency(params, b);
    if m == 0 {
        return omega_c;
    }
    let k = m as f64 / params.mu;
    (omega_c * omega_c + k * k).sqrt()
}

/// Dimensionless linear shift λ_m. Odd in m.
pub fn lambda_shift(params: &PhysicalParams, b: f64, m: i64) -> f64 {
    let omega_m = mode_frequency(params, b, m);
    let hbar = params.hbar;
    2.0 * params.e * m as f64 * b * params.r / (hbar * hbar)
        * (hbar / (params.mu * omega_m)).powf(1.5)
}

/// ħ²m²/(2μ) + λ_m²/2. Even in m.
pub fn alpha_shift(params: &PhysicalParams, b: f64, m: i64) -> f64 {
    let lambda = lambda_shift(params, b, m);
    kinetic_term(params, m) + 0.5 * lambda * lambda
}

/// Oscillator length √(ħ/(μω_m)), in radians.
pub fn length_scale(params: &PhysicalParams, b: f64, m: i64) -> f64 {
    (params.hbar / (params.mu * mode_frequency(params, b, m))).sqrt()
}

fn kinetic_term(params: &PhysicalParams, m: i64) -> f64 {
    let m = m as f64;
    params.hbar * params.hbar * m * m / (2.0 * params.mu)
}

/// Per-m derived quantities, bundled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeDerived {
    pub m: i64,
    pub omega_c: f64,
    pub omega_0: f64,
    pub omega_m: f64,
    pub lambda_m: f64,
    pub rho_m: f64,
    pub alpha_m: f64,
}

impl ModeDerived {
    pub fn new(params: &PhysicalParams, b: f64, m: i64) -> Self {
        ModeDerived {
            m,
            omega_c: cyclotron_frequency(params, b),
            omega_0: free_electron_frequency(params, b),
            omega_m: mode_frequency(params, b, m),
            lambda_m: lambda_shift(params, b, m),
            rho_m: length_scale(params, b, m),
            alpha_m: alpha_shift(params, b, m),
        }
    }
}

/// The planar Landau ladder ħω_c(l + ½).
pub fn planar_level(params: &PhysicalParams, b: f64, l: u32) -> f64 {
    params.hbar * cyclotron_frequency(params, b) * (f64::from(l) + 0.5)
}

/// E_{m,l}. `omega` picks the frequency multiplying (l + ½).
pub fn energy_level(
    params: &PhysicalParams,
    b: f64,
    m: i64,
    l: u32,
    omega: EigenvalueOmega,
) -> f64 {
    let omega_m = mode_frequency(params, b, m);
    let ladder = match omega {
        EigenvalueOmega::Mode => omega_m,
        EigenvalueOmega::Cyclotron => cyclotron_frequency(params, b),
    };
    let lambda = lambda_shift(params, b, m);
    kinetic_term(params, m) + params.hbar * ladder * (f64::from(l) + 0.5)
        - params.hbar * omega_m * lambda * lambda / 8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up,
    Down,
    None,
}

impl Spin {
    pub fn as_str(self) -> &'static str {
        match self {
            Spin::Up => "up",
            Spin::Down => "down",
            Spin::None => "none",
        }
    }
}

/// E ± għω₀/4, `Up` taking the plus sign.
pub fn spin_split(energy: f64, spin: Spin, params: &PhysicalParams, b: f64) -> f64 {
    let zeeman = params.g_factor * params.hbar * free_electron_frequency(params, b) / 4.0;
    match spin {
        Spin::Up => energy + zeeman,
        Spin::Down => energy - zeeman,
        Spin::None => energy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub m: i64,
    pub l: u32,
    pub spin: Spin,
    pub energy: f64,
}

impl Level {
    fn order(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then(self.m.cmp(&other.m))
            .then(self.l.cmp(&other.l))
            .then(self.spin.cmp(&other.spin))
    }
}

/// All levels inside a truncation, ascending in energy.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    pub levels: Vec<Level>,
    pub truncation: Truncation,
    pub b: f64,
}

impl LevelTable {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|level| level.energy)
    }

    /// CSV with header `m,l,spin,energy`; energies in shortest round-trip
    /// scientific notation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,l,spin,energy\n");
        for level in &self.levels {
            let _ = writeln!(
                out,
                "{},{},{},{:e}",
                level.m,
                level.l,
                level.spin.as_str(),
                level.energy
            );
        }
        out
    }
}

/// Every (m, l, spin) inside `truncation`, sorted by energy and then by
/// (m, l, spin).
pub fn build_spectrum(
    params: &PhysicalParams,
    b: f64,
    truncation: &Truncation,
    with_spin: bool,
    conventions: &Conventions,
) -> Result<LevelTable> {
    truncation.validate()?;
    let spins: &[Spin] = if with_spin {
        &[Spin::Up, Spin::Down]
    } else {
        &[Spin::None]
    };
    let mut levels = Vec::new();
    for m in truncation.m_values(conventions.even_m_only) {
        for l in 0..=truncation.l_max {
            let energy = energy_level(params, b, m, l, conventions.eigenvalue_omega);
            for &spin in spins {
                levels.push(Level {
                    m,
                    l,
                    spin,
                    energy: spin_split(energy, spin, params, b),
                });
            }
        }
    }
    if levels.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    levels.sort_by(Level::order);
    Ok(LevelTable {
        levels,
        truncation: *truncation,
        b,
    })
}

/// Right-hand side of the small-angle confinement bound,
/// (ħ|m| + √(2μE))/(ebr).
pub fn confinement_angle(params: &PhysicalParams, b: f64, m: i64, energy: f64) -> f64 {
    (params.hbar * m.unsigned_abs() as f64 + (2.0 * params.mu * energy.max(0.0)).sqrt())
        / (params.e * b * params.r)
}

/// Number of harmonics needed before 1/sinh(2π²n/(βħω_c)) falls below
/// [`HARMONIC_CUTOFF`] times its n = 1 value.
pub fn harmonic_count(params: &PhysicalParams, b: f64, beta: f64) -> u32 {
    let a = 2.0 * PI * PI / (beta * params.hbar * cyclotron_frequency(params, b));
    let first = inv_sinh(a);
    let mut n = 1;
    while n < MAX_HARMONICS && inv_sinh(a * f64::from(n + 1)) >= HARMONIC_CUTOFF * first {
        n += 1;
    }
    n
}

/// Field-dependent truncation from the small-angle validity bound.
///
/// `l_max` is the largest l with E(0, l) ≤ `e_max` whose bound holds;
/// `m_max` is the largest |m| for which the bound holds at every
/// l ≤ `l_max`. `n_max` comes from [`harmonic_count`].
pub fn truncation_for(
    params: &PhysicalParams,
    b: f64,
    beta: f64,
    theta_cut: f64,
    e_max: f64,
    omega: EigenvalueOmega,
) -> Result<Truncation> {
    if !(theta_cut > 0.0 && theta_cut < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidTruncation(format!(
            "theta_cut = {theta_cut} outside (0, pi/2)"
        )));
    }
    if !(e_max > 0.0) {
        return Err(Error::NonPositiveParameter("e_max"));
    }
    let admissible = |m: i64, l: u32| {
        let energy = energy_level(params, b, m, l, omega);
        energy <= e_max && confinement_angle(params, b, m, energy) < theta_cut
    };
    if !admissible(0, 0) {
        return Err(Error::EmptySpectrum);
    }
    let mut l_max = 0;
    while l_max < u32::MAX && admissible(0, l_max + 1) {
        l_max += 1;
    }
    // the bound caps |m| at theta_cut·ebr/ħ
    let m_limit = (theta_cut * params.e * b * params.r / params.hbar).ceil() as i64 + 1;
    let fits = |m: i64| {
        (0..=l_max).all(|l| {
            let energy = energy_level(params, b, m, l, omega);
            confinement_angle(params, b, m, energy) < theta_cut
        })
    };
    let mut m_max = 0;
    while m_max < m_limit && fits(m_max + 1) {
        m_max += 1;
    }
    Ok(Truncation {
        m_max: u32::try_from(m_max).map_err(|_| Error::EmptySpectrum)?,
        l_max,
        n_max: harmonic_count(params, b, beta),
        theta_cut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NATURAL: PhysicalParams = PhysicalParams::natural();

    fn custom(e: f64, mu: f64) -> PhysicalParams {
        PhysicalParams {
            e,
            mu,
            units_mode: crate::params::UnitsMode::Custom,
            ..NATURAL
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cyclotron_examples() {
        assert_eq!(cyclotron_frequency(&NATURAL, 1.0), 1.0);
        assert_eq!(cyclotron_frequency(&custom(2.0, 4.0), 3.0), 1.5);
    }

    #[test]
    fn mode_frequency_examples() {
        assert_eq!(mode_frequency(&NATURAL, 7.25, 0), 7.25);
        assert_eq!(mode_frequency(&NATURAL, 3.0, 4), 5.0);
        // 50-digit reference: √10001
        assert!(rel(mode_frequency(&NATURAL, 100.0, 1), 100.004_999_875_006_25) < 1e-15);
        assert_eq!(
            mode_frequency(&NATURAL, 5.0, -3),
            mode_frequency(&NATURAL, 5.0, 3)
        );
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_shift(&NATURAL, 100.0, 0), 0.0);
        // 200 / 10001^{3/4} at 50 digits
        assert!(rel(lambda_shift(&NATURAL, 100.0, 1), 0.199_985_001_312_379_7) < 1e-14);
        let ratio = lambda_shift(&NATURAL, 1e6, 1) / lambda_shift(&NATURAL, 1e2, 1);
        assert!((ratio - 1e-2).abs() < 1e-6);
        assert_eq!(
            lambda_shift(&NATURAL, 9.0, -2),
            -lambda_shift(&NATURAL, 9.0, 2)
        );
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_shift(&NATURAL, 100.0, 0), 0.0);
        assert!(rel(alpha_shift(&NATURAL, 100.0, 1), 0.519_997_000_374_956_3) < 1e-14);
        for m in 1..=10 {
            assert_eq!(
                alpha_shift(&NATURAL, 37.0, m),
                alpha_shift(&NATURAL, 37.0, -m)
            );
        }
    }

    #[test]
    fn energy_level_examples() {
        assert_eq!(
            energy_level(&NATURAL, 1.0, 0, 0, EigenvalueOmega::Mode),
            0.5
        );
        for l in 0..20 {
            for b in [0.3, 1.0, 17.0, 1e4] {
                assert_eq!(
                    energy_level(&NATURAL, b, 0, l, EigenvalueOmega::Mode).to_bits(),
                    planar_level(&NATURAL, b, l).to_bits()
                );
            }
        }
        assert!(
            rel(
                energy_level(&NATURAL, 100.0, 1, 0, EigenvalueOmega::Mode),
                50.002_549_932_503_63
            ) < 1e-14
        );
    }

    #[test]
    fn cyclotron_reading_differs_only_for_nonzero_m() {
        let mode = energy_level(&NATURAL, 10.0, 0, 3, EigenvalueOmega::Mode);
        let cyc = energy_level(&NATURAL, 10.0, 0, 3, EigenvalueOmega::Cyclotron);
        assert_eq!(mode, cyc);
        assert!(
            energy_level(&NATURAL, 10.0, 2, 3, EigenvalueOmega::Mode)
                > energy_level(&NATURAL, 10.0, 2, 3, EigenvalueOmega::Cyclotron)
        );
    }

    #[test]
    fn spin_split_examples() {
        assert_eq!(spin_split(3.0, Spin::None, &NATURAL, 100.0), 3.0);
        assert_eq!(spin_split(3.0, Spin::Up, &NATURAL, 100.0), 53.0);
        let up = spin_split(7.5, Spin::Up, &NATURAL, 13.0);
        let down = spin_split(7.5, Spin::Down, &NATURAL, 13.0);
        assert_eq!(0.5 * (up + down), 7.5);
    }

    /// Independent scan: test every m against the bound with its exact
    /// l = 0 energy, no early exit.
    fn brute_force_m_max(b: f64, theta_cut: f64) -> i64 {
        (0..1000)
            .filter(|&m| {
                let mf = m as f64;
                let omega = (b * b + mf * mf).sqrt();
                let lambda = 2.0 * mf * b / omega.powf(1.5);
                let energy = 0.5 * mf * mf + 0.5 * omega - omega * lambda * lambda / 8.0;
                (mf + (2.0 * energy).sqrt()) / b < theta_cut
            })
            .max()
            .unwrap()
    }

    #[test]
    fn truncation_reference_case() {
        let t = truncation_for(&NATURAL, 100.0, 50.0, 0.3, 60.0, EigenvalueOmega::Mode).unwrap();
        assert_eq!(t.l_max, 0);
        assert_eq!(t.m_max, 19);
        assert_eq!(i64::from(t.m_max), brute_force_m_max(100.0, 0.3));
    }

    #[test]
    fn truncation_empty_for_tiny_angle() {
        assert!(matches!(
            truncation_for(&NATURAL, 100.0, 50.0, 1e-3, 1e9, EigenvalueOmega::Mode),
            Err(Error::EmptySpectrum)
        ));
        assert!(matches!(
            truncation_for(&NATURAL, 100.0, 50.0, 0.3, 10.0, EigenvalueOmega::Mode),
            Err(Error::EmptySpectrum)
        ));
    }

    #[test]
    fn truncation_monotone_in_field() {
        // e_max caps l_max at both fields
        let mut b = 20.0;
        while b < 5e3 {
            let t = truncation_for(&NATURAL, b, 10.0, 0.4, 2.0 * b, EigenvalueOmega::Mode).unwrap();
            let t2 = truncation_for(&NATURAL, 2.0 * b, 10.0, 0.4, 2.0 * b, EigenvalueOmega::Mode)
                .unwrap();
            assert!(t2.m_max >= t.m_max, "b = {b}");
            b *= 1.7;
        }
    }

    #[test]
    fn harmonic_count_meets_cutoff() {
        let n = harmonic_count(&NATURAL, 100.0, 50.0);
        let a = 2.0 * PI * PI / 5000.0;
        let first = 1.0 / a.sinh();
        assert!(1.0 / (a * f64::from(n + 1)).sinh() < 1e-12 * first);
        assert!(1.0 / (a * f64::from(n)).sinh() >= 1e-12 * first);
    }

    #[test]
    fn planar_ladder_table() {
        let t = Truncation {
            m_max: 0,
            l_max: 2,
            n_max: 1,
            theta_cut: 0.5,
        };
        let table = build_spectrum(&NATURAL, 1.0, &t, false, &Conventions::default()).unwrap();
        assert_eq!(table.energies().collect::<Vec<_>>(), vec![0.5, 1.5, 2.5]);
        assert_eq!(
            table.to_csv(),
            "m,l,spin,energy\n0,0,none,5e-1\n0,1,none,1.5e0\n0,2,none,2.5e0\n"
        );
    }

    #[test]
    fn table_counts_and_positivity() {
        let t = truncation_for(
            &NATURAL,
            100.0,
            50.0,
            0.3,
            f64::INFINITY,
            EigenvalueOmega::Mode,
        )
        .unwrap();
        let table = build_spectrum(&NATURAL, 100.0, &t, false, &Conventions::default()).unwrap();
        assert!(table.energies().all(|e| e > 0.0));
        assert_eq!(
            table.len(),
            (2 * t.m_max as usize + 1) * (t.l_max as usize + 1)
        );
        let spun = build_spectrum(&NATURAL, 100.0, &t, true, &Conventions::default()).unwrap();
        assert_eq!(spun.len(), 2 * table.len());
        let even = Conventions {
            even_m_only: true,
            ..Conventions::default()
        };
        let t4 = Truncation { m_max: 4, ..t };
        let evens = build_spectrum(&NATURAL, 100.0, &t4, false, &even).unwrap();
        assert!(evens.levels.iter().all(|l| l.m % 2 == 0));
        assert_eq!(evens.len(), 5 * (t.l_max as usize + 1));
    }

    #[test]
    fn ties_break_lexicographically() {
        let t = Truncation {
            m_max: 3,
            l_max: 1,
            n_max: 1,
            theta_cut: 0.5,
        };
        let table = build_spectrum(&NATURAL, 10.0, &t, true, &Conventions::default()).unwrap();
        for pair in table.levels.windows(2) {
            assert_ne!(pair[0].order(&pair[1]), Ordering::Greater);
        }
        // ±m are exactly degenerate, so -m must come first
        let first_m1 = table.levels.iter().position(|l| l.m.abs() == 1).unwrap();
        assert_eq!(table.levels[first_m1].m, -1);
    }

    proptest::proptest! {
        #[test]
        fn mode_frequency_dominates_cyclotron(b in 1e-2f64..1e5, m in -50i64..50) {
            let w = mode_frequency(&NATURAL, b, m);
            let wc = cyclotron_frequency(&NATURAL, b);
            proptest::prop_assert!(w >= wc);
            proptest::prop_assert_eq!(w == wc, m == 0);
            proptest::prop_assert!(alpha_shift(&NATURAL, b, m) >= 0.0);
            proptest::prop_assert!(length_scale(&NATURAL, b, m) > 0.0);
            let lambda = lambda_shift(&NATURAL, b, m);
            let sign_ok = if m == 0 { lambda == 0.0 } else { lambda * m as f64 > 0.0 };
            proptest::prop_assert!(sign_ok);
        }

        #[test]
        fn lambda_scales_as_inverse_root_field(b in 1e3f64..1e7, m in 1i64..5) {
            let ratio = lambda_shift(&NATURAL, 4.0 * b, m) / lambda_shift(&NATURAL, b, m);
            proptest::prop_assert!((ratio - 0.5).abs() < 0.005);
        }
    }

    #[test]
    fn mode_ratio_tends_to_one() {
        let r1 = mode_frequency(&NATURAL, 1e2, 3) / cyclotron_frequency(&NATURAL, 1e2);
        let r2 = mode_frequency(&NATURAL, 1e5, 3) / cyclotron_frequency(&NATURAL, 1e5);
        assert!(r2 - 1.0 < 1e-3 * (r1 - 1.0));
    }
}
