//! Physical constants, field points, truncation limits and convention
//! switches shared by every other module.
//!
//! Everything defaults to natural units, e = μ = m₀ = ħ = r = 1 with g = 2.
//! Custom units are accepted, but the closed-form expressions are applied
//! literally: `m²/μ²` is added to `ω_c²` as if `m` carried units of mass
//! times frequency, so results outside natural units should be read with
//! care.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitsMode {
    #[default]
    Natural,
    Custom,
}

/// Electron and geometry constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Electric charge.
    pub e: f64,
    /// Effective mass μ.
    pub mu: f64,
    /// Free electron mass.
    pub m0: f64,
    /// Effective giromagnetic factor.
    pub g_factor: f64,
    pub hbar: f64,
    /// Sphere radius.
    pub r: f64,
    pub units_mode: UnitsMode,
}

impl PhysicalParams {
    pub const fn natural() -> Self {
        PhysicalParams {
            e: 1.0,
            mu: 1.0,
            m0: 1.0,
            g_factor: 2.0,
            hbar: 1.0,
            r: 1.0,
            units_mode: UnitsMode::Natural,
        }
    }

    /// Areal density of states per level, eb/(4πħ²).
    pub fn areal_weight(&self, b: f64) -> f64 {
        self.e * b / (4.0 * PI * self.hbar * self.hbar)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e", self.e),
            ("mu", self.mu),
            ("m0", self.m0),
            ("g_factor", self.g_factor),
            ("hbar", self.hbar),
            ("r", self.r),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveParameter(name));
            }
        }
        if self.units_mode == UnitsMode::Natural {
            let natural = PhysicalParams::natural();
            let expected = [
                natural.e,
                natural.mu,
                natural.m0,
                natural.g_factor,
                natural.hbar,
                natural.r,
            ];
            for ((field, got), expected) in fields.into_iter().zip(expected) {
                if got != expected {
                    return Err(Error::UnitsModeMismatch {
                        field,
                        expected,
                        got,
                    });
                }
            }
        }
        Ok(())
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams::natural()
    }
}

/// One thermodynamic state: field, inverse temperature and either the
/// chemical potential or the areal particle number (or both).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldPoint {
    pub b: f64,
    /// Inverse temperature, Boltzmann constant absorbed.
    pub beta: f64,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub n_electrons: Option<f64>,
}

impl FieldPoint {
    pub fn with_nu(b: f64, beta: f64, nu: f64) -> Self {
        FieldPoint {
            b,
            beta,
            nu: Some(nu),
            n_electrons: None,
        }
    }

    pub fn with_count(b: f64, beta: f64, n_electrons: f64) -> Self {
        FieldPoint {
            b,
            beta,
            nu: None,
            n_electrons: Some(n_electrons),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::NonPositiveParameter("b"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::NonPositiveParameter("beta"));
        }
        match (self.nu, self.n_electrons) {
            (None, None) => return Err(Error::MissingPotentialAndCount),
            (Some(nu), _) if !nu.is_finite() => {
                return Err(Error::InvalidArgument("nu must be finite".into()))
            }
            (_, Some(n)) if !(n >= 0.0 && n.is_finite()) => {
                return Err(Error::NonPositiveParameter("n_electrons"))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Check both halves of a configuration and hand them back unchanged.
pub fn validate(params: PhysicalParams, point: FieldPoint) -> Result<(PhysicalParams, FieldPoint)> {
    params.validate()?;
    point.validate()?;
    Ok((params, point))
}

/// Cutoffs for the level sums and the harmonic series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    /// Largest |m| included.
    pub m_max: u32,
    /// Largest oscillator index included.
    pub l_max: u32,
    /// Largest harmonic index in the oscillatory series.
    pub n_max: u32,
    /// Validity angle in radians.
    pub theta_cut: f64,
}

impl Truncation {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::InvalidTruncation("n_max must be at least 1".into()));
        }
        if !(self.theta_cut > 0.0 && self.theta_cut < FRAC_PI_2) {
            return Err(Error::InvalidTruncation(format!(
                "theta_cut = {} outside (0, pi/2)",
                self.theta_cut
            )));
        }
        Ok(())
    }

    /// The m values summed over, ascending.
    pub fn m_values(&self, even_m_only: bool) -> Vec<i64> {
        let m_max = i64::from(self.m_max);
        (-m_max..=m_max)
            .filter(|m| !even_m_only || m % 2 == 0)
            .collect()
    }
}

/// Which frequency multiplies (l + ½) in the eigenvalue formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenvalueOmega {
    #[default]
    Mode,
    Cyclotron,
}

/// Phase of the oscillatory harmonics.
///
/// `PaperLiteral` uses 2nπν/(ħω_m) − α_m/(ħω_m); `DerivationConsistent`
/// uses (2nπ/(ħω_m))(ν − α_m), the argument carried by the density z(E).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    PaperLiteral,
    #[default]
    DerivationConsistent,
}

/// Closed form used for the sum over the oscillator index l.
///
/// `PaperLiteral` is 1/sinh(βħω_m/2); `GeometricExact` is the true
/// Σ_{l≥0} value 1/(2 sinh(βħω_m/2)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LSum {
    #[default]
    PaperLiteral,
    GeometricExact,
}

impl LSum {
    /// Multiplier applied to every quantity derived from the partition
    /// function, relative to the literal formulas.
    pub fn factor(self) -> f64 {
        match self {
            LSum::PaperLiteral => 1.0,
            LSum::GeometricExact => 0.5,
        }
    }
}

/// Whether M is reported as ∂F/∂b (literal convention) or −∂F/∂b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SignConvention {
    #[default]
    #[serde(rename = "dF_db")]
    DfDb,
    #[serde(rename = "minus_dF_db")]
    MinusDfDb,
}

impl SignConvention {
    pub fn apply(self, value: f64) -> f64 {
        match self {
            SignConvention::DfDb => value,
            SignConvention::MinusDfDb => -value,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SignConvention::DfDb => "dF_db",
            SignConvention::MinusDfDb => "minus_dF_db",
        }
    }
}

/// All interpretation switches in one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Conventions {
    pub eigenvalue_omega: EigenvalueOmega,
    pub phase: PhaseConvention,
    pub l_sum: LSum,
    pub sign_convention: SignConvention,
    /// Restrict m to even integers (period-π reading of the φ condition).
    pub even_m_only: bool,
}
