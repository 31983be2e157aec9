use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sphere_landau::classical::{ClassicalState, Integrator};
use sphere_landau::oracle::GridSpec;
use sphere_landau::spectrum::truncation_for;
use sphere_landau::{
    Conventions, Error, FieldPoint, PhysicalParams, Result, SweepGrid, SweepSource, Truncation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Explicit truncation fields; anything left out comes from the
/// validity bound.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationOverrides {
    pub m_max: Option<u32>,
    pub l_max: Option<u32>,
    pub n_max: Option<u32>,
    pub theta_cut: Option<f64>,
    pub e_max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub m: Vec<i64>,
    pub l: Vec<u32>,
    pub half_width: f64,
    pub points: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        let grid = GridSpec::default();
        CertifyConfig {
            m: (-2..=2).collect(),
            l: (0..=3).collect(),
            half_width: grid.half_width,
            points: grid.points,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitConfig {
    pub initial: ClassicalState,
    pub dt: f64,
    pub steps: usize,
    pub integrator: Integrator,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            initial: ClassicalState::new(0.0, 0.0, 0.5, 0.0),
            dt: 1e-3,
            steps: 100_000,
            integrator: Integrator::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub point: Option<FieldPoint>,
    pub grid: Option<SweepGrid>,
    pub truncation: TruncationOverrides,
    pub conventions: Conventions,
    pub with_spin: bool,
    pub sweep_source: SweepSource,
    /// Relative step for numerical b-derivatives.
    pub rel_step: f64,
    pub detrend_order: usize,
    pub certify: CertifyConfig,
    pub orbit: OrbitConfig,
    pub output: OutputConfig,
    /// Set when the configuration names a phase convention explicitly.
    #[serde(skip)]
    pub phase_given: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: PhysicalParams::natural(),
            point: None,
            grid: None,
            truncation: TruncationOverrides::default(),
            conventions: Conventions::default(),
            with_spin: false,
            sweep_source: SweepSource::Analytic,
            rel_step: 1e-5,
            detrend_order: 2,
            certify: CertifyConfig::default(),
            orbit: OrbitConfig::default(),
            output: OutputConfig::default(),
            phase_given: false,
        }
    }
}

pub const DEFAULT_THETA_CUT: f64 = 0.3;

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let phase_given = raw
            .get("conventions")
            .and_then(|c| c.get("phase"))
            .is_some();
        let mut config: RunConfig =
            serde_json::from_value(raw).map_err(|e| Error::Config(e.to_string()))?;
        config.phase_given = phase_given;
        config.params.validate()?;
        Ok(config)
    }

    pub fn point(&self) -> Result<FieldPoint> {
        let point = self.point.ok_or_else(|| {
            Error::Config("this subcommand needs `point` {b, beta, nu | n_electrons}".into())
        })?;
        point.validate()?;
        Ok(point)
    }

    pub fn grid(&self) -> Result<SweepGrid> {
        let grid = self.grid.ok_or_else(|| {
            Error::Config("this subcommand needs `grid` {b_min, b_max, count, spacing}".into())
        })?;
        grid.validate()?;
        Ok(grid)
    }

    /// Truncation at field `b`: overrides where given, the validity
    /// bound elsewhere.
    pub fn truncation_at(&self, b: f64, beta: f64) -> Result<Truncation> {
        let o = &self.truncation;
        let theta_cut = o.theta_cut.unwrap_or(DEFAULT_THETA_CUT);
        let derived = match (o.m_max, o.l_max) {
            (Some(m_max), Some(l_max)) => Truncation {
                m_max,
                l_max,
                n_max: sphere_landau::harmonic_count(&self.params, b, beta),
                theta_cut,
            },
            _ => truncation_for(
                &self.params,
                b,
                beta,
                theta_cut,
                o.e_max.unwrap_or(f64::INFINITY),
                self.conventions.eigenvalue_omega,
            )?,
        };
        let t = Truncation {
            m_max: o.m_max.unwrap_or(derived.m_max),
            l_max: o.l_max.unwrap_or(derived.l_max),
            n_max: o.n_max.unwrap_or(derived.n_max),
            theta_cut,
        };
        t.validate()?;
        Ok(t)
    }

    /// One truncation for a whole sweep: m and l limits from the lowest
    /// field, harmonic count from the highest.
    pub fn sweep_truncation(&self, grid: &SweepGrid, beta: f64) -> Result<Truncation> {
        let low = self.truncation_at(grid.b_min, beta)?;
        let high = self.truncation_at(grid.b_max, beta)?;
        Ok(Truncation {
            n_max: low.n_max.max(high.n_max),
            ..low
        })
    }

    pub fn certify_grid(&self) -> GridSpec {
        GridSpec {
            half_width: self.certify.half_width,
            points: self.certify.points,
        }
    }
}
