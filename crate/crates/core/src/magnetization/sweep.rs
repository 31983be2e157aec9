use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SignConvention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    UniformB,
    #[default]
    UniformInvB,
}

/// Field grid description, as read from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub b_min: f64,
    pub b_max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_min > 0.0 && self.b_min.is_finite()) {
            return Err(Error::NonPositiveParameter("b_min"));
        }
        if !(self.b_max > self.b_min && self.b_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "b_max = {} must exceed b_min = {}",
                self.b_max, self.b_min
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidGrid(format!("count = {} < 2", self.count)));
        }
        Ok(())
    }

    /// Grid points as (b, 1/b), ascending in b.
    ///
    /// For [`Spacing::UniformInvB`] the 1/b values are generated directly
    /// so their spacing is uniform to rounding.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let last = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::UniformB => {
                        let b = self.b_min + t * (self.b_max - self.b_min);
                        (b, 1.0 / b)
                    }
                    Spacing::UniformInvB => {
                        let (hi, lo) = (1.0 / self.b_min, 1.0 / self.b_max);
                        let u = hi - t * (hi - lo);
                        (1.0 / u, u)
                    }
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSource {
    Analytic,
    NumericDiff,
}

impl SweepSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepSource::Analytic => "analytic",
            SweepSource::NumericDiff => "numeric_diff",
        }
    }
}

/// Magnetization over a field grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnetizationSweep {
    pub grid: Vec<f64>,
    pub inv_b: Vec<f64>,
    pub m_values: Vec<f64>,
    pub source: SweepSource,
    pub sign_convention: SignConvention,
}

impl MagnetizationSweep {
    pub fn new(
        points: &[(f64, f64)],
        m_values: Vec<f64>,
        source: SweepSource,
        sign_convention: SignConvention,
    ) -> Result<Self> {
        if points.len() != m_values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} grid points but {} values",
                points.len(),
                m_values.len()
            )));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidGrid(
                "b values must be strictly ascending".into(),
            ));
        }
        Ok(MagnetizationSweep {
            grid: points.iter().map(|p| p.0).collect(),
            inv_b: points.iter().map(|p| p.1).collect(),
            m_values,
            source,
            sign_convention,
        })
    }

    /// Evaluate `f` at every grid point in order.
    pub fn evaluate<F>(
        points: &[(f64, f64)],
        source: SweepSource,
        sign_convention: SignConvention,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let values = points.iter().map(|p| f(p.0)).collect::<Result<Vec<_>>>()?;
        Self::new(points, values, source, sign_convention)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("b,inv_b,M,source,convention\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{},{}",
                self.grid[i],
                self.inv_b[i],
                self.m_values[i],
                self.source.as_str(),
                self.sign_convention.as_str()
            );
        }
        out
    }
}
