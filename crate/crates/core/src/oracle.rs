//! Finite-difference eigensolver for the θ-mode equation.
//!
//! In the shifted coordinate x = y + λ_m/2 the mode equation reads
//! X″ − x²X = −ε̃X. This module discretizes −X″ + V(x)X with second-order
//! central differences and Dirichlet ends, extracts the lowest eigenvalues
//! by Sturm-sequence bisection (so the ordering is guaranteed), and
//! Richardson-extrapolates between a grid and its half-spacing refinement.
//!
//! Nothing here calls into the closed-form spectrum, apart from the two
//! shift constants λ_m and ω_m that map ε̃ back to an energy.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{EigenvalueOmega, PhysicalParams};
use crate::spectrum::{energy_level, lambda_shift, mode_frequency};

/// Uniform grid over [−half_width, half_width] (in units of ρ_m),
/// endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub half_width: f64,
    /// Total node count including both Dirichlet ends. Odd.
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width: 12.0,
            points: 2001,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width >= 8.0 && self.half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half_width = {} must be at least 8",
                self.half_width
            )));
        }
        if self.points < 201 || self.points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points = {} must be odd and at least 201",
                self.points
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Same domain, half the spacing.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            half_width: self.half_width,
            points: 2 * self.points - 1,
        }
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// Off-diagonal, one shorter than `diag`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 {
                d - x
            } else {
                let e = self.off[i - 1];
                d - x - e * e / q
            };
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues, ascending, by bisection.
    pub fn lowest(&self, k: usize) -> Result<Vec<f64>> {
        let n = self.diag.len();
        if k > n {
            return Err(Error::InvalidArgument(format!(
                "requested {k} eigenvalues of a {n}x{n} matrix"
            )));
        }
        let (glo, ghi) = self.gershgorin();
        let slack = f64::EPSILON * (glo.abs() + ghi.abs()) + f64::MIN_POSITIVE;
        let (glo, ghi) = (glo - slack, ghi + slack);
        let mut out: Vec<f64> = Vec::with_capacity(k);
        for index in 0..k {
            // the previous eigenvalue is a valid lower bracket
            let mut lo = out.last().map_or(glo, |&prev| prev - slack);
            let mut hi = ghi;
            let mut converged = false;
            for _ in 0..256 {
                let mid = 0.5 * (lo + hi);
                if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) || mid <= lo || mid >= hi
                {
                    converged = true;
                    break;
                }
                if self.count_below(mid) > index {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let value = 0.5 * (lo + hi);
            if !converged || !value.is_finite() {
                return Err(Error::NonConvergence(index));
            }
            out.push(value);
        }
        Ok(out)
    }
}

/// Discretize −X″ + V(x)X on the interior nodes of `grid`, with the grid
/// centred on `center`.
pub fn discretize<V>(potential: V, center: f64, grid: &GridSpec) -> SymTridiagonal
where
    V: Fn(f64) -> f64,
{
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let interior = grid.points - 2;
    let start = center - grid.half_width;
    let diag = (1..=interior)
        .map(|i| 2.0 * inv_h2 + potential(start + i as f64 * h))
        .collect();
    SymTridiagonal {
        diag,
        off: vec![-inv_h2; interior - 1],
    }
}

/// Lowest `k` eigenvalues of a single grid, no extrapolation.
pub fn single_grid_eigenvalues<V>(
    potential: V,
    center: f64,
    grid: &GridSpec,
    k: usize,
) -> Result<Vec<f64>>
where
    V: Fn(f64) -> f64,
{
    grid.validate()?;
    discretize(potential, center, grid).lowest(k)
}

/// Richardson-extrapolated eigenvalues plus the error estimate of the
/// finer grid, |fine − coarse|/3.
fn extrapolated<V>(
    potential: V,
    center: f64,
    grid: &GridSpec,
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    V: Fn(f64) -> f64,
{
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    grid.validate()?;
    // one extra eigenvalue gives a level spacing for the last requested one
    let coarse = discretize(&potential, center, grid).lowest(k + 1)?;
    let fine = discretize(&potential, center, &grid.refined()).lowest(k + 1)?;
    let mut values = Vec::with_capacity(k);
    let mut errors = Vec::with_capacity(k);
    for level in 0..k {
        let estimate = (fine[level] - coarse[level]).abs() / 3.0;
        let spacing = fine[level + 1] - fine[level];
        let limit = 1e-4 * spacing;
        if !(estimate <= limit) {
            return Err(Error::GridTooCoarse {
                level,
                estimated: estimate,
                limit,
            });
        }
        values.push((4.0 * fine[level] - coarse[level]) / 3.0);
        errors.push(estimate);
    }
    Ok((values, errors))
}

/// Eigenvalues ε̃ of one m-mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub m: i64,
    pub b: f64,
    /// Lowest ε̃ values, ascending, Richardson-extrapolated.
    pub eigenvalues: Vec<f64>,
    pub grid: GridSpec,
    pub estimated_error: Vec<f64>,
}

impl EigenResult {
    /// E = (ε̃ − λ_m²/4)·ħω_m/2 + ħ²m²/(2μ) for each eigenvalue.
    pub fn energies(&self, params: &PhysicalParams) -> Vec<f64> {
        let lambda = lambda_shift(params, self.b, self.m);
        let omega = mode_frequency(params, self.b, self.m);
        let m = self.m as f64;
        let kinetic = params.hbar * params.hbar * m * m / (2.0 * params.mu);
        self.eigenvalues
            .iter()
            .map(|eps| (eps - lambda * lambda / 4.0) * params.hbar * omega / 2.0 + kinetic)
            .collect()
    }
}

/// Solve −X″ + x²X = ε̃X in the shifted coordinate.
pub fn solve_mode(
    params: &PhysicalParams,
    b: f64,
    m: i64,
    k: usize,
    grid: &GridSpec,
) -> Result<EigenResult> {
    params.validate()?;
    if !(b > 0.0) {
        return Err(Error::NonPositiveParameter("b"));
    }
    let (eigenvalues, estimated_error) = extrapolated(|x| x * x, 0.0, grid, k)?;
    Ok(EigenResult {
        m,
        b,
        eigenvalues,
        grid: *grid,
        estimated_error,
    })
}

/// Solve the pre-shift problem −Y″ + (y² + λ_m y)Y = κY on a grid centred
/// at y = 0, reported as ε̃ = κ + λ_m²/4.
pub fn solve_mode_unshifted(
    params: &PhysicalParams,
    b: f64,
    m: i64,
    k: usize,
    grid: &GridSpec,
) -> Result<EigenResult> {
    params.validate()?;
    if !(b > 0.0) {
        return Err(Error::NonPositiveParameter("b"));
    }
    let lambda = lambda_shift(params, b, m);
    let (kappa, estimated_error) = extrapolated(|y| y * y + lambda * y, 0.0, grid, k)?;
    Ok(EigenResult {
        m,
        b,
        eigenvalues: kappa.iter().map(|v| v + lambda * lambda / 4.0).collect(),
        grid: *grid,
        estimated_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyRow {
    pub m: i64,
    pub l: u32,
    pub closed_form: f64,
    pub fd: f64,
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub rows: Vec<CertifyRow>,
    pub max_rel_dev: f64,
    pub worst_m: i64,
    pub worst_l: u32,
}

impl Certification {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,l,closed_form,fd,rel_dev\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{:e}",
                row.m, row.l, row.closed_form, row.fd, row.rel_dev
            );
        }
        out
    }
}

/// Compare closed-form energies with the finite-difference oracle over
/// every (m, l) pair. The oracle discretizes the mode equation with its
/// linear term in place, before the shift that removes it.
pub fn certify_spectrum(
    params: &PhysicalParams,
    b: f64,
    m_list: &[i64],
    l_list: &[u32],
    omega: EigenvalueOmega,
    grid: &GridSpec,
) -> Result<Certification> {
    if m_list.is_empty() || l_list.is_empty() {
        return Err(Error::InvalidArgument(
            "certify needs at least one m and one l".into(),
        ));
    }
    let k = *l_list.iter().max().expect("nonempty") as usize + 1;
    let mut rows = Vec::with_capacity(m_list.len() * l_list.len());
    for &m in m_list {
        let fd = solve_mode_unshifted(params, b, m, k, grid)?.energies(params);
        for &l in l_list {
            let closed_form = energy_level(params, b, m, l, omega);
            let fd = fd[l as usize];
            rows.push(CertifyRow {
                m,
                l,
                closed_form,
                fd,
                rel_dev: ((closed_form - fd) / fd).abs(),
            });
        }
    }
    let worst =
        rows.iter().copied().fold(
            rows[0],
            |acc, row| if row.rel_dev > acc.rel_dev { row } else { acc },
        );
    Ok(Certification {
        max_rel_dev: worst.rel_dev,
        worst_m: worst.m,
        worst_l: worst.l,
        rows,
    })
}
