use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::json;
use sphere_landau::classical::{check_confinement, integrate};
use sphere_landau::magnetization::{
    dhva_extract, magnetization_numeric, MagnetizationSweep, Spacing, SweepGrid, SweepSource,
};
use sphere_landau::thermo::{
    chemical_potential, free_energy_analytic, free_energy_direct, FermiParams,
};
use sphere_landau::{
    build_spectrum, certify_spectrum, magnetization_analytic, Error, FieldPoint, LevelTable, Result,
};

use crate::config::{Format, RunConfig};
use crate::emit::{diagnostic, to_json, warning, Failure};

/// Output body of one subcommand.
pub type Rendered = std::result::Result<String, Failure>;

pub fn warn_phase(config: &RunConfig) {
    if !config.phase_given {
        warning(
            "phase",
            "the literal harmonic phase disagrees with the density it is derived from; \
             using derivation_consistent (override with --phase paper_literal)",
        );
    }
}

pub fn spectrum(config: &RunConfig, format: Format) -> Rendered {
    let point = config
        .point
        .ok_or_else(|| Error::Config("spectrum needs `point`".into()))?;
    // only b and beta matter here
    if point.b.is_nan() || point.b <= 0.0 {
        return Err(Error::NonPositiveParameter("b").into());
    }
    if point.beta.is_nan() || point.beta <= 0.0 {
        return Err(Error::NonPositiveParameter("beta").into());
    }
    let t = config.truncation_at(point.b, point.beta)?;
    let table = build_spectrum(
        &config.params,
        point.b,
        &t,
        config.with_spin,
        &config.conventions,
    )?;
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => to_json(&json!({
            "b": table.b,
            "truncation": table.truncation,
            "levels": table.levels,
        })),
    })
}

pub fn certify(config: &RunConfig, format: Format) -> Rendered {
    let b = config.point.map_or(50.0, |p| p.b);
    let report = certify_spectrum(
        &config.params,
        b,
        &config.certify.m,
        &config.certify.l,
        config.conventions.eigenvalue_omega,
        &config.certify_grid(),
    )?;
    diagnostic(
        "certified",
        json!({
            "b": b,
            "max_rel_dev": report.max_rel_dev,
            "worst_m": report.worst_m,
            "worst_l": report.worst_l,
        }),
    );
    Ok(match format {
        Format::Csv => report.to_csv(),
        Format::Json => to_json(&report),
    })
}

/// Level table, its weight and the chemical potential of a field point.
fn resolve_point(config: &RunConfig, point: &FieldPoint) -> Result<(LevelTable, f64, FermiParams)> {
    let t = config.truncation_at(point.b, point.beta)?;
    let table = build_spectrum(
        &config.params,
        point.b,
        &t,
        config.with_spin,
        &config.conventions,
    )?;
    let weight = config.params.areal_weight(point.b);
    let nu = match (point.nu, point.n_electrons) {
        (Some(nu), _) => nu,
        (None, Some(n)) => chemical_potential(&table, point.beta, n, weight)?,
        (None, None) => return Err(Error::MissingPotentialAndCount),
    };
    Ok((table, weight, FermiParams::new(nu, point.beta)?))
}

pub fn free_energy(config: &RunConfig, format: Format) -> Rendered {
    warn_phase(config);
    let point = config.point()?;
    let (table, weight, fp) = resolve_point(config, &point)?;
    let n = point.n_electrons.unwrap_or(0.0);
    let breakdown = free_energy_analytic(
        &config.params,
        point.b,
        fp,
        n,
        &table.truncation,
        &config.conventions,
    )?;
    let direct = free_energy_direct(&table, fp, n, weight);
    Ok(match format {
        Format::Csv => {
            let mut out = breakdown.to_csv();
            let _ = writeln!(out, "direct,,{direct:e}");
            out
        }
        Format::Json => to_json(&json!({
            "nu": fp.nu,
            "analytic": breakdown,
            "direct": direct,
        })),
    })
}

pub fn magnetization(config: &RunConfig, format: Format) -> Rendered {
    warn_phase(config);
    let point = config.point()?;
    let (table, _, fp) = resolve_point(config, &point)?;
    let t = table.truncation;
    let analytic = magnetization_analytic(&config.params, point.b, fp, &t, &config.conventions)?;
    let numeric = magnetization_numeric(
        &config.params,
        point.b,
        fp,
        point.n_electrons.unwrap_or(0.0),
        &t,
        config.with_spin,
        &config.conventions,
        config.rel_step,
    )?;
    let convention = config.conventions.sign_convention.as_str();
    Ok(match format {
        Format::Csv => format!(
            "b,nu,analytic,numeric_diff,convention\n{:e},{:e},{analytic:e},{numeric:e},{convention}\n",
            point.b, fp.nu
        ),
        Format::Json => to_json(&json!({
            "b": point.b,
            "nu": fp.nu,
            "analytic": analytic,
            "numeric_diff": numeric,
            "convention": convention,
        })),
    })
}

/// Evaluate M over the configured grid on `threads` workers, in grid order.
pub fn run_sweep(
    config: &RunConfig,
    grid: &SweepGrid,
    threads: usize,
) -> Result<MagnetizationSweep> {
    let point = config.point()?;
    let nu = point
        .nu
        .ok_or_else(|| Error::Config("sweeps need a fixed chemical potential `point.nu`".into()))?;
    let fp = FermiParams::new(nu, point.beta)?;
    let t = config.sweep_truncation(grid, point.beta)?;
    let points = grid.points()?;
    let evaluate = |b: f64| -> Result<f64> {
        match config.sweep_source {
            SweepSource::Analytic => {
                magnetization_analytic(&config.params, b, fp, &t, &config.conventions)
            }
            SweepSource::NumericDiff => magnetization_numeric(
                &config.params,
                b,
                fp,
                point.n_electrons.unwrap_or(0.0),
                &t,
                config.with_spin,
                &config.conventions,
                config.rel_step,
            ),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let values = pool.install(|| points.par_iter().map(|p| evaluate(p.0)).collect::<Vec<_>>());
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    MagnetizationSweep::new(
        &points,
        values,
        config.sweep_source,
        config.conventions.sign_convention,
    )
}

pub fn sweep(config: &RunConfig, format: Format, threads: usize) -> Rendered {
    warn_phase(config);
    let grid = config.grid()?;
    let sweep = run_sweep(config, &grid, threads)?;
    Ok(match format {
        Format::Csv => sweep.to_csv(),
        Format::Json => to_json(&sweep),
    })
}

pub fn dhva(config: &RunConfig, format: Format, threads: usize) -> Rendered {
    let grid = config.grid()?;
    if grid.spacing != Spacing::UniformInvB {
        let u: Vec<f64> = grid.points()?.iter().map(|p| p.1).collect();
        let step = (u[0] - u[u.len() - 1]) / (u.len() - 1) as f64;
        let deviation = u
            .windows(2)
            .map(|w| ((w[0] - w[1] - step) / step).abs())
            .fold(0.0, f64::max);
        diagnostic(
            "guidance",
            json!({ "message": "dhva needs a grid uniform in 1/b; set grid.spacing to \"uniform_inv_b\"" }),
        );
        return Err(Error::NonUniformGrid(deviation).into());
    }
    warn_phase(config);
    let sweep = run_sweep(config, &grid, threads)?;
    let spectrum = dhva_extract(&sweep, config.detrend_order)?;
    Ok(match format {
        Format::Json => to_json(&spectrum),
        Format::Csv => {
            let mut out = String::from("frequency,amplitude\n");
            for (f, a) in spectrum.frequencies.iter().zip(&spectrum.amplitudes) {
                let _ = writeln!(out, "{f:e},{a:e}");
            }
            out
        }
    })
}

pub fn orbit(config: &RunConfig, format: Format) -> Rendered {
    let b = config.point.map_or(100.0, |p| p.b);
    let o = &config.orbit;
    let traj = match integrate(&config.params, b, o.initial, o.dt, o.steps, o.integrator) {
        Ok(traj) => traj,
        Err(Error::ChartExit(partial)) => {
            diagnostic(
                "chart_exit",
                json!({ "steps_completed": partial.times.len() - 1, "last_theta": partial.states.last().map(|s| s.theta) }),
            );
            let body = match format {
                Format::Csv => partial.to_csv(),
                Format::Json => to_json(&json!({ "trajectory": partial })),
            };
            return Err(Failure::Partial {
                body,
                error: Error::ChartExit(partial),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let report = check_confinement(&traj, &config.params, b);
    diagnostic(
        "confinement",
        json!({
            "max_theta": report.max_theta,
            "bound": report.bound,
            "holds": report.holds,
            "relative_energy_drift": traj.relative_energy_drift(),
            "p_phi_drift": traj.p_phi_drift,
        }),
    );
    Ok(match format {
        Format::Csv => traj.to_csv(),
        Format::Json => to_json(&json!({ "trajectory": traj, "confinement": report })),
    })
}
