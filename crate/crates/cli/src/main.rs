//! `sphere-landau`: spectra, free energies, magnetization sweeps and
//! classical orbits from a JSON configuration.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use sphere_landau::{EigenvalueOmega, LSum, PhaseConvention, SignConvention};

use config::{Format, RunConfig};
use emit::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "sphere-landau",
    version,
    about = "Landau levels and dHvA oscillations on a sphere"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, env = "SPHERE_LANDAU_CONFIG")]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, global = true, env = "SPHERE_LANDAU_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, env = "SPHERE_LANDAU_FORMAT")]
    format: Option<Format>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true, env = "SPHERE_LANDAU_THREADS")]
    threads: Option<usize>,
    /// paper_literal | derivation_consistent
    #[arg(long, global = true, value_parser = parse_switch::<PhaseConvention>, env = "SPHERE_LANDAU_PHASE")]
    phase: Option<PhaseConvention>,
    /// dF_db | minus_dF_db
    #[arg(long, global = true, value_parser = parse_switch::<SignConvention>, env = "SPHERE_LANDAU_SIGN")]
    sign: Option<SignConvention>,
    /// Sum over even m only.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", env = "SPHERE_LANDAU_EVEN_M")]
    even_m: Option<bool>,
    /// paper_literal | geometric_exact
    #[arg(long, global = true, value_parser = parse_switch::<LSum>, env = "SPHERE_LANDAU_L_SUM")]
    l_sum: Option<LSum>,
    /// mode | cyclotron
    #[arg(long, global = true, value_parser = parse_switch::<EigenvalueOmega>, env = "SPHERE_LANDAU_EIG_OMEGA")]
    eig_omega: Option<EigenvalueOmega>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Level table inside the truncation.
    Spectrum,
    /// Closed-form levels against the finite-difference eigensolver.
    Certify,
    /// Smooth and harmonic parts of the free energy.
    FreeEnergy,
    /// Analytic and numerically differentiated M at one point.
    Magnetization,
    /// M over a field grid.
    Sweep,
    /// Oscillation frequencies of M in 1/b.
    Dhva,
    /// Classical orbit and confinement check.
    Orbit,
}

fn parse_switch<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    let conv = &mut config.conventions;
    if let Some(phase) = cli.phase {
        conv.phase = phase;
        config.phase_given = true;
    }
    if let Some(sign) = cli.sign {
        conv.sign_convention = sign;
    }
    if let Some(even) = cli.even_m {
        conv.even_m_only = even;
    }
    if let Some(l_sum) = cli.l_sum {
        conv.l_sum = l_sum;
    }
    if let Some(omega) = cli.eig_omega {
        conv.eigenvalue_omega = omega;
    }
    let format = cli.format.or(config.output.format).unwrap_or_default();
    let out = cli.out.clone().or_else(|| config.output.path.clone());
    let threads = match cli.threads {
        Some(0) => {
            return Err(sphere_landau::Error::InvalidArgument(
                "--threads must be at least 1".into(),
            )
            .into())
        }
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let body = match cli.command {
        Command::Spectrum => commands::spectrum(&config, format),
        Command::Certify => commands::certify(&config, format),
        Command::FreeEnergy => commands::free_energy(&config, format),
        Command::Magnetization => commands::magnetization(&config, format),
        Command::Sweep => commands::sweep(&config, format, threads),
        Command::Dhva => commands::dhva(&config, format, threads),
        Command::Orbit => commands::orbit(&config, format),
    };
    match body {
        Ok(body) => emit::write_output(out.as_deref(), &body),
        Err(Failure::Partial { body, error }) => {
            emit::write_output(out.as_deref(), &body)?;
            Err(Failure::Library(error))
        }
        Err(failure) => Err(failure),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage mistakes are input errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            emit::error(&failure);
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
