//! Command line front end: run the convergence sweep, run the property
//! checks on their own, or dump one field slice as CSV.

use anyhow::{bail, Context};
use causticwave::beam::{make_incidence, Envelope};
use causticwave::experiment::{property_checks, run_experiment, write_outputs, write_slice_csv};
use causticwave::field::{physical_slice, synthesize_field, Route, SpectralProfile};
use causticwave::WaveConfig;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "causticwave", version, about = "Gaussian beam vs exact Helmholtz field at a fold caustic")]
struct Cli {
    /// Size of the worker thread pool (default: one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, overriding the config file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full wavenumber sweep and write report, tables and plots
    Run {
        /// JSON configuration file
        #[arg(long)]
        config: PathBuf,
    },
    /// Run only the supporting property checks and print one line each
    Check {
        /// Optional JSON configuration file (defaults apply otherwise)
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compute one horizontal field slice and write it as CSV (y, re, im)
    Field {
        /// wavenumber
        #[arg(long)]
        k: f64,
        /// abscissa of the slice (0 <= x <= the caustic)
        #[arg(long)]
        x: f64,
        /// which construction to evaluate
        #[arg(long, value_enum, default_value_t = RouteArg::Exact)]
        route: RouteArg,
        /// Optional JSON configuration file (defaults apply otherwise)
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Exact,
    GbSpectral,
    GbPhysical,
}

fn load_config(path: Option<&PathBuf>, out: Option<&PathBuf>) -> anyhow::Result<WaveConfig> {
    let mut cfg = match path {
        Some(p) => WaveConfig::from_path(p).with_context(|| format!("loading {}", p.display()))?,
        None => WaveConfig::default(),
    };
    if let Some(dir) = out {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(clean) => {
            if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Ok(true) = success, Ok(false) = completed but a hard check failed.
fn run() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("building the thread pool")?;
    }

    match cli.cmd {
        Cmd::Run { config } => {
            let cfg = load_config(Some(&config), cli.out.as_ref())?;
            let (report, measurements) = run_experiment(&cfg)?;
            // write everything before judging, so a failing run still
            // leaves its evidence on disk
            write_outputs(&cfg, &report, &measurements)?;
            for r in &report.records {
                println!(
                    "k = {:>8}: |u_gb - u|_inf = {:.6e}  relative = {:.6e}  ({:.2} s)",
                    r.k, r.linf_error, r.relative_error, r.runtime_seconds
                );
            }
            println!(
                "fitted rate {:.4} (residual spread {:.3} decades), relative rate {:.4}",
                report.fitted_rate, report.fit_residual_spread, report.fitted_relative_rate
            );
            for c in &report.checks {
                println!(
                    "{} {:<26} {:.3e}  {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.constant,
                    c.detail
                );
            }
            println!("outputs in {}", cfg.out_dir.display());
            let failures = report.hard_failures();
            for f in &failures {
                eprintln!("hard failure: {f}");
            }
            Ok(failures.is_empty())
        }
        Cmd::Check { config } => {
            let cfg = load_config(config.as_ref(), cli.out.as_ref())?;
            let checks = property_checks(&cfg)?;
            let mut clean = true;
            for c in &checks {
                println!(
                    "{} {:<26} {:.3e}  {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.constant,
                    c.detail
                );
                clean &= c.passed;
            }
            Ok(clean)
        }
        Cmd::Field { k, x, route, config } => {
            let cfg = load_config(config.as_ref(), cli.out.as_ref())?;
            let inc = make_incidence(cfg.theta)?;
            let env = Envelope::new(cfg.sigma);
            let y = cfg.y_grid();
            let span = 2.0 * y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            let slice = match route {
                RouteArg::Exact | RouteArg::GbSpectral => {
                    let r = if matches!(route, RouteArg::Exact) {
                        Route::Exact
                    } else {
                        Route::GbSpectral
                    };
                    let profile = SpectralProfile::build_for_span(
                        &inc,
                        &env,
                        x,
                        k,
                        r,
                        cfg.quad_tol,
                        span,
                    )?;
                    synthesize_field(&profile, &y)?
                }
                RouteArg::GbPhysical => physical_slice(&inc, &env, x, &y, k, cfg.quad_tol)?,
            };
            std::fs::create_dir_all(&cfg.out_dir)?;
            let path = cfg.out_dir.join(format!("field_k{k}_x{x}.csv"));
            write_slice_csv(&slice, &path)?;
            println!("{}", path.display());
            Ok(true)
        }
    }
}
