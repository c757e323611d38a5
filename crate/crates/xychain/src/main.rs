use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xychain::experiments::ArealawOutcome;
use xychain::{run_and_write, AppError, AppResult, ExperimentConfig, ExperimentKind, RunOutcome};

/// Disordered XY chain: area-law, eigenfunction-correlator and oracle
/// verification experiments.
#[derive(Parser)]
#[command(name = "xychain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal eigenstate entanglement entropy versus subchain length.
    Arealaw(RunArgs),
    /// Disorder-averaged eigenfunction correlator and decay fits.
    Correlator(RunArgs),
    /// Cross-check the free-fermion pipeline against exact diagonalization.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `master_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of disorder realizations (overrides `realizations`).
    #[arg(long)]
    realizations: Option<usize>,
}

fn prepare(kind: ExperimentKind, args: &RunArgs) -> AppResult<(ExperimentConfig, PathBuf)> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if config.kind != kind {
        return Err(AppError::Config(format!(
            "config {} has kind \"{}\" but the \"{}\" subcommand was used",
            args.config.display(),
            config.kind.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(r) = args.realizations {
        config.realizations = r;
    }
    let out = config.resolve_output(args.out.as_deref());
    config.output_dir = out.clone();
    config.validate()?;
    Ok((config, out))
}

fn print_arealaw(a: &ArealawOutcome) {
    println!("n\tell\tmax_entropy\t\tbound\t\tgs_entropy");
    for e in a.summary.values().flat_map(|m| m.values()) {
        println!(
            "{}\t{}\t{:.4} ± {:.4}\t{:.2} ± {:.2}\t{:.4} ± {:.4}",
            e.n,
            e.ell,
            e.max_entropy.mean,
            e.max_entropy.stderr,
            e.bound.mean,
            e.bound.stderr,
            e.gs_entropy.mean,
            e.gs_entropy.stderr
        );
    }
    for (key, fit) in &a.control_fit {
        println!(
            "control {key}: S(ell) ≈ {:.4} ln(ell) + {:.4} over ell in [{}, {}]",
            fit.coefficient, fit.intercept, fit.ell_min, fit.ell_max
        );
    }
    if a.resampled_realizations > 0 {
        println!("resampled realizations: {}", a.resampled_realizations);
    }
}

fn run(cli: Cli) -> AppResult<bool> {
    let (kind, args) = match &cli.command {
        Command::Arealaw(a) => (ExperimentKind::Arealaw, a),
        Command::Correlator(a) => (ExperimentKind::Correlator, a),
        Command::Verify(a) => (ExperimentKind::Verify, a),
    };
    let (config, out) = prepare(kind, args)?;
    let report = run_and_write(&config, &out)?;
    let ok = match &report.outcome {
        RunOutcome::Arealaw(a) => {
            print_arealaw(a);
            true
        }
        RunOutcome::Correlator(runs) => {
            for run in runs {
                println!("n = {} ({} realizations)", run.n, run.realizations);
                for f in &run.fits {
                    println!(
                        "  {:<12} rate {:.4} ± {:.4} (lower 95% {:.4}), residual {:.4}",
                        f.model, f.rate, f.rate_stderr, f.rate_lower_95, f.residual
                    );
                }
                if let Some(e) = &run.fit_error {
                    println!("  no fit: {e}");
                }
            }
            true
        }
        RunOutcome::Verify(v) => {
            for c in &v.checks {
                println!(
                    "{:<24} {:<4} max residual {:.3e} (tolerance {:.1e}, {} instances, {} skipped)",
                    c.name,
                    if c.passed { "ok" } else { "FAIL" },
                    c.max_residual,
                    c.tolerance,
                    c.instances,
                    c.skipped
                );
            }
            v.passed()
        }
    };
    println!("results written to {}", report.out_dir.display());
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
