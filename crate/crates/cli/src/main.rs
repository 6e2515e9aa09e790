//! Command line front end: classical chaos runs, spectral quantization with
//! cached eigenpairs, level statistics, OTOCs, and circuit complexity, each
//! emitting CSV/JSON artifacts plus a reproducibility manifest.

mod commands;
mod config;
mod manifest;
mod plot;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::Context2;
use config::{Profile, RunConfig, ScalingChoice};

use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "chaology",
    version,
    about = "Chaos diagnostics for the double rod pendulum"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON configuration file; flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON/SVG artifacts and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Render SVG plots next to the data files.
    #[arg(long, global = true)]
    plot: bool,
    /// Worker threads (1 = fully sequential, reproducible byte for byte).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Grid profile.
    #[arg(long, global = true, value_enum, default_value = "desk")]
    profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Classical dynamics: trajectories, divergence, Lyapunov sweeps.
    Classical {
        #[command(subcommand)]
        sub: ClassicalCmd,
    },
    /// Build and solve the discrete Hamiltonian.
    Quantize {
        #[command(subcommand)]
        sub: QuantizeCmd,
    },
    /// Level-spacing statistics against GOE and Poisson templates.
    Stats {
        #[command(subcommand)]
        sub: StatsCmd,
    },
    /// Out-of-time-order correlators.
    Otoc {
        #[command(subcommand)]
        sub: OtocCmd,
    },
    /// Covariance-matrix circuit complexity.
    Cc {
        #[command(subcommand)]
        sub: CcCmd,
    },
}

#[derive(Subcommand)]
enum ClassicalCmd {
    /// Integrate one trajectory and write t,theta1,theta2,p1,p2,energy.
    Simulate {
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta1: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta2: f64,
        #[arg(long, default_value_t = 0.0)]
        p1: f64,
        #[arg(long, default_value_t = 0.0)]
        p2: f64,
    },
    /// Divergence of the reference pair plus the Lyapunov fit.
    Lyapunov {
        /// Fit the published difference-of-norms distance variant.
        #[arg(long)]
        paper_literal: bool,
        /// Fit the whole window instead of stopping at order one.
        #[arg(long)]
        full_window: bool,
    },
    /// Lyapunov exponent and scrambling time per field strength.
    SweepG {
        /// Comma-separated field strengths, e.g. 1,10,100.
        #[arg(long, default_value = "1,10,100")]
        g: String,
    },
}

#[derive(Subcommand)]
enum QuantizeCmd {
    /// Solve both grids, cache eigenpairs, emit n,E_n,error_ratio.
    Spectrum,
    /// Two-resolution error ratios and the reliable level count.
    Errors,
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Nearest-neighbor spacing distribution.
    Nnsd {
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, value_enum)]
        scaling: Option<ScalingChoice>,
        /// Also report parity-sector-resolved statistics.
        #[arg(long)]
        split_parity: bool,
    },
    /// Next-to-nearest spacing distribution.
    Nnnsd {
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, value_enum)]
        scaling: Option<ScalingChoice>,
        #[arg(long)]
        split_parity: bool,
    },
}

#[derive(Subcommand)]
enum OtocCmd {
    /// Long-time F and C series, one CSV per inverse temperature.
    Compute,
    /// Short-time exponential fits and the growth-bound report.
    Fit {
        /// Fit C(t) instead of Re F(t).
        #[arg(long)]
        target_c: bool,
    },
}

#[derive(Subcommand)]
enum CcCmd {
    /// Complexity series and long-time linear fit per field strength.
    Compute {
        /// Comma-separated field strengths; defaults to the config list.
        #[arg(long)]
        g: Option<String>,
        /// Also run the integrable single-pendulum sanity mode.
        #[arg(long)]
        single_pendulum: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    let config = RunConfig::load(cli.global.config.as_deref(), cli.global.profile)?;
    std::fs::create_dir_all(&cli.global.out)?;
    chaology_core::configure_threads(cli.global.threads);
    let ctx = Context2 {
        cache_dir: commands::resolve_cache_dir(&cli.global.out),
        out_dir: cli.global.out,
        plot: cli.global.plot,
        threads: cli.global.threads,
        config,
    };

    match cli.command {
        Command::Classical { sub } => match sub {
            ClassicalCmd::Simulate {
                theta1,
                theta2,
                p1,
                p2,
            } => commands::classical_simulate(&ctx, theta1, theta2, p1, p2),
            ClassicalCmd::Lyapunov {
                paper_literal,
                full_window,
            } => commands::classical_lyapunov(&ctx, paper_literal, full_window),
            ClassicalCmd::SweepG { g } => {
                commands::classical_sweep(&ctx, commands::parse_g_list(&g)?)
            }
        },
        Command::Quantize { sub } => match sub {
            QuantizeCmd::Spectrum => commands::quantize_spectrum(&ctx),
            QuantizeCmd::Errors => commands::quantize_errors(&ctx),
        },
        Command::Stats { sub } => match sub {
            StatsCmd::Nnsd {
                r,
                scaling,
                split_parity,
            } => commands::stats(&ctx, r, scaling, split_parity),
            StatsCmd::Nnnsd {
                r,
                scaling,
                split_parity,
            } => commands::stats(&ctx, r, scaling, split_parity),
        },
        Command::Otoc { sub } => match sub {
            OtocCmd::Compute => commands::otoc_compute(&ctx),
            OtocCmd::Fit { target_c } => commands::otoc_fit(&ctx, target_c),
        },
        Command::Cc { sub } => match sub {
            CcCmd::Compute { g, single_pendulum } => {
                let g_list = g.map(|s| commands::parse_g_list(&s)).transpose()?;
                commands::cc_compute(&ctx, g_list, single_pendulum)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": format!("{err:#}"),
                "kind": "runtime",
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
