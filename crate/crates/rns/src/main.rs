use clap::{Parser, Subcommand};
use rns::config::{ExperimentConfig, ExperimentKind};
use rns::pipeline;
use std::path::PathBuf;
use std::process::ExitCode;

/// Fourier-mode decay laboratory for Rao-Nakra sandwich beams.
#[derive(Parser)]
#[command(name = "rns", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file (key = value sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the [output] section).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; the RNS_THREADS environment variable wins.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override the quadrature grid size.
    #[arg(long, global = true)]
    xi_nodes: Option<usize>,

    /// Override the dyadic ladder exponent (t up to 2^k).
    #[arg(long, global = true)]
    tmax_exp: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate parameters and classify the wave speeds.
    Validate,
    /// Eigenvalue scan of the mode generator.
    Spectrum,
    /// Equal-speed non-decay certificate.
    Instability,
    /// Pointwise decay-rate curve and branch slopes.
    Pointwise,
    /// Coefficient ledger and composite-functional decay.
    Lyapunov,
    /// L2 norm decay slopes.
    #[command(name = "decay-l2")]
    DecayL2,
    /// L1 norms: Carlson bound and dominant-exponent envelope.
    #[command(name = "decay-l1")]
    DecayL1,
    /// L^q norms and interpolation inequalities.
    #[command(name = "decay-lq")]
    DecayLq,
    /// Everything above in one report.
    #[command(name = "full-report")]
    FullReport,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Validate => ExperimentKind::Validate,
            Command::Spectrum => ExperimentKind::Spectrum,
            Command::Instability => ExperimentKind::Instability,
            Command::Pointwise => ExperimentKind::Pointwise,
            Command::Lyapunov => ExperimentKind::Lyapunov,
            Command::DecayL2 => ExperimentKind::DecayL2,
            Command::DecayL1 => ExperimentKind::DecayL1,
            Command::DecayLq => ExperimentKind::DecayLq,
            Command::FullReport => ExperimentKind::FullReport,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> rns::Result<bool> {
    let threads = std::env::var("RNS_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .or(cli.threads);
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| rns::Error::Config(format!("thread pool: {e}")))?;
    }

    let config_path = cli
        .config
        .clone()
        .ok_or_else(|| rns::Error::Config("--config <path> is required".into()))?;
    let mut config = ExperimentConfig::load(&config_path)?;
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(n) = cli.xi_nodes {
        config.grids.xi_nodes = n;
    }
    if let Some(k) = cli.tmax_exp {
        config.grids.t_max_exp = k;
    }

    let outcome = pipeline::run(&config, cli.command.kind())?;
    print!("{}", outcome.report.render());
    for path in &outcome.artifacts {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome.passed)
}
