//! `scatternet`: batch front end for composing scattering networks, sweeping
//! them over a control parameter and locating spectral singularities,
//! exceptional points and anisotropic transmission resonances.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 I/O error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scatternet::analysis::{EpMode, SingularityKind, DEFAULT_ATR_TOL};
use scatternet::cells::BraggParams;

use commands::{AbRingArgs, BraggArgs, CliResult, FinderOverrides};

#[derive(Parser, Debug)]
#[command(name = "scatternet", version, about = "Transfer-matrix scattering networks: compose, sweep, analyse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Threads {
    /// Worker threads for grid evaluation (0 = one per core)
    #[arg(long, env = "SCATTERNET_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Debug)]
struct ConfigOut {
    /// Run configuration (JSON)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory [default: output.directory from the config, else "."]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EntryArg {
    Lasing,
    Cpa,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Single,
    Serial,
    Parallel,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compose the configured network at one parameter value and print M and the amplitudes
    Compose {
        /// Run configuration (JSON)
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Value of the swept parameter (required when the network binds it) [default: 0]
        #[arg(long, allow_negative_numbers = true)]
        omega: Option<f64>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Sweep the network over the configured grid, write CSV and run the configured analyses
    Sweep {
        #[command(flatten)]
        io: ConfigOut,
        /// Grid points [default: sweep.steps from the config]
        #[arg(long)]
        steps: Option<usize>,
        /// Tolerance override for every configured analysis
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Locate real parameter values where M22 (lasing) or M11 (coherent absorption) vanishes
    Singularities {
        #[command(flatten)]
        io: ConfigOut,
        /// Which entry to zero [default: from the config, else both]
        #[arg(long, value_enum)]
        kind: Option<EntryArg>,
        /// Bracketing scan points [default: 2001 or the config value]
        #[arg(long)]
        steps: Option<usize>,
        /// Residual tolerance [default: 1e-9 or the config value]
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Locate exceptional points of the configured cell, alone or composed N times
    ExceptionalPoints {
        #[command(flatten)]
        io: ConfigOut,
        /// Composition mode [default: from the config, else single]
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Number of cells for the serial and parallel modes
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Bracketing scan points [default: 2001 or the config value]
        #[arg(long)]
        steps: Option<usize>,
        /// Residual tolerance [default: 1e-9 or the config value]
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Sweep the network and report anisotropic transmission resonances
    Atr {
        #[command(flatten)]
        io: ConfigOut,
        /// Grid points [default: sweep.steps from the config]
        #[arg(long)]
        steps: Option<usize>,
        /// Tolerance on |T - 1| and the reflectionless side [default: 1e-6 or the config value]
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Two-arm ring threaded by a magnetic flux, in natural units
    AbRing {
        /// Lead wavenumber
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Ring circumference L = L1 + L2
        #[arg(long = "L", default_value_t = 2.0 * std::f64::consts::PI)]
        length: f64,
        /// Flux phase psi = -e Phi / (hbar c)
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        flux_phase: f64,
        /// Length of the first arm [default: L/2]
        #[arg(long = "L1")]
        arm1: Option<f64>,
        /// Flux-phase points over [-pi, pi] written to ab_ring.csv (0 = single point only)
        #[arg(long, default_value_t = 0)]
        steps: usize,
        /// Output directory for the sweep
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
    /// Near-Bragg grating with index n0 + n1 cos(2 beta z) + i n2 sin(2 beta z)
    Bragg {
        /// Background index
        #[arg(long, default_value_t = 1.5)]
        n0: f64,
        /// Real modulation depth
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        n1: f64,
        /// Imaginary modulation depth
        #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
        n2: f64,
        /// Grating number
        #[arg(long, default_value_t = 10.0)]
        beta: f64,
        /// Grating length
        #[arg(long, default_value_t = 5.0)]
        length: f64,
        /// Wavenumber
        #[arg(long, default_value_t = 10.0)]
        k: f64,
        /// Identical gratings in parallel
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Wavenumber points over [k - span, k + span] written to bragg.csv (0 = single point only)
        #[arg(long, default_value_t = 0)]
        steps: usize,
        /// Half-width of the wavenumber sweep
        #[arg(long, default_value_t = 0.5)]
        span: f64,
        /// Resonance tolerance
        #[arg(long, default_value_t = DEFAULT_ATR_TOL)]
        tol: f64,
        /// Output directory for the sweep
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
    /// Run the randomized self-check suites and print a pass/fail table
    Selftest {
        /// Seed for the random draws
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        threads: Threads,
    },
}

fn ep_mode(mode: ModeArg, n: usize) -> EpMode {
    match mode {
        ModeArg::Single => EpMode::Single,
        ModeArg::Serial => EpMode::Serial(n),
        ModeArg::Parallel => EpMode::Parallel(n),
    }
}

fn entry(kind: EntryArg) -> Option<SingularityKind> {
    match kind {
        EntryArg::Lasing => Some(SingularityKind::Lasing),
        EntryArg::Cpa => Some(SingularityKind::Cpa),
        EntryArg::Both => None,
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Compose { config, omega, threads } => commands::compose_cmd(&config, omega, threads.threads),
        Command::Sweep { io, steps, tol, threads } => {
            commands::sweep_cmd(&io.config, &io.out, steps, tol, threads.threads)
        }
        Command::Singularities { io, kind, steps, tol, threads } => commands::singularities_cmd(
            &io.config,
            &io.out,
            kind.and_then(entry),
            FinderOverrides { tol, scan_points: steps },
            threads.threads,
        ),
        Command::ExceptionalPoints { io, mode, n, steps, tol, threads } => commands::exceptional_points_cmd(
            &io.config,
            &io.out,
            mode.map(|m| ep_mode(m, n)),
            FinderOverrides { tol, scan_points: steps },
            threads.threads,
        ),
        Command::Atr { io, steps, tol, threads } => commands::atr_cmd(&io.config, &io.out, steps, tol, threads.threads),
        Command::AbRing { k, length, flux_phase, arm1, steps, out, threads } => commands::ab_ring_cmd(
            AbRingArgs { k, length, flux_phase, arm1, steps },
            &Some(out),
            threads.threads,
        ),
        Command::Bragg { n0, n1, n2, beta, length, k, parallel, steps, span, tol, out, threads } => {
            commands::bragg_cmd(
                BraggArgs { params: BraggParams { n0, n1, n2, grating: beta, length }, k, parallel, steps, span, tol },
                &Some(out),
                threads.threads,
            )
        }
        Command::Selftest { seed, threads } => commands::selftest_cmd(seed, threads.threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().trim_end());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
