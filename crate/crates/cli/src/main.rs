//! `berw`: classify, simulate and test balanced excited random walks.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Params;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "berw", version, about = "Balanced excited random walk toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; defaults to $BERW_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Default)]
struct SpecArgs {
    /// Dimension.
    #[arg(short = 'd', long = "d")]
    d: Option<usize>,
    /// Coordinates driven on first visits.
    #[arg(long)]
    d1: Option<usize>,
    /// Coordinates driven on revisits.
    #[arg(long)]
    d2: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the transience certificate for M_d(d1,d2) as JSON.
    Classify {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Run walks and dump trajectories and per-walk summaries.
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n', long)]
        n: Option<u64>,
        #[arg(long)]
        walks: Option<u64>,
        /// Number of walks whose full trajectory is written.
        #[arg(long)]
        dump: Option<u64>,
    },
    /// Origin-return probability in the windows [2^k, 2^(k+1)].
    ReturnProb {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kmin: Option<u32>,
        #[arg(long)]
        kmax: Option<u32>,
        #[arg(long)]
        walks: Option<u64>,
    },
    /// Range statistics and band violations at checkpoints.
    RangeStats {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n', long)]
        n: Option<u64>,
        #[arg(long)]
        walks: Option<u64>,
        /// Comma-separated checkpoint times; defaults to n.
        #[arg(long)]
        checkpoints: Option<String>,
        #[arg(long)]
        band_constant: Option<f64>,
    },
    /// Martingale diagnostics, gap tails and joint returns for M_4(2,3).
    Martingale {
        #[command(flatten)]
        common: Common,
        /// Steps per trace.
        #[arg(short = 'n', long)]
        n: Option<u64>,
        /// Number of traces.
        #[arg(long)]
        walks: Option<u64>,
        /// Largest k in the gap-tail table.
        #[arg(long)]
        kmax: Option<u32>,
        #[arg(long)]
        tau_kmin: Option<u32>,
        #[arg(long)]
        tau_kmax: Option<u32>,
        /// Walks for the joint-return table; 0 skips it.
        #[arg(long)]
        joint_walks: Option<u64>,
    },
    /// Planar bridges: exactness check and window-set statistics.
    Bridge {
        #[command(flatten)]
        common: Common,
        /// Comma-separated even bridge lengths.
        #[arg(short = 'n', long)]
        n: Option<String>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        rho: Option<f64>,
        /// Number of bridges per length written as step sequences.
        #[arg(long)]
        export: Option<u64>,
    },
    /// Trace-condition report for one spec and the classification table.
    TraceCheck {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dmax: Option<usize>,
    },
}

fn load(common: &Common, spec: &SpecArgs) -> Result<Params, CliError> {
    let mut p = Params::load(common.config.as_deref())?;
    p.flag("d", spec.d);
    p.flag("d1", spec.d1);
    p.flag("d2", spec.d2);
    p.flag("seed", common.seed);
    p.flag("threads", common.threads);
    p.flag("out_dir", common.out_dir.as_ref().map(|d| d.display().to_string()));
    Ok(p)
}

fn dispatch(command: Command) -> Result<String, CliError> {
    let none = SpecArgs::default();
    match command {
        Command::Classify { spec } => {
            let p = load(&Common::default(), &spec)?;
            commands::classify(&p)
        }
        Command::Simulate { spec, common, n, walks, dump } => {
            let mut p = load(&common, &spec)?;
            p.flag("n", n);
            p.flag("walks", walks);
            p.flag("dump", dump);
            commands::simulate(p)
        }
        Command::ReturnProb { spec, common, kmin, kmax, walks } => {
            let mut p = load(&common, &spec)?;
            p.flag("kmin", kmin);
            p.flag("kmax", kmax);
            p.flag("walks", walks);
            commands::return_prob(p)
        }
        Command::RangeStats { spec, common, n, walks, checkpoints, band_constant } => {
            let mut p = load(&common, &spec)?;
            p.flag("n", n);
            p.flag("walks", walks);
            p.flag("checkpoints", checkpoints);
            p.flag("band_constant", band_constant);
            commands::range_stats(p)
        }
        Command::Martingale { common, n, walks, kmax, tau_kmin, tau_kmax, joint_walks } => {
            let mut p = load(&common, &none)?;
            p.flag("n", n);
            p.flag("walks", walks);
            p.flag("kmax", kmax);
            p.flag("tau_kmin", tau_kmin);
            p.flag("tau_kmax", tau_kmax);
            p.flag("joint_walks", joint_walks);
            commands::martingale(p)
        }
        Command::Bridge { common, n, samples, rho, export } => {
            let mut p = load(&common, &none)?;
            p.flag("n", n);
            p.flag("walks", samples);
            p.flag("rho", rho);
            p.flag("export", export);
            commands::bridge(p)
        }
        Command::TraceCheck { spec, common, dmax } => {
            let mut p = load(&common, &spec)?;
            p.flag("dmax", dmax);
            commands::trace_check(p)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            // A closed pipe downstream is not a failure of the run.
            let _ = writeln!(std::io::stdout(), "{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("berw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
