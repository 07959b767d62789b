//! `visval` command-line driver.

mod analysis;
mod manifest;
mod scene;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use visval::Error;

/// Exit codes; stable across releases.
pub mod exit {
    pub const OK: u8 = 0;
    pub const OTHER: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const PLACEMENT: u8 = 3;
    pub const LABEL_MISMATCH: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "visval", version, about = "Validate vision-model invariance assumptions on rendered scenes")]
struct Cli {
    /// Master seed (sample/render default to 0; sweep defaults to the protocol's seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print only machine-readable output (paths, JSON) on stdout.
    #[arg(long, global = true)]
    porcelain: bool,
    /// Report what would be done without rendering or writing anything.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a scene graph from a scene config.
    Sample {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render frames with ground truth, flow and context labels.
    Render(scene::RenderArgs),
    /// Run a characterization protocol.
    Sweep {
        protocol: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Recompute every cell instead of reusing finished ones.
        #[arg(long)]
        no_cache: bool,
    },
    /// Evaluate a model on a recorded, annotated sequence.
    Ingest {
        directory: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        /// OC, BC, GC, PS or DS.
        #[arg(long)]
        model: String,
        /// Protocol supplying the remaining settings; its source is replaced.
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compare the rankings two manifolds induce.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = By::Context)]
        by: By,
        /// Write the report here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a manifold: pooled context ranking, marginals and heatmaps.
    Report {
        manifold: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Axes to integrate out, one marginal each.
        #[arg(long)]
        marginalize: Vec<String>,
        #[arg(long, value_enum, default_value_t = Rule::Sum)]
        integration: Rule,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum By {
    Context,
    Weather,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Sum,
    Trapezoid,
}

/// Global flags shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Globals {
    pub seed: Option<u64>,
    pub porcelain: bool,
    pub dry_run: bool,
}

impl Globals {
    /// Human-readable progress; suppressed under `--porcelain`.
    pub fn say(&self, msg: impl AsRef<str>) {
        if !self.porcelain {
            println!("{}", msg.as_ref());
        }
    }

    /// Lists artifact paths on stdout under `--porcelain`.
    pub fn paths(&self, paths: &[PathBuf]) {
        if self.porcelain {
            for p in paths {
                println!("{}", p.display());
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = Globals {
        seed: cli.seed,
        porcelain: cli.porcelain,
        dry_run: cli.dry_run,
    };
    match cli.command {
        Command::Sample { config, out } => scene::sample(&g, &config, &out),
        Command::Render(args) => scene::render(&g, &args),
        Command::Sweep {
            protocol,
            out_dir,
            no_cache,
        } => sweep::sweep(&g, &protocol, &out_dir, !no_cache),
        Command::Ingest {
            directory,
            annotations,
            model,
            protocol,
            out_dir,
        } => sweep::ingest(&g, &directory, &annotations, &model, protocol.as_deref(), &out_dir),
        Command::Compare { a, b, by, out } => analysis::compare(&g, &a, &b, by, out.as_deref()),
        Command::Report {
            manifold,
            out_dir,
            marginalize,
            integration,
        } => analysis::report(&g, &manifold, &out_dir, &marginalize, integration),
    }
}

/// Maps a failure to its documented exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::PlacementFailure { .. } => exit::PLACEMENT,
                Error::LabelMismatch(_) => exit::LABEL_MISMATCH,
                Error::InvalidPrior(_)
                | Error::OutOfBounds { .. }
                | Error::UnresolvedPath(_)
                | Error::FrameOutOfRange { .. }
                | Error::InvalidScript(_)
                | Error::InvalidConfig(_)
                | Error::PhaseDomain(_)
                | Error::UnknownAxis(_)
                | Error::Annotation(_)
                | Error::MissingFrame(_)
                | Error::Json(_) => exit::CONFIG,
                _ => exit::OTHER,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return exit::CONFIG;
        }
    }
    exit::OTHER
}

/// Error chain on one line, dropping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut out: Vec<String> = Vec::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !out.last().is_some_and(|prev| prev.ends_with(&msg)) {
            out.push(msg);
        }
    }
    out.join(": ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| run(cli))),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
