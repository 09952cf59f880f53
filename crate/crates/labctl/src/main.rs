//! `labctl`: generate hard streams, run the invariant suites, benchmark the
//! sketch MST algorithms and simulate protocols.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad parameters, 3 I/O.

mod bench;
mod generate;
mod protocol;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mstlab::atpc::AtpcParams;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "labctl", version, about = "Hard MST stream lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a hard stream and its ground-truth sidecar.
    Generate(Common),
    /// Run an invariant suite.
    Verify {
        suite: verify::Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Measure peak space of the sketch MST algorithms.
    Bench(Common),
    /// Simulate a protocol.
    Protocol {
        name: protocol::Name,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub w: Option<u32>,
    /// Passes; `bench` takes a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<u32>,
    /// Maximum edge weight handed to the sketch algorithms.
    #[arg(long = "W")]
    pub big_w: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug)]
pub enum Failure {
    Params(String),
    Check(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Params(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Params(m) => write!(f, "invalid parameters: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

pub type Res<T> = Result<T, Failure>;

pub fn param<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Params(e.to_string())
}

/// Largest vertex count the generator and bench accept.
pub const MAX_N: u64 = 4096;

impl Common {
    pub fn params(&self, d: u32, w: u32) -> Res<AtpcParams> {
        AtpcParams::with_k(self.d.unwrap_or(d), self.w.unwrap_or(w), self.k.unwrap_or(1)).map_err(param)
    }

    pub fn delta(&self, default: f64) -> Res<f64> {
        let d = self.delta.unwrap_or(default);
        if d > 0.0 && d < 1.0 {
            Ok(d)
        } else {
            Err(Failure::Params(format!("--delta must lie in (0, 1), got {d}")))
        }
    }

    pub fn trials(&self, default: u64) -> Res<u64> {
        match self.trials.unwrap_or(default) {
            0 => Err(Failure::Params("--trials must be at least 1".into())),
            t => Ok(t),
        }
    }

    /// Rejects parameters whose stream would exceed [`MAX_N`] vertices.
    pub fn stream_params(&self, d: u32, w: u32) -> Res<AtpcParams> {
        let p = self.params(d, w)?;
        let n = (p.k as u64).checked_mul(p.leaves()).and_then(|x| x.checked_add(p.k as u64 + 1));
        match n {
            Some(n) if n <= MAX_N => Ok(p),
            _ => Err(Failure::Params(format!("stream would need k·w^d + k + 1 ≤ {MAX_N} vertices (k={}, w={}, d={})", p.k, p.w, p.d))),
        }
    }
}

pub fn write_out(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

pub fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn thread_pool() -> Res<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LABCTL_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Params(format!("LABCTL_THREADS must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::Params(e.to_string()))
}

fn run(cli: Cli) -> Res<()> {
    let pool = thread_pool()?;
    pool.install(|| match cli.command {
        Command::Generate(c) => generate::run(&c),
        Command::Verify { suite, common } => verify::run(suite, &common),
        Command::Bench(c) => bench::run(&c),
        Command::Protocol { name, common } => protocol::run(name, &common),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("labctl: {e}");
            ExitCode::from(e.code())
        }
    }
}
