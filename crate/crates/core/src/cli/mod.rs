//! Command-line driver. The command and all parameters come from a TOML file; the flags only
//! override the output directory, the seed and the thread count.
//!
//! Exit codes: 0 all checks pass, 1 a scientific check failed, 2 configuration or usage error.

pub mod commands;
pub mod config;
pub mod output;

use crate::error::Error;
use clap::Parser;
use config::RunConfig;
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "sgqei", version, about = "Sine-Gordon energy density and QEI bounds along worldlines")]
pub struct Args {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory (overrides [output] dir; default ./out).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed (overrides [mc] seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 = all cores. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::NearNull { .. } => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn load(args: &Args) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(s) = args.seed {
        cfg.set_seed(s);
    }
    Ok(cfg)
}

fn execute(args: &Args) -> Result<bool, Error> {
    let cfg = load(args)?;
    let sha = cfg.sha256()?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = commands::dispatch(&cfg, args.threads)?;
    std::fs::create_dir_all(&dir)?;
    let name = cfg.command.name();
    for (file, t) in &out.tables {
        let path = dir.join(format!("{file}.csv"));
        t.write(&path, name, &sha)?;
        println!("wrote {}", path.display());
    }
    if let Some(r) = &out.report {
        let path = dir.join(format!("{name}_report.txt"));
        std::fs::write(&path, r)?;
        print!("{r}");
    }
    println!("{}: {}", name, if out.ok { "pass" } else { "fail" });
    Ok(out.ok)
}

/// Parse `argv`, run the configured command and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&args) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
