//! `twistlab`: batch runs over twist families with CSV artifacts and a
//! manifest that reproduces each run.
//!
//! Exit codes: 0 success, 1 configuration, 2 capacity, 3 I/O, 4 selftest failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twistlab::Error;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "twistlab", version, about = "Central values of quadratic twists and family statistics")]
struct Cli {
    /// key=value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for sampled diagnostics only.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Family slice members as CSV.
    Sieve(RunArgs),
    /// Central values over a slice or an explicit `ds` list.
    Lvalues(RunArgs),
    /// Mixed moments, decorrelation diagnostics or exponent sweeps.
    Moments(RunArgs),
    /// Prime-sum proxies, large-value counts and the tail comparison.
    Proxy(RunArgs),
    /// Fourier coefficient sums or analytic Sha statistics.
    Apps(RunArgs),
    /// Fast end-to-end consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long = "D")]
    big_d: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<i32>,
    /// Residue class, or `auto`.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long)]
    n0: Option<u64>,
    /// Comma-separated form labels or eigenvalue/curve files.
    #[arg(long)]
    forms: Option<String>,
    #[arg(long)]
    ells: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    /// Any other key, repeatable: `--set x=1e4`.
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), Error> {
        let named = [
            ("D", self.big_d.map(|v| v.to_string())),
            ("sigma", self.sigma.map(|v| v.to_string())),
            ("a", self.a.clone()),
            ("n0", self.n0.map(|v| v.to_string())),
            ("forms", self.forms.clone()),
            ("ells", self.ells.clone()),
            ("mode", self.mode.clone()),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                cfg.set(k, v);
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim());
        }
        Ok(())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity(_) => 2,
        Error::Io(_) => 3,
        Error::Config(_) | Error::Domain(_) | Error::DataGap { .. } | Error::Parse { .. } => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let (name, artifacts, ok) = match &cli.command {
        Command::Selftest => {
            let (a, ok) = commands::selftest(&cfg, cli.seed)?;
            ("selftest", a, ok)
        }
        Command::Sieve(args) | Command::Lvalues(args) | Command::Moments(args) | Command::Proxy(args) | Command::Apps(args) => {
            args.apply(&mut cfg)?;
            let (name, f): (&str, fn(&RunConfig) -> twistlab::Result<output::Artifacts>) = match &cli.command {
                Command::Sieve(_) => ("sieve", commands::sieve),
                Command::Lvalues(_) => ("lvalues", commands::lvalues),
                Command::Moments(_) => ("moments", commands::moments),
                Command::Proxy(_) => ("proxy", commands::proxy),
                Command::Apps(_) => ("apps", commands::apps),
                Command::Selftest => unreachable!(),
            };
            (name, f(&cfg)?, true)
        }
    };
    let written: Vec<String> = artifacts.names().map(str::to_string).collect();
    artifacts.commit(&cli.out, name, &cfg, cli.seed)?;
    for f in written {
        println!("{}", cli.out.join(f).display());
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("twistlab: selftest failed, see selftest.txt");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("twistlab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
