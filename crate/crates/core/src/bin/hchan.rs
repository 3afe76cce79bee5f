//! `hchan`: run one configured sweep and write its report.
//!
//! Exit codes: 0 when every check passes, 1 for usage or config errors,
//! 2 when the run completes but a check fails.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use holomorphic_channels::experiment::{
    emit_report, format_for_path, run_experiment, ExperimentConfig, ExperimentKind, OutputFormat,
};

#[derive(Parser)]
#[command(name = "hchan", version, about = "Weighted Bergman space channel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Channel constants and the isometry defect of P_k
    Constants(RunArgs),
    /// (1/nu) Tr psi(T(A)) against its large-weight limit
    ChannelLimit(RunArgs),
    /// (1/(nu-1)) Tr T_f^n against the integral of f^n
    ToeplitzTrace(RunArgs),
    /// Berezin eigen-relation residuals on e_{lambda,b}
    BerezinEigen(RunArgs),
    /// Husimi functions integrate to the trace
    HusimiCheck(RunArgs),
    /// E_{mu,k} against its finite-weight approximations
    EIdentity(RunArgs),
    /// Monte Carlo chained kernel integrals
    KernelChain(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults apply to missing keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Worker threads for the rayon pool
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `seed` from the config
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse::<OutputFormat>().map_err(|e| e.to_string())
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Constants(a) => (ExperimentKind::Constants, a),
            Command::ChannelLimit(a) => (ExperimentKind::ChannelLimit, a),
            Command::ToeplitzTrace(a) => (ExperimentKind::ToeplitzTrace, a),
            Command::BerezinEigen(a) => (ExperimentKind::BerezinEigen, a),
            Command::HusimiCheck(a) => (ExperimentKind::HusimiCheck, a),
            Command::EIdentity(a) => (ExperimentKind::EIdentity, a),
            Command::KernelChain(a) => (ExperimentKind::KernelChain, a),
        }
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> holomorphic_channels::Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path, Some(kind))?,
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(holomorphic_channels::Error::Config {
                key: "threads".into(),
                msg: "must be positive".into(),
            });
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = args.out.clone().or_else(|| cfg.output.clone());
    let format = args
        .format
        .or(cfg.format)
        .unwrap_or_else(|| format_for_path(out.as_deref()));
    let report = run_experiment(&cfg)?;
    emit_report(&report, format, out.as_deref())?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} = {} (threshold {})", c.name, c.value, c.threshold);
    }
    Ok(report.passed)
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
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
