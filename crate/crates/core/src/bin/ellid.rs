use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use ellid::harness::{self, Execution, ModeChoice, RunOptions, SampleConfig, SuiteReport};
use ellid::identities::{catalog, edges, ParamMap};

/// Verifies identities for elliptic numbers and their q-specializations.
#[derive(Parser)]
#[command(name = "ellid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the identity catalog.
    List {
        /// Also print the degeneration edges.
        #[arg(long)]
        edges: bool,
    },
    /// Check one identity at one n.
    Verify {
        #[arg(long)]
        id: String,
        #[arg(long)]
        n: i64,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Fix a parameter, as `name=re,im` or `name=re`.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, C64)>,
        /// Write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check many identities for every n up to a bound.
    Sweep {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 8)]
        n_max: i64,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Restrict to these identity ids.
        #[arg(long = "only")]
        only: Vec<String>,
        #[arg(long)]
        serial: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SamplingArgs {
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, env = "ELLID_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = harness::DEFAULT_TOL)]
    tol: f64,
    /// Maximum number of theta product factors.
    #[arg(long, default_value_t = 64)]
    theta_terms: usize,
}

impl SamplingArgs {
    fn config(&self) -> SampleConfig {
        SampleConfig { seed: self.seed, trials: self.trials, theta_terms: self.theta_terms, ..SampleConfig::default() }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Numeric,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Suite {
    /// Numeric and exact checks plus every degeneration edge.
    All,
    Exact,
    Numeric,
    Chains,
}

fn parse_param(s: &str) -> Result<(String, C64), String> {
    let (name, value) = s.split_once('=').ok_or("expected name=re,im")?;
    let mut parts = value.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")));
    let re = parts.next().ok_or("missing real part")??;
    let im = parts.next().transpose()?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err("too many components".into());
    }
    Ok((name.trim().to_string(), C64::new(re, im)))
}

fn list(with_edges: bool) -> io::Result<()> {
    let mut out = io::stdout().lock();
    for d in catalog() {
        let params: Vec<&str> = d.params.iter().map(|p| p.name).collect();
        let modes: Vec<&str> = d.modes.iter().map(|m| m.tag()).collect();
        writeln!(out, "{:<26} {:<40} [{}] modes: {}", d.id, d.title, params.join(","), modes.join(","))?;
        writeln!(out, "{:<26} {}", "", d.anchor)?;
    }
    if with_edges {
        writeln!(out)?;
        for e in edges() {
            writeln!(out, "{} -> {} ({})", e.parent, e.child, e.limit)?;
        }
    }
    Ok(())
}

fn print_report(r: &SuiteReport) {
    for e in r.failures().take(20) {
        let why = e.error.as_deref().map(|s| format!(": {s}")).unwrap_or_default();
        println!("FAIL {} [{}] n={} trial={} rel_err={:.3e}{why}", e.id, e.mode.tag(), e.n, e.trial, e.rel_err);
    }
    let width = r.summary.keys().map(String::len).max().unwrap_or(0);
    for (id, s) in &r.summary {
        let status = if s.failures == 0 { "ok" } else { "FAIL" };
        println!(
            "{id:<width$}  {status:<4}  {:>6} checks  {:>4} failed  max rel_err {:.2e}",
            s.trials, s.failures, s.max_rel_err
        );
    }
    let failed = r.failures().count();
    println!("{} checks, {} failed, {:.2}s", r.results.len(), failed, r.timings.total_seconds);
}

fn finish(report: SuiteReport, json: Option<PathBuf>) -> ExitCode {
    print_report(&report);
    if let Some(path) = json {
        if let Err(e) = std::fs::write(&path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode, harness::HarnessError> {
    match cli.command {
        Command::List { edges } => {
            // a closed pipe is not an error here
            let _ = list(edges);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { id, n, sampling, mode, params, json } => {
            let choice = match mode {
                ModeArg::Auto => ModeChoice::Auto,
                ModeArg::Exact => ModeChoice::Exact,
                ModeArg::Numeric => ModeChoice::Numeric,
            };
            let fixed: ParamMap = params.into_iter().collect();
            let report = harness::run_verify(&id, n, choice, &fixed, &sampling.config(), sampling.tol)?;
            Ok(finish(report, json))
        }
        Command::Sweep { suite, n_max, sampling, only, serial, json } => {
            let ids = if only.is_empty() { harness::all_ids() } else { only };
            let opts = RunOptions {
                numeric: matches!(suite, Suite::All | Suite::Numeric),
                exact: matches!(suite, Suite::All | Suite::Exact),
                chains: matches!(suite, Suite::All | Suite::Chains),
                execution: if serial { Execution::Serial } else { Execution::Parallel },
            };
            let report = harness::run_suite_with(&ids, n_max, &sampling.config(), sampling.tol, opts)?;
            Ok(finish(report, json))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
