//! `mabac`: run access scenarios, audit exported ledgers, report costs and
//! evaluate policies.
//!
//! Exit codes: 0 success (Granted, Intact, SATISFIED); 1 usage, I/O, parse
//! or configuration error; 2 scenario Denied; 3 ledger BrokenAt; 4 policy
//! NOT SATISFIED.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mabac_core::crypto::Digest;
use mabac_core::ledger::{audit_jsonl, parse_rational, Block, ChainVerdict, DEFAULT_USD_PER_ETHER};
use mabac_core::policy::{AccessPolicy, AttributeList};
use mabac_core::workflow::{run_scenario, Outcome, ScenarioConfig, TraceReport};

const EXIT_ERROR: u8 = 1;
const EXIT_DENIED: u8 = 2;
const EXIT_BROKEN: u8 = 3;
const EXIT_NOT_SATISFIED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mabac",
    version,
    about = "Multi-authority attribute-based access control on a simulated ledger"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and export trace.json, ledger.jsonl and costs.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        export: PathBuf,
        /// Also print the step-by-step trace.
        #[arg(long)]
        verbose: bool,
    },
    /// Verify an exported ledger's hash chain.
    Audit {
        #[arg(long)]
        ledger: PathBuf,
        /// Trusted hash of the last block (hex).
        #[arg(long, conflicts_with = "trace")]
        tip: Option<String>,
        /// Take the trusted tip from a trace export.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the cost table of a trace export.
    Costs {
        #[arg(long)]
        trace: PathBuf,
        /// Decimal or fraction, e.g. 205, 204.5 or 409/2.
        #[arg(long, default_value_t = DEFAULT_USD_PER_ETHER.to_string())]
        usd_per_ether: String,
    },
    /// Check a comma-separated attribute list against a policy file.
    Policy {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        attributes: String,
    },
}

struct Failure(String);

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))
}

fn cmd_run(config: &Path, export: &Path, verbose: bool) -> CmdResult {
    let config = ScenarioConfig::load(config).map_err(|e| Failure(e.to_string()))?;
    let run = run_scenario(&config).map_err(|e| Failure(e.to_string()))?;
    run.export(export)
        .map_err(|e| Failure(format!("cannot export to {}: {e}", export.display())))?;
    if verbose {
        print!("{}", run.report.render_text());
    }
    println!("{}", run.report.outcome);
    println!("ledger tip: {}", run.report.ledger_tip);
    Ok(match run.report.outcome {
        Outcome::Granted { .. } => 0,
        Outcome::Denied { .. } => EXIT_DENIED,
    })
}

fn cmd_audit(ledger: &Path, tip: Option<&str>, trace: Option<&Path>) -> CmdResult {
    let text = std::fs::read(ledger).map_err(|e| Failure(format!("cannot read {}: {e}", ledger.display())))?;
    // Invalid UTF-8 is tampering like any other edit; keep the lines intact.
    let text = String::from_utf8_lossy(&text);
    if !text.lines().any(|l| serde_json::from_str::<Block>(l).is_ok()) && !text.trim().is_empty() {
        return Err(Failure(format!("{} is not a ledger export", ledger.display())));
    }
    let tip = match (tip, trace) {
        (Some(hex), _) => Some(Digest::from_hex(hex).map_err(|e| Failure(format!("--tip: {e}")))?),
        (None, Some(path)) => Some(
            TraceReport::from_json(&read(path)?)
                .map_err(|e| Failure(format!("{}: {e}", path.display())))?
                .ledger_tip,
        ),
        (None, None) => None,
    };
    let verdict = audit_jsonl(&text, tip).map_err(|e| Failure(format!("{}: {e}", ledger.display())))?;
    println!("{verdict}");
    Ok(match verdict {
        ChainVerdict::Intact => 0,
        ChainVerdict::BrokenAt(_) => EXIT_BROKEN,
    })
}

fn cmd_costs(trace: &Path, usd_per_ether: &str) -> CmdResult {
    let rate = parse_rational(usd_per_ether).map_err(|e| Failure(format!("--usd-per-ether: {e}")))?;
    let report = TraceReport::from_json(&read(trace)?).map_err(|e| Failure(format!("{}: {e}", trace.display())))?;
    print!("{}", report.costs_at(&rate).render());
    Ok(0)
}

fn cmd_policy(policy: &Path, attributes: &str) -> CmdResult {
    let policy = AccessPolicy::parse(&read(policy)?).map_err(|e| Failure(format!("policy: {e}")))?;
    let attributes = AttributeList::parse_csv(attributes).map_err(|e| Failure(format!("attributes: {e}")))?;
    let satisfied = policy.satisfied_by(&attributes).map_err(|e| Failure(e.to_string()))?;
    println!("{}", if satisfied { "SATISFIED" } else { "NOT SATISFIED" });
    Ok(if satisfied { 0 } else { EXIT_NOT_SATISFIED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run {
            config,
            export,
            verbose,
        } => cmd_run(config, export, *verbose),
        Command::Audit { ledger, tip, trace } => cmd_audit(ledger, tip.as_deref(), trace.as_deref()),
        Command::Costs { trace, usd_per_ether } => cmd_costs(trace, usd_per_ether),
        Command::Policy { policy, attributes } => cmd_policy(policy, attributes),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
