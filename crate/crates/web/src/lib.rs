//! Browser bindings: evaluate a policy, run a scenario and re-price its cost
//! table. Every export is a plain function over strings so it also runs
//! (and is tested) natively.

use mabac_core::ledger::parse_rational;
use mabac_core::policy::{AccessPolicy, AttributeList};
use mabac_core::workflow::{run_scenario, ScenarioConfig, TraceReport};
use serde_json::json;
use wasm_bindgen::prelude::*;

const ALICE: &str = include_str!("../../../scenarios/alice.json");
const BOB: &str = include_str!("../../../scenarios/bob.json");

/// A bundled scenario config by name (`alice` or `bob`).
#[wasm_bindgen]
pub fn sample_config(name: &str) -> Option<String> {
    match name {
        "alice" => Some(ALICE.to_string()),
        "bob" => Some(BOB.to_string()),
        _ => None,
    }
}

/// Whether a comma-separated attribute list satisfies a policy (one term
/// per line).
#[wasm_bindgen]
pub fn evaluate_policy(policy: &str, attributes: &str) -> Result<bool, String> {
    let policy = AccessPolicy::parse(policy).map_err(|e| format!("policy: {e}"))?;
    let attributes = AttributeList::parse_csv(attributes).map_err(|e| format!("attributes: {e}"))?;
    policy.satisfied_by(&attributes).map_err(|e| e.to_string())
}

/// Runs a scenario config given as JSON. Shared data must be inline
/// (`text` or `hex`); there is no filesystem. Returns
/// `{granted, outcome, ledger_tip, text, costs, trace}`.
#[wasm_bindgen]
pub fn run_scenario_json(config: &str) -> Result<String, String> {
    let config = ScenarioConfig::from_json(config).map_err(|e| e.to_string())?;
    let run = run_scenario(&config).map_err(|e| e.to_string())?;
    let report = &run.report;
    Ok(json!({
        "granted": report.outcome.is_granted(),
        "outcome": report.outcome.to_string(),
        "ledger_tip": report.ledger_tip.to_hex(),
        "text": report.render_text(),
        "costs": report.costs.render(),
        "trace": report.to_json(),
    })
    .to_string())
}

/// The cost table of a trace export at another exchange rate.
#[wasm_bindgen]
pub fn cost_table(trace: &str, usd_per_ether: &str) -> Result<String, String> {
    let rate = parse_rational(usd_per_ether).map_err(|e| format!("rate: {e}"))?;
    let report = TraceReport::from_json(trace).map_err(|e| format!("trace: {e}"))?;
    Ok(report.costs_at(&rate).render())
}
