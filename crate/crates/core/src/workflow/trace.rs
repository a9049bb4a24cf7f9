use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::Role;
use crate::contracts::Event;
use crate::crypto::{Digest, PublicKey, Suite};
use crate::ledger::{Address, CostReport, Receipt, TxStatus};
use crate::policy::AttributeList;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum Outcome {
    Granted { plaintext_digest: Digest },
    Denied { step: u8, reason: String },
}

impl Outcome {
    pub fn is_granted(&self) -> bool {
        matches!(self, Outcome::Granted { .. })
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Granted { plaintext_digest } => write!(f, "Granted (plaintext sha-256 {plaintext_digest})"),
            Outcome::Denied { step, reason } => write!(f, "Denied at step {step}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorRecord {
    pub role: Role,
    pub id: String,
    pub address: Address,
    pub public_key: PublicKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractRecord {
    pub label: String,
    pub address: Address,
    pub owner: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxRecord {
    pub description: String,
    /// Actor id of the signer.
    pub sender: String,
    pub receipt: Receipt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u8,
    pub title: String,
    /// Height of the block sealed for this step, if it submitted anything.
    pub block: Option<u64>,
    pub transactions: Vec<TxRecord>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    pub suite: Suite,
    pub actors: Vec<ActorRecord>,
    pub policy: String,
    pub attributes: AttributeList,
    pub contracts: Vec<ContractRecord>,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
    pub costs: CostReport,
    pub ledger_height: u64,
    /// Hash of the last block; pass it to the auditor as the trusted tip.
    pub ledger_tip: Digest,
    pub state_digest: Digest,
}

impl TraceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn receipts(&self) -> impl Iterator<Item = &Receipt> {
        self.steps.iter().flat_map(|s| &s.transactions).map(|t| &t.receipt)
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.receipts().flat_map(|r| &r.events)
    }

    /// The cost table recomputed at another exchange rate.
    pub fn costs_at(&self, usd_per_ether: &BigRational) -> CostReport {
        CostReport::build(
            self.receipts().map(|r| (r.charges.as_slice(), r.gas_price_wei)),
            usd_per_ether,
        )
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let name = |a: &Address| {
            self.actors
                .iter()
                .find(|r| r.address == *a)
                .map(|r| r.id.clone())
                .or_else(|| self.contracts.iter().find(|c| c.address == *a).map(|c| c.label.clone()))
                .unwrap_or_else(|| a.to_hex())
        };
        let _ = writeln!(out, "Outcome: {}", self.outcome);
        let _ = writeln!(out, "Policy: {}", self.policy.trim_end().replace('\n', " | "));
        let _ = writeln!(out, "Attributes: {}", self.attributes.values().join(" | "));
        for step in &self.steps {
            let block = step.block.map_or(String::new(), |h| format!(" [block {h}]"));
            let _ = writeln!(out, "\nStep {}: {}{block}", step.step, step.title);
            for tx in &step.transactions {
                let r = &tx.receipt;
                let status = match &r.status {
                    TxStatus::Success => "ok".to_string(),
                    TxStatus::Failure(reason) => format!("failed: {reason}"),
                };
                let _ = writeln!(
                    out,
                    "  {} by {}: {status}, gas {} (tx {})",
                    tx.description,
                    tx.sender,
                    r.gas_used,
                    &r.tx_hash.to_hex()[..16]
                );
                for e in &r.events {
                    let line = match e {
                        Event::Sendtoken { from, to, tokens, .. } => {
                            format!("Sendtoken {tokens} from {} to {}", name(from), name(to))
                        }
                        Event::Sendkey {
                            from,
                            to,
                            encrypted_key,
                            ..
                        } => format!(
                            "Sendkey from {} to {} ({} bytes)",
                            name(from),
                            name(to),
                            encrypted_key.len()
                        ),
                        Event::VerifyAt {
                            to, tokens, approve, ..
                        } => format!(
                            "VerifyAT {} holds {tokens} required tokens: {}",
                            name(to),
                            String::from_utf8_lossy(approve)
                        ),
                    };
                    let _ = writeln!(out, "    event {} {line}", name(&e.emitter()));
                }
            }
            for n in &step.notes {
                let _ = writeln!(out, "  - {n}");
            }
        }
        let _ = writeln!(out, "\n{}", self.costs.render());
        let _ = writeln!(out, "Ledger tip: {} (height {})", self.ledger_tip, self.ledger_height);
        out
    }
}
