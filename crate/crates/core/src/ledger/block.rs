use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Transaction;
use crate::crypto::{sha256_parts, Digest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub height: u64,
    pub prev_hash: Digest,
    pub tx_root: Digest,
    pub timestamp: u64,
    pub transactions: Vec<Transaction>,
}

impl Block {
    pub fn new(height: u64, prev_hash: Digest, timestamp: u64, transactions: Vec<Transaction>) -> Self {
        Block {
            height,
            prev_hash,
            tx_root: tx_root(&transactions),
            timestamp,
            transactions,
        }
    }

    /// Header digest: height, previous hash, transaction root, timestamp.
    pub fn hash(&self) -> Digest {
        sha256_parts(&[
            b"mabac-block-v1",
            &self.height.to_be_bytes(),
            &self.prev_hash.0,
            &self.tx_root.0,
            &self.timestamp.to_be_bytes(),
        ])
    }
}

/// Digest over the ordered transaction hashes.
pub fn tx_root(transactions: &[Transaction]) -> Digest {
    let hashes: Vec<Digest> = transactions.iter().map(Transaction::hash).collect();
    let mut parts: Vec<&[u8]> = vec![b"mabac-txroot-v1"];
    parts.extend(hashes.iter().map(|h| h.0.as_slice()));
    sha256_parts(&parts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainVerdict {
    Intact,
    BrokenAt(u64),
}

impl std::fmt::Display for ChainVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChainVerdict::Intact => f.write_str("Intact"),
            ChainVerdict::BrokenAt(h) => write!(f, "BrokenAt({h})"),
        }
    }
}

/// Checks heights, hash links and transaction roots, reporting the lowest
/// failing position. `trusted_tip`, when known, also pins the hash of the
/// last block, which nothing else in the chain commits to.
pub fn verify_chain(chain: &[Block], trusted_tip: Option<Digest>) -> ChainVerdict {
    let mut prev = Digest::ZERO;
    for (i, block) in chain.iter().enumerate() {
        let position = i as u64;
        if block.height != position || block.prev_hash != prev || block.tx_root != tx_root(&block.transactions) {
            return ChainVerdict::BrokenAt(position);
        }
        prev = block.hash();
    }
    match (chain.last(), trusted_tip) {
        (Some(last), Some(tip)) if tip != prev => ChainVerdict::BrokenAt(last.height),
        _ => ChainVerdict::Intact,
    }
}

/// One compact JSON object per block, newline-terminated.
pub fn export_jsonl(chain: &[Block]) -> String {
    let mut out = String::new();
    for block in chain {
        out.push_str(&serde_json::to_string(block).expect("blocks always serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerFileError {
    #[error("ledger file contains no blocks")]
    Empty,
}

/// Audits an exported JSON-lines ledger. A line that does not decode, or is
/// not byte-identical to the canonical encoding of what it decodes to, is
/// reported as broken at its position.
pub fn audit_jsonl(text: &str, trusted_tip: Option<Digest>) -> Result<ChainVerdict, LedgerFileError> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    if lines.iter().all(|l| l.trim().is_empty()) {
        return Err(LedgerFileError::Empty);
    }
    let mut blocks = Vec::with_capacity(lines.len());
    let mut bad_line = None;
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str::<Block>(line) {
            Ok(b) if serde_json::to_string(&b).is_ok_and(|c| c == *line) => blocks.push(b),
            _ => {
                bad_line = Some(i as u64);
                break;
            }
        }
    }
    let anchor = if bad_line.is_none() { trusted_tip } else { None };
    Ok(match (verify_chain(&blocks, anchor), bad_line) {
        (ChainVerdict::BrokenAt(h), _) => ChainVerdict::BrokenAt(h),
        (ChainVerdict::Intact, Some(i)) => ChainVerdict::BrokenAt(i),
        (ChainVerdict::Intact, None) => ChainVerdict::Intact,
    })
}

/// Strict parse of an exported ledger; fails on the first undecodable line.
pub fn parse_jsonl(text: &str) -> Result<Vec<Block>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
