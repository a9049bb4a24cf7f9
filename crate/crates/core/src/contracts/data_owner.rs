use std::collections::BTreeMap;

use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use super::ContractError;
use crate::crypto::{wrap_key, DataKey, Digest, KeyEnvelope, PublicKey};
use crate::ledger::Address;

/// A token the data user must hold: at least `minimum` units of the token
/// that `authority` issues for `attribute` at policy `position`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Requirement {
    pub position: u32,
    pub authority: Address,
    pub attribute: String,
    pub minimum: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentEnvelope {
    pub recipient: Address,
    pub envelope: KeyEnvelope,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoContractState {
    pub owner: Address,
    /// Digest of the sealed shared data in the off-chain blob store.
    pub data_digest: Digest,
    pub required: Vec<Requirement>,
    /// `allowed[to][from]`: tokens counted at the last verification.
    pub allowed: BTreeMap<Address, BTreeMap<Address, u64>>,
    pub envelopes_sent: Vec<SentEnvelope>,
}

impl DoContractState {
    pub fn new(owner: Address, data_digest: Digest, mut required: Vec<Requirement>) -> Result<Self, ContractError> {
        if required
            .iter()
            .any(|r| r.minimum == 0 || r.position == 0 || r.attribute.trim().is_empty())
        {
            return Err(ContractError::InvalidDeployment(
                "requirements need a position, a non-empty attribute and a positive minimum".into(),
            ));
        }
        required.sort();
        required.dedup();
        Ok(DoContractState {
            owner,
            data_digest,
            required,
            allowed: BTreeMap::new(),
            envelopes_sent: Vec::new(),
        })
    }

    /// `balances[i]` is the user's balance in the token matching
    /// `required[i]`. Records the counted tokens in `allowed[to][from]` and
    /// returns whether every requirement is met.
    pub fn verify_at(&mut self, from: Address, to: Address, balances: &[u64]) -> bool {
        assert_eq!(balances.len(), self.required.len(), "one balance per requirement");
        let tokens = balances.iter().sum();
        self.allowed.entry(to).or_default().insert(from, tokens);
        self.required
            .iter()
            .zip(balances)
            .all(|(req, &held)| held >= req.minimum)
    }

    /// Appends the envelope for `to`. `verified` must reflect a successful
    /// [`verify_at`](Self::verify_at) for `to` earlier in the same call chain.
    pub fn send_key(&mut self, to: Address, envelope: KeyEnvelope, verified: bool) -> Result<(), ContractError> {
        if !verified {
            return Err(ContractError::NotVerified(to));
        }
        self.envelopes_sent.push(SentEnvelope {
            recipient: to,
            envelope,
        });
        Ok(())
    }
}

/// Off-chain holder of a data owner's key. The contract asks it for an
/// envelope addressed to a verified user; the raw key never enters ledger
/// state.
pub trait KeyCustodian: Send {
    fn wrap_for(&mut self, recipient: &PublicKey) -> KeyEnvelope;
}

pub struct DataKeyCustodian {
    key: DataKey,
    rng: ChaCha20Rng,
}

impl DataKeyCustodian {
    pub fn new(key: DataKey, seed: u64) -> Self {
        DataKeyCustodian {
            key,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }
}

impl KeyCustodian for DataKeyCustodian {
    fn wrap_for(&mut self, recipient: &PublicKey) -> KeyEnvelope {
        wrap_key(recipient, &self.key, &mut self.rng)
    }
}
