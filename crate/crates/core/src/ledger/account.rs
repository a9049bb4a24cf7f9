use serde::{Deserialize, Serialize};

use super::Address;
use crate::contracts::ContractKind;
use crate::crypto::PublicKey;

/// Externally-owned accounts carry a verification key; contract accounts
/// carry the identifier of their code. Never both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AccountKind {
    ExternallyOwned { public_key: PublicKey },
    Contract { code: ContractKind },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub address: Address,
    pub kind: AccountKind,
    pub balance_wei: u128,
    /// Number of transactions accepted from this account.
    pub nonce: u64,
}

impl Account {
    pub fn public_key(&self) -> Option<&PublicKey> {
        match &self.kind {
            AccountKind::ExternallyOwned { public_key } => Some(public_key),
            AccountKind::Contract { .. } => None,
        }
    }

    pub fn code(&self) -> Option<ContractKind> {
        match self.kind {
            AccountKind::Contract { code } => Some(code),
            AccountKind::ExternallyOwned { .. } => None,
        }
    }
}
