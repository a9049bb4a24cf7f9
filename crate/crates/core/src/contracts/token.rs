use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AttributeId, ContractError};
use crate::ledger::Address;
use crate::policy::normalize;

pub const APPROVED: &str = "yes";
pub const REJECTED: &str = "no";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub attribute_id: AttributeId,
    pub attribute: String,
    pub approve: String,
}

/// Attribute token issued by one authority for one attribute value at one
/// policy position. The symbol names the value; one token is one validated
/// attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenContractState {
    pub owner: Address,
    /// One-based policy position whose value this token certifies.
    pub position: u32,
    pub symbol: String,
    pub name: String,
    pub decimals: u8,
    pub total_supply: u64,
    pub balances: BTreeMap<Address, u64>,
    pub frozen: BTreeSet<Address>,
    pub attribute_records: BTreeMap<AttributeId, ValidationRecord>,
    /// Subjects the authority will approve for this attribute.
    pub registry: BTreeSet<Address>,
}

impl TokenContractState {
    /// The owning authority starts with the entire supply.
    pub fn construct(
        owner: Address,
        position: u32,
        symbol: &str,
        name: &str,
        supply: u64,
    ) -> Result<Self, ContractError> {
        if supply == 0 {
            return Err(ContractError::InvalidDeployment("token supply must be positive".into()));
        }
        if position == 0 {
            return Err(ContractError::InvalidDeployment("positions start at 1".into()));
        }
        if normalize(symbol).is_empty() {
            return Err(ContractError::InvalidDeployment(
                "token symbol must be non-empty".into(),
            ));
        }
        Ok(TokenContractState {
            owner,
            position,
            symbol: symbol.to_string(),
            name: name.to_string(),
            decimals: 0,
            total_supply: supply,
            balances: BTreeMap::from([(owner, supply)]),
            frozen: BTreeSet::new(),
            attribute_records: BTreeMap::new(),
            registry: BTreeSet::new(),
        })
    }

    pub fn balance_of(&self, who: &Address) -> u64 {
        self.balances.get(who).copied().unwrap_or(0)
    }

    pub fn certifies_value(&self, attribute: &str) -> bool {
        normalize(&self.symbol) == normalize(attribute)
    }

    pub fn certifies(&self, position: u32, attribute: &str) -> bool {
        self.position == position && self.certifies_value(attribute)
    }

    /// The authority's verdict for `subject` claiming `attribute`.
    pub fn registry_verdict(&self, subject: &Address, attribute: &str) -> &'static str {
        if self.certifies_value(attribute) && self.registry.contains(subject) {
            APPROVED
        } else {
            REJECTED
        }
    }

    /// Stores (or overwrites) the validation record; only the owning
    /// authority may record validations. Returns whether it approves.
    pub fn check_attribute(
        &mut self,
        caller: &Address,
        attribute_id: AttributeId,
        attribute: &str,
        approve: &str,
    ) -> Result<bool, ContractError> {
        if *caller != self.owner {
            return Err(ContractError::NotAuthority);
        }
        self.attribute_records.insert(
            attribute_id,
            ValidationRecord {
                attribute_id,
                attribute: attribute.to_string(),
                approve: approve.to_string(),
            },
        );
        Ok(approve == APPROVED)
    }

    pub fn send_token(&mut self, from: &Address, to: &Address, tokens: u64) -> Result<(), ContractError> {
        if self.frozen.contains(to) {
            return Err(ContractError::FrozenRecipient(*to));
        }
        let available = self.balance_of(from);
        if available < tokens {
            return Err(ContractError::InsufficientTokens {
                needed: tokens,
                available,
            });
        }
        if from == to || tokens == 0 {
            return Ok(());
        }
        self.balances.insert(*from, available - tokens);
        *self.balances.entry(*to).or_default() += tokens;
        self.balances.retain(|_, b| *b > 0);
        Ok(())
    }

    pub fn set_frozen(&mut self, caller: &Address, target: Address, frozen: bool) -> Result<(), ContractError> {
        if *caller != self.owner {
            return Err(ContractError::NotAuthority);
        }
        if frozen {
            self.frozen.insert(target);
        } else {
            self.frozen.remove(&target);
        }
        Ok(())
    }

    pub fn set_approval(&mut self, caller: &Address, subject: Address, approved: bool) -> Result<(), ContractError> {
        if *caller != self.owner {
            return Err(ContractError::NotAuthority);
        }
        if approved {
            self.registry.insert(subject);
        } else {
            self.registry.remove(&subject);
        }
        Ok(())
    }

    pub fn circulating(&self) -> u64 {
        self.balances.values().sum()
    }
}
