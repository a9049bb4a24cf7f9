//! Accounts, signed transactions with gas metering, and hash-chained
//! blocks.
//!
//! Transactions apply one at a time in submission order. Accepted
//! transactions (including ones whose contract call fails) wait in a pending
//! list until [`Ledger::seal_block`] moves them into the next block.

mod account;
mod address;
mod block;
mod gas;
mod transaction;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use account::{Account, AccountKind};
pub use address::Address;
pub use block::{audit_jsonl, export_jsonl, parse_jsonl, tx_root, verify_chain, Block, ChainVerdict, LedgerFileError};
pub use gas::{
    compute_cost, format_decimal, format_ether, format_usd, parse_rational, to_f64, Cost, CostReport, CostRow,
    CostTable, GasCharge, GasMeter, OutOfGas, RationalParseError, CREATE, DEFAULT_GAS_PRICE_WEI, DEFAULT_USD_PER_ETHER,
    TRANSFER, TRANSFER_GAS, WEI_PER_ETHER,
};
pub use transaction::{Transaction, UnsignedTransaction};

use crate::contracts::{
    self, Call, CallOutput, ContractError, ContractState, Custodians, Event, ExecEnv, KeyCustodian,
};
use crate::crypto::{sha256, Digest, PublicKey};

/// Reasons a transaction is not accepted at all. Rejected transactions
/// leave no trace: no fee, no nonce change, no receipt.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TxError {
    #[error("signature does not recover a registered externally-owned account")]
    BadSignature,
    #[error("bad nonce: expected {expected}, got {got}")]
    BadNonce { expected: u64, got: u64 },
    #[error("insufficient funds: need {needed} wei, have {available} wei")]
    InsufficientFunds { needed: u128, available: u128 },
    #[error("gas limit must be positive")]
    ZeroGasLimit,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("public key already registered to {0}")]
    DuplicateKey(Address),
    #[error("unknown account {0}")]
    UnknownAccount(Address),
    #[error("{0} is not a data-owner contract owned by {1}")]
    NotDataOwnerContract(Address, Address),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TxStatus {
    Success,
    Failure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub tx_hash: Digest,
    pub sender: Address,
    pub status: TxStatus,
    pub gas_used: u64,
    pub gas_price_wei: u128,
    pub charges: Vec<GasCharge>,
    pub events: Vec<Event>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub new_contract: Option<Address>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output: Option<CallOutput>,
}

impl Receipt {
    pub fn is_success(&self) -> bool {
        self.status == TxStatus::Success
    }

    pub fn fee_wei(&self) -> u128 {
        self.gas_used as u128 * self.gas_price_wei
    }
}

/// Ledger state. Key custodians are off-chain attachments and take no part
/// in the state digest.
pub struct Ledger {
    accounts: BTreeMap<Address, Account>,
    keys: BTreeMap<PublicKey, Address>,
    contracts: BTreeMap<Address, ContractState>,
    chain: Vec<Block>,
    pending: Vec<Transaction>,
    receipts: Vec<Receipt>,
    costs: CostTable,
    minted_wei: u128,
    fees_collected_wei: u128,
    custodians: Custodians,
}

#[derive(Serialize)]
struct StateView<'a> {
    accounts: &'a BTreeMap<Address, Account>,
    contracts: &'a BTreeMap<Address, ContractState>,
    fees_collected_wei: u128,
    minted_wei: u128,
}

impl Ledger {
    /// A ledger whose genesis block carries `genesis_time`.
    pub fn new(costs: CostTable, genesis_time: u64) -> Self {
        Ledger {
            accounts: BTreeMap::new(),
            keys: BTreeMap::new(),
            contracts: BTreeMap::new(),
            chain: vec![Block::new(0, Digest::ZERO, genesis_time, Vec::new())],
            pending: Vec::new(),
            receipts: Vec::new(),
            costs,
            minted_wei: 0,
            fees_collected_wei: 0,
            custodians: Custodians::new(),
        }
    }

    /// Registers an externally-owned account for `public_key`.
    pub fn create_account(&mut self, public_key: PublicKey) -> Result<Address, LedgerError> {
        let address = Address::from_public_key(&public_key);
        if let Some(existing) = self.keys.get(&public_key) {
            return Err(LedgerError::DuplicateKey(*existing));
        }
        self.keys.insert(public_key, address);
        self.accounts.insert(
            address,
            Account {
                address,
                kind: AccountKind::ExternallyOwned { public_key },
                balance_wei: 0,
                nonce: 0,
            },
        );
        Ok(address)
    }

    /// Genesis allocation: credits `wei` out of thin air.
    pub fn fund(&mut self, address: &Address, wei: u128) -> Result<(), LedgerError> {
        let account = self
            .accounts
            .get_mut(address)
            .ok_or(LedgerError::UnknownAccount(*address))?;
        account.balance_wei += wei;
        self.minted_wei += wei;
        Ok(())
    }

    /// Lets the owner of a `DO` contract attach the holder of its data key.
    pub fn attach_custodian(
        &mut self,
        owner: &Address,
        do_contract: Address,
        custodian: Box<dyn KeyCustodian>,
    ) -> Result<(), LedgerError> {
        match self.contracts.get(&do_contract) {
            Some(ContractState::DataOwner(d)) if d.owner == *owner => {
                self.custodians.insert(do_contract, custodian);
                Ok(())
            }
            _ => Err(LedgerError::NotDataOwnerContract(do_contract, *owner)),
        }
    }

    pub fn submit_transaction(&mut self, tx: Transaction) -> Result<Receipt, TxError> {
        let body = &tx.body;
        if body.gas_limit == 0 {
            return Err(TxError::ZeroGasLimit);
        }
        let (sender, _) = tx.recover_sender().map_err(|_| TxError::BadSignature)?;
        let account = match self.accounts.get(&sender) {
            Some(a) if a.public_key().is_some() => a,
            _ => return Err(TxError::BadSignature),
        };
        if body.nonce != account.nonce {
            return Err(TxError::BadNonce {
                expected: account.nonce,
                got: body.nonce,
            });
        }
        let needed = (body.gas_limit as u128)
            .checked_mul(body.gas_price_wei)
            .and_then(|fee| fee.checked_add(body.amount_wei))
            .unwrap_or(u128::MAX);
        if account.balance_wei < needed {
            return Err(TxError::InsufficientFunds {
                needed,
                available: account.balance_wei,
            });
        }

        let tx_hash = tx.hash();
        let nonce = account.nonce;
        // Value moves and account creation only happen on success, so
        // contract storage is the only state a failed call must roll back.
        let snapshot_contracts = self.contracts.clone();

        let mut env = ExecEnv {
            contracts: &mut self.contracts,
            accounts: &self.accounts,
            custodians: &mut self.custodians,
            meter: GasMeter::new(&self.costs, body.gas_limit),
            events: Vec::new(),
        };
        let result = match &body.data {
            None => env
                .meter
                .charge(None, TRANSFER)
                .map_err(ContractError::from)
                .and_then(|()| {
                    if self.accounts.contains_key(&body.receiver) {
                        Ok(None)
                    } else {
                        Err(ContractError::UnknownReceiver(body.receiver))
                    }
                }),
            Some(data) => Call::decode(data)
                .and_then(|call| contracts::execute(&mut env, sender, nonce, body.receiver, call).map(Some)),
        };
        let gas_used = env.meter.used();
        let charges = env.meter.into_charges();
        let events = env.events;

        let (status, events, output, new_contract) = match result {
            Ok(execution) => {
                let (created, output) = execution.map_or((None, None), |e| (e.created, e.output));
                let mut new_contract = None;
                if let Some((address, state)) = created {
                    self.accounts.insert(
                        address,
                        Account {
                            address,
                            kind: AccountKind::Contract { code: state.kind() },
                            balance_wei: 0,
                            nonce: 0,
                        },
                    );
                    self.contracts.insert(address, state);
                    new_contract = Some(address);
                }
                let target = new_contract.unwrap_or(body.receiver);
                self.accounts.get_mut(&sender).unwrap().balance_wei -= body.amount_wei;
                match self.accounts.get_mut(&target) {
                    Some(a) => a.balance_wei += body.amount_wei,
                    None => unreachable!("calls only succeed against existing accounts"),
                }
                (TxStatus::Success, events, output, new_contract)
            }
            Err(err) => {
                self.contracts = snapshot_contracts;
                (TxStatus::Failure(err.to_string()), Vec::new(), None, None)
            }
        };

        let fee = gas_used as u128 * body.gas_price_wei;
        let sender_account = self.accounts.get_mut(&sender).unwrap();
        sender_account.balance_wei -= fee;
        sender_account.nonce += 1;
        self.fees_collected_wei += fee;

        let receipt = Receipt {
            tx_hash,
            sender,
            status,
            gas_used,
            gas_price_wei: body.gas_price_wei,
            charges,
            events,
            new_contract,
            output,
        };
        self.pending.push(tx);
        self.receipts.push(receipt.clone());
        Ok(receipt)
    }

    /// Moves all pending transactions into a new block on top of the tip.
    pub fn seal_block(&mut self, timestamp: u64) -> &Block {
        let tip = self.chain.last().expect("genesis always present");
        let block = Block::new(tip.height + 1, tip.hash(), timestamp, std::mem::take(&mut self.pending));
        self.chain.push(block);
        self.chain.last().unwrap()
    }

    pub fn chain(&self) -> &[Block] {
        &self.chain
    }

    pub fn tip_hash(&self) -> Digest {
        self.chain.last().expect("genesis always present").hash()
    }

    pub fn pending(&self) -> &[Transaction] {
        &self.pending
    }

    pub fn receipts(&self) -> &[Receipt] {
        &self.receipts
    }

    pub fn account(&self, address: &Address) -> Option<&Account> {
        self.accounts.get(address)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn contract(&self, address: &Address) -> Option<&ContractState> {
        self.contracts.get(address)
    }

    pub fn contracts(&self) -> &BTreeMap<Address, ContractState> {
        &self.contracts
    }

    pub fn costs(&self) -> &CostTable {
        &self.costs
    }

    pub fn fees_collected_wei(&self) -> u128 {
        self.fees_collected_wei
    }

    pub fn minted_wei(&self) -> u128 {
        self.minted_wei
    }

    pub fn total_balance_wei(&self) -> u128 {
        self.accounts.values().map(|a| a.balance_wei).sum()
    }

    /// Tokens `holder` has from `authority` for `attribute` at `position`,
    /// summed over that authority's matching token contracts.
    pub fn token_balance(&self, authority: &Address, position: u32, attribute: &str, holder: &Address) -> u64 {
        contracts::held_tokens(&self.contracts, authority, position, attribute, holder)
    }

    /// Digest of accounts, contract storage and fee counters.
    pub fn state_digest(&self) -> Digest {
        let view = StateView {
            accounts: &self.accounts,
            contracts: &self.contracts,
            fees_collected_wei: self.fees_collected_wei,
            minted_wei: self.minted_wei,
        };
        sha256(&serde_json::to_vec(&view).expect("state always serializes"))
    }

    /// Digest of contract storage alone.
    pub fn contracts_digest(&self) -> Digest {
        sha256(&serde_json::to_vec(&self.contracts).expect("state always serializes"))
    }
}
