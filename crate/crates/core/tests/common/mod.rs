#![allow(dead_code)]

use mabac_core::contracts::{Call, CallOutput, ContractState, Deployment, Requirement, TokenContractState};
use mabac_core::crypto::Digest;
use mabac_core::ledger::{Address, CostTable, Ledger, Receipt, DEFAULT_GAS_PRICE_WEI, WEI_PER_ETHER};
use mabac_core::workflow::Wallet;

pub const GAS_LIMIT: u64 = 3_000_000;

/// A ledger plus helpers for signing and submitting calls.
pub struct Harness {
    pub ledger: Ledger,
}

impl Harness {
    pub fn new() -> Self {
        Harness {
            ledger: Ledger::new(CostTable::default(), 0),
        }
    }

    pub fn party(&mut self, seed: u64) -> Wallet {
        let wallet = Wallet::from_seed(seed);
        self.ledger.create_account(wallet.keys.public_key).unwrap();
        self.ledger.fund(&wallet.address, 100 * WEI_PER_ETHER).unwrap();
        wallet
    }

    pub fn call(&mut self, from: &Wallet, to: Address, call: Call) -> Receipt {
        let tx = from.call(&self.ledger, to, &call, DEFAULT_GAS_PRICE_WEI, GAS_LIMIT);
        self.ledger.submit_transaction(tx).expect("well-formed transaction")
    }

    pub fn deploy(&mut self, from: &Wallet, deployment: Deployment) -> Address {
        let receipt = self.call(from, Address::ZERO, Call::Create(deployment));
        assert!(receipt.is_success(), "{:?}", receipt.status);
        receipt.new_contract.unwrap()
    }

    pub fn token(&self, at: &Address) -> &TokenContractState {
        self.ledger.contract(at).and_then(ContractState::as_token).unwrap()
    }

    pub fn deploy_token(
        &mut self,
        aa: &Wallet,
        position: u32,
        symbol: &str,
        supply: u64,
        approved: &[Address],
    ) -> Address {
        self.deploy(
            aa,
            Deployment::AttributeToken {
                position,
                symbol: symbol.into(),
                name: format!("{symbol} token"),
                supply,
                approved: approved.to_vec(),
            },
        )
    }

    pub fn deploy_do(&mut self, owner: &Wallet, required: Vec<Requirement>) -> Address {
        self.deploy(
            owner,
            Deployment::DataOwner {
                data_digest: Digest::ZERO,
                required,
            },
        )
    }
}

pub fn requirement(position: u32, authority: &Wallet, attribute: &str) -> Requirement {
    Requirement {
        position,
        authority: authority.address,
        attribute: attribute.into(),
        minimum: 1,
    }
}

pub fn is_failure_output(r: &Receipt) -> bool {
    r.is_success() && r.output == Some(CallOutput::Failure)
}
