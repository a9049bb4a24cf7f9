//! The four contracts of the protocol and their call encoding.
//!
//! * `RequestAT` (deployed by a data user, one per authority): `checkA`
//!   asks an attribute token contract to validate a claim and, on
//!   approval, to send one token to the user.
//! * `RequestKey` (deployed by a data user for one data owner): `checkAT`
//!   asks the owner's contract to verify the user's tokens and, on success,
//!   to send the wrapped data key.
//! * `AT` (deployed by an authority, one per attribute value and policy
//!   position it certifies):
//!   `checkAttribute`, `sendToken`, plus freezing and registry maintenance.
//! * `DO` (deployed by the data owner): `verifyAT` and `sendKey`.

mod data_owner;
mod exec;
mod token;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use data_owner::{DataKeyCustodian, DoContractState, KeyCustodian, Requirement, SentEnvelope};
pub(crate) use exec::held_tokens;
pub use exec::{execute, Custodians, ExecEnv, Execution};
pub use token::{TokenContractState, ValidationRecord, APPROVED, REJECTED};

use crate::crypto::{sha256_parts, Digest, KeyEnvelope};
use crate::encoding;
use crate::ledger::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContractKind {
    #[serde(rename = "RequestAT")]
    RequestAt,
    #[serde(rename = "RequestKey")]
    RequestKey,
    #[serde(rename = "AT")]
    AttributeToken,
    #[serde(rename = "DO")]
    DataOwner,
}

impl ContractKind {
    pub fn name(self) -> &'static str {
        match self {
            ContractKind::RequestAt => "RequestAT",
            ContractKind::RequestKey => "RequestKey",
            ContractKind::AttributeToken => "AT",
            ContractKind::DataOwner => "DO",
        }
    }
}

/// Unsigned 256-bit attribute identifier, big-endian.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeId(pub [u8; 32]);

impl AttributeId {
    pub fn from_u64(v: u64) -> Self {
        let mut b = [0u8; 32];
        b[24..].copy_from_slice(&v.to_be_bytes());
        AttributeId(b)
    }

    /// Identifier for `subject` claiming `attribute`.
    pub fn derive(subject: &Address, attribute: &str) -> Self {
        let d: Digest = sha256_parts(&[b"attribute-id", subject.as_bytes(), attribute.as_bytes()]);
        AttributeId(d.0)
    }
}

impl std::fmt::Debug for AttributeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AttributeId({})", encoding::to_hex(&self.0))
    }
}

impl Serialize for AttributeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encoding::to_hex(&self.0))
    }
}

impl<'de> Deserialize<'de> for AttributeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        encoding::from_hex_array(&s)
            .map(AttributeId)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestAtState {
    pub owner: Address,
    /// The authority this contract was created with.
    pub authority: Address,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestKeyState {
    pub owner: Address,
    /// The data owner this contract was created with.
    pub data_owner: Address,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "contract")]
pub enum ContractState {
    #[serde(rename = "RequestAT")]
    RequestAt(RequestAtState),
    #[serde(rename = "RequestKey")]
    RequestKey(RequestKeyState),
    #[serde(rename = "AT")]
    Token(TokenContractState),
    #[serde(rename = "DO")]
    DataOwner(DoContractState),
}

impl ContractState {
    pub fn kind(&self) -> ContractKind {
        match self {
            ContractState::RequestAt(_) => ContractKind::RequestAt,
            ContractState::RequestKey(_) => ContractKind::RequestKey,
            ContractState::Token(_) => ContractKind::AttributeToken,
            ContractState::DataOwner(_) => ContractKind::DataOwner,
        }
    }

    pub fn owner(&self) -> Address {
        match self {
            ContractState::RequestAt(s) => s.owner,
            ContractState::RequestKey(s) => s.owner,
            ContractState::Token(s) => s.owner,
            ContractState::DataOwner(s) => s.owner,
        }
    }

    pub fn as_token(&self) -> Option<&TokenContractState> {
        match self {
            ContractState::Token(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_data_owner(&self) -> Option<&DoContractState> {
        match self {
            ContractState::DataOwner(d) => Some(d),
            _ => None,
        }
    }
}

/// Reasons a contract call reverts.
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractError {
    #[error("caller is not the token's authority")]
    NotAuthority,
    #[error("caller is not the contract owner")]
    NotOwner,
    #[error("recipient {0} is frozen")]
    FrozenRecipient(Address),
    #[error("insufficient tokens: need {needed}, have {available}")]
    InsufficientTokens { needed: u64, available: u64 },
    #[error("no successful verification for {0} in this call")]
    NotVerified(Address),
    #[error("no contract at {0}")]
    UnknownContract(Address),
    #[error("contract at {0} belongs to a different counterparty")]
    WrongCounterparty(Address),
    #[error("{contract} has no function {function}")]
    UnsupportedFunction { contract: String, function: String },
    #[error("no key custodian attached to {0}")]
    NoCustodian(Address),
    #[error("{0} has no registered public key")]
    NoPublicKey(Address),
    #[error("invalid deployment: {0}")]
    InvalidDeployment(String),
    #[error("malformed call data: {0}")]
    MalformedCall(String),
    #[error("unknown receiver {0}")]
    UnknownReceiver(Address),
    #[error("out of gas")]
    OutOfGas,
}

impl From<crate::ledger::OutOfGas> for ContractError {
    fn from(_: crate::ledger::OutOfGas) -> Self {
        ContractError::OutOfGas
    }
}

/// Log entries emitted by contracts, in emission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum Event {
    Sendtoken {
        emitter: Address,
        from: Address,
        to: Address,
        tokens: u64,
    },
    Sendkey {
        emitter: Address,
        from: Address,
        to: Address,
        #[serde(with = "encoding::hex_bytes")]
        encrypted_key: Vec<u8>,
    },
    #[serde(rename = "VerifyAT")]
    VerifyAt {
        emitter: Address,
        to: Address,
        tokens: u64,
        #[serde(with = "encoding::hex_bytes")]
        approve: Vec<u8>,
    },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::Sendtoken { .. } => "Sendtoken",
            Event::Sendkey { .. } => "Sendkey",
            Event::VerifyAt { .. } => "VerifyAT",
        }
    }

    pub fn emitter(&self) -> Address {
        match self {
            Event::Sendtoken { emitter, .. } | Event::Sendkey { emitter, .. } | Event::VerifyAt { emitter, .. } => {
                *emitter
            }
        }
    }
}

/// Value returned by the outermost call of a transaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CallOutput {
    Bool(bool),
    TokensGranted(u64),
    Envelope(KeyEnvelope),
    /// The listings' `FAILURE` return: the guard was false, nothing moved.
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "contract")]
pub enum Deployment {
    #[serde(rename = "RequestAT")]
    RequestAt { authority: Address },
    #[serde(rename = "RequestKey")]
    RequestKey { data_owner: Address },
    #[serde(rename = "AT")]
    AttributeToken {
        /// One-based policy position the token certifies.
        position: u32,
        symbol: String,
        name: String,
        supply: u64,
        /// Subjects pre-approved for this attribute.
        approved: Vec<Address>,
    },
    #[serde(rename = "DO")]
    DataOwner {
        data_digest: Digest,
        required: Vec<Requirement>,
    },
}

impl Deployment {
    pub fn kind(&self) -> ContractKind {
        match self {
            Deployment::RequestAt { .. } => ContractKind::RequestAt,
            Deployment::RequestKey { .. } => ContractKind::RequestKey,
            Deployment::AttributeToken { .. } => ContractKind::AttributeToken,
            Deployment::DataOwner { .. } => ContractKind::DataOwner,
        }
    }
}

/// Transaction payload: the function name plus its arguments, encoded as
/// JSON with sorted keys, `{"args":{..},"function":".."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "function", content = "args")]
pub enum Call {
    #[serde(rename = "create")]
    Create(Deployment),
    #[serde(rename = "checkA")]
    CheckA {
        token_contract: Address,
        attribute_id: AttributeId,
        attribute: String,
    },
    #[serde(rename = "checkAT")]
    CheckAt { do_contract: Address },
    #[serde(rename = "checkAttribute")]
    CheckAttribute {
        attribute_id: AttributeId,
        attribute: String,
        approve: String,
    },
    #[serde(rename = "sendToken")]
    SendToken { to: Address, tokens: u64 },
    #[serde(rename = "freezeAccount")]
    FreezeAccount { target: Address, frozen: bool },
    #[serde(rename = "setApproval")]
    SetApproval { subject: Address, approved: bool },
    #[serde(rename = "verifyAT")]
    VerifyAt { to: Address },
    #[serde(rename = "sendKey")]
    SendKey { to: Address, envelope: KeyEnvelope },
}

impl Call {
    pub fn function(&self) -> &'static str {
        match self {
            Call::Create(_) => crate::ledger::CREATE,
            Call::CheckA { .. } => "checkA",
            Call::CheckAt { .. } => "checkAT",
            Call::CheckAttribute { .. } => "checkAttribute",
            Call::SendToken { .. } => "sendToken",
            Call::FreezeAccount { .. } => "freezeAccount",
            Call::SetApproval { .. } => "setApproval",
            Call::VerifyAt { .. } => "verifyAT",
            Call::SendKey { .. } => "sendKey",
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        // Round-tripping through `Value` sorts object keys.
        let value = serde_json::to_value(self).expect("calls always serialize");
        serde_json::to_vec(&value).expect("values always serialize")
    }

    pub fn decode(bytes: &[u8]) -> Result<Call, ContractError> {
        serde_json::from_slice(bytes).map_err(|e| ContractError::MalformedCall(e.to_string()))
    }
}
