use serde::{Deserialize, Serialize};

use super::Address;
use crate::crypto::{recover_public_key, sha256_parts, CryptoError, Digest, KeyPair, PublicKey, Signature};
use crate::encoding;

/// The signed fields of a transaction. The sender is not a field: it is
/// recovered from the signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnsignedTransaction {
    pub nonce: u64,
    pub receiver: Address,
    pub gas_price_wei: u128,
    pub gas_limit: u64,
    pub amount_wei: u128,
    #[serde(with = "encoding::hex_bytes_opt")]
    pub data: Option<Vec<u8>>,
}

impl UnsignedTransaction {
    /// Canonical byte encoding covered by the signature.
    pub fn signing_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(96 + self.data.as_ref().map_or(0, Vec::len));
        out.extend_from_slice(b"mabac-tx-v1");
        out.extend_from_slice(&self.nonce.to_be_bytes());
        out.extend_from_slice(self.receiver.as_bytes());
        out.extend_from_slice(&self.gas_price_wei.to_be_bytes());
        out.extend_from_slice(&self.gas_limit.to_be_bytes());
        out.extend_from_slice(&self.amount_wei.to_be_bytes());
        match &self.data {
            None => out.push(0),
            Some(d) => {
                out.push(1);
                out.extend_from_slice(&(d.len() as u32).to_be_bytes());
                out.extend_from_slice(d);
            }
        }
        out
    }

    pub fn sign(self, key: &KeyPair) -> Transaction {
        let signature = key.sign(&self.signing_bytes());
        Transaction { body: self, signature }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TransactionWire", into = "TransactionWire")]
pub struct Transaction {
    pub body: UnsignedTransaction,
    pub signature: Signature,
}

/// Flat exported form: the body fields followed by `signature`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransactionWire {
    nonce: u64,
    receiver: Address,
    gas_price_wei: u128,
    gas_limit: u64,
    amount_wei: u128,
    #[serde(with = "encoding::hex_bytes_opt")]
    data: Option<Vec<u8>>,
    signature: Signature,
}

impl From<TransactionWire> for Transaction {
    fn from(w: TransactionWire) -> Self {
        Transaction {
            body: UnsignedTransaction {
                nonce: w.nonce,
                receiver: w.receiver,
                gas_price_wei: w.gas_price_wei,
                gas_limit: w.gas_limit,
                amount_wei: w.amount_wei,
                data: w.data,
            },
            signature: w.signature,
        }
    }
}

impl From<Transaction> for TransactionWire {
    fn from(t: Transaction) -> Self {
        TransactionWire {
            nonce: t.body.nonce,
            receiver: t.body.receiver,
            gas_price_wei: t.body.gas_price_wei,
            gas_limit: t.body.gas_limit,
            amount_wei: t.body.amount_wei,
            data: t.body.data,
            signature: t.signature,
        }
    }
}

impl Transaction {
    /// Identity digest over the signed fields and the signature.
    pub fn hash(&self) -> Digest {
        sha256_parts(&[&self.body.signing_bytes(), &self.signature.0])
    }

    pub fn recover_sender(&self) -> Result<(Address, PublicKey), CryptoError> {
        let pk = recover_public_key(&self.body.signing_bytes(), &self.signature)?;
        Ok((Address::from_public_key(&pk), pk))
    }
}
