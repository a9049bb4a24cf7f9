use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::crypto::{sha256, sha256_parts, PublicKey};
use crate::encoding::{self, DecodeError};

/// 20-byte account identifier, rendered as 40 lowercase hex characters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address([u8; 20]);

impl Address {
    /// Receiver of contract-creation transactions.
    pub const ZERO: Address = Address([0; 20]);

    pub fn new(bytes: [u8; 20]) -> Self {
        Address(bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, DecodeError> {
        bytes.try_into().map(Address).map_err(|_| DecodeError::Length {
            expected: 20,
            found: bytes.len(),
        })
    }

    /// Trailing 20 bytes of the SHA-256 of the compressed public key.
    pub fn from_public_key(pk: &PublicKey) -> Self {
        let digest = sha256(pk.as_bytes());
        Address(digest.0[12..].try_into().unwrap())
    }

    /// Address of the contract created by `deployer` with its `nonce`-th
    /// transaction.
    pub fn for_contract(deployer: &Address, nonce: u64) -> Self {
        let digest = sha256_parts(&[b"contract", &deployer.0, &nonce.to_be_bytes()]);
        Address(digest.0[12..].try_into().unwrap())
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        encoding::to_hex(&self.0)
    }

    pub fn parse(s: &str) -> Result<Self, DecodeError> {
        let s = s.strip_prefix("0x").unwrap_or(s);
        encoding::from_hex_array(s).map(Address)
    }
}

impl std::fmt::Display for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl std::fmt::Debug for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Address({})", self.to_hex())
    }
}

impl std::str::FromStr for Address {
    type Err = DecodeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Address::parse(s)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        encoding::from_hex_array(&s)
            .map(Address)
            .map_err(serde::de::Error::custom)
    }
}
