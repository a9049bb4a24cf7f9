//! Signature, symmetric encryption and key wrapping.
//!
//! The suite is fixed per build and declared in every export through
//! [`Suite::current`]:
//!
//! * signatures: recoverable ECDSA over secp256k1, SHA-256 prehash, RFC 6979
//!   nonces, encoded as `r || s || v` (65 bytes);
//! * shared data: AES-256-GCM with a random 96-bit nonce;
//! * key wrapping: ECIES over secp256k1 (ephemeral ECDH, HKDF-SHA256,
//!   AES-256-GCM), bound to the recipient address;
//! * digests: SHA-256.

mod data;
mod envelope;
mod keys;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

pub use data::{decrypt_data, encrypt_data, DataKey, SealedData};
pub use envelope::{unwrap_key, wrap_key, KeyEnvelope};
pub use keys::{recover_public_key, verify, KeyPair, PrivateKey, PublicKey, Signature};

use crate::encoding::{self, DecodeError};

/// Algorithm identifiers recorded in exports so they are self-describing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suite {
    pub digest: String,
    pub signature: String,
    pub data_cipher: String,
    pub key_wrap: String,
    pub call_encoding: String,
}

impl Suite {
    pub fn current() -> Self {
        Suite {
            digest: "sha-256".into(),
            signature: "ecdsa-secp256k1-sha256-recoverable".into(),
            data_cipher: "aes-256-gcm".into(),
            key_wrap: "ecies-secp256k1-hkdf-sha256-aes-256-gcm".into(),
            call_encoding: "json:function+sorted-args".into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("authenticated decryption failed")]
    AuthFailure,
    #[error("key envelope could not be opened with this private key")]
    UnwrapFailure,
    #[error("signature is malformed or does not recover a public key")]
    BadSignature,
    #[error("invalid key material")]
    InvalidKey,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// A 256-bit digest, rendered as 64 lowercase hex characters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const ZERO: Digest = Digest([0; 32]);

    pub fn to_hex(&self) -> String {
        encoding::to_hex(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DecodeError> {
        encoding::from_hex_array(s).map(Digest)
    }
}

impl std::fmt::Debug for Digest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl std::fmt::Display for Digest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Digest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Digest::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

pub fn sha256(bytes: &[u8]) -> Digest {
    Digest(Sha256::digest(bytes).into())
}

/// SHA-256 over several byte slices fed in order.
pub fn sha256_parts(parts: &[&[u8]]) -> Digest {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    Digest(h.finalize().into())
}
