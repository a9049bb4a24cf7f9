use k256::ecdsa::{RecoveryId, Signature as EcdsaSignature, SigningKey, VerifyingKey};
use rand_chacha::ChaCha20Rng;
use rand_core::{CryptoRng, RngCore, SeedableRng};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{sha256, CryptoError};
use crate::encoding::{self, DecodeError};

/// SEC1-compressed secp256k1 point.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PublicKey([u8; 33]);

impl PublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let vk = VerifyingKey::from_sec1_bytes(bytes).map_err(|_| CryptoError::InvalidKey)?;
        Ok(Self::from_verifying_key(&vk))
    }

    fn from_verifying_key(vk: &VerifyingKey) -> Self {
        let point = vk.to_encoded_point(true);
        PublicKey(point.as_bytes().try_into().expect("compressed point is 33 bytes"))
    }

    pub(crate) fn verifying_key(&self) -> VerifyingKey {
        VerifyingKey::from_sec1_bytes(&self.0).expect("validated on construction")
    }

    pub fn as_bytes(&self) -> &[u8; 33] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        encoding::to_hex(&self.0)
    }
}

impl std::fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PublicKey({})", self.to_hex())
    }
}

impl Serialize for PublicKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = encoding::from_hex(&s).map_err(serde::de::Error::custom)?;
        PublicKey::from_bytes(&bytes).map_err(serde::de::Error::custom)
    }
}

/// Secret scalar. Never serialized, and `Debug` is redacted.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey(SigningKey);

impl PrivateKey {
    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        SigningKey::from_bytes(bytes.into())
            .map(PrivateKey)
            .map_err(|_| CryptoError::InvalidKey)
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes().into()
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey::from_verifying_key(self.0.verifying_key())
    }

    pub(crate) fn signing_key(&self) -> &SigningKey {
        &self.0
    }
}

impl std::fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PrivateKey(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub public_key: PublicKey,
    pub private_key: PrivateKey,
}

impl KeyPair {
    /// Deterministic under `Some(seed)`. `None` draws from the operating
    /// system (requires the `os-entropy` feature).
    pub fn generate(seed: Option<u64>) -> KeyPair {
        match seed {
            Some(seed) => Self::from_rng(&mut ChaCha20Rng::seed_from_u64(seed)),
            None => Self::from_os_entropy(),
        }
    }

    #[cfg(feature = "os-entropy")]
    fn from_os_entropy() -> KeyPair {
        Self::from_rng(&mut ChaCha20Rng::from_entropy())
    }

    #[cfg(not(feature = "os-entropy"))]
    fn from_os_entropy() -> KeyPair {
        panic!("KeyPair::generate(None) needs the `os-entropy` feature; pass a seed")
    }

    pub fn from_rng<R: RngCore + CryptoRng>(rng: &mut R) -> KeyPair {
        let sk = SigningKey::random(rng);
        KeyPair {
            public_key: PublicKey::from_verifying_key(sk.verifying_key()),
            private_key: PrivateKey(sk),
        }
    }

    pub fn sign(&self, message: &[u8]) -> Signature {
        let prehash = sha256(message);
        let (sig, recid) = self
            .private_key
            .0
            .sign_prehash_recoverable(&prehash.0)
            .expect("32-byte prehash is always signable");
        let mut out = [0u8; 65];
        out[..64].copy_from_slice(&sig.to_bytes());
        out[64] = recid.to_byte();
        Signature(out)
    }
}

/// `r || s || v`, 65 bytes.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature(pub [u8; 65]);

impl Signature {
    pub fn to_hex(&self) -> String {
        encoding::to_hex(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DecodeError> {
        encoding::from_hex_array(s).map(Signature)
    }
}

impl std::fmt::Debug for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Signature({})", self.to_hex())
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Signature::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Recovers the signer's public key from a message and its signature.
pub fn recover_public_key(message: &[u8], signature: &Signature) -> Result<PublicKey, CryptoError> {
    let sig = EcdsaSignature::from_slice(&signature.0[..64]).map_err(|_| CryptoError::BadSignature)?;
    // High-S signatures are never produced by `sign`; accepting them would
    // give every message two valid encodings.
    if sig.normalize_s().is_some() {
        return Err(CryptoError::BadSignature);
    }
    let recid = RecoveryId::from_byte(signature.0[64]).ok_or(CryptoError::BadSignature)?;
    let prehash = sha256(message);
    VerifyingKey::recover_from_prehash(&prehash.0, &sig, recid)
        .map(|vk| PublicKey::from_verifying_key(&vk))
        .map_err(|_| CryptoError::BadSignature)
}

pub fn verify(public_key: &PublicKey, message: &[u8], signature: &Signature) -> bool {
    recover_public_key(message, signature).is_ok_and(|pk| pk == *public_key)
}
