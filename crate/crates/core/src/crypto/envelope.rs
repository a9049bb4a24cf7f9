use aes_gcm::aead::{Aead, Payload};
use aes_gcm::{Aes256Gcm, KeyInit, Nonce};
use hkdf::Hkdf;
use k256::ecdh::diffie_hellman;
use k256::SecretKey;
use rand_core::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::Sha256;

use super::{CryptoError, DataKey, PrivateKey, PublicKey};
use crate::encoding::{self, DecodeError};
use crate::ledger::Address;

const WRAP_INFO: &[u8] = b"mabac key wrap v1";
const EPHEMERAL_LEN: usize = 33;

/// A [`DataKey`] encrypted to one recipient. The ciphertext is the
/// ephemeral public point followed by the AES-GCM output (key + tag).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyEnvelope {
    pub recipient: Address,
    pub ciphertext: Vec<u8>,
}

impl KeyEnvelope {
    /// Length-prefixed `recipient`, `ciphertext`.
    pub fn to_bytes(&self) -> Vec<u8> {
        encoding::frame_fields(&[self.recipient.as_bytes(), &self.ciphertext])
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let fields = encoding::unframe_fields(bytes)?;
        let [recipient, ciphertext]: [Vec<u8>; 2] = fields.try_into().map_err(|f: Vec<_>| DecodeError::Length {
            expected: 2,
            found: f.len(),
        })?;
        Ok(KeyEnvelope {
            recipient: Address::from_slice(&recipient)?,
            ciphertext,
        })
    }
}

impl Serialize for KeyEnvelope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encoding::to_hex(&self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for KeyEnvelope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = encoding::from_hex(&s).map_err(serde::de::Error::custom)?;
        KeyEnvelope::from_bytes(&bytes).map_err(serde::de::Error::custom)
    }
}

fn derive_cipher(shared_secret: &[u8], ephemeral: &[u8], recipient: &PublicKey) -> (Aes256Gcm, [u8; 12]) {
    let mut salt = Vec::with_capacity(EPHEMERAL_LEN * 2);
    salt.extend_from_slice(ephemeral);
    salt.extend_from_slice(recipient.as_bytes());
    let hk = Hkdf::<Sha256>::new(Some(&salt), shared_secret);
    let mut okm = [0u8; 44];
    hk.expand(WRAP_INFO, &mut okm).expect("44 bytes is a valid HKDF length");
    let cipher = Aes256Gcm::new_from_slice(&okm[..32]).expect("32-byte key");
    (cipher, okm[32..].try_into().unwrap())
}

/// Encrypts `key` to `recipient_public`. A fresh ephemeral key is drawn for
/// every call, so repeated wraps of the same key differ.
pub fn wrap_key<R: RngCore + CryptoRng>(recipient_public: &PublicKey, key: &DataKey, rng: &mut R) -> KeyEnvelope {
    let ephemeral = SecretKey::random(rng);
    let ephemeral_pub = ephemeral.public_key().to_sec1_bytes();
    let shared = diffie_hellman(
        ephemeral.to_nonzero_scalar(),
        recipient_public.verifying_key().as_affine(),
    );
    let (cipher, nonce) = derive_cipher(shared.raw_secret_bytes(), &ephemeral_pub, recipient_public);
    let recipient = Address::from_public_key(recipient_public);
    let sealed = cipher
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: key.as_bytes(),
                aad: recipient.as_bytes(),
            },
        )
        .expect("AES-GCM encryption is infallible for in-range lengths");
    let mut ciphertext = ephemeral_pub.to_vec();
    ciphertext.extend_from_slice(&sealed);
    KeyEnvelope { recipient, ciphertext }
}

pub fn unwrap_key(recipient_private: &PrivateKey, envelope: &KeyEnvelope) -> Result<DataKey, CryptoError> {
    let recipient_public = recipient_private.public_key();
    if Address::from_public_key(&recipient_public) != envelope.recipient || envelope.ciphertext.len() <= EPHEMERAL_LEN {
        return Err(CryptoError::UnwrapFailure);
    }
    let (ephemeral, sealed) = envelope.ciphertext.split_at(EPHEMERAL_LEN);
    let ephemeral_pub = PublicKey::from_bytes(ephemeral).map_err(|_| CryptoError::UnwrapFailure)?;
    let shared = diffie_hellman(
        recipient_private.signing_key().as_nonzero_scalar(),
        ephemeral_pub.verifying_key().as_affine(),
    );
    let (cipher, nonce) = derive_cipher(shared.raw_secret_bytes(), ephemeral, &recipient_public);
    let plain = cipher
        .decrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: sealed,
                aad: envelope.recipient.as_bytes(),
            },
        )
        .map_err(|_| CryptoError::UnwrapFailure)?;
    let bytes: [u8; 32] = plain.try_into().map_err(|_| CryptoError::UnwrapFailure)?;
    Ok(DataKey::from_bytes(bytes))
}
