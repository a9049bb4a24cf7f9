use aes_gcm::aead::Aead;
use aes_gcm::{Aes256Gcm, KeyInit, Nonce};
use rand_core::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CryptoError;
use crate::encoding::{self, DecodeError};

const NONCE_LEN: usize = 12;
const TAG_LEN: usize = 16;

/// 256-bit symmetric key protecting the shared data.
#[derive(Clone, PartialEq, Eq)]
pub struct DataKey([u8; 32]);

impl DataKey {
    pub fn generate<R: RngCore>(rng: &mut R) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        DataKey(key)
    }

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        DataKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    fn cipher(&self) -> Aes256Gcm {
        Aes256Gcm::new((&self.0).into())
    }
}

impl std::fmt::Debug for DataKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("DataKey(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedData {
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
    pub auth_tag: [u8; TAG_LEN],
}

impl SealedData {
    /// Length-prefixed `nonce`, `ciphertext`, `auth_tag`.
    pub fn to_bytes(&self) -> Vec<u8> {
        encoding::frame_fields(&[&self.nonce, &self.ciphertext, &self.auth_tag])
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let fields = encoding::unframe_fields(bytes)?;
        let [nonce, ciphertext, tag]: [Vec<u8>; 3] = fields.try_into().map_err(|f: Vec<_>| DecodeError::Length {
            expected: 3,
            found: f.len(),
        })?;
        Ok(SealedData {
            nonce: fixed(&nonce)?,
            ciphertext,
            auth_tag: fixed(&tag)?,
        })
    }
}

fn fixed<const N: usize>(bytes: &[u8]) -> Result<[u8; N], DecodeError> {
    bytes.try_into().map_err(|_| DecodeError::Length {
        expected: N,
        found: bytes.len(),
    })
}

impl Serialize for SealedData {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encoding::to_hex(&self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for SealedData {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = encoding::from_hex(&s).map_err(serde::de::Error::custom)?;
        SealedData::from_bytes(&bytes).map_err(serde::de::Error::custom)
    }
}

pub fn encrypt_data<R: RngCore>(key: &DataKey, plaintext: &[u8], rng: &mut R) -> SealedData {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let mut sealed = key
        .cipher()
        .encrypt(Nonce::from_slice(&nonce), plaintext)
        .expect("AES-GCM encryption is infallible for in-range lengths");
    let tag = sealed.split_off(sealed.len() - TAG_LEN);
    SealedData {
        nonce,
        ciphertext: sealed,
        auth_tag: tag.try_into().unwrap(),
    }
}

pub fn decrypt_data(key: &DataKey, sealed: &SealedData) -> Result<Vec<u8>, CryptoError> {
    let mut joined = Vec::with_capacity(sealed.ciphertext.len() + TAG_LEN);
    joined.extend_from_slice(&sealed.ciphertext);
    joined.extend_from_slice(&sealed.auth_tag);
    key.cipher()
        .decrypt(Nonce::from_slice(&sealed.nonce), joined.as_slice())
        .map_err(|_| CryptoError::AuthFailure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha20Rng;
    use rand_core::SeedableRng;

    #[test]
    fn round_trip_and_wrong_key() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let key = DataKey::generate(&mut rng);
        let sealed = encrypt_data(&key, b"meeting-notes", &mut rng);
        assert_eq!(decrypt_data(&key, &sealed).unwrap(), b"meeting-notes");

        let other = DataKey::generate(&mut rng);
        assert_eq!(decrypt_data(&other, &sealed), Err(CryptoError::AuthFailure));
    }

    #[test]
    fn any_flipped_ciphertext_byte_fails_authentication() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let key = DataKey::generate(&mut rng);
        let sealed = encrypt_data(&key, b"meeting-notes", &mut rng);
        for i in 0..sealed.ciphertext.len() {
            let mut bad = sealed.clone();
            bad.ciphertext[i] ^= 0x01;
            assert_eq!(decrypt_data(&key, &bad), Err(CryptoError::AuthFailure));
        }
        let mut bad = sealed.clone();
        bad.auth_tag[0] ^= 0x80;
        assert_eq!(decrypt_data(&key, &bad), Err(CryptoError::AuthFailure));
    }

    #[test]
    fn sealed_bytes_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let key = DataKey::generate(&mut rng);
        let sealed = encrypt_data(&key, b"", &mut rng);
        assert_eq!(SealedData::from_bytes(&sealed.to_bytes()).unwrap(), sealed);
        assert!(SealedData::from_bytes(&sealed.to_bytes()[1..]).is_err());
    }
}
