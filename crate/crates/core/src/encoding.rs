//! Byte-level helpers shared by the exports: strict lowercase hex and
//! length-prefixed field framing.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("hex string has odd length {0}")]
    OddLength(usize),
    #[error("invalid hex character {0:?} (lowercase hex required)")]
    BadHexChar(char),
    #[error("expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error("truncated length-prefixed field")]
    Truncated,
    #[error("{0} trailing bytes after last field")]
    Trailing(usize),
}

pub fn to_hex(bytes: &[u8]) -> String {
    hex::encode(bytes)
}

/// Decodes lowercase hex only. Uppercase digits are rejected so that every
/// byte sequence has exactly one textual form in exported files.
pub fn from_hex(s: &str) -> Result<Vec<u8>, DecodeError> {
    if !s.len().is_multiple_of(2) {
        return Err(DecodeError::OddLength(s.len()));
    }
    if let Some(c) = s.chars().find(|c| !matches!(c, '0'..='9' | 'a'..='f')) {
        return Err(DecodeError::BadHexChar(c));
    }
    Ok(hex::decode(s).expect("validated hex"))
}

pub fn from_hex_array<const N: usize>(s: &str) -> Result<[u8; N], DecodeError> {
    let bytes = from_hex(s)?;
    bytes.as_slice().try_into().map_err(|_| DecodeError::Length {
        expected: N,
        found: bytes.len(),
    })
}

/// Concatenates fields, each preceded by its length as a big-endian `u32`.
pub fn frame_fields(fields: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(fields.iter().map(|f| f.len() + 4).sum());
    for field in fields {
        out.extend_from_slice(&(field.len() as u32).to_be_bytes());
        out.extend_from_slice(field);
    }
    out
}

/// Inverse of [`frame_fields`]; the whole input must be consumed.
pub fn unframe_fields(mut bytes: &[u8]) -> Result<Vec<Vec<u8>>, DecodeError> {
    let mut fields = Vec::new();
    while !bytes.is_empty() {
        if bytes.len() < 4 {
            return Err(DecodeError::Trailing(bytes.len()));
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        bytes = &bytes[4..];
        if bytes.len() < len {
            return Err(DecodeError::Truncated);
        }
        fields.push(bytes[..len].to_vec());
        bytes = &bytes[len..];
    }
    Ok(fields)
}

/// Serde adapter for `Vec<u8>` as lowercase hex.
pub mod hex_bytes {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_hex(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        super::from_hex(&s).map_err(D::Error::custom)
    }
}

/// Serde adapter for `Option<Vec<u8>>` as lowercase hex or null.
pub mod hex_bytes_opt {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        match bytes {
            Some(b) => s.serialize_some(&super::to_hex(b)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u8>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| super::from_hex(&s).map_err(D::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uppercase_hex_is_rejected() {
        assert_eq!(from_hex("0aff").unwrap(), vec![0x0a, 0xff]);
        assert_eq!(from_hex("0aFf"), Err(DecodeError::BadHexChar('F')));
        assert_eq!(from_hex("abc"), Err(DecodeError::OddLength(3)));
    }

    #[test]
    fn framing_rejects_truncation() {
        let framed = frame_fields(&[b"abc", b"", b"xy"]);
        assert_eq!(
            unframe_fields(&framed).unwrap(),
            vec![b"abc".to_vec(), vec![], b"xy".to_vec()]
        );
        assert_eq!(unframe_fields(&framed[..framed.len() - 1]), Err(DecodeError::Truncated));
        assert_eq!(unframe_fields(&framed[..2]), Err(DecodeError::Trailing(2)));
    }
}
