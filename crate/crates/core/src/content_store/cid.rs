use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

/// Multihash function code for SHA2-256.
pub const SHA2_256: u8 = 0x12;
/// Digest length in bytes carried in the multihash header.
pub const DIGEST_LEN: u8 = 0x20;
pub const MULTIHASH_LEN: usize = 34;
pub const CID_TEXT_LEN: usize = 46;
pub const BASE58_ALPHABET: &str = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CidError {
    #[error("cid text is not base58btc: {0}")]
    Base58(String),
    #[error("multihash must be {MULTIHASH_LEN} bytes, got {0}")]
    Length(usize),
    #[error("unsupported multihash header {0:#04x} {1:#04x}")]
    Header(u8, u8),
}

/// CIDv0-style content identifier: base58btc of `0x12 0x20 || sha256(bytes)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cid {
    text: String,
    multihash: [u8; MULTIHASH_LEN],
}

impl Cid {
    /// Content identifier of raw bytes.
    pub fn of(content: &[u8]) -> Self {
        let digest: [u8; 32] = Sha256::digest(content).into();
        Self::from_digest(digest)
    }

    pub fn from_digest(digest: [u8; 32]) -> Self {
        let mut multihash = [0u8; MULTIHASH_LEN];
        multihash[0] = SHA2_256;
        multihash[1] = DIGEST_LEN;
        multihash[2..].copy_from_slice(&digest);
        Self::from_multihash(multihash)
    }

    fn from_multihash(multihash: [u8; MULTIHASH_LEN]) -> Self {
        let text = bs58::encode(&multihash).into_string();
        Self { text, multihash }
    }

    /// Decode multihash bytes, checking the header.
    pub fn from_multihash_bytes(bytes: &[u8]) -> Result<Self, CidError> {
        let multihash: [u8; MULTIHASH_LEN] =
            bytes.try_into().map_err(|_| CidError::Length(bytes.len()))?;
        if multihash[0] != SHA2_256 || multihash[1] != DIGEST_LEN {
            return Err(CidError::Header(multihash[0], multihash[1]));
        }
        Ok(Self::from_multihash(multihash))
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn multihash(&self) -> &[u8; MULTIHASH_LEN] {
        &self.multihash
    }

    pub fn digest(&self) -> &[u8] {
        &self.multihash[2..]
    }

    /// True when `content` hashes to this identifier.
    pub fn matches(&self, content: &[u8]) -> bool {
        Self::of(content) == *self
    }
}

/// Shorthand for [`Cid::of`].
pub fn cid_of(content: &[u8]) -> Cid {
    Cid::of(content)
}

impl FromStr for Cid {
    type Err = CidError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = bs58::decode(s)
            .into_vec()
            .map_err(|e| CidError::Base58(e.to_string()))?;
        Self::from_multihash_bytes(&bytes)
    }
}

impl fmt::Display for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for Cid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cid({})", self.text)
    }
}

impl Serialize for Cid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Cid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent big-integer base58btc encoder used as a test oracle.
    fn reference_base58(bytes: &[u8]) -> String {
        let alphabet = BASE58_ALPHABET.as_bytes();
        let zeros = bytes.iter().take_while(|b| **b == 0).count();
        let mut digits: Vec<u8> = Vec::new(); // little-endian base-58 digits
        for &byte in bytes {
            let mut carry = byte as u32;
            for d in digits.iter_mut() {
                carry += (*d as u32) << 8;
                *d = (carry % 58) as u8;
                carry /= 58;
            }
            while carry > 0 {
                digits.push((carry % 58) as u8);
                carry /= 58;
            }
        }
        let mut out = "1".repeat(zeros);
        out.extend(digits.iter().rev().map(|d| alphabet[*d as usize] as char));
        out
    }

    // Golden values computed with Python hashlib + a hand-written base58 encoder.
    const EMPTY_CID: &str = "QmdfTbBqBPQ7VNxZEYEj14VmRuZBkqFbiwReogJgS1zR1n";
    const HELLO_WORLD_CID: &str = "QmaozNR7DZHQK1ZcU9p7QdrshMvXqWK6gpu5rmrkPdT3L4";

    #[test]
    fn empty_input_golden() {
        assert_eq!(cid_of(b"").as_str(), EMPTY_CID);
        assert_eq!(cid_of(b"hello world").as_str(), HELLO_WORLD_CID);
    }

    #[test]
    fn deterministic() {
        assert_eq!(cid_of(b"abc"), cid_of(b"abc"));
    }

    #[test]
    fn quantum_digit_change_changes_cid() {
        let a = br#"{"quantum_ms":100,"slice_id":"0x00"}"#;
        let b = br#"{"quantum_ms":200,"slice_id":"0x00"}"#;
        assert_ne!(cid_of(a), cid_of(b));
    }

    #[test]
    fn overlong_qm_text_is_rejected() {
        // right prefix and alphabet, one character too many
        let text = "QmRuCqSaDTmvWQWhaY3RK5X8oxSJJpvzECZtk35gJfTzN6e";
        assert_eq!(text.len(), CID_TEXT_LEN + 1);
        assert!(text.chars().all(|ch| BASE58_ALPHABET.contains(ch)));
        assert!(matches!(text.parse::<Cid>(), Err(CidError::Length(35))));
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(matches!("not-base58!".parse::<Cid>(), Err(CidError::Base58(_))));
        assert!(matches!("Qm".parse::<Cid>(), Err(CidError::Length(_))));
        let wrong_header = bs58::encode([0x11u8; 34]).into_string();
        assert!(matches!(wrong_header.parse::<Cid>(), Err(CidError::Header(0x11, 0x11))));
    }

    #[test]
    fn serde_as_plain_string() {
        let c = cid_of(b"x");
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(j, format!("\"{c}\""));
        assert_eq!(serde_json::from_str::<Cid>(&j).unwrap(), c);
        assert!(serde_json::from_str::<Cid>("\"nope\"").is_err());
    }

    proptest! {
        #[test]
        fn text_format_invariants(content in prop::collection::vec(any::<u8>(), 0..256)) {
            let c = cid_of(&content);
            prop_assert_eq!(c.as_str().len(), CID_TEXT_LEN);
            prop_assert!(c.as_str().starts_with("Qm"));
            prop_assert!(c.as_str().chars().all(|ch| BASE58_ALPHABET.contains(ch)));
            prop_assert_eq!(c.as_str(), reference_base58(c.multihash()));
        }

        #[test]
        fn multihash_round_trip(digest in any::<[u8; 32]>()) {
            let c = Cid::from_digest(digest);
            let back: Cid = c.as_str().parse().unwrap();
            prop_assert_eq!(back.multihash(), c.multihash());
            prop_assert_eq!(back.digest(), &digest[..]);
        }

        #[test]
        fn base58_matches_reference_for_any_bytes(bytes in prop::collection::vec(any::<u8>(), 0..40)) {
            prop_assert_eq!(bs58::encode(&bytes).into_string(), reference_base58(&bytes));
        }
    }
}
