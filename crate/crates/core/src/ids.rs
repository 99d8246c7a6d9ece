//! Identifier canonicalization and content-addressed claim ids.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("identifier is empty after canonicalization")]
pub struct EmptyName;

/// Lowercases `name` and collapses every run of non-alphanumeric characters
/// into a single hyphen, dropping leading and trailing runs.
///
/// `"  KMS / ZOG "` becomes `"kms-zog"`.
pub fn canonicalize_id(name: &str) -> Result<String, EmptyName> {
    let mut out = String::with_capacity(name.len());
    let mut pending_sep = false;
    for ch in name.chars().flat_map(char::to_lowercase) {
        if ch.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('-');
            }
            pending_sep = false;
            out.push(ch);
        } else {
            pending_sep = true;
        }
    }
    if out.is_empty() {
        Err(EmptyName)
    } else {
        Ok(out)
    }
}

pub(crate) const CLAIM_PREFIX: &str = "claim-";

/// Content hash of a claim's author set and assertion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClaimId(String);

impl ClaimId {
    pub(crate) fn from_content(authors: &[String], source: &str, link: &str, target: &str) -> Self {
        let mut h = Sha256::new();
        for a in authors {
            h.update(a.as_bytes());
            h.update([0u8]);
        }
        h.update([1u8]);
        for part in [source, link, target] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        let digest = h.finalize();
        ClaimId(format!("{CLAIM_PREFIX}{}", hex::encode(&digest[..8])))
    }

    /// Accepts strings shaped like a claim id (`claim-` followed by 16 hex digits).
    pub fn parse(s: &str) -> Option<Self> {
        let rest = s.strip_prefix(CLAIM_PREFIX)?;
        (rest.len() == 16 && rest.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()))
            .then(|| ClaimId(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ClaimId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}
