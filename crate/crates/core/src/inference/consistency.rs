use std::collections::{BTreeMap, BTreeSet};

use crate::ids::ClaimId;
use crate::kb::KnowledgeBase;
use crate::schema::{REFUTES, SUPPORTS};

use super::{Fact, InferredFact};

/// One fact per (author, assertion) where the author co-authored a claim
/// supporting the assertion and another claim refuting it. Provenance lists
/// every supporting and refuting claim the author shares.
pub fn detect_inconsistent_positions(kb: &KnowledgeBase) -> Vec<InferredFact> {
    let mut found: BTreeMap<(String, String), BTreeSet<ClaimId>> = BTreeMap::new();
    for support in kb.claims_with_link(SUPPORTS) {
        let target = &support.assertion.target;
        for refute in kb
            .claims_to(target)
            .filter(|c| c.assertion.link == REFUTES)
        {
            for author in support.authors.intersection(&refute.authors) {
                let ids = found.entry((author.clone(), target.clone())).or_default();
                ids.insert(support.id.clone());
                ids.insert(refute.id.clone());
            }
        }
    }
    found
        .into_iter()
        .map(|((author, assertion), ids)| InferredFact {
            fact: Fact::InconsistentPosition { author, assertion },
            provenance: ids.into_iter().collect(),
        })
        .collect()
}
