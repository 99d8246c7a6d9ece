//! Tentative challenge propagation: when X is refuted or has issues raised
//! against it, work that modifies/extends or uses/applies X may be
//! challenged too.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::ids::ClaimId;
use crate::kb::KnowledgeBase;
use crate::schema::{MODIFIES_EXTENDS, RAISES_ISSUES_WITH, REFUTES, USES_APPLIES};

use super::{Fact, InferenceError, InferredFact};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropagationConfig {
    pub max_depth: usize,
    pub via_modifies_extends: bool,
    pub via_uses_applies: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            max_depth: 5,
            via_modifies_extends: true,
            via_uses_applies: true,
        }
    }
}

impl PropagationConfig {
    pub fn with_depth(max_depth: usize) -> Self {
        PropagationConfig {
            max_depth,
            ..Self::default()
        }
    }

    pub fn links(&self) -> Vec<&'static str> {
        let mut links = Vec::new();
        if self.via_modifies_extends {
            links.push(MODIFIES_EXTENDS);
        }
        if self.via_uses_applies {
            links.push(USES_APPLIES);
        }
        links
    }
}

/// Elements targeted by a refutes or raises-issues-with claim, with the
/// challenging claims.
pub fn challenged_elements(kb: &KnowledgeBase) -> BTreeMap<String, BTreeSet<ClaimId>> {
    let mut seeds: BTreeMap<String, BTreeSet<ClaimId>> = BTreeMap::new();
    for link in [REFUTES, RAISES_ISSUES_WITH] {
        for c in kb.claims_with_link(link) {
            if kb.concept(&c.assertion.target).is_some() {
                seeds
                    .entry(c.assertion.target.clone())
                    .or_default()
                    .insert(c.id.clone());
            }
        }
    }
    seeds
}

/// Emits `may-be-challenged` for every element with a path of 1 to
/// `max_depth` propagation edges ending at a challenged element. The witness
/// is the shortest such path, lexicographically smallest among equals.
pub fn propagate_challenges(
    kb: &KnowledgeBase,
    config: &PropagationConfig,
) -> Result<Vec<InferredFact>, InferenceError> {
    if config.max_depth == 0 {
        return Err(InferenceError::InvalidParameter("max-depth must be at least 1".into()));
    }
    let links = config.links();
    let seeds = challenged_elements(kb);

    // out-edges restricted to propagation links: node -> (next, smallest claim id)
    let step = |from: &str| -> BTreeMap<&str, &ClaimId> {
        let mut next: BTreeMap<&str, &ClaimId> = BTreeMap::new();
        for c in kb.claims_from(from) {
            if links.contains(&c.assertion.link.as_str()) {
                let e = next.entry(c.assertion.target.as_str()).or_insert(&c.id);
                if c.id < **e {
                    *e = &c.id;
                }
            }
        }
        next
    };

    // distance to the nearest challenged element, walking edges backwards
    let mut dist: BTreeMap<&str, usize> = BTreeMap::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for s in seeds.keys() {
        dist.insert(s, 0);
        queue.push_back(s);
    }
    while let Some(node) = queue.pop_front() {
        let d = dist[node];
        if d + 1 > config.max_depth {
            continue;
        }
        for c in kb.claims_to(node) {
            if links.contains(&c.assertion.link.as_str()) && !dist.contains_key(c.assertion.source.as_str()) {
                dist.insert(&c.assertion.source, d + 1);
                queue.push_back(&c.assertion.source);
            }
        }
    }

    // every element one edge upstream of a reached node is a candidate
    let mut candidates: BTreeSet<&str> = BTreeSet::new();
    for node in dist.keys() {
        for c in kb.claims_to(node) {
            if links.contains(&c.assertion.link.as_str()) {
                candidates.insert(&c.assertion.source);
            }
        }
    }

    let mut facts = Vec::new();
    for element in candidates {
        let next = step(element);
        let Some(best) = next.keys().filter_map(|n| dist.get(n)).min().copied() else {
            continue;
        };
        if best + 1 > config.max_depth {
            continue;
        }
        let mut path = vec![element.to_string()];
        let mut provenance = Vec::new();
        let mut remaining = best;
        let mut hops = next;
        let seed = loop {
            let (&n, &claim) = hops
                .iter()
                .find(|(n, _)| dist.get(**n) == Some(&remaining))
                .expect("a neighbour on a shortest path");
            path.push(n.to_string());
            provenance.push(claim.clone());
            if remaining == 0 {
                break n;
            }
            remaining -= 1;
            hops = step(n);
        };
        provenance.extend(seeds[seed].iter().cloned());
        facts.push(InferredFact {
            fact: Fact::MayBeChallenged {
                element: element.to_string(),
                via: path,
            },
            provenance,
        });
    }
    Ok(facts)
}
