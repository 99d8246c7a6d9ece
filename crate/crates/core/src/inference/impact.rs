//! Impact of an element: documents using or modifying it, the domains they
//! concern, and the problems addressed by work that drew on it.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::kb::KnowledgeBase;
use crate::schema::{ADDRESSES, MODIFIES_EXTENDS, USES_APPLIES};

use super::InferenceError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactWeights {
    pub docs: f64,
    pub domains: f64,
    pub problems: f64,
}

impl Default for ImpactWeights {
    fn default() -> Self {
        ImpactWeights {
            docs: 1.0,
            domains: 1.0,
            problems: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counted {
    pub count: usize,
    pub ids: Vec<String>,
}

impl From<BTreeSet<String>> for Counted {
    fn from(set: BTreeSet<String>) -> Self {
        Counted {
            count: set.len(),
            ids: set.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub target: String,
    pub docs: Counted,
    pub domains: Counted,
    pub problems: Counted,
    pub weights: ImpactWeights,
    pub scalar: f64,
}

/// The target together with every element that modifies or extends it,
/// directly or through a chain.
pub fn extension_family(kb: &KnowledgeBase, target: &str) -> BTreeSet<String> {
    let mut family = BTreeSet::from([target.to_string()]);
    let mut queue = VecDeque::from([target.to_string()]);
    while let Some(node) = queue.pop_front() {
        for c in kb.claims_to(&node).filter(|c| c.assertion.link == MODIFIES_EXTENDS) {
            if family.insert(c.assertion.source.clone()) {
                queue.push_back(c.assertion.source.clone());
            }
        }
    }
    family
}

pub fn compute_impact(
    kb: &KnowledgeBase,
    target: &str,
    weights: ImpactWeights,
) -> Result<ImpactReport, InferenceError> {
    if kb.concept(target).is_none() {
        return Err(InferenceError::UnknownId(target.to_string()));
    }
    let family = extension_family(kb, target);
    let mut users = BTreeSet::new();
    for node in &family {
        for c in kb.claims_to(node) {
            if c.assertion.link == USES_APPLIES || c.assertion.link == MODIFIES_EXTENDS {
                users.insert(c.assertion.source.clone());
            }
        }
    }

    let mut docs = BTreeSet::new();
    let mut domains = BTreeSet::new();
    let mut problems = BTreeSet::new();
    for user in &users {
        for article in kb.describing_articles(user) {
            docs.insert(article.id.clone());
            domains.extend(article.domains.iter().cloned());
        }
        for c in kb.claims_from(user).filter(|c| c.assertion.link == ADDRESSES) {
            problems.insert(c.assertion.target.clone());
        }
    }

    let scalar = weights.docs * docs.len() as f64
        + weights.domains * domains.len() as f64
        + weights.problems * problems.len() as f64;
    Ok(ImpactReport {
        target: target.to_string(),
        docs: docs.into(),
        domains: domains.into(),
        problems: problems.into(),
        weights,
        scalar,
    })
}
