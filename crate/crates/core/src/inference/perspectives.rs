//! Perspective detection: authors grouped by the theory-models, methods,
//! languages and evidence they support or apply.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ids::ClaimId;
use crate::kb::KnowledgeBase;
use crate::schema::{ADDRESSES, SUB_PROBLEM_OF, SUPPORTS, USES_APPLIES};

use super::{Fact, InferenceError, InferredFact};

pub const SIGNATURE_KINDS: [&str; 4] = ["theory-model", "methodology", "language", "evidence"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerspectiveConfig {
    pub seed_problem: Option<String>,
    pub threshold: f64,
}

impl Default for PerspectiveConfig {
    fn default() -> Self {
        PerspectiveConfig {
            seed_problem: None,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SharedConcepts {
    pub theory_models: Vec<String>,
    pub methodologies: Vec<String>,
    pub languages: Vec<String>,
    pub evidence: Vec<String>,
}

/// Elements relevant to a problem: whatever addresses it or one of its
/// sub-problems, plus the targets of claims made about those addressers.
pub fn problem_neighborhood(kb: &KnowledgeBase, problem: &str) -> BTreeSet<String> {
    let mut problems = BTreeSet::from([problem.to_string()]);
    let mut queue = VecDeque::from([problem.to_string()]);
    while let Some(p) = queue.pop_front() {
        for c in kb.claims_to(&p).filter(|c| c.assertion.link == SUB_PROBLEM_OF) {
            if problems.insert(c.assertion.source.clone()) {
                queue.push_back(c.assertion.source.clone());
            }
        }
    }
    let mut out = BTreeSet::new();
    for p in &problems {
        for c in kb.claims_to(p).filter(|c| c.assertion.link == ADDRESSES) {
            out.insert(c.assertion.source.clone());
        }
    }
    let addressers: Vec<String> = out.iter().cloned().collect();
    for a in addressers {
        out.extend(kb.claims_from(&a).map(|c| c.assertion.target.clone()));
    }
    out
}

/// Per-author signature concepts with the claims that put them there.
pub fn signatures(
    kb: &KnowledgeBase,
    within: Option<&BTreeSet<String>>,
) -> BTreeMap<String, BTreeMap<String, BTreeSet<ClaimId>>> {
    let mut out: BTreeMap<String, BTreeMap<String, BTreeSet<ClaimId>>> = BTreeMap::new();
    for c in kb.claims() {
        if c.assertion.link != SUPPORTS && c.assertion.link != USES_APPLIES {
            continue;
        }
        let t = &c.assertion.target;
        let Some(concept) = kb.concept(t) else { continue };
        let base = kb.schema().base_kind(&concept.kind);
        if !base.is_some_and(|b| SIGNATURE_KINDS.contains(&b)) {
            continue;
        }
        if within.is_some_and(|n| !n.contains(t)) {
            continue;
        }
        for a in &c.authors {
            out.entry(a.clone())
                .or_default()
                .entry(t.clone())
                .or_default()
                .insert(c.id.clone());
        }
    }
    out
}

/// Jaccard similarity as an exact fraction (shared, union).
fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> (usize, usize) {
    let shared = a.intersection(b).count();
    (shared, a.len() + b.len() - shared)
}

fn cmp_fraction(a: (usize, usize), b: (usize, usize)) -> Ordering {
    (a.0 as u128 * b.1 as u128).cmp(&(b.0 as u128 * a.1 as u128))
}

pub fn detect_perspectives(kb: &KnowledgeBase, config: &PerspectiveConfig) -> Result<Vec<InferredFact>, InferenceError> {
    let t = config.threshold;
    if !(t > 0.0 && t <= 1.0) {
        return Err(InferenceError::InvalidParameter(format!(
            "threshold must be in (0, 1], got {t}"
        )));
    }
    let neighborhood = match &config.seed_problem {
        Some(p) if kb.concept(p).is_none() => return Err(InferenceError::UnknownId(p.clone())),
        Some(p) => Some(problem_neighborhood(kb, p)),
        None => None,
    };
    let sigs = signatures(kb, neighborhood.as_ref());
    let authors: Vec<&String> = sigs.keys().collect();
    let concept_sets: Vec<BTreeSet<&str>> = sigs.values().map(|m| m.keys().map(String::as_str).collect()).collect();

    // complete linkage over author indices, clusters kept sorted
    let mut clusters: Vec<Vec<usize>> = (0..authors.len()).map(|i| vec![i]).collect();
    let meets = |f: (usize, usize)| f.0 as f64 >= t * f.1 as f64 - 1e-9;
    loop {
        let mut best: Option<((usize, usize), usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let link = clusters[i]
                    .iter()
                    .flat_map(|&a| clusters[j].iter().map(move |&b| (a, b)))
                    .map(|(a, b)| jaccard(&concept_sets[a], &concept_sets[b]))
                    .min_by(|x, y| cmp_fraction(*x, *y))
                    .expect("clusters are nonempty");
                if !meets(link) {
                    continue;
                }
                // clusters are ordered by smallest author, so the first pair
                // found wins among equals
                if best.is_none_or(|(f, _, _)| cmp_fraction(link, f) == Ordering::Greater) {
                    best = Some((link, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let merged = clusters.remove(j);
        clusters[i].extend(merged);
        clusters[i].sort_unstable();
    }

    let mut facts = Vec::new();
    for cluster in clusters {
        let mut shared: BTreeSet<&str> = concept_sets[cluster[0]].clone();
        for &a in &cluster[1..] {
            shared = shared.intersection(&concept_sets[a]).copied().collect();
        }
        let mut concepts = SharedConcepts::default();
        for id in shared {
            let kind = kb.concept(id).map(|c| c.kind.as_str()).unwrap_or_default();
            let slot = match kb.schema().base_kind(kind) {
                Some("theory-model") => &mut concepts.theory_models,
                Some("methodology") => &mut concepts.methodologies,
                Some("language") => &mut concepts.languages,
                _ => &mut concepts.evidence,
            };
            slot.push(id.to_string());
        }
        let provenance: BTreeSet<ClaimId> = cluster
            .iter()
            .flat_map(|&a| sigs[authors[a]].values().flatten().cloned())
            .collect();
        facts.push(InferredFact {
            fact: Fact::Perspective {
                authors: cluster.iter().map(|&a| authors[a].clone()).collect(),
                concepts,
            },
            provenance: provenance.into_iter().collect(),
        });
    }
    facts.sort();
    Ok(facts)
}
