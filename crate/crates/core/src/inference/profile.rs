//! Rule-based interest profiles. A profile fires when, for some binding of
//! its variables, every condition is met by at least `min_count` distinct
//! documents. Targets match the named element or anything that modifies or
//! extends it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::ClaimId;
use crate::kb::KnowledgeBase;
use crate::query::map::{ConceptMap, EdgeStatus, MapEdge, MapNode, Side};
use crate::schema::{MODIFIES_EXTENDS, RAISES_ISSUES_WITH, REFUTES, SUPPORTS};

use super::impact::extension_family;
use super::{Fact, InferenceError, InferredFact};

pub const MAX_VARIABLES: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternLink {
    /// `refutes` or `raises-issues-with`.
    Challenges,
    Link(String),
}

impl PatternLink {
    pub fn matches(&self, link: &str) -> bool {
        match self {
            PatternLink::Challenges => link == REFUTES || link == RAISES_ISSUES_WITH,
            PatternLink::Link(l) => l == link,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternTarget {
    Id(String),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub link: PatternLink,
    pub target: PatternTarget,
}

/// Documents that satisfy every pattern, at least `min_count` of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub patterns: Vec<Pattern>,
    pub min_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterestProfile {
    pub id: String,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("profile `{0}` has no conditions")]
    NoConditions(String),
    #[error("a condition in profile `{0}` has no patterns")]
    EmptyCondition(String),
    #[error("thresholds must be at least 1")]
    ZeroThreshold,
    #[error("at most {MAX_VARIABLES} variables are allowed, found {0}")]
    TooManyVariables(usize),
}

impl InterestProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.conditions.is_empty() {
            return Err(ProfileError::NoConditions(self.id.clone()));
        }
        for c in &self.conditions {
            if c.patterns.is_empty() {
                return Err(ProfileError::EmptyCondition(self.id.clone()));
            }
            if c.min_count == 0 {
                return Err(ProfileError::ZeroThreshold);
            }
        }
        let vars = self.variables().len();
        if vars > MAX_VARIABLES {
            return Err(ProfileError::TooManyVariables(vars));
        }
        Ok(())
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.patterns()
            .filter_map(|p| match &p.target {
                PatternTarget::Var(v) => Some(v.as_str()),
                PatternTarget::Id(_) => None,
            })
            .collect()
    }

    fn patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.conditions.iter().flat_map(|c| c.patterns.iter())
    }

    /// The two-condition profile for a pair of competing positions.
    pub fn schools_of_thought(id: &str, l: &str, m: &str, min_count: usize) -> Self {
        let cond = |a: &str, b: &str| Condition {
            patterns: vec![
                Pattern {
                    link: PatternLink::Link(SUPPORTS.to_string()),
                    target: PatternTarget::Id(a.to_string()),
                },
                Pattern {
                    link: PatternLink::Challenges,
                    target: PatternTarget::Id(b.to_string()),
                },
            ],
            min_count,
        };
        InterestProfile {
            id: id.to_string(),
            conditions: vec![cond(l, m), cond(m, l)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMatch {
    pub documents: Vec<String>,
    pub claims: Vec<ClaimId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMatch {
    pub bindings: BTreeMap<String, String>,
    pub conditions: Vec<ConditionMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub profile: String,
    pub matches: Vec<ProfileMatch>,
    pub map: ConceptMap,
}

/// Documents embodying a claim with a matching link whose target lies in the
/// extension family of `target`, with the claims behind each.
fn pattern_documents<'a>(
    kb: &'a KnowledgeBase,
    link: &PatternLink,
    target: &str,
) -> BTreeMap<&'a str, BTreeSet<&'a ClaimId>> {
    let mut docs: BTreeMap<&str, BTreeSet<&ClaimId>> = BTreeMap::new();
    for member in extension_family(kb, target) {
        for c in kb.claims_to(&member).filter(|c| link.matches(&c.assertion.link)) {
            if let Some(d) = c.document(kb) {
                docs.entry(d).or_default().insert(&c.id);
            }
        }
    }
    docs
}

fn evaluate_condition(
    kb: &KnowledgeBase,
    cond: &Condition,
    bindings: &BTreeMap<String, String>,
) -> Option<ConditionMatch> {
    let mut common: Option<BTreeMap<&str, BTreeSet<&ClaimId>>> = None;
    for p in &cond.patterns {
        let target = match &p.target {
            PatternTarget::Id(id) => id,
            PatternTarget::Var(v) => &bindings[v],
        };
        let docs = pattern_documents(kb, &p.link, target);
        common = Some(match common {
            None => docs,
            Some(prev) => prev
                .into_iter()
                .filter_map(|(d, mut claims)| {
                    docs.get(d).map(|more| {
                        claims.extend(more.iter().copied());
                        (d, claims)
                    })
                })
                .collect(),
        });
    }
    let common = common.unwrap_or_default();
    if common.len() < cond.min_count {
        return None;
    }
    let claims: BTreeSet<&ClaimId> = common.values().flatten().copied().collect();
    Some(ConditionMatch {
        documents: common.keys().map(|d| d.to_string()).collect(),
        claims: claims.into_iter().cloned().collect(),
    })
}

/// Candidate values for each variable: elements whose extension family holds
/// a target of a matching claim, for every pattern the variable appears in.
fn candidates(kb: &KnowledgeBase, profile: &InterestProfile) -> BTreeMap<String, Vec<String>> {
    let mut out = BTreeMap::new();
    for var in profile.variables() {
        let mut set: Option<BTreeSet<String>> = None;
        for p in profile.patterns() {
            if p.target != PatternTarget::Var(var.to_string()) {
                continue;
            }
            let targets: BTreeSet<String> = kb
                .claims()
                .iter()
                .filter(|c| p.link.matches(&c.assertion.link))
                .flat_map(|c| extended_by(kb, &c.assertion.target))
                .collect();
            set = Some(match set {
                None => targets,
                Some(prev) => prev.intersection(&targets).cloned().collect(),
            });
        }
        out.insert(var.to_string(), set.unwrap_or_default().into_iter().collect());
    }
    out
}

/// `id` and everything it modifies or extends, directly or through a chain.
fn extended_by(kb: &KnowledgeBase, id: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::from([id.to_string()]);
    let mut stack = vec![id.to_string()];
    while let Some(n) = stack.pop() {
        for c in kb.claims_from(&n).filter(|c| c.assertion.link == MODIFIES_EXTENDS) {
            if out.insert(c.assertion.target.clone()) {
                stack.push(c.assertion.target.clone());
            }
        }
    }
    out
}

/// Cartesian product of candidate values, distinct variables taking
/// distinct values.
fn bindings(cands: &BTreeMap<String, Vec<String>>) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for (var, values) in cands {
        let mut next = Vec::new();
        for b in &out {
            for v in values {
                if b.values().any(|taken: &String| taken == v) {
                    continue;
                }
                let mut nb = b.clone();
                nb.insert(var.clone(), v.clone());
                next.push(nb);
            }
        }
        out = next;
    }
    out
}

pub fn evaluate_profile(kb: &KnowledgeBase, profile: &InterestProfile) -> Result<Option<Alert>, InferenceError> {
    profile
        .validate()
        .map_err(|e| InferenceError::InvalidParameter(e.to_string()))?;
    let mut matches = Vec::new();
    'binding: for b in bindings(&candidates(kb, profile)) {
        let mut conds = Vec::new();
        for cond in &profile.conditions {
            match evaluate_condition(kb, cond, &b) {
                Some(m) => conds.push(m),
                None => continue 'binding,
            }
        }
        matches.push(ProfileMatch {
            bindings: b,
            conditions: conds,
        });
    }
    let Some(first) = matches.first() else {
        return Ok(None);
    };
    let focus = match &profile.conditions[0].patterns[0].target {
        PatternTarget::Id(id) => id.clone(),
        PatternTarget::Var(v) => first.bindings[v].clone(),
    };
    let claims: BTreeSet<&ClaimId> = matches
        .iter()
        .flat_map(|m| m.conditions.iter().flat_map(|c| c.claims.iter()))
        .collect();
    let map = claims_map(kb, &focus, claims.into_iter());
    Ok(Some(Alert {
        profile: profile.id.clone(),
        matches,
        map,
    }))
}

/// A concept map over the given claims: claim sources on the impact side,
/// claim targets on the motivation side.
fn claims_map<'a>(kb: &KnowledgeBase, focus: &str, claims: impl Iterator<Item = &'a ClaimId>) -> ConceptMap {
    let mut sides: BTreeMap<String, Side> = BTreeMap::new();
    let mut edges = Vec::new();
    for id in claims {
        let Some(c) = kb.claim(id.as_str()) else { continue };
        let a = &c.assertion;
        sides.insert(a.target.clone(), Side::Motivation);
        sides.entry(a.source.clone()).or_insert(Side::Impact);
        edges.push(MapEdge {
            source: a.source.clone(),
            link: a.link.clone(),
            target: a.target.clone(),
            status: EdgeStatus::Asserted,
            claim: Some(c.id.clone()),
        });
    }
    sides.insert(focus.to_string(), Side::Focus);
    let nodes = sides
        .into_iter()
        .map(|(id, side)| MapNode {
            kind: kb.kind_of(&id).unwrap_or(crate::schema::CLAIM).to_string(),
            id,
            side,
        })
        .collect();
    let mut map = ConceptMap {
        focus: focus.to_string(),
        nodes,
        edges,
    };
    map.sort();
    map
}

/// Every unordered pair of elements where at least `min_docs` documents
/// support the first while challenging the second, and at least `min_docs`
/// do the reverse.
pub fn detect_schools_of_thought(kb: &KnowledgeBase, min_docs: usize) -> Result<Vec<InferredFact>, InferenceError> {
    if min_docs == 0 {
        return Err(InferenceError::InvalidParameter("min-docs must be at least 1".into()));
    }
    let supported: BTreeSet<&str> = kb
        .claims_with_link(SUPPORTS)
        .map(|c| c.assertion.target.as_str())
        .filter(|t| kb.concept(t).is_some())
        .collect();
    let challenged: BTreeSet<&str> = kb
        .claims()
        .iter()
        .filter(|c| PatternLink::Challenges.matches(&c.assertion.link))
        .map(|c| c.assertion.target.as_str())
        .filter(|t| kb.concept(t).is_some())
        .collect();
    // an element counts when it or something extending it is involved
    let roots = |set: &BTreeSet<&str>| -> BTreeSet<String> {
        kb.concepts()
            .filter(|c| extension_family(kb, &c.id).iter().any(|m| set.contains(m.as_str())))
            .map(|c| c.id.clone())
            .collect()
    };
    let both: Vec<String> = roots(&supported).intersection(&roots(&challenged)).cloned().collect();

    let mut facts = Vec::new();
    for (i, l) in both.iter().enumerate() {
        for m in &both[i + 1..] {
            let profile = InterestProfile::schools_of_thought("schools", l, m, min_docs);
            if let Some(alert) = evaluate_profile(kb, &profile)? {
                let provenance: BTreeSet<ClaimId> = alert.matches[0]
                    .conditions
                    .iter()
                    .flat_map(|c| c.claims.iter().cloned())
                    .collect();
                facts.push(InferredFact {
                    fact: Fact::SchoolOfThought {
                        first: l.clone(),
                        second: m.clone(),
                    },
                    provenance: provenance.into_iter().collect(),
                });
            }
        }
    }
    Ok(facts)
}
