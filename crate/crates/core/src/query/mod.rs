//! Structural queries over a knowledge-base snapshot, and concept-map
//! extraction. [`naive`] holds an index-free reference evaluator.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::dsl::Query;
use crate::ids::ClaimId;
use crate::inference::impact::extension_family;
use crate::inference::{
    compute_impact, detect_perspectives, Fact, ImpactReport, ImpactWeights, InferenceError, InferredFact,
    PerspectiveConfig,
};
use crate::kb::KnowledgeBase;
use crate::schema::{DESCRIBES, MODIFIES_EXTENDS, PREDICTS_ENVISAGES, REFUTES, USES_APPLIES};

pub mod map;
pub mod naive;

pub use map::{export_map, extract_concept_map, import_json, ConceptMap, EdgeStatus, MapEdge, MapError, MapFormat, MapNode, Side};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Inference(InferenceError),
}

impl From<InferenceError> for QueryError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::UnknownId(id) => QueryError::UnknownId(id),
            other => QueryError::Inference(other),
        }
    }
}

/// One binding: an id tuple and the claims supporting it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Row {
    pub ids: Vec<String>,
    pub claims: Vec<ClaimId>,
}

impl Row {
    pub fn new(ids: Vec<String>, claims: BTreeSet<ClaimId>) -> Self {
        Row {
            ids,
            claims: claims.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultSet {
    pub query: Query,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impact: Option<ImpactReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perspectives: Option<Vec<InferredFact>>,
}

/// Rule parameters a query falls back on when the query text leaves them open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryOptions {
    pub impact_weights: ImpactWeights,
    pub perspective_threshold: f64,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions {
            impact_weights: ImpactWeights::default(),
            perspective_threshold: PerspectiveConfig::default().threshold,
        }
    }
}

impl ResultSet {
    fn rows(query: &Query, mut rows: Vec<Row>) -> Self {
        rows.sort();
        ResultSet {
            query: query.clone(),
            rows,
            impact: None,
            perspectives: None,
        }
    }
}

/// Query with kind and link names resolved through the schema.
pub(crate) fn resolve(kb: &KnowledgeBase, q: &Query) -> Result<Query, QueryError> {
    let need = |id: &str| {
        if kb.contains(id) {
            Ok(())
        } else {
            Err(QueryError::UnknownId(id.to_string()))
        }
    };
    let mut q = q.clone();
    match &mut q {
        Query::Find { kind, link, target, .. } => {
            *kind = kb
                .schema()
                .resolve_kind(kind)
                .ok_or_else(|| QueryError::UnknownKind(kind.clone()))?
                .id
                .clone();
            *link = kb
                .schema()
                .resolve_link(link)
                .ok_or_else(|| QueryError::UnknownLink(link.clone()))?
                .id
                .clone();
            need(target)?;
        }
        Query::Impact { target } | Query::Contradictions { target } | Query::ClaimsAbout { target } => {
            need(target)?
        }
        Query::Applying { method, .. } => need(method)?,
        Query::Perspectives { problem, threshold } => {
            need(problem)?;
            if threshold.is_some_and(|t| !(t > 0.0 && t <= 1.0)) {
                return Err(QueryError::Inference(InferenceError::InvalidParameter(
                    "threshold must be in (0, 1]".into(),
                )));
            }
        }
    }
    Ok(q)
}

pub fn execute(kb: &KnowledgeBase, query: &Query) -> Result<ResultSet, QueryError> {
    execute_with(kb, query, &QueryOptions::default())
}

pub fn execute_with(kb: &KnowledgeBase, query: &Query, opts: &QueryOptions) -> Result<ResultSet, QueryError> {
    let q = resolve(kb, query)?;
    let rows = match &q {
        Query::Find {
            kind,
            link,
            target,
            direct,
        } => {
            let targets = if *direct {
                BTreeSet::from([target.clone()])
            } else {
                extension_family(kb, target)
            };
            let mut hits: BTreeMap<&str, BTreeSet<ClaimId>> = BTreeMap::new();
            for t in &targets {
                for c in kb.claims_to(t).filter(|c| &c.assertion.link == link) {
                    let src = c.assertion.source.as_str();
                    if kb.kind_of(src).is_some_and(|k| kb.schema().is_a(k, kind)) {
                        hits.entry(src).or_default().insert(c.id.clone());
                    }
                }
            }
            hits.into_iter()
                .map(|(n, cs)| Row::new(vec![n.to_string()], cs))
                .collect()
        }
        Query::ClaimsAbout { target } => kb
            .claims_to(target)
            .map(|c| {
                Row::new(
                    vec![c.assertion.source.clone(), c.assertion.link.clone()],
                    BTreeSet::from([c.id.clone()]),
                )
            })
            .collect(),
        Query::Impact { target } => {
            let report = compute_impact(kb, target, opts.impact_weights)?;
            let family = extension_family(kb, target);
            let mut rows = Vec::new();
            for doc in &report.docs.ids {
                let mut claims = BTreeSet::new();
                let described = kb.claims_from(doc).filter(|c| c.assertion.link == DESCRIBES);
                for e in described.map(|c| &c.assertion.target) {
                    for c in kb.claims_from(e) {
                        let l = c.assertion.link.as_str();
                        if (l == USES_APPLIES || l == MODIFIES_EXTENDS) && family.contains(&c.assertion.target) {
                            claims.insert(c.id.clone());
                        }
                    }
                }
                rows.push(Row::new(vec![doc.clone()], claims));
            }
            let mut rs = ResultSet::rows(query, rows);
            rs.impact = Some(report);
            return Ok(rs);
        }
        Query::Applying { method, domains } => {
            let mut by_article: BTreeMap<&str, BTreeSet<ClaimId>> = BTreeMap::new();
            for c in kb.claims_to(method).filter(|c| c.assertion.link == USES_APPLIES) {
                for a in kb.describing_articles(&c.assertion.source) {
                    by_article.entry(&a.id).or_default().insert(c.id.clone());
                }
            }
            let mut rows = Vec::new();
            for d in domains {
                let before = rows.len();
                for (a, cs) in &by_article {
                    if kb.article(a).is_some_and(|art| art.domains.contains(d)) {
                        rows.push(Row::new(vec![d.clone(), a.to_string()], cs.clone()));
                    }
                }
                if rows.len() == before {
                    rows.clear();
                    break;
                }
            }
            rows
        }
        Query::Contradictions { target } => contradictions(kb, target),
        Query::Perspectives { problem, threshold } => {
            let cfg = PerspectiveConfig {
                seed_problem: Some(problem.clone()),
                threshold: threshold.unwrap_or(opts.perspective_threshold),
            };
            let facts = detect_perspectives(kb, &cfg)?;
            let rows = facts
                .iter()
                .map(|f| match &f.fact {
                    Fact::Perspective { authors, .. } => Row {
                        ids: authors.clone(),
                        claims: f.provenance.clone(),
                    },
                    _ => unreachable!("detect_perspectives yields perspectives"),
                })
                .collect();
            let mut rs = ResultSet::rows(query, rows);
            rs.perspectives = Some(facts);
            return Ok(rs);
        }
    };
    Ok(ResultSet::rows(query, rows))
}

/// Articles that build on `target`: some described element reaches it by a
/// uses-applies or modifies-extends path of length at least one.
fn builders(kb: &KnowledgeBase, target: &str) -> BTreeSet<String> {
    let mut reach = BTreeSet::new();
    let mut queue = VecDeque::from([target.to_string()]);
    while let Some(n) = queue.pop_front() {
        for c in kb.claims_to(&n) {
            let l = c.assertion.link.as_str();
            if (l == USES_APPLIES || l == MODIFIES_EXTENDS) && reach.insert(c.assertion.source.clone()) {
                queue.push_back(c.assertion.source.clone());
            }
        }
    }
    reach
        .iter()
        .flat_map(|e| kb.describing_articles(e))
        .map(|a| a.id.clone())
        .collect()
}

fn contradictions(kb: &KnowledgeBase, target: &str) -> Vec<Row> {
    let builders = builders(kb, target);
    let mut pairs: BTreeMap<(String, String), BTreeSet<ClaimId>> = BTreeMap::new();
    for r in kb.claims_with_link(REFUTES) {
        let Some(from) = r.document(kb).filter(|d| builders.contains(*d)) else {
            continue;
        };
        let mut hit = |other: &str, claim: &ClaimId| {
            if other != from && builders.contains(other) {
                let key = if from < other {
                    (from.to_string(), other.to_string())
                } else {
                    (other.to_string(), from.to_string())
                };
                let e = pairs.entry(key).or_default();
                e.insert(r.id.clone());
                e.insert(claim.clone());
            }
        };
        if let Some(c) = kb.claim(&r.assertion.target) {
            if let Some(d) = c.document(kb) {
                hit(d, &c.id);
            }
        }
        for p in kb
            .claims_to(&r.assertion.target)
            .filter(|p| p.assertion.link == PREDICTS_ENVISAGES)
        {
            if let Some(d) = p.document(kb) {
                hit(d, &p.id);
            }
        }
    }
    pairs
        .into_iter()
        .map(|((a, b), cs)| Row::new(vec![a, b], cs))
        .collect()
}
