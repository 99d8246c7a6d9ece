//! Reference evaluator: the same contract as [`super::execute`], computed by
//! whole-KB scans and fixpoints with no use of the adjacency index. Test
//! oracle only.

use std::collections::{BTreeMap, BTreeSet};

use crate::dsl::Query;
use crate::ids::ClaimId;
use crate::inference::impact::Counted;
use crate::inference::{detect_perspectives, Fact, ImpactReport, ImpactWeights, PerspectiveConfig};
use crate::kb::{Claim, KnowledgeBase};
use crate::schema::{ADDRESSES, DESCRIBES, MODIFIES_EXTENDS, PREDICTS_ENVISAGES, REFUTES, USES_APPLIES};

use super::{resolve, QueryError, QueryOptions, ResultSet, Row};

fn scan<'a>(kb: &'a KnowledgeBase, link: &'a str) -> impl Iterator<Item = &'a Claim> + 'a {
    kb.claims().iter().filter(move |c| c.assertion.link == link)
}

/// Everything that reaches `target` by one or more edges with the given links.
fn upstream(kb: &KnowledgeBase, target: &str, links: &[&str]) -> BTreeSet<String> {
    let mut set: BTreeSet<String> = BTreeSet::new();
    loop {
        let mut changed = false;
        for c in kb.claims() {
            let a = &c.assertion;
            if links.contains(&a.link.as_str())
                && (a.target == target || set.contains(&a.target))
                && set.insert(a.source.clone())
            {
                changed = true;
            }
        }
        if !changed {
            return set;
        }
    }
}

fn family(kb: &KnowledgeBase, target: &str) -> BTreeSet<String> {
    let mut f = upstream(kb, target, &[MODIFIES_EXTENDS]);
    f.insert(target.to_string());
    f
}

fn describers(kb: &KnowledgeBase, element: &str) -> BTreeSet<String> {
    scan(kb, DESCRIBES)
        .filter(|c| c.assertion.target == element && kb.article(&c.assertion.source).is_some())
        .map(|c| c.assertion.source.clone())
        .collect()
}

/// The article a claim belongs to, worked out without [`Claim::document`].
fn doc_of(kb: &KnowledgeBase, c: &Claim) -> Option<String> {
    if kb.articles().any(|a| a.id == c.assertion.source) {
        return Some(c.assertion.source.clone());
    }
    match &c.justification {
        crate::kb::Justification::Document(d) => Some(d.clone()),
        crate::kb::Justification::Text(_) => None,
    }
}

fn impact(kb: &KnowledgeBase, target: &str, w: ImpactWeights) -> (ImpactReport, Vec<Row>) {
    let fam = family(kb, target);
    let uses: Vec<&Claim> = kb
        .claims()
        .iter()
        .filter(|c| {
            (c.assertion.link == USES_APPLIES || c.assertion.link == MODIFIES_EXTENDS) && fam.contains(&c.assertion.target)
        })
        .collect();
    let mut docs: BTreeMap<String, BTreeSet<ClaimId>> = BTreeMap::new();
    let mut problems = BTreeSet::new();
    for u in &uses {
        for d in describers(kb, &u.assertion.source) {
            docs.entry(d).or_default().insert(u.id.clone());
        }
        for c in scan(kb, ADDRESSES).filter(|c| c.assertion.source == u.assertion.source) {
            problems.insert(c.assertion.target.clone());
        }
    }
    let domains: BTreeSet<String> = docs
        .keys()
        .flat_map(|d| kb.article(d).into_iter().flat_map(|a| a.domains.iter().cloned()))
        .collect();
    let scalar = w.docs * docs.len() as f64 + w.domains * domains.len() as f64 + w.problems * problems.len() as f64;
    let rows = docs.iter().map(|(d, cs)| Row::new(vec![d.clone()], cs.clone())).collect();
    let report = ImpactReport {
        target: target.to_string(),
        docs: Counted::from(docs.keys().cloned().collect::<BTreeSet<_>>()),
        domains: domains.into(),
        problems: problems.into(),
        weights: w,
        scalar,
    };
    (report, rows)
}

pub fn naive_execute(kb: &KnowledgeBase, query: &Query) -> Result<ResultSet, QueryError> {
    naive_execute_with(kb, query, &QueryOptions::default())
}

pub fn naive_execute_with(kb: &KnowledgeBase, query: &Query, opts: &QueryOptions) -> Result<ResultSet, QueryError> {
    let q = resolve(kb, query)?;
    let mut rs = ResultSet::rows(query, Vec::new());
    let rows: Vec<Row> = match &q {
        Query::Find {
            kind,
            link,
            target,
            direct,
        } => {
            let targets = if *direct {
                BTreeSet::from([target.clone()])
            } else {
                family(kb, target)
            };
            let mut out = Vec::new();
            let sources: BTreeSet<&str> = kb.claims().iter().map(|c| c.assertion.source.as_str()).collect();
            for n in sources {
                let Some(k) = kb.kind_of(n) else { continue };
                if !kb.schema().ancestors(k).any(|a| a == kind) {
                    continue;
                }
                let cs: BTreeSet<ClaimId> = scan(kb, link)
                    .filter(|c| c.assertion.source == n && targets.contains(&c.assertion.target))
                    .map(|c| c.id.clone())
                    .collect();
                if !cs.is_empty() {
                    out.push(Row::new(vec![n.to_string()], cs));
                }
            }
            out
        }
        Query::ClaimsAbout { target } => kb
            .claims()
            .iter()
            .filter(|c| &c.assertion.target == target)
            .map(|c| {
                Row::new(
                    vec![c.assertion.source.clone(), c.assertion.link.clone()],
                    BTreeSet::from([c.id.clone()]),
                )
            })
            .collect(),
        Query::Impact { target } => {
            if kb.concept(target).is_none() {
                return Err(QueryError::UnknownId(target.clone()));
            }
            let (report, rows) = impact(kb, target, opts.impact_weights);
            rs.impact = Some(report);
            rows
        }
        Query::Applying { method, domains } => {
            let mut out = Vec::new();
            for d in domains {
                let mut found = Vec::new();
                for a in kb.articles().filter(|a| a.domains.contains(d)) {
                    let cs: BTreeSet<ClaimId> = scan(kb, USES_APPLIES)
                        .filter(|c| &c.assertion.target == method && describers(kb, &c.assertion.source).contains(&a.id))
                        .map(|c| c.id.clone())
                        .collect();
                    if !cs.is_empty() {
                        found.push(Row::new(vec![d.clone(), a.id.clone()], cs));
                    }
                }
                if found.is_empty() {
                    out.clear();
                    break;
                }
                out.extend(found);
            }
            out
        }
        Query::Contradictions { target } => {
            let builders: BTreeSet<String> = upstream(kb, target, &[USES_APPLIES, MODIFIES_EXTENDS])
                .iter()
                .flat_map(|e| describers(kb, e))
                .collect();
            let mut out = Vec::new();
            let list: Vec<&String> = builders.iter().collect();
            for (i, a) in list.iter().enumerate() {
                for b in &list[i + 1..] {
                    let mut cs = BTreeSet::new();
                    for (x, y) in [(a, b), (b, a)] {
                        for r in scan(kb, REFUTES).filter(|r| doc_of(kb, r).as_ref() == Some(*x)) {
                            for c in kb.claims() {
                                if doc_of(kb, c).as_ref() != Some(*y) {
                                    continue;
                                }
                                let refutes_claim = r.assertion.target == c.id.as_str();
                                let refutes_prediction =
                                    c.assertion.link == PREDICTS_ENVISAGES && c.assertion.target == r.assertion.target;
                                if refutes_claim || refutes_prediction {
                                    cs.insert(r.id.clone());
                                    cs.insert(c.id.clone());
                                }
                            }
                        }
                    }
                    if !cs.is_empty() {
                        out.push(Row::new(vec![a.to_string(), b.to_string()], cs));
                    }
                }
            }
            out
        }
        Query::Perspectives { problem, threshold } => {
            let cfg = PerspectiveConfig {
                seed_problem: Some(problem.clone()),
                threshold: threshold.unwrap_or(opts.perspective_threshold),
            };
            let facts = detect_perspectives(kb, &cfg)?;
            let rows = facts
                .iter()
                .filter_map(|f| match &f.fact {
                    Fact::Perspective { authors, .. } => Some(Row {
                        ids: authors.clone(),
                        claims: f.provenance.clone(),
                    }),
                    _ => None,
                })
                .collect();
            rs.perspectives = Some(facts);
            rows
        }
    };
    rs.rows = rows;
    rs.rows.sort();
    Ok(rs)
}
