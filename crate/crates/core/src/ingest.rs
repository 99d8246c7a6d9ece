//! Applying parsed submissions to a knowledge base.
//!
//! A submission is applied to a copy of the KB and only returned when every
//! item validates. In lax mode failing elements and claims are skipped and
//! listed in the report instead; a bad article still rejects the whole
//! submission because its relations depend on it.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::{parse_submission, DslError, Loc, Pos, Submission};
use crate::ids::{canonicalize_id, ClaimId};
use crate::kb::{ArticleMetadata, Assertion, CreatedBy, Justification, KbError, KnowledgeBase, Timestamp};
use crate::schema::DESCRIBES;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl Violation {
    fn at(loc: &Loc, message: impl Into<String>) -> Self {
        let Pos { line, col } = loc.0;
        Violation {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("parse error: {0}")]
    Parse(#[from] DslError),
    #[error("submission rejected: {}", join(.0))]
    Rejected(Vec<Violation>),
}

fn join(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl IngestError {
    pub fn violations(&self) -> Vec<Violation> {
        match self {
            IngestError::Parse(e) => vec![Violation {
                line: e.line,
                col: e.col,
                message: e.message.clone(),
            }],
            IngestError::Rejected(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    /// Log sequence number, when the submission was persisted.
    pub seq: Option<u64>,
    pub articles: Vec<String>,
    /// Concepts created by this submission.
    pub concepts: Vec<String>,
    pub relation_claims: Vec<ClaimId>,
    pub describes_claims: Vec<ClaimId>,
    pub standalone_claims: Vec<ClaimId>,
    /// Claims not already in the knowledge base.
    pub new_claims: usize,
    /// Items dropped in lax mode.
    pub skipped: Vec<Violation>,
}

impl IngestReport {
    pub fn accepted_claims(&self) -> usize {
        self.relation_claims.len() + self.describes_claims.len() + self.standalone_claims.len()
    }
}

fn describe(e: &KbError) -> String {
    match e {
        KbError::UnknownEndpoint(id) => format!("unresolved target `{id}`: declare it in this submission or ingest it first"),
        other => other.to_string(),
    }
}

/// Validates `sub` against `kb` and returns the updated copy.
pub fn apply_submission(
    kb: &KnowledgeBase,
    sub: &Submission,
    timestamp: Timestamp,
    lax: bool,
) -> Result<(KnowledgeBase, IngestReport), IngestError> {
    let mut work = kb.clone();
    let mut report = IngestReport::default();
    let mut violations = Vec::new();

    let article = match &sub.article {
        Some(a) => {
            let id = canonicalize_id(&a.id).map_err(|_| IngestError::Rejected(vec![Violation::at(&a.loc, "empty article id")]))?;
            let authors: BTreeSet<String> = a.authors.iter().filter_map(|x| canonicalize_id(x).ok()).collect();
            Some((a, id, authors.into_iter().collect::<Vec<_>>()))
        }
        None => None,
    };
    let described: BTreeSet<String> = sub
        .article
        .iter()
        .flat_map(|a| a.describes.iter())
        .filter_map(|d| canonicalize_id(d).ok())
        .collect();

    for el in &sub.elements {
        if article.is_none() && !el.relations.is_empty() {
            violations.push(Violation::at(
                &el.loc,
                format!("relations of `{}` need an article to attribute them to", el.id),
            ));
            continue;
        }
        let canonical = canonicalize_id(&el.id).ok();
        let origin = match (&article, &canonical) {
            (Some((_, aid, authors)), Some(c)) if described.contains(c) => {
                CreatedBy::Claim(ClaimId::from_content(authors, aid, DESCRIBES, c))
            }
            _ => CreatedBy::Import,
        };
        let fresh = canonical.as_deref().is_some_and(|c| work.concept(c).is_none());
        match work.intern_concept_with_origin(&el.id, &el.kind, origin) {
            Ok(id) if fresh => report.concepts.push(id),
            Ok(_) => {}
            Err(e) => violations.push(Violation::at(&el.loc, describe(&e))),
        }
    }

    if let Some((decl, id, authors)) = &article {
        let meta = ArticleMetadata {
            id: id.clone(),
            title: decl.title.clone().unwrap_or_default(),
            authors: decl.authors.clone(),
            publication_details: decl.publication_details.clone().unwrap_or_default(),
            url: decl.url.clone(),
            domains: decl.domains.clone(),
            subject_codes: decl.subject_codes.clone(),
            describes: decl.describes.clone(),
        };
        if let Err(e) = work.add_article(&meta, timestamp) {
            violations.push(Violation::at(&decl.loc, describe(&e)));
            return Err(IngestError::Rejected(violations));
        }
        report.articles.push(id.clone());
        for d in &described {
            report.describes_claims.push(ClaimId::from_content(authors, id, DESCRIBES, d));
        }

        for el in &sub.elements {
            for group in &el.relations {
                for t in &group.targets {
                    let assertion = Assertion::new(el.id.clone(), group.link.clone(), t.id.clone());
                    match work.assert_claim(authors, assertion, Justification::Document(id.clone()), timestamp) {
                        Ok(cid) => report.relation_claims.push(cid),
                        Err(e) => violations.push(Violation::at(&t.loc, describe(&e))),
                    }
                }
            }
        }
    }

    for c in &sub.claims {
        let assertion = Assertion::new(c.source.clone(), c.link.clone(), c.target.clone());
        match work.assert_claim(&c.authors, assertion, Justification::Text(c.because.clone()), timestamp) {
            Ok(cid) => report.standalone_claims.push(cid),
            Err(e) => violations.push(Violation::at(&c.loc, describe(&e))),
        }
    }

    if !violations.is_empty() && !lax {
        return Err(IngestError::Rejected(violations));
    }
    report.skipped = violations;
    report.new_claims = work.claims().len() - kb.claims().len();
    Ok((work, report))
}

/// Parses `text` with the KB's schema and applies it.
pub fn ingest_text(
    kb: &KnowledgeBase,
    text: &str,
    timestamp: Timestamp,
    lax: bool,
) -> Result<(KnowledgeBase, IngestReport), IngestError> {
    let sub = parse_submission(text, kb.schema())?;
    apply_submission(kb, &sub, timestamp, lax)
}
