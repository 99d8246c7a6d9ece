//! The knowledge base: interned concepts, article records and the
//! append-only claim store with its adjacency indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ids::{canonicalize_id, ClaimId};
use crate::schema::{self, SchemaError, SchemaRegistry};

/// Caller-supplied logical time. The store never reads the wall clock.
pub type Timestamp = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("name is empty")]
    EmptyName,
    #[error("unknown kind `{0}`")]
    UnknownKind(String),
    #[error("`{0}` is not a contribution-element kind")]
    NotAnElementKind(String),
    #[error("`{id}` already exists as a {existing}, not a {requested}")]
    KindConflict {
        id: String,
        existing: String,
        requested: String,
    },
    #[error("id `{0}` is already used by another record")]
    IdInUse(String),
    #[error("article has no authors")]
    MissingAuthors,
    #[error("claim has no authors")]
    EmptyAuthors,
    #[error("article describes `{0}`, which has not been interned")]
    DanglingElement(String),
    #[error("article `{0}` already exists with different metadata")]
    ArticleConflict(String),
    #[error("schema violation: {0}")]
    Schema(#[from] SchemaError),
    #[error("a claim without a document needs a non-empty textual justification")]
    EmptyJustification,
    #[error("unknown endpoint `{0}`")]
    UnknownEndpoint(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
}

/// Where a concept first came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CreatedBy {
    Claim(ClaimId),
    Import,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub display_name: String,
    pub kind: String,
    pub created_by: CreatedBy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub publication_details: String,
    pub url: Option<String>,
    pub domains: BTreeSet<String>,
    pub subject_codes: BTreeSet<String>,
    pub described_elements: BTreeSet<String>,
}

/// Input to [`KnowledgeBase::add_article`]. Names are canonicalized on insert.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArticleMetadata {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub publication_details: String,
    pub url: Option<String>,
    pub domains: Vec<String>,
    pub subject_codes: Vec<String>,
    pub describes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assertion {
    pub source: String,
    pub link: String,
    pub target: String,
}

impl Assertion {
    pub fn new(source: impl Into<String>, link: impl Into<String>, target: impl Into<String>) -> Self {
        Assertion {
            source: source.into(),
            link: link.into(),
            target: target.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "form", content = "value")]
pub enum Justification {
    Document(String),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: ClaimId,
    pub authors: BTreeSet<String>,
    pub assertion: Assertion,
    pub justification: Justification,
    pub timestamp: Timestamp,
}

impl Claim {
    /// The article that embodies this claim: the source when an article makes
    /// it directly, otherwise the justifying document.
    pub fn document(&self, kb: &KnowledgeBase) -> Option<&str> {
        if kb.article(&self.assertion.source).is_some() {
            return Some(&self.assertion.source);
        }
        match &self.justification {
            Justification::Document(a) => Some(a),
            Justification::Text(_) => None,
        }
    }
}

/// What an id refers to.
#[derive(Debug, Clone, Copy)]
pub enum Node<'a> {
    Concept(&'a Concept),
    Article(&'a Article),
    Claim(&'a Claim),
}

impl<'a> Node<'a> {
    /// Kind used for schema validation: the concept kind, `article` or `claim`.
    pub fn kind(&self) -> &'a str {
        match self {
            Node::Concept(c) => &c.kind,
            Node::Article(_) => schema::ARTICLE,
            Node::Claim(_) => schema::CLAIM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    In,
    Out,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Neighbor {
    pub link: String,
    pub other: String,
    pub claim: ClaimId,
    pub direction: Direction,
}

/// Adjacency maps from node id (or link id) to claim positions, in append order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Index {
    pub by_source: BTreeMap<String, Vec<usize>>,
    pub by_target: BTreeMap<String, Vec<usize>>,
    pub by_link: BTreeMap<String, Vec<usize>>,
}

impl Index {
    fn insert(&mut self, pos: usize, a: &Assertion) {
        self.by_source.entry(a.source.clone()).or_default().push(pos);
        self.by_target.entry(a.target.clone()).or_default().push(pos);
        self.by_link.entry(a.link.clone()).or_default().push(pos);
    }

    fn build(claims: &[Claim]) -> Self {
        let mut idx = Index::default();
        for (pos, c) in claims.iter().enumerate() {
            idx.insert(pos, &c.assertion);
        }
        idx
    }
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    schema: Arc<SchemaRegistry>,
    concepts: BTreeMap<String, Concept>,
    articles: BTreeMap<String, Article>,
    claims: Vec<Claim>,
    claim_pos: HashMap<ClaimId, usize>,
    index: Index,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        Self::new(SchemaRegistry::builtin())
    }
}

impl KnowledgeBase {
    pub fn new(schema: SchemaRegistry) -> Self {
        KnowledgeBase {
            schema: Arc::new(schema),
            concepts: BTreeMap::new(),
            articles: BTreeMap::new(),
            claims: Vec::new(),
            claim_pos: HashMap::new(),
            index: Index::default(),
        }
    }

    pub fn schema(&self) -> &SchemaRegistry {
        &self.schema
    }

    /// Snapshot of the schema that stays valid across later schema mutations.
    pub fn schema_snapshot(&self) -> Arc<SchemaRegistry> {
        Arc::clone(&self.schema)
    }

    pub fn register_node_kind(&mut self, name: &str, parent: Option<&str>) -> Result<String, KbError> {
        Ok(Arc::make_mut(&mut self.schema).register_node_kind(name, parent)?)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn articles(&self) -> impl Iterator<Item = &Article> {
        self.articles.values()
    }

    /// All claims in append order.
    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn article(&self, id: &str) -> Option<&Article> {
        self.articles.get(id)
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        let id = ClaimId::parse(id)?;
        self.claim_pos.get(&id).map(|&p| &self.claims[p])
    }

    pub fn node(&self, id: &str) -> Option<Node<'_>> {
        if let Some(c) = self.concepts.get(id) {
            return Some(Node::Concept(c));
        }
        if let Some(a) = self.articles.get(id) {
            return Some(Node::Article(a));
        }
        self.claim(id).map(Node::Claim)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.node(id).is_some()
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    /// Claims whose assertion starts at `id`, in append order.
    pub fn claims_from(&self, id: &str) -> impl Iterator<Item = &Claim> {
        self.positions(&self.index.by_source, id)
    }

    /// Claims whose assertion ends at `id`, in append order.
    pub fn claims_to(&self, id: &str) -> impl Iterator<Item = &Claim> {
        self.positions(&self.index.by_target, id)
    }

    pub fn claims_with_link(&self, link: &str) -> impl Iterator<Item = &Claim> {
        self.positions(&self.index.by_link, link)
    }

    fn positions<'a>(
        &'a self,
        map: &'a BTreeMap<String, Vec<usize>>,
        key: &str,
    ) -> impl Iterator<Item = &'a Claim> + 'a {
        map.get(key)
            .into_iter()
            .flatten()
            .map(move |&p| &self.claims[p])
    }

    /// Returns the existing concept id when the canonical id is already
    /// interned with the same kind.
    pub fn intern_concept(&mut self, name: &str, kind: &str) -> Result<String, KbError> {
        self.intern_concept_with_origin(name, kind, CreatedBy::Import)
    }

    pub fn intern_concept_with_origin(
        &mut self,
        name: &str,
        kind: &str,
        origin: CreatedBy,
    ) -> Result<String, KbError> {
        let kind_id = canonicalize_id(kind).map_err(|_| KbError::UnknownKind(kind.to_string()))?;
        if self.schema.node_kind(&kind_id).is_none() {
            return Err(KbError::UnknownKind(kind.to_string()));
        }
        if !self.schema.is_element_kind(&kind_id) {
            return Err(KbError::NotAnElementKind(kind_id));
        }
        let id = canonicalize_id(name).map_err(|_| KbError::EmptyName)?;
        if let Some(existing) = self.concepts.get(&id) {
            if existing.kind == kind_id {
                return Ok(id);
            }
            return Err(KbError::KindConflict {
                id,
                existing: existing.kind.clone(),
                requested: kind_id,
            });
        }
        if self.articles.contains_key(&id) || ClaimId::parse(&id).is_some() {
            return Err(KbError::IdInUse(id));
        }
        self.concepts.insert(
            id.clone(),
            Concept {
                id: id.clone(),
                display_name: name.trim().to_string(),
                kind: kind_id,
                created_by: origin,
            },
        );
        Ok(id)
    }

    /// Stores an article and records one `describes` claim per described
    /// element, authored by the article's authors and justified by the article.
    ///
    /// Re-adding an identical article is a no-op.
    pub fn add_article(&mut self, meta: &ArticleMetadata, timestamp: Timestamp) -> Result<String, KbError> {
        let article = self.build_article(meta)?;
        let id = article.id.clone();
        if let Some(existing) = self.articles.get(&id) {
            if *existing == article {
                return Ok(id);
            }
            return Err(KbError::ArticleConflict(id));
        }
        if self.concepts.contains_key(&id) || ClaimId::parse(&id).is_some() {
            return Err(KbError::IdInUse(id));
        }
        let authors = article.authors.clone();
        let described: Vec<String> = article.described_elements.iter().cloned().collect();
        self.articles.insert(id.clone(), article);
        for element in described {
            self.assert_claim(
                &authors,
                Assertion::new(id.clone(), schema::DESCRIBES, element),
                Justification::Document(id.clone()),
                timestamp,
            )?;
        }
        Ok(id)
    }

    /// Canonicalizes and checks article metadata without storing it.
    pub fn build_article(&self, meta: &ArticleMetadata) -> Result<Article, KbError> {
        let id = canonicalize_id(&meta.id).map_err(|_| KbError::EmptyName)?;
        let mut authors: Vec<String> = Vec::new();
        for a in &meta.authors {
            let a = canonicalize_id(a).map_err(|_| KbError::EmptyName)?;
            if !authors.contains(&a) {
                authors.push(a);
            }
        }
        if authors.is_empty() {
            return Err(KbError::MissingAuthors);
        }
        let mut described = BTreeSet::new();
        for e in &meta.describes {
            let e = canonicalize_id(e).map_err(|_| KbError::EmptyName)?;
            if !self.concepts.contains_key(&e) {
                return Err(KbError::DanglingElement(e));
            }
            described.insert(e);
        }
        let domains = meta
            .domains
            .iter()
            .map(|d| canonicalize_id(d).map_err(|_| KbError::EmptyName))
            .collect::<Result<_, _>>()?;
        Ok(Article {
            id,
            title: meta.title.clone(),
            authors,
            publication_details: meta.publication_details.clone(),
            url: meta.url.clone(),
            domains,
            subject_codes: meta.subject_codes.iter().cloned().collect(),
            described_elements: described,
        })
    }

    /// Canonicalizes and validates a claim, returning its id with the
    /// canonical author list and assertion. Nothing is written.
    pub fn check_claim(
        &self,
        authors: &[String],
        assertion: &Assertion,
        justification: &Justification,
    ) -> Result<(ClaimId, Vec<String>, Assertion), KbError> {
        let mut set = BTreeSet::new();
        for a in authors {
            set.insert(canonicalize_id(a).map_err(|_| KbError::EmptyName)?);
        }
        if set.is_empty() {
            return Err(KbError::EmptyAuthors);
        }
        let authors: Vec<String> = set.into_iter().collect();

        let link = self
            .schema
            .resolve_link(&assertion.link)
            .ok_or_else(|| SchemaError::UnknownLink(assertion.link.clone()))?;
        let canon = |s: &str| canonicalize_id(s).map_err(|_| KbError::UnknownEndpoint(s.to_string()));
        let source = canon(&assertion.source)?;
        let target = canon(&assertion.target)?;
        let source_kind = self
            .node(&source)
            .ok_or_else(|| KbError::UnknownEndpoint(source.clone()))?
            .kind();
        let target_kind = self
            .node(&target)
            .ok_or_else(|| KbError::UnknownEndpoint(target.clone()))?
            .kind();
        self.schema.validate_edge(&link.id, source_kind, target_kind)?;

        match justification {
            Justification::Text(t) if t.trim().is_empty() => return Err(KbError::EmptyJustification),
            Justification::Document(d) if !self.articles.contains_key(d) => {
                return Err(KbError::UnknownEndpoint(d.clone()))
            }
            _ => {}
        }
        let assertion = Assertion {
            source,
            link: link.id.clone(),
            target,
        };
        let id = ClaimId::from_content(&authors, &assertion.source, &assertion.link, &assertion.target);
        Ok((id, authors, assertion))
    }

    /// Appends a claim. Re-asserting the same authors and assertion returns
    /// the stored id and keeps the original justification and timestamp.
    pub fn assert_claim(
        &mut self,
        authors: &[String],
        assertion: Assertion,
        justification: Justification,
        timestamp: Timestamp,
    ) -> Result<ClaimId, KbError> {
        let (id, authors, assertion) = self.check_claim(authors, &assertion, &justification)?;
        if self.claim_pos.contains_key(&id) {
            return Ok(id);
        }
        let pos = self.claims.len();
        self.index.insert(pos, &assertion);
        self.claims.push(Claim {
            id: id.clone(),
            authors: authors.into_iter().collect(),
            assertion,
            justification,
            timestamp,
        });
        self.claim_pos.insert(id.clone(), pos);
        Ok(id)
    }

    /// Every claim targeting `target`, oldest first. Contradictory claims are
    /// all returned.
    pub fn claims_about(&self, target: &str) -> Result<Vec<&Claim>, KbError> {
        if !self.contains(target) {
            return Err(KbError::UnknownId(target.to_string()));
        }
        let mut out: Vec<(usize, &Claim)> = self
            .index
            .by_target
            .get(target)
            .into_iter()
            .flatten()
            .map(|&p| (p, &self.claims[p]))
            .collect();
        out.sort_by_key(|(p, c)| (c.timestamp, *p));
        Ok(out.into_iter().map(|(_, c)| c).collect())
    }

    pub fn neighbors(
        &self,
        node: &str,
        direction: Direction,
        links: Option<&BTreeSet<String>>,
    ) -> Result<Vec<Neighbor>, KbError> {
        if !self.contains(node) {
            return Err(KbError::UnknownId(node.to_string()));
        }
        let keep = |c: &Claim| links.is_none_or(|l| l.contains(&c.assertion.link));
        let mut out = Vec::new();
        if matches!(direction, Direction::Out | Direction::Both) {
            out.extend(self.claims_from(node).filter(|c| keep(c)).map(|c| Neighbor {
                link: c.assertion.link.clone(),
                other: c.assertion.target.clone(),
                claim: c.id.clone(),
                direction: Direction::Out,
            }));
        }
        if matches!(direction, Direction::In | Direction::Both) {
            out.extend(self.claims_to(node).filter(|c| keep(c)).map(|c| Neighbor {
                link: c.assertion.link.clone(),
                other: c.assertion.source.clone(),
                claim: c.id.clone(),
                direction: Direction::In,
            }));
        }
        out.sort();
        Ok(out)
    }

    /// Articles that describe `element`, in id order.
    pub fn describing_articles(&self, element: &str) -> Vec<&Article> {
        let mut ids: Vec<&str> = self
            .claims_to(element)
            .filter(|c| c.assertion.link == schema::DESCRIBES)
            .map(|c| c.assertion.source.as_str())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().filter_map(|a| self.articles.get(a)).collect()
    }

    /// Recomputes the indices from the claim list alone.
    pub fn rebuild_index(&self) -> Index {
        Index::build(&self.claims)
    }

    /// Ids referenced by stored records that do not resolve.
    pub fn dangling_ids(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.concepts.values() {
            if self.schema.node_kind(&c.kind).is_none() {
                out.push(c.kind.clone());
            }
        }
        for a in self.articles.values() {
            out.extend(
                a.described_elements
                    .iter()
                    .filter(|e| !self.concepts.contains_key(*e))
                    .cloned(),
            );
        }
        for c in &self.claims {
            for id in [&c.assertion.source, &c.assertion.target] {
                if !self.contains(id) {
                    out.push(id.clone());
                }
            }
            if self.schema.link_kind(&c.assertion.link).is_none() {
                out.push(c.assertion.link.clone());
            }
            if let Justification::Document(d) = &c.justification {
                if !self.articles.contains_key(d) {
                    out.push(d.clone());
                }
            }
        }
        out
    }

    /// SHA-256 over a canonical rendering of schema, concepts, articles and
    /// claims. Equal hashes mean equal knowledge bases.
    pub fn content_hash(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            schema: &'a SchemaRegistry,
            concepts: &'a BTreeMap<String, Concept>,
            articles: &'a BTreeMap<String, Article>,
            claims: &'a [Claim],
        }
        let view = View {
            schema: &self.schema,
            concepts: &self.concepts,
            articles: &self.articles,
            claims: &self.claims,
        };
        let bytes = serde_json::to_vec(&view).expect("knowledge base serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Kind of an id for display: concept kind, `article` or `claim`.
    pub fn kind_of(&self, id: &str) -> Option<&str> {
        self.node(id).map(|n| n.kind())
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.articles.is_empty() && self.claims.is_empty()
    }
}
