//! Node and link kinds of the scholarly network, with endpoint constraints.
//!
//! A registry starts from [`SchemaRegistry::builtin`] and grows additively:
//! kinds are never removed, so claims validated against an older version stay
//! valid against every later one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::canonicalize_id;

/// Root of every contribution-element kind.
pub const ELEMENT_ROOT: &str = "scholarly-contribution-element";
/// Kind used for article records. Articles are not concepts.
pub const ARTICLE: &str = "article";
/// Pseudo-kind admitted in the range of argumentation links.
pub const CLAIM: &str = "claim";

pub const ADDRESSES: &str = "addresses";
pub const USES_APPLIES: &str = "uses-applies";
pub const MODIFIES_EXTENDS: &str = "modifies-extends";
pub const ANALYSES: &str = "analyses";
pub const PREDICTS_ENVISAGES: &str = "predicts-envisages";
pub const SUPPORTS: &str = "supports";
pub const RAISES_ISSUES_WITH: &str = "raises-issues-with";
pub const REFUTES: &str = "refutes";
pub const DESCRIBES: &str = "describes";
pub const SUB_PROBLEM_OF: &str = "sub-problem-of";
pub const VARIATION_ON: &str = "variation-on";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("kind name must not be empty")]
    EmptyName,
    #[error("a kind named `{0}` already exists")]
    DuplicateName(String),
    #[error("unknown parent kind `{0}`")]
    UnknownParent(String),
    #[error("unknown node kind `{0}`")]
    UnknownKind(String),
    #[error("unknown link kind `{0}`")]
    UnknownLink(String),
    #[error("link kind `{0}` needs a non-empty domain and range")]
    EmptyEndpoints(String),
    #[error("alias `{alias}` already names `{existing}`")]
    DuplicateAlias { alias: String, existing: String },
    #[error("{link}: {source_kind} -> {target_kind} not allowed: {reason}")]
    Violation {
        link: String,
        source_kind: String,
        target_kind: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkCategory {
    Argumentation,
    NonArgumentation,
}

impl LinkCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkCategory::Argumentation => "argumentation",
            LinkCategory::NonArgumentation => "non-argumentation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "argumentation" => Some(LinkCategory::Argumentation),
            "non-argumentation" => Some(LinkCategory::NonArgumentation),
            _ => None,
        }
    }
}

impl fmt::Display for LinkCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeKind {
    pub id: String,
    pub name: String,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkKind {
    pub id: String,
    pub name: String,
    pub category: LinkCategory,
    pub domain: BTreeSet<String>,
    pub range: BTreeSet<String>,
    pub aliases: BTreeSet<String>,
    /// Source and target must share their top-level element kind
    /// (software may only modify/extend software, and so on).
    pub same_kind: bool,
}

impl LinkKind {
    pub fn is_argumentation(&self) -> bool {
        self.category == LinkCategory::Argumentation
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaRegistry {
    node_kinds: BTreeMap<String, NodeKind>,
    link_kinds: BTreeMap<String, LinkKind>,
    aliases: BTreeMap<String, String>,
    version: u64,
}

/// The element kinds every registry starts with, in declaration order.
pub const BUILTIN_ELEMENT_KINDS: [(&str, &str); 8] = [
    ("idea", "Idea"),
    ("problem", "Problem"),
    ("theory-model", "Theory/Model"),
    ("methodology", "Methodology"),
    ("software", "Software"),
    ("language", "Language"),
    ("evidence", "Evidence"),
    ("phenomenon", "Phenomenon"),
];

impl SchemaRegistry {
    /// An empty registry holding only the two root kinds.
    pub fn roots_only() -> Self {
        let mut reg = SchemaRegistry {
            node_kinds: BTreeMap::new(),
            link_kinds: BTreeMap::new(),
            aliases: BTreeMap::new(),
            version: 0,
        };
        for (id, name) in [
            (ELEMENT_ROOT, "Scholarly contribution element"),
            (ARTICLE, "Article"),
        ] {
            reg.node_kinds.insert(
                id.to_string(),
                NodeKind {
                    id: id.to_string(),
                    name: name.to_string(),
                    parent: None,
                },
            );
        }
        reg
    }

    /// The built-in scholarly scheme.
    pub fn builtin() -> Self {
        let mut reg = Self::roots_only();
        for (id, name) in BUILTIN_ELEMENT_KINDS {
            reg.node_kinds.insert(
                id.to_string(),
                NodeKind {
                    id: id.to_string(),
                    name: name.to_string(),
                    parent: Some(ELEMENT_ROOT.to_string()),
                },
            );
        }

        let any = || set(&[ELEMENT_ROOT]);
        let non_arg = LinkCategory::NonArgumentation;
        let arg = LinkCategory::Argumentation;
        let links = [
            link(ADDRESSES, "Addresses", non_arg, any(), set(&["problem"]), false),
            link(USES_APPLIES, "Uses/Applies", non_arg, any(), any(), false),
            link(MODIFIES_EXTENDS, "Modifies/Extends", non_arg, any(), any(), true),
            link(ANALYSES, "Analyses", non_arg, any(), any(), false),
            link(
                PREDICTS_ENVISAGES,
                "Predicts/Envisages",
                non_arg,
                any(),
                set(&["software", "phenomenon", "idea"]),
                false,
            ),
            link(SUPPORTS, "Supports", arg, set(&[ELEMENT_ROOT, ARTICLE]), set(&[ELEMENT_ROOT, CLAIM]), false),
            link(
                RAISES_ISSUES_WITH,
                "Raises Issues With",
                arg,
                set(&[ELEMENT_ROOT, ARTICLE]),
                set(&[ELEMENT_ROOT, CLAIM]),
                false,
            ),
            link(REFUTES, "Refutes", arg, set(&[ELEMENT_ROOT, ARTICLE]), set(&[ELEMENT_ROOT, CLAIM]), false),
            link(DESCRIBES, "Describes", non_arg, set(&[ARTICLE]), any(), false),
            link(SUB_PROBLEM_OF, "Sub-Problem of", non_arg, set(&["problem"]), set(&["problem"]), false),
            link(VARIATION_ON, "Variation on", non_arg, any(), any(), true),
        ];
        for l in links {
            reg.link_kinds.insert(l.id.clone(), l);
        }
        let aliases = [
            ("envisages", PREDICTS_ENVISAGES),
            ("predicts", PREDICTS_ENVISAGES),
            ("describes-scholarly-contribution-element", DESCRIBES),
        ];
        for (alias, target) in aliases {
            reg.link_kinds
                .get_mut(target)
                .expect("builtin link")
                .aliases
                .insert(alias.to_string());
            reg.aliases.insert(alias.to_string(), target.to_string());
        }
        reg
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn node_kinds(&self) -> impl Iterator<Item = &NodeKind> {
        self.node_kinds.values()
    }

    pub fn link_kinds(&self) -> impl Iterator<Item = &LinkKind> {
        self.link_kinds.values()
    }

    pub fn node_kind(&self, id: &str) -> Option<&NodeKind> {
        self.node_kinds.get(id)
    }

    pub fn link_kind(&self, id: &str) -> Option<&LinkKind> {
        self.link_kinds.get(id)
    }

    /// Looks a link up by id or alias, after canonicalizing the name.
    pub fn resolve_link(&self, name: &str) -> Option<&LinkKind> {
        let id = canonicalize_id(name).ok()?;
        match self.link_kinds.get(&id) {
            Some(l) => Some(l),
            None => self.aliases.get(&id).and_then(|t| self.link_kinds.get(t)),
        }
    }

    /// Looks a node kind up after canonicalizing the name.
    pub fn resolve_kind(&self, name: &str) -> Option<&NodeKind> {
        let id = canonicalize_id(name).ok()?;
        self.node_kinds.get(&id)
    }

    /// `kind` followed by its ancestors up to the root.
    pub fn ancestors<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let mut next = self.node_kinds.get(kind).map(|k| k.id.as_str());
        std::iter::from_fn(move || {
            let cur = next?;
            next = self.node_kinds.get(cur).and_then(|k| k.parent.as_deref());
            Some(cur)
        })
    }

    /// True when `kind` is `ancestor` or a specialization of it.
    pub fn is_a(&self, kind: &str, ancestor: &str) -> bool {
        self.ancestors(kind).any(|k| k == ancestor)
    }

    /// True for kinds that can type a concept (descendants of the element root).
    pub fn is_element_kind(&self, kind: &str) -> bool {
        self.is_a(kind, ELEMENT_ROOT)
    }

    /// The top-level element kind `kind` specializes, e.g. `software` for a
    /// kind registered under `software`. `None` for the roots themselves.
    pub fn base_kind<'a>(&'a self, kind: &'a str) -> Option<&'a str> {
        let chain: Vec<&str> = self.ancestors(kind).collect();
        match chain.as_slice() {
            [.., base, root] if *root == ELEMENT_ROOT => Some(base),
            _ => None,
        }
    }

    /// Adds a specialization of `parent` (defaulting to the element root).
    pub fn register_node_kind(
        &mut self,
        name: &str,
        parent: Option<&str>,
    ) -> Result<String, SchemaError> {
        let id = canonicalize_id(name).map_err(|_| SchemaError::EmptyName)?;
        if self.node_kinds.contains_key(&id) || id == CLAIM {
            return Err(SchemaError::DuplicateName(id));
        }
        let parent = match parent {
            None => ELEMENT_ROOT.to_string(),
            Some(p) => {
                let pid = canonicalize_id(p).map_err(|_| SchemaError::UnknownParent(p.to_string()))?;
                if !self.is_element_kind(&pid) {
                    return Err(SchemaError::UnknownParent(p.to_string()));
                }
                pid
            }
        };
        self.node_kinds.insert(
            id.clone(),
            NodeKind {
                id: id.clone(),
                name: name.trim().to_string(),
                parent: Some(parent),
            },
        );
        self.version += 1;
        Ok(id)
    }

    /// Adds a community-defined link kind.
    pub fn register_link_kind(&mut self, mut kind: LinkKind) -> Result<String, SchemaError> {
        kind.id = canonicalize_id(&kind.id).map_err(|_| SchemaError::EmptyName)?;
        if self.link_kinds.contains_key(&kind.id) || self.aliases.contains_key(&kind.id) {
            return Err(SchemaError::DuplicateName(kind.id));
        }
        if kind.domain.is_empty() || kind.range.is_empty() {
            return Err(SchemaError::EmptyEndpoints(kind.id));
        }
        for k in kind.domain.iter() {
            if !self.node_kinds.contains_key(k) {
                return Err(SchemaError::UnknownKind(k.clone()));
            }
        }
        for k in kind.range.iter() {
            if k != CLAIM && !self.node_kinds.contains_key(k) {
                return Err(SchemaError::UnknownKind(k.clone()));
            }
        }
        if kind.range.contains(CLAIM) && !kind.is_argumentation() {
            return Err(SchemaError::Violation {
                link: kind.id.clone(),
                source_kind: "-".into(),
                target_kind: CLAIM.into(),
                reason: "only argumentation links may target claims".into(),
            });
        }
        for alias in kind.aliases.iter() {
            if let Some(existing) = self.aliases.get(alias) {
                return Err(SchemaError::DuplicateAlias {
                    alias: alias.clone(),
                    existing: existing.clone(),
                });
            }
            if self.link_kinds.contains_key(alias) || *alias == kind.id {
                return Err(SchemaError::DuplicateAlias {
                    alias: alias.clone(),
                    existing: alias.clone(),
                });
            }
        }
        for alias in kind.aliases.iter() {
            self.aliases.insert(alias.clone(), kind.id.clone());
        }
        let id = kind.id.clone();
        self.link_kinds.insert(id.clone(), kind);
        self.version += 1;
        Ok(id)
    }

    /// Checks that `link` may connect a node of `source_kind` to one of
    /// `target_kind`. Either kind may be `article`; the target may be `claim`.
    pub fn validate_edge(
        &self,
        link: &str,
        source_kind: &str,
        target_kind: &str,
    ) -> Result<(), SchemaError> {
        let lk = self
            .link_kinds
            .get(link)
            .ok_or_else(|| SchemaError::UnknownLink(link.to_string()))?;
        if !self.node_kinds.contains_key(source_kind) {
            return Err(SchemaError::UnknownKind(source_kind.to_string()));
        }
        if target_kind != CLAIM && !self.node_kinds.contains_key(target_kind) {
            return Err(SchemaError::UnknownKind(target_kind.to_string()));
        }
        let violation = |reason: &str| SchemaError::Violation {
            link: link.to_string(),
            source_kind: source_kind.to_string(),
            target_kind: target_kind.to_string(),
            reason: reason.to_string(),
        };

        if !self.ancestors(source_kind).any(|k| lk.domain.contains(k)) {
            return Err(violation("source kind outside the link's domain"));
        }
        let target_ok = if target_kind == CLAIM {
            lk.range.contains(CLAIM)
        } else {
            self.ancestors(target_kind).any(|k| lk.range.contains(k))
        };
        if !target_ok {
            return Err(violation("target kind outside the link's range"));
        }
        if lk.same_kind {
            match (self.base_kind(source_kind), self.base_kind(target_kind)) {
                (Some(a), Some(b)) if a == b => {}
                _ => return Err(violation("source and target must be the same kind")),
            }
        }
        Ok(())
    }

    /// Every kind id referenced by a link kind or parent pointer resolves.
    pub fn is_closed(&self) -> bool {
        let kinds_ok = self.node_kinds.values().all(|k| match &k.parent {
            None => k.id == ELEMENT_ROOT || k.id == ARTICLE,
            Some(p) => self.node_kinds.contains_key(p),
        });
        let links_ok = self.link_kinds.values().all(|l| {
            l.domain.iter().all(|k| self.node_kinds.contains_key(k))
                && l.range
                    .iter()
                    .all(|k| k == CLAIM || self.node_kinds.contains_key(k))
        });
        let aliases_ok = self
            .aliases
            .values()
            .all(|t| self.link_kinds.contains_key(t));
        kinds_ok && links_ok && aliases_ok
    }

    /// Rebuilds a registry from kind definitions (used when loading schema
    /// files). Parents must precede their children.
    pub fn from_kinds(
        nodes: impl IntoIterator<Item = NodeKind>,
        links: impl IntoIterator<Item = LinkKind>,
    ) -> Result<Self, SchemaError> {
        let mut reg = Self::roots_only();
        for node in nodes {
            if reg.node_kinds.get(&node.id) == Some(&node) {
                continue;
            }
            if node.parent.is_none() {
                return Err(SchemaError::UnknownParent(format!("<none> for {}", node.id)));
            }
            if reg.node_kinds.contains_key(&node.id) {
                return Err(SchemaError::DuplicateName(node.id));
            }
            let parent = node.parent.clone().unwrap_or_default();
            if !reg.is_element_kind(&parent) {
                return Err(SchemaError::UnknownParent(parent));
            }
            reg.node_kinds.insert(node.id.clone(), node);
        }
        for l in links {
            reg.register_link_kind(l)?;
        }
        reg.version = 0;
        Ok(reg)
    }
}

impl Default for SchemaRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn link(
    id: &str,
    name: &str,
    category: LinkCategory,
    domain: BTreeSet<String>,
    range: BTreeSet<String>,
    same_kind: bool,
) -> LinkKind {
    LinkKind {
        id: id.to_string(),
        name: name.to_string(),
        category,
        domain,
        range,
        aliases: BTreeSet::new(),
        same_kind,
    }
}
