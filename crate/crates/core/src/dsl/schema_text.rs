//! Schema documents, one form per kind:
//!
//! ```text
//! (node-kind idea (name "Idea") (parent scholarly-contribution-element))
//! (link-kind addresses (name "Addresses") (category non-argumentation)
//!   (domain scholarly-contribution-element) (range problem))
//! ```
//!
//! Optional link clauses: `(alias ID+)` and `(same-kind)`.

use std::collections::BTreeSet;

use crate::schema::{LinkCategory, LinkKind, NodeKind, SchemaRegistry};

use super::sexp::{self, quote, Sexp};
use super::{syntax, DslError, ErrorKind};

pub fn print_schema(reg: &SchemaRegistry) -> String {
    let mut kinds: Vec<&NodeKind> = reg.node_kinds().collect();
    kinds.sort_by_key(|k| (reg.ancestors(&k.id).count(), k.id.as_str()));
    let mut out = String::new();
    for k in kinds {
        out.push_str(&format!("(node-kind {} (name {})", k.id, quote(&k.name)));
        if let Some(p) = &k.parent {
            out.push_str(&format!(" (parent {p})"));
        }
        out.push_str(")\n");
    }
    for l in reg.link_kinds() {
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
        out.push_str(&format!(
            "(link-kind {} (name {}) (category {})\n  (domain {}) (range {})",
            l.id,
            quote(&l.name),
            l.category,
            join(&l.domain),
            join(&l.range)
        ));
        if !l.aliases.is_empty() {
            out.push_str(&format!(" (alias {})", join(&l.aliases)));
        }
        if l.same_kind {
            out.push_str(" (same-kind)");
        }
        out.push_str(")\n");
    }
    out
}

pub fn parse_schema(text: &str) -> Result<SchemaRegistry, DslError> {
    let forms = sexp::read_all(text)?;
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for form in &forms {
        let items = form
            .as_list()
            .ok_or_else(|| syntax(form.pos(), "expected a kind form"))?;
        let head = items.first().and_then(Sexp::as_atom);
        let id = items
            .get(1)
            .and_then(Sexp::as_atom)
            .ok_or_else(|| syntax(form.pos(), "kind form needs an id"))?
            .to_string();
        match head {
            Some("node-kind") => {
                let mut node = NodeKind {
                    name: id.clone(),
                    id,
                    parent: None,
                };
                for clause in &items[2..] {
                    let (key, vals) = clause_parts(clause)?;
                    match (key, vals) {
                        ("name", [v]) => node.name = text_of(v)?,
                        ("parent", [v]) => node.parent = Some(text_of(v)?),
                        _ => return Err(syntax(clause.pos(), format!("unexpected node-kind clause `{key}`"))),
                    }
                }
                nodes.push(node);
            }
            Some("link-kind") => {
                let mut link = LinkKind {
                    name: id.clone(),
                    id,
                    category: LinkCategory::NonArgumentation,
                    domain: BTreeSet::new(),
                    range: BTreeSet::new(),
                    aliases: BTreeSet::new(),
                    same_kind: false,
                };
                for clause in &items[2..] {
                    let (key, vals) = clause_parts(clause)?;
                    match key {
                        "name" if vals.len() == 1 => link.name = text_of(&vals[0])?,
                        "category" if vals.len() == 1 => {
                            let c = text_of(&vals[0])?;
                            link.category = LinkCategory::parse(&c)
                                .ok_or_else(|| syntax(vals[0].pos(), format!("unknown category `{c}`")))?;
                        }
                        "domain" => link.domain = texts(vals)?,
                        "range" => link.range = texts(vals)?,
                        "alias" => link.aliases = texts(vals)?,
                        "same-kind" if vals.is_empty() => link.same_kind = true,
                        _ => return Err(syntax(clause.pos(), format!("unexpected link-kind clause `{key}`"))),
                    }
                }
                links.push(link);
            }
            _ => return Err(syntax(form.pos(), "expected `node-kind` or `link-kind`")),
        }
    }
    let first = forms.first().map(|f| f.pos()).unwrap_or_default();
    SchemaRegistry::from_kinds(nodes, links)
        .map_err(|e| DslError::new(ErrorKind::UnknownKind, first, e.to_string()))
}

fn clause_parts(clause: &Sexp) -> Result<(&str, &[Sexp]), DslError> {
    let parts = clause
        .as_list()
        .ok_or_else(|| syntax(clause.pos(), "expected a clause"))?;
    let key = parts
        .first()
        .and_then(Sexp::as_atom)
        .ok_or_else(|| syntax(clause.pos(), "clause needs a keyword"))?;
    Ok((key, &parts[1..]))
}

fn text_of(s: &Sexp) -> Result<String, DslError> {
    s.as_text()
        .map(str::to_string)
        .ok_or_else(|| syntax(s.pos(), "expected a value"))
}

fn texts(vals: &[Sexp]) -> Result<BTreeSet<String>, DslError> {
    vals.iter().map(text_of).collect()
}
