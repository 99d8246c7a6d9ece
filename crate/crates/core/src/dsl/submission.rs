//! The `.scl` submission format.
//!
//! ```text
//! submission := form*            form := article | element | claim
//! article    := "(article" ID field* ")"     field := "(" KEY atom+ ")"
//! element    := "(" KIND ID relation* ")"    relation := "(" LINK ID+ ")"
//! claim      := "(claim (by" ID+ ") (assert" ID LINK ID ") (because" STRING "))"
//! ```
//!
//! Parsing normalizes relation groups (one group per link, links and targets
//! sorted), so `parse(print(s)) == s` for every parsed `s`.

use std::fmt::Write as _;

use crate::ids::canonicalize_id;
use crate::schema::SchemaRegistry;

use super::sexp::{self, quote, Sexp};
use super::{syntax, DslError, ErrorKind, Loc, Pos};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Submission {
    pub article: Option<ArticleDecl>,
    pub elements: Vec<ElementDecl>,
    pub claims: Vec<ClaimDecl>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArticleDecl {
    pub id: String,
    pub title: Option<String>,
    pub authors: Vec<String>,
    pub publication_details: Option<String>,
    pub url: Option<String>,
    pub domains: Vec<String>,
    pub subject_codes: Vec<String>,
    pub describes: Vec<String>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementDecl {
    /// Canonical node-kind id.
    pub kind: String,
    /// Identifier as written; canonicalized at ingest.
    pub id: String,
    pub relations: Vec<RelationGroup>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationGroup {
    /// Canonical link id (aliases already resolved).
    pub link: String,
    pub targets: Vec<Target>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub id: String,
    pub loc: Loc,
}

impl Target {
    pub fn new(id: impl Into<String>) -> Self {
        Target {
            id: id.into(),
            loc: Loc::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimDecl {
    pub authors: Vec<String>,
    pub source: String,
    pub link: String,
    pub target: String,
    pub because: String,
    pub loc: Loc,
}

impl Submission {
    pub fn is_empty(&self) -> bool {
        self.article.is_none() && self.elements.is_empty() && self.claims.is_empty()
    }

    /// Merges relation groups per link and sorts links and targets.
    pub fn normalize(&mut self) {
        for el in &mut self.elements {
            let mut groups: Vec<RelationGroup> = Vec::new();
            for g in el.relations.drain(..) {
                match groups.iter_mut().find(|x| x.link == g.link) {
                    Some(existing) => existing.targets.extend(g.targets),
                    None => groups.push(g),
                }
            }
            for g in &mut groups {
                g.targets.sort_by(|a, b| target_key(&a.id).cmp(&target_key(&b.id)));
                g.targets.dedup_by(|a, b| a.id == b.id);
            }
            groups.retain(|g| !g.targets.is_empty());
            groups.sort_by(|a, b| a.link.cmp(&b.link));
            el.relations = groups;
        }
    }
}

fn target_key(raw: &str) -> (String, &str) {
    (canonicalize_id(raw).unwrap_or_default(), raw)
}

/// Field keys accepted inside an article form, with their aliases.
fn article_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "has-title" => "has-title",
        "has-author" => "has-author",
        "publication-details" => "publication-details",
        "has-url" => "has-url",
        "concerns-domain" => "concerns-domain",
        "subject-code" | "acm-ccs" => "subject-code",
        "describes" | "describes-scholarly-contribution-element" => "describes",
        _ => return None,
    })
}

pub fn parse_submission(text: &str, schema: &SchemaRegistry) -> Result<Submission, DslError> {
    let forms = sexp::read_all(text)?;
    let mut sub = Submission::default();
    for form in &forms {
        let Some(items) = form.as_list() else {
            return Err(syntax(form.pos(), "expected a parenthesized form"));
        };
        let Some(head) = items.first() else {
            return Err(syntax(form.pos(), "empty form"));
        };
        let head_text = head
            .as_atom()
            .ok_or_else(|| syntax(head.pos(), "form must start with a keyword"))?;
        match head_text {
            "article" => {
                if sub.article.is_some() {
                    return Err(syntax(form.pos(), "only one article per submission"));
                }
                sub.article = Some(parse_article(items, form.pos())?);
            }
            "claim" => sub.claims.push(parse_claim(items, form.pos(), schema)?),
            _ => sub.elements.push(parse_element(items, form.pos(), schema)?),
        }
    }
    sub.normalize();
    Ok(sub)
}

fn ident(s: &Sexp, what: &str) -> Result<String, DslError> {
    let text = s
        .as_atom()
        .ok_or_else(|| syntax(s.pos(), format!("expected {what} identifier")))?;
    if canonicalize_id(text).is_err() {
        return Err(syntax(s.pos(), format!("`{text}` is not a valid identifier")));
    }
    Ok(text.to_string())
}

fn parse_article(items: &[Sexp], pos: Pos) -> Result<ArticleDecl, DslError> {
    let id = ident(
        items.get(1).ok_or_else(|| syntax(pos, "article needs an id"))?,
        "article",
    )?;
    let mut art = ArticleDecl {
        id,
        loc: Loc(pos),
        ..Default::default()
    };
    for field in &items[2..] {
        let parts = field
            .as_list()
            .ok_or_else(|| syntax(field.pos(), "expected an article field"))?;
        let key_sexp = parts
            .first()
            .ok_or_else(|| syntax(field.pos(), "empty article field"))?;
        let raw_key = key_sexp
            .as_atom()
            .ok_or_else(|| syntax(key_sexp.pos(), "expected a field name"))?;
        let key = article_key(raw_key)
            .ok_or_else(|| syntax(key_sexp.pos(), format!("unknown article field `{raw_key}`")))?;
        let values = &parts[1..];
        if values.is_empty() {
            return Err(syntax(field.pos(), format!("field `{key}` needs a value")));
        }
        let single = |slot: &mut Option<String>| -> Result<(), DslError> {
            if slot.is_some() {
                return Err(syntax(field.pos(), format!("duplicate field `{key}`")));
            }
            if values.len() != 1 {
                return Err(syntax(values[1].pos(), format!("field `{key}` takes one value")));
            }
            let v = values[0]
                .as_text()
                .ok_or_else(|| syntax(values[0].pos(), "expected a string"))?;
            *slot = Some(v.to_string());
            Ok(())
        };
        let idents = |out: &mut Vec<String>| -> Result<(), DslError> {
            for v in values {
                out.push(ident(v, "an")?);
            }
            Ok(())
        };
        match key {
            "has-title" => single(&mut art.title)?,
            "publication-details" => single(&mut art.publication_details)?,
            "has-url" => single(&mut art.url)?,
            "has-author" => idents(&mut art.authors)?,
            "concerns-domain" => idents(&mut art.domains)?,
            "describes" => idents(&mut art.describes)?,
            "subject-code" => {
                for v in values {
                    let t = v
                        .as_text()
                        .ok_or_else(|| syntax(v.pos(), "expected a subject code"))?;
                    art.subject_codes.push(t.to_string());
                }
            }
            _ => unreachable!("article_key covers every key"),
        }
    }
    Ok(art)
}

fn parse_element(items: &[Sexp], pos: Pos, schema: &SchemaRegistry) -> Result<ElementDecl, DslError> {
    let head = &items[0];
    let raw_kind = head.as_atom().unwrap_or_default();
    let kind = schema
        .resolve_kind(raw_kind)
        .filter(|k| schema.is_element_kind(&k.id))
        .ok_or_else(|| {
            DslError::new(ErrorKind::UnknownKind, head.pos(), format!("unknown element kind `{raw_kind}`"))
        })?;
    let id = ident(
        items.get(1).ok_or_else(|| syntax(pos, "element needs an id"))?,
        "an element",
    )?;
    let mut relations = Vec::new();
    for rel in &items[2..] {
        let parts = rel
            .as_list()
            .ok_or_else(|| syntax(rel.pos(), "expected a relation group"))?;
        let link_sexp = parts
            .first()
            .ok_or_else(|| syntax(rel.pos(), "empty relation group"))?;
        let raw_link = link_sexp
            .as_atom()
            .ok_or_else(|| syntax(link_sexp.pos(), "expected a link name"))?;
        let link = schema.resolve_link(raw_link).ok_or_else(|| {
            DslError::new(ErrorKind::UnknownLink, link_sexp.pos(), format!("unknown link `{raw_link}`"))
        })?;
        if parts.len() < 2 {
            return Err(syntax(rel.pos(), format!("relation `{raw_link}` needs a target")));
        }
        let targets = parts[1..]
            .iter()
            .map(|t| {
                Ok(Target {
                    id: ident(t, "a target")?,
                    loc: Loc(t.pos()),
                })
            })
            .collect::<Result<_, DslError>>()?;
        relations.push(RelationGroup {
            link: link.id.clone(),
            targets,
        });
    }
    Ok(ElementDecl {
        kind: kind.id.clone(),
        id,
        relations,
        loc: Loc(pos),
    })
}

fn keyed<'a>(s: Option<&'a Sexp>, key: &str, pos: Pos) -> Result<&'a [Sexp], DslError> {
    let s = s.ok_or_else(|| syntax(pos, format!("claim is missing `({key} ...)`")))?;
    let parts = s
        .as_list()
        .ok_or_else(|| syntax(s.pos(), format!("expected `({key} ...)`")))?;
    match parts.first().and_then(Sexp::as_atom) {
        Some(k) if k == key => Ok(&parts[1..]),
        _ => Err(syntax(s.pos(), format!("expected `({key} ...)`"))),
    }
}

fn parse_claim(items: &[Sexp], pos: Pos, schema: &SchemaRegistry) -> Result<ClaimDecl, DslError> {
    if items.len() > 4 {
        return Err(syntax(items[4].pos(), "unexpected item after `(because ...)`"));
    }
    let by = keyed(items.get(1), "by", pos)?;
    if by.is_empty() {
        return Err(syntax(items[1].pos(), "claim needs at least one author"));
    }
    let authors = by.iter().map(|a| ident(a, "an author")).collect::<Result<_, _>>()?;

    let assert = keyed(items.get(2), "assert", pos)?;
    if assert.len() != 3 {
        return Err(syntax(items[2].pos(), "expected `(assert SOURCE LINK TARGET)`"));
    }
    let source = ident(&assert[0], "a source")?;
    let raw_link = assert[1]
        .as_atom()
        .ok_or_else(|| syntax(assert[1].pos(), "expected a link name"))?;
    let link = schema.resolve_link(raw_link).ok_or_else(|| {
        DslError::new(ErrorKind::UnknownLink, assert[1].pos(), format!("unknown link `{raw_link}`"))
    })?;
    let target = ident(&assert[2], "a target")?;

    let because = keyed(items.get(3), "because", pos)?;
    let text = match because {
        [Sexp::Str { text, .. }] => text.clone(),
        _ => return Err(syntax(items[3].pos(), "expected `(because \"...\")`")),
    };
    Ok(ClaimDecl {
        authors,
        source,
        link: link.id.clone(),
        target,
        because: text,
        loc: Loc(pos),
    })
}

/// Canonical text: two-space indentation, one relation group per line,
/// relations sorted by link then target, forms separated by blank lines.
pub fn print_submission(sub: &Submission) -> String {
    let mut forms: Vec<String> = Vec::new();
    if let Some(a) = &sub.article {
        let mut s = format!("(article {}", a.id);
        let mut line = |body: String| {
            let _ = write!(s, "\n  ({body})");
        };
        if let Some(t) = &a.title {
            line(format!("has-title {}", quote(t)));
        }
        if !a.authors.is_empty() {
            line(format!("has-author {}", a.authors.join(" ")));
        }
        if let Some(p) = &a.publication_details {
            line(format!("publication-details {}", quote(p)));
        }
        if let Some(u) = &a.url {
            line(format!("has-url {}", quote(u)));
        }
        if !a.domains.is_empty() {
            line(format!("concerns-domain {}", a.domains.join(" ")));
        }
        if !a.subject_codes.is_empty() {
            let codes: Vec<String> = a.subject_codes.iter().map(|c| quote(c)).collect();
            line(format!("subject-code {}", codes.join(" ")));
        }
        if !a.describes.is_empty() {
            line(format!("describes {}", a.describes.join(" ")));
        }
        s.push(')');
        forms.push(s);
    }
    for el in &sub.elements {
        let mut groups = el.relations.clone();
        groups.sort_by(|a, b| a.link.cmp(&b.link));
        let mut s = format!("({} {}", el.kind, el.id);
        for g in &groups {
            let mut targets: Vec<&str> = g.targets.iter().map(|t| t.id.as_str()).collect();
            targets.sort_by_key(|t| target_key(t));
            let _ = write!(s, "\n  ({} {})", g.link, targets.join(" "));
        }
        s.push(')');
        forms.push(s);
    }
    for c in &sub.claims {
        forms.push(format!(
            "(claim (by {}) (assert {} {} {}) (because {}))",
            c.authors.join(" "),
            c.source,
            c.link,
            c.target,
            quote(&c.because)
        ));
    }
    let mut out = forms.join("\n\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}
