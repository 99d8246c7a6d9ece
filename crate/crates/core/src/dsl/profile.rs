//! Interest-profile documents:
//!
//! ```text
//! (profile schools
//!   (when supports l challenges m min 3)
//!   (when supports m challenges l min 3))
//! ```
//!
//! Each `when` clause lists one or more `LINK TARGET` patterns that the same
//! document must satisfy, then the minimum number of such documents. `LINK`
//! may be `challenges` (refutes or raises-issues-with); `TARGET` may be a
//! `?variable` shared across the whole profile.

use crate::ids::canonicalize_id;
use crate::inference::profile::{Condition, InterestProfile, Pattern, PatternLink, PatternTarget};
use crate::schema::SchemaRegistry;

use super::sexp::{self, Sexp};
use super::{syntax, DslError, ErrorKind};

pub fn parse_profiles(text: &str, schema: &SchemaRegistry) -> Result<Vec<InterestProfile>, DslError> {
    sexp::read_all(text)?
        .iter()
        .map(|form| parse_profile(form, schema))
        .collect()
}

fn parse_profile(form: &Sexp, schema: &SchemaRegistry) -> Result<InterestProfile, DslError> {
    let items = form
        .as_list()
        .ok_or_else(|| syntax(form.pos(), "expected `(profile ...)`"))?;
    if items.first().and_then(Sexp::as_atom) != Some("profile") {
        return Err(syntax(form.pos(), "expected `(profile ...)`"));
    }
    let id_sexp = items
        .get(1)
        .ok_or_else(|| syntax(form.pos(), "profile needs an id"))?;
    let id = id_sexp
        .as_atom()
        .and_then(|a| canonicalize_id(a).ok())
        .ok_or_else(|| syntax(id_sexp.pos(), "invalid profile id"))?;
    let mut conditions = Vec::new();
    for clause in &items[2..] {
        conditions.push(parse_when(clause, schema)?);
    }
    let profile = InterestProfile { id, conditions };
    profile
        .validate()
        .map_err(|e| syntax(form.pos(), e.to_string()))?;
    Ok(profile)
}

fn parse_when(clause: &Sexp, schema: &SchemaRegistry) -> Result<Condition, DslError> {
    let parts = clause
        .as_list()
        .ok_or_else(|| syntax(clause.pos(), "expected `(when ...)`"))?;
    if parts.first().and_then(Sexp::as_atom) != Some("when") {
        return Err(syntax(clause.pos(), "expected `(when ...)`"));
    }
    let body = &parts[1..];
    if body.len() < 4 || body.len() % 2 != 0 {
        return Err(syntax(clause.pos(), "expected `(when LINK TARGET ... min N)`"));
    }
    let (pairs, tail) = body.split_at(body.len() - 2);
    if tail[0].as_atom() != Some("min") {
        return Err(syntax(tail[0].pos(), "expected `min`"));
    }
    let min_count: usize = tail[1]
        .as_atom()
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| syntax(tail[1].pos(), "expected a positive count"))?;

    let mut patterns = Vec::new();
    for pair in pairs.chunks(2) {
        let raw_link = pair[0]
            .as_atom()
            .ok_or_else(|| syntax(pair[0].pos(), "expected a link"))?;
        let link = if raw_link == "challenges" || raw_link == "challenge" {
            PatternLink::Challenges
        } else {
            let l = schema.resolve_link(raw_link).ok_or_else(|| {
                DslError::new(ErrorKind::UnknownLink, pair[0].pos(), format!("unknown link `{raw_link}`"))
            })?;
            PatternLink::Link(l.id.clone())
        };
        let raw_target = pair[1]
            .as_atom()
            .ok_or_else(|| syntax(pair[1].pos(), "expected a target"))?;
        let target = match raw_target.strip_prefix('?') {
            Some(var) => PatternTarget::Var(
                canonicalize_id(var).map_err(|_| syntax(pair[1].pos(), "invalid variable name"))?,
            ),
            None => PatternTarget::Id(
                canonicalize_id(raw_target).map_err(|_| syntax(pair[1].pos(), "invalid target id"))?,
            ),
        };
        patterns.push(Pattern { link, target });
    }
    Ok(Condition { patterns, min_count })
}

pub fn print_profile(p: &InterestProfile) -> String {
    let mut out = format!("(profile {}", p.id);
    for c in &p.conditions {
        out.push_str("\n  (when");
        for pat in &c.patterns {
            let link = match &pat.link {
                PatternLink::Challenges => "challenges",
                PatternLink::Link(l) => l,
            };
            let target = match &pat.target {
                PatternTarget::Id(id) => id.clone(),
                PatternTarget::Var(v) => format!("?{v}"),
            };
            out.push_str(&format!(" {link} {target}"));
        }
        out.push_str(&format!(" min {})", c.min_count));
    }
    out.push_str(")\n");
    out
}
