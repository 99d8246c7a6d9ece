//! One-line structural queries.
//!
//! ```text
//! find KIND where LINK ID [direct]
//! impact ID
//! contradictions about ID
//! applying ID to ID+
//! perspectives on ID [threshold FLOAT]
//! claims about ID
//! ```

use std::fmt;

use serde::Serialize;

use crate::ids::canonicalize_id;

use super::{syntax, DslError, ErrorKind, Pos};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Query {
    /// Nodes of `kind` bearing `link` to `target`, or (unless `direct`) to
    /// anything that modifies/extends `target` transitively.
    Find {
        kind: String,
        link: String,
        target: String,
        direct: bool,
    },
    Impact {
        target: String,
    },
    Contradictions {
        target: String,
    },
    Applying {
        method: String,
        domains: Vec<String>,
    },
    Perspectives {
        problem: String,
        threshold: Option<f64>,
    },
    ClaimsAbout {
        target: String,
    },
}

impl Query {
    pub fn variant(&self) -> &'static str {
        match self {
            Query::Find { .. } => "find",
            Query::Impact { .. } => "impact",
            Query::Contradictions { .. } => "contradictions",
            Query::Applying { .. } => "applying",
            Query::Perspectives { .. } => "perspectives",
            Query::ClaimsAbout { .. } => "claims-about",
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Find {
                kind,
                link,
                target,
                direct,
            } => {
                write!(f, "find {kind} where {link} {target}")?;
                if *direct {
                    f.write_str(" direct")?;
                }
                Ok(())
            }
            Query::Impact { target } => write!(f, "impact {target}"),
            Query::Contradictions { target } => write!(f, "contradictions about {target}"),
            Query::Applying { method, domains } => {
                write!(f, "applying {method} to {}", domains.join(" "))
            }
            Query::Perspectives { problem, threshold } => {
                write!(f, "perspectives on {problem}")?;
                if let Some(t) = threshold {
                    write!(f, " threshold {t}")?;
                }
                Ok(())
            }
            Query::ClaimsAbout { target } => write!(f, "claims about {target}"),
        }
    }
}

struct Tokens<'a> {
    toks: Vec<(Pos, &'a str)>,
    next: usize,
    end: Pos,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut toks = Vec::new();
        let mut start: Option<(usize, usize)> = None;
        let mut col = 0;
        for (col0, (byte, ch)) in text.char_indices().enumerate() {
            col = col0 + 1;
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some((byte, col)),
                (true, Some((b, c))) => {
                    toks.push((Pos::new(1, c), &text[b..byte]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some((b, c)) = start {
            toks.push((Pos::new(1, c), &text[b..]));
        }
        Tokens {
            toks,
            next: 0,
            end: Pos::new(1, col + 1),
        }
    }

    fn peek(&self) -> Option<(Pos, &'a str)> {
        self.toks.get(self.next).copied()
    }

    fn take(&mut self, what: &str) -> Result<(Pos, &'a str), DslError> {
        let t = self
            .peek()
            .ok_or_else(|| syntax(self.end, format!("expected {what}")))?;
        self.next += 1;
        Ok(t)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        let (pos, t) = self.take(&format!("`{kw}`"))?;
        if t.eq_ignore_ascii_case(kw) {
            Ok(())
        } else {
            Err(syntax(pos, format!("expected `{kw}`, found `{t}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, DslError> {
        let (pos, t) = self.take(what)?;
        canonicalize_id(t).map_err(|_| syntax(pos, format!("`{t}` is not a valid identifier")))
    }

    fn finish(&self) -> Result<(), DslError> {
        match self.peek() {
            None => Ok(()),
            Some((pos, t)) => Err(syntax(pos, format!("unexpected `{t}`"))),
        }
    }
}

pub fn parse_query(text: &str) -> Result<Query, DslError> {
    if text.trim_end().contains('\n') {
        return Err(syntax(Pos::new(1, 1), "one query per line"));
    }
    let mut t = Tokens::new(text.trim_end());
    let (pos, head) = t
        .peek()
        .ok_or_else(|| syntax(Pos::new(1, 1), "empty query"))?;
    t.next += 1;
    let q = match head.to_ascii_lowercase().as_str() {
        "find" => {
            let kind = t.ident("a node kind")?;
            t.keyword("where")?;
            let link = t.ident("a link")?;
            let target = t.ident("a target id")?;
            let direct = match t.peek() {
                Some((_, w)) if w.eq_ignore_ascii_case("direct") => {
                    t.next += 1;
                    true
                }
                _ => false,
            };
            Query::Find {
                kind,
                link,
                target,
                direct,
            }
        }
        "impact" => Query::Impact {
            target: t.ident("a target id")?,
        },
        "contradictions" => {
            t.keyword("about")?;
            Query::Contradictions {
                target: t.ident("a target id")?,
            }
        }
        "applying" => {
            let method = t.ident("a method id")?;
            t.keyword("to")?;
            let mut domains = vec![t.ident("a domain")?];
            while t.peek().is_some() {
                domains.push(t.ident("a domain")?);
            }
            Query::Applying { method, domains }
        }
        "perspectives" => {
            t.keyword("on")?;
            let problem = t.ident("a problem id")?;
            let threshold = match t.peek() {
                None => None,
                Some(_) => {
                    t.keyword("threshold")?;
                    let (pos, raw) = t.take("a number")?;
                    let v: f64 = raw
                        .parse()
                        .map_err(|_| syntax(pos, format!("`{raw}` is not a number")))?;
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(syntax(pos, "threshold must be in (0, 1]"));
                    }
                    Some(v)
                }
            };
            Query::Perspectives { problem, threshold }
        }
        "claims" => {
            t.keyword("about")?;
            Query::ClaimsAbout {
                target: t.ident("a target id")?,
            }
        }
        other => {
            return Err(DslError::new(
                ErrorKind::UnknownVariant,
                pos,
                format!("unknown query `{other}`"),
            ))
        }
    };
    t.finish()?;
    Ok(q)
}
