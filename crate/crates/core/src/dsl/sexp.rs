//! Position-tracking reader for parenthesized symbolic expressions.
//!
//! The reader is iterative and caps nesting at [`MAX_DEPTH`], so hostile
//! input cannot exhaust the stack while reading or dropping the tree.

use super::{DslError, ErrorKind, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Atom { text: String, pos: Pos },
    Str { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom { pos, .. } | Sexp::Str { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    /// Atom or string contents.
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } | Sexp::Str { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            _ => None,
        }
    }
}

pub const MAX_DEPTH: usize = 64;

/// True for characters that may appear in a bare atom.
pub fn is_atom_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';'))
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Reads every top-level expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, DslError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut top = Vec::new();
    // open lists: (start position, items so far)
    let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();

    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        let item = match c {
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            ';' => {
                while let Some(c) = cur.bump() {
                    if c == '\n' {
                        break;
                    }
                }
                continue;
            }
            '(' => {
                cur.bump();
                if stack.len() == MAX_DEPTH {
                    return Err(DslError::new(ErrorKind::Syntax, pos, "nesting too deep"));
                }
                stack.push((pos, Vec::new()));
                continue;
            }
            ')' => {
                cur.bump();
                let Some((start, items)) = stack.pop() else {
                    return Err(DslError::new(ErrorKind::UnbalancedParens, pos, "unexpected `)`"));
                };
                Sexp::List { items, pos: start }
            }
            '"' => {
                cur.bump();
                Sexp::Str {
                    text: read_string(&mut cur, pos)?,
                    pos,
                }
            }
            _ => {
                let mut text = String::new();
                while let Some(c) = cur.peek() {
                    if !is_atom_char(c) {
                        break;
                    }
                    text.push(c);
                    cur.bump();
                }
                Sexp::Atom { text, pos }
            }
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(item),
            None => top.push(item),
        }
    }
    if let Some((start, _)) = stack.pop() {
        return Err(DslError::new(ErrorKind::UnbalancedParens, start, "unclosed `(`"));
    }
    Ok(top)
}

fn read_string(cur: &mut Cursor<'_>, start: Pos) -> Result<String, DslError> {
    let mut out = String::new();
    loop {
        let esc_pos = cur.pos();
        match cur.bump() {
            None => {
                return Err(DslError::new(ErrorKind::Syntax, start, "unterminated string"));
            }
            Some('"') => return Ok(out),
            Some('\\') => match cur.bump() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                Some(other) => {
                    return Err(DslError::new(
                        ErrorKind::Syntax,
                        esc_pos,
                        format!("unknown escape `\\{other}`"),
                    ))
                }
                None => return Err(DslError::new(ErrorKind::Syntax, start, "unterminated string")),
            },
            Some(c) => out.push(c),
        }
    }
}

/// Quotes `s` so that [`read_all`] reads it back unchanged.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
