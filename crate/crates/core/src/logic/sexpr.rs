//! Prefix text format for formulas.
//!
//! ```text
//! formula := "true" | "false"
//!          | "(" "=" var var ")"
//!          | "(" "below" var var depth ")"
//!          | "(" "not" formula ")"
//!          | "(" "and" formula* ")"
//!          | "(" "or" formula* ")"
//!          | "(" "exists" var formula ")"
//!          | "(" "forall" var formula ")"
//!          | "(" relation var* ")"
//! var, relation := [A-Za-z_][A-Za-z0-9_]*   (relation names are not keywords)
//! depth := decimal
//! ```
//!
//! `Display` on [`Formula`] prints this format on one line; parsing the
//! printed text gives back the same tree.

use super::{Formula, LogicError, Var};

const KEYWORDS: &[&str] = &["true", "false", "not", "and", "or", "exists", "forall", "below"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                out.push((i, Tok::Open));
                chars.next();
            }
            ')' => {
                out.push((i, Tok::Close));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            c if c == '=' || c == '_' || c.is_ascii_alphanumeric() => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c == '=' || c == '_' || c.is_ascii_alphanumeric() {
                        word.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((i, Tok::Atom(word)));
            }
            other => return Err(LogicError::Parse { pos: i, msg: format!("unexpected character {other:?}") }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LogicError> {
        let pos = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end);
        Err(LogicError::Parse { pos, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn expect_close(&mut self) -> Result<(), LogicError> {
        match self.peek() {
            Some(Tok::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected ')'"),
        }
    }

    fn var(&mut self) -> Result<Var, LogicError> {
        match self.peek() {
            Some(Tok::Atom(w)) if is_ident(w) && !KEYWORDS.contains(&w.as_str()) => {
                let v = Var(w.clone());
                self.pos += 1;
                Ok(v)
            }
            _ => self.err("expected a variable"),
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        match self.next() {
            Some(Tok::Atom(w)) if w == "true" => Ok(Formula::True),
            Some(Tok::Atom(w)) if w == "false" => Ok(Formula::False),
            Some(Tok::Open) => {
                let head = match self.next() {
                    Some(Tok::Atom(w)) => w,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected an operator after '('");
                    }
                };
                let f = match head.as_str() {
                    "=" => {
                        let a = self.var()?;
                        let b = self.var()?;
                        Formula::Eq { left: a, right: b }
                    }
                    "below" => {
                        let a = self.var()?;
                        let b = self.var()?;
                        let depth = match self.next() {
                            Some(Tok::Atom(d)) => match d.parse::<u32>() {
                                Ok(d) => d,
                                Err(_) => {
                                    self.pos -= 1;
                                    return self.err("expected a depth");
                                }
                            },
                            _ => {
                                self.pos -= 1;
                                return self.err("expected a depth");
                            }
                        };
                        Formula::Below { anchor: a, node: b, depth }
                    }
                    "not" => Formula::Not(Box::new(self.formula()?)),
                    "and" | "or" => {
                        let mut parts = Vec::new();
                        while !matches!(self.peek(), Some(Tok::Close) | None) {
                            parts.push(self.formula()?);
                        }
                        if head == "and" {
                            Formula::And(parts)
                        } else {
                            Formula::Or(parts)
                        }
                    }
                    "exists" | "forall" => {
                        let v = self.var()?;
                        let body = Box::new(self.formula()?);
                        if head == "exists" {
                            Formula::Exists { var: v, body }
                        } else {
                            Formula::Forall { var: v, body }
                        }
                    }
                    name if is_ident(name) && !KEYWORDS.contains(&name) => {
                        let mut args = Vec::new();
                        while matches!(self.peek(), Some(Tok::Atom(_))) {
                            args.push(self.var()?);
                        }
                        Formula::Rel { name: name.to_string(), args }
                    }
                    _ => {
                        self.pos -= 1;
                        return self.err(format!("unknown operator {head:?}"));
                    }
                };
                self.expect_close()?;
                Ok(f)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a formula")
            }
        }
    }
}

fn is_ident(w: &str) -> bool {
    let mut cs = w.chars();
    matches!(cs.next(), Some(c) if c == '_' || c.is_ascii_alphabetic()) && cs.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// Parses the prefix text format.
pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_quantifiers() {
        let f = parse_formula("(exists x (and (Root x) (not (exists y (Edge x y)))))").unwrap();
        assert_eq!(
            f,
            Formula::exists(
                "x",
                Formula::And(vec![Formula::rel1("Root", "x"), Formula::not(Formula::exists("y", Formula::rel2("Edge", "x", "y")))])
            )
        );
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "(forall u (or (= u v) (below v u 3) (U7 u) false (and)))";
        let f = parse_formula(text).unwrap();
        assert_eq!(f.to_string(), text);
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_formula("(exists x)").is_err());
        assert!(parse_formula("(and true) true").is_err());
        assert!(parse_formula("(Edge x and)").is_err());
        assert!(parse_formula("(below x y z)").is_err());
        assert!(parse_formula("x").is_err());
        assert!(parse_formula("(@ x)").is_err());
    }
}
