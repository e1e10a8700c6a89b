//! Text syntax for formulas.
//!
//! ```text
//! formula := quant | iff
//! quant   := ("E" | "A") VAR "." formula
//! iff     := imp ("<->" imp)*          left associative
//! imp     := or ("->" imp)?            right associative
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(" formula ")" | quant | atom
//! atom    := term "=" term | "pi" "(" term ")" "=" term
//! term    := VAR | "R"
//! ```
//!
//! A quantifier body extends as far right as possible. `E`, `A`, `R` and
//! `pi` are reserved; variables are `[A-Za-z_][A-Za-z0-9_']*`.

use std::fmt;

use crate::error::LogicError;
use crate::logic::formula::{Formula, Quantifier, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Exists,
    Forall,
    Root,
    Pi,
    Dot,
    LParen,
    RParen,
    Eq,
    Not,
    And,
    Or,
    Implies,
    Iff,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, message: String| LogicError::Syntax { offset, message };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '=' => Tok::Eq,
            '!' | '~' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '-' if src[i..].starts_with("->") => {
                i += 1;
                Tok::Implies
            }
            '<' if src[i..].starts_with("<->") => {
                i += 2;
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < bytes.len() {
                    let d = bytes[i + 1] as char;
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                match &src[start..=i] {
                    "E" => Tok::Exists,
                    "A" => Tok::Forall,
                    "R" => Tok::Root,
                    "pi" => Tok::Pi,
                    word => Tok::Ident(word.to_string()),
                }
            }
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, LogicError> {
        Err(LogicError::Syntax { offset: self.offset(), message: message.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Exists | Tok::Forall) => self.quant(),
            _ => self.iff(),
        }
    }

    fn quant(&mut self) -> Result<Formula, LogicError> {
        let q = match self.peek() {
            Some(Tok::Exists) => Quantifier::Exists,
            _ => Quantifier::Forall,
        };
        self.pos += 1;
        let var = match self.peek() {
            Some(Tok::Ident(v)) => v.clone(),
            _ => return self.fail("expected a variable after quantifier"),
        };
        self.pos += 1;
        self.expect(Tok::Dot, "`.` after quantified variable")?;
        let body = self.formula()?;
        Ok(Formula::quant(q, var, body))
    }

    fn iff(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.imp()?;
        while self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.imp_or_quant()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp_or_quant(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Exists | Tok::Forall) => self.quant(),
            _ => self.imp(),
        }
    }

    fn imp(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.imp_or_quant()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Exists | Tok::Forall) => self.quant(),
            _ => self.atom(),
        }
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        match self.peek() {
            Some(Tok::Root) => {
                self.pos += 1;
                Ok(Term::Root)
            }
            Some(Tok::Ident(v)) => {
                let t = Term::Var(v.clone());
                self.pos += 1;
                Ok(t)
            }
            _ => self.fail("expected a variable or `R`"),
        }
    }

    fn atom(&mut self) -> Result<Formula, LogicError> {
        if self.peek() == Some(&Tok::Pi) {
            self.pos += 1;
            self.expect(Tok::LParen, "`(` after `pi`")?;
            let child = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Eq, "`=`")?;
            let parent = self.term()?;
            return Ok(Formula::parent_of(child, parent));
        }
        let a = self.term()?;
        self.expect(Tok::Eq, "`=`")?;
        let b = self.term()?;
        Ok(Formula::eq(a, b))
    }
}

/// Parses the text syntax described in the module docs.
pub fn parse_formula(src: &str) -> Result<Formula, LogicError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, len: src.len() };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.fail("unexpected trailing input");
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

// Binary operands are parenthesised whenever they are not atoms or
// negations, which keeps printing unambiguous without a precedence table.
fn operand(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::Eq(..) | Formula::ParentOf { .. } | Formula::Not(_) => write!(out, "{f}"),
        _ => write!(out, "({f})"),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |out: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula| {
            operand(a, out)?;
            write!(out, " {op} ")?;
            operand(b, out)
        };
        match self {
            Formula::Eq(a, b) => write!(out, "{a} = {b}"),
            Formula::ParentOf { child, parent } => write!(out, "pi({child}) = {parent}"),
            Formula::Not(f) => {
                write!(out, "!")?;
                match **f {
                    Formula::Not(_) => write!(out, "{f}"),
                    _ => write!(out, "({f})"),
                }
            }
            Formula::And(a, b) => binary(out, a, "&", b),
            Formula::Or(a, b) => binary(out, a, "|", b),
            Formula::Implies(a, b) => binary(out, a, "->", b),
            Formula::Iff(a, b) => binary(out, a, "<->", b),
            Formula::Quant(q, v, body) => {
                let sym = match q {
                    Quantifier::Exists => "E",
                    Quantifier::Forall => "A",
                };
                write!(out, "{sym} {v} . {body}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atoms() {
        assert_eq!(parse_formula("x = R").unwrap(), Formula::eq(Term::var("x"), Term::Root));
        assert_eq!(parse_formula("pi(y) = x").unwrap(), Formula::parent_of(Term::var("y"), Term::var("x")));
    }

    #[test]
    fn precedence() {
        let f = parse_formula("A x . x = R & x = x | !x = R -> x = x").unwrap();
        let x = || Term::var("x");
        let expected = Formula::forall(
            "x",
            Formula::implies(
                Formula::or(
                    Formula::and(Formula::eq(x(), Term::Root), Formula::eq(x(), x())),
                    Formula::not(Formula::eq(x(), Term::Root)),
                ),
                Formula::eq(x(), x()),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn example_sentence_round_trip() {
        let src = "E x . E y . pi(y) = x & (A z . pi(z) = x -> z = y)";
        let f = parse_formula(src).unwrap();
        assert_eq!(f.qd(), 3);
        assert_eq!(f.aqd_syntactic(), 1);
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn shadowing_renamed_on_parse() {
        let f = parse_formula("E x . E x . x = R").unwrap();
        assert_eq!(f.to_string(), "E x . E x1 . x1 = R");
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_formula("E . x = x"), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_formula("x = "), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_formula("x = y )"), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_formula("x # y"), Err(LogicError::Syntax { offset: 2, .. })));
    }
}
