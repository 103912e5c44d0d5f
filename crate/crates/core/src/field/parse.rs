//! Recursive-descent reader for the scalar grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ('+'|'-') factor | base ('^' ('+'|'-')? integer)?
//! base   := integer | symbol | '(' expr ')'
//! ```
//!
//! Rational literals `p/q` fall out of the `term` rule. Whitespace is ignored.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Domain, FieldError, Scalar};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, FieldError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(FieldError::Syntax { position: i, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    domain: &'a Domain,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn eat_op(&mut self, ops: &str) -> Option<char> {
        match self.peek() {
            Some(Tok::Op(c)) if ops.contains(*c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn error(&self, message: &str) -> FieldError {
        FieldError::Syntax { position: self.offset(), message: message.to_string() }
    }

    fn expr(&mut self) -> Result<Scalar, FieldError> {
        let mut acc = self.term()?;
        while let Some(op) = self.eat_op("+-") {
            let rhs = self.term()?;
            acc = if op == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scalar, FieldError> {
        let mut acc = self.factor()?;
        while let Some(op) = self.eat_op("*/") {
            let rhs = self.factor()?;
            acc = if op == '*' { &acc * &rhs } else { acc.try_div(&rhs)? };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar, FieldError> {
        if let Some(op) = self.eat_op("+-") {
            let inner = self.factor()?;
            return Ok(if op == '-' { -inner } else { inner });
        }
        let base = self.base()?;
        if self.eat_op("^").is_some() {
            let negative = self.eat_op("+-") == Some('-');
            let at = self.offset();
            let Some(Tok::Int(n)) = self.peek().cloned() else {
                return Err(self.error("expected integer exponent"));
            };
            self.pos += 1;
            let e: i64 = i64::try_from(n)
                .ok()
                .filter(|e| *e <= 4096)
                .ok_or(FieldError::Syntax { position: at, message: "exponent too large".into() })?;
            return base.pow(if negative { -e } else { e });
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Scalar, FieldError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(self.domain.from_rational(BigRational::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                self.domain.lookup_symbol(&name).ok_or(FieldError::UnknownSymbol { symbol: name, position: at })
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.eat_op(")").is_none() {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(_) => Err(self.error("expected a number, symbol or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

pub(super) fn parse(text: &str, domain: &Domain) -> Result<Scalar, FieldError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), domain };
    let value = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(value)
}
