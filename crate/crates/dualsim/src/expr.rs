//! Text syntax for rate expressions in configuration files.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' atom)*
//! atom   := number | identifier | '(' expr ')'
//! ```
//!
//! Binary operators are left-associative, `^` included. Identifiers resolve
//! to a species (by name or one-letter symbol) first, then to a parameter.

use dualsim_core::rate::{ParamTable, RateExpr};
use dualsim_core::SpeciesId;
use thiserror::Error;

/// Parse failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    /// Malformed input at a 1-based character column.
    #[error("syntax error at column {column}: {message}")]
    Syntax {
        /// 1-based column of the offending character (one past the end for
        /// unexpected end of input).
        column: usize,
        /// What was expected.
        message: String,
    },
    /// Identifier names neither a species nor a parameter.
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| ExprError::Syntax { column: col, message: format!("malformed number `{s}`") })?;
            out.push((Tok::Num(v), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ExprError::Syntax { column: col, message: format!("unexpected character `{c}`") });
                }
            };
            out.push((tok, col));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    params: &'a ParamTable,
    species: &'a [SpeciesId],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax { column: self.column(), message: message.into() }
    }

    fn expr(&mut self) -> Result<RateExpr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<RateExpr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<RateExpr, ExprError> {
        if self.peek() == Some(&Tok::Op('-')) {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<RateExpr, ExprError> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(&Tok::Op('^')) {
            self.pos += 1;
            lhs = lhs.pow(self.atom()?);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<RateExpr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(RateExpr::constant(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(s) = self.species.iter().position(|s| s.matches(&name)) {
                    Ok(RateExpr::count(s))
                } else if let Some(slot) = self.params.index_of(&name) {
                    Ok(RateExpr::param(slot))
                } else {
                    Err(ExprError::UnboundIdentifier(name))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(self.error("expected a number, identifier or `(`")),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

/// Parse `text` against the declared parameters and species.
pub fn parse_rate_expr(text: &str, params: &ParamTable, species: &[SpeciesId]) -> Result<RateExpr, ExprError> {
    let toks = tokenize(text)?;
    let end_col = text.chars().count() + 1;
    let mut p = Parser { toks, pos: 0, end_col, params, species };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}
