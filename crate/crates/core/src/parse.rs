//! Text grammar for polynomials.
//!
//! `expr := [sign] term ((+|-) term)*`, `term := factor (* factor)*`,
//! `factor := INT | (element) | VAR [^ INT]`. Whitespace is ignored and the
//! Unicode minus sign is accepted as `-`. Extension-field coefficients are
//! parenthesized generator polynomials, e.g. `(1+2g)`.

use thiserror::Error;

use crate::field::{FieldElement, FieldSpec};
use crate::poly::Poly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {col}: {msg}")]
pub struct ParseError {
    /// 1-based column in the normalized (whitespace-stripped) expression.
    pub col: usize,
    pub msg: String,
}

const MAX_EXPONENT: u64 = 64;

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    field: &'a FieldSpec,
    vars: &'a [String],
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            col: self.pos + 1,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn parse_uint(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a number");
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| ParseError {
            col: start + 1,
            msg: format!("number {text:?} out of range"),
        })
    }

    fn parse_identifier(&mut self) -> String {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// factor := INT | '(' element ')' | VAR ['^' INT]
    /// Returns either a scalar multiplier or a variable power.
    fn parse_factor(&mut self) -> Result<Factor, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.parse_uint()?;
                Ok(Factor::Scalar(self.field.from_int(n as i64)))
            }
            Some('(') => {
                let open = self.pos;
                self.bump();
                let start = self.pos;
                let mut depth = 1;
                while let Some(c) = self.peek() {
                    if c == '(' {
                        depth += 1;
                    } else if c == ')' {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    self.pos += 1;
                }
                if depth != 0 {
                    return Err(ParseError {
                        col: open + 1,
                        msg: "unclosed parenthesis".to_string(),
                    });
                }
                let inner: String = self.chars[start..self.pos].iter().collect();
                self.bump(); // consume ')'
                let value = self.field.parse_element(&inner).map_err(|e| ParseError {
                    col: start + 1,
                    msg: e.to_string(),
                })?;
                Ok(Factor::Scalar(value))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.parse_identifier();
                let Some(var) = self.vars.iter().position(|v| *v == name) else {
                    return Err(ParseError {
                        col: start + 1,
                        msg: format!("undeclared variable {name:?}"),
                    });
                };
                let mut exp = 1u64;
                if self.peek() == Some('^') {
                    self.bump();
                    exp = self.parse_uint()?;
                    if exp == 0 || exp > MAX_EXPONENT {
                        return self.err(format!("exponent must be in 1..={MAX_EXPONENT}"));
                    }
                }
                Ok(Factor::VarPower(var, exp as u16))
            }
            Some(c) => self.err(format!("unexpected character {c:?}")),
            None => self.err("unexpected end of expression"),
        }
    }
}

enum Factor {
    Scalar(FieldElement),
    VarPower(usize, u16),
}

/// Parses a polynomial over `field` in the declared variables.
pub fn parse_poly(field: &FieldSpec, vars: &[String], text: &str) -> Result<Poly, ParseError> {
    // normalize: strip whitespace, map unicode minus to '-'
    let normalized: Vec<char> = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .collect();
    if normalized.is_empty() {
        return Err(ParseError {
            col: 1,
            msg: "empty expression".to_string(),
        });
    }
    let mut cur = Cursor {
        chars: normalized,
        pos: 0,
        field,
        vars,
    };
    let nvars = vars.len();
    let mut terms: Vec<(Vec<u16>, FieldElement)> = Vec::new();
    loop {
        // sign prefix
        let mut negative = false;
        while matches!(cur.peek(), Some('+') | Some('-')) {
            if cur.bump() == Some('-') {
                negative = !negative;
            }
        }
        if cur.peek().is_none() {
            return cur.err("expected a term");
        }
        let mut coeff = if negative {
            field.minus_one()
        } else {
            field.one()
        };
        let mut exps = vec![0u16; nvars];
        loop {
            match cur.parse_factor()? {
                Factor::Scalar(c) => coeff = field.mul(coeff, c),
                Factor::VarPower(v, e) => {
                    let total = exps[v] as u64 + e as u64;
                    if total > MAX_EXPONENT {
                        return cur.err(format!("exponent exceeds {MAX_EXPONENT}"));
                    }
                    exps[v] = total as u16;
                }
            }
            if cur.peek() == Some('*') {
                cur.bump();
                continue;
            }
            break;
        }
        terms.push((exps, coeff));
        match cur.peek() {
            None => break,
            Some('+') | Some('-') => continue,
            Some(c) => return cur.err(format!("unexpected character {c:?}")),
        }
    }
    Poly::from_terms(field, nvars, terms).map_err(|e| ParseError {
        col: 1,
        msg: e.to_string(),
    })
}
