//! Group ring element literals such as `3*t^2 - g*t^-1 + 1`.
//!
//! A literal is a signed sum of terms; a term is an optional integer
//! coefficient followed by `*`-separated factors `name` or `name^exp`.
//! Factors multiply left to right in the group.

use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;
use wh_core::group::{GroupElement, GroupSpec};
use wh_core::ring::GroupRingElement;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiteralError {
    #[error("column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("column {col}: unknown generator `{name}`")]
    UnknownGenerator { col: usize, name: String },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Caret,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, LiteralError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((col, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((col, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((col, Tok::Star));
                i += 1;
            }
            '^' => {
                out.push((col, Tok::Caret));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push((col, Tok::Int(text.parse().expect("digits"))));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push((col, Tok::Name(chars[start..i].iter().collect())));
            }
            other => return Err(LiteralError::Syntax { col, msg: format!("unexpected character `{other}`") }),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    group: &'a Arc<GroupSpec>,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, LiteralError> {
        Err(LiteralError::Syntax { col: self.col(), msg: msg.into() })
    }

    fn generator(&self, name: &str, col: usize) -> Result<GroupElement, LiteralError> {
        if let Some(i) = self.group.names().iter().position(|n| n == name) {
            return Ok(self.group.generator(i));
        }
        if self.group.stable_name() == Some(name) {
            return Ok(self.group.stable().expect("twisted group"));
        }
        Err(LiteralError::UnknownGenerator { col, name: name.into() })
    }

    fn exponent(&mut self) -> Result<i64, LiteralError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.next();
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Int(n)) => {
                let v: i64 = i64::try_from(&n).map_err(|_| LiteralError::Syntax { col: self.col(), msg: "exponent too large".into() })?;
                Ok(if neg { -v } else { v })
            }
            _ => {
                self.pos -= 1;
                self.syntax("expected an integer exponent")
            }
        }
    }

    fn term(&mut self) -> Result<(BigInt, GroupElement), LiteralError> {
        let mut coeff = BigInt::from(1);
        let mut elem = self.group.identity();
        let mut expect_factor = true;
        if let Some(Tok::Int(n)) = self.peek().cloned() {
            self.next();
            coeff = n;
            if self.peek() == Some(&Tok::Star) {
                self.next();
            } else {
                expect_factor = false;
            }
        }
        while expect_factor {
            let col = self.col();
            match self.next() {
                Some(Tok::Name(name)) => {
                    let mut g = self.generator(&name, col)?;
                    if self.peek() == Some(&Tok::Caret) {
                        self.next();
                        let e = self.exponent()?;
                        g = self.group.pow(&g, e);
                    }
                    elem = self.group.mul(&elem, &g);
                }
                _ => {
                    self.pos -= 1;
                    return self.syntax("expected a generator name");
                }
            }
            if self.peek() == Some(&Tok::Star) {
                self.next();
            } else {
                expect_factor = false;
            }
        }
        Ok((coeff, elem))
    }
}

/// Parses a literal over `group`.
pub fn parse_element(group: &Arc<GroupSpec>, text: &str) -> Result<GroupRingElement, LiteralError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(LiteralError::Syntax { col: 1, msg: "empty literal".into() });
    }
    let mut p = Parser { toks, pos: 0, group, end: text.chars().count() + 1 };
    let mut terms = Vec::new();
    let mut sign = BigInt::from(1);
    if matches!(p.peek(), Some(Tok::Plus) | Some(Tok::Minus))
        && p.next() == Some(Tok::Minus) {
            sign = BigInt::from(-1);
        }
    loop {
        let (c, g) = p.term()?;
        terms.push((sign.clone() * c, g));
        match p.next() {
            None => break,
            Some(Tok::Plus) => sign = BigInt::from(1),
            Some(Tok::Minus) => sign = BigInt::from(-1),
            Some(_) => {
                p.pos -= 1;
                return p.syntax("expected `+` or `-`");
            }
        }
    }
    Ok(GroupRingElement::from_terms(group, terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z5() -> Arc<GroupSpec> {
        Arc::new(GroupSpec::cyclic(5))
    }

    #[test]
    fn parses_sums_and_powers() {
        let g = z5();
        let u = parse_element(&g, "t^4 + t - 1").unwrap();
        let v = parse_element(&g, "t^3+t^2-1").unwrap();
        assert!((&u * &v).is_one());
        let w = parse_element(&g, "3*t^2 - 1*t^-1 + 1").unwrap();
        assert_eq!(w.to_string(), parse_element(&g, "1 + 3*t^2 - t^4").unwrap().to_string());
        assert!(parse_element(&g, "-2").unwrap() == GroupRingElement::from_int(&g, -2));
    }

    #[test]
    fn twisted_words() {
        let g = Arc::new(GroupSpec::cyclic(5).with_names(vec!["g".into()]).unwrap().semidirect(vec![vec![2]], "t", 1).unwrap());
        let x = parse_element(&g, "3*t^2 - 1*g*t^-1 + 1").unwrap();
        assert_eq!(x.num_terms(), 3);
        let back = parse_element(&g, &x.to_string()).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn reports_columns() {
        let g = z5();
        assert_eq!(parse_element(&g, "t + q"), Err(LiteralError::UnknownGenerator { col: 5, name: "q".into() }));
        assert!(matches!(parse_element(&g, "t +"), Err(LiteralError::Syntax { col: 4, .. })));
        assert!(matches!(parse_element(&g, "t ^ x"), Err(LiteralError::Syntax { col: 5, .. })));
        assert!(matches!(parse_element(&g, "t $"), Err(LiteralError::Syntax { col: 3, .. })));
    }
}
