//! Text input for functions on the chart.
//!
//! Grammar: integer and rational literals, `i`, `nu`, variables `x1`..`xn`,
//! `+`, `-`, `*`, `/` (by a nonzero constant), `^` with a nonnegative integer
//! exponent, and parentheses. The result is an exact polynomial.

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;
use crate::series::{GradedSeries, JetValidity, Monomial, VariableProfile};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(u64),
    Var(usize),
    Nu,
    I,
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let err = |pos: usize, msg: &str| Error::Parse { context: format!("polynomial `{text}` at column {}", pos + 1), message: msg.into() };
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k] as char;
        match c {
            ' ' | '\t' => k += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                out.push((k, Token::Op(c)));
                k += 1;
            }
            '0'..='9' => {
                let start = k;
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                let v = text[start..k].parse().map_err(|_| err(start, "integer literal too large"))?;
                out.push((start, Token::Num(v)));
            }
            'x' => {
                let start = k;
                k += 1;
                let ds = k;
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                let idx: usize = text[ds..k].parse().map_err(|_| err(start, "expected a variable index after `x`"))?;
                if idx == 0 {
                    return Err(err(start, "variables are numbered from x1"));
                }
                out.push((start, Token::Var(idx - 1)));
            }
            'n' if text[k..].starts_with("nu") => {
                out.push((k, Token::Nu));
                k += 2;
            }
            'i' => {
                out.push((k, Token::I));
                k += 1;
            }
            _ => return Err(err(k, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<(usize, Token)>,
    pos: usize,
    profile: VariableProfile,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        let col = self.tokens.get(self.pos).map_or(self.text.len(), |t| t.0) + 1;
        Error::Parse { context: format!("polynomial `{}` at column {col}", self.text), message: msg.into() }
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((_, Token::Op(c))) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<GradedSeries> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(&rhs)? } else { acc.sub(&rhs)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<GradedSeries> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            if c == '*' {
                acc = acc.mul(&rhs)?;
            } else {
                let d = constant_value(&rhs).ok_or_else(|| self.err("division only by a nonzero constant"))?;
                let inv = d.inv().ok_or_else(|| self.err("division by zero"))?;
                acc = acc.scale(&inv);
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<GradedSeries> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            match self.tokens.get(self.pos) {
                Some((_, Token::Num(e))) if *e <= 255 => {
                    self.pos += 1;
                    return base.pow(*e as u32);
                }
                _ => return Err(self.err("expected an exponent in 0..=255")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<GradedSeries> {
        let p = self.profile;
        let tok = self.tokens.get(self.pos).map(|t| t.1.clone());
        let out = match tok {
            Some(Token::Num(v)) => {
                let v = i64::try_from(v).map_err(|_| self.err("integer literal too large"))?;
                GradedSeries::constant(p, GaussianRational::integer(v))
            }
            Some(Token::Var(k)) => {
                if k >= p.n {
                    return Err(self.err(&format!("variable x{} exceeds dimension {}", k + 1, p.n)));
                }
                GradedSeries::x_var(p, k)
            }
            Some(Token::Nu) => GradedSeries::nu(p),
            Some(Token::I) => GradedSeries::constant(p, GaussianRational::i()),
            Some(Token::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                inner
            }
            _ => return Err(self.err("expected a number, variable or `(`")),
        };
        self.pos += 1;
        Ok(out)
    }
}

fn constant_value(s: &GradedSeries) -> Option<GaussianRational> {
    match s.len() {
        0 => Some(GaussianRational::zero()),
        1 => s.terms().next().filter(|(m, _)| **m == Monomial::ONE).map(|(_, c)| c.clone()),
        _ => None,
    }
}

/// Parses a polynomial in `x1..xn` (and optionally `nu`, `i`) into `profile`.
pub fn parse_polynomial(text: &str, profile: VariableProfile) -> Result<GradedSeries> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { text, tokens, pos: 0, profile };
    if parser.tokens.is_empty() {
        return Err(parser.err("empty polynomial"));
    }
    let out = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.err("unexpected trailing input"));
    }
    // Products clip what the profile excludes; refuse clipped input.
    let nu_ok = out.terms().all(|(m, _)| (m.nu as u32) < profile.nu_order);
    if out.valid_x() != JetValidity::Exact || !nu_ok {
        return Err(parser.err("polynomial exceeds the truncation orders"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::FiberTag;

    fn prof() -> VariableProfile {
        VariableProfile::new(2, 10, 4, 5, FiberTag::Y).unwrap()
    }

    #[test]
    fn arithmetic() {
        let p = parse_polynomial("x1*x2 + 1/2*(x1 - x2)^2", prof()).unwrap();
        assert_eq!(p.to_string(), "1/2*x1^2 + 1/2*x2^2");
        assert_eq!(p.valid_x(), JetValidity::Exact);
        assert_eq!(parse_polynomial("-x1^3 + 2", prof()).unwrap().to_string(), "2 - x1^3");
        assert_eq!(parse_polynomial("3*i*nu*x2", prof()).unwrap().to_string(), "3*i*x2*nu");
    }

    #[test]
    fn errors() {
        for bad in ["x3", "x1 +", "(x1", "x1/x2", "x1^", "x0", "x1 $ 2", "", "1/0", "x1^11"] {
            assert!(matches!(parse_polynomial(bad, prof()), Err(Error::Parse { .. })), "{bad}");
        }
    }
}
