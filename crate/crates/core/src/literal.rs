//! The scalar-literal grammar and canonical printing.
//!
//! Expressions over the tokens `theta`, `u`, `g`, integer literals, and
//! `+ - * / ^ ( )`; `^` binds tightest and takes an integer exponent.
//! Canonical output is `num/den` with a monic denominator and terms in
//! decreasing degree, e.g. `(theta^3+2*theta)/(theta^2+1)`.
//!
//! The same grammar extended with the token `t` is used for the JSON encoding
//! of rational-function numerators; there `t` may only appear polynomially.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::field::{FieldSpec, Fq};
use crate::scalar::{PerfectedScalar, RationalScalar, ScalarError};
use crate::spoly::SPoly;

/// Syntax error with a 1-based column position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "syntax error at column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Theta,
    U,
    G,
    T,
    Int(u64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str, allow_t: bool) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = vec![];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, col));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: u64 = text[start..i].parse().map_err(|_| ParseError {
                    column: col,
                    message: "integer literal too large".into(),
                })?;
                out.push((Tok::Int(n), col));
            }
            _ if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    i += 1;
                }
                match &text[start..i] {
                    "theta" => out.push((Tok::Theta, col)),
                    "u" => out.push((Tok::U, col)),
                    "g" => out.push((Tok::G, col)),
                    "t" if allow_t => out.push((Tok::T, col)),
                    w => {
                        return Err(ParseError { column: col, message: format!("unknown token `{}`", w) })
                    }
                }
            }
            _ => {
                return Err(ParseError { column: col, message: format!("unexpected character `{}`", c) })
            }
        }
    }
    Ok(out)
}

/// A polynomial in t with perfected-scalar coefficients; degree 0 values are
/// plain scalars. Intermediate value of the parser.
#[derive(Clone, Debug)]
pub struct TValue {
    pub coeffs: BTreeMap<u64, PerfectedScalar>,
}

impl TValue {
    fn scalar(s: PerfectedScalar) -> Self {
        let mut coeffs = BTreeMap::new();
        if !s.is_zero() {
            coeffs.insert(0, s);
        }
        TValue { coeffs }
    }

    fn t_var(field: &Rc<FieldSpec>, depth: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1, PerfectedScalar::one(field, depth));
        TValue { coeffs }
    }

    fn insert(&mut self, e: u64, v: PerfectedScalar) {
        if v.is_zero() {
            return;
        }
        match self.coeffs.remove(&e) {
            None => {
                self.coeffs.insert(e, v);
            }
            Some(old) => {
                let s = old.add(&v);
                if !s.is_zero() {
                    self.coeffs.insert(e, s);
                }
            }
        }
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, v) in &other.coeffs {
            out.insert(e, v.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        TValue { coeffs: self.coeffs.iter().map(|(&e, v)| (e, v.neg())).collect() }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = TValue { coeffs: BTreeMap::new() };
        for (&e1, v1) in &self.coeffs {
            for (&e2, v2) in &other.coeffs {
                out.insert(e1 + e2, v1.mul(v2));
            }
        }
        out
    }

    fn as_scalar(&self) -> Option<PerfectedScalar> {
        if self.coeffs.is_empty() {
            return None; // zero; caller handles
        }
        if self.coeffs.len() == 1 {
            if let Some(v) = self.coeffs.get(&0) {
                return Some(v.clone());
            }
        }
        None
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    field: &'a Rc<FieldSpec>,
    depth: u32,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, c)| c).unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.col(), message: message.into() })
    }


    fn expr(&mut self) -> Result<TValue, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<TValue, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    let col = self.col();
                    self.bump();
                    let rhs = self.unary()?;
                    if rhs.is_zero() {
                        return Err(ParseError { column: col, message: "division by zero".into() });
                    }
                    let s = rhs.as_scalar().ok_or(ParseError {
                        column: col,
                        message: "division by a t-dependent expression".into(),
                    })?;
                    let inv = s.inv().map_err(|_| ParseError {
                        column: col,
                        message: "division by zero".into(),
                    })?;
                    acc = acc.mul(&TValue::scalar(inv));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<TValue, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<TValue, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let mut negative = false;
            if let Some(Tok::Minus) = self.peek() {
                self.bump();
                negative = true;
            }
            let exp_col = self.col();
            let e = match self.bump() {
                Some(Tok::Int(n)) => n,
                _ => {
                    return Err(ParseError {
                        column: exp_col,
                        message: "expected an integer exponent after `^`".into(),
                    })
                }
            };
            let mut acc = TValue::scalar(PerfectedScalar::one(self.field, self.depth));
            for _ in 0..e {
                acc = acc.mul(&base);
            }
            if negative {
                if acc.is_zero() {
                    return self.err("zero to a negative power");
                }
                let s = acc
                    .as_scalar()
                    .ok_or(ParseError { column: self.col(), message: "negative power of a t-dependent expression".into() })?;
                let inv = s.inv().map_err(|_| ParseError { column: self.col(), message: "zero to a negative power".into() })?;
                return Ok(TValue::scalar(inv));
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<TValue, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Theta) => {
                self.bump();
                Ok(TValue::scalar(PerfectedScalar::theta(self.field, self.depth)))
            }
            Some(Tok::U) => {
                self.bump();
                Ok(TValue::scalar(PerfectedScalar::u(self.field, self.depth)))
            }
            Some(Tok::G) => {
                self.bump();
                if self.field.e == 1 {
                    return self.err("the generator `g` requires an extension field (e > 1)");
                }
                Ok(TValue::scalar(PerfectedScalar {
                    depth: self.depth,
                    num: SPoly::constant(self.field, self.field.gen()),
                    den: SPoly::one(self.field),
                }))
            }
            Some(Tok::T) => {
                self.bump();
                Ok(TValue::t_var(self.field, self.depth))
            }
            Some(Tok::Int(n)) => {
                self.bump();
                let c = self.field.from_int(n as i64);
                Ok(TValue::scalar(PerfectedScalar {
                    depth: self.depth,
                    num: SPoly::constant(self.field, c),
                    den: SPoly::one(self.field),
                }))
            }
            Some(Tok::LParen) => {
                self.bump();
                let v = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(v),
                    _ => self.err("expected `)`"),
                }
            }
            _ => self.err("expected a value"),
        }
    }
}

/// Parse a scalar literal into F_q(u) at the given depth.
pub fn parse_scalar(
    text: &str,
    field: &Rc<FieldSpec>,
    depth: u32,
) -> Result<PerfectedScalar, ParseError> {
    let toks = tokenize(text, false)?;
    let mut p = Parser { toks, pos: 0, end_col: text.len() + 1, field, depth };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    if v.is_zero() {
        return Ok(PerfectedScalar::zero(field, depth));
    }
    Ok(v.as_scalar().expect("t cannot appear: tokenizer rejected it"))
}

/// Parse a scalar literal that must lie in F_q(θ).
pub fn parse_rational(text: &str, field: &Rc<FieldSpec>) -> Result<RationalScalar, ParseError> {
    let v = parse_scalar(text, field, 0)?;
    v.to_rational().map_err(|e: ScalarError| ParseError {
        column: 1,
        message: format!("not an element of F_q(theta): {}", e),
    })
}

/// Parse a polynomial in t with scalar coefficients (the JSON `num` field).
pub fn parse_t_polynomial(
    text: &str,
    field: &Rc<FieldSpec>,
    depth: u32,
) -> Result<BTreeMap<u64, PerfectedScalar>, ParseError> {
    let toks = tokenize(text, true)?;
    let mut p = Parser { toks, pos: 0, end_col: text.len() + 1, field, depth };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(v.coeffs)
}

fn format_fq(field: &FieldSpec, c: Fq) -> (String, bool) {
    let s = field.format_elem(c);
    let composite = s.contains('+');
    (s, composite)
}

/// Format a sparse polynomial with terms in decreasing degree.
pub fn format_poly(p: &SPoly, var: &str) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let field = &p.field;
    let mut parts = vec![];
    for (&e, &c) in p.terms.iter().rev() {
        let (cs, composite) = format_fq(field, c);
        let coeff = if composite { format!("({})", cs) } else { cs };
        let part = match (e, coeff.as_str()) {
            (0, _) => coeff,
            (1, "1") => var.to_string(),
            (1, _) => format!("{}*{}", coeff, var),
            (_, "1") => format!("{}^{}", var, e),
            _ => format!("{}*{}^{}", coeff, var, e),
        };
        parts.push(part);
    }
    parts.join("+")
}

/// Canonical form of an element of F_q(θ).
pub fn format_rational(x: &RationalScalar) -> String {
    if x.den.is_one() {
        format_poly(&x.num, "theta")
    } else {
        format!("({})/({})", format_poly(&x.num, "theta"), format_poly(&x.den, "theta"))
    }
}

/// Canonical form of a perfected scalar: θ-form when the value lies in
/// F_q(θ), u-form otherwise.
pub fn format_perfected(x: &PerfectedScalar) -> String {
    if let Ok(r) = x.to_rational() {
        return format_rational(&r);
    }
    if x.den.is_one() {
        format_poly(&x.num, "u")
    } else {
        format!("({})/({})", format_poly(&x.num, "u"), format_poly(&x.den, "u"))
    }
}

/// Format a t-polynomial with scalar coefficients (JSON `num` field).
pub fn format_t_polynomial(coeffs: &BTreeMap<u64, PerfectedScalar>) -> String {
    if coeffs.is_empty() {
        return "0".to_string();
    }
    let mut parts = vec![];
    for (&e, v) in coeffs.iter().rev() {
        let cs = format_perfected(v);
        let wrapped = if cs.contains('+') || cs.contains('-') || cs.contains('/') {
            format!("({})", cs)
        } else {
            cs.clone()
        };
        let part = match e {
            0 => wrapped,
            1 if cs == "1" => "t".to_string(),
            1 => format!("{}*t", wrapped),
            _ if cs == "1" => format!("t^{}", e),
            _ => format!("{}*t^{}", wrapped, e),
        };
        parts.push(part);
    }
    parts.join("+")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::field_create;

    #[test]
    fn parse_print_roundtrip() {
        let f = field_create(3, 1, None).unwrap();
        for text in ["theta^3+2*theta", "(theta+1)/(theta^2+1)", "2", "0", "(theta^3+2*theta)/(theta^2+1)"] {
            let v = parse_rational(text, &f).unwrap();
            assert_eq!(format_rational(&v), text, "canonical form is a parse fixed point");
        }
    }

    #[test]
    fn syntax_error_position() {
        let f = field_create(3, 1, None).unwrap();
        let err = parse_scalar("theta^^2", &f, 0).unwrap_err();
        assert_eq!(err.column, 7);
    }

    #[test]
    fn extension_field_coefficients() {
        let f = field_create(2, 2, None).unwrap();
        let v = parse_rational("(g+1)*theta^2+g", &f).unwrap();
        assert_eq!(format_rational(&v), "(g+1)*theta^2+g");
    }

    #[test]
    fn u_literals() {
        let f = field_create(3, 1, None).unwrap();
        // theta = -u^2 at depth 0, so theta + u^2 = 2u^2 + u^2 = 3u^2 = 0.
        let v = parse_scalar("theta+u^2", &f, 0).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn reduction_to_canonical() {
        let f = field_create(3, 1, None).unwrap();
        let v = parse_rational("(theta^2-1)/(theta-1)", &f).unwrap();
        assert_eq!(format_rational(&v), "theta+1");
    }

    #[test]
    fn t_polynomial_roundtrip() {
        let f = field_create(3, 1, None).unwrap();
        let text = "(theta^3+1)*t^2+theta*t+1";
        let c = parse_t_polynomial(text, &f, 0).unwrap();
        assert_eq!(format_t_polynomial(&c), text);
    }
}
