//! Text grammar for polynomials.
//!
//! Terms look like `3*x0^2*x1 - (1+2i)*x2^4`. Variables are `x0..x9` (or
//! `u1..u4` for line-family parameters). Numbers may be integers, ratios
//! `p/q`, or decimals; all parse to exact Gaussian rationals. `i` is the
//! imaginary unit; parenthesized subexpressions may be raised to powers.

use crate::error::{Error, Result};
use crate::num::GaussRational;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::multi::MultiPoly;

/// Variable naming scheme for a parse.
#[derive(Clone, Copy, Debug)]
pub struct VarScheme {
    pub prefix: char,
    /// Index carried by the first variable name (x0 -> 0, u1 -> 1).
    pub first_index: usize,
    pub max_vars: usize,
}

impl VarScheme {
    pub const HYPERSURFACE: VarScheme = VarScheme { prefix: 'x', first_index: 0, max_vars: 10 };
    pub const FAMILY: VarScheme = VarScheme { prefix: 'u', first_index: 1, max_vars: 4 };
}

/// Parse with an explicit variable count.
pub fn parse_poly(
    text: &str,
    scheme: VarScheme,
    num_vars: usize,
) -> Result<MultiPoly<GaussRational>> {
    Parser::new(text, scheme, num_vars).parse()
}

/// Parse a hypersurface polynomial, inferring the variable count as
/// (largest x-index used) + 1.
pub fn parse_hypersurface(text: &str) -> Result<MultiPoly<GaussRational>> {
    let scheme = VarScheme::HYPERSURFACE;
    let mut max_idx = None;
    scan_var_indices(text, scheme, &mut |i| {
        max_idx = Some(max_idx.map_or(i, |m: usize| m.max(i)));
    })?;
    let num_vars = max_idx.map(|m| m + 1).unwrap_or(1);
    parse_poly(text, scheme, num_vars)
}

fn scan_var_indices(text: &str, scheme: VarScheme, f: &mut impl FnMut(usize)) -> Result<()> {
    let chars: Vec<char> = text.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        if chars[k] == scheme.prefix && k + 1 < chars.len() && chars[k + 1].is_ascii_digit() {
            let d = chars[k + 1] as usize - '0' as usize;
            if d < scheme.first_index {
                return Err(Error::Parse {
                    line: 1,
                    col: k + 1,
                    msg: format!("variable {}{} is out of the declared range", scheme.prefix, d),
                });
            }
            f(d - scheme.first_index);
            k += 2;
        } else {
            k += 1;
        }
    }
    Ok(())
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    scheme: VarScheme,
    num_vars: usize,
    _text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, scheme: VarScheme, num_vars: usize) -> Self {
        Parser { chars: text.chars().collect(), pos: 0, line: 1, col: 1, scheme, num_vars, _text: text }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn parse(&mut self) -> Result<MultiPoly<GaussRational>> {
        let e = self.expr()?;
        self.skip_ws();
        if let Some(c) = self.peek() {
            return Err(self.err(format!("unexpected character '{c}'")));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<MultiPoly<GaussRational>> {
        self.skip_ws();
        let mut acc = if self.peek() == Some('-') {
            self.bump();
            self.term()?.neg()
        } else {
            if self.peek() == Some('+') {
                self.bump();
            }
            self.term()?
        };
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some('-') => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly<GaussRational>> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('*') {
                self.bump();
                let f = self.factor()?;
                acc = acc.mul(&f);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<MultiPoly<GaussRational>> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.bump();
            self.skip_ws();
            let e = self.uint()?;
            if e > 64 {
                return Err(self.err("exponent too large"));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly<GaussRational>> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.bump();
                Ok(e)
            }
            Some('i') => {
                self.bump();
                Ok(MultiPoly::constant(self.num_vars, GaussRational::from_ints(0, 1)))
            }
            Some(c) if c == self.scheme.prefix => {
                self.bump();
                let Some(d) = self.peek().filter(|c| c.is_ascii_digit()) else {
                    return Err(self.err(format!("expected digit after '{}'", self.scheme.prefix)));
                };
                self.bump();
                let named = d as usize - '0' as usize;
                if named < self.scheme.first_index {
                    return Err(self.err(format!("unknown variable {}{}", self.scheme.prefix, named)));
                }
                let idx = named - self.scheme.first_index;
                if idx >= self.num_vars || idx >= self.scheme.max_vars {
                    return Err(self.err(format!(
                        "variable {}{} exceeds the {} declared variables",
                        self.scheme.prefix, named, self.num_vars
                    )));
                }
                Ok(MultiPoly::var(self.num_vars, idx))
            }
            Some(c) if c.is_ascii_digit() => {
                let value = self.number()?;
                // Allow the conventional juxtaposition `2i` for imaginaries.
                if self.peek() == Some('i') {
                    self.bump();
                    return Ok(MultiPoly::constant(
                        self.num_vars,
                        GaussRational::new(BigRational::zero(), value),
                    ));
                }
                Ok(MultiPoly::constant(
                    self.num_vars,
                    GaussRational::new(value, BigRational::zero()),
                ))
            }
            Some(c) => Err(self.err(format!("unexpected character '{c}'"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Result<u32> {
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        if digits.is_empty() {
            return Err(self.err("expected an integer"));
        }
        digits.parse().map_err(|_| self.err("integer too large"))
    }

    fn number(&mut self) -> Result<BigRational> {
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        let int_part: BigInt = digits.parse().map_err(|_| self.err("bad number"))?;
        match self.peek() {
            Some('/') => {
                self.bump();
                let mut den = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    den.push(self.bump().unwrap());
                }
                if den.is_empty() {
                    return Err(self.err("expected denominator after '/'"));
                }
                let d: BigInt = den.parse().map_err(|_| self.err("bad denominator"))?;
                if d.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                Ok(BigRational::new(int_part, d))
            }
            Some('.') => {
                self.bump();
                let mut frac = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    frac.push(self.bump().unwrap());
                }
                if frac.is_empty() {
                    return Err(self.err("expected digits after '.'"));
                }
                let scale = BigInt::from(10u8).pow(frac.len() as u32);
                let frac_int: BigInt = frac.parse().map_err(|_| self.err("bad number"))?;
                Ok(BigRational::new(int_part * &scale + frac_int, scale))
            }
            _ => Ok(BigRational::from_integer(int_part)),
        }
    }
}

/// Parse a homogeneous-coordinate point like `1,0,0` or `1, 2-3i, 1/2`.
pub fn parse_point(text: &str) -> Result<Vec<GaussRational>> {
    let mut out = Vec::new();
    for (k, part) in text.split(',').enumerate() {
        let p = parse_poly(part.trim(), VarScheme::HYPERSURFACE, 1).map_err(|e| match e {
            Error::Parse { line, col, msg } => Error::Parse {
                line,
                col,
                msg: format!("coordinate {}: {msg}", k + 1),
            },
            other => other,
        })?;
        if p.degree() > 0 {
            return Err(Error::Parse {
                line: 1,
                col: 1,
                msg: format!("coordinate {} must be a constant", k + 1),
            });
        }
        let c = p
            .terms()
            .next()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| GaussRational::from_ints(0, 0));
        out.push(c);
    }
    if out.iter().all(|c| crate::num::Coeff::is_zero(c)) {
        return Err(Error::Parse { line: 1, col: 1, msg: "point must have a nonzero coordinate".into() });
    }
    Ok(out)
}
