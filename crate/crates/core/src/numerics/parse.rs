//! Entry grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | number | 'sqrt(' integer ')' | 'golden' | '(' expr ')'
//! ```
//!
//! Matrices are written row by row: entries separated by `,`, rows by `;`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::bigfloat::BigFloat;
use super::scalar::RealScalar;
use super::surd::QuadSurd;
use crate::error::{Error, Result};

/// How decimal literals such as `0.3` are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecimalMode {
    /// As the exact rational they denote.
    Exact,
    /// As a float with the given precision in bits.
    Float(u32),
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    mode: DecimalMode,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RealScalar> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                v = v.add(&self.term()?);
            } else if self.eat(b'-') {
                v = v.sub(&self.term()?);
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<RealScalar> {
        let mut v = self.factor()?;
        loop {
            if self.eat(b'*') {
                v = v.mul(&self.factor()?);
            } else if self.eat(b'/') {
                let d = self.factor()?;
                v = v.div(&d).map_err(|_| err("division by zero in entry"))?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<RealScalar> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(err("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => {
                if self.keyword("sqrt") {
                    if !self.eat(b'(') {
                        return Err(err("expected '(' after sqrt"));
                    }
                    let n = self.integer()?;
                    if !self.eat(b')') {
                        return Err(err("expected ')' after sqrt argument"));
                    }
                    let n = n.to_u64().ok_or_else(|| err("sqrt argument must be a non-negative machine integer"))?;
                    Ok(RealScalar::Exact(QuadSurd::sqrt_int(n)))
                } else if self.keyword("golden") {
                    Ok(RealScalar::golden())
                } else {
                    Err(err(alloc::format!("unexpected input at offset {}", self.pos)))
                }
            }
            None => Err(err("unexpected end of input")),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(err("expected integer"));
        }
        let txt = core::str::from_utf8(&self.s[start..self.pos]).unwrap();
        txt.parse::<BigInt>().map_err(|_| err("bad integer"))
    }

    fn number(&mut self) -> Result<RealScalar> {
        self.skip_ws();
        let start = self.pos;
        let mut int_digits = String::new();
        let mut frac_digits = String::new();
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            int_digits.push(self.s[self.pos] as char);
            self.pos += 1;
        }
        let mut is_decimal = false;
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            is_decimal = true;
            self.pos += 1;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                frac_digits.push(self.s[self.pos] as char);
                self.pos += 1;
            }
        }
        let mut exp10: i64 = 0;
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            is_decimal = true;
            self.pos += 1;
            let neg = if self.pos < self.s.len() && (self.s[self.pos] == b'-' || self.s[self.pos] == b'+') {
                let n = self.s[self.pos] == b'-';
                self.pos += 1;
                n
            } else {
                false
            };
            let e = self.integer()?.to_i64().ok_or_else(|| err("exponent too large"))?;
            exp10 = if neg { -e } else { e };
        }
        if int_digits.is_empty() && frac_digits.is_empty() {
            return Err(err(alloc::format!("malformed number at offset {start}")));
        }
        let digits = int_digits + &frac_digits;
        let mant: BigInt = digits.parse().map_err(|_| err("bad number"))?;
        let scale = exp10 - frac_digits.len() as i64;
        let ten = BigInt::from(10);
        let (num, den) =
            if scale >= 0 { (mant * ten.pow(scale as u32), BigInt::from(1)) } else { (mant, ten.pow((-scale) as u32)) };
        match self.mode {
            DecimalMode::Float(prec) if is_decimal => Ok(RealScalar::Approx(BigFloat::from_ratio(&num, &den, prec))),
            _ => Ok(RealScalar::Exact(QuadSurd::from_ratio(num, den))),
        }
    }
}

/// Parses one scalar.
pub fn parse_real(s: &str, mode: DecimalMode) -> Result<RealScalar> {
    let mut p = Parser { s: s.as_bytes(), pos: 0, mode };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(err(alloc::format!("trailing input in '{s}'")));
    }
    Ok(v)
}

/// Parses a matrix written as `a,b;c,d`. All rows must have equal length.
pub fn parse_matrix(s: &str, mode: DecimalMode) -> Result<Vec<Vec<RealScalar>>> {
    let mut rows = Vec::new();
    for row in s.split(';') {
        let entries: Result<Vec<_>> = row.split(',').map(|e| parse_real(e.trim(), mode)).collect();
        rows.push(entries?);
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) || n == 0 {
        return Err(err("matrix rows must be non-empty and of equal length"));
    }
    Ok(rows)
}

/// Renders a scalar back into the grammar; floats are written with enough
/// digits to round-trip at their precision.
pub fn format_real(x: &RealScalar) -> String {
    match x {
        RealScalar::Exact(q) => q.to_string(),
        RealScalar::Approx(f) => format_float(f),
    }
}

fn format_float(f: &BigFloat) -> String {
    // exact binary value as mant * 2^exp, printed in decimal
    let m = f.mantissa();
    let e = f.exponent();
    if m.is_zero() {
        return "0".into();
    }
    if e >= 0 {
        return (m << e as u64).to_string();
    }
    // m / 2^k = m * 5^k / 10^k
    let k = (-e) as u32;
    let scaled = m * BigInt::from(5).pow(k);
    let neg = scaled < BigInt::zero();
    let digits = if neg { (-scaled).to_string() } else { scaled.to_string() };
    let k = k as usize;
    let (ip, fp) = if digits.len() > k {
        (digits[..digits.len() - k].to_string(), digits[digits.len() - k..].to_string())
    } else {
        ("0".to_string(), "0".repeat(k - digits.len()) + &digits)
    };
    let fp = fp.trim_end_matches('0');
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&ip);
    if !fp.is_empty() {
        out.push('.');
        out.push_str(fp);
    }
    out
}
