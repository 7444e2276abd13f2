//! Exact numbers of the form (p + q·√D)/u with 128-bit integer parts.
//!
//! Literals accept integers, `/`, `*`, `+`, `-`, parentheses and `sqrt(D)`,
//! e.g. `(0+1*sqrt(2))/1`, `sqrt(2)/2`, `1/3`. All numbers appearing in one
//! literal must share the same radicand.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// (p + q·√d)/u, normalized: u > 0, gcd(p, q, u) = 1, d = 0 iff rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    pub p: i128,
    pub q: i128,
    pub d: i128,
    pub u: i128,
}

impl QuadraticIrrational {
    pub fn new(p: i128, q: i128, d: i128, u: i128) -> Self {
        assert!(u != 0, "zero denominator");
        assert!(d >= 0, "negative radicand");
        let (mut p, mut q, mut d, mut u) = (p, q, d, u);
        if q == 0 || d == 0 {
            q = 0;
            d = 0;
        } else if let Some(s) = exact_sqrt(d) {
            p += q * s;
            q = 0;
            d = 0;
        }
        if u < 0 {
            p = -p;
            q = -q;
            u = -u;
        }
        let g = gcd(gcd(p, q), u);
        if g > 1 {
            p /= g;
            q /= g;
            u /= g;
        }
        QuadraticIrrational { p, q, d, u }
    }

    pub fn int(n: i128) -> Self {
        Self::new(n, 0, 0, 1)
    }

    pub fn rational(a: i128, b: i128) -> Self {
        Self::new(a, 0, 0, b)
    }

    pub fn sqrt(d: i128) -> Self {
        Self::new(0, 1, d, 1)
    }

    pub fn is_rational(&self) -> bool {
        self.q == 0
    }

    fn common_d(self, other: Self) -> Result<i128> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (a, b) if a == b => Ok(a),
            _ => Err(Error::BadNumber(format!(
                "mixed radicands sqrt({}) and sqrt({})",
                self.d, other.d
            ))),
        }
    }

    pub fn checked_add(self, o: Self) -> Result<Self> {
        let d = self.common_d(o)?;
        Ok(Self::new(
            self.p * o.u + o.p * self.u,
            self.q * o.u + o.q * self.u,
            d,
            self.u * o.u,
        ))
    }

    pub fn neg(self) -> Self {
        Self::new(-self.p, -self.q, self.d, self.u)
    }

    pub fn checked_sub(self, o: Self) -> Result<Self> {
        self.checked_add(o.neg())
    }

    pub fn checked_mul(self, o: Self) -> Result<Self> {
        let d = self.common_d(o)?;
        Ok(Self::new(
            self.p * o.p + self.q * o.q * d,
            self.p * o.q + self.q * o.p,
            d,
            self.u * o.u,
        ))
    }

    pub fn checked_div(self, o: Self) -> Result<Self> {
        if o.p == 0 && o.q == 0 {
            return Err(Error::BadNumber("division by zero".into()));
        }
        let d = self.common_d(o)?;
        // 1/((p + q√d)/u) = u (p − q√d) / (p² − q² d)
        let norm = o.p * o.p - o.q * o.q * d;
        let inv = Self::new(o.u * o.p, -o.u * o.q, d, norm);
        self.checked_mul(inv)
    }

    pub fn signum(&self) -> i32 {
        sign_of(self.p, self.q, self.d)
    }

    pub fn floor(&self) -> i128 {
        let approx = self.to_f64().floor() as i128;
        let mut f = approx;
        while self.cmp_int(f) == Ordering::Less {
            f -= 1;
        }
        while self.cmp_int(f + 1) != Ordering::Less {
            f += 1;
        }
        f
    }

    pub fn ceil(&self) -> i128 {
        -self.neg().floor()
    }

    fn cmp_int(&self, n: i128) -> Ordering {
        // sign of (p − n u) + q√d
        sign_of(self.p - n * self.u, self.q, self.d).cmp(&0)
    }

    pub fn abs(self) -> Self {
        if self.signum() < 0 {
            self.neg()
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        (self.p as f64 + self.q as f64 * (self.d as f64).sqrt()) / self.u as f64
    }
}

/// Sign of a + b·√d (d ≥ 0) by comparing a² with b²d.
fn sign_of(a: i128, b: i128, d: i128) -> i32 {
    let sa = a.signum() as i32;
    let sb = if d == 0 { 0 } else { b.signum() as i32 };
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    match (a * a).cmp(&(b * b * d)) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => 0,
    }
}

fn exact_sqrt(d: i128) -> Option<i128> {
    if d < 0 {
        return None;
    }
    let mut s = (d as f64).sqrt() as i128;
    while s * s > d {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= d {
        s += 1;
    }
    (s * s == d).then_some(s)
}

impl PartialOrd for QuadraticIrrational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticIrrational {
    /// Panics when comparing numbers over different radicands.
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.checked_sub(*other).expect("comparable radicands");
        diff.signum().cmp(&0)
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 0 {
            if self.u == 1 {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.u)
            }
        } else {
            let sign = if self.q < 0 { '-' } else { '+' };
            write!(f, "({}{}{}*sqrt({}))/{}", self.p, sign, self.q.abs(), self.d, self.u)
        }
    }
}

struct Parser<'s> {
    s: &'s [u8],
    i: usize,
    src: &'s str,
}

impl<'s> Parser<'s> {
    fn err(&self) -> Error {
        Error::BadNumber(self.src.to_string())
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<QuadraticIrrational> {
        let mut v = self.term()?;
        loop {
            if self.eat(b'+') {
                v = v.checked_add(self.term()?)?;
            } else if self.eat(b'-') {
                v = v.checked_sub(self.term()?)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<QuadraticIrrational> {
        let mut v = self.factor()?;
        loop {
            if self.eat(b'*') {
                v = v.checked_mul(self.factor()?)?;
            } else if self.eat(b'/') {
                v = v.checked_div(self.factor()?)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<QuadraticIrrational> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        if self.eat(b'(') {
            let v = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err());
            }
            return Ok(v);
        }
        if self.s[self.i..].starts_with(b"sqrt(") {
            self.i += 5;
            let n = self.integer()?;
            if !self.eat(b')') || n < 0 {
                return Err(self.err());
            }
            return Ok(QuadraticIrrational::sqrt(n));
        }
        Ok(QuadraticIrrational::int(self.integer()?))
    }

    fn integer(&mut self) -> Result<i128> {
        let start = self.i;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
        }
        std::str::from_utf8(&self.s[start..self.i])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err())
    }
}

impl FromStr for QuadraticIrrational {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        let compact: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser {
            s: compact.as_bytes(),
            i: 0,
            src,
        };
        let v = p.expr()?;
        if p.i != p.s.len() {
            return Err(p.err());
        }
        Ok(v)
    }
}
