//! Exact numbers of the form (a + b√d)/e.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};
use std::str::FromStr;

use rug::ops::{DivRounding, Pow};
use rug::{Integer, Rational};

use super::ArithError;

/// A rational number or a real quadratic irrational, stored as (a + b√d)/e.
///
/// Canonical form: e > 0, gcd(a, b, e) = 1, d square-free; b = 0 forces d = 0
/// so equal values always compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactReal {
    a: Integer,
    b: Integer,
    d: u64,
    e: Integer,
}

fn square_free_part(d: u64) -> (u64, u64) {
    let mut rest = d;
    let mut outside = 1u64;
    let mut k = 2u64;
    while k.saturating_mul(k) <= rest {
        let sq = k * k;
        while rest % sq == 0 {
            rest /= sq;
            outside *= k;
        }
        k += 1;
    }
    (outside, rest)
}

impl ExactReal {
    /// Builds (a + b√d)/e, pulling square factors out of d.
    pub fn new(
        a: impl Into<Integer>,
        b: impl Into<Integer>,
        d: u64,
        e: impl Into<Integer>,
    ) -> Result<Self, ArithError> {
        let (mut a, mut b, mut e) = (a.into(), b.into(), e.into());
        if e == 0 {
            return Err(ArithError::ZeroDenominator);
        }
        let mut d = d;
        if b != 0 {
            if d == 0 {
                b = Integer::new();
            } else {
                let (outside, rest) = square_free_part(d);
                b *= outside;
                d = rest;
                if d == 1 {
                    a += &b;
                    b = Integer::new();
                }
            }
        }
        if b == 0 {
            d = 0;
        }
        if e < 0 {
            a = -a;
            b = -b;
            e = -e;
        }
        Ok(Self::normalized(a, b, d, e))
    }

    /// Builds (a + b√d)/e for a d already known to be square-free (and not 1).
    pub(crate) fn from_parts_unchecked(a: Integer, b: Integer, d: u64, e: Integer) -> Self {
        debug_assert!(e > 0);
        let d = if b == 0 { 0 } else { d };
        Self::normalized(a, b, d, e)
    }

    fn normalized(mut a: Integer, mut b: Integer, d: u64, mut e: Integer) -> Self {
        let mut g = a.clone().gcd(&b);
        g.gcd_mut(&e);
        if g != 1 && g != 0 {
            a.div_exact_mut(&g);
            b.div_exact_mut(&g);
            e.div_exact_mut(&g);
        }
        ExactReal { a, b, d, e }
    }

    pub fn zero() -> Self {
        ExactReal { a: Integer::new(), b: Integer::new(), d: 0, e: Integer::from(1) }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(n: impl Into<Integer>) -> Self {
        ExactReal { a: n.into(), b: Integer::new(), d: 0, e: Integer::from(1) }
    }

    pub fn from_rational(r: &Rational) -> Self {
        ExactReal {
            a: r.numer().clone(),
            b: Integer::new(),
            d: 0,
            e: r.denom().clone(),
        }
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }
    pub fn b(&self) -> &Integer {
        &self.b
    }
    /// The radicand, 0 for rationals.
    pub fn d(&self) -> u64 {
        self.d
    }
    pub fn e(&self) -> &Integer {
        &self.e
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    pub fn to_rational(&self) -> Option<Rational> {
        if self.is_rational() {
            Some(Rational::from((self.a.clone(), self.e.clone())))
        } else {
            None
        }
    }

    /// The quadratic field this number lives in, `None` for rationals.
    pub fn field(&self) -> Option<u64> {
        if self.is_rational() {
            None
        } else {
            Some(self.d)
        }
    }

    /// True when both numbers live in a common field.
    pub fn compatible(&self, other: &Self) -> bool {
        self.is_rational() || other.is_rational() || self.d == other.d
    }

    fn common_d(&self, other: &Self) -> u64 {
        match (self.field(), other.field()) {
            (None, None) => 0,
            (Some(d), None) | (None, Some(d)) => d,
            (Some(d1), Some(d2)) => {
                assert!(d1 == d2, "mixed quadratic fields sqrt({d1}) and sqrt({d2})");
                d1
            }
        }
    }

    /// Sign of a + b√d (e is positive).
    fn numerator_sign(a: &Integer, b: &Integer, d: u64) -> Ordering {
        let sa = a.cmp0();
        let sb = b.cmp0();
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a² with b²d
        let a2 = Integer::from(a.square_ref());
        let b2d = Integer::from(b.square_ref()) * d;
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn signum(&self) -> Ordering {
        Self::numerator_sign(&self.a, &self.b, self.d)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// floor((a + b√d)/e), computed exactly with an integer square root.
    pub fn floor(&self) -> Integer {
        let num = if self.b == 0 {
            self.a.clone()
        } else {
            let s = (Integer::from(self.b.square_ref()) * self.d).sqrt();
            if self.b > 0 {
                Integer::from(&self.a + &s)
            } else {
                Integer::from(&self.a - &s) - 1u32
            }
        };
        num.div_floor(&self.e)
    }

    pub fn ceil(&self) -> Integer {
        -(-self).floor()
    }

    /// The nearest integer; exact halves round up (only possible for rationals).
    pub fn round_nearest(&self) -> Integer {
        let half = ExactReal { a: Integer::from(1), b: Integer::new(), d: 0, e: Integer::from(2) };
        (self + &half).floor()
    }

    /// Distance to the nearest integer together with that integer.
    pub fn dist_to_nearest(&self) -> (ExactReal, Integer) {
        let p = self.round_nearest();
        let diff = self - &ExactReal::from_integer(p.clone());
        (diff.abs(), p)
    }

    pub fn mul_integer(&self, k: &Integer) -> Self {
        Self::normalized(
            Integer::from(&self.a * k),
            Integer::from(&self.b * k),
            self.d,
            self.e.clone(),
        )
        .fix_zero_b()
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        let mut out = Self::normalized(
            Integer::from(&self.a * r.numer()),
            Integer::from(&self.b * r.numer()),
            self.d,
            Integer::from(&self.e * r.denom()),
        );
        if out.b == 0 {
            out.d = 0;
        }
        out
    }

    fn fix_zero_b(mut self) -> Self {
        if self.b == 0 {
            self.d = 0;
        }
        self
    }

    /// Multiplicative inverse; errors on zero.
    pub fn recip(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        // e/(a + b√d) = e(a − b√d)/(a² − b²d)
        let norm = Integer::from(self.a.square_ref()) - Integer::from(self.b.square_ref()) * self.d;
        let a = Integer::from(&self.e * &self.a);
        let b = -Integer::from(&self.e * &self.b);
        let (a, b, e) = if norm < 0 { (-a, -b, -norm) } else { (a, b, norm) };
        Ok(Self::normalized(a, b, self.d, e).fix_zero_b())
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ArithError> {
        Ok(self * &other.recip()?)
    }

    /// Closed rational bracket [lo, hi] of width 2^-bits containing the value.
    pub fn rational_bounds(&self, bits: u32) -> (Rational, Rational) {
        if let Some(r) = self.to_rational() {
            return (r.clone(), r);
        }
        let scale = Integer::from(1) << bits;
        let scaled = ExactReal::from_parts_unchecked(
            Integer::from(&self.a * &scale),
            Integer::from(&self.b * &scale),
            self.d,
            self.e.clone(),
        );
        let f = scaled.floor();
        let lo = Rational::from((f.clone(), scale.clone()));
        let hi = Rational::from((f + 1u32, scale));
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, _) = self.rational_bounds(80);
        lo.to_f64()
    }

    /// floor(log2 |x|), or `None` for zero.
    pub fn magnitude_log2(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let v = self.abs();
        let mut bits = 64 + v.e.significant_bits();
        let x = loop {
            let (lo, _) = v.rational_bounds(bits);
            if lo > 0 {
                break lo;
            }
            bits *= 2;
        };
        let (n, d) = (x.numer(), x.denom());
        let k = n.significant_bits() as i64 - d.significant_bits() as i64;
        let below = if k >= 0 {
            *n < Integer::from(d << k as u32)
        } else {
            Integer::from(n << (-k) as u32) < *d
        };
        Some(if below { k - 1 } else { k })
    }
}

impl Ord for ExactReal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl PartialOrd for ExactReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn add(self, rhs: &ExactReal) -> ExactReal {
        let d = self.common_d(rhs);
        let a = Integer::from(&self.a * &rhs.e) + Integer::from(&rhs.a * &self.e);
        let b = Integer::from(&self.b * &rhs.e) + Integer::from(&rhs.b * &self.e);
        let e = Integer::from(&self.e * &rhs.e);
        ExactReal::from_parts_unchecked(a, b, d, e)
    }
}

impl<'a> Sub<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn sub(self, rhs: &ExactReal) -> ExactReal {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn mul(self, rhs: &ExactReal) -> ExactReal {
        let d = self.common_d(rhs);
        let a = Integer::from(&self.a * &rhs.a) + Integer::from(&self.b * &rhs.b) * d;
        let b = Integer::from(&self.a * &rhs.b) + Integer::from(&self.b * &rhs.a);
        let e = Integer::from(&self.e * &rhs.e);
        ExactReal::from_parts_unchecked(a, b, d, e)
    }
}

impl Neg for &ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        ExactReal { a: -self.a.clone(), b: -self.b.clone(), d: self.d, e: self.e.clone() }
    }
}

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        ExactReal { a: -self.a, b: -self.b, d: self.d, e: self.e }
    }
}

fn fmt_rational(f: &mut fmt::Formatter<'_>, n: &Integer, d: &Integer) -> fmt::Result {
    write!(f, "{n}/{d}")
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return fmt_rational(f, &self.a, &self.e);
        }
        let sign = if self.b < 0 { '-' } else { '+' };
        write!(f, "({}{}{}*sqrt({}))/{}", self.a, sign, self.b.clone().abs(), self.d, self.e)
    }
}

fn parse_int(s: &str) -> Result<Integer, ArithError> {
    let t = s.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    Integer::from_str(t).map_err(|_| ArithError::Parse(s.to_string()))
}

fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let t = s.trim();
    let bad = || ArithError::Parse(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_int(n)?;
        let d = parse_int(d)?;
        if d == 0 {
            return Err(ArithError::ZeroDenominator);
        }
        return Ok(Rational::from((n, d)));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.trim_start().starts_with('-');
        let ip = if ip.trim().is_empty() || ip.trim() == "-" || ip.trim() == "+" {
            Integer::new()
        } else {
            parse_int(ip)?
        };
        let frac = Integer::from_str(fp).map_err(|_| bad())?;
        let scale = Integer::from(10).pow(fp.len() as u32);
        let mut v = Rational::from((frac, scale));
        if neg {
            v = -v;
        }
        return Ok(Rational::from(ip) + v);
    }
    Ok(Rational::from(parse_int(t)?))
}

/// Parses "a+b*sqrt(d)" with optional surrounding parentheses; b may be omitted.
fn parse_surd_numerator(s: &str) -> Result<(Integer, Integer, u64), ArithError> {
    let bad = || ArithError::Parse(s.to_string());
    let pos = s.find("sqrt(").ok_or_else(bad)?;
    let close = s[pos..].find(')').ok_or_else(bad)? + pos;
    if close + 1 != s.len() {
        return Err(bad());
    }
    let d: u64 = s[pos + 5..close].trim().parse().map_err(|_| bad())?;
    let head = s[..pos].trim_end();
    let head = head.strip_suffix('*').unwrap_or(head).trim_end();
    // split head into the rational part and the coefficient at the last sign
    let split = head
        .char_indices()
        .filter(|&(i, c)| (c == '+' || c == '-') && i > 0)
        .map(|(i, _)| i)
        .last();
    let (a_str, b_str) = match split {
        Some(i) => (&head[..i], &head[i..]),
        None => ("", head),
    };
    let a = if a_str.trim().is_empty() { Integer::new() } else { parse_int(a_str)? };
    let b = match b_str.trim() {
        "" | "+" => Integer::from(1),
        "-" => Integer::from(-1),
        t => parse_int(t)?,
    };
    Ok((a, b, d))
}

fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

impl FromStr for ExactReal {
    type Err = ArithError;

    /// Accepts "(a+b*sqrt(d))/e", "a+b*sqrt(d)", "sqrt(d)", "p/q", integers and decimals.
    fn from_str(s: &str) -> Result<Self, ArithError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if !t.contains("sqrt(") {
            return Ok(ExactReal::from_rational(&parse_rational(&t)?));
        }
        let bad = || ArithError::Parse(s.to_string());
        let (num, mut e) = match t.rfind(')') {
            Some(i) if t[i + 1..].starts_with('/') => (&t[..=i], parse_int(&t[i + 2..])?),
            Some(i) if i + 1 == t.len() => (t.as_str(), Integer::from(1)),
            _ => return Err(bad()),
        };
        let (neg, num) = match num.strip_prefix("-(") {
            Some(_) => (true, &num[1..]),
            None => (false, num),
        };
        let body = if num.starts_with('(') && matching_paren(num) == Some(num.len() - 1) {
            &num[1..num.len() - 1]
        } else if neg {
            return Err(bad());
        } else {
            num
        };
        if neg {
            e = -e;
        }
        let (a, b, d) = parse_surd_numerator(body)?;
        if b != 0 && d == 0 {
            return Err(ArithError::Parse(s.to_string()));
        }
        ExactReal::new(a, b, d, e)
    }
}

/// An irrational ExactReal (b ≠ 0); the type of θ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSurd(ExactReal);

impl QuadraticSurd {
    pub fn new(
        a: impl Into<Integer>,
        b: impl Into<Integer>,
        d: u64,
        e: impl Into<Integer>,
    ) -> Result<Self, ArithError> {
        Self::try_from(ExactReal::new(a, b, d, e)?)
    }

    /// The golden ratio (1+√5)/2.
    pub fn golden() -> Self {
        Self::new(1, 1, 5, 2).expect("valid surd")
    }

    pub fn sqrt2() -> Self {
        Self::new(0, 1, 2, 1).expect("valid surd")
    }

    pub fn value(&self) -> &ExactReal {
        &self.0
    }

    pub fn into_inner(self) -> ExactReal {
        self.0
    }
}

impl TryFrom<ExactReal> for QuadraticSurd {
    type Error = ArithError;
    fn try_from(x: ExactReal) -> Result<Self, ArithError> {
        if x.is_rational() {
            Err(ArithError::NotIrrational(x.to_string()))
        } else {
            Ok(QuadraticSurd(x))
        }
    }
}

impl Deref for QuadraticSurd {
    type Target = ExactReal;
    fn deref(&self) -> &ExactReal {
        &self.0
    }
}

impl FromStr for QuadraticSurd {
    type Err = ArithError;
    fn from_str(s: &str) -> Result<Self, ArithError> {
        Self::try_from(ExactReal::from_str(s)?)
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Formats a rational as "p/q" (always with a denominator).
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational_literal(s: &str) -> Result<Rational, ArithError> {
    parse_rational(&s.chars().filter(|c| !c.is_whitespace()).collect::<String>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn er(s: &str) -> ExactReal {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form_extracts_squares() {
        let x = ExactReal::new(2, 2, 20, 4).unwrap();
        // (2 + 4√5)/4 = (1 + 2√5)/2
        assert_eq!(x, ExactReal::new(1, 2, 5, 2).unwrap());
        assert_eq!(x.d(), 5);
        let r = ExactReal::new(1, 3, 9, 2).unwrap();
        assert_eq!(r, ExactReal::from_integer(5));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["(1+1*sqrt(5))/2", "(1-1*sqrt(5))/2", "(0+1*sqrt(2))/1", "(-3+7*sqrt(13))/5"] {
            assert_eq!(er(s).to_string(), s);
        }
        assert_eq!(er("sqrt(2)"), er("(0+1*sqrt(2))/1"));
        assert_eq!(er("1+sqrt(3)"), ExactReal::new(1, 1, 3, 1).unwrap());
        assert_eq!(er("-sqrt(2)").to_string(), "(0-1*sqrt(2))/1");
        assert_eq!(er("3/6").to_string(), "1/2");
        assert_eq!(er("0.25").to_string(), "1/4");
        assert_eq!(er("7").to_string(), "7/1");
        assert!("(1+sqrt(5)".parse::<ExactReal>().is_err());
        assert!("1/0".parse::<ExactReal>().is_err());
        assert!("abc".parse::<ExactReal>().is_err());
    }

    #[test]
    fn golden_ratio_arithmetic() {
        let phi = QuadraticSurd::golden();
        let sq = &*phi * &*phi;
        assert_eq!(sq, &*phi + &ExactReal::one());
        assert_eq!(phi.floor(), 1);
        assert_eq!((-&*phi).floor(), -2);
        assert_eq!(phi.recip().unwrap(), &*phi - &ExactReal::one());
    }

    #[test]
    fn floor_of_negative_coefficient() {
        // (1 − √5)/2 ≈ −0.618
        assert_eq!(er("(1-1*sqrt(5))/2").floor(), -1);
        assert_eq!(er("(1-1*sqrt(5))/2").ceil(), 0);
        // 5√5 − 11 ≈ 0.1803
        assert_eq!(er("-11+5*sqrt(5)").floor(), 0);
    }

    #[test]
    fn ordering_against_rationals() {
        let s2 = QuadraticSurd::sqrt2();
        assert!(*s2 > er("1414213/1000000"));
        assert!(*s2 < er("1414214/1000000"));
        assert_eq!(er("1/2").cmp(&er("2/4")), Ordering::Equal);
    }

    #[test]
    fn rational_bounds_bracket() {
        let phi = QuadraticSurd::golden();
        let (lo, hi) = phi.rational_bounds(100);
        assert!(ExactReal::from_rational(&lo) < *phi);
        assert!(ExactReal::from_rational(&hi) > *phi);
        assert_eq!(Rational::from(&hi - &lo), Rational::from((1, Integer::from(1) << 100)));
    }

    #[test]
    #[should_panic(expected = "mixed quadratic fields")]
    fn mixing_fields_is_an_invariant_violation() {
        let _ = &*QuadraticSurd::golden() + &*QuadraticSurd::sqrt2();
    }

    #[test]
    fn surd_requires_irrational() {
        assert!(QuadraticSurd::new(3, 0, 5, 1).is_err());
        assert!("4/3".parse::<QuadraticSurd>().is_err());
    }

    #[test]
    fn magnitude_log2_matches() {
        assert_eq!(er("1/2").magnitude_log2(), Some(-1));
        assert_eq!(er("3").magnitude_log2(), Some(1));
        assert_eq!(QuadraticSurd::golden().magnitude_log2(), Some(0));
    }
}
