//! Certified interval enclosures over MPFR floats, the modified logarithm and the weight f.

use std::cmp::Ordering;
use std::sync::OnceLock;

use rug::float::Round;
use rug::ops::{AssignRound, Pow};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::{ArithError, ExactReal};

/// Working-precision policy: start at `start` bits, double until `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    pub start: u32,
    pub cap: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { start: 64, cap: 4096 }
    }
}

impl Precision {
    pub fn with_cap(cap: u32) -> Self {
        Precision { start: 64.min(cap.max(2)), cap: cap.max(2) }
    }

    /// Same cap, but never start below `bits`.
    pub fn at_least(self, bits: u32) -> Self {
        Precision { start: self.start.max(bits).min(self.cap), cap: self.cap }
    }

    pub fn levels(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut p = self.start.max(2);
        while p < self.cap {
            out.push(p);
            p = p.saturating_mul(2);
        }
        out.push(self.cap);
        out
    }

    /// Runs `f` at increasing precision until it returns an answer.
    pub fn decide<T>(
        &self,
        what: &str,
        mut f: impl FnMut(u32) -> Option<T>,
    ) -> Result<T, ArithError> {
        for p in self.levels() {
            if let Some(v) = f(p) {
                return Ok(v);
            }
        }
        Err(ArithError::PrecisionExhausted { cap: self.cap, what: what.to_string() })
    }
}

/// A closed interval [lo, hi] of MPFR floats known to contain a real number.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Down).0
}

fn up<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Up).0
}

impl Enclosure {
    pub fn new(lo: Float, hi: Float) -> Self {
        debug_assert!(lo <= hi);
        Enclosure { lo, hi }
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        Enclosure { lo: down(prec, r), hi: up(prec, r) }
    }

    pub fn from_integer(n: &Integer, prec: u32) -> Self {
        Enclosure { lo: down(prec, n), hi: up(prec, n) }
    }

    pub fn from_f64_exact(v: f64, prec: u32) -> Self {
        Enclosure { lo: Float::with_val(prec, v), hi: Float::with_val(prec, v) }
    }

    /// Encloses an exact real to about `prec` bits (absolute and relative).
    pub fn from_exact(x: &ExactReal, prec: u32) -> Self {
        if let Some(r) = x.to_rational() {
            return Self::from_rational(&r, prec);
        }
        let shift = x.magnitude_log2().unwrap_or(0);
        let bits = (prec as i64 - shift.min(0) + 4).max(8) as u32;
        let (lo, hi) = x.rational_bounds(bits);
        Enclosure { lo: down(prec, &lo), hi: up(prec, &hi) }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().min(self.hi.prec())
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec().min(o.prec());
        Enclosure { lo: down(p, &self.lo + &o.lo), hi: up(p, &self.hi + &o.hi) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec().min(o.prec());
        Enclosure { lo: down(p, &self.lo - &o.hi), hi: up(p, &self.hi - &o.lo) }
    }

    pub fn neg(&self) -> Self {
        Enclosure { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec().min(o.prec());
        let cands_lo = [
            down(p, &self.lo * &o.lo),
            down(p, &self.lo * &o.hi),
            down(p, &self.hi * &o.lo),
            down(p, &self.hi * &o.hi),
        ];
        let cands_hi = [
            up(p, &self.lo * &o.lo),
            up(p, &self.lo * &o.hi),
            up(p, &self.hi * &o.lo),
            up(p, &self.hi * &o.hi),
        ];
        let lo = cands_lo.into_iter().reduce(|a, b| if b < a { b } else { a }).unwrap();
        let hi = cands_hi.into_iter().reduce(|a, b| if b > a { b } else { a }).unwrap();
        Enclosure { lo, hi }
    }

    /// Reciprocal; `None` when the interval touches zero.
    pub fn recip(&self) -> Option<Self> {
        let p = self.prec();
        if self.lo > 0 || self.hi < 0 {
            Some(Enclosure { lo: down(p, 1 / &self.hi), hi: up(p, 1 / &self.lo) })
        } else {
            None
        }
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.recip()?))
    }

    /// Natural logarithm; `None` unless the interval is strictly positive.
    pub fn ln(&self) -> Option<Self> {
        if self.lo <= 0 {
            return None;
        }
        let p = self.prec();
        Some(Enclosure { lo: down(p, self.lo.ln_ref()), hi: up(p, self.hi.ln_ref()) })
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        Enclosure { lo: down(p, self.lo.exp_ref()), hi: up(p, self.hi.exp_ref()) }
    }

    /// log*(x) = max(1, ln x) on x ≥ 0, with log*(0) = 1; monotone so endpoints suffice.
    pub fn log_star(&self) -> Self {
        let p = self.prec();
        let one = Float::with_val(p, 1);
        let end = |x: &Float, round: Round| -> Float {
            if *x <= 0 {
                return one.clone();
            }
            let l = Float::with_val_round(p, x.ln_ref(), round).0;
            if l < one {
                one.clone()
            } else {
                l
            }
        };
        Enclosure { lo: end(&self.lo, Round::Down), hi: end(&self.hi, Round::Up) }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Enclosure::from_f64_exact(1.0, self.prec());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale_pow2(&self, k: i32) -> Self {
        let p = self.prec();
        let f = Float::with_val(p, 1) << k;
        self.mul(&Enclosure { lo: f.clone(), hi: f })
    }

    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    pub fn contains_rational(&self, r: &Rational) -> bool {
        self.lo <= *r && self.hi >= *r
    }

    /// Certified order against another enclosure; `None` when they overlap.
    pub fn cmp(&self, o: &Self) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && o.lo == o.hi && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn cmp_rational(&self, r: &Rational) -> Option<Ordering> {
        if self.hi < *r {
            Some(Ordering::Less)
        } else if self.lo > *r {
            Some(Ordering::Greater)
        } else if self.lo == *r && self.hi == *r {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn lo_rational(&self) -> Rational {
        self.lo.to_rational().expect("finite")
    }

    pub fn hi_rational(&self) -> Rational {
        self.hi.to_rational().expect("finite")
    }

    pub fn mid_f64(&self) -> f64 {
        let p = self.prec();
        Float::with_val(p, &self.lo + &self.hi).to_f64() / 2.0
    }

    /// Decimal renderings rounded outward, 20 significant digits.
    pub fn to_decimal_pair(&self) -> (String, String) {
        (
            self.lo.to_string_radix_round(10, Some(20), Round::Down),
            self.hi.to_string_radix_round(10, Some(20), Round::Up),
        )
    }
}

/// log*(x) for an exact non-negative x.
pub fn log_star(x: &ExactReal, prec: u32) -> Enclosure {
    Enclosure::from_exact(x, prec).log_star()
}

/// f(q) = log* q · log*(ln q), with log*(ln 1) = log*(0) = 1.
pub fn weight_f(q: &Integer, prec: u32) -> Enclosure {
    assert!(*q >= 1, "weight_f needs q >= 1");
    let x = Enclosure::from_integer(q, prec);
    let outer = x.log_star();
    if *q == 1 {
        return outer;
    }
    let inner = x.ln().expect("q >= 2").log_star();
    outer.mul(&inner)
}

/// Certified comparison of f(q) with an exact positive threshold.
pub fn weight_cmp(q: &Integer, t: &ExactReal, precision: Precision) -> Result<Ordering, ArithError> {
    if *q <= 2 {
        return Ok(ExactReal::one().cmp(t));
    }
    precision.decide("weight comparison", |p| {
        weight_f(q, p).cmp(&Enclosure::from_exact(t, p))
    })
}

fn exp_thresholds() -> &'static Vec<Integer> {
    static TABLE: OnceLock<Vec<Integer>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // ceil(e^m) for m = 0..=64; e^m is irrational for m ≥ 1, so the enclosure settles it
        let mut out = vec![Integer::from(1)];
        for m in 1..=64u32 {
            let mut p = 256;
            loop {
                let lo = Float::with_val_round(p, Float::with_val(p, m).exp_ref(), Round::Down).0;
                let hi = Float::with_val_round(p, Float::with_val(p, m).exp_ref(), Round::Up).0;
                let cl = lo.to_integer_round(Round::Up).unwrap().0;
                let ch = hi.to_integer_round(Round::Up).unwrap().0;
                if cl == ch {
                    out.push(cl);
                    break;
                }
                p *= 2;
            }
        }
        out
    })
}

/// [log* k] = max(1, floor(ln k)) computed exactly.
pub fn floor_log_star(k: &Integer) -> u64 {
    let table = exp_thresholds();
    let mut m = 1u64;
    for (i, t) in table.iter().enumerate().skip(2) {
        if k >= t {
            m = i as u64;
        } else {
            break;
        }
    }
    m
}

pub fn floor_log_star_u64(k: u64) -> u64 {
    floor_log_star(&Integer::from(k))
}

/// F(n) = ∏_{k=1}^{n} k·[log* k].
pub fn big_f(n: u64) -> Integer {
    let mut acc = Integer::from(1);
    for k in 1..=n {
        acc *= k;
        acc *= floor_log_star_u64(k);
    }
    acc
}

/// ceil(e^x / y) for positive rationals, certified.
pub fn ceil_exp_div(x: &Rational, y: &Rational, precision: Precision) -> Result<Integer, ArithError> {
    precision.decide("ceil(exp(x)/y)", |p| {
        let v = Enclosure::from_rational(x, p).exp().div(&Enclosure::from_rational(y, p))?;
        let a = v.lo().to_integer_round(Round::Up)?.0;
        let b = v.hi().to_integer_round(Round::Up)?.0;
        if a == b {
            Some(a)
        } else {
            None
        }
    })
}

/// 2^k as a rational, for possibly negative k.
pub fn pow2(k: i64) -> Rational {
    if k >= 0 {
        Rational::from(Integer::from(1) << k as u32)
    } else {
        Rational::from((Integer::from(1), Integer::from(1) << (-k) as u32))
    }
}

/// Rational power helper used by the parameter derivation.
pub fn rational_pow(r: &Rational, k: u32) -> Rational {
    Rational::from(r.pow(k))
}
