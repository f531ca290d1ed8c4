//! Continued fractions of rationals and real quadratic irrationals.

use std::collections::HashMap;

use rug::ops::DivRounding;
use rug::{Integer, Rational};
use serde::Serialize;

use super::{ArithError, ExactReal, QuadraticSurd};

/// x = [initial; period, period, ...]; `period` is empty for rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuedFraction {
    #[serde(serialize_with = "ser_ints")]
    pub initial: Vec<Integer>,
    #[serde(serialize_with = "ser_ints")]
    pub period: Vec<Integer>,
}

fn ser_ints<S: serde::Serializer>(v: &[Integer], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Complete quotient (P + √D)/Q with Q | D − P².
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct State {
    p: Integer,
    q: Integer,
}

/// Expansion of a quadratic irrational together with its complete quotients.
#[derive(Clone, Debug)]
pub struct SurdExpansion {
    pub cf: ContinuedFraction,
    /// α_j for j = 0..initial.len()+period.len(); α_j is periodic from j = initial.len().
    pub complete: Vec<ExactReal>,
}

impl ContinuedFraction {
    pub fn of_rational(r: &Rational) -> Self {
        let mut num = r.numer().clone();
        let mut den = r.denom().clone();
        let mut initial = Vec::new();
        while den != 0 {
            let (q, rem) = num.div_rem_floor(den.clone());
            initial.push(q);
            num = den;
            den = rem;
        }
        ContinuedFraction { initial, period: Vec::new() }
    }

    pub fn of_surd(theta: &QuadraticSurd) -> Self {
        expand_surd(theta).cf
    }

    /// The i-th partial quotient, `None` past the end of a finite expansion.
    pub fn quotient(&self, i: usize) -> Option<&Integer> {
        if i < self.initial.len() {
            Some(&self.initial[i])
        } else if self.period.is_empty() {
            None
        } else {
            Some(&self.period[(i - self.initial.len()) % self.period.len()])
        }
    }

    pub fn is_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// Rebuilds the exact value from the partial quotients.
    pub fn to_exact(&self) -> Result<ExactReal, ArithError> {
        if self.period.is_empty() {
            let mut it = self.initial.iter().rev();
            let mut acc = match it.next() {
                Some(a) => ExactReal::from_integer(a.clone()),
                None => return Err(ArithError::Parse("empty continued fraction".into())),
            };
            for a in it {
                acc = &ExactReal::from_integer(a.clone()) + &acc.recip()?;
            }
            return Ok(acc);
        }
        // purely periodic tail y = [p0; ..., p_{k-1}, y]
        let (pk, pk1, qk, qk1) = convergent_pair(&self.period);
        // qk y² + (qk1 − pk) y − pk1 = 0, positive root
        let b = Integer::from(&qk1 - &pk);
        let disc = Integer::from(b.square_ref()) + Integer::from(&qk * &pk1) * 4u32;
        let disc = disc.to_u64().ok_or(ArithError::Overflow)?;
        let y = ExactReal::new(-b, 1, disc, Integer::from(&qk * 2u32))?;
        if self.initial.is_empty() {
            return Ok(y);
        }
        let (pi, pi1, qi, qi1) = convergent_pair(&self.initial);
        let num = &y.mul_integer(&pi) + &ExactReal::from_integer(pi1);
        let den = &y.mul_integer(&qi) + &ExactReal::from_integer(qi1);
        num.checked_div(&den)
    }
}

/// (p_{k-1}, p_{k-2}, q_{k-1}, q_{k-2}) for the quotient list of length k.
fn convergent_pair(quots: &[Integer]) -> (Integer, Integer, Integer, Integer) {
    let (mut p, mut p_prev) = (Integer::from(1), Integer::new());
    let (mut q, mut q_prev) = (Integer::new(), Integer::from(1));
    for a in quots {
        let np = Integer::from(a * &p) + &p_prev;
        let nq = Integer::from(a * &q) + &q_prev;
        p_prev = std::mem::replace(&mut p, np);
        q_prev = std::mem::replace(&mut q, nq);
    }
    (p, p_prev, q, q_prev)
}

pub fn expand_surd(theta: &QuadraticSurd) -> SurdExpansion {
    let (a, b, d, e) = (theta.a(), theta.b(), theta.d(), theta.e());
    // (a + b√d)/e = (P + √D)/Q with D = b²de², P = ae, Q = e² (signs flipped when b < 0)
    let dd = Integer::from(b.square_ref()) * d * Integer::from(e.square_ref());
    let (mut p, mut q) = if *b > 0 {
        (Integer::from(a * e), Integer::from(e.square_ref()))
    } else {
        (-Integer::from(a * e), -Integer::from(e.square_ref()))
    };
    let root = dd.clone().sqrt();
    let coef = Integer::from(b.abs_ref()) * e;
    let mut seen: HashMap<State, usize> = HashMap::new();
    let mut quots = Vec::new();
    let mut complete = Vec::new();
    loop {
        let st = State { p: p.clone(), q: q.clone() };
        if let Some(&start) = seen.get(&st) {
            let period = quots.split_off(start);
            complete.truncate(start + period.len());
            return SurdExpansion {
                cf: ContinuedFraction { initial: quots, period },
                complete,
            };
        }
        seen.insert(st, quots.len());
        // floor((P + √D)/Q) = floor((P + ⌊√D⌋ + [Q < 0])/Q) because √D is irrational
        let num = if q > 0 { Integer::from(&p + &root) } else { Integer::from(&p + &root) + 1u32 };
        let a_k = num.div_floor(&q);
        complete.push(surd_state_value(&p, &q, &coef, d));
        quots.push(a_k.clone());
        let p_next = Integer::from(&a_k * &q) - &p;
        let q_next = (Integer::from(&dd) - Integer::from(p_next.square_ref())).div_exact(&q);
        p = p_next;
        q = q_next;
    }
}

/// (P + √D)/Q where √D = coef·√d.
fn surd_state_value(p: &Integer, q: &Integer, coef: &Integer, d: u64) -> ExactReal {
    ExactReal::new(p.clone(), coef.clone(), d, q.clone()).expect("nonzero Q")
}

/// First `count` convergents p_k/q_k.
pub fn convergents(theta: &QuadraticSurd, count: usize) -> Vec<Rational> {
    let cf = ContinuedFraction::of_surd(theta);
    let (mut p, mut p_prev) = (Integer::from(1), Integer::new());
    let (mut q, mut q_prev) = (Integer::new(), Integer::from(1));
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let a = cf.quotient(i).expect("periodic expansion never ends");
        let np = Integer::from(a * &p) + &p_prev;
        let nq = Integer::from(a * &q) + &q_prev;
        p_prev = std::mem::replace(&mut p, np);
        q_prev = std::mem::replace(&mut q, nq);
        out.push(Rational::from((p.clone(), q.clone())));
    }
    out
}

/// Convergent numerators and denominators (p_k, q_k) for k < count.
pub fn convergent_pairs(cf: &ContinuedFraction, count: usize) -> Vec<(Integer, Integer)> {
    let (mut p, mut p_prev) = (Integer::from(1), Integer::new());
    let (mut q, mut q_prev) = (Integer::new(), Integer::from(1));
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let Some(a) = cf.quotient(i) else { break };
        let np = Integer::from(a * &p) + &p_prev;
        let nq = Integer::from(a * &q) + &q_prev;
        p_prev = std::mem::replace(&mut p, np);
        q_prev = std::mem::replace(&mut q, nq);
        out.push((p.clone(), q.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    #[test]
    fn known_expansions() {
        // reduced surds come out purely periodic
        let cf = ContinuedFraction::of_surd(&QuadraticSurd::golden());
        assert!(cf.initial.is_empty());
        assert_eq!(cf.period, ints(&[1]));
        let cf = ContinuedFraction::of_surd(&QuadraticSurd::sqrt2());
        assert_eq!(cf.initial, ints(&[1]));
        assert_eq!(cf.period, ints(&[2]));
        // 1 + √3 = [2; 1, 2, 1, 2, ...]
        let cf = ContinuedFraction::of_surd(&"1+sqrt(3)".parse().unwrap());
        assert!(cf.initial.is_empty());
        assert_eq!(cf.period, ints(&[2, 1]));
        // √7 = [2; 1, 1, 1, 4]
        let cf = ContinuedFraction::of_surd(&"sqrt(7)".parse().unwrap());
        assert_eq!(cf.initial, ints(&[2]));
        assert_eq!(cf.period, ints(&[1, 1, 1, 4]));
        // (1 − √5)/2 = −0.618... = [−1; 2, 1, 1, ...]
        let cf = ContinuedFraction::of_surd(&"(1-1*sqrt(5))/2".parse().unwrap());
        assert_eq!(cf.quotient(0).unwrap(), &-1);
        assert_eq!(cf.quotient(1).unwrap(), &2);
        assert_eq!(cf.quotient(5).unwrap(), &1);
    }

    #[test]
    fn regeneration_round_trip() {
        for s in ["(1+1*sqrt(5))/2", "sqrt(2)", "1+sqrt(3)", "(3-2*sqrt(7))/5", "(-17+3*sqrt(13))/4", "sqrt(19)"] {
            let theta: QuadraticSurd = s.parse().unwrap();
            let cf = ContinuedFraction::of_surd(&theta);
            assert_eq!(&cf.to_exact().unwrap(), theta.value(), "{s}");
        }
        let r = Rational::from((-355, 113));
        let cf = ContinuedFraction::of_rational(&r);
        assert_eq!(cf.to_exact().unwrap(), ExactReal::from_rational(&r));
    }

    #[test]
    fn convergent_examples() {
        let c = convergents(&QuadraticSurd::golden(), 4);
        let want: Vec<Rational> = [(1, 1), (2, 1), (3, 2), (5, 3)].iter().map(|&p| Rational::from(p)).collect();
        assert_eq!(c, want);
        let c = convergents(&QuadraticSurd::sqrt2(), 3);
        let want: Vec<Rational> = [(1, 1), (3, 2), (7, 5)].iter().map(|&p| Rational::from(p)).collect();
        assert_eq!(c, want);
        assert_eq!(convergents(&QuadraticSurd::golden(), 1), vec![Rational::from(1)]);
    }

    #[test]
    fn complete_quotients_are_consistent() {
        let theta: QuadraticSurd = "sqrt(7)".parse().unwrap();
        let ex = expand_surd(&theta);
        assert_eq!(&ex.complete[0], theta.value());
        for (j, alpha) in ex.complete.iter().enumerate() {
            assert_eq!(&alpha.floor(), ex.cf.quotient(j).unwrap());
        }
    }
}
