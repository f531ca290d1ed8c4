//! Exact rational and quadratic-surd arithmetic, continued fractions, log* and f,
//! and certified lower bounds for inf q‖qθ‖.

mod cf;
mod real;
mod surd;

use rug::ops::DivRounding;
use rug::{Integer, Rational};
use thiserror::Error;

pub use cf::{convergent_pairs, convergents, expand_surd, ContinuedFraction, SurdExpansion};
pub use real::{
    big_f, ceil_exp_div, floor_log_star, floor_log_star_u64, log_star, pow2, rational_pow, weight_cmp,
    weight_f, Enclosure, Precision,
};
pub use surd::{parse_rational_literal, rational_to_string, ExactReal, QuadraticSurd};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse number literal {0:?}")]
    Parse(String),
    #[error("{0} is rational; a quadratic irrational is required")]
    NotIrrational(String),
    #[error("value does not fit the supported range")]
    Overflow,
    #[error("precision cap of {cap} bits reached while deciding {what}")]
    PrecisionExhausted { cap: u32, what: String },
}

/// ‖qθ‖ exactly, with the integer p attaining it.
pub fn nearest_distance(q: &Integer, theta: &QuadraticSurd) -> (ExactReal, Integer) {
    assert!(*q >= 1, "nearest_distance needs q >= 1");
    theta.mul_integer(q).dist_to_nearest()
}

fn rational_floor_bits(x: &Rational, bits: u32) -> Rational {
    let scale = Integer::from(1) << bits;
    let (n, d) = Rational::from(x * &scale).into_numer_denom();
    Rational::from((n.div_floor(&d), scale))
}

/// A rational c_lb with q‖qθ‖ ≥ c_lb for every q ≥ 1.
///
/// Minimum of: a direct scan below the first convergent denominator, the exact
/// convergent values q_k|q_kθ − p_k| for k ≤ K, and for k > K the periodic tail
/// bound 1/(α_{k+1} + q_{k−1}/q_k) with q_{k−1}/q_k bounded through the last
/// periodic quotients. Between q_k ≤ q < q_{k+1} one has ‖qθ‖ ≥ ‖q_kθ‖, so these
/// values bound every q.
pub fn c_lower_bound(theta: &QuadraticSurd, depth: usize) -> Rational {
    let ex = expand_surd(theta);
    let s = ex.cf.initial.len();
    let per = ex.cf.period.len();
    let kk = depth.max(s + per + 1).max(2);
    let pairs = convergent_pairs(&ex.cf, kk + 1);
    let bits = 96;
    let mut best: Option<Rational> = None;
    let mut take = |v: Rational| {
        if best.as_ref().map_or(true, |b| v < *b) {
            best = Some(v);
        }
    };

    let q1 = pairs[1].1.clone();
    let mut q = Integer::from(1);
    while q < q1 {
        let (dist, _) = nearest_distance(&q, theta);
        take(dist.mul_integer(&q).rational_bounds(bits).0);
        q += 1u32;
    }
    for (p, q) in pairs.iter().skip(1) {
        let v = (&theta.mul_integer(q) - &ExactReal::from_integer(p.clone())).abs().mul_integer(q);
        take(v.rational_bounds(bits).0);
    }
    // tail: every k > kk, grouped by k mod period
    let m = kk + 1 - s;
    for k in kk + 1..=kk + per {
        let mut lo = Rational::new();
        let mut hi = Rational::from(1);
        for j in k + 1 - m..=k {
            let a = ex.cf.quotient(j).expect("periodic");
            let nlo = Rational::from(1) / (Rational::from(a) + &hi);
            let nhi = Rational::from(1) / (Rational::from(a) + &lo);
            lo = nlo;
            hi = nhi;
        }
        let idx = s + (k + 1 - s) % per;
        let alpha_hi = ex.complete[idx].rational_bounds(bits).1;
        take(Rational::from(1) / (alpha_hi + hi));
    }
    let b = best.expect("at least one convergent");
    rational_floor_bits(&b, 64)
}

/// θ together with its certified constant c_lb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theta {
    surd: QuadraticSurd,
    c_lb: Rational,
}

impl Theta {
    pub const DEFAULT_DEPTH: usize = 50;

    pub fn new(surd: QuadraticSurd) -> Self {
        let c_lb = c_lower_bound(&surd, Self::DEFAULT_DEPTH);
        Theta { surd, c_lb }
    }

    pub fn golden() -> Self {
        Self::new(QuadraticSurd::golden())
    }

    pub fn sqrt2() -> Self {
        Self::new(QuadraticSurd::sqrt2())
    }

    pub fn surd(&self) -> &QuadraticSurd {
        &self.surd
    }

    pub fn value(&self) -> &ExactReal {
        self.surd.value()
    }

    pub fn c_lb(&self) -> &Rational {
        &self.c_lb
    }
}
