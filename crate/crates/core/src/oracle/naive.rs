//! A second, deliberately plain implementation of the margins: every term of the
//! range is evaluated exactly, both signs of (A,B) included, no screening.

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::arith::{Enclosure, ExactReal};

const BITS: u32 = 192;

/// ‖x‖ via floor: min(x − ⌊x⌋, ⌈x⌉ − x).
fn frac_dist(x: &ExactReal) -> ExactReal {
    let below = x - &ExactReal::from_integer(x.floor());
    let above = &ExactReal::from_integer(x.floor() + 1u32) - x;
    if below <= above {
        below
    } else {
        above
    }
}

fn bracket(x: &ExactReal) -> (Rational, Rational) {
    x.rational_bounds(BITS + 64)
}

/// f(k)·k with MPFR rounding, written out from max(1, ln k) directly.
fn weighted(k: &Integer) -> (Float, Float) {
    let ln = |x: Float, r: Round| Float::with_val_round(BITS, x.ln_ref(), r).0;
    let lnk = |r: Round| ln(Float::with_val_round(BITS, k, r).0, r);
    let one = Float::with_val(BITS, 1);
    let star = |v: Float| if v < one { one.clone() } else { v };
    let (l_lo, l_hi) = (star(lnk(Round::Down)), star(lnk(Round::Up)));
    let inner = |r: Round| if *k <= 1 { one.clone() } else { star(ln(lnk(r), r)) };
    let (i_lo, i_hi) = (inner(Round::Down), inner(Round::Up));
    let kf_lo = Float::with_val_round(BITS, k, Round::Down).0;
    let kf_hi = Float::with_val_round(BITS, k, Round::Up).0;
    let lo = Float::with_val_round(BITS, &l_lo * &i_lo, Round::Down).0;
    let hi = Float::with_val_round(BITS, &l_hi * &i_hi, Round::Up).0;
    (
        Float::with_val_round(BITS, &lo * &kf_lo, Round::Down).0,
        Float::with_val_round(BITS, &hi * &kf_hi, Round::Up).0,
    )
}

fn times(w: (Float, Float), lo: &Rational, hi: &Rational) -> Enclosure {
    let l = Float::with_val_round(BITS, lo, Round::Down).0;
    let h = Float::with_val_round(BITS, hi, Round::Up).0;
    Enclosure::new(
        Float::with_val_round(BITS, &w.0 * &l, Round::Down).0,
        Float::with_val_round(BITS, &w.1 * &h, Round::Up).0,
    )
}

fn better(hi: &Float, best: &Option<(Float, Float)>) -> bool {
    best.as_ref().map_or(true, |(_, bh)| hi < bh)
}

pub fn point_margin(alpha: &ExactReal, beta: &ExactReal, n: u64) -> (Enclosure, u64) {
    let mut best: Option<(Float, Float)> = None;
    let mut lo_min: Option<Float> = None;
    let mut arg = 0;
    for q in 1..=n {
        let qi = Integer::from(q);
        let (l1, h1) = bracket(&frac_dist(&alpha.mul_integer(&qi)));
        let (l2, h2) = bracket(&frac_dist(&beta.mul_integer(&qi)));
        let (l, h) = (l1 * l2, h1 * h2);
        let e = times(weighted(&qi), &l, &h);
        if lo_min.as_ref().map_or(true, |m| e.lo() < m) {
            lo_min = Some(e.lo().clone());
        }
        if better(e.hi(), &best) {
            best = Some((e.lo().clone(), e.hi().clone()));
            arg = q;
        }
    }
    let (_, h) = best.expect("N >= 1");
    (Enclosure::new(lo_min.unwrap(), h), arg)
}

/// Same functional as the screened version; the argmin is reported with A > 0, or A = 0 < B.
pub fn line_margin(alpha: &ExactReal, beta: &ExactReal, a_max: u64, b_max: u64) -> (Enclosure, (i64, i64)) {
    let (am, bm) = (a_max as i64, b_max as i64);
    let mut best: Option<(Float, Float)> = None;
    let mut lo_min: Option<Float> = None;
    let mut arg = (0, 0);
    for a in -am..=am {
        for b in -bm..=bm {
            if a == 0 && b == 0 {
                continue;
            }
            let x = alpha.mul_integer(&Integer::from(a));
            let y = beta.mul_integer(&Integer::from(b));
            let (l, h) = if x.compatible(&y) {
                bracket(&frac_dist(&(&x - &y)))
            } else {
                let mut bits = BITS;
                loop {
                    let (xl, xh) = x.rational_bounds(bits);
                    let (yl, yh) = y.rational_bounds(bits);
                    let (dl, dh) = (Rational::from(&xl - &yh), Rational::from(&xh - &yl));
                    // the bracket is narrow, so ‖·‖ is monotone on it once it avoids integers and halves
                    let fl = dl.clone().floor();
                    let fh = dh.clone().floor();
                    let twice_l = Rational::from(&dl * 2u32).floor();
                    let twice_h = Rational::from(&dh * 2u32).floor();
                    if fl == fh && twice_l == twice_h {
                        let d = |v: &Rational| {
                            let f = v.clone().floor();
                            let up = Rational::from(&f + 1u32);
                            Rational::from(v - &f).min(Rational::from(&up - v))
                        };
                        let (u, v) = (d(&dl), d(&dh));
                        break if u <= v { (u, v) } else { (v, u) };
                    }
                    bits *= 2;
                }
            };
            let k = Integer::from(a.unsigned_abs().max(1)) * b.unsigned_abs().max(1);
            let e = times(weighted(&k), &l, &h);
            let canon = if a < 0 || (a == 0 && b < 0) { (-a, -b) } else { (a, b) };
            if lo_min.as_ref().map_or(true, |m| e.lo() < m) {
                lo_min = Some(e.lo().clone());
            }
            let tie = best.as_ref().map_or(false, |(_, bh)| e.hi() == bh) && canon < arg;
            if better(e.hi(), &best) || tie {
                best = Some((e.lo().clone(), e.hi().clone()));
                arg = canon;
            }
        }
    }
    let (_, h) = best.expect("non-empty range");
    (Enclosure::new(lo_min.unwrap(), h), arg)
}
