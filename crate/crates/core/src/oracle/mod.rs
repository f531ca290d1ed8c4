//! Brute-force finite-range margins for the point and line conditions, witness
//! certificates and grid scans.
//!
//! A fast pass screens every term with 128-bit fixed-point fractional parts and
//! rigorous f64 error bars; only terms that might attain the minimum are then
//! evaluated exactly (‖·‖ in Q(√d), f through MPFR enclosures).

pub mod naive;

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use rug::ops::RemRounding;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::arith::{rational_to_string, weight_f, Enclosure, ExactReal, QuadraticSurd};

const PREC: u32 = 128;
const SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Argmin {
    Point { q: u64 },
    Line { a: i64, b: i64 },
}

impl fmt::Display for Argmin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Argmin::Point { q } => write!(f, "q={q}"),
            Argmin::Line { a, b } => write!(f, "(A,B)=({a},{b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginRange {
    Points { n: u64 },
    Lines { a_max: u64, b_max: u64 },
}

impl fmt::Display for MarginRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginRange::Points { n } => write!(f, "1 <= q <= {n}"),
            MarginRange::Lines { a_max, b_max } => write!(f, "|A| <= {a_max}, |B| <= {b_max}, (A,B) != (0,0)"),
        }
    }
}

/// The minimum of a margin functional over a finite range.
#[derive(Clone, Debug)]
pub struct MarginReport {
    pub margin: Enclosure,
    pub argmin: Argmin,
    pub range: MarginRange,
    /// terms evaluated exactly after screening
    pub exact_terms: usize,
}

#[derive(Serialize)]
pub struct MarginJson {
    pub margin_lo: String,
    pub margin_hi: String,
    pub margin_approx: f64,
    pub argmin: Argmin,
    pub range: String,
    pub exact_terms: usize,
}

impl MarginReport {
    pub fn to_json(&self) -> MarginJson {
        let (lo, hi) = self.margin.to_decimal_pair();
        MarginJson {
            margin_lo: lo,
            margin_hi: hi,
            margin_approx: self.margin.mid_f64(),
            argmin: self.argmin,
            range: self.range.to_string(),
            exact_terms: self.exact_terms,
        }
    }

    /// True only when the whole enclosure lies above c.
    pub fn exceeds(&self, c: &Rational) -> bool {
        *self.margin.lo() > *c
    }
}

/// floor(frac(x)·2^128).
fn frac128(x: &ExactReal) -> u128 {
    let (lo, _) = x.rational_bounds(128);
    let scaled = Integer::from(lo.numer() << 128u32) / lo.denom();
    let m = Integer::from(1) << 128u32;
    let r = scaled.rem_euc(m);
    r.to_u128().expect("reduced mod 2^128")
}

fn circ_dist(r: u128) -> f64 {
    r.min(r.wrapping_neg()) as f64
}

const TWO_M128: f64 = 2.938735877055719e-39;
const ULP2: f64 = 2.220446049250313e-16;

/// Bounds on ‖x‖ from a fixed-point residue r that is off by less than `err` units.
fn dist_bounds(r: u128, err: f64) -> (f64, f64) {
    let d = circ_dist(r);
    let lo = ((d * (1.0 - ULP2) - err) * TWO_M128).max(0.0);
    let hi = ((d * (1.0 + ULP2) + err) * TWO_M128).min(0.5);
    (lo, hi)
}

fn f_approx(k: f64) -> f64 {
    let ls = |x: f64| if x > std::f64::consts::E { x.ln() } else { 1.0 };
    if k <= 1.0 {
        1.0
    } else {
        ls(k) * ls(k.ln())
    }
}

fn term_bounds(k: f64, d1: (f64, f64), d2: (f64, f64)) -> (f64, f64) {
    let w = f_approx(k) * k;
    (w * d1.0 * d2.0 * (1.0 - SLACK), w * d1.1 * d2.1 * (1.0 + SLACK))
}

fn zero() -> Enclosure {
    Enclosure::from_f64_exact(0.0, PREC)
}

/// Enclosure of ‖x‖ from a rational bracket [lo, hi] of x.
pub(crate) fn dist_of_bracket(lo: &Rational, hi: &Rational) -> (Rational, Rational) {
    let half = Rational::from((1, 2));
    let d = |x: &Rational| {
        let n = Rational::from(x + &half).floor();
        Rational::from(x - n).abs()
    };
    let (dl, dh) = (d(lo), d(hi));
    let contains = |t: Rational| *lo <= t && t <= *hi;
    let fl = lo.clone().floor();
    let has_int = contains(Rational::from(&fl + 1u32)) || contains(fl.clone());
    let has_half = contains(Rational::from(&fl + &half)) || contains(Rational::from(&fl + Rational::from((3, 2))));
    let min = if has_int { Rational::new() } else { dl.clone().min(dh.clone()) };
    let max = if has_half { half } else { dl.max(dh) };
    (min, max)
}

fn enc_from_bracket(lo: &Rational, hi: &Rational) -> Enclosure {
    Enclosure::new(
        Enclosure::from_rational(lo, PREC).lo().clone(),
        Enclosure::from_rational(hi, PREC).hi().clone(),
    )
}

/// ‖Aα − Bβ‖ as an enclosure: exact in a common field, bracketed otherwise.
fn line_dist(alpha: &ExactReal, beta: &ExactReal, a: i64, b: i64) -> Enclosure {
    let x = alpha.mul_integer(&Integer::from(a));
    let y = beta.mul_integer(&Integer::from(b));
    if alpha.compatible(beta) {
        let (dist, _) = (&x - &y).dist_to_nearest();
        return if dist.is_zero() { zero() } else { Enclosure::from_exact(&dist, PREC) };
    }
    // two different quadratic fields: Aα − Bβ is irrational unless A = B = 0
    let mut bits = 160;
    loop {
        let (xl, xh) = x.rational_bounds(bits);
        let (yl, yh) = y.rational_bounds(bits);
        let (lo, hi) = dist_of_bracket(&Rational::from(&xl - &yh), &Rational::from(&xh - &yl));
        if lo > 0 || bits >= 1 << 14 {
            return enc_from_bracket(&lo, &hi);
        }
        bits *= 2;
    }
}

fn point_term(alpha: &ExactReal, beta: &ExactReal, q: u64) -> Enclosure {
    let qi = Integer::from(q);
    let (d1, _) = alpha.mul_integer(&qi).dist_to_nearest();
    let (d2, _) = beta.mul_integer(&qi).dist_to_nearest();
    if d1.is_zero() || d2.is_zero() {
        return zero();
    }
    weight_f(&qi, PREC)
        .mul(&Enclosure::from_integer(&qi, PREC))
        .mul(&Enclosure::from_exact(&d1, PREC))
        .mul(&Enclosure::from_exact(&d2, PREC))
}

fn line_term(alpha: &ExactReal, beta: &ExactReal, a: i64, b: i64) -> Enclosure {
    let d = line_dist(alpha, beta, a, b);
    if *d.hi() == 0 {
        return zero();
    }
    let k = Integer::from(a.unsigned_abs().max(1)) * b.unsigned_abs().max(1);
    weight_f(&k, PREC).mul(&Enclosure::from_integer(&k, PREC)).mul(&d)
}

/// Picks the minimum by upper endpoint, ties by key order; the margin enclosure is
/// [min lo, min hi], which always contains the true minimum.
fn reduce<K: Ord + Copy>(terms: Vec<(K, Enclosure)>) -> (Enclosure, K) {
    let mut lo: Option<Float> = None;
    let mut best: Option<(K, Enclosure)> = None;
    for (k, e) in terms {
        if lo.as_ref().map_or(true, |l| e.lo() < l) {
            lo = Some(e.lo().clone());
        }
        let better = match &best {
            None => true,
            Some((bk, be)) => match e.hi().partial_cmp(be.hi()) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => k < *bk,
                _ => false,
            },
        };
        if better {
            best = Some((k, e));
        }
    }
    let (k, e) = best.expect("non-empty range");
    (Enclosure::new(lo.expect("non-empty"), e.hi().clone()), k)
}

/// min over 1 ≤ q ≤ N of f(q)·q·‖qα‖·‖qβ‖.
pub fn point_margin(alpha: &ExactReal, beta: &ExactReal, n: u64) -> MarginReport {
    assert!(n >= 1, "point_margin needs N >= 1");
    let (fa, fb) = (frac128(alpha), frac128(beta));
    let bounds = |q: u64| {
        let err = q as f64 + 1.0;
        let d1 = dist_bounds((q as u128).wrapping_mul(fa), err);
        let d2 = dist_bounds((q as u128).wrapping_mul(fb), err);
        term_bounds(q as f64, d1, d2)
    };
    let cut = (1..=n).into_par_iter().map(|q| bounds(q).1).reduce(|| f64::INFINITY, f64::min);
    let cands: Vec<u64> = (1..=n).into_par_iter().filter(|&q| bounds(q).0 <= cut).collect();
    let terms: Vec<(u64, Enclosure)> = cands.par_iter().map(|&q| (q, point_term(alpha, beta, q))).collect();
    let exact_terms = terms.len();
    let (margin, q) = reduce(terms);
    MarginReport { margin, argmin: Argmin::Point { q }, range: MarginRange::Points { n }, exact_terms }
}

/// min over |A| ≤ Amax, |B| ≤ Bmax, (A,B) ≠ (0,0) of f(|A|*|B|*)·|A|*|B|*·‖Aα − Bβ‖.
///
/// Each term is invariant under (A,B) ↦ (−A,−B), so only A > 0, or A = 0 < B, is scanned;
/// the argmin is reported in that orientation.
pub fn line_margin(alpha: &ExactReal, beta: &ExactReal, a_max: u64, b_max: u64) -> MarginReport {
    assert!(a_max >= 1 && b_max >= 1, "line_margin needs Amax, Bmax >= 1");
    let (fa, fb) = (frac128(alpha), frac128(beta));
    let bm = b_max as i64;
    let bounds = |a: i64, b: i64| {
        let r = (a as u128).wrapping_mul(fa).wrapping_sub((b as i128 as u128).wrapping_mul(fb));
        let err = a.unsigned_abs() as f64 + b.unsigned_abs() as f64 + 1.0;
        let d = dist_bounds(r, err);
        let k = (a.unsigned_abs().max(1) as f64) * (b.unsigned_abs().max(1) as f64);
        term_bounds(k, d, (1.0, 1.0))
    };
    let row = |a: i64| -> Vec<i64> {
        let start = if a == 0 { 1 } else { -bm };
        (start..=bm).collect()
    };
    let rows: Vec<i64> = (0..=a_max as i64).collect();
    let cut = rows
        .par_iter()
        .map(|&a| row(a).into_iter().map(|b| bounds(a, b).1).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    let cands: Vec<(i64, i64)> = rows
        .par_iter()
        .flat_map_iter(|&a| row(a).into_iter().filter(move |&b| bounds(a, b).0 <= cut).map(move |b| (a, b)))
        .collect();
    let terms: Vec<((i64, i64), Enclosure)> =
        cands.par_iter().map(|&(a, b)| ((a, b), line_term(alpha, beta, a, b))).collect();
    let exact_terms = terms.len();
    let (margin, (a, b)) = reduce(terms);
    MarginReport { margin, argmin: Argmin::Line { a, b }, range: MarginRange::Lines { a_max, b_max }, exact_terms }
}

pub const CERTIFICATE_LABEL: &str = "finite-range certificate only";

#[derive(Serialize)]
pub struct WitnessReport {
    pub label: &'static str,
    pub theta: String,
    pub alpha: String,
    pub alpha_approx: f64,
    /// the first q at which ‖qα‖ = 0 for the rational midpoint
    pub alpha_denominator: String,
    pub denominator_exceeds_n: bool,
    pub c: String,
    pub point: MarginJson,
    pub line: MarginJson,
    pub point_pass: bool,
    pub line_pass: bool,
    pub pass: bool,
}

/// Checks the midpoint of [lo, hi] against c over the finite ranges q ≤ N and
/// |A| ≤ Amax, |B| ≤ Bmax.
pub fn verify_witness(
    theta: &QuadraticSurd,
    lo: &Rational,
    hi: &Rational,
    c: &Rational,
    n: u64,
    a_max: u64,
    b_max: u64,
) -> WitnessReport {
    let mid = Rational::from(lo + hi) / 2u32;
    let alpha = ExactReal::from_rational(&mid);
    let pm = point_margin(theta.value(), &alpha, n);
    let lm = line_margin(theta.value(), &alpha, a_max, b_max);
    let (point_pass, line_pass) = (pm.exceeds(c), lm.exceeds(c));
    WitnessReport {
        label: CERTIFICATE_LABEL,
        theta: theta.to_string(),
        alpha: rational_to_string(&mid),
        alpha_approx: mid.to_f64(),
        alpha_denominator: mid.denom().to_string(),
        denominator_exceeds_n: *mid.denom() > n,
        c: rational_to_string(c),
        point: pm.to_json(),
        line: lm.to_json(),
        point_pass,
        line_pass,
        pass: point_pass && line_pass,
    }
}

/// Point margins on a grid of nodes x_i × y_j.
pub struct ScanGrid {
    pub xs: Vec<ExactReal>,
    pub ys: Vec<ExactReal>,
    pub n: u64,
    /// row-major: cells[i][j] at (xs[i], ys[j])
    pub cells: Vec<Vec<MarginReport>>,
}

fn nodes(lo: &ExactReal, hi: &ExactReal, res: usize) -> Vec<ExactReal> {
    if res == 1 {
        return vec![lo.clone()];
    }
    let span = hi - lo;
    (0..res).map(|i| lo + &span.mul_rational(&Rational::from((i as u64, res as u64 - 1)))).collect()
}

/// Evenly spaced nodes including both ends; a resolution of 1 scans the lower corner only.
pub fn scan_grid(x_range: (&ExactReal, &ExactReal), y_range: (&ExactReal, &ExactReal), resolution: usize, n: u64) -> ScanGrid {
    assert!(resolution >= 1, "scan_grid needs at least one node per axis");
    let xs = nodes(x_range.0, x_range.1, resolution);
    let ys = nodes(y_range.0, y_range.1, resolution);
    let cells = xs.iter().map(|x| ys.iter().map(|y| point_margin(x, y, n)).collect()).collect();
    ScanGrid { xs, ys, n, cells }
}

impl ScanGrid {
    /// CSV with '#'-prefixed metadata lines, then a header and one row per node.
    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str("i,j,x,y,margin_lo,margin_hi,argmin_q\n");
        for (i, row) in self.cells.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                let (lo, hi) = m.margin.to_decimal_pair();
                let q = match m.argmin {
                    Argmin::Point { q } => q,
                    Argmin::Line { .. } => unreachable!(),
                };
                out.push_str(&format!("{i},{j},{},{},{lo},{hi},{q}\n", self.xs[i], self.ys[j]));
            }
        }
        out
    }
}
