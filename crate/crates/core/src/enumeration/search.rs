//! Bounded-height enumeration of rational points and integer lines near a window on L_θ.
//!
//! Both searches split the denominator (q, resp. B) into dyadic ranges. On each range
//! the constraints form a thin box in Z³ which is enumerated as a lattice problem;
//! every hit is then filtered exactly.

use std::collections::BTreeSet;
use std::fmt;

use rug::ops::DivRounding;
use rug::{Integer, Rational};
use serde::{Serialize, Serializer};

use super::lattice::{short_vectors, Row};
use super::EnumError;
use crate::arith::{nearest_distance, rational_to_string, ExactReal, Theta};
use crate::geometry::{height_line, height_point, ProjLine, RationalPoint};

/// A closed interval [lo, hi] of ordinates on L_θ, lo < hi.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Window {
    lo: Rational,
    hi: Rational,
}

impl Window {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, EnumError> {
        if lo >= hi {
            return Err(EnumError::EmptyWindow(rational_to_string(&lo), rational_to_string(&hi)));
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }
    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    pub fn mid(&self) -> Rational {
        Rational::from(&self.lo + &self.hi) / 2u32
    }

    pub fn lo_exact(&self) -> ExactReal {
        ExactReal::from_rational(&self.lo)
    }
    pub fn hi_exact(&self) -> ExactReal {
        ExactReal::from_rational(&self.hi)
    }

    pub fn expand(&self, margin: &Rational) -> Window {
        Window { lo: Rational::from(&self.lo - margin), hi: Rational::from(&self.hi + margin) }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// The i-th of `count` equal closed parts.
    pub fn part(&self, i: u64, count: u64) -> Window {
        let w = self.width() / count;
        let lo = Rational::from(&w * i) + &self.lo;
        let hi = Rational::from(&lo + &w);
        Window { lo, hi }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", rational_to_string(&self.lo), rational_to_string(&self.hi))
    }
}

impl Serialize for Window {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Window", 2)?;
        st.serialize_field("lo", &rational_to_string(&self.lo))?;
        st.serialize_field("hi", &rational_to_string(&self.hi))?;
        st.end()
    }
}

fn ceil_rat(x: &Rational) -> Integer {
    let (n, d) = x.clone().into_numer_denom();
    n.div_ceil(d)
}

fn floor_rat(x: &Rational) -> Integer {
    let (n, d) = x.clone().into_numer_denom();
    n.div_floor(d)
}

/// Smallest power of two ≥ x (x > 0).
fn pow2_above(x: &Rational) -> Integer {
    let c = ceil_rat(x).max(Integer::from(1));
    let bits = Integer::from(&c - 1u32).significant_bits();
    Integer::from(1) << bits
}

/// Lattice points of the box |coord_i| ≤ bound_i after scaling every coordinate to ≈ Z.
/// `rows` are the basis rows already scaled; `z` is the common scale.
fn box_hits(rows: &[Row], z: &Integer) -> Vec<Vec<Integer>> {
    // each coordinate of a box point is at most 5z/4, so the ball of radius² 3·(5z/4)² covers the box
    let r = Integer::from(z * 5u32).div_ceil(Integer::from(4));
    let r2 = Integer::from(r.square_ref()) * 3u32;
    short_vectors(rows, &r2)
}

/// All P(p,r,q) with p the nearest integer to qθ, hmin ≤ H(P) < hmax and
/// r/q ∈ [lo − margin, hi + margin]. Sorted by q, then r.
pub fn enumerate_points(
    window: &Window,
    hmin: &Rational,
    hmax: &Rational,
    theta: &Theta,
    margin: &Rational,
) -> Result<Vec<RationalPoint>, EnumError> {
    points_impl(window, hmin, hmax, theta, |_| margin.clone())
}

/// A superset of the points with hmin ≤ H(P) < hmax whose Δ(P, c·f(q)⁻¹) meets `window`:
/// the margin shrinks with q since the halfwidth is at most c/H(P) ≤ c/(c_lb·q).
pub fn enumerate_points_reach(
    window: &Window,
    hmin: &Rational,
    hmax: &Rational,
    theta: &Theta,
    c: &Rational,
) -> Result<Vec<RationalPoint>, EnumError> {
    let lb = theta.c_lb().clone();
    points_impl(window, hmin, hmax, theta, |qa| {
        let h = Rational::from(&lb * qa).max(hmin.clone());
        Rational::from(c / h)
    })
}

fn points_impl(
    window: &Window,
    hmin: &Rational,
    hmax: &Rational,
    theta: &Theta,
    margin: impl Fn(&Integer) -> Rational,
) -> Result<Vec<RationalPoint>, EnumError> {
    let mut found: BTreeSet<(Integer, Integer, Integer)> = BTreeSet::new();
    if hmax <= hmin || *hmax <= 0 {
        return Ok(Vec::new());
    }
    let th = theta.value();
    // H ≥ c_lb·q and H ≤ q²/2
    let q_top = floor_rat(&(Rational::from(hmax / theta.c_lb()))).max(Integer::from(1));
    let q_bottom = {
        let two_h = Rational::from(hmin * 2u32);
        let s = floor_rat(&two_h).sqrt();
        s.max(Integer::from(1))
    };
    let hmin_x = ExactReal::from_rational(hmin);
    let hmax_x = ExactReal::from_rational(hmax);
    let mut qa = Integer::from(1) << (q_bottom.significant_bits() - 1);
    while qa <= q_top {
        let qb = Integer::from(&qa * 2u32);
        let win = window.expand(&margin(&qa));
        let y0 = win.mid();
        let half = win.width() / 2u32;
        // box: qa ≤ q < qb, |qθ − p| ≤ e, |q·y0 − r| ≤ qb·half
        let e = Rational::from(hmax / Rational::from(qa.square_ref()));
        let e = e.min(Rational::from((1, 2)));
        let w = Rational::from(&half * &qb);
        let z = pow2_above(&(Rational::from(&qb + &e) + &w + 1u32)) << 6u32;
        let m1 = ceil_rat(&Rational::from((z.clone(), qb.clone())));
        let m2 = ceil_rat(&(Rational::from(&z) / &e));
        let m3 = ceil_rat(&(Rational::from(&z) / &w));
        let t = th.mul_integer(&m2).round_nearest();
        let y = Rational::from(&y0 * &m3).round();
        let y = y.numer().clone();
        // (q, p, r) ↦ (q·m1, q·t − p·m2, q·y − r·m3)
        let rows: Vec<Row> = vec![
            vec![m1.clone(), t.clone(), y.clone()],
            vec![Integer::new(), -m2.clone(), Integer::new()],
            vec![Integer::new(), Integer::new(), -m3.clone()],
        ];
        for x in box_hits(&rows, &z) {
            let (mut q, mut p, mut r) = (x[0].clone(), x[1].clone(), x[2].clone());
            if q < 0 {
                q = -q;
                p = -p;
                r = -r;
            }
            if q < qa || q >= qb || q == 0 {
                continue;
            }
            let mut g = q.clone().gcd(&p);
            g.gcd_mut(&r);
            if g != 1 {
                continue;
            }
            let yq = Rational::from((r.clone(), q.clone()));
            if !win.contains(&yq) {
                continue;
            }
            let (_, best) = nearest_distance(&q, theta.surd());
            if best != p {
                continue;
            }
            let pt = RationalPoint::new(p.clone(), r.clone(), q.clone()).expect("q > 0");
            let h = height_point(&pt, th);
            if h >= hmin_x && h < hmax_x {
                found.insert((q, r, p));
            }
        }
        qa = qb;
    }
    Ok(found
        .into_iter()
        .map(|(q, r, p)| RationalPoint::new(p, r, q).expect("q > 0"))
        .collect())
}

/// All L(A,B,C), B > 0, gcd 1, with hmin ≤ |A|*·B² < hmax and
/// (Aθ + C)/B ∈ [lo − margin, hi + margin]. Sorted by B, then A, then C.
pub fn enumerate_lines(
    window: &Window,
    hmin: &Rational,
    hmax: &Rational,
    theta: &Theta,
    margin: &Rational,
) -> Result<Vec<ProjLine>, EnumError> {
    lines_impl(window, hmin, hmax, theta, |_, _| margin.clone())
}

/// A superset of the lines with hmin ≤ H(L) < hmax whose Δ(L, c·f(|A|*|B|*)⁻¹) meets
/// `window`: the halfwidth is at most c/H(L) ≤ c/(max(|A|, 1)·B²).
pub fn enumerate_lines_reach(
    window: &Window,
    hmin: &Rational,
    hmax: &Rational,
    theta: &Theta,
    c: &Rational,
) -> Result<Vec<ProjLine>, EnumError> {
    lines_impl(window, hmin, hmax, theta, |ba, a_floor| {
        let h = Rational::from(Integer::from(ba.square_ref()) * a_floor).max(hmin.clone());
        Rational::from(c / h)
    })
}

fn lines_impl(
    window: &Window,
    hmin: &Rational,
    hmax: &Rational,
    theta: &Theta,
    margin: impl Fn(&Integer, &Integer) -> Rational,
) -> Result<Vec<ProjLine>, EnumError> {
    let mut found: BTreeSet<(Integer, Integer, Integer)> = BTreeSet::new();
    if hmax <= hmin || *hmax <= 1 {
        return Ok(Vec::new());
    }
    let th = theta.value();
    let b_top = {
        let s = ceil_rat(hmax).sqrt();
        s + 1u32
    };
    let mut ba = Integer::from(1);
    while ba <= b_top {
        let bb = Integer::from(&ba * 2u32);
        let a_top = floor_rat(&Rational::from(hmax / Rational::from(ba.square_ref()))).max(Integer::from(1));
        // shells |A| ≤ 1, then 2^j < |A| ≤ 2^{j+1}; in a shell H ≥ a_floor·B²
        let mut a_floor = Integer::from(1);
        let mut amax = Integer::from(1);
        loop {
            lines_box(window, &ba, &bb, &amax, &margin(&ba, &a_floor), hmin, hmax, th, &mut found);
            if amax >= a_top {
                break;
            }
            a_floor = amax.clone();
            amax = Integer::from(&amax * 2u32).min(a_top.clone());
        }
        ba = bb;
    }
    Ok(found
        .into_iter()
        .map(|(b, a, c)| ProjLine::new(a, b, c).expect("B > 0"))
        .collect())
}

/// Lines with ba ≤ B < bb, |A| ≤ amax and ordinate within `window` ± `margin`.
#[allow(clippy::too_many_arguments)]
fn lines_box(
    window: &Window,
    ba: &Integer,
    bb: &Integer,
    amax: &Integer,
    margin: &Rational,
    hmin: &Rational,
    hmax: &Rational,
    th: &ExactReal,
    found: &mut BTreeSet<(Integer, Integer, Integer)>,
) {
    let win = window.expand(margin);
    let y0 = win.mid();
    let half = win.width() / 2u32;
    // box: ba ≤ B < bb, |A| ≤ amax, |Aθ − B·y0 + C| ≤ bb·half
    let w = Rational::from(&half * bb);
    let z = pow2_above(&(Rational::from(amax + bb) + &w + 1u32)) << 6u32;
    let m1 = ceil_rat(&Rational::from((z.clone(), amax.clone())));
    let m2 = ceil_rat(&Rational::from((z.clone(), bb.clone())));
    let m3 = ceil_rat(&(Rational::from(&z) / &w));
    let t = th.mul_integer(&m3).round_nearest();
    let y = Rational::from(&y0 * &m3).round();
    let y = y.numer().clone();
    // (A, B, C) ↦ (A·m1, B·m2, A·t − B·y + C·m3)
    let rows: Vec<Row> = vec![
        vec![m1.clone(), Integer::new(), t.clone()],
        vec![Integer::new(), m2.clone(), -y.clone()],
        vec![Integer::new(), Integer::new(), m3.clone()],
    ];
    for x in box_hits(&rows, &z) {
        let (mut a, mut b, mut c) = (x[0].clone(), x[1].clone(), x[2].clone());
        if b < 0 {
            a = -a;
            b = -b;
            c = -c;
        }
        if b < *ba || b >= *bb || b == 0 {
            continue;
        }
        let mut g = a.clone().gcd(&b);
        g.gcd_mut(&c);
        if g != 1 {
            continue;
        }
        let line = ProjLine::new(a.clone(), b.clone(), c.clone()).expect("B > 0");
        let h = Rational::from(height_line(&line).expect("B > 0"));
        if h < *hmin || h >= *hmax {
            continue;
        }
        let omega = line.ordinate(th).expect("B > 0");
        if omega < win.lo_exact() || omega > win.hi_exact() {
            continue;
        }
        found.insert((b, a, c));
    }
}
