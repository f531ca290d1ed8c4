//! Executable checks of the point/line duality statements, plus random instance generators.

use std::collections::BTreeMap;
use std::cmp::Ordering;

use rand::Rng;
use rug::{Integer, Rational};
use serde::Serialize;

use super::{height_line, height_point, intersect, line_through, ProjLine, RationalPoint};
use crate::arith::{nearest_distance, pow2, ExactReal, QuadraticSurd};

/// Outcome of one duality check. Hypothesis failures are "not applicable", never violations.
#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// The constructed line (point case) or intersection point (line case).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier: Option<String>,
    /// The sharper inclusion with the explicit |B| (resp. q) factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_inclusion: Option<bool>,
    /// The inclusion with radius 2δ²H(·2)/H(·1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_inclusion: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height_bound: Option<bool>,
    pub values: BTreeMap<String, String>,
}

impl DualityReport {
    fn not_applicable(reason: impl Into<String>) -> Self {
        DualityReport {
            applicable: false,
            reason: Some(reason.into()),
            carrier: None,
            strong_inclusion: None,
            weak_inclusion: None,
            height_bound: None,
            values: BTreeMap::new(),
        }
    }

    pub fn violations(&self) -> usize {
        [self.strong_inclusion, self.weak_inclusion, self.height_bound]
            .iter()
            .filter(|v| **v == Some(false))
            .count()
    }
}

fn cube(x: &Integer) -> Integer {
    Integer::from(x.square_ref()) * x
}

fn int(x: &Integer) -> ExactReal {
    ExactReal::from_integer(x.clone())
}

/// Two rational points close on L_θ: the line through them carries a small dangerous interval.
pub fn check_duality_point(
    p1: &RationalPoint,
    p2: &RationalPoint,
    theta: &QuadraticSurd,
    delta: &ExactReal,
) -> DualityReport {
    if delta.signum() != Ordering::Greater {
        return DualityReport::not_applicable("delta must be positive");
    }
    if p1.x() == p2.x() {
        return DualityReport::not_applicable("equal first coordinates");
    }
    if p1.y() == p2.y() {
        return DualityReport::not_applicable("equal second coordinates");
    }
    let (d1, n1) = nearest_distance(p1.q(), theta);
    let (d2, n2) = nearest_distance(p2.q(), theta);
    if n1 != *p1.p() || n2 != *p2.p() {
        return DualityReport::not_applicable("p is not the nearest integer to q·theta");
    }
    // 0 < q1‖q2θ‖ ≤ q2‖q1θ‖
    if d2.mul_integer(p1.q()) > d1.mul_integer(p2.q()) {
        return DualityReport::not_applicable("ordering q1*||q2 theta|| <= q2*||q1 theta|| fails");
    }
    let h1 = height_point(p1, theta);
    let h2 = height_point(p2, theta);
    let y1 = ExactReal::from_rational(&p1.y());
    let y2 = ExactReal::from_rational(&p2.y());
    if (&(&y2 - &y1).abs() * &h1) >= *delta {
        return DualityReport::not_applicable("second point outside the first dangerous interval");
    }
    let line = line_through(p1, p2).expect("distinct points");
    let hl = ExactReal::from_integer(height_line(&line).expect("distinct abscissae give B != 0"));
    let omega = line.ordinate(theta).expect("B != 0");
    let gap = (&y2 - &omega).abs();
    let lhs = &gap * &hl;
    let dd = delta * delta;
    let ratio = h2.checked_div(&h1).expect("positive height");
    let strong_rhs = (&(&dd * &ratio) * &int(line.b()))
        .checked_div(&d1.mul_integer(p2.q()))
        .expect("nonzero distance");
    let weak_rhs = (&dd * &ratio).mul_integer(&Integer::from(2));
    let height_rhs = (delta * &h1)
        .mul_integer(&Integer::from(4))
        .mul_rational(&Rational::from((cube(p2.q()), cube(p1.q()))));

    let mut values = BTreeMap::new();
    values.insert("H(P1)".into(), h1.to_string());
    values.insert("H(P2)".into(), h2.to_string());
    values.insert("H(L)".into(), hl.to_string());
    values.insert("omega".into(), omega.to_string());
    values.insert("gap*H(L)".into(), lhs.to_string());
    values.insert("strong_radius".into(), strong_rhs.to_string());
    values.insert("weak_radius".into(), weak_rhs.to_string());
    values.insert("height_limit".into(), height_rhs.to_string());
    DualityReport {
        applicable: true,
        reason: None,
        carrier: Some(line.to_string()),
        strong_inclusion: Some(lhs < strong_rhs),
        weak_inclusion: Some(lhs < weak_rhs),
        height_bound: Some(hl <= height_rhs),
        values,
    }
}

/// Two lines crossing L_θ close together: their intersection point carries a small dangerous interval.
pub fn check_duality_line(
    l1: &ProjLine,
    l2: &ProjLine,
    theta: &QuadraticSurd,
    delta: &ExactReal,
) -> DualityReport {
    if delta.signum() != Ordering::Greater {
        return DualityReport::not_applicable("delta must be positive");
    }
    if *l1.b() == 0 || *l2.b() == 0 {
        return DualityReport::not_applicable("vertical line");
    }
    let a2b1 = Integer::from(l2.a() * l1.b()).abs();
    let a1b2 = Integer::from(l1.a() * l2.b()).abs();
    if a2b1 > a1b2 {
        return DualityReport::not_applicable("ordering |A2 B1| <= |A1 B2| fails");
    }
    let (pt, d) = match intersect(l1, l2) {
        Ok(v) => v,
        Err(_) => return DualityReport::not_applicable("parallel lines"),
    };
    let hl1 = ExactReal::from_integer(height_line(l1).unwrap());
    let hl2 = ExactReal::from_integer(height_line(l2).unwrap());
    let w1 = l1.ordinate(theta).unwrap();
    let w2 = l2.ordinate(theta).unwrap();
    if (&(&w2 - &w1).abs() * &hl1) >= *delta {
        return DualityReport::not_applicable("second line crosses outside the first dangerous interval");
    }
    let hp = height_point(&pt, theta);
    let gap = (&w2 - &ExactReal::from_rational(&pt.y())).abs();
    let lhs = &gap * &hp;
    let dd = delta * delta;
    let ratio = hl2.checked_div(&hl1).unwrap();
    let strong_rhs = (&dd * &ratio)
        .mul_integer(pt.q())
        .mul_rational(&Rational::from((Integer::from(1), a1b2.clone())));
    let weak_rhs = (&dd * &ratio).mul_integer(&Integer::from(2));
    let b1 = Integer::from(l1.b().abs_ref());
    let b2 = Integer::from(l2.b().abs_ref());
    let height_rhs = (delta * &hl1)
        .mul_integer(&Integer::from(4))
        .mul_rational(&Rational::from((cube(&b2), cube(&b1))));

    let mut values = BTreeMap::new();
    values.insert("H(L1)".into(), hl1.to_string());
    values.insert("H(L2)".into(), hl2.to_string());
    values.insert("H(P)".into(), hp.to_string());
    values.insert("d".into(), d.to_string());
    values.insert("gap*H(P)".into(), lhs.to_string());
    values.insert("strong_radius".into(), strong_rhs.to_string());
    values.insert("weak_radius".into(), weak_rhs.to_string());
    values.insert("height_limit".into(), height_rhs.to_string());
    DualityReport {
        applicable: true,
        reason: None,
        carrier: Some(pt.to_string()),
        strong_inclusion: Some(lhs < strong_rhs),
        weak_inclusion: Some(lhs < weak_rhs),
        height_bound: Some(hp <= height_rhs),
        values,
    }
}

/// A rational δ with minimal < δ ≤ cap, or None when minimal ≥ cap.
fn delta_above(minimal: &ExactReal, cap: &Rational, rng: &mut impl Rng) -> Option<Rational> {
    let cap_x = ExactReal::from_rational(cap);
    if *minimal >= cap_x {
        return None;
    }
    let (_, hi) = minimal.rational_bounds(96);
    let bump = Rational::from((rng.gen_range(1u32..=1024), 1024u32));
    let cand = Rational::from(&hi * (Rational::from(1) + bump));
    Some(if cand > *cap { cap.clone() } else { cand })
}

/// Random instance satisfying the point-duality hypotheses, with δ ≤ 2^-10.
pub fn random_point_instance(theta: &QuadraticSurd, rng: &mut impl Rng) -> (RationalPoint, RationalPoint, Rational) {
    let cap = pow2(-10);
    loop {
        let q1 = Integer::from(rng.gen_range(1u32..=30));
        let (_, p1) = nearest_distance(&q1, theta);
        let r1 = Integer::from(rng.gen_range(0u32..=q1.to_u32().unwrap()));
        let q2 = Integer::from(rng.gen_range(100_000u32..=10_000_000));
        let (_, p2) = nearest_distance(&q2, theta);
        let base = Rational::from((Integer::from(&q2 * &r1), q1.clone())).round();
        let r2 = base.numer() + Integer::from(rng.gen_range(-3i32..=3));
        let (Ok(a), Ok(b)) = (RationalPoint::new(p1, r1, q1), RationalPoint::new(p2, r2, q2)) else { continue };
        if a.x() == b.x() || a.y() == b.y() {
            continue;
        }
        let minimal = &ExactReal::from_rational(&Rational::from(b.y() - a.y()).abs()) * &height_point(&a, theta);
        let Some(delta) = delta_above(&minimal, &cap, rng) else { continue };
        if check_duality_point(&a, &b, theta, &ExactReal::from_rational(&delta)).applicable {
            return (a, b, delta);
        }
    }
}

/// Random instance satisfying the line-duality hypotheses, with δ ≤ 2^-10.
pub fn random_line_instance(theta: &QuadraticSurd, rng: &mut impl Rng) -> (ProjLine, ProjLine, Rational) {
    let cap = pow2(-10);
    loop {
        let a1 = rng.gen_range(1i64..=30) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let b1 = rng.gen_range(1i64..=30);
        let c1 = rng.gen_range(-60i64..=60);
        let Ok(l1) = ProjLine::new(a1, b1, c1) else { continue };
        if *l1.a() == 0 {
            continue;
        }
        let h1 = height_line(&l1).unwrap();
        let lo = Integer::from(&h1 << 11u32);
        let span = lo.to_u64().unwrap();
        let b2 = Integer::from(rng.gen_range(span..=span * 8));
        // |A2| ≤ |A1|·B2/B1
        let a2_max = Integer::from(l1.a().abs_ref()) * &b2 / l1.b();
        let a2_bits = rng.gen_range(0..=a2_max.significant_bits());
        let a2_cap = Integer::from(1) << a2_bits;
        let a2_lim = a2_cap.min(a2_max).to_u64().unwrap_or(u64::MAX).max(1);
        let a2 = Integer::from(rng.gen_range(0..=a2_lim)) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let w1 = l1.ordinate(theta).unwrap();
        // C2 ≈ B2·ω1 − A2·θ, so that ω2 lands near ω1
        let target = &w1.mul_integer(&b2) - &theta.mul_integer(&a2);
        let c2 = target.round_nearest() + Integer::from(rng.gen_range(-2i32..=2));
        let Ok(l2) = ProjLine::new(a2, b2, c2) else { continue };
        let w2 = l2.ordinate(theta).unwrap();
        let minimal = &(&w2 - &w1).abs() * &ExactReal::from_integer(h1);
        let Some(delta) = delta_above(&minimal, &cap, rng) else { continue };
        if check_duality_line(&l1, &l2, theta, &ExactReal::from_rational(&delta)).applicable {
            return (l1, l2, delta);
        }
    }
}

/// The smallest δ with (P2)_θ on the closure of Δ(P1, δ): |r2/q2 − r1/q1|·H(P1).
pub fn minimal_point_delta(p1: &RationalPoint, p2: &RationalPoint, theta: &QuadraticSurd) -> ExactReal {
    &ExactReal::from_rational(&Rational::from(p2.y() - p1.y()).abs()) * &height_point(p1, theta)
}

/// The smallest δ with ω2 on the closure of Δ(L1, δ): |ω2 − ω1|·H(L1).
pub fn minimal_line_delta(l1: &ProjLine, l2: &ProjLine, theta: &QuadraticSurd) -> Option<ExactReal> {
    let h = height_line(l1).ok()?;
    let gap = (&l2.ordinate(theta).ok()? - &l1.ordinate(theta).ok()?).abs();
    Some(&gap * &ExactReal::from_integer(h))
}
