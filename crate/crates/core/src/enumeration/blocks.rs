//! Carriers of clustered class members, blocks of consecutive windows, and the case split.

use std::cmp::Ordering;

use rug::ops::DivRounding;
use rug::{Integer, Rational};
use serde::Serialize;

use super::classes::{class_members, ClassContext, HeightClass, Kind};
use super::search::Window;
use super::{Diagnostic, EnumError};
use crate::arith::{log_star, rational_to_string, ArithError, Enclosure, ExactReal, Precision};
use crate::geometry::{intersect, line_through, DangerInterval, End, GeometryError, ProjLine, RationalPoint, Source};

/// The common line of clustered points, or the common point of clustered lines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Carrier {
    #[serde(rename = "line")]
    Line(ProjLine),
    #[serde(rename = "point")]
    Point(RationalPoint),
}

/// m consecutive windows of equal length going down from `base`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub base: Window,
    pub m: u64,
    pub carrier: Option<Carrier>,
}

impl Block {
    /// M_1 ∪ … ∪ M_m = [hi − m·|J|, hi].
    pub fn window(&self) -> Window {
        let w = self.base.width();
        let lo = Rational::from(self.base.hi() - Rational::from(&w * self.m));
        Window::new(lo, self.base.hi().clone()).expect("m ≥ 1")
    }
}

fn violation(check: &str, class: Option<HeightClass>, window: &Window, dump: Vec<String>) -> EnumError {
    EnumError::LemmaViolation(Box::new(Diagnostic { check: check.into(), class, window: window.to_string(), dump }))
}

/// The line through all given points, or None for fewer than two distinct points.
/// Points off that line are reported as a violation.
pub fn collinearity_carrier(
    points: &[RationalPoint],
    class: Option<HeightClass>,
    window: &Window,
) -> Result<Option<ProjLine>, EnumError> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 2 {
        return Ok(None);
    }
    let line = line_through(&pts[0], &pts[1])?;
    let off: Vec<&RationalPoint> = pts.iter().filter(|p| !line.contains(p)).collect();
    if !off.is_empty() {
        let mut dump = vec![format!("line through first two: {line}")];
        dump.extend(pts.iter().map(|p| format!("point {p}{}", if line.contains(p) { "" } else { " (off)" })));
        return Err(violation("collinearity", class, window, dump));
    }
    Ok(Some(line))
}

/// The point shared by all given lines, or None for fewer than two distinct lines.
pub fn concurrency_carrier(
    lines: &[ProjLine],
    class: Option<HeightClass>,
    window: &Window,
) -> Result<Option<RationalPoint>, EnumError> {
    let mut ls = lines.to_vec();
    ls.sort();
    ls.dedup();
    if ls.len() < 2 {
        return Ok(None);
    }
    let pt = match intersect(&ls[0], &ls[1]) {
        Ok((pt, _)) => pt,
        Err(GeometryError::Parallel(a, b)) => {
            return Err(violation("concurrency", class, window, vec![format!("parallel lines {a} and {b}")]));
        }
        Err(e) => return Err(e.into()),
    };
    if ls.iter().any(|l| !l.contains(&pt)) {
        let mut dump = vec![format!("intersection of first two: {pt}")];
        dump.extend(ls.iter().map(|l| format!("line {l}{}", if l.contains(&pt) { "" } else { " (misses)" })));
        return Err(violation("concurrency", class, window, dump));
    }
    Ok(Some(pt))
}

fn check_class_window(ctx: &ClassContext, j: &Window, class: &HeightClass) -> Result<Rational, EnumError> {
    let w = ctx.window_len(class.n, class.l);
    if j.width() != w {
        return Err(EnumError::InvalidClass(format!(
            "window {j} has length {}, class ({},{},{}) needs {}",
            rational_to_string(&j.width()),
            class.n,
            class.l,
            class.k,
            rational_to_string(&w)
        )));
    }
    Ok(w)
}

fn ceil_rat(x: &Rational) -> Integer {
    let (n, d) = x.clone().into_numer_denom();
    n.div_ceil(d)
}

/// Shared tail of both block builders: given on-carrier members within `reach` below
/// J's top, compute m = max{m : #(members meeting M_1 ∪ … ∪ M_m) ≥ m + 1} and check
/// that nothing off the carrier meets the block.
fn finish_block(
    ctx: &ClassContext,
    j: &Window,
    class: &HeightClass,
    kind: Kind,
    w: &Rational,
    reach_lo: &Rational,
    on_carrier: impl Fn(&Source) -> bool,
    carrier: Carrier,
) -> Result<Block, EnumError> {
    let count = ceil_rat(&(Rational::from(j.hi() - reach_lo) / w)).max(Integer::from(1));
    let count = count.to_u64().ok_or(ArithError::Overflow)?;
    let lo0 = Rational::from(j.hi() - Rational::from(w * count));
    let span = Window::new(lo0.clone(), j.hi().clone())?;
    let all = class_members(ctx, &span, class, kind)?;
    // smallest i with Δ meeting M_i; cell index c counts upward from lo0, M_i is cell count − i
    let mut first_on: Vec<u64> = Vec::new();
    let mut off: Vec<(u64, &DangerInterval)> = Vec::new();
    for iv in &all {
        let (_, last) = iv.cell_range(&lo0, w, count, ctx.precision)?.expect("member meets the span");
        let i = count - last;
        if on_carrier(iv.source()) {
            first_on.push(i);
        } else {
            off.push((i, iv));
        }
    }
    first_on.sort_unstable();
    let total = first_on.len() as u64;
    let n_at = |m: u64| first_on.iter().filter(|&&i| i <= m.min(count)).count() as u64;
    let top = total.max(count);
    let m = (1..=top).filter(|&m| n_at(m) > m).max().unwrap_or(1);
    let block = Block { base: j.clone(), m, carrier: Some(carrier) };
    let bad: Vec<String> = if m <= count {
        off.iter().filter(|(i, _)| *i <= m).map(|(_, iv)| iv.source().coords()).collect()
    } else {
        class_members(ctx, &block.window(), class, kind)?
            .iter()
            .filter(|iv| !on_carrier(iv.source()))
            .map(|iv| iv.source().coords())
            .collect()
    };
    if !bad.is_empty() {
        let mut dump = vec![format!("carrier {:?}, m = {m}", block.carrier)];
        dump.extend(bad.into_iter().map(|s| format!("off-carrier member {s}")));
        return Err(violation("block carrier", Some(*class), &block.window(), dump));
    }
    Ok(block)
}

/// The block of point windows starting at J: m_P(J) windows with carrier L_J, or (J, 1, none).
pub fn build_block_points(ctx: &ClassContext, j: &Window, class: &HeightClass) -> Result<Block, EnumError> {
    let w = check_class_window(ctx, j, class)?;
    let members = class_members(ctx, j, class, Kind::Point)?;
    let pts: Vec<RationalPoint> = members
        .iter()
        .filter_map(|iv| match iv.source() {
            Source::Point(p) => Some(p.clone()),
            _ => None,
        })
        .collect();
    let Some(line) = collinearity_carrier(&pts, Some(*class), j)? else {
        return Ok(Block { base: j.clone(), m: 1, carrier: None });
    };
    // carrier points satisfy |r/q − ω| = |A/B|·|p/q − θ| < |A/B|·H_max/q_min³
    let (_, hmax) = ctx.sub_band(class.n, class.l);
    let (qmin, _) = ctx.q_bounds(class);
    let qmin = qmin.max(Rational::from(1));
    let ratio = Rational::from((line.a().clone().abs(), line.b().clone()));
    let rho = ratio * hmax / Rational::from(qmin.square_ref()) / qmin;
    let omega = line.ordinate(ctx.theta.value())?;
    let (olo, _) = omega.rational_bounds(64);
    let margin = ctx.margin(&ctx.sub_band(class.n, class.l).0);
    let reach_lo = (olo - rho - margin).min(j.lo().clone());
    let l2 = line.clone();
    finish_block(
        ctx,
        j,
        class,
        Kind::Point,
        &w,
        &reach_lo,
        move |s| matches!(s, Source::Point(p) if l2.contains(p)),
        Carrier::Line(line),
    )
}

/// The block of line windows starting at J: m_L(J) windows with carrier P_J, or (J, 1, none).
pub fn build_block_lines(ctx: &ClassContext, j: &Window, class: &HeightClass) -> Result<Block, EnumError> {
    let w = check_class_window(ctx, j, class)?;
    let members = class_members(ctx, j, class, Kind::Line)?;
    let lines: Vec<ProjLine> = members
        .iter()
        .filter_map(|iv| match iv.source() {
            Source::Line(l) => Some(l.clone()),
            _ => None,
        })
        .collect();
    let Some(pt) = concurrency_carrier(&lines, Some(*class), j)? else {
        return Ok(Block { base: j.clone(), m: 1, carrier: None });
    };
    // lines through P have |ω − r/q| = |A/B|·|θ − p/q| with |A/B| < H_max/2^{3k}
    let (_, hmax) = ctx.sub_band(class.n, class.l);
    let gap = (ctx.theta.value() - &ExactReal::from_rational(&pt.x())).abs();
    let (_, gap_hi) = gap.rational_bounds(64);
    let rho = hmax * Rational::from((1, Integer::from(1) << (3 * class.k))) * gap_hi;
    let ylo = pt.y();
    let margin = ctx.margin(&ctx.sub_band(class.n, class.l).0);
    let reach_lo = (ylo - rho - margin).min(j.lo().clone());
    let p2 = pt.clone();
    finish_block(
        ctx,
        j,
        class,
        Kind::Line,
        &w,
        &reach_lo,
        move |s| matches!(s, Source::Line(l) if l.contains(&p2)),
        Carrier::Point(pt),
    )
}

/// Compares E_x + shift with E_y, exactly when both halfwidths are exact.
fn shifted_cmp(
    x: &DangerInterval,
    ex: End,
    shift: &Rational,
    y: &DangerInterval,
    ey: End,
    precision: Precision,
) -> Result<Ordering, EnumError> {
    let end = |d: &DangerInterval, e: End, hw: ExactReal| match e {
        End::Lo => d.center() - &hw,
        End::Hi => d.center() + &hw,
    };
    if let (Some(hx), Some(hy)) = (x.exact_halfwidth(), y.exact_halfwidth()) {
        let a = &end(x, ex, hx) + &ExactReal::from_rational(shift);
        let b = end(y, ey, hy);
        return Ok(a.cmp(&b));
    }
    for bits in precision.levels() {
        let (xl, xh) = x.end_bounds(ex, bits);
        let (yl, yh) = y.end_bounds(ey, bits);
        if Rational::from(&xh + shift) < yl {
            return Ok(Ordering::Less);
        }
        if Rational::from(&xl + shift) > yh {
            return Ok(Ordering::Greater);
        }
    }
    Err(ArithError::PrecisionExhausted { cap: precision.cap, what: "window sweep".into() }.into())
}

/// max over closed J = [x, x + w] ⊂ range of #{Δ meeting J}.
pub fn max_common_window(
    intervals: &[DangerInterval],
    w: &Rational,
    range: &Window,
    precision: Precision,
) -> Result<usize, EnumError> {
    if range.width() < *w {
        return Ok(0);
    }
    // Δ = (a, b) meets [x, x + w] iff a − w < x < b; the count only rises just after some a − w
    let lo = range.lo_exact();
    let lo_w = ExactReal::from_rational(&Rational::from(range.lo() + w));
    let hi = range.hi_exact();
    let mut best = 0usize;
    let mut at_lo = 0usize;
    for d in intervals {
        if d.end_cmp(End::Lo, &lo_w, precision)? == Ordering::Less && d.end_cmp(End::Hi, &lo, precision)? == Ordering::Greater {
            at_lo += 1;
        }
    }
    best = best.max(at_lo);
    let neg_w = Rational::from(-w);
    for u in intervals {
        // x = a_u − w + ε must lie in [lo, hi − w): a_u ≥ lo + w and a_u < hi
        if u.end_cmp(End::Lo, &lo_w, precision)? == Ordering::Less || u.end_cmp(End::Lo, &hi, precision)? != Ordering::Less {
            continue;
        }
        let mut count = 0usize;
        for d in intervals {
            // a_d ≤ a_u and b_d > a_u − w
            let starts = d.cross_cmp(End::Lo, u, End::Lo, precision)? != Ordering::Greater;
            let alive = shifted_cmp(u, End::Lo, &neg_w, d, End::Hi, precision)? == Ordering::Less;
            if starts && alive {
                count += 1;
            }
        }
        best = best.max(count);
    }
    Ok(best)
}

/// Case 1 (every window of the block meets at most 4 members), 2 (forbidden) or 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    #[serde(rename = "1P")]
    OneP,
    #[serde(rename = "3P")]
    ThreeP,
    #[serde(rename = "1L")]
    OneL,
    #[serde(rename = "3L")]
    ThreeL,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub tag: CaseTag,
    pub members: usize,
    pub max_per_window: usize,
    pub m: u64,
}

/// ½·c·n·(log* n)² as an enclosure.
fn half_c_n_logstar2(ctx: &ClassContext, n: u64, prec: u32) -> Enclosure {
    let ls = log_star(&ExactReal::from_integer(n), prec);
    Enclosure::from_rational(&(Rational::from(&ctx.c * n) / 2u32), prec).mul(&ls.mul(&ls))
}

fn decide_ge(ctx: &ClassContext, what: &str, lhs: impl Fn(u32) -> Enclosure, rhs: &Rational) -> Result<bool, EnumError> {
    ctx.precision
        .decide(what, |prec| lhs(prec).cmp_rational(rhs).map(|o| o != Ordering::Less))
        .map_err(EnumError::from)
}

/// Decides the case for a block and checks the bounds the argument promises.
pub fn classify_case(ctx: &ClassContext, block: &Block, class: &HeightClass, kind: Kind) -> Result<CaseReport, EnumError> {
    let bw = block.window();
    let w = block.base.width();
    let members = class_members(ctx, &bw, class, kind)?;
    let max_per_window = max_common_window(&members, &w, &bw, ctx.precision)?;
    let dump = || -> Vec<String> {
        let mut d = vec![format!("block {bw}, m = {}, carrier {:?}", block.m, block.carrier)];
        d.extend(members.iter().map(|iv| format!("{} {}", iv.source().kind(), iv.source().coords())));
        d
    };
    let (one, three) = match kind {
        Kind::Point => (CaseTag::OneP, CaseTag::ThreeP),
        Kind::Line => (CaseTag::OneL, CaseTag::ThreeL),
    };
    let report = |tag| CaseReport { tag, members: members.len(), max_per_window, m: block.m };
    if max_per_window <= 4 {
        return Ok(report(one));
    }
    let lb = ctx.theta.c_lb();
    let n = class.n;
    // Case 3 needs the carrier coefficient above c_lb·2^{k+6}/(½ c n (log* n)²) (points, |B|)
    // or c_lb·2^{l−k+3}R^{n−1}F(n−1)/(½ c n (log* n)²) (lines, q)
    let (size, target) = match (&block.carrier, kind) {
        (Some(Carrier::Line(l)), Kind::Point) => {
            (Rational::from(l.b().clone().abs()), Rational::from(lb * crate::arith::pow2(class.k as i64 + 6)))
        }
        (Some(Carrier::Point(p)), Kind::Line) => {
            let e = class.l as i64 - class.k as i64 + 3;
            (Rational::from(p.q().clone()), Rational::from(lb * crate::arith::pow2(e)) * ctx.base(n))
        }
        _ => return Err(violation("carrier for a crowded window", Some(*class), &bw, dump())),
    };
    let is_three = decide_ge(ctx, "case threshold", |prec| half_c_n_logstar2(ctx, n, prec).mul(&Enclosure::from_rational(&size, prec)), &target)?;
    if !is_three {
        return Err(violation("case 2 impossibility", Some(*class), &bw, dump()));
    }
    // m ≤ c·n·(log* n)²
    let m_ok = decide_ge(
        ctx,
        "block length bound",
        |prec| half_c_n_logstar2(ctx, n, prec).scale_pow2(1),
        &Rational::from(block.m),
    )?;
    if !m_ok {
        return Err(violation("block length bound", Some(*class), &bw, dump()));
    }
    Ok(report(three))
}
