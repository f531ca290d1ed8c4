//! Rational points P(p,r,q), integer lines L(A,B,C) and their heights.

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};
use serde::{Serialize, Serializer};

use super::GeometryError;
use crate::arith::ExactReal;

/// The point (p/q, r/q) with q > 0 and gcd(p, r, q) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint {
    q: Integer,
    r: Integer,
    p: Integer,
}

impl RationalPoint {
    pub fn new(
        p: impl Into<Integer>,
        r: impl Into<Integer>,
        q: impl Into<Integer>,
    ) -> Result<Self, GeometryError> {
        let (mut p, mut r, mut q) = (p.into(), r.into(), q.into());
        if q == 0 {
            return Err(GeometryError::PointAtInfinity);
        }
        if q < 0 {
            p = -p;
            r = -r;
            q = -q;
        }
        let mut g = p.clone().gcd(&r);
        g.gcd_mut(&q);
        if g != 1 {
            p.div_exact_mut(&g);
            r.div_exact_mut(&g);
            q.div_exact_mut(&g);
        }
        Ok(RationalPoint { q, r, p })
    }

    pub fn p(&self) -> &Integer {
        &self.p
    }
    pub fn r(&self) -> &Integer {
        &self.r
    }
    pub fn q(&self) -> &Integer {
        &self.q
    }

    /// First coordinate p/q.
    pub fn x(&self) -> Rational {
        Rational::from((self.p.clone(), self.q.clone()))
    }

    /// Second coordinate r/q, the point's ordinate on L_θ.
    pub fn y(&self) -> Rational {
        Rational::from((self.r.clone(), self.q.clone()))
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.p, self.r, self.q)
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn parse_triple(s: &str) -> Result<[Integer; 3], GeometryError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(GeometryError::Parse(s.to_string()));
    }
    let mut out: [Integer; 3] = Default::default();
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = Integer::from_str(part).map_err(|_| GeometryError::Parse(s.to_string()))?;
    }
    Ok(out)
}

impl FromStr for RationalPoint {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, GeometryError> {
        let [p, r, q] = parse_triple(s)?;
        RationalPoint::new(p, r, q)
    }
}

/// The line Ax − By + C = 0, normalized to gcd 1 with B > 0 (or A > 0 when B = 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjLine {
    b: Integer,
    a: Integer,
    c: Integer,
}

impl ProjLine {
    pub fn new(
        a: impl Into<Integer>,
        b: impl Into<Integer>,
        c: impl Into<Integer>,
    ) -> Result<Self, GeometryError> {
        let (mut a, mut b, mut c) = (a.into(), b.into(), c.into());
        if a == 0 && b == 0 {
            return Err(GeometryError::DegenerateLine);
        }
        if b < 0 || (b == 0 && a < 0) {
            a = -a;
            b = -b;
            c = -c;
        }
        let mut g = a.clone().gcd(&b);
        g.gcd_mut(&c);
        if g != 1 {
            a.div_exact_mut(&g);
            b.div_exact_mut(&g);
            c.div_exact_mut(&g);
        }
        Ok(ProjLine { b, a, c })
    }

    pub fn a(&self) -> &Integer {
        &self.a
    }
    pub fn b(&self) -> &Integer {
        &self.b
    }
    pub fn c(&self) -> &Integer {
        &self.c
    }

    /// A·p − B·r + C·q = 0.
    pub fn contains(&self, pt: &RationalPoint) -> bool {
        let v = Integer::from(&self.a * pt.p()) - Integer::from(&self.b * pt.r()) + Integer::from(&self.c * pt.q());
        v == 0
    }

    /// |A|*·|B|*, the argument of the weight for this line.
    pub fn weight_arg(&self) -> Integer {
        let a = Integer::from(self.a.abs_ref()).max(Integer::from(1));
        let b = Integer::from(self.b.abs_ref()).max(Integer::from(1));
        a * b
    }

    /// ω = (Aθ + C)/B, where the line crosses L_θ.
    pub fn ordinate(&self, theta: &ExactReal) -> Result<ExactReal, GeometryError> {
        if self.b == 0 {
            return Err(GeometryError::VerticalLine(self.to_string()));
        }
        let num = &theta.mul_integer(&self.a) + &ExactReal::from_integer(self.c.clone());
        Ok(num.mul_rational(&Rational::from((Integer::from(1), self.b.clone()))))
    }
}

impl fmt::Display for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

impl Serialize for ProjLine {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for ProjLine {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, GeometryError> {
        let [a, b, c] = parse_triple(s)?;
        ProjLine::new(a, b, c)
    }
}

/// H(P) = q²|qθ − p|.
pub fn height_point(pt: &RationalPoint, theta: &ExactReal) -> ExactReal {
    let diff = &theta.mul_integer(pt.q()) - &ExactReal::from_integer(pt.p().clone());
    diff.abs().mul_integer(&Integer::from(pt.q().square_ref()))
}

/// H(L) = |A|*·B², defined for B ≠ 0.
pub fn height_line(line: &ProjLine) -> Result<Integer, GeometryError> {
    if *line.b() == 0 {
        return Err(GeometryError::VerticalLine(line.to_string()));
    }
    let a = Integer::from(line.a().abs_ref()).max(Integer::from(1));
    Ok(a * Integer::from(line.b().square_ref()))
}

/// The line through two distinct points.
pub fn line_through(p1: &RationalPoint, p2: &RationalPoint) -> Result<ProjLine, GeometryError> {
    if p1 == p2 {
        return Err(GeometryError::IdenticalPoints(p1.to_string()));
    }
    // (A, −B, C) ∝ (p1, r1, q1) × (p2, r2, q2)
    let a = Integer::from(p1.r() * p2.q()) - Integer::from(p1.q() * p2.r());
    let b = Integer::from(p1.p() * p2.q()) - Integer::from(p1.q() * p2.p());
    let c = Integer::from(p1.p() * p2.r()) - Integer::from(p1.r() * p2.p());
    ProjLine::new(a, b, c)
}

/// Intersection point of two non-parallel lines together with the factor d
/// relating the raw 2×2 determinants to (p, r, q).
pub fn intersect(l1: &ProjLine, l2: &ProjLine) -> Result<(RationalPoint, Integer), GeometryError> {
    let det = Integer::from(l1.a() * l2.b()) - Integer::from(l2.a() * l1.b());
    if det == 0 {
        return Err(GeometryError::Parallel(l1.to_string(), l2.to_string()));
    }
    let bc = Integer::from(l1.b() * l2.c()) - Integer::from(l2.b() * l1.c());
    let ac = Integer::from(l1.a() * l2.c()) - Integer::from(l2.a() * l1.c());
    // p/q = (B1C2 − B2C1)/(A1B2 − A2B1), r/q = (A1C2 − A2C1)/(A1B2 − A2B1)
    let mut d = det.clone().gcd(&bc);
    d.gcd_mut(&ac);
    let pt = RationalPoint::new(bc, ac, det)?;
    Ok((pt, d))
}

/// |ω1 − ω2| for two non-vertical lines.
pub fn ordinate_gap(l1: &ProjLine, l2: &ProjLine, theta: &ExactReal) -> Result<ExactReal, GeometryError> {
    Ok((&l1.ordinate(theta)? - &l2.ordinate(theta)?).abs())
}
