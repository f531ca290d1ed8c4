use std::cmp::Ordering;

use rug::{Integer, Rational};
use serde::Serialize;

use super::ConstructionError;
use crate::arith::{big_f, floor_log_star_u64, pow2, rational_to_string, Enclosure, Precision, Theta};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Proof,
    Exploration,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "proof" => Ok(Mode::Proof),
            "exploration" => Ok(Mode::Exploration),
            _ => Err(format!("mode must be proof or exploration, got {s:?}")),
        }
    }
}

/// User replacements for the derived c and c₁.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub c: Option<Rational>,
    pub c1: Option<Rational>,
}

#[derive(Clone, Debug)]
pub struct Params {
    pub theta: Theta,
    pub r: u64,
    pub c: Rational,
    pub c1: Rational,
    pub c2: Rational,
    /// R²c₁/c₂
    pub k0: Integer,
    pub q: Rational,
    pub mode: Mode,
    /// every failed inequality, by name
    pub violations: Vec<String>,
    /// checks reported but not enforced
    pub warnings: Vec<String>,
    /// working precision for every certified decision of a run
    pub precision: Precision,
}

#[derive(Serialize)]
pub struct ParamsJson {
    pub theta: String,
    pub c_lb: String,
    #[serde(rename = "R")]
    pub r: u64,
    pub c: String,
    pub c1: String,
    pub c2: String,
    pub c3: f64,
    #[serde(rename = "R2c1_over_c2")]
    pub k0: String,
    #[serde(rename = "Q")]
    pub q: String,
    pub q_approx: f64,
    pub mode: Mode,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl Params {
    /// R_n = R·(n+1)·[log*(n+1)].
    pub fn r_n(&self, n: u64) -> u64 {
        self.r * (n + 1) * floor_log_star_u64(n + 1)
    }

    /// |J_n| = c₁·R⁻ⁿ·F(n)⁻¹.
    pub fn j_len(&self, n: u64) -> Rational {
        let d = Integer::from(Integer::u_pow_u(self.r as u32, n as u32)) * big_f(n);
        Rational::from(&self.c1 / d)
    }

    /// (log R + 2)/log 2.
    pub fn c3(&self) -> f64 {
        ((self.r as f64).ln() + 2.0) / 2f64.ln()
    }

    pub fn to_json(&self) -> ParamsJson {
        ParamsJson {
            theta: self.theta.surd().to_string(),
            c_lb: rational_to_string(self.theta.c_lb()),
            r: self.r,
            c: rational_to_string(&self.c),
            c1: rational_to_string(&self.c1),
            c2: rational_to_string(&self.c2),
            c3: self.c3(),
            k0: self.k0.to_string(),
            q: rational_to_string(&self.q),
            q_approx: self.q.to_f64(),
            mode: self.mode,
            violations: self.violations.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

fn ln_r(r: u64, prec: u32) -> Enclosure {
    Enclosure::from_integer(&Integer::from(r), prec).ln().expect("R ≥ 1")
}

fn ln2(prec: u32) -> Enclosure {
    Enclosure::from_integer(&Integer::from(2), prec).ln().expect("2 > 0")
}

/// 2⁶·max{c/(R²c₁c_lb), 2¹¹c}·(ln R + 2)²R⁴/(ln 2)².
fn first_term(r: u64, c: &Rational, c1: &Rational, lb: &Rational, prec: u32) -> Enclosure {
    let r2 = Rational::from(r * r);
    let a = Rational::from(c / (r2 * c1 * lb));
    let b = Rational::from(c * 2048u32);
    let m = a.max(b) * 64u32;
    let l = ln_r(r, prec).add(&Enclosure::from_integer(&Integer::from(2), prec));
    let r4 = Enclosure::from_integer(&Integer::from(Integer::u_pow_u(r as u32, 4)), prec);
    let l2 = ln2(prec);
    Enclosure::from_rational(&m, prec).mul(&l.mul(&l)).mul(&r4).div(&l2.mul(&l2)).expect("ln 2 > 0")
}

/// k·c₁·R³(ln R + 2)/ln 2.
fn second_term(r: u64, coeff: &Rational, prec: u32) -> Enclosure {
    let l = ln_r(r, prec).add(&Enclosure::from_integer(&Integer::from(2), prec));
    let r3 = Enclosure::from_integer(&Integer::from(Integer::u_pow_u(r as u32, 3)), prec);
    Enclosure::from_rational(coeff, prec).mul(&r3).mul(&l).div(&ln2(prec)).expect("ln 2 > 0")
}

/// Decides x(prec) < bound.
fn decide_less(
    f: impl Fn(u32) -> Enclosure,
    bound: &Rational,
    what: &str,
    precision: Precision,
) -> Result<bool, ConstructionError> {
    Ok(precision.decide(what, |prec| match f(prec).cmp_rational(bound)? {
        Ordering::Less => Some(true),
        _ => Some(false),
    })?)
}

/// Smallest integer R ≥ e⁹/c_lb.
pub fn min_proof_r(theta: &Theta, precision: Precision) -> Result<u64, ConstructionError> {
    let lb = theta.c_lb().clone();
    let v = precision.decide("e^9/c_lb", |prec| {
        let e9 = Enclosure::from_integer(&Integer::from(9), prec).exp();
        let x = e9.div(&Enclosure::from_rational(&lb, prec))?;
        let (lo, hi) = (x.lo_rational(), x.hi_rational());
        let (a, b) = (lo.ceil(), hi.ceil());
        (a == b).then(|| a.numer().clone())
    })?;
    v.to_u64().ok_or_else(|| ConstructionError::InvalidParams("R overflows u64".into()))
}

/// Largest 2^{−t} with pred true.
fn largest_pow2(mut pred: impl FnMut(&Rational) -> Result<bool, ConstructionError>, what: &str) -> Result<Rational, ConstructionError> {
    for t in 1..4000 {
        let x = pow2(-t);
        if pred(&x)? {
            return Ok(x);
        }
    }
    Err(ConstructionError::InvalidParams(format!("no constant of the form 2^-t satisfies {what}")))
}

/// Derives R (proof mode, when absent), c₁, c, c₂ and Q; lists every violated inequality.
///
/// c₁ is the largest 2^{−t} keeping the c₁ term of the parameter inequality below 1/2,
/// then c the largest 2^{−t} keeping the c term below 1/2 and satisfying the three
/// simple bounds.
pub fn derive_params(
    theta: Theta,
    r: Option<u64>,
    mode: Mode,
    overrides: &Overrides,
    precision: Precision,
) -> Result<Params, ConstructionError> {
    let lb = theta.c_lb().clone();
    let r_min = min_proof_r(&theta, precision)?;
    let r = match (r, mode) {
        (Some(r), _) => r,
        (None, Mode::Proof) => r_min,
        (None, Mode::Exploration) => {
            return Err(ConstructionError::InvalidParams("exploration mode needs R".into()));
        }
    };
    if r < 2 || r > u32::MAX as u64 {
        return Err(ConstructionError::InvalidParams(format!("R = {r} out of range")));
    }
    let half = Rational::from((1, 2));
    let c1 = match &overrides.c1 {
        Some(v) => v.clone(),
        None => largest_pow2(
            |x| decide_less(|p| second_term(r, &Rational::from(x * 32768u32), p), &half, "c1 term", precision),
            "the c1 term",
        )?,
    };
    let r2c1 = Rational::from(r * r) * &c1;
    let c = match &overrides.c {
        Some(v) => v.clone(),
        None => largest_pow2(
            |x| {
                let simple = Rational::from(x * 4096u32) < 1
                    && Rational::from(x * 2u32) < Rational::from(&r2c1 * &lb)
                    && *x < lb;
                Ok(simple && decide_less(|p| first_term(r, x, &c1, &lb, p), &half, "c term", precision)?)
            },
            "the c term",
        )?,
    };
    if c <= 0 || c1 <= 0 {
        return Err(ConstructionError::InvalidParams("c and c1 must be positive".into()));
    }
    // c₂ = R²c₁/K with K the least integer ≥ 2¹⁰·c_lb·R²c₁
    let k0 = Rational::from(&r2c1 * &lb) * 1024u32;
    let k0 = k0.ceil().numer().clone().max(Integer::from(1));
    let c2 = Rational::from(&r2c1 / &k0);
    let q = Rational::from(&lb * (2 * r * r));

    let mut violations = Vec::new();
    let rc = Rational::from(r) * &lb;
    let r_ok = precision.decide("R c_lb >= e^9", |prec| {
        let e9 = Enclosure::from_integer(&Integer::from(9), prec).exp();
        e9.cmp_rational(&rc).map(|o| o != Ordering::Greater)
    })?;
    if !r_ok {
        violations.push(format!("R >= e^9/c_lb (needs R >= {r_min})"));
    }
    if Rational::from(&c * 4096u32) >= 1 {
        violations.push("2^12 c < 1".into());
    }
    if Rational::from(&c * 2u32) >= Rational::from(&r2c1 * &lb) {
        violations.push("2c < R^2 c1 c_lb".into());
    }
    if c >= lb {
        violations.push("c < c_lb".into());
    }
    let total = |p: u32| first_term(r, &c, &c1, &lb, p).add(&second_term(r, &Rational::from(&c1 * 32768u32), p));
    if !decide_less(total, &Rational::from(1), "parameter inequality", precision)? {
        violations.push("2^6 max{c/(R^2 c1 c_lb), 2^11 c}(ln R+2)^2 R^4/ln^2 2 + 2^15 c1 R^3 (ln R+2)/ln 2 < 1".into());
    }
    if Rational::from(&c2 * 1024u32) * &lb > 1 {
        violations.push("c2 <= 1/(2^10 c_lb)".into());
    }

    let mut warnings = Vec::new();
    // the final counting constant, with the larger of the two printed c₁ terms
    let c1_term = Rational::from(&c1 * 2048u32).max(Rational::from((1, r * r))) * 16u32;
    let c1_term = c1_term.max(Rational::from(&c1 * 32768u32));
    let c4_ok = decide_less(
        |p| {
            let c4 = first_term(r, &c, &c1, &lb, p).add(&second_term(r, &c1_term, p));
            c4.div(&ln_r(r, p).mul(&Enclosure::from_integer(&Integer::from(25 * r), p))).expect("R ≥ 2")
        },
        &Rational::from(1),
        "c4 bound",
        precision,
    )?;
    if !c4_ok {
        warnings.push("c4 (with 16 max{R^-2, 2^11 c1} term) exceeds 25 R ln R".into());
    }

    if mode == Mode::Proof && !violations.is_empty() {
        return Err(ConstructionError::InvalidParams(format!("violated: {}", violations.join("; "))));
    }
    Ok(Params { theta, r, c, c1, c2, k0, q, mode, violations, warnings, precision })
}
