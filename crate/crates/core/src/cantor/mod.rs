//! (I, R, r) Cantor schedules: the BV4 hypothesis certifier, the dimension lower bound,
//! schedule sums, survivor accounting and per-level ledgers.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{floor_log_star_u64, log_star, ArithError, Enclosure, ExactReal, Precision};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CantorError {
    #[error("schedules have different R sequences: {0} vs {1}")]
    MismatchedR(String, String),
    #[error("R_{n} = {value} is below 4")]
    SmallR { n: u64, value: Integer },
    #[error("empty schedule list")]
    Empty,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// n ↦ R_n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RSeq {
    /// R_n = R·(n+1)·[log*(n+1)]
    Growing { r: u64 },
    Constant { value: u64 },
    /// explicit R_0, R_1, …; the last entry repeats
    Explicit { values: Vec<u64> },
}

impl RSeq {
    pub fn at(&self, n: u64) -> Integer {
        match self {
            RSeq::Growing { r } => Integer::from(*r) * (n + 1) * floor_log_star_u64(n + 1),
            RSeq::Constant { value } => Integer::from(*value),
            RSeq::Explicit { values } => {
                Integer::from(*values.get(n as usize).or(values.last()).expect("non-empty R list"))
            }
        }
    }

    fn describe(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

/// One additive contribution to the r_{m,n}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RRule {
    /// r_{n−3,n} = scale·25·R·ln R·n⁴·(log* n)⁴ for n ≥ 3
    Lagged {
        r: u64,
        #[serde(with = "rat")]
        scale: Rational,
    },
    /// r_{n,n} = value for every n
    Diagonal {
        #[serde(with = "rat")]
        value: Rational,
    },
    /// r_{n,n} = factor·R_n for every n
    DiagonalOfR {
        #[serde(with = "rat")]
        factor: Rational,
    },
    /// a single entry r_{m,n}
    Entry {
        m: u64,
        n: u64,
        #[serde(with = "rat")]
        value: Rational,
    },
}

mod rat {
    use rug::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::{parse_rational_literal, rational_to_string};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational_literal(&s).map_err(serde::de::Error::custom)
    }
}

/// (R, r) with R_n ≥ 1 and r ≥ 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorSchedule {
    pub rseq: RSeq,
    pub rules: Vec<RRule>,
    pub tag: String,
}

impl CantorSchedule {
    /// R_n = R(n+1)[log*(n+1)], r_{n−3,n} = 25 R ln R n⁴ (log* n)⁴, all other r = 0.
    pub fn growing(r: u64) -> Self {
        CantorSchedule {
            rseq: RSeq::Growing { r },
            rules: vec![RRule::Lagged { r, scale: Rational::from(1) }],
            tag: format!("growing(R={r})"),
        }
    }

    pub fn zero(rseq: RSeq) -> Self {
        CantorSchedule { rseq, rules: Vec::new(), tag: "zero".into() }
    }

    pub fn r_n(&self, n: u64) -> Integer {
        self.rseq.at(n)
    }

    /// Nonzero entries r_{m,n} of column n, as (m, enclosure at `prec`).
    pub fn column(&self, n: u64, prec: u32) -> Vec<(u64, Enclosure)> {
        let mut out: BTreeMap<u64, Enclosure> = BTreeMap::new();
        let mut add = |m: u64, v: Enclosure| {
            let e = out.remove(&m);
            out.insert(m, match e {
                Some(prev) => prev.add(&v),
                None => v,
            });
        };
        for rule in &self.rules {
            match rule {
                RRule::Lagged { r, scale } if n >= 3 => add(n - 3, lagged_value(*r, scale, n, prec)),
                RRule::Lagged { .. } => {}
                RRule::Diagonal { value } => add(n, Enclosure::from_rational(value, prec)),
                RRule::DiagonalOfR { factor } => {
                    add(n, Enclosure::from_rational(&(Rational::from(self.r_n(n)) * factor), prec))
                }
                RRule::Entry { m, n: nn, value } if *nn == n => add(*m, Enclosure::from_rational(value, prec)),
                RRule::Entry { .. } => {}
            }
        }
        out.into_iter().collect()
    }
}

/// scale·25·R·ln R·n⁴·(log* n)⁴.
fn lagged_value(r: u64, scale: &Rational, n: u64, prec: u32) -> Enclosure {
    let rr = Enclosure::from_integer(&Integer::from(r), prec);
    let ln_r = if r >= 2 { rr.ln().expect("R > 0") } else { Enclosure::from_f64_exact(0.0, prec) };
    let ls = log_star(&ExactReal::from_integer(n), prec);
    let n4 = Enclosure::from_integer(&Integer::from(n).square().square(), prec);
    Enclosure::from_rational(&(Rational::from(scale * 25u32)), prec)
        .mul(&rr)
        .mul(&ln_r)
        .mul(&n4)
        .mul(&ls.powi(4))
}

/// Σ_{k=0}^{n} r_{n−k,n} ∏_{i=1}^{k} 4/R_{n−i}, enclosed at `prec`.
pub fn bv4_lhs(schedule: &CantorSchedule, n: u64, prec: u32) -> Enclosure {
    let mut acc = Enclosure::from_f64_exact(0.0, prec);
    for (m, v) in schedule.column(n, prec) {
        // k = n − m factors 4/R_{n−1} … 4/R_{m}
        let mut den = Integer::from(1);
        for i in m..n {
            den *= schedule.r_n(i);
        }
        let k = (n - m) as i32;
        let factor = Enclosure::from_integer(&den, prec).recip().expect("R_i ≥ 1").scale_pow2(2 * k);
        acc = acc.add(&v.mul(&factor));
    }
    acc
}

#[derive(Clone, Debug, Serialize)]
pub struct Bv4Row {
    pub n: u64,
    pub lhs_lo: String,
    pub lhs_hi: String,
    pub rhs: String,
    pub pass: bool,
    /// upper bound on lhs/(R_n/4)
    #[serde(skip)]
    pub ratio_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bv4Certificate {
    pub schedule: CantorSchedule,
    pub n_min: u64,
    pub n_max: u64,
    pub all_pass: bool,
    pub first_failure: Option<u64>,
    pub max_ratio: f64,
    pub rows: Vec<Bv4Row>,
}

/// Decides lhs(n) < R_n/4 strictly for n_min ≤ n ≤ n_max.
pub fn bv4_check(
    schedule: &CantorSchedule,
    n_min: u64,
    n_max: u64,
    precision: Precision,
) -> Result<Bv4Certificate, CantorError> {
    let mut rows = Vec::with_capacity((n_max.saturating_sub(n_min) + 1) as usize);
    let mut max_ratio = 0f64;
    let mut first_failure = None;
    for i in 0..=n_max {
        let v = schedule.r_n(i);
        if v < 4 {
            return Err(CantorError::SmallR { n: i, value: v });
        }
    }
    for n in n_min..=n_max {
        let rn = schedule.r_n(n);
        let rhs = Rational::from((rn.clone(), 4));
        let (lhs, pass) = precision.decide("bv4 inequality", |prec| {
            let lhs = bv4_lhs(schedule, n, prec);
            match lhs.cmp_rational(&rhs)? {
                Ordering::Less => Some((lhs, true)),
                _ => Some((lhs, false)),
            }
        })?;
        let ratio = lhs.hi().to_f64() / rhs.to_f64();
        max_ratio = max_ratio.max(ratio);
        if !pass && first_failure.is_none() {
            first_failure = Some(n);
        }
        let (lo, hi) = lhs.to_decimal_pair();
        rows.push(Bv4Row { n, lhs_lo: lo, lhs_hi: hi, rhs: rhs.to_string(), pass, ratio_hi: ratio });
    }
    Ok(Bv4Certificate {
        schedule: schedule.clone(),
        n_min,
        n_max,
        all_pass: first_failure.is_none(),
        first_failure,
        max_ratio,
        rows,
    })
}

impl Bv4Certificate {
    /// JSON with per-n rows {n, lhs_lo, lhs_hi, rhs, pass}.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DimBound {
    pub n_max: u64,
    /// enclosure of inf_{0 ≤ n ≤ n_max} (1 − ln 2 / ln R_n)
    pub inf_lo: f64,
    pub inf_hi: f64,
    pub argmin: u64,
    /// enclosure of 1 − ln 2 / ln R_{n_max}
    pub last_lo: f64,
    pub last_hi: f64,
    /// R_n non-decreasing on [0, n_max], so the per-n bound is too
    pub monotone: bool,
    pub note: String,
}

fn one_minus_log_r2(r: &Integer, prec: u32) -> Enclosure {
    let two = Enclosure::from_integer(&Integer::from(2), prec);
    let lr = Enclosure::from_integer(r, prec).ln().expect("R ≥ 1");
    let one = Enclosure::from_f64_exact(1.0, prec);
    match two.ln().expect("2 > 0").div(&lr) {
        Some(q) => one.sub(&q),
        None => Enclosure::from_f64_exact(f64::NEG_INFINITY, prec),
    }
}

/// inf over 0 ≤ n ≤ n_max of 1 − log_{R_n} 2, with a note when R_n is non-decreasing.
pub fn dim_lower_bound(schedule: &CantorSchedule, n_max: u64) -> DimBound {
    let prec = 128;
    let mut best: Option<(Integer, u64)> = None;
    let mut monotone = true;
    let mut prev: Option<Integer> = None;
    for n in 0..=n_max {
        let rn = schedule.r_n(n);
        if let Some(p) = &prev {
            monotone &= rn >= *p;
        }
        // 1 − ln2/ln R is increasing in R, so the inf sits at the smallest R_n
        if best.as_ref().map_or(true, |(b, _)| rn < *b) {
            best = Some((rn.clone(), n));
        }
        prev = Some(rn);
    }
    let (rmin, argmin) = best.expect("n_max ≥ 0");
    let inf = if rmin <= 1 { None } else { Some(one_minus_log_r2(&rmin, prec)) };
    let last_r = schedule.r_n(n_max);
    let last = one_minus_log_r2(&last_r, prec);
    let (inf_lo, inf_hi) = match &inf {
        Some(e) => (e.lo().to_f64(), e.hi().to_f64()),
        None => (f64::NEG_INFINITY, f64::NEG_INFINITY),
    };
    let note = if monotone {
        "R_n non-decreasing on the checked range; the per-n bound 1 − log_{R_n} 2 is non-decreasing there".into()
    } else {
        "R_n not monotone on the checked range; only the finite inf is certified".into()
    };
    DimBound {
        n_max,
        inf_lo,
        inf_hi,
        argmin,
        last_lo: last.lo().to_f64(),
        last_hi: last.hi().to_f64(),
        monotone,
        note,
    }
}

/// Pointwise sum of the r maps; all inputs must share R.
pub fn combine_schedules(schedules: &[CantorSchedule]) -> Result<CantorSchedule, CantorError> {
    let first = schedules.first().ok_or(CantorError::Empty)?;
    let mut rules = Vec::new();
    for s in schedules {
        if s.rseq != first.rseq {
            return Err(CantorError::MismatchedR(first.rseq.describe(), s.rseq.describe()));
        }
        rules.extend(s.rules.iter().cloned());
    }
    let tag = schedules.iter().map(|s| s.tag.as_str()).collect::<Vec<_>>().join("+");
    Ok(CantorSchedule { rseq: first.rseq.clone(), rules, tag })
}

/// Lower bound on #J_{n+1} from #J_{m+1} ≥ R_m #J_m − Σ_k r_{k,m} #J_k, #J_0 = 1,
/// floored at zero.
pub fn survivor_floor(schedule: &CantorSchedule, n: u64) -> Integer {
    survivor_floors(schedule, n).pop().expect("at least #J_0")
}

/// #J_0 … #J_{n+1} lower bounds.
pub fn survivor_floors(schedule: &CantorSchedule, n: u64) -> Vec<Integer> {
    let mut js: Vec<Integer> = vec![Integer::from(1)];
    for m in 0..=n {
        let mut removed_hi = Rational::new();
        for (k, v) in schedule.column(m, 128) {
            removed_hi += v.hi_rational() * &js[k as usize];
        }
        let x = Rational::from(schedule.r_n(m) * &js[m as usize]) - removed_hi;
        let next = if x <= 0 { Integer::new() } else { x.floor().numer().clone() };
        js.push(next);
    }
    js
}

/// Counts for one executed level: #I_{n+1} = R_n·#J_n, #J_{n+1} = #I_{n+1} − removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLedger {
    pub n: u64,
    pub parents: u64,
    pub r_n: u64,
    pub produced: u64,
    pub removed: u64,
    pub surviving: u64,
    /// removals attributed to each ancestor J_{n−3} (by index in that level's list)
    pub by_ancestor: BTreeMap<String, u64>,
}

impl LevelLedger {
    pub fn new(n: u64, parents: u64, r_n: u64, removed: u64, by_ancestor: BTreeMap<String, u64>) -> Self {
        let produced = parents * r_n;
        LevelLedger { n, parents, r_n, produced, removed, surviving: produced - removed, by_ancestor }
    }

    /// Both identities, exactly.
    pub fn check(&self) -> Result<(), String> {
        if self.produced != self.parents * self.r_n {
            return Err(format!("level {}: produced {} ≠ {}·{}", self.n, self.produced, self.r_n, self.parents));
        }
        if self.surviving + self.removed != self.produced {
            return Err(format!(
                "level {}: surviving {} + removed {} ≠ produced {}",
                self.n, self.surviving, self.removed, self.produced
            ));
        }
        let attributed: u64 = self.by_ancestor.values().sum();
        if attributed != self.removed {
            return Err(format!("level {}: attributed {} ≠ removed {}", self.n, attributed, self.removed));
        }
        Ok(())
    }
}
