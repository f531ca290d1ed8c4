use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::params::{Mode, Params};
use super::ConstructionError;
use crate::arith::{big_f, parse_rational_literal, rational_to_string};
use crate::cantor::{CantorSchedule, LevelLedger};
use crate::enumeration::{
    build_block_lines, build_block_points, classify_case, enumerate_lines_reach, enumerate_points_reach, window_census,
    ClassContext, EnumError, HeightClass, Kind, Window,
};
use crate::geometry::DangerInterval;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub beam_width: usize,
    pub depth: u64,
    /// run the block/case machinery on every populated class window
    pub audit: bool,
    /// abort a level whose beam·R_n exceeds this many children
    pub max_children: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { beam_width: 8, depth: 12, audit: true, max_children: 50_000_000 }
    }
}

/// One interval of the beam: J_n with the child indices leading to it from I.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeamEntry {
    pub window: Window,
    pub path: Vec<u32>,
}

impl BeamEntry {
    fn path_key(&self, len: usize) -> String {
        if len == 0 {
            return "I".into();
        }
        self.path[..len].iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// A removal caused by one danger interval inside one beam parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovalRecord {
    pub parent: String,
    pub source: String,
    pub class: [u64; 3],
    pub first: u64,
    pub last: u64,
    /// ⌈|Δ|/|I_{n+1}|⌉ + 2 with |Δ| bounded from below
    pub geometric_bound: u64,
    /// 8cR²(n+1)/(c₁c_lb2^l) + 2
    pub class_bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    /// removals per ancestor J_{n−3} against r_{n−3,n}
    pub per_ancestor: BTreeMap<String, (u64, f64)>,
    pub max_ratio: f64,
    pub bound_violations: Vec<String>,
    /// K = |J_{n−3}|/|M| for each l, all integers
    pub k_values: Vec<String>,
    pub k_integral: bool,
    pub case_counts: BTreeMap<String, u64>,
    pub windows_audited: u64,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n: u64,
    pub ledger: LevelLedger,
    pub removals: Vec<RemovalRecord>,
    pub audit: AuditRecord,
    pub beam_size: usize,
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub initial: Window,
    /// the beam at level `depth`
    pub beam: Vec<BeamEntry>,
    pub depth: u64,
    pub levels: Vec<LevelRecord>,
}

pub fn class_context(params: &Params) -> ClassContext {
    let mut ctx = ClassContext::new(params.theta.clone(), params.r, params.c.clone(), params.c2.clone());
    ctx.precision = params.precision;
    ctx
}

/// Danger intervals of heights below Q meeting `w` (none may meet I).
fn low_dangers(params: &Params, w: &Window) -> Result<Vec<DangerInterval>, ConstructionError> {
    let ctx = class_context(params);
    let lb = params.theta.c_lb();
    // every point has H ≥ c_lb·q ≥ c_lb and every line H ≥ 1
    let hmin = lb.clone().min(Rational::from(1));
    let mut out = Vec::new();
    let (lo, hi) = (w.lo_exact(), w.hi_exact());
    for p in enumerate_points_reach(w, &hmin, &params.q, &params.theta, &params.c)? {
        let iv = ctx.danger(&crate::geometry::Source::Point(p))?;
        if iv.meets_closed(&lo, &hi, ctx.precision).map_err(EnumError::from)? {
            out.push(iv);
        }
    }
    for l in enumerate_lines_reach(w, &hmin, &params.q, &params.theta, &params.c)? {
        let iv = ctx.danger(&crate::geometry::Source::Line(l))?;
        if iv.meets_closed(&lo, &hi, ctx.precision).map_err(EnumError::from)? {
            out.push(iv);
        }
    }
    Ok(out)
}

/// I = [m·c₁, (m+1)·c₁] with m = ⌊{jφ}/c₁⌋ for the first j = 1, 2, … whose I is clear of
/// every Δ below Q. Endpoints stay on the c₁ grid.
pub fn choose_initial(params: &Params) -> Result<Window, ConstructionError> {
    let golden = crate::arith::QuadraticSurd::golden();
    let cells = Rational::from(params.c1.clone().recip()).floor().numer().clone();
    if cells < 1 {
        return Err(ConstructionError::InvalidParams("c1 exceeds 1".into()));
    }
    for j in 1..=4096u32 {
        let x = golden.value().mul_integer(&Integer::from(j));
        let frac = &x - &crate::arith::ExactReal::from_integer(x.floor());
        let m = frac.mul_rational(&Rational::from(&cells)).floor();
        let lo = Rational::from(&params.c1 * &m);
        let hi = Rational::from(&lo + &params.c1);
        if hi > 1 {
            continue;
        }
        let w = Window::new(lo, hi)?;
        if low_dangers(params, &w)?.is_empty() {
            return Ok(w);
        }
    }
    Err(ConstructionError::InvalidParams("no initial interval clear of low-height dangers".into()))
}

/// Levels 0..3: I, then three plain subdivisions (no height lies in (Q, c_lb R^{n−1}F(n−1)) for n ≤ 3).
pub fn init_levels(params: &Params, opts: &RunOptions) -> Result<Branch, ConstructionError> {
    let initial = choose_initial(params)?;
    let mut branch = Branch {
        initial: initial.clone(),
        beam: vec![BeamEntry { window: initial, path: Vec::new() }],
        depth: 0,
        levels: Vec::new(),
    };
    while branch.depth < 3.min(opts.depth) {
        level_step(&mut branch, params, opts)?;
    }
    Ok(branch)
}

/// Number of intervals in 𝒥_n of the full tree when nothing was removed: RⁿF(n).
pub fn full_tree_count(params: &Params, n: u64) -> Integer {
    Integer::from(Integer::u_pow_u(params.r as u32, n as u32)) * big_f(n)
}

/// J at the end of `path` (a prefix of some beam path).
pub fn window_at(params: &Params, initial: &Window, path: &[u32]) -> Window {
    let mut lo = initial.lo().clone();
    for (i, idx) in path.iter().enumerate() {
        lo += params.j_len(i as u64 + 1) * *idx;
    }
    let hi = Rational::from(&lo + params.j_len(path.len() as u64));
    Window::new(lo, hi).expect("positive length")
}

struct ParentResult {
    removed: BTreeSet<u64>,
    records: Vec<RemovalRecord>,
    dangers: Vec<(HeightClass, Kind, DangerInterval, u64, u64)>,
}

fn class_bound(params: &Params, n: u64, l: u32) -> f64 {
    let r = params.r as f64;
    8.0 * params.c.to_f64() * r * r * (n + 1) as f64 / (params.c1.to_f64() * params.theta.c_lb().to_f64() * 2f64.powi(l as i32))
        + 2.0
}

fn process_parent(
    params: &Params,
    ctx: &ClassContext,
    parent: &BeamEntry,
    n: u64,
    children: u64,
) -> Result<ParentResult, ConstructionError> {
    let mut out = ParentResult { removed: BTreeSet::new(), records: Vec::new(), dangers: Vec::new() };
    if n < 3 {
        return Ok(out);
    }
    let census = window_census(ctx, &parent.window, n, n)?;
    let w = params.j_len(n + 1);
    let key = parent.path_key(parent.path.len());
    for ((class, kind), ivs) in &census.items {
        for iv in ivs {
            let Some((first, last)) = iv.cell_range(parent.window.lo(), &w, children, ctx.precision).map_err(EnumError::from)?
            else {
                continue;
            };
            out.removed.extend(first..=last);
            let hw = iv.halfwidth_enclosure(128).lo_rational();
            let g = Rational::from(hw * 2u32) / &w;
            let geometric_bound = g.ceil().numer().to_u64().unwrap_or(u64::MAX).saturating_add(2);
            out.records.push(RemovalRecord {
                parent: key.clone(),
                source: format!("{}:{}", iv.source().kind(), iv.source().coords()),
                class: [class.n, class.l as u64, class.k as u64],
                first,
                last,
                geometric_bound,
                class_bound: class_bound(params, n, class.l),
            });
            out.dangers.push((*class, *kind, iv.clone(), first, last));
        }
    }
    Ok(out)
}

/// Lemma-level audit of every class window M (of the K-grid on the ancestor J_{n−3}) that a
/// member meets: block, carrier and case.
fn audit_windows(
    params: &Params,
    ctx: &ClassContext,
    initial: &Window,
    parent: &BeamEntry,
    n: u64,
    dangers: &[(HeightClass, Kind, DangerInterval, u64, u64)],
    audit: &mut AuditRecord,
) -> Result<(), ConstructionError> {
    let anc = window_at(params, initial, &parent.path[..(n - 3) as usize]);
    let mut seen: BTreeSet<(HeightClass, Kind, u64)> = BTreeSet::new();
    for (class, kind, iv, _, _) in dangers {
        let w = ctx.window_len(n, class.l);
        let k = Rational::from(anc.width() / &w);
        let count = k.numer().to_u64().unwrap_or(u64::MAX);
        let Some((a, b)) = iv.cell_range(anc.lo(), &w, count, ctx.precision).map_err(EnumError::from)? else {
            continue;
        };
        for i in a..=b {
            if !seen.insert((*class, *kind, i)) {
                continue;
            }
            let lo = Rational::from(anc.lo() + Rational::from(&w * i));
            let m = Window::new(lo.clone(), lo + &w)?;
            audit.windows_audited += 1;
            let res = match kind {
                Kind::Point => build_block_points(ctx, &m, class),
                Kind::Line => build_block_lines(ctx, &m, class),
            }
            .and_then(|block| classify_case(ctx, &block, class, *kind));
            match res {
                Ok(rep) => {
                    let tag = serde_json::to_value(rep.tag).expect("tag").as_str().unwrap_or("?").to_string();
                    *audit.case_counts.entry(tag).or_default() += 1;
                }
                Err(EnumError::LemmaViolation(d)) => {
                    if params.mode == Mode::Proof {
                        return Err(ConstructionError::Violation(d.to_string()));
                    }
                    audit.diagnostics.push(d.to_string());
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(())
}

/// J_n → J_{n+1} for every beam interval, removal of children meeting a class-n danger
/// interval, audits, and selection of the next beam.
pub fn level_step(branch: &mut Branch, params: &Params, opts: &RunOptions) -> Result<(), ConstructionError> {
    let n = branch.depth;
    let children = params.r_n(n);
    let total = (branch.beam.len() as u64).saturating_mul(children);
    if total > opts.max_children {
        return Err(ConstructionError::Budget(format!(
            "level {n}: {} parents × R_{n} = {children} children exceeds the budget of {}",
            branch.beam.len(),
            opts.max_children
        )));
    }
    let ctx = class_context(params);
    let results: Vec<Result<ParentResult, ConstructionError>> =
        branch.beam.par_iter().map(|p| process_parent(params, &ctx, p, n, children)).collect();
    let results: Vec<ParentResult> = results.into_iter().collect::<Result<_, _>>()?;

    let mut audit = AuditRecord { k_integral: true, ..Default::default() };
    let mut by_ancestor: BTreeMap<String, u64> = BTreeMap::new();
    let mut removed_total = 0u64;
    let mut records = Vec::new();
    let mut candidates: Vec<(u64, u64, usize, u64)> = Vec::new();
    for (pi, (parent, res)) in branch.beam.iter().zip(&results).enumerate() {
        removed_total += res.removed.len() as u64;
        if n >= 3 {
            let key = parent.path_key((n - 3) as usize);
            *by_ancestor.entry(key).or_default() += res.removed.len() as u64;
        }
        for rec in &res.records {
            let count = rec.last - rec.first + 1;
            if count > rec.geometric_bound || count as f64 > rec.class_bound {
                audit.bound_violations.push(format!("{} removes {count} children of {}", rec.source, rec.parent));
            }
        }
        records.extend(res.records.iter().cloned());
        let ranges: Vec<(u64, u64)> = res.dangers.iter().map(|d| (d.3, d.4)).collect();
        for i in 0..children {
            if res.removed.contains(&i) {
                continue;
            }
            let clearance = ranges
                .iter()
                .map(|&(a, b)| if i < a { a - i } else { i - b })
                .min()
                .unwrap_or(u64::MAX);
            let centrality = (2 * i + 1).abs_diff(children);
            candidates.push((clearance, centrality, pi, i));
        }
    }

    if n >= 3 {
        let schedule = CantorSchedule::growing(params.r);
        let bound = schedule.column(n, 64).into_iter().map(|(_, e)| e.hi().to_f64()).sum::<f64>();
        for (k, v) in &by_ancestor {
            let ratio = *v as f64 / bound;
            audit.max_ratio = audit.max_ratio.max(ratio);
            audit.per_ancestor.insert(k.clone(), (*v, bound));
            if (*v as f64) > bound {
                audit.bound_violations.push(format!("ancestor {k}: {v} removals exceed r_(n-3,n) = {bound:.3e}"));
            }
        }
        // K = |J_{n−3}|/|M| for every l
        for l in 0..=ctx.l_max(n) {
            let k = params.j_len(n - 3) / ctx.window_len(n, l);
            audit.k_integral &= k.is_integer();
            audit.k_values.push(rational_to_string(&k));
        }
        if opts.audit {
            for (parent, res) in branch.beam.iter().zip(&results) {
                audit_windows(params, &ctx, &branch.initial, parent, n, &res.dangers, &mut audit)?;
            }
        }
        if params.mode == Mode::Proof && (!audit.bound_violations.is_empty() || !audit.k_integral) {
            return Err(ConstructionError::Violation(format!("level {n}: {:?}", audit.bound_violations)));
        }
    }

    if candidates.is_empty() {
        let dump = results
            .iter()
            .flat_map(|r| r.dangers.iter().map(|d| serde_json::to_string(&d.2.to_json()).expect("plain data")))
            .collect();
        return Err(ConstructionError::Extinction { level: n, dump });
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));
    candidates.truncate(opts.beam_width);
    let w = params.j_len(n + 1);
    let beam: Vec<BeamEntry> = candidates
        .iter()
        .map(|&(_, _, pi, i)| {
            let parent = &branch.beam[pi];
            let lo = Rational::from(parent.window.lo() + Rational::from(&w * i));
            let mut path = parent.path.clone();
            path.push(i as u32);
            BeamEntry { window: Window::new(lo.clone(), lo + &w).expect("w > 0"), path }
        })
        .collect();
    let ledger = LevelLedger::new(n, branch.beam.len() as u64, children, removed_total, by_ancestor);
    ledger.check().map_err(ConstructionError::Violation)?;
    branch.levels.push(LevelRecord { n, ledger, removals: records, audit, beam_size: beam.len() });
    branch.beam = beam;
    branch.depth = n + 1;
    Ok(())
}

/// Runs init_levels and level steps up to `opts.depth`, calling `on_level` after each.
pub fn run(
    params: &Params,
    opts: &RunOptions,
    resume: Option<Branch>,
    mut on_level: impl FnMut(&Branch) -> Result<(), ConstructionError>,
) -> Result<Branch, ConstructionError> {
    let mut branch = match resume {
        Some(b) => b,
        None => {
            let initial = choose_initial(params)?;
            Branch {
                initial: initial.clone(),
                beam: vec![BeamEntry { window: initial, path: Vec::new() }],
                depth: 0,
                levels: Vec::new(),
            }
        }
    };
    while branch.depth < opts.depth {
        level_step(&mut branch, params, opts)?;
        on_level(&branch)?;
    }
    Ok(branch)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub depth: u64,
    pub lo: String,
    pub hi: String,
    pub path: Vec<u32>,
    pub lo_approx: f64,
}

/// Exact endpoints of the best J_depth of the beam.
pub fn extract_witness(branch: &Branch, depth: u64) -> Result<(Rational, Rational, Vec<u32>), ConstructionError> {
    if depth > branch.depth {
        return Err(ConstructionError::InvalidParams(format!("branch only reaches level {}", branch.depth)));
    }
    let best = branch.beam.first().ok_or(ConstructionError::Extinction { level: branch.depth, dump: Vec::new() })?;
    let path = best.path[..depth as usize].to_vec();
    let w = best_window(branch, &path);
    Ok((w.lo().clone(), w.hi().clone(), path))
}

fn best_window(branch: &Branch, path: &[u32]) -> Window {
    // lengths follow from the first level's data: |J_{i+1}| = |J_i|/R_i
    let mut w = branch.initial.clone();
    for (i, idx) in path.iter().enumerate() {
        let count = branch.levels[i].ledger.r_n;
        w = w.part(*idx as u64, count);
    }
    w
}

/// Re-checks that J_depth meets no danger interval of height in [Q, c_lb R^{depth−1}F(depth−1))
/// and none below Q.
pub fn post_check(params: &Params, window: &Window, depth: u64) -> Result<(usize, usize), ConstructionError> {
    let low = low_dangers(params, window)?.len();
    let high = if depth >= 4 {
        window_census(&class_context(params), window, 3, depth - 1)?.met
    } else {
        0
    };
    Ok((low, high))
}

// ---- checkpoints ----

#[derive(Serialize, Deserialize)]
struct BeamJson {
    lo: String,
    hi: String,
    path: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
pub struct Checkpoint {
    pub params_fingerprint: String,
    initial: (String, String),
    depth: u64,
    beam: Vec<BeamJson>,
    levels: Vec<LevelRecord>,
}

pub fn params_fingerprint(params: &Params) -> String {
    serde_json::to_string(&params.to_json()).expect("plain data")
}

impl Checkpoint {
    pub fn of(branch: &Branch, params: &Params) -> Self {
        let win = |w: &Window| (rational_to_string(w.lo()), rational_to_string(w.hi()));
        Checkpoint {
            params_fingerprint: params_fingerprint(params),
            initial: win(&branch.initial),
            depth: branch.depth,
            beam: branch
                .beam
                .iter()
                .map(|b| {
                    let (lo, hi) = win(&b.window);
                    BeamJson { lo, hi, path: b.path.clone() }
                })
                .collect(),
            levels: branch.levels.clone(),
        }
    }

    pub fn into_branch(self, params: &Params) -> Result<Branch, ConstructionError> {
        if self.params_fingerprint != params_fingerprint(params) {
            return Err(ConstructionError::Checkpoint("checkpoint was written with different parameters".into()));
        }
        let parse = |(lo, hi): (String, String)| -> Result<Window, ConstructionError> {
            let lo = parse_rational_literal(&lo)?;
            let hi = parse_rational_literal(&hi)?;
            Ok(Window::new(lo, hi)?)
        };
        let beam = self
            .beam
            .into_iter()
            .map(|b| Ok(BeamEntry { window: parse((b.lo, b.hi))?, path: b.path }))
            .collect::<Result<Vec<_>, ConstructionError>>()?;
        Ok(Branch { initial: parse(self.initial)?, beam, depth: self.depth, levels: self.levels })
    }
}
