//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

use madcantor::arith::{pow2, ExactReal, Precision, Theta};
use madcantor::cantor::{bv4_check, dim_lower_bound, CantorSchedule};
use madcantor::construction::{
    class_context, derive_params, extract_witness, level_step, run, BeamEntry, Branch, Mode, Overrides, Params,
    RunOptions,
};
use madcantor::enumeration::{
    build_block_lines, build_block_points, classify_case, window_census, ClassContext, EnumError, HeightClass, Kind,
    Window,
};
use madcantor::geometry::{
    check_duality_line, check_duality_point, random_line_instance, random_point_instance, DangerInterval, ProjLine,
    RationalPoint, Source,
};
use madcantor::oracle::{self, naive, Argmin};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn explore(theta: Theta, ov: Overrides) -> Params {
    derive_params(theta, Some(16), Mode::Exploration, &ov, Precision::default()).expect("exploration params")
}

// ---------------------------------------------------------------- schedule

fn schedule_certificate() -> Outcome {
    let t = Instant::now();
    let cert = bv4_check(&CantorSchedule::growing(128), 3, 100_000, Default::default()).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    ensure(cert.all_pass, || format!("first failure at n = {:?}", cert.first_failure))?;
    ensure(dt < Duration::from_secs(60), || format!("took {dt:?}"))?;
    Ok(format!("3 <= n <= 100000 certified, max ratio {:.4}, {:.1?}", cert.max_ratio, dt))
}

fn dimension_bound() -> Outcome {
    let t = Instant::now();
    let d = dim_lower_bound(&CantorSchedule::growing(128), 100_000);
    let dt = t.elapsed();
    let six_sevenths = 6.0 / 7.0;
    ensure(d.argmin == 0, || format!("minimum at n = {}", d.argmin))?;
    ensure(d.inf_lo <= six_sevenths && six_sevenths <= d.inf_hi, || {
        format!("inf enclosure [{}, {}] misses 6/7", d.inf_lo, d.inf_hi)
    })?;
    ensure(d.last_lo > 0.96, || format!("bound at n_max is {}", d.last_lo))?;
    ensure(d.monotone, || "per-level bound decreases somewhere".into())?;
    ensure(dt < Duration::from_secs(10), || format!("took {dt:?}"))?;
    Ok(format!("inf = [{:.12}, {:.12}] at n = 0, n = 1e5 gives {:.5}, {:.1?}", d.inf_lo, d.inf_hi, d.last_lo, dt))
}

// ---------------------------------------------------------------- duality

fn duality() -> Outcome {
    let t = Instant::now();
    let theta = Theta::golden();
    let surd = theta.surd();
    let cap = pow2(-10);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut pv, mut lv) = (0usize, 0usize);
    for _ in 0..10_000 {
        let (a, b, d) = random_point_instance(surd, &mut rng);
        ensure(d <= cap, || format!("point delta {d} above 2^-10"))?;
        let rep = check_duality_point(&a, &b, surd, &ExactReal::from_rational(&d));
        ensure(rep.applicable, || format!("point instance {a} {b} not applicable"))?;
        pv += rep.violations();
    }
    for _ in 0..10_000 {
        let (a, b, d) = random_line_instance(surd, &mut rng);
        ensure(d <= cap, || format!("line delta {d} above 2^-10"))?;
        let rep = check_duality_line(&a, &b, surd, &ExactReal::from_rational(&d));
        ensure(rep.applicable, || format!("line instance {a} {b} not applicable"))?;
        lv += rep.violations();
    }
    let dt = t.elapsed();
    ensure(pv + lv == 0, || format!("{pv} point and {lv} line violations"))?;
    ensure(dt < Duration::from_secs(300), || format!("took {dt:?}"))?;
    Ok(format!("10000 point + 10000 line instances, 0 violations, {:.1?}", dt))
}

// ---------------------------------------------------------------- enumeration

/// floor(frac(x)·2^64), from a lower rational bound.
fn frac64(x: &ExactReal) -> u64 {
    let (lo, _) = x.rational_bounds(96);
    let (scaled, _) = Integer::from(lo.numer() << 64u32).div_rem_floor(lo.denom().clone());
    scaled.to_u64_wrapping()
}

fn ring_dist(t: u64) -> u64 {
    t.min(t.wrapping_neg())
}

/// Tolerance in units of 2^-64: mult·half plus `err` units, rounded up generously.
fn tol(mult: u64, half: f64, err: u64) -> u64 {
    let v = (mult as f64) * half * 18446744073709551616.0 * (1.0 + 1e-9);
    if v >= 9.0e18 {
        u64::MAX
    } else {
        v.ceil() as u64 + err
    }
}

/// Everything of height in [Q, hmax) whose Δ meets the window, found by scanning
/// denominators and line coefficients directly.
fn brute_force_met(ctx: &ClassContext, w: &Window, hmax: &Rational) -> Vec<DangerInterval> {
    let th = ctx.theta.value();
    let q_floor = ExactReal::from_rational(&ctx.q_floor());
    let h_top = ExactReal::from_rational(hmax);
    // halfwidth ≤ c/H ≤ c/Q since f ≥ 1
    let reach = Rational::from(&ctx.c / ctx.q_floor());
    let e_lo = Rational::from(w.lo() - &reach);
    let e_hi = Rational::from(w.hi() + &reach);
    let mid = Rational::from(&e_lo + &e_hi) / 2u32;
    let half = Rational::from(&e_hi - &e_lo).to_f64() / 2.0 * (1.0 + 1e-12);
    let xfx = frac64(&ExactReal::from_rational(&mid));
    let thfx = frac64(th);
    let (wlo, whi) = (w.lo_exact(), w.hi_exact());
    let mut met = Vec::new();
    let mut keep = |src: Source, h: ExactReal| {
        if h < q_floor || h >= h_top {
            return;
        }
        let iv = ctx.danger(&src).unwrap();
        if iv.meets_closed(&wlo, &whi, ctx.precision).unwrap() {
            met.push(iv);
        }
    };

    // points: H ≥ q·c_lb, so q < hmax/c_lb
    let q_max = Rational::from(hmax / ctx.theta.c_lb()).floor().numer().to_u64().unwrap();
    for q in 1..=q_max {
        if ring_dist(q.wrapping_mul(xfx)) > tol(q, half, 2 * q + 4) {
            continue;
        }
        let qi = Integer::from(q);
        let p = th.mul_integer(&qi).round_nearest();
        let r_lo = Rational::from(&e_lo * &qi).ceil().numer().clone();
        let r_hi = Rational::from(&e_hi * &qi).floor().numer().clone();
        let mut r = r_lo;
        while r <= r_hi {
            let pt = RationalPoint::new(p.clone(), r.clone(), qi.clone()).unwrap();
            if *pt.q() == qi {
                let gap = &th.mul_integer(&qi) - &ExactReal::from_integer(p.clone());
                let h = gap.abs().mul_integer(&Integer::from(&qi * &qi));
                keep(Source::Point(pt), h);
            }
            r += 1;
        }
    }

    // lines: |A|*·B² < hmax, B ≥ 1
    let hm = Rational::from(hmax.clone().ceil()).numer().to_u64().unwrap();
    let mut b = 1u64;
    while b * b < hm {
        let a_max = hm / (b * b);
        for a in -(a_max as i64)..=(a_max as i64) {
            let t = b.wrapping_mul(xfx).wrapping_sub((a as u64).wrapping_mul(thfx));
            if ring_dist(t) > tol(b, half, 2 * (b + a.unsigned_abs()) + 4) {
                continue;
            }
            let (bi, ai) = (Integer::from(b), Integer::from(a));
            let at = th.mul_integer(&ai);
            let c_lo = (&ExactReal::from_rational(&Rational::from(&e_lo * &bi)) - &at).ceil();
            let c_hi = (&ExactReal::from_rational(&Rational::from(&e_hi * &bi)) - &at).floor();
            let mut c = c_lo;
            while c <= c_hi {
                let line = ProjLine::new(ai.clone(), bi.clone(), c.clone()).unwrap();
                if *line.b() == bi {
                    let h = Integer::from(ai.abs_ref()).max(Integer::from(1)) * Integer::from(&bi * &bi);
                    keep(Source::Line(line), ExactReal::from_integer(h));
                }
                c += 1;
            }
        }
        b += 1;
    }
    met
}

/// Class of a surviving object, computed from the definitions.
fn class_by_definition(ctx: &ClassContext, iv: &DangerInterval) -> HeightClass {
    let h = iv.height();
    let mut n = 3;
    while *h >= ExactReal::from_rational(&ctx.band(n).1) {
        n += 1;
    }
    let base = Rational::from(ctx.theta.c_lb() * ctx.base(n));
    let mut l = 0u32;
    while *h >= ExactReal::from_rational(&(Rational::from(&base * pow2(l as i64 + 1)))) {
        l += 1;
    }
    let k = match iv.source() {
        Source::Point(p) => {
            let qth = ctx.theta.value().mul_integer(p.q());
            let d = (&qth - &ExactReal::from_integer(p.p().clone())).abs().mul_integer(p.q());
            let mut k = 0u32;
            while d >= ExactReal::from_rational(&Rational::from(ctx.theta.c_lb() * pow2(k as i64 + 1))) {
                k += 1;
            }
            k
        }
        Source::Line(line) => {
            let mut k = 0u32;
            while Integer::from(1) << (k + 1) <= *line.b() {
                k += 1;
            }
            k
        }
    };
    HeightClass { n, l, k }
}

type ClassSets = BTreeMap<(u64, u32, u32, &'static str), BTreeSet<String>>;

fn oracle_classes(ctx: &ClassContext, w: &Window, n: u64) -> ClassSets {
    let hmax = ctx.band(n).1;
    let met = brute_force_met(ctx, w, &hmax);
    let mut out = ClassSets::new();
    for x in &met {
        let hx = x.height();
        let covered = met
            .iter()
            .any(|y| y.height() < hx && x.contained_in(y, ctx.precision).unwrap());
        if covered {
            continue;
        }
        let c = class_by_definition(ctx, x);
        if c.n == n {
            out.entry((c.n, c.l, c.k, x.source().kind())).or_default().insert(x.source().coords());
        }
    }
    out
}

fn library_classes(ctx: &ClassContext, w: &Window, n: u64) -> ClassSets {
    let census = window_census(ctx, w, n, n).unwrap();
    let mut out = ClassSets::new();
    for ((c, _), ivs) in &census.items {
        for iv in ivs {
            out.entry((c.n, c.l, c.k, iv.source().kind())).or_default().insert(iv.source().coords());
        }
    }
    out
}

struct ProbeWindow {
    ctx_index: usize,
    n: u64,
    l: u32,
    window: Window,
    members: usize,
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::from((Integer::from(rng.gen_range(0u64..1 << 40)), Integer::from(1u64 << 40)))
}

/// A point or line with height in the band of level n, and its Δ centre.
fn anchor(ctx: &ClassContext, n: u64, rng: &mut ChaCha8Rng) -> (Rational, ExactReal) {
    let (lo, hi) = ctx.band(n);
    let th = ctx.theta.value();
    let (lo_e, hi_e) = (ExactReal::from_rational(&lo), ExactReal::from_rational(&hi));
    loop {
        if rng.gen_bool(0.5) {
            let q_lo = lo.to_f64().sqrt().floor().max(1.0) as u64;
            let q_hi = (2.0 * hi.to_f64()).sqrt().ceil() as u64 + 1;
            let q = Integer::from(rng.gen_range(q_lo..=q_hi));
            let (d, p) = th.mul_integer(&q).dist_to_nearest();
            let h = d.mul_integer(&Integer::from(&q * &q));
            if h < lo_e || h >= hi_e {
                continue;
            }
            let r = Integer::from(rng.gen_range(0..q.to_u64().unwrap()));
            let pt = RationalPoint::new(p, r, q).unwrap();
            return (pt.y(), h);
        }
        let b = rng.gen_range(1..=(hi.to_f64().sqrt() as u64).max(1));
        let bb = Rational::from(b * b);
        let a_lo = Rational::from(&lo / &bb).ceil().numer().to_u64().unwrap().max(1);
        let a_hi = Rational::from(&hi / &bb).ceil().numer().to_u64().unwrap().saturating_sub(1);
        if a_lo > a_hi {
            continue;
        }
        let a = rng.gen_range(a_lo..=a_hi) as i64 * if rng.gen_bool(0.5) { 1 } else { -1 };
        let c = -th.mul_integer(&Integer::from(a)).round_nearest() + Integer::from(rng.gen_range(0..b));
        let line = ProjLine::new(a, b, c).unwrap();
        let h = ExactReal::from_integer(Integer::from(line.a().abs_ref()).max(Integer::from(1)) * line.b().clone().square());
        if h < lo_e || h >= hi_e {
            continue;
        }
        let (y, _) = line.ordinate(th).unwrap().rational_bounds(128);
        return (y, h);
    }
}

fn sub_index(ctx: &ClassContext, n: u64, h: &ExactReal) -> u32 {
    let base = Rational::from(ctx.theta.c_lb() * ctx.base(n));
    let mut l = 0;
    while *h >= ExactReal::from_rational(&Rational::from(&base * pow2(l as i64 + 1))) {
        l += 1;
    }
    l.min(ctx.l_max(n))
}

fn enumeration_completeness(contexts: &[ClassContext], probes: &mut Vec<ProbeWindow>) -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut objects, mut populated) = (0usize, 0usize);
    for (ci, ctx) in contexts.iter().enumerate() {
        for i in 0..100 {
            let n = rng.gen_range(3..=5u64);
            let (l, lo) = if i % 2 == 0 {
                let l = rng.gen_range(0..=ctx.l_max(n));
                (l, random_rational(&mut rng))
            } else {
                let (centre, h) = anchor(ctx, n, &mut rng);
                let l = sub_index(ctx, n, &h);
                let u = Rational::from((rng.gen_range(1u32..1024), 1024u32));
                (l, centre - u * ctx.window_len(n, l))
            };
            let hi = Rational::from(&lo + ctx.window_len(n, l));
            let w = Window::new(lo, hi).unwrap();
            let lib = library_classes(ctx, &w, n);
            let orc = oracle_classes(ctx, &w, n);
            if lib != orc {
                return Err(format!(
                    "theta {} window {w} level {n}: library {lib:?} vs oracle {orc:?}",
                    ctx.theta.surd()
                ));
            }
            let members: usize = lib.values().map(|s| s.len()).sum();
            objects += members;
            populated += (members > 0) as usize;
            probes.push(ProbeWindow { ctx_index: ci, n, l, window: w, members });
        }
    }
    let dt = t.elapsed();
    ensure(dt < Duration::from_secs(600), || format!("took {dt:?}"))?;
    Ok(format!(
        "200 windows (phi, sqrt 2; n = 3..5) match the brute-force oracle, {populated} populated, {objects} class members, {:.1?}",
        dt
    ))
}

// ---------------------------------------------------------------- construction runs

struct RunSet {
    preset: (Params, Branch),
    preset_again: Branch,
    others: Vec<(String, Params, Branch)>,
    preset_time: Duration,
}

fn anchored_branch(prm: &Params) -> Branch {
    // J_3 centred on 1/100, the centre of Δ for the point (162, 1, 100) of height ≈ 1966
    let centre = Rational::from((1, 100));
    let half = Rational::from(prm.j_len(3) / 2u32);
    let j3 = Window::new(Rational::from(&centre - &half), Rational::from(&centre + &half)).unwrap();
    let ihalf = Rational::from(&prm.c1 / 2u32);
    let initial = Window::new(Rational::from(&centre - &ihalf), centre + ihalf).unwrap();
    Branch { initial, beam: vec![BeamEntry { window: j3, path: vec![0, 0, 0] }], depth: 3, levels: Vec::new() }
}

fn execute_runs() -> Result<RunSet, String> {
    let preset_params = explore(Theta::golden(), Overrides::default());
    let opts = RunOptions { beam_width: 8, depth: 12, ..Default::default() };
    let t = Instant::now();
    let preset = run(&preset_params, &opts, None, |_| Ok(())).map_err(|e| e.to_string())?;
    let preset_time = t.elapsed();
    let preset_again = run(&preset_params, &opts, None, |_| Ok(())).map_err(|e| e.to_string())?;

    let mut others = Vec::new();
    let wide = || Overrides { c: Some(pow2(-16)), c1: Some(pow2(-20)) };
    let small = RunOptions { beam_width: 3, depth: 6, ..Default::default() };
    for (label, theta) in [("phi", Theta::golden()), ("sqrt2", Theta::sqrt2())] {
        let prm = explore(theta, wide());
        let b = run(&prm, &small, None, |_| Ok(())).map_err(|e| e.to_string())?;
        others.push((format!("{label} c=2^-16 c1=2^-20 depth 6"), prm, b));
    }
    let sq = explore(Theta::sqrt2(), Overrides::default());
    let b = run(&sq, &RunOptions { beam_width: 4, depth: 8, ..Default::default() }, None, |_| Ok(()))
        .map_err(|e| e.to_string())?;
    others.push(("sqrt2 derived depth 8".into(), sq, b));
    let prm = explore(Theta::golden(), Overrides::default());
    let mut b = anchored_branch(&prm);
    let step = RunOptions { beam_width: 4, depth: 5, ..Default::default() };
    while b.depth < step.depth {
        level_step(&mut b, &prm, &step).map_err(|e| format!("anchored: {e}"))?;
    }
    others.push(("anchored at (162, 1, 100)".into(), prm, b));
    Ok(RunSet { preset: (preset_params, preset), preset_again, others, preset_time })
}

fn all_runs(runs: &RunSet) -> Vec<(&str, &Params, &Branch)> {
    let mut v = vec![("preset", &runs.preset.0, &runs.preset.1)];
    v.extend(runs.others.iter().map(|(l, p, b)| (l.as_str(), p, b)));
    v
}

// ---------------------------------------------------------------- audits

fn lemma_audits(contexts: &[ClassContext], probes: &[ProbeWindow], runs: &RunSet) -> Outcome {
    let t = Instant::now();
    let (mut blocks, mut crowded) = (0usize, 0usize);
    for p in probes.iter().filter(|p| p.members > 0) {
        let ctx = &contexts[p.ctx_index];
        let census = window_census(ctx, &p.window, p.n, p.n).map_err(|e| e.to_string())?;
        for ((class, kind), ivs) in &census.items {
            if class.l != p.l {
                continue;
            }
            crowded += (ivs.len() >= 2) as usize;
            let block = match kind {
                Kind::Point => build_block_points(ctx, &p.window, class),
                Kind::Line => build_block_lines(ctx, &p.window, class),
            };
            let report = block.and_then(|b| classify_case(ctx, &b, class, *kind));
            match report {
                Ok(_) => blocks += 1,
                Err(EnumError::LemmaViolation(d)) => return Err(format!("diagnostic: {d}")),
                Err(e) => return Err(format!("audit error on {}: {e}", p.window)),
            }
        }
    }
    let (mut audited, mut run_diags) = (0u64, Vec::new());
    for (label, _, b) in all_runs(runs) {
        for lvl in &b.levels {
            audited += lvl.audit.windows_audited;
            run_diags.extend(lvl.audit.diagnostics.iter().map(|d| format!("{label} level {}: {d}", lvl.n)));
        }
    }
    ensure(run_diags.is_empty(), || run_diags.join("; "))?;
    Ok(format!(
        "0 diagnostics: {blocks} class windows blocked and classified ({crowded} with 2+ members), {audited} run windows audited, {:.1?}",
        t.elapsed()
    ))
}

fn ledger_exactness(runs: &RunSet) -> Outcome {
    let (mut levels, mut removed) = (0usize, 0u64);
    for (label, prm, b) in all_runs(runs) {
        let k = Rational::from(prm.r * prm.r) * &prm.c1 / &prm.c2;
        ensure(*k.denom() == 1, || format!("{label}: R^2 c1/c2 = {k} not integral"))?;
        for lvl in &b.levels {
            let l = &lvl.ledger;
            l.check().map_err(|e| format!("{label} level {}: {e}", lvl.n))?;
            ensure(l.r_n == prm.r_n(lvl.n) && l.produced == l.r_n * l.parents, || {
                format!("{label} level {}: produced {} from {} parents with R_n = {}", lvl.n, l.produced, l.parents, l.r_n)
            })?;
            ensure(l.surviving == l.produced - l.removed, || format!("{label} level {}: survivors", lvl.n))?;
            ensure(lvl.audit.k_integral, || format!("{label} level {}: K subdivision not integral", lvl.n))?;
            levels += 1;
            removed += l.removed;
        }
    }
    Ok(format!("{levels} levels over {} runs balance exactly, {removed} intervals removed in total", all_runs(runs).len()))
}

fn end_to_end(runs: &RunSet) -> Outcome {
    let (prm, b) = &runs.preset;
    ensure(runs.preset_time < Duration::from_secs(600), || format!("depth 12 took {:?}", runs.preset_time))?;
    let t = Instant::now();
    let (lo, hi, path) = extract_witness(b, 12).map_err(|e| e.to_string())?;
    let (lo2, hi2, path2) = extract_witness(&runs.preset_again, 12).map_err(|e| e.to_string())?;
    ensure((&lo, &hi, &path) == (&lo2, &hi2, &path2), || "witness differs between reruns".into())?;
    let rep = oracle::verify_witness(prm.theta.surd(), &lo, &hi, &prm.c, 1_000_000, 1000, 1000);
    let again = oracle::verify_witness(prm.theta.surd(), &lo2, &hi2, &prm.c, 1_000_000, 1000, 1000);
    ensure(rep.point_pass && rep.line_pass, || {
        format!("point margin {} / line margin {} vs c", rep.point.margin_lo, rep.line.margin_lo)
    })?;
    ensure(rep.point.argmin == again.point.argmin && rep.line.argmin == again.line.argmin, || {
        "argmins differ between reruns".into()
    })?;
    Ok(format!(
        "depth 12 in {:.1?}, point margin {:.4e} at {}, line margin {:.4e} at {}, c = 2^-53, verify {:.1?}",
        runs.preset_time,
        rep.point.margin_approx,
        rep.point.argmin,
        rep.line.margin_approx,
        rep.line.argmin,
        t.elapsed()
    ))
}

// ---------------------------------------------------------------- oracle

fn random_input(rng: &mut ChaCha8Rng) -> ExactReal {
    let a = rng.gen_range(-50i64..50);
    if rng.gen_range(0..6) >= 4 {
        return ExactReal::from_rational(&Rational::from((a, rng.gen_range(1i64..40))));
    }
    let d = [2u64, 3, 5, 7][rng.gen_range(0..4)];
    ExactReal::new(a, rng.gen_range(1i64..9), d, rng.gen_range(1i64..40)).unwrap()
}

fn overlaps(a: &madcantor::arith::Enclosure, b: &madcantor::arith::Enclosure) -> bool {
    a.lo() <= b.hi() && b.lo() <= a.hi()
}

fn oracle_consistency() -> Outcome {
    let t = Instant::now();
    let phi = Theta::golden().value().clone();
    let s2 = Theta::sqrt2().value().clone();
    let d = ExactReal::from_rational(&Rational::from((1, 100)));
    let xr = (&phi - &d, &phi + &d);
    let yr = (&s2 - &d, &s2 + &d);
    let grids: Vec<_> = [10u64, 100, 1000].iter().map(|&n| oracle::scan_grid((&xr.0, &xr.1), (&yr.0, &yr.1), 10, n)).collect();
    for w in grids.windows(2) {
        for i in 0..10 {
            for j in 0..10 {
                let (a, b) = (&w[0].cells[i][j].margin, &w[1].cells[i][j].margin);
                ensure(b.lo() <= a.lo() && b.hi() <= a.hi(), || {
                    format!("node ({i},{j}) grows from N = {} to N = {}", w[0].n, w[1].n)
                })?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut discrepancies = Vec::new();
    for i in 0..1000 {
        let (x, y) = (random_input(&mut rng), random_input(&mut rng));
        if i % 2 == 0 {
            let n = rng.gen_range(1..=1000u64);
            let m = oracle::point_margin(&x, &y, n);
            let (e, q) = naive::point_margin(&x, &y, n);
            if m.argmin != (Argmin::Point { q }) || !overlaps(&m.margin, &e) {
                discrepancies.push(format!("points {x} {y} N={n}"));
            }
        } else {
            let (am, bm) = (rng.gen_range(1..=16u64), rng.gen_range(1..=16u64));
            let m = oracle::line_margin(&x, &y, am, bm);
            let (e, (a, b)) = naive::line_margin(&x, &y, am, bm);
            if m.argmin != (Argmin::Line { a, b }) || !overlaps(&m.margin, &e) {
                discrepancies.push(format!("lines {x} {y} Amax={am} Bmax={bm}"));
            }
        }
    }
    ensure(discrepancies.is_empty(), || discrepancies.join("; "))?;
    Ok(format!(
        "10x10 grid monotone over N = 10, 100, 1000; 1000 random inputs agree with the naive implementation, {:.1?}",
        t.elapsed()
    ))
}

// ----------------------------------------------------------------

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() {
    let contexts: Vec<ClassContext> =
        [Theta::golden(), Theta::sqrt2()].into_iter().map(|t| class_context(&explore(t, Overrides::default()))).collect();
    let mut probes = Vec::new();
    let runs = guarded(execute_runs);

    let mut results: Vec<(u32, Outcome)> = Vec::new();
    results.push((1, guarded(schedule_certificate)));
    results.push((2, guarded(dimension_bound)));
    results.push((3, guarded(duality)));
    results.push((4, guarded(|| enumeration_completeness(&contexts, &mut probes))));
    let runs_ref = runs.as_ref().map_err(|e| format!("construction runs failed: {e}"));
    results.push((5, runs_ref.clone().and_then(|r| guarded(|| lemma_audits(&contexts, &probes, r)))));
    results.push((6, runs_ref.clone().and_then(|r| guarded(|| ledger_exactness(r)))));
    results.push((7, runs_ref.and_then(|r| guarded(|| end_to_end(r)))));
    results.push((8, guarded(oracle_consistency)));

    let mut failed = 0;
    for (i, r) in &results {
        match r {
            Ok(msg) => println!("criterion {i}: PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {i}: FAIL  {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
