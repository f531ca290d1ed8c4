//! The level-by-level construction on L_θ: parameters, splitting and removal along a
//! beam of surviving intervals, removal audits, and the witness interval.

mod params;
mod run;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::arith::{rational_to_string, ArithError};
use crate::enumeration::EnumError;
use crate::geometry::GeometryError;

pub use params::{derive_params, min_proof_r, Mode, Overrides, Params, ParamsJson};
pub use run::{
    choose_initial, class_context, extract_witness, full_tree_count, init_levels, level_step, params_fingerprint,
    post_check, run, window_at, AuditRecord, BeamEntry, Branch, Checkpoint, LevelRecord, RemovalRecord, RunOptions,
    Witness,
};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("beam extinct at level {level} ({} danger intervals)", dump.len())]
    Extinction { level: u64, dump: Vec<String> },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("audit violation: {0}")]
    Violation(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl From<GeometryError> for ConstructionError {
    fn from(e: GeometryError) -> Self {
        ConstructionError::Enum(EnumError::Geometry(e))
    }
}

impl ConstructionError {
    /// True when the failure is a precision cap rather than a mathematical outcome.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            ConstructionError::Arith(ArithError::PrecisionExhausted { .. })
                | ConstructionError::Enum(EnumError::Arith(ArithError::PrecisionExhausted { .. }))
                | ConstructionError::Enum(EnumError::Geometry(GeometryError::Arith(ArithError::PrecisionExhausted { .. })))
        )
    }
}

/// Everything a construction run reports.
#[derive(Serialize)]
pub struct Manifest {
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub params: ParamsJson,
    pub initial: (String, String),
    pub full_tree_counts: Vec<String>,
    pub levels: Vec<LevelRecord>,
    pub witness: Witness,
    /// danger intervals meeting the witness: (below Q, in [Q, c_lb R^{d−1}F(d−1)))
    pub post_check: (usize, usize),
    pub totals: Totals,
}

#[derive(Serialize, Default)]
pub struct Totals {
    pub removed: u64,
    pub windows_audited: u64,
    pub diagnostics: u64,
    pub bound_violations: u64,
    pub k_integral: bool,
    pub ledger_exact: bool,
    pub max_removal_ratio: f64,
}

impl Manifest {
    pub fn build(
        params: &Params,
        branch: &Branch,
        config: BTreeMap<String, String>,
    ) -> Result<Manifest, ConstructionError> {
        let depth = branch.depth;
        let (lo, hi, path) = extract_witness(branch, depth)?;
        let wwin = crate::enumeration::Window::new(lo.clone(), hi.clone())?;
        let post = post_check(params, &wwin, depth)?;
        let mut totals = Totals { k_integral: true, ledger_exact: true, ..Default::default() };
        for l in &branch.levels {
            totals.removed += l.ledger.removed;
            totals.windows_audited += l.audit.windows_audited;
            totals.diagnostics += l.audit.diagnostics.len() as u64;
            totals.bound_violations += l.audit.bound_violations.len() as u64;
            totals.k_integral &= l.audit.k_integral;
            totals.ledger_exact &= l.ledger.check().is_ok();
            totals.max_removal_ratio = totals.max_removal_ratio.max(l.audit.max_ratio);
        }
        Ok(Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            params: params.to_json(),
            initial: (rational_to_string(branch.initial.lo()), rational_to_string(branch.initial.hi())),
            full_tree_counts: (0..=depth.min(3)).map(|n| full_tree_count(params, n).to_string()).collect(),
            levels: branch.levels.clone(),
            witness: Witness {
                depth,
                lo: rational_to_string(&lo),
                hi: rational_to_string(&hi),
                path,
                lo_approx: lo.to_f64(),
            },
            post_check: post,
            totals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big_f, pow2, Precision, Theta};
    use rug::{Integer, Rational};

    fn explore(r: u64, ov: Overrides) -> Params {
        derive_params(Theta::golden(), Some(r), Mode::Exploration, &ov, Precision::default()).unwrap()
    }

    #[test]
    fn initial_levels_and_lengths() {
        let prm = explore(16, Overrides::default());
        let opts = RunOptions { depth: 3, ..Default::default() };
        let b = init_levels(&prm, &opts).unwrap();
        assert_eq!(b.depth, 3);
        assert_eq!(b.initial.width(), prm.c1);
        // #J_1 = R, |J_3| = c₁/(6R³)
        assert_eq!(b.levels[0].ledger.produced, 16);
        assert_eq!(b.beam[0].window.width(), Rational::from(&prm.c1 / (6 * 16 * 16 * 16)));
        assert_eq!(full_tree_count(&prm, 3), Integer::from(6 * 4096));
        assert!(b.levels.iter().all(|l| l.ledger.removed == 0));
        let (lo, hi, path) = extract_witness(&b, 0).unwrap();
        assert_eq!((&lo, &hi), (b.initial.lo(), b.initial.hi()));
        assert!(path.is_empty());
    }

    #[test]
    fn witness_denominator_divides_grid() {
        let prm = explore(16, Overrides::default());
        let opts = RunOptions { depth: 5, ..Default::default() };
        let b = run(&prm, &opts, None, |_| Ok(())).unwrap();
        let (lo, hi, path) = extract_witness(&b, 5).unwrap();
        assert_eq!(path.len(), 5);
        assert_eq!(Rational::from(&hi - &lo), prm.j_len(5));
        let grid = Integer::from(prm.c1.denom() * Integer::from(Integer::u_pow_u(16, 5))) * big_f(5);
        for x in [&lo, &hi] {
            assert!(grid.is_divisible(x.denom()));
        }
        // nested chain
        let mut prev = b.initial.clone();
        for d in 1..=5 {
            let w = window_at(&prm, &b.initial, &path[..d]);
            assert!(prev.contains_window(&w));
            prev = w;
        }
    }

    /// A beam of one J_3 centred on 1/100, the centre of Δ(P) for P = (162, 1, 100) with
    /// H(P) = 10⁴·|100φ − 162| ≈ 1966 in the level-3 band.
    fn anchored(prm: &Params) -> Branch {
        let centre = Rational::from((1, 100));
        let half = Rational::from(prm.j_len(3) / 2u32);
        let j3 = crate::enumeration::Window::new(Rational::from(&centre - &half), Rational::from(&centre + &half)).unwrap();
        let ihalf = Rational::from(&prm.c1 / 2u32);
        let initial = crate::enumeration::Window::new(Rational::from(&centre - &ihalf), centre + ihalf).unwrap();
        Branch { initial, beam: vec![BeamEntry { window: j3, path: vec![0, 0, 0] }], depth: 3, levels: Vec::new() }
    }

    #[test]
    fn anchored_removal_matches_direct_overlap() {
        let prm = explore(16, Overrides::default());
        let mut b = anchored(&prm);
        let opts = RunOptions { depth: 4, beam_width: 4, ..Default::default() };
        level_step(&mut b, &prm, &opts).unwrap();
        let lvl = &b.levels[0];
        assert!(lvl.ledger.check().is_ok());
        assert!(lvl.audit.k_integral);
        assert!(lvl.removals.iter().any(|r| r.source == "point:162,1,100"));
        // Δ(P) straddles the boundary between children 31 and 32 of 64
        let rec = lvl.removals.iter().find(|r| r.source == "point:162,1,100").unwrap();
        assert_eq!((rec.first, rec.last), (31, 32));
        assert!(rec.last - rec.first + 1 <= rec.geometric_bound);
        assert!(lvl.ledger.removed >= 2);
        assert_eq!(lvl.ledger.by_ancestor.get("I"), Some(&lvl.ledger.removed));
        assert!(lvl.audit.windows_audited >= 1);
        assert!(lvl.audit.diagnostics.is_empty());
        for e in &b.beam {
            let (low, high) = post_check(&prm, &e.window, 4).unwrap();
            assert_eq!((low, high), (0, 0));
        }
        // surviving children nearest the danger are the last picked
        assert!(b.beam.iter().all(|e| e.path[3] != 31 && e.path[3] != 32));
    }

    #[test]
    fn wide_danger_extinguishes_a_single_beam() {
        let prm = explore(16, Overrides { c: Some(pow2(-8)), c1: None });
        let mut b = anchored(&prm);
        let opts = RunOptions { depth: 4, beam_width: 1, ..Default::default() };
        match level_step(&mut b, &prm, &opts) {
            Err(ConstructionError::Extinction { level, dump }) => {
                assert_eq!(level, 3);
                assert!(!dump.is_empty());
            }
            other => panic!("expected extinction, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn checkpoint_round_trip_and_resume() {
        let prm = explore(16, Overrides { c: Some(pow2(-16)), c1: Some(pow2(-20)) });
        let opts = RunOptions { depth: 5, beam_width: 3, ..Default::default() };
        let full = run(&prm, &opts, None, |_| Ok(())).unwrap();
        let mut saved = None;
        let _ = run(&prm, &RunOptions { depth: 4, ..opts.clone() }, None, |b| {
            saved = Some(serde_json::to_string(&Checkpoint::of(b, &prm)).unwrap());
            Ok(())
        })
        .unwrap();
        let cp: Checkpoint = serde_json::from_str(&saved.unwrap()).unwrap();
        let resumed = run(&prm, &opts, Some(cp.into_branch(&prm).unwrap()), |_| Ok(())).unwrap();
        let a = serde_json::to_string(&Manifest::build(&prm, &full, Default::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&Manifest::build(&prm, &resumed, Default::default()).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = explore(17, Overrides::default());
        let cp: Checkpoint = serde_json::from_str(&serde_json::to_string(&Checkpoint::of(&full, &prm)).unwrap()).unwrap();
        assert!(cp.into_branch(&other).is_err());
    }

    #[test]
    fn budget_cap() {
        let prm = explore(16, Overrides::default());
        let opts = RunOptions { depth: 2, max_children: 100, ..Default::default() };
        assert!(matches!(run(&prm, &opts, None, |_| Ok(())), Err(ConstructionError::Budget(_))));
    }
}
