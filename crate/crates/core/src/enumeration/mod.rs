//! Height classes of rational points and integer lines, their enumeration near a
//! window on L_θ, subsumption pruning, and the block/case structure used by the audits.

mod blocks;
mod classes;
mod lattice;
mod search;

use serde::Serialize;
use thiserror::Error;

use crate::arith::ArithError;
use crate::geometry::GeometryError;

pub use blocks::{
    build_block_lines, build_block_points, classify_case, collinearity_carrier, concurrency_carrier,
    max_common_window, Block, Carrier, CaseReport, CaseTag,
};
pub use classes::{
    class_members, line_class, point_class, subsumption_filter, window_census, Census, ClassContext, DangerStore,
    HeightClass, Kind,
};
pub use lattice::{det, lll_reduce, short_vectors, Row};
pub use search::{enumerate_lines, enumerate_lines_reach, enumerate_points, enumerate_points_reach, Window};

/// A failed structural check, with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub check: String,
    pub class: Option<HeightClass>,
    pub window: String,
    pub dump: Vec<String>,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} violated on {}", self.check, self.window)?;
        if let Some(c) = &self.class {
            write!(f, " in class ({},{},{})", c.n, c.l, c.k)?;
        }
        for line in &self.dump {
            write!(f, "\n  {line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("empty window [{0}, {1}]")]
    EmptyWindow(String, String),
    #[error("invalid height class: {0}")]
    InvalidClass(String),
    #[error("lemma violation: {0}")]
    LemmaViolation(Box<Diagnostic>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
