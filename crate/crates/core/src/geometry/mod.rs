//! Rational points, integer lines, heights, dangerous intervals on L_θ, and duality checks.

mod danger;
mod duality;
mod objects;

use thiserror::Error;

use crate::arith::ArithError;

pub use danger::{
    danger_line, danger_point, line_radius, point_radius, Delta, DangerInterval, DangerJson, End, Source,
};
pub use duality::{
    check_duality_line, check_duality_point, minimal_line_delta, minimal_point_delta, random_line_instance,
    random_point_instance, DualityReport,
};
pub use objects::{height_line, height_point, intersect, line_through, ordinate_gap, ProjLine, RationalPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("point has q = 0")]
    PointAtInfinity,
    #[error("line has A = B = 0")]
    DegenerateLine,
    #[error("cannot parse integer triple {0:?}")]
    Parse(String),
    #[error("line {0} is vertical (B = 0)")]
    VerticalLine(String),
    #[error("points coincide: {0}")]
    IdenticalPoints(String),
    #[error("lines {0} and {1} are parallel")]
    Parallel(String, String),
    #[error("point {0} has zero height")]
    ZeroHeight(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
