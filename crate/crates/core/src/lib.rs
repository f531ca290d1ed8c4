//! Exact-arithmetic Cantor constructions of points on a vertical line L_θ that are
//! multiplicatively badly approximable both by rational points and by integer lines.

pub mod arith;
pub mod geometry;
pub mod enumeration;
pub mod cantor;
pub mod construction;
pub mod oracle;
pub mod cli;
