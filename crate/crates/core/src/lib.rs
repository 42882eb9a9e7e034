//! Classical polar spaces, their strongly regular (affine) polar graphs, and
//! eigenfunctions of minimum support, all in exact arithmetic.

pub mod cache;
pub mod cli;
pub mod eigen;
pub mod forms;
pub mod graph;
pub mod gf;
pub mod linalg;
pub mod oracle;
pub mod polar;
