//! Horizontal/vertical constraint graphs and the legalizers built on them.

mod graph;
mod legalize;

pub use graph::*;
pub use legalize::*;
