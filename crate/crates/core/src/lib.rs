//! Fixed-outline floorplanning of hard rectangular modules.
//!
//! Global floorplanning minimizes a nonsmooth wirelength + overlap + boundary
//! cost with a population conjugate subgradient method whose step scale is
//! chosen by Q-learning. Legalization either keeps optimizing the overlap and
//! boundary terms, or edits horizontal/vertical constraint graphs until the
//! packed layout fits the outline.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cg;
pub mod driver;
pub mod error;
pub mod global;
pub mod legalize;
pub mod model;
pub mod objective;
pub mod optim;
pub mod preset;
pub mod report;
pub mod stats;

pub use error::{Error, Result};

use rand::SeedableRng;

/// Random generator used throughout; reproducible across platforms.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
