//! Conjugate subgradient optimization and its Q-learning step-scale controller.

mod csa;
mod csaq;
mod qlearn;

pub use csa::{csa_run, CsaOutcome, CsaState, StepKind};
pub use csaq::{csaq_run, CsaqConfig, CsaqOutcome, StepControl};
pub use qlearn::{reward, QController, QParams};

use crate::SimRng;

/// A possibly nonsmooth function on `R^dim` with a subgradient oracle.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, u: &[f64]) -> f64;

    /// Writes an element of the subdifferential at `u` into `grad` and returns `f(u)`.
    fn subgradient(&self, u: &[f64], rng: &mut SimRng, grad: &mut [f64]) -> f64;
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
