//! Multiplicative convolution semigroups generated by Bernstein-gamma functions.
//!
//! A Bernstein function φ determines W_φ with W_φ(z+1) = φ(z)W_φ(z), W_φ(1) = 1.
//! For every t > 0, W_φ^t is the Mellin transform of a probability measure on
//! (0, ∞) and these measures form a semigroup under multiplicative convolution.

// Negated comparisons are used on purpose: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bernstein;
pub mod bgamma;
pub mod checks;
pub mod density;
pub mod determinacy;
pub mod error;
pub mod oracle;
pub mod quad;
pub mod special;

pub use bernstein::BernsteinFunction;
pub use error::{Error, Result};
