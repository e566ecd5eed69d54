//! Functional graphs of `f(X) = c(X^(q+1) + aX^2)` over F_{q^2}.
//!
//! The crate builds the exact graph by brute force, predicts its shape from
//! closed-form decompositions (a = ±1) or partial structure facts (other a),
//! and reconciles the two.

pub mod dynamics;
pub mod error;
pub mod ffield;
pub mod graph;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
