//! Exact template calculus for successive-minima functions and the lattice
//! side of the Dani correspondence.
//!
//! * [`pwl`]: continuous piecewise-linear paths over exact rationals.
//! * [`template`]: template axioms, intervals of equality and contraction rates.
//! * [`builders`]: zero, quadrilateral and pulse-train templates.
//! * [`lattice`]: LLL, successive minima, dual lattices, Minkowski checks.
//! * [`flow`]: the diagonal flow `g_t u_A ℤ^d` and order-`r` classification.
//! * [`acceptance`]: the embedded acceptance suite used by `selftest`.

#![allow(clippy::needless_range_loop)]

pub mod acceptance;
pub mod builders;
pub mod flow;
pub mod lattice;
pub mod matrix;
pub mod pwl;
pub mod rational;
pub mod sample;
pub mod template;

pub use rational::Rational;
