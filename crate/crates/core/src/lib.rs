//! Simulation and empirical verification of Chung-type liminf laws for
//! Markov jump processes.
//!
//! Deterministic numerics (quadrature, tabulated scales, symbols) are generic
//! over [`num::Real`]; the Monte Carlo layers work in `f64`.

// `!(x > 0.0)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exitlab;
pub mod io;
pub mod lattice;
pub mod lil;
pub mod num;
pub mod parallel;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod scale;
pub mod special;
pub mod stats;
pub mod symbols;

pub use error::{Error, Result};

/// Double-precision tabulated scale.
pub type Scale = scale::TabulatedScale<f64>;
/// Single-precision tabulated scale.
pub type Scale32 = scale::TabulatedScale<f32>;
