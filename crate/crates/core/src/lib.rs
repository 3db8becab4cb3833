//! Vector-valued Besov norms, operator-valued Fourier multipliers and
//! spectral solvers for differential and convolution operator equations on
//! truncated periodic grids.

pub mod error;
pub mod expr;
pub mod besov;
pub mod cli;
pub mod config;
pub mod dyadic;
pub mod grid;
pub mod jet;
pub mod lab;
pub mod multiplier;
pub mod probes;
pub mod report;
pub mod solvers;
pub mod space;
pub mod symbols;

pub use error::{Error, Result};
