//! Exact calculator for Dirac structures on coordinate space ℝⁿ with
//! polynomial coefficients over ℚ or ℚ(i): Courant-algebroid operations,
//! lagrangian-family products, pullback/pushforward reduction, witness and
//! moment-map-style criteria, Magri diamonds, and Dirac–Nijenhuis checks.

pub mod cartan;
pub mod cli;
pub mod doc;
pub mod error;
pub mod lagrangian;
pub mod matrix;
pub mod nijenhuis;
pub mod pointwise;
pub mod poly;
pub mod probe;
pub mod reduction;
pub mod scalar;
pub mod submanifold;

pub use error::{Error, Result};

pub use cli::cli_main;
