//! Stochastic Galerkin solver for one-dimensional kinetic chemotaxis with a
//! random tumbling sensitivity, its Keller-Segel limit, and a collocation oracle.

pub mod chaos;
pub mod chemo;
pub mod collocation;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod imex;
pub mod initial;
pub mod kernels;
pub mod limit;
pub mod linalg;
pub mod output;
pub mod sim;

pub use error::{Error, Result};
