//! Nabla Caputo discrete fractional calculus on integer-offset grids.

pub mod bvp;
pub mod calculus;
pub mod error;
pub mod exact;
pub mod export;
pub mod greens;
pub mod grid;
pub mod linalg;
pub mod lyapunov;
pub mod parallel;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use special::{rising, taylor_monomial, Order};
