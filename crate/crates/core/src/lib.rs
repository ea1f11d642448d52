//! Zeros of the derivative of characteristic polynomials of random unitary
//! matrices, their close-pair expansions, conditioned ensembles, and the
//! analogous horizontal distribution of zeros of ζ′.

pub mod bessel;
pub mod conditioned;
pub mod contour;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod expansions;
pub mod io;
pub mod poly;
pub mod polyderiv;
pub mod quad;
pub mod rng;
pub mod stats;
pub mod zeta;
pub mod zeta_scan;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
