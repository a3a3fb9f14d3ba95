//! Numerical laboratory for the heavy-tailed spherical Sherrington–Kirkpatrick model.
//!
//! The crate is organised bottom-up:
//!
//! * [`heavy_tail`]: the entry law, its tail and quantile functions, normalizers.
//! * [`ensemble`]: heavy-tailed Wigner matrices and with-high-probability checks.
//! * [`spectra`]: dense symmetric eigenvalues and the spectral statistics built on them.
//! * [`free_energy`]: saddle point of the contour exponent and four log-partition evaluators.
//! * [`experiments`]: seeded Monte Carlo drivers, KS distances and moment/series evaluators.
//! * [`cli`]: the `levy-ssk` command-line front end.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod free_energy;
pub mod heavy_tail;
pub mod quadrature;
pub mod seed;
pub mod spectra;
pub mod stats;

pub use error::{Error, Result};
