//! Ridge estimation of large precision matrices.
//!
//! The crate covers the four ridge precision estimators ([`estimators`]),
//! cross-validated penalty selection ([`cv`]), moment approximations
//! ([`moments`]), graphical-model edge selection by local false discovery
//! rates ([`ggm`]) and a risk simulation harness ([`simulation`]).
//!
//! ```
//! use ridgeprec::estimators::{alt_ridge_i, Target};
//! use ridgeprec::matrix::SymMatrix;
//!
//! let s = SymMatrix::from_diagonal(&[2.0, 0.5]);
//! let fit = alt_ridge_i(&s, &Target::identity(), 1.0).unwrap();
//! assert!(fit.omega.get(0, 0) < 1.0);
//! ```

pub mod cli;
pub mod cv;
pub mod error;
pub mod estimators;
pub mod ggm;
pub mod io;
pub mod matrix;
pub mod moments;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
