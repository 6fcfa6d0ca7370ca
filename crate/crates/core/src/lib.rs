//! Maturation of textile-reinforced tissue-engineered constructs.
//!
//! Collagen density evolves at every material point under a biological
//! (Weibull) source and a mechanical source driven by fiber strain energy.
//! The density feeds back into an anisotropic hyperelastic response made of a
//! Neo-Hookean matrix, dispersed collagen fibers and an orthotropic textile
//! scaffold. On top of the constitutive kernel the crate offers a homogeneous
//! material-point driver, a hexahedral finite-element solver with follower
//! pressure, derivative-free calibration, and file I/O.

pub mod calibration;
pub mod constitutive;
pub mod error;
pub mod fem;
pub mod growth;
pub mod io;
pub mod matpoint;
pub mod tensor;
pub mod units;

pub use error::{Error, Result};
