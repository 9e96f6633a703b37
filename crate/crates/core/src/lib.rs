//! Stochastic dynamical vertex models: weight families, identity checks and samplers.
//!
//! The numerical kernel lives in [`special_fn`]. Each weight family has its own
//! module, [`verify`] evaluates both sides of the identities they satisfy, and
//! [`sampler`] grows random path ensembles from the stochastic weights.

pub mod elliptic;
pub mod error;
pub mod higher_rank;
pub mod sampler;
pub mod sixvertex;
pub mod special_fn;
pub mod tetrahedron;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
