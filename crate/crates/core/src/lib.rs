//! Extended-anyon trial states and their mean-field limit.
//!
//! [`twobody`] holds the Jastrow profile, the two-body scattering energy and
//! the coupling functions. [`manybody`] samples the trial state with
//! Metropolis and estimates each piece of the energy. [`meanfield`] is a
//! grid solver for the Chern-Simons-Schroedinger functional.

pub mod error;
pub mod manybody;
pub mod meanfield;
pub mod potential;
pub mod quad;
pub mod stats;
pub mod twobody;

pub use error::{Error, Result};
pub use potential::Potential;
