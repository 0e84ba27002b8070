//! Evolutionary search for the hyperparameters of the distribution that
//! initializes a parameterized quantum circuit, together with the
//! simulation, differentiation and task code needed to score and validate
//! those hyperparameters.

pub mod data;
pub mod differentiation;
pub mod distributions;
pub mod error;
pub mod es;
pub mod linalg;
pub mod scoring;
pub mod simulator;
pub mod tasks;

pub use error::{Error, Result};
