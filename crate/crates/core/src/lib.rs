pub mod error;
pub mod experiment;
pub mod group;
pub mod lattice;
pub mod peps;
pub mod rng;
pub mod spin;
pub mod stats;
pub mod tensor;

pub use error::{Error, Result};
