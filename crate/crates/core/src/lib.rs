pub mod coherent;
pub mod error;
pub mod fock;
pub mod measure;
pub mod model;
pub mod quad;
pub mod specfun;

pub use error::{CesError, Result};
