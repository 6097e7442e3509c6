//! Model-zoo training, 3PL item response calibration and ability-matched
//! routing of test instances for spectral classification.

pub mod data;
pub mod error;
pub mod irt;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod zoo;

pub use error::{Error, Result};
