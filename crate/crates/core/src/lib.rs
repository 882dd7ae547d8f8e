pub mod concentration;
pub mod error;
pub mod fluctuation;
pub mod harness;
pub mod interp;
pub mod laplace;
pub mod model;
pub mod montecarlo;
pub mod parallel;
pub mod quad;
pub mod report;
pub mod special;
pub mod spectral;

pub use error::{LevyError, Result};
