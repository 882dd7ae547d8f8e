//! Lévy processes: measures, triplets, parametric families, the
//! characteristic exponent and scaling certificates.

mod measure;
mod scaling;
mod spec;

pub use measure::{CustomMeasure, LevyMeasure, PowerComponent, Side};
pub use scaling::{check_wlsc, log_grid, lower_scaling_index, ScalingCertificate};
pub use spec::{Family, JumpLaw, LevyTriplet, ProcessSpec};
