//! Ladder exponents, renewal functions and the renewal-side inequalities.

mod conditions;
mod ladder;
mod renewal;
mod reports;

pub use crate::report::{Band, BoundReport, BoundRow, Verdict};
pub use conditions::{
    creeping_condition, linearity_large_condition, tail_domination, ConditionReport, ConditionVerdict,
};
pub use ladder::LadderExponent;
pub use renewal::{
    renewal_v, renewal_v_hat, renewal_v_on, stable_renewal, symmetric_sqrt_h, RenewalFunction, RenewalMethod,
    DEFAULT_HALF_OCTAVES,
};
pub use reports::{FluctuationModel, DEFAULT_SPREAD};

pub(crate) use renewal::least_squares_slope;
