//! Fourier coefficients of the capped observable and the model sums built
//! from them.

pub mod coeffs;
pub mod models;
pub mod reconstruction;

pub use coeffs::{
    envelope_ratios, limit_coeffs, limit_coeffs_closed_form, osc_coeffs, CoeffRule, LimitCoeffs, OscCoeffs, OscTable,
    UpperTable,
};
pub use models::{model_sum, term_g, Model, ModelContext, Variant};
pub use reconstruction::{choose_cutoff, reconstruct, remainder_bound, Reconstruction};
