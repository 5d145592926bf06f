//! Kaplan-Meier curves, the penalized Cox model, Breslow baseline, survival
//! prediction and Wald significance.

mod cox;
mod km;
mod model;

pub use cox::{breslow, cox_fit, cox_loss, cox_loss_derivatives, FitOptions, LossDerivatives};
pub use km::{km_by_group, km_fit, KaplanMeierCurve};
pub use model::{
    integrate_step, normal_sf, significant_coefficients, wald_p_value, Coefficient, CoxModel, RemainingLifetime,
    SurvivalPrediction,
};

/// Ridge penalty used when none is given.
pub const DEFAULT_PENALIZER: f64 = 5.0;
