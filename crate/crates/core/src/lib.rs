//! Time-to-event modelling of transitions between discussion forums.
//!
//! The pipeline turns per-user event logs into right-censored survival
//! datasets ([`ingest`]), builds covariates from forum, keyword, topic and
//! risk-score signals ([`features`]), fits a ridge-penalized Cox
//! proportional-hazards model with a Breslow baseline ([`survival`]) and
//! scores it with concordance and interval AUC ([`metrics`]). [`synth`]
//! generates data with known ground truth and [`cli`] wires everything into
//! the `survtrans` binary.

pub mod cli;
pub mod error;
pub mod features;
pub mod ingest;
pub mod metrics;
pub mod output;
pub mod survival;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{EventKind, EventRecord, SurvivalDataset, SurvivalRow, UserTrajectory};
pub use survival::{CoxModel, FitOptions, KaplanMeierCurve, SurvivalPrediction};

/// Seconds in one day; durations are reported in real-valued days.
pub const SECONDS_PER_DAY: f64 = 86_400.0;
