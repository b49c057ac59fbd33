//! Experiment layer: classification of initial data against the potential
//! well, decay-rate fits, and audits of finished trajectories.

mod audit;
mod classify;
mod fit;

pub use audit::{
    audit, observed, prediction_matches, superlinear_growth, AuditCheck, AuditReport, Observed, BALANCE_CONSTANT,
    GROWTH_WINDOW, MONOTONE_SLACK, THETA_SLACK,
};
pub use classify::{classify, membership, verify_pairing_condition, Classification, PairingCheck, Prediction, SetMembership};
pub use fit::{fit_decay, linear_fit, DecayFit, DecayModel, DecayReport, DEFAULT_WINDOW_FRACTION};
