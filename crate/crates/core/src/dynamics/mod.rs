//! Time integration of the Galerkin system with an embedded Runge–Kutta
//! pair, energy bookkeeping at record times and blow-up detection.
//!
//! The two time integrals of the energy identity (damping work and the
//! work of the decaying coefficient `μ`) are carried as extra components of
//! the ODE state, so they are integrated to the same order as the solution.

mod dopri;
mod initial;
mod integrate;
mod rhs;

pub use initial::{initial_state, InitialShape};
pub use integrate::{
    integrate, integrate_with, stability_cap, BlowupReport, BlowupTrigger, IntegratorConfig, Outcome,
    RecordOptions, StepStats, Trajectory, DEFAULT_STABILITY_FACTOR,
};
pub use rhs::galerkin_rhs;
