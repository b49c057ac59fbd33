//! Spectral-Galerkin simulation and potential-well analysis for the damped
//! variable-coefficient wave equation
//!
//! ```text
//! u_tt - μ(t) (A(x) u_x)_x + g(u_t) = |u|^{q-2} u log|u|   on (0, L),
//! u = 0 on the boundary,
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`field`]: sine eigenbasis, composite Gauss–Legendre quadrature, the
//!   variable-coefficient stiffness and the form `a(u, u)`;
//! * [`functionals`]: `I`, `J`, `E`, the dissipation rate, `F`, `Y`;
//! * [`varconst`]: discrete embedding constants, the well radius `r_*`,
//!   the depth bound `M`, mountain-pass scalings and the blow-up constants;
//! * [`dynamics`]: adaptive Dormand–Prince integration of the Galerkin
//!   system with blow-up detection;
//! * [`lab`]: classification of initial data, decay fits and trajectory
//!   audits.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod field;
pub mod functionals;
pub mod lab;
pub mod linalg;
pub mod model;
pub mod num;
pub mod quadrature;
pub mod varconst;

pub use error::{Error, Result};
pub use num::Real;

pub type Grid = field::DomainGrid<f64>;
pub type Coefficients = field::CoefficientField<f64>;
pub type State = field::ModalState<f64>;
pub type Model = model::WaveModel<f64>;
pub type Record = functionals::EnergyRecord<f64>;
pub type Geometry = varconst::WellGeometry<f64>;
pub type Run = dynamics::Trajectory<f64>;
pub type Settings = dynamics::IntegratorConfig<f64>;

pub type ModelF32 = model::WaveModel<f32>;
pub type StateF32 = field::ModalState<f32>;
