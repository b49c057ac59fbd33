//! The semi-discrete problem: grid, coefficients, exponents and the two
//! nonlinear laws, bundled with the assembled stiffness matrices.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{assemble_stiffness, CoefficientField, Diffusivity, DomainGrid};
use crate::linalg::SymMatrix;
use crate::num::Real;

/// Source exponent `q` and damping growth `p` with the growth constants of
/// the damping law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents<T> {
    pub q: T,
    pub p: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> Exponents<T> {
    /// Polynomial damping `|s|^p s`, for which `c1 = c2 = 1`.
    pub fn new(q: T, p: T) -> Result<Self> {
        Self::with_constants(q, p, T::one(), T::one())
    }

    pub fn with_constants(q: T, p: T, c1: T, c2: T) -> Result<Self> {
        if !(q > T::two()) || !q.is_finite() {
            return Err(Error::config("problem.q", format!("must satisfy q > 2, got {q}")));
        }
        if !(p >= T::zero()) || !p.is_finite() {
            return Err(Error::config("problem.p", format!("must satisfy p >= 0, got {p}")));
        }
        if !(c1 > T::one() / (p + T::two())) {
            return Err(Error::config(
                "problem.c1",
                format!("must exceed 1/(p+2) = {}, got {c1}", T::one() / (p + T::two())),
            ));
        }
        if !(c2 >= c1) {
            return Err(Error::config("problem.c2", "must be at least c1"));
        }
        Ok(Self { q, p, c1, c2 })
    }

    /// `α = (q - p - 2)/(q (p + 1))`, defined when `q > p + 2`.
    pub fn alpha(&self) -> Option<T> {
        if self.supercritical() {
            Some((self.q - self.p - T::two()) / (self.q * (self.p + T::one())))
        } else {
            None
        }
    }

    /// Source dominates damping at infinity: `q > p + 2`.
    pub fn supercritical(&self) -> bool {
        self.q > self.p + T::two()
    }

    /// Damping dominates the source: `q < p + 2`.
    pub fn subcritical(&self) -> bool {
        self.q < self.p + T::two()
    }
}

/// The right-hand side source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceLaw {
    /// `|u|^{q-2} u log|u|`.
    #[default]
    Logarithmic,
    Off,
}

/// The damping nonlinearity `g(u_t)`.
#[derive(Clone, Default)]
pub enum DampingLaw<T> {
    /// `|s|^p s` with `p` from [`Exponents`].
    #[default]
    Power,
    Off,
    /// Any odd nondecreasing function, for experiments outside the
    /// polynomial family.
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T> fmt::Debug for DampingLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DampingLaw::Power => f.write_str("Power"),
            DampingLaw::Off => f.write_str("Off"),
            DampingLaw::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Semi-discrete model on a fixed Galerkin space.
#[derive(Debug, Clone)]
pub struct WaveModel<T> {
    grid: DomainGrid<T>,
    coeff: CoefficientField<T>,
    stiffness: SymMatrix<T>,
    laplace: SymMatrix<T>,
    exponents: Exponents<T>,
    source: SourceLaw,
    damping: DampingLaw<T>,
}

impl<T: Real> WaveModel<T> {
    pub fn new(grid: DomainGrid<T>, coeff: CoefficientField<T>, exponents: Exponents<T>) -> Result<Self> {
        let stiffness = assemble_stiffness(&grid, coeff.diffusivity())?;
        let laplace = assemble_stiffness(&grid, &Diffusivity::Constant { value: T::one() })?;
        Ok(Self {
            grid,
            coeff,
            stiffness,
            laplace,
            exponents,
            source: SourceLaw::Logarithmic,
            damping: DampingLaw::Power,
        })
    }

    pub fn with_source(mut self, source: SourceLaw) -> Self {
        self.source = source;
        self
    }

    pub fn with_damping(mut self, damping: DampingLaw<T>) -> Self {
        self.damping = damping;
        self
    }

    pub fn grid(&self) -> &DomainGrid<T> {
        &self.grid
    }
    pub fn coeff(&self) -> &CoefficientField<T> {
        &self.coeff
    }
    /// Variable-coefficient stiffness `∫ A w_i' w_j'`.
    pub fn stiffness(&self) -> &SymMatrix<T> {
        &self.stiffness
    }
    /// Stiffness with `A ≡ 1`; its quadratic form is `‖∇u‖²`.
    pub fn laplace(&self) -> &SymMatrix<T> {
        &self.laplace
    }
    pub fn exponents(&self) -> &Exponents<T> {
        &self.exponents
    }
    pub fn source(&self) -> SourceLaw {
        self.source
    }
    pub fn damping(&self) -> &DampingLaw<T> {
        &self.damping
    }
    pub fn n_modes(&self) -> usize {
        self.grid.n_modes()
    }

    /// Source nonlinearity at a point, zero when the source is off.
    #[inline]
    pub fn source_at(&self, u: T) -> T {
        match self.source {
            SourceLaw::Logarithmic => crate::functionals::log_source(u, self.exponents.q),
            SourceLaw::Off => T::zero(),
        }
    }

    /// Damping nonlinearity at a point.
    #[inline]
    pub fn damping_at(&self, v: T) -> T {
        match &self.damping {
            DampingLaw::Power => crate::functionals::power_damping(v, self.exponents.p),
            DampingLaw::Off => T::zero(),
            DampingLaw::Custom(g) => g(v),
        }
    }
}
