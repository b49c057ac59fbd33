use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DomainGrid, ModalState};
use crate::num::Real;

/// Named initial profile, projected onto the Galerkin basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialShape<T> {
    Zero,
    /// `amplitude · w_index` with 1-based `index`.
    Mode { index: usize, amplitude: T },
    /// `amplitude · exp(-(x - center)² / (2 width²))`.
    Gaussian { amplitude: T, center: T, width: T },
    /// Explicit coefficients; missing trailing modes are zero.
    Modal { coeffs: Vec<T> },
    /// `factor · u₀`; only meaningful for the initial velocity.
    ScaledDisplacement { factor: T },
}

impl<T: Real> InitialShape<T> {
    /// Coefficients of the profile; `displacement` is needed only by
    /// [`InitialShape::ScaledDisplacement`].
    pub fn coefficients(&self, grid: &DomainGrid<T>, displacement: Option<&[T]>) -> Result<Vec<T>> {
        let k = grid.n_modes();
        let coeffs = match self {
            InitialShape::Zero => vec![T::zero(); k],
            InitialShape::Mode { index, amplitude } => {
                if *index == 0 || *index > k {
                    return Err(Error::config(
                        "initial.index",
                        format!("mode index must lie in 1..={k}, got {index}"),
                    ));
                }
                let mut c = vec![T::zero(); k];
                c[index - 1] = *amplitude;
                c
            }
            InitialShape::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !(*width > T::zero()) {
                    return Err(Error::config("initial.width", "must be positive"));
                }
                let (a, c, w) = (*amplitude, *center, *width);
                grid.project_fn(|x| {
                    let z = (x - c) / w;
                    a * (-T::half() * z * z).exp()
                })
            }
            InitialShape::Modal { coeffs } => {
                if coeffs.len() > k {
                    return Err(Error::config(
                        "initial.coeffs",
                        format!("{} coefficients given for {k} modes", coeffs.len()),
                    ));
                }
                let mut c = coeffs.clone();
                c.resize(k, T::zero());
                c
            }
            InitialShape::ScaledDisplacement { factor } => {
                let u0 = displacement.ok_or_else(|| {
                    Error::config("initial.u1", "scaled_displacement is only valid for the velocity")
                })?;
                u0.iter().map(|&x| *factor * x).collect()
            }
        };
        if coeffs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "initial coefficients",
            });
        }
        Ok(coeffs)
    }

    /// The same profile with every amplitude multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        match self {
            InitialShape::Zero => InitialShape::Zero,
            InitialShape::Mode { index, amplitude } => InitialShape::Mode {
                index: *index,
                amplitude: *amplitude * s,
            },
            InitialShape::Gaussian {
                amplitude,
                center,
                width,
            } => InitialShape::Gaussian {
                amplitude: *amplitude * s,
                center: *center,
                width: *width,
            },
            InitialShape::Modal { coeffs } => InitialShape::Modal {
                coeffs: coeffs.iter().map(|&c| c * s).collect(),
            },
            InitialShape::ScaledDisplacement { factor } => {
                InitialShape::ScaledDisplacement { factor: *factor }
            }
        }
    }
}

/// Initial state at `t = 0` from displacement and velocity profiles.
pub fn initial_state<T: Real>(
    grid: &DomainGrid<T>,
    u0: &InitialShape<T>,
    u1: &InitialShape<T>,
) -> Result<ModalState<T>> {
    if matches!(u0, InitialShape::ScaledDisplacement { .. }) {
        return Err(Error::config(
            "initial.u0",
            "scaled_displacement is only valid for the velocity",
        ));
    }
    let u = u0.coefficients(grid, None)?;
    let v = u1.coefficients(grid, Some(&u))?;
    ModalState::new(T::zero(), u, v)
}
