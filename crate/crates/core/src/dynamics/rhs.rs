use crate::error::{Error, Result};
use crate::field::ModalState;
use crate::model::WaveModel;
use crate::num::{dot, Real};

/// Right-hand side of the first-order Galerkin system, augmented with the
/// two running integrals of the energy identity.
///
/// State layout: `[u (k), v (k), ∫∫ g(v) v, ½ ∫ μ' a(u,u)]`.
pub(crate) struct GalerkinSystem<'a, T> {
    model: &'a WaveModel<T>,
    su: Vec<T>,
    nodal: Vec<T>,
}

impl<'a, T: Real> GalerkinSystem<'a, T> {
    pub fn new(model: &'a WaveModel<T>) -> Self {
        Self {
            model,
            su: vec![T::zero(); model.n_modes()],
            nodal: vec![T::zero(); model.grid().n_nodes()],
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.model.n_modes() + 2
    }

    pub fn eval(&mut self, t: T, y: &[T], dy: &mut [T]) -> Result<()> {
        let model = self.model;
        let grid = model.grid();
        let k = model.n_modes();
        let (u, rest) = y.split_at(k);
        let v = &rest[..k];
        let mut damping_power = T::zero();
        for n in 0..grid.n_nodes() {
            let row = grid.basis_row(n);
            let w = grid.weights()[n];
            let (mut un, mut vn) = (T::zero(), T::zero());
            for ((&b, &uj), &vj) in row.iter().zip(u).zip(v) {
                un += b * uj;
                vn += b * vj;
            }
            let g = model.damping_at(vn);
            damping_power += w * g * vn;
            self.nodal[n] = w * (model.source_at(un) - g);
        }
        model.stiffness().mul_vec_into(u, &mut self.su);
        let mu = model.coeff().mu(t);
        let (du, rest) = dy.split_at_mut(k);
        let (dv, tail) = rest.split_at_mut(k);
        du.copy_from_slice(v);
        for (dvj, &suj) in dv.iter_mut().zip(&self.su) {
            *dvj = -mu * suj;
        }
        for (n, &h) in self.nodal.iter().enumerate() {
            if h != T::zero() {
                for (dvj, &b) in dv.iter_mut().zip(grid.basis_row(n)) {
                    *dvj += h * b;
                }
            }
        }
        tail[0] = damping_power;
        tail[1] = T::half() * model.coeff().mu_prime(t) * dot(u, &self.su);
        if dy.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite {
                what: "Galerkin right-hand side",
            })
        }
    }
}

/// `(du/dt, dv/dt)` with `du/dt = v` and
/// `dv/dt = -μ(t) S u - P g(v(x)) + P f(u(x))`, where `P` is the quadrature
/// projection onto the basis.
pub fn galerkin_rhs<T: Real>(model: &WaveModel<T>, state: &ModalState<T>) -> Result<(Vec<T>, Vec<T>)> {
    let k = model.n_modes();
    if state.u.len() != k || state.v.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: state.u.len(),
        });
    }
    let mut sys = GalerkinSystem::new(model);
    let mut y = Vec::with_capacity(sys.dim());
    y.extend_from_slice(&state.u);
    y.extend_from_slice(&state.v);
    y.extend([T::zero(), T::zero()]);
    let mut dy = vec![T::zero(); sys.dim()];
    sys.eval(state.t, &y, &mut dy)?;
    Ok((dy[..k].to_vec(), dy[k..2 * k].to_vec()))
}
