use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::DomainGrid;
use crate::linalg::SymMatrix;
use crate::num::{dot, norm_sq, Real};

/// Multi-start ascent settings shared by the embedding-constant solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscentOptions {
    /// Random restarts in addition to any warm starts.
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the relative objective gain of an accepted step drops
    /// below this.
    pub rel_change: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 5000,
            rel_change: 1e-10,
            seed: 0,
        }
    }
}

/// Best value found by a multi-start ascent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremal<T> {
    pub value: T,
    /// Modal coefficients of the maximizer, normalized by the constraint.
    pub maximizer: Vec<T>,
    /// `false` when the winning start hit the iteration limit; the value
    /// is then a lower bound of the supremum.
    pub converged: bool,
    pub start: usize,
}

/// `ln ‖u‖_r` over the quadrature nodes and its gradient in the modal
/// coefficients. Values are rescaled by `max |u|` so large exponents do
/// not overflow. Returns `None` for `u ≡ 0`.
pub(crate) fn ln_norm_with_grad<T: Real>(grid: &DomainGrid<T>, u: &[T], r: T) -> Option<(T, Vec<T>)> {
    let k = grid.n_modes();
    let vals = grid.evaluate_at_nodes(u).ok()?;
    let m = vals.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if !(m > T::zero()) || !m.is_finite() {
        return None;
    }
    let mut s = T::zero();
    let mut grad = vec![T::zero(); k];
    for (n, &x) in vals.iter().enumerate() {
        let xh = x / m;
        let a = xh.abs();
        if a == T::zero() {
            continue;
        }
        let w = grid.weights()[n];
        let pw = (r * a.ln()).exp();
        s += w * pw;
        let c = w * pw / xh;
        for (g, &b) in grad.iter_mut().zip(grid.basis_row(n)) {
            *g += c * b;
        }
    }
    if !(s > T::zero()) {
        return None;
    }
    let scale = T::one() / (m * s);
    grad.iter_mut().for_each(|g| *g *= scale);
    Some((m.ln() + s.ln() / r, grad))
}

fn normalize<T: Real>(z: &mut [T]) -> bool {
    let n = norm_sq(z).sqrt();
    if !(n > T::zero()) || !n.is_finite() {
        return false;
    }
    z.iter_mut().for_each(|x| *x /= n);
    true
}

/// Projected gradient ascent of a log-objective on the unit sphere.
///
/// `eta_cap` bounds the trial step; for objectives that are homogeneous of
/// degree one in log form a trial step of 1 is the normalized-gradient
/// (power) step.
fn sphere_ascent<T: Real>(
    mut z: Vec<T>,
    f: &(impl Fn(&[T]) -> Option<(T, Vec<T>)> + Sync),
    eta_cap: T,
    opts: &AscentOptions,
) -> Option<(T, Vec<T>, bool)> {
    if !normalize(&mut z) {
        return None;
    }
    let (mut phi, mut g) = f(&z)?;
    let rel = T::lit(opts.rel_change);
    let mut eta = eta_cap;
    let mut trial = vec![T::zero(); z.len()];
    for _ in 0..opts.max_iter {
        let gz = dot(&g, &z);
        let tangent: Vec<T> = g.iter().zip(&z).map(|(&gi, &zi)| gi - gz * zi).collect();
        let tn = norm_sq(&tangent).sqrt();
        if tn <= T::lit(1e-14) * (T::one() + norm_sq(&g).sqrt()) {
            return Some((phi, z, true));
        }
        let mut step = eta;
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..z.len() {
                trial[i] = z[i] + step * tangent[i];
            }
            if normalize(&mut trial) {
                if let Some((p, gn)) = f(&trial) {
                    if p > phi {
                        accepted = Some((p, gn));
                        break;
                    }
                }
            }
            step *= T::half();
        }
        let Some((p, gn)) = accepted else {
            return Some((phi, z, true));
        };
        let gain = p - phi;
        z.copy_from_slice(&trial);
        phi = p;
        g = gn;
        eta = (step * T::two()).min(eta_cap);
        if gain < rel {
            return Some((phi, z, true));
        }
    }
    Some((phi, z, false))
}

fn random_start<T: Real>(k: usize, seed: u64, index: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64 + 1)));
    (0..k)
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            T::lit(x)
        })
        .collect()
}

/// Runs warm starts followed by seeded random restarts in parallel and
/// keeps the best (ties go to the lowest start index).
fn multi_start<T: Real>(
    k: usize,
    warm: &[Vec<T>],
    f: &(impl Fn(&[T]) -> Option<(T, Vec<T>)> + Sync),
    eta_cap: T,
    opts: &AscentOptions,
) -> Option<(T, Vec<T>, bool, usize)> {
    let n_starts = warm.len() + opts.restarts;
    let results: Vec<Option<(T, Vec<T>, bool)>> = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let z0 = if i < warm.len() {
                warm[i].clone()
            } else {
                random_start(k, opts.seed, i - warm.len())
            };
            sphere_ascent(z0, f, eta_cap, opts)
        })
        .collect();
    let mut best: Option<(T, Vec<T>, bool, usize)> = None;
    for (i, r) in results.into_iter().enumerate() {
        if let Some((v, z, c)) = r {
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, z, c, i));
            }
        }
    }
    best
}

/// Smallest `B` with `‖u‖₂² ≤ B ‖∇u‖₂²` on the Galerkin space: the inverse
/// of the smallest eigenvalue of the `A ≡ 1` stiffness.
pub fn poincare_b7<T: Real>(laplace: &SymMatrix<T>) -> Result<T> {
    let lam = laplace
        .eigenvalues()
        .first()
        .copied()
        .ok_or_else(|| Error::Degenerate("empty stiffness matrix".into()))?;
    if !(lam > T::zero()) {
        return Err(Error::LinearAlgebra(format!(
            "stiffness is not positive definite (smallest eigenvalue {lam})"
        )));
    }
    Ok(T::one() / lam)
}

/// Solver for `K(r) = sup ‖u‖_r / √a(u,u)` over the Galerkin space.
///
/// Works in coordinates `z = Lᵀu` where `S = L Lᵀ`, so the constraint
/// `a(u,u) = 1` becomes the unit sphere.
pub struct EmbeddingSolver<'a, T> {
    grid: &'a DomainGrid<T>,
    chol: crate::linalg::Cholesky<T>,
    opts: AscentOptions,
}

impl<'a, T: Real> EmbeddingSolver<'a, T> {
    pub fn new(grid: &'a DomainGrid<T>, stiffness: &SymMatrix<T>, opts: AscentOptions) -> Result<Self> {
        if stiffness.dim() != grid.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_modes(),
                found: stiffness.dim(),
            });
        }
        Ok(Self {
            grid,
            chol: stiffness.cholesky()?,
            opts,
        })
    }

    /// `K(r)`; `warm` are modal vectors used as extra starting points.
    pub fn solve(&self, r: T, warm: &[Vec<T>]) -> Result<Extremal<T>> {
        if !(r >= T::two()) || !r.is_finite() {
            return Err(Error::config("embedding.exponent", format!("need r >= 2, got {r}")));
        }
        let k = self.grid.n_modes();
        let f = |z: &[T]| {
            let u = self.chol.solve_upper(z);
            let (v, gu) = ln_norm_with_grad(self.grid, &u, r)?;
            Some((v, self.chol.solve_lower(&gu)))
        };
        let mut starts: Vec<Vec<T>> = warm.iter().map(|u| self.chol.mul_upper(u)).collect();
        let mut first = vec![T::zero(); k];
        first[0] = T::one();
        starts.push(self.chol.mul_upper(&first));
        let (ln_k, z, converged, start) = multi_start(k, &starts, &f, T::one(), &self.opts)
            .ok_or_else(|| Error::Degenerate("embedding ascent found no admissible start".into()))?;
        if !converged {
            log::warn!("embedding constant for r = {r} did not converge; value is a lower bound");
        }
        Ok(Extremal {
            value: ln_k.exp(),
            maximizer: self.chol.solve_upper(&z),
            converged,
            start,
        })
    }
}

/// `K(r)` in one call; see [`EmbeddingSolver`].
pub fn embedding_k<T: Real>(
    grid: &DomainGrid<T>,
    stiffness: &SymMatrix<T>,
    r: T,
    opts: &AscentOptions,
) -> Result<Extremal<T>> {
    EmbeddingSolver::new(grid, stiffness, *opts)?.solve(r, &[])
}

/// `B₆ = sup ‖u‖_{p+2}^q / ‖u‖_q^q` over the Galerkin space.
///
/// Bounded above by `|Ω|^{q/(p+2) - 1}` when `p + 2 ≤ q` (Hölder).
pub fn lebesgue_ratio_b6<T: Real>(grid: &DomainGrid<T>, q: T, p: T, opts: &AscentOptions) -> Result<Extremal<T>> {
    let s = p + T::two();
    if !(q > T::two()) || !(p >= T::zero()) {
        return Err(Error::config("problem.q", "B6 needs q > 2 and p >= 0"));
    }
    let k = grid.n_modes();
    let f = |u: &[T]| {
        let (a, ga) = ln_norm_with_grad(grid, u, s)?;
        let (b, gb) = ln_norm_with_grad(grid, u, q)?;
        Some((q * (a - b), ga.iter().zip(&gb).map(|(&x, &y)| q * (x - y)).collect()))
    };
    let flat = grid.project_fn(|_| T::one());
    let (ln_b, z, converged, start) = multi_start(k, &[flat], &f, T::lit(1e3), opts)
        .ok_or_else(|| Error::Degenerate("B6 ascent found no admissible start".into()))?;
    Ok(Extremal {
        value: ln_b.exp(),
        maximizer: z,
        converged,
        start,
    })
}
