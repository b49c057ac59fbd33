//! Variational constants of the potential-well argument on the Galerkin
//! space: the Poincaré constant `B₇`, embedding constants `K₁ = K(q)` and
//! `K₀(γ) = K(q+γ)`, the radii `r(γ)`, `ρ(γ)` and their suprema, the depth
//! bound `M`, mountain-pass scalings, the sampled depth `d`, and the
//! scalar constants of the blow-up arguments.
//!
//! All best constants are suprema over the discrete space, with integrals
//! taken by the grid quadrature, so every inequality between them holds
//! exactly on that space.

mod blowup;
mod embedding;
mod well;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::WaveModel;
use crate::num::{logspace, Real};

pub use blowup::{
    blowup_time_bound, epsilon_prime, xi1_estimate, xi1_value, xi3, xi_conditions, BlowupScalars,
    EpsilonPrime, XiChoice, XiGrid, EPS_BRACKET_MARGIN,
};
pub use embedding::{embedding_k, lebesgue_ratio_b6, poincare_b7, AscentOptions, EmbeddingSolver, Extremal};
pub use well::{
    d_estimate, mountain_pass_lambda, mountain_pass_on_ray, radius_r, radius_rho, rho_slope_surrogate,
    sample_directions, theta_bound, well_depth_m, DepthEstimate, RayProfile, PURE_MODE_DIRECTIONS,
};

/// Bracketing bisection for a sign change of `f` on `[lo, hi]`.
pub(crate) fn bisect<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, iters: usize, what: &'static str) -> Result<T> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !(fa * fb < T::zero()) {
        return Err(Error::NoSignChange {
            what,
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: fa.as_f64(),
            f_hi: fb.as_f64(),
        });
    }
    let neg_left = fa < T::zero();
    for _ in 0..iters {
        let m = T::half() * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm < T::zero()) == neg_left {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(T::half() * (a + b))
}

/// Log-spaced `γ` grid with right-edge doubling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaGrid {
    pub n_points: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// How often `γ_max` may double while the supremum sits at the right
    /// edge.
    pub max_doublings: u32,
}

impl Default for GammaGrid {
    fn default() -> Self {
        Self {
            n_points: 64,
            gamma_min: 1e-3,
            gamma_max: 50.0,
            max_doublings: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryOptions {
    pub gamma: GammaGrid,
    pub ascent: AscentOptions,
    /// Directions sampled by the depth estimate.
    pub d_samples: usize,
}

impl Default for GeometryOptions {
    fn default() -> Self {
        Self {
            gamma: GammaGrid::default(),
            ascent: AscentOptions::default(),
            d_samples: 64,
        }
    }
}

/// Well geometry of a model on its Galerkin space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellGeometry<T> {
    pub q: T,
    pub mu0: T,
    pub a0: T,
    /// `|Ω|`.
    pub domain_measure: T,
    pub b7: T,
    pub k1: T,
    pub gamma_grid: Vec<T>,
    /// `K₀(γ)` on `gamma_grid`.
    pub k0_samples: Vec<T>,
    pub r_star: T,
    pub gamma_r_star: T,
    pub rho_star: T,
    pub gamma_rho_star: T,
    pub m: T,
    pub d_estimate: T,
    /// Sign changes of the `ρ` slope surrogate along the grid.
    pub surrogate_sign_changes: usize,
    /// The supremum of `r(γ)` stayed on the right grid edge after all
    /// doublings.
    pub sup_at_boundary: bool,
    /// Some embedding ascent stopped at its iteration limit.
    pub approximate: bool,
}

impl<T: Real> WellGeometry<T> {
    /// `r(γ)` on the grid.
    pub fn r_samples(&self) -> Vec<T> {
        self.gamma_grid
            .iter()
            .zip(&self.k0_samples)
            .map(|(&g, &k0)| radius_r(g, k0, self.mu0, self.q))
            .collect()
    }

    /// `ρ(γ)` on the grid.
    pub fn rho_samples(&self) -> Vec<T> {
        self.gamma_grid
            .iter()
            .map(|&g| radius_rho(g, self.k1, self.mu0, self.q, self.domain_measure))
            .collect()
    }

    /// Stable-set test on `(a(u₀,u₀), E(0))`.
    pub fn in_stable_set(&self, a_uu: T, e0: T) -> bool {
        a_uu < self.r_star * self.r_star && e0 < self.m
    }

    /// Key/value listing in a fixed order.
    pub fn key_values(&self) -> Vec<(&'static str, T)> {
        vec![
            ("q", self.q),
            ("mu0", self.mu0),
            ("a0", self.a0),
            ("domain_measure", self.domain_measure),
            ("B7", self.b7),
            ("K1", self.k1),
            ("r_star", self.r_star),
            ("gamma_r_star", self.gamma_r_star),
            ("rho_star", self.rho_star),
            ("gamma_rho_star", self.gamma_rho_star),
            ("M", self.m),
            ("d_estimate", self.d_estimate),
        ]
    }
}

/// Computes `K₀` on `gammas` with warm starts from `K₁`'s maximizer and the
/// previous grid point. Starting from `K₁`'s maximizer guarantees
/// `K₀(γ) ≥ |Ω|^{-γ/(q(q+γ))} K₁`, hence `r(γ) ≤ ρ(γ)`, even when the
/// ascent stops early.
fn k0_on_grid<T: Real>(
    solver: &EmbeddingSolver<'_, T>,
    q: T,
    gammas: &[T],
    k1_max: &[T],
) -> Result<(Vec<T>, bool)> {
    let mut out = Vec::with_capacity(gammas.len());
    let mut approx = false;
    let mut prev: Option<Vec<T>> = None;
    for &g in gammas {
        let mut warm = vec![k1_max.to_vec()];
        if let Some(p) = prev.take() {
            warm.push(p);
        }
        let ext = solver.solve(q + g, &warm)?;
        approx |= !ext.converged;
        out.push(ext.value);
        prev = Some(ext.maximizer);
    }
    Ok((out, approx))
}

fn argmax<T: Real>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Full well geometry of `model`.
pub fn well_geometry<T: Real>(model: &WaveModel<T>, opts: &GeometryOptions) -> Result<WellGeometry<T>> {
    let g = &opts.gamma;
    if g.n_points == 0 || !(g.gamma_min > 0.0) || !(g.gamma_max > g.gamma_min) {
        return Err(Error::config(
            "constants.gamma",
            "need n_points >= 1 and 0 < gamma_min < gamma_max",
        ));
    }
    let grid = model.grid();
    let q = model.exponents().q;
    let mu0 = model.coeff().mu0();
    let omega = grid.length();
    let b7 = poincare_b7(model.laplace())?;
    let solver = EmbeddingSolver::new(grid, model.stiffness(), opts.ascent)?;
    let k1_ext = solver.solve(q, &[])?;
    let k1 = k1_ext.value;
    let mut approximate = !k1_ext.converged;

    let mut gamma_max = g.gamma_max;
    let mut doublings = 0;
    let (gammas, k0s, r_idx) = loop {
        let gammas: Vec<T> = logspace(T::lit(g.gamma_min), T::lit(gamma_max), g.n_points);
        let (k0s, approx) = k0_on_grid(&solver, q, &gammas, &k1_ext.maximizer)?;
        approximate |= approx;
        let r: Vec<T> = gammas
            .iter()
            .zip(&k0s)
            .map(|(&gm, &k0)| radius_r(gm, k0, mu0, q))
            .collect();
        let idx = argmax(&r);
        if idx + 1 < gammas.len() || doublings >= g.max_doublings || gammas.len() == 1 {
            break (gammas, k0s, idx);
        }
        doublings += 1;
        gamma_max *= 2.0;
    };
    let r: Vec<T> = gammas
        .iter()
        .zip(&k0s)
        .map(|(&gm, &k0)| radius_r(gm, k0, mu0, q))
        .collect();
    let sup_at_boundary = gammas.len() > 1 && r_idx + 1 == gammas.len();
    if sup_at_boundary {
        warn!("sup of r(gamma) remains at gamma_max = {gamma_max} after {doublings} doublings");
    }
    let rho: Vec<T> = gammas
        .iter()
        .map(|&gm| radius_rho(gm, k1, mu0, q, omega))
        .collect();
    let rho_idx = argmax(&rho);
    let surrogate: Vec<T> = gammas
        .iter()
        .map(|&gm| rho_slope_surrogate(gm, k1, mu0, q, omega))
        .collect();
    let surrogate_sign_changes = surrogate
        .windows(2)
        .filter(|w| (w[0] > T::zero()) != (w[1] > T::zero()))
        .count();

    let r_star = r[r_idx];
    let m = well_depth_m(r_star, mu0, q);
    let d = d_estimate(model, opts.d_samples, opts.ascent.seed)?;
    Ok(WellGeometry {
        q,
        mu0,
        a0: model.coeff().a0(),
        domain_measure: omega,
        b7,
        k1,
        gamma_grid: gammas.clone(),
        k0_samples: k0s,
        r_star,
        gamma_r_star: gammas[r_idx],
        rho_star: rho[rho_idx],
        gamma_rho_star: gammas[rho_idx],
        m,
        d_estimate: d.value,
        surrogate_sign_changes,
        sup_at_boundary,
        approximate,
    })
}
