use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::WaveModel;
use crate::num::{abs_pow, Real};

use super::bisect;

/// `r(γ) = (μ₀ e γ / K₀^{q+γ})^{1/(q+γ-2)}`, computed in log form.
pub fn radius_r<T: Real>(gamma: T, k0: T, mu0: T, q: T) -> T {
    let e = q + gamma - T::two();
    (((mu0 * gamma).ln() + T::one() - (q + gamma) * k0.ln()) / e).exp()
}

/// `ρ(γ) = (μ₀ e γ / K₁^{q+γ})^{1/(q+γ-2)} |Ω|^{γ/(q(q+γ-2))}`.
pub fn radius_rho<T: Real>(gamma: T, k1: T, mu0: T, q: T, omega: T) -> T {
    let e = q + gamma - T::two();
    (((mu0 * gamma).ln() + T::one() - (q + gamma) * k1.ln() + gamma / q * omega.ln()) / e).exp()
}

/// `qγ (q+γ-2)² d/dγ ln ρ(γ)`:
/// `q² + qγ - 2q - qγ log(μ₀e) - qγ log γ + 2qγ log K₁ + qγ log|Ω| - 2γ log|Ω|`.
///
/// Concave in `γ`, positive near zero and eventually negative, so `ρ` has a
/// single interior maximum where this vanishes.
pub fn rho_slope_surrogate<T: Real>(gamma: T, k1: T, mu0: T, q: T, omega: T) -> T {
    let lo = omega.ln();
    q * q + q * gamma - T::two() * q - q * gamma * (mu0.ln() + T::one()) - q * gamma * gamma.ln()
        + T::two() * q * gamma * k1.ln()
        + q * gamma * lo
        - T::two() * gamma * lo
}

/// `M = ((q-2)/(2q)) μ₀ r_*²`.
pub fn well_depth_m<T: Real>(r_star: T, mu0: T, q: T) -> T {
    (q - T::two()) / (T::two() * q) * mu0 * r_star * r_star
}

/// `θ = 1 - (M/E₀)^{(2-q)/q}`, in `(0,1)` for `0 < E₀ < M`.
pub fn theta_bound<T: Real>(m: T, e0: T, q: T) -> Result<T> {
    if !(e0 > T::zero() && e0 < m) {
        return Err(Error::Inapplicable(format!(
            "theta bound needs 0 < E(0) < M, got E(0) = {e0}, M = {m}"
        )));
    }
    Ok(T::one() - (m / e0).powf((T::two() - q) / q))
}

/// Quadrature integrals of a fixed direction `u` that determine `I(λu)`
/// and `J(λu)` for every `λ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayProfile<T> {
    pub q: T,
    /// `μ a(u,u)` at the chosen `μ`.
    pub mu_a: T,
    /// `∫ |u|^q`.
    pub lq: T,
    /// `∫ |u|^q log|u|`.
    pub log_moment: T,
}

impl<T: Real> RayProfile<T> {
    pub fn new(model: &WaveModel<T>, u: &[T], mu: T) -> Result<Self> {
        let grid = model.grid();
        let q = model.exponents().q;
        let vals = grid.evaluate_at_nodes(u)?;
        let (mut lq, mut lm) = (T::zero(), T::zero());
        for (&x, &w) in vals.iter().zip(grid.weights()) {
            let a = x.abs();
            if a > T::zero() {
                let pw = abs_pow(a, q);
                lq += w * pw;
                lm += w * pw * a.ln();
            }
        }
        let mu_a = mu * model.stiffness().quad_form(u);
        if !(mu_a > T::zero()) {
            return Err(Error::Degenerate("direction has a(u,u) = 0".into()));
        }
        Ok(Self {
            q,
            mu_a,
            lq,
            log_moment: lm,
        })
    }

    /// `I(λu) = λ² μa - λ^q (∫|u|^q log|u| + log λ ∫|u|^q)`.
    pub fn nehari(&self, lambda: T) -> T {
        let l = lambda.ln();
        lambda * lambda * self.mu_a - (self.q * l).exp() * (self.log_moment + l * self.lq)
    }

    /// `J(λu)`.
    pub fn potential(&self, lambda: T) -> T {
        let l = lambda.ln();
        let q = self.q;
        let lq = (q * l).exp();
        T::half() * lambda * lambda * self.mu_a - lq * (self.log_moment + l * self.lq) / q
            + lq * self.lq / (q * q)
    }

    /// `I(λu)/λ²`, same sign as `I(λu)` and free of the `λ²` scale.
    fn reduced_nehari(&self, log_lambda: T) -> T {
        self.mu_a - ((self.q - T::two()) * log_lambda).exp() * (self.log_moment + log_lambda * self.lq)
    }
}

/// `λ_*` with `I(λ_* u) = 0`: `I(λu) > 0` below it and `< 0` above.
///
/// Bisection in `log λ` over `[1e-12, 1e12]`.
pub fn mountain_pass_lambda<T: Real>(model: &WaveModel<T>, u: &[T], mu: T) -> Result<T> {
    let ray = RayProfile::new(model, u, mu)?;
    mountain_pass_on_ray(&ray)
}

pub fn mountain_pass_on_ray<T: Real>(ray: &RayProfile<T>) -> Result<T> {
    let lo = T::lit(1e-12).ln();
    let hi = T::lit(1e12).ln();
    let f = |l: T| ray.reduced_nehari(l);
    let root = bisect(f, lo, hi, 200, "Nehari functional along the ray")?;
    Ok(root.exp())
}

/// Sampled upper estimate of the well depth `d = inf_𝒩 J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthEstimate<T> {
    pub value: T,
    /// Index of the minimizing direction in the sample sequence.
    pub argmin: usize,
    pub n_samples: usize,
}

/// Number of pure modes leading the direction sequence of
/// [`d_estimate`].
pub const PURE_MODE_DIRECTIONS: usize = 8;

/// The `i`-th sampling direction: the first pure modes, then seeded
/// standard-normal coefficient vectors. The sequence is prefix-stable, so
/// sample sets for increasing `n` are nested.
pub fn sample_directions<T: Real>(n_modes: usize, n: usize, seed: u64) -> Vec<Vec<T>> {
    let pure = n_modes.min(PURE_MODE_DIRECTIONS).min(n);
    let mut out = Vec::with_capacity(n);
    for j in 0..pure {
        let mut e = vec![T::zero(); n_modes];
        e[j] = T::one();
        out.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < n {
        out.push(
            (0..n_modes)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    T::lit(x)
                })
                .collect(),
        );
    }
    out
}

/// `min J(λ_*(u) u)` over `n_samples` directions, at `μ = μ₀`.
pub fn d_estimate<T: Real>(model: &WaveModel<T>, n_samples: usize, seed: u64) -> Result<DepthEstimate<T>> {
    if n_samples == 0 {
        return Err(Error::config("constants.d_samples", "must be at least 1"));
    }
    let mu0 = model.coeff().mu0();
    let mut best: Option<(T, usize)> = None;
    for (i, u) in sample_directions::<T>(model.n_modes(), n_samples, seed).iter().enumerate() {
        let ray = RayProfile::new(model, u, mu0)?;
        let lambda = mountain_pass_on_ray(&ray)?;
        let j = ray.potential(lambda);
        if best.is_none_or(|(b, _)| j < b) {
            best = Some((j, i));
        }
    }
    let (value, argmin) = best.expect("at least one sample");
    Ok(DepthEstimate {
        value,
        argmin,
        n_samples,
    })
}
