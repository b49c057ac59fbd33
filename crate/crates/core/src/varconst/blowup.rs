use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Exponents;
use crate::num::Real;

use super::bisect;

/// Step `η`, weight `ε` and rate `ξ₁` of the lower bound
/// `Y' ≥ ξ₁ (G + ‖u_t‖² + a(u,u) + ‖u‖_q^q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiChoice<T> {
    pub eta: T,
    pub eps: T,
    pub xi1: T,
}

/// Log-grid resolution of [`xi1_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    pub per_decade: u32,
    pub eta_decades: (i32, i32),
    pub eps_decades: (i32, i32),
}

impl Default for XiGrid {
    fn default() -> Self {
        Self {
            per_decade: 8,
            eta_decades: (-4, 8),
            eps_decades: (-10, 2),
        }
    }
}

/// The four strict conditions on `(η, ε)`, each as a margin that must be
/// positive.
pub fn xi_conditions<T: Real>(
    exps: &Exponents<T>,
    b6: T,
    g0: T,
    pairing0: T,
    eta: T,
    eps: T,
) -> Result<[T; 4]> {
    let alpha = exps
        .alpha()
        .ok_or_else(|| Error::Inapplicable("xi1 needs q > p + 2".into()))?;
    let (q, p) = (exps.q, exps.p);
    let p1 = p + T::one();
    let p2 = p + T::two();
    let eta_pow = (-p1 * eta.ln()).exp();
    Ok([
        T::one() - eta_pow * b6,
        q - eta_pow * (q - p2) / (p2 * q),
        (T::one() - alpha) - eps * eta * p1 / p2,
        g0.powf(T::one() - alpha) + eps * pairing0,
    ])
}

/// `ξ₁ = ε min{q/2 + 1, (q-2)μ₀/2, 1 - η^{-(p+1)} B₆, q - η^{-(p+1)}(q-p-2)/((p+2)q)}`.
pub fn xi1_value<T: Real>(exps: &Exponents<T>, mu0: T, b6: T, eta: T, eps: T) -> T {
    let (q, p) = (exps.q, exps.p);
    let p1 = p + T::one();
    let p2 = p + T::two();
    let eta_pow = (-p1 * eta.ln()).exp();
    let terms = [
        q / T::two() + T::one(),
        (q - T::two()) / T::two() * mu0,
        T::one() - eta_pow * b6,
        q - eta_pow * (q - p2) / (p2 * q),
    ];
    eps * terms.iter().copied().fold(T::infinity(), T::min)
}

/// Maximizes `ξ₁` over nested log grids `η = 10^{i/n}`, `ε = 10^{j/n}`
/// subject to the four feasibility conditions. `pairing0 = ∫ u₀ u₁`.
pub fn xi1_estimate<T: Real>(
    exps: &Exponents<T>,
    mu0: T,
    b6: T,
    g0: T,
    pairing0: T,
    grid: &XiGrid,
) -> Result<XiChoice<T>> {
    if !exps.supercritical() {
        return Err(Error::Inapplicable("xi1 needs q > p + 2".into()));
    }
    if !(g0 > T::zero()) {
        return Err(Error::Inapplicable(format!("xi1 needs G0 = -E(0) > 0, got {g0}")));
    }
    let n = grid.per_decade.max(1) as i32;
    let ten = T::lit(10.0);
    let at = |i: i32| ten.powf(T::lit(i as f64) / T::lit(n as f64));
    let mut best: Option<XiChoice<T>> = None;
    for i in grid.eta_decades.0 * n..=grid.eta_decades.1 * n {
        let eta = at(i);
        for j in grid.eps_decades.0 * n..=grid.eps_decades.1 * n {
            let eps = at(j);
            let c = xi_conditions(exps, b6, g0, pairing0, eta, eps)?;
            if c.iter().all(|&x| x > T::zero()) {
                let xi1 = xi1_value(exps, mu0, b6, eta, eps);
                if best.is_none_or(|b| xi1 > b.xi1) {
                    best = Some(XiChoice { eta, eps, xi1 });
                }
            }
        }
    }
    best.ok_or_else(|| {
        Error::Degenerate("no feasible (eta, eps) pair on the search grid".into())
    })
}

/// `ξ₃ = 2^{1/(1-α)} (1 + ε^{1/(1-α)} (1 + 1/G₀))`, the constant relating
/// `Y^{1/(1-α)}` to `G + ‖u‖_q^q + ‖u_t‖²`.
pub fn xi3<T: Real>(alpha: T, eps: T, g0: T) -> T {
    let k = T::one() / (T::one() - alpha);
    T::two().powf(k) * (T::one() + eps.powf(k) * (T::one() + T::one() / g0))
}

/// `T* = ((1-α)/(α ξ)) Y₀^{-α/(1-α)}`: the time by which
/// `Y' ≥ ξ Y^{1/(1-α)}` forces `Y` to blow up.
pub fn blowup_time_bound<T: Real>(y0: T, xi: T, alpha: T) -> Result<T> {
    if !(y0 > T::zero()) || !(xi > T::zero()) {
        return Err(Error::Inapplicable(format!(
            "blow-up time bound needs Y0 > 0 and xi > 0, got {y0}, {xi}"
        )));
    }
    if !(alpha > T::zero() && alpha < T::half()) {
        return Err(Error::Inapplicable(format!("need 0 < alpha < 1/2, got {alpha}")));
    }
    Ok((T::one() - alpha) / (alpha * xi) * y0.powf(-alpha / (T::one() - alpha)))
}

/// Scalars of the positive-energy blow-up argument for given
/// `(q, p, a₀, μ₀, B₇)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupScalars<T> {
    pub q: T,
    pub p: T,
    pub a0: T,
    pub mu0: T,
    pub b7: T,
}

impl<T: Real> BlowupScalars<T> {
    /// `ε₂ = 1 - 2/q`, the zero of `h₂`.
    pub fn eps2(&self) -> T {
        T::one() - T::two() / self.q
    }

    /// `h₁(ε) = ((p+1)/(p+2)) (B₇² / (2 ε a₀ μ₀))^{1/(p+1)}`.
    pub fn h1(&self, eps: T) -> T {
        let p1 = self.p + T::one();
        p1 / (p1 + T::one())
            * (self.b7 * self.b7 / (T::two() * eps * self.a0 * self.mu0)).powf(T::one() / p1)
    }

    /// `h₂(ε) = 2 sqrt((a₀μ₀/B₇)(1 + q(1-ε)/2)(q(1-ε)/2 - 1))`.
    pub fn h2(&self, eps: T) -> T {
        let s = self.q * (T::one() - eps) / T::two();
        let inner = self.a0 * self.mu0 / self.b7 * (T::one() + s) * (s - T::one());
        T::two() * inner.max(T::zero()).sqrt()
    }

    /// `h₃(ε) = q(1-ε)/h₂(ε)`.
    pub fn h3(&self, eps: T) -> T {
        self.q * (T::one() - eps) / self.h2(eps)
    }
}

/// Root of `h₁ = h₃` and the values there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPrime<T> {
    pub eps: T,
    pub h1: T,
    pub h2: T,
    pub h3: T,
}

/// Bracket margin of [`epsilon_prime`] relative to `ε₂`.
pub const EPS_BRACKET_MARGIN: f64 = 1e-12;

/// `ε′ ∈ (0, 1 - 2/q)` with `h₁(ε′) = h₃(ε′)`, by bisection on
/// `(δ, ε₂ - δ)`; `h₁ - h₃` tends to `+∞` at the left end and `-∞` at the
/// right end.
pub fn epsilon_prime<T: Real>(s: &BlowupScalars<T>) -> Result<EpsilonPrime<T>> {
    if !(s.q > s.p + T::two()) || !(s.p >= T::zero()) {
        return Err(Error::Inapplicable(format!(
            "epsilon' needs q > p + 2 >= 2, got q = {}, p = {}",
            s.q, s.p
        )));
    }
    if !(s.a0 > T::zero() && s.mu0 > T::zero() && s.b7 > T::zero()) {
        return Err(Error::config("constants", "a0, mu0 and B7 must be positive"));
    }
    let e2 = s.eps2();
    let delta = T::lit(EPS_BRACKET_MARGIN) * e2;
    let eps = bisect(|e| s.h1(e) - s.h3(e), delta, e2 - delta, 200, "h1 - h3")?;
    Ok(EpsilonPrime {
        eps,
        h1: s.h1(eps),
        h2: s.h2(eps),
        h3: s.h3(eps),
    })
}
