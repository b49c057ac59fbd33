//! Spatial discretization on an interval `(0, L)` with homogeneous Dirichlet
//! conditions.
//!
//! The Galerkin space is spanned by the eigenfunctions of `-d²/dx²`,
//! `w_j(x) = sqrt(2/L) sin(jπx/L)`, which are orthonormal in `L²`. All
//! integrals (the variable-coefficient form, the nonlinear terms) are taken
//! with a composite Gauss–Legendre rule that over-resolves the highest mode.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::num::{dot, Real};
use crate::quadrature;

/// Default number of Gauss points per cell.
pub const DEFAULT_NODES_PER_CELL: usize = 8;

/// Tolerance on `max |<w_i, w_j>_quad - δ_ij|` accepted at construction.
pub fn gram_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

/// Quadrature grid together with the sine basis sampled at its nodes.
#[derive(Debug, Clone)]
pub struct DomainGrid<T> {
    length: T,
    n_modes: usize,
    n_cells: usize,
    nodes_per_cell: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    /// `basis[n * n_modes + j] = w_{j+1}(x_n)`.
    basis: Vec<T>,
    /// Derivatives `w_{j+1}'(x_n)`, same layout.
    dbasis: Vec<T>,
    gram_deviation: T,
}

impl<T: Real> DomainGrid<T> {
    /// Grid with the default quadrature: 8 points per cell, `2·n_modes` cells.
    pub fn new(length: T, n_modes: usize) -> Result<Self> {
        Self::with_quadrature(length, n_modes, 2 * n_modes, DEFAULT_NODES_PER_CELL)
    }

    pub fn with_quadrature(
        length: T,
        n_modes: usize,
        n_cells: usize,
        nodes_per_cell: usize,
    ) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::config("problem.length", "must be positive and finite"));
        }
        if n_modes == 0 {
            return Err(Error::config("problem.n_modes", "must be at least 1"));
        }
        if n_cells == 0 {
            return Err(Error::config("problem.quadrature.n_cells", "must be at least 1"));
        }
        if nodes_per_cell == 0 {
            return Err(Error::config(
                "problem.quadrature.nodes_per_cell",
                "must be at least 1",
            ));
        }
        let (nodes, weights) = quadrature::composite(length, n_cells, nodes_per_cell);
        let amp = (T::two() / length).sqrt();
        let mut basis = Vec::with_capacity(nodes.len() * n_modes);
        let mut dbasis = Vec::with_capacity(nodes.len() * n_modes);
        for &x in &nodes {
            for j in 1..=n_modes {
                let k = T::of_usize(j) * T::PI() / length;
                basis.push(amp * (k * x).sin());
                dbasis.push(amp * k * (k * x).cos());
            }
        }
        let mut grid = Self {
            length,
            n_modes,
            n_cells,
            nodes_per_cell,
            nodes,
            weights,
            basis,
            dbasis,
            gram_deviation: T::zero(),
        };
        grid.gram_deviation = grid.compute_gram_deviation();
        let tol = gram_tolerance::<T>();
        if !(grid.gram_deviation < tol) {
            return Err(Error::config(
                "problem.quadrature",
                format!(
                    "basis Gram matrix deviates from identity by {} (tolerance {}); use more quadrature nodes",
                    grid.gram_deviation, tol
                ),
            ));
        }
        Ok(grid)
    }

    pub fn length(&self) -> T {
        self.length
    }
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }
    pub fn nodes_per_cell(&self) -> usize {
        self.nodes_per_cell
    }
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    pub fn gram_deviation(&self) -> T {
        self.gram_deviation
    }

    /// Row of basis values at node `n`.
    #[inline]
    pub fn basis_row(&self, n: usize) -> &[T] {
        &self.basis[n * self.n_modes..(n + 1) * self.n_modes]
    }

    #[inline]
    pub fn dbasis_row(&self, n: usize) -> &[T] {
        &self.dbasis[n * self.n_modes..(n + 1) * self.n_modes]
    }

    /// `j`-th eigenvalue `(jπ/L)²` of `-d²/dx²` (1-based `j`).
    pub fn laplace_eigenvalue(&self, j: usize) -> T {
        let k = T::of_usize(j) * T::PI() / self.length;
        k * k
    }

    fn compute_gram_deviation(&self) -> T {
        let k = self.n_modes;
        let mut gram = vec![T::zero(); k * k];
        for n in 0..self.n_nodes() {
            let w = self.weights[n];
            let row = self.basis_row(n);
            for i in 0..k {
                let wi = w * row[i];
                for j in i..k {
                    gram[i * k + j] += wi * row[j];
                }
            }
        }
        let mut worst = T::zero();
        for i in 0..k {
            for j in i..k {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((gram[i * k + j] - target).abs());
            }
        }
        worst
    }

    fn check_len(&self, got: usize, want: usize) -> Result<()> {
        if got == want {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: want,
                found: got,
            })
        }
    }

    /// Values of `u = Σ u_j w_j` at every quadrature node.
    pub fn evaluate_at_nodes(&self, coeffs: &[T]) -> Result<Vec<T>> {
        self.check_len(coeffs.len(), self.n_modes)?;
        Ok((0..self.n_nodes())
            .map(|n| dot(self.basis_row(n), coeffs))
            .collect())
    }

    /// Values of `u'` at every quadrature node.
    pub fn evaluate_gradient_at_nodes(&self, coeffs: &[T]) -> Result<Vec<T>> {
        self.check_len(coeffs.len(), self.n_modes)?;
        Ok((0..self.n_nodes())
            .map(|n| dot(self.dbasis_row(n), coeffs))
            .collect())
    }

    /// Quadrature inner products `<f, w_j>` of node samples with the basis.
    pub fn project(&self, node_values: &[T]) -> Result<Vec<T>> {
        self.check_len(node_values.len(), self.n_nodes())?;
        let mut out = vec![T::zero(); self.n_modes];
        for (n, &f) in node_values.iter().enumerate() {
            let wf = self.weights[n] * f;
            if wf != T::zero() {
                for (o, &b) in out.iter_mut().zip(self.basis_row(n)) {
                    *o += wf * b;
                }
            }
        }
        Ok(out)
    }

    /// Quadrature of `f` given at the nodes.
    pub fn integrate(&self, node_values: &[T]) -> T {
        dot(&self.weights, node_values)
    }

    /// Projection of a pointwise-evaluable function onto the basis.
    pub fn project_fn(&self, f: impl Fn(T) -> T) -> Vec<T> {
        let values: Vec<T> = self.nodes.iter().map(|&x| f(x)).collect();
        self.project(&values).expect("node count matches by construction")
    }
}

/// Spatial coefficient `A(x)` of the elliptic operator (scalar in 1D).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diffusivity<T> {
    Constant { value: T },
    /// `A(x) = intercept + slope·x`.
    Linear { intercept: T, slope: T },
}

impl<T: Real> Diffusivity<T> {
    pub fn eval(&self, x: T) -> T {
        match *self {
            Diffusivity::Constant { value } => value,
            Diffusivity::Linear { intercept, slope } => intercept + slope * x,
        }
    }

    /// Infimum of `A` over `[0, length]`.
    pub fn lower_bound(&self, length: T) -> T {
        match *self {
            Diffusivity::Constant { value } => value,
            Diffusivity::Linear { intercept, slope } => intercept.min(intercept + slope * length),
        }
    }
}

/// Time coefficient `μ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeCoefficient<T> {
    Constant { value: T },
    /// `μ(t) = mu_inf + (mu_init - mu_inf)·exp(-kappa·t)`.
    ExpDecay { mu_inf: T, mu_init: T, kappa: T },
}

impl<T: Real> TimeCoefficient<T> {
    pub fn eval(&self, t: T) -> T {
        match *self {
            TimeCoefficient::Constant { value } => value,
            TimeCoefficient::ExpDecay {
                mu_inf,
                mu_init,
                kappa,
            } => mu_inf + (mu_init - mu_inf) * (-kappa * t).exp(),
        }
    }

    pub fn derivative(&self, t: T) -> T {
        match *self {
            TimeCoefficient::Constant { .. } => T::zero(),
            TimeCoefficient::ExpDecay {
                mu_inf,
                mu_init,
                kappa,
            } => -kappa * (mu_init - mu_inf) * (-kappa * t).exp(),
        }
    }

    /// Infimum of `μ` over `t ≥ 0`.
    pub fn lower_bound(&self) -> T {
        match *self {
            TimeCoefficient::Constant { value } => value,
            TimeCoefficient::ExpDecay { mu_inf, mu_init, .. } => mu_inf.min(mu_init),
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            TimeCoefficient::Constant { .. } => true,
            TimeCoefficient::ExpDecay {
                mu_inf,
                mu_init,
                kappa,
            } => kappa == T::zero() || mu_inf == mu_init,
        }
    }
}

/// Validated pair `(A, μ)` with their positive lower bounds `a0`, `μ0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField<T> {
    diffusivity: Diffusivity<T>,
    mu: TimeCoefficient<T>,
    a0: T,
    mu0: T,
}

impl<T: Real> CoefficientField<T> {
    /// Checks `A ≥ a0 > 0` at every node and `μ ≥ μ0 > 0`, `μ' ≤ 0` on a
    /// sample of `[0, horizon]`.
    pub fn new(
        diffusivity: Diffusivity<T>,
        mu: TimeCoefficient<T>,
        grid: &DomainGrid<T>,
        horizon: T,
    ) -> Result<Self> {
        let a0 = diffusivity.lower_bound(grid.length());
        if !(a0 > T::zero()) {
            return Err(Error::config(
                "problem.coefficient",
                format!("A(x) must be bounded below by a positive constant, got a0 = {a0}"),
            ));
        }
        if let Some(x) = grid
            .nodes()
            .iter()
            .find(|&&x| !(diffusivity.eval(x) >= a0))
        {
            return Err(Error::config(
                "problem.coefficient",
                format!("A({x}) = {} is below a0 = {a0}", diffusivity.eval(*x)),
            ));
        }
        if let TimeCoefficient::ExpDecay { kappa, .. } = mu {
            if kappa < T::zero() {
                return Err(Error::config("problem.mu.kappa", "must be nonnegative"));
            }
        }
        let mu0 = mu.lower_bound();
        if !(mu0 > T::zero()) {
            return Err(Error::config(
                "problem.mu",
                format!("mu(t) must stay above a positive constant, got mu0 = {mu0}"),
            ));
        }
        let samples = 256;
        let horizon = if horizon > T::zero() { horizon } else { T::one() };
        for i in 0..=samples {
            let t = horizon * T::of_usize(i) / T::of_usize(samples);
            let (m, dm) = (mu.eval(t), mu.derivative(t));
            if !(m >= mu0) {
                return Err(Error::config(
                    "problem.mu",
                    format!("mu({t}) = {m} below lower bound {mu0}"),
                ));
            }
            if dm > T::zero() {
                return Err(Error::config(
                    "problem.mu",
                    format!("mu must be nonincreasing, mu'({t}) = {dm}"),
                ));
            }
        }
        if mu.is_constant() {
            debug!("mu(t) is constant; the dissipation identity holds with a vanishing mu' term");
        }
        Ok(Self {
            diffusivity,
            mu,
            a0,
            mu0,
        })
    }

    pub fn diffusivity(&self) -> &Diffusivity<T> {
        &self.diffusivity
    }
    pub fn time_coefficient(&self) -> &TimeCoefficient<T> {
        &self.mu
    }
    pub fn a0(&self) -> T {
        self.a0
    }
    pub fn mu0(&self) -> T {
        self.mu0
    }
    pub fn a(&self, x: T) -> T {
        self.diffusivity.eval(x)
    }
    pub fn mu(&self, t: T) -> T {
        self.mu.eval(t)
    }
    pub fn mu_prime(&self, t: T) -> T {
        self.mu.derivative(t)
    }
}

/// Modal coefficients of `u` and `v = u_t` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalState<T> {
    pub t: T,
    pub u: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> ModalState<T> {
    pub fn new(t: T, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "modal state",
            });
        }
        Ok(Self { t, u, v })
    }

    pub fn zero(n_modes: usize) -> Self {
        Self {
            t: T::zero(),
            u: vec![T::zero(); n_modes],
            v: vec![T::zero(); n_modes],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.u.len()
    }
}

/// `S_ij = ∫ A(x) w_i'(x) w_j'(x) dx` by quadrature.
pub fn assemble_stiffness<T: Real>(
    grid: &DomainGrid<T>,
    diffusivity: &Diffusivity<T>,
) -> Result<SymMatrix<T>> {
    let k = grid.n_modes();
    let mut s = SymMatrix::zeros(k);
    let mut acc = vec![T::zero(); k * k];
    for (n, &x) in grid.nodes().iter().enumerate() {
        let a = diffusivity.eval(x);
        if !(a > T::zero()) {
            return Err(Error::config(
                "problem.coefficient",
                format!("A({x}) = {a} is not positive"),
            ));
        }
        let wa = grid.weights()[n] * a;
        let d = grid.dbasis_row(n);
        for i in 0..k {
            let di = wa * d[i];
            for j in i..k {
                acc[i * k + j] += di * d[j];
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            s.set_sym(i, j, acc[i * k + j]);
        }
    }
    Ok(s)
}

/// `a(u, u) = uᵀ S u`.
pub fn bilinear_a<T: Real>(u: &[T], stiffness: &SymMatrix<T>) -> Result<T> {
    if u.len() != stiffness.dim() {
        return Err(Error::DimensionMismatch {
            expected: stiffness.dim(),
            found: u.len(),
        });
    }
    Ok(stiffness.quad_form(u))
}
