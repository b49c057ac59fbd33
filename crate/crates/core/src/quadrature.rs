//! Gauss–Legendre rules and their composite versions on an interval.

use crate::num::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Roots of `P_n` are found by Newton iteration from the Chebyshev-like
/// initial guesses; weights follow from `P_n'` at the roots.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of_usize(n);
    let half_n = n.div_ceil(2);
    for i in 0..half_n {
        // Initial guess for the i-th largest root.
        let mut x = (T::PI() * (T::of_usize(i) + T::lit(0.75)) / (nf + T::half())).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = T::two() / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((T::two() * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of_usize(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite rule on `[0, length]` with `n_cells` equal cells and
/// `per_cell` Gauss points in each cell.
pub fn composite<T: Real>(length: T, n_cells: usize, per_cell: usize) -> (Vec<T>, Vec<T>) {
    let (ref_x, ref_w) = gauss_legendre::<T>(per_cell);
    let h = length / T::of_usize(n_cells);
    let mut nodes = Vec::with_capacity(n_cells * per_cell);
    let mut weights = Vec::with_capacity(n_cells * per_cell);
    for c in 0..n_cells {
        let a = h * T::of_usize(c);
        for (&x, &w) in ref_x.iter().zip(&ref_w) {
            nodes.push(a + h * T::half() * (x + T::one()));
            weights.push(h * T::half() * w);
        }
    }
    (nodes, weights)
}
