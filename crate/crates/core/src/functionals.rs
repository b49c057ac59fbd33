//! Scalar functionals on modal states: the Nehari functional `I`, the
//! potential `J`, the energy `E`, its dissipation rate, the blow-up
//! functionals `F` and `Y`, and the per-record energy bookkeeping.
//!
//! Integrals of nonlinear quantities are evaluated pointwise at the
//! quadrature nodes; `L²` norms and pairings use the modal coefficients
//! directly since the basis is orthonormal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ModalState;
use crate::model::{SourceLaw, WaveModel};
use crate::num::{dot, norm_sq, Real};

/// `f(u) = |u|^{q-2} u log|u|`, extended by `f(0) = 0`.
#[inline]
pub fn log_source<T: Real>(u: T, q: T) -> T {
    let a = u.abs();
    if a == T::zero() {
        return T::zero();
    }
    let l = a.ln();
    let e = q - T::two();
    let mag = if e == e.round() && e < T::lit(16.0) {
        a.powi(e.to_i32().unwrap_or(0)) * a * l
    } else {
        ((q - T::one()) * l).exp() * l
    };
    if u < T::zero() {
        -mag
    } else {
        mag
    }
}

/// `g(v) = |v|^p v`.
#[inline]
pub fn power_damping<T: Real>(v: T, p: T) -> T {
    if p == T::zero() {
        return v;
    }
    let a = v.abs();
    if a == T::zero() {
        return T::zero();
    }
    if p == p.round() && p < T::lit(16.0) {
        let n = p.to_i32().unwrap_or(0);
        v * a.powi(n)
    } else {
        v * (p * a.ln()).exp()
    }
}

/// Integrals of a state from which every functional is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measures<T> {
    pub t: T,
    pub mu: T,
    pub mu_prime: T,
    /// `‖u‖₂²`.
    pub l2_u: T,
    /// `‖u_t‖₂²`.
    pub l2_v: T,
    /// `‖u‖_q^q`; zero when the source is switched off.
    pub lq_u: T,
    /// `∫ |u|^q log|u|`; zero when the source is switched off.
    pub log_moment: T,
    /// `a(u, u)`.
    pub a_uu: T,
    /// `‖∇u‖₂²`.
    pub grad_sq: T,
    /// `∫ g(u_t) u_t`.
    pub damping_power: T,
    /// `∫ u u_t`.
    pub pairing: T,
    q: T,
}

impl<T: Real> Measures<T> {
    /// `I(u) = μ(t) a(u,u) - ∫ |u|^q log|u|`.
    pub fn nehari(&self) -> T {
        self.mu * self.a_uu - self.log_moment
    }

    /// `J(u) = ½ μ a(u,u) - (1/q) ∫ |u|^q log|u| + (1/q²) ‖u‖_q^q`.
    pub fn potential(&self) -> T {
        let q = self.q;
        T::half() * self.mu * self.a_uu - self.log_moment / q + self.lq_u / (q * q)
    }

    /// `J` through `I`: `(1/q) I + (1/q²)‖u‖_q^q + ((q-2)/(2q)) μ a(u,u)`.
    pub fn potential_via_nehari(&self) -> T {
        let q = self.q;
        self.nehari() / q
            + self.lq_u / (q * q)
            + (q - T::two()) / (T::two() * q) * self.mu * self.a_uu
    }

    /// `E = ½ ‖u_t‖² + J(u)`.
    pub fn energy(&self) -> T {
        T::half() * self.l2_v + self.potential()
    }

    /// `F = (1/q) ‖u‖_q^q + I(u)`.
    pub fn blowup_f(&self) -> T {
        self.lq_u / self.q + self.nehari()
    }

    /// `dE/dt = ½ μ'(t) a(u,u) - ∫ g(u_t) u_t`.
    pub fn dissipation_rate(&self) -> T {
        T::half() * self.mu_prime * self.a_uu - self.damping_power
    }

    pub fn q(&self) -> T {
        self.q
    }
}

/// Evaluates all integrals of `state` needed by the functionals.
///
/// A non-finite integral (overflow for huge amplitudes) is reported as
/// [`Error::NonFinite`]; the dynamics treats that as the blow-up range.
pub fn measures<T: Real>(model: &WaveModel<T>, state: &ModalState<T>) -> Result<Measures<T>> {
    let grid = model.grid();
    let k = grid.n_modes();
    if state.u.len() != k || state.v.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: state.u.len().min(state.v.len()),
        });
    }
    let q = model.exponents().q;
    let source_on = model.source() == SourceLaw::Logarithmic;
    let mut lq = T::zero();
    let mut logm = T::zero();
    let mut damp = T::zero();
    for n in 0..grid.n_nodes() {
        let row = grid.basis_row(n);
        let w = grid.weights()[n];
        let un = dot(row, &state.u);
        let vn = dot(row, &state.v);
        if source_on {
            let a = un.abs();
            if a > T::zero() {
                let l = a.ln();
                let aq = (q * l).exp();
                lq += w * aq;
                logm += w * aq * l;
            }
        }
        damp += w * model.damping_at(vn) * vn;
    }
    let m = Measures {
        t: state.t,
        mu: model.coeff().mu(state.t),
        mu_prime: model.coeff().mu_prime(state.t),
        l2_u: norm_sq(&state.u),
        l2_v: norm_sq(&state.v),
        lq_u: lq,
        log_moment: logm,
        a_uu: model.stiffness().quad_form(&state.u),
        grad_sq: model.laplace().quad_form(&state.u),
        damping_power: damp,
        pairing: dot(&state.u, &state.v),
        q,
    };
    let all_finite = [
        m.l2_u, m.l2_v, m.lq_u, m.log_moment, m.a_uu, m.damping_power, m.pairing,
    ]
    .iter()
    .all(|x| x.is_finite());
    if all_finite {
        Ok(m)
    } else {
        Err(Error::NonFinite {
            what: "state functionals",
        })
    }
}

pub fn nehari_i<T: Real>(model: &WaveModel<T>, state: &ModalState<T>) -> Result<T> {
    Ok(measures(model, state)?.nehari())
}

pub fn potential_j<T: Real>(model: &WaveModel<T>, state: &ModalState<T>) -> Result<T> {
    Ok(measures(model, state)?.potential())
}

pub fn total_e<T: Real>(model: &WaveModel<T>, state: &ModalState<T>) -> Result<T> {
    Ok(measures(model, state)?.energy())
}

pub fn dissipation_rate<T: Real>(model: &WaveModel<T>, state: &ModalState<T>) -> Result<T> {
    Ok(measures(model, state)?.dissipation_rate())
}

pub fn blowup_f<T: Real>(model: &WaveModel<T>, state: &ModalState<T>) -> Result<T> {
    Ok(measures(model, state)?.blowup_f())
}

/// `Y = G^{1-α} + ε ∫ u u_t` for `G = -E > 0`, `0 < α < ½`.
pub fn auxiliary_y<T: Real>(g_val: T, pairing: T, eps: T, alpha: T) -> Result<T> {
    if !(g_val > T::zero()) {
        return Err(Error::Inapplicable(format!(
            "auxiliary Y needs G = -E > 0, got G = {g_val}"
        )));
    }
    if !(alpha > T::zero() && alpha < T::half()) {
        return Err(Error::Inapplicable(format!(
            "auxiliary Y needs 0 < alpha < 1/2, got {alpha}"
        )));
    }
    let y = g_val.powf(T::one() - alpha) + eps * pairing;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { what: "auxiliary Y" })
    }
}

/// Column order of the trajectory CSV.
pub const CSV_COLUMNS: [&str; 13] = [
    "t",
    "E",
    "I",
    "J",
    "F",
    "Y",
    "l2_u",
    "l2_v",
    "lq_u",
    "a_uu",
    "log_moment",
    "damping_power",
    "balance_residual",
];

/// Time-stamped snapshot of every tracked functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord<T> {
    pub t: T,
    pub energy: T,
    pub nehari: T,
    pub potential: T,
    pub blowup_f: T,
    /// `Y`, present only when `G = -E > 0` and `α` is defined.
    pub y: Option<T>,
    pub l2_u: T,
    pub l2_v: T,
    pub lq_u: T,
    pub a_uu: T,
    pub log_moment: T,
    pub damping_power: T,
    pub balance_residual: T,
}

impl<T: Real> EnergyRecord<T> {
    pub fn from_measures(m: &Measures<T>, y: Option<T>, balance_residual: T) -> Self {
        Self {
            t: m.t,
            energy: m.energy(),
            nehari: m.nehari(),
            potential: m.potential(),
            blowup_f: m.blowup_f(),
            y,
            l2_u: m.l2_u,
            l2_v: m.l2_v,
            lq_u: m.lq_u,
            a_uu: m.a_uu,
            log_moment: m.log_moment,
            damping_power: m.damping_power,
            balance_residual,
        }
    }

    pub fn y_available(&self) -> bool {
        self.y.is_some()
    }

    /// `μ(t) a(u,u)`, recovered from `I` and the log moment.
    pub fn mu_a(&self) -> T {
        self.nehari + self.log_moment
    }

    /// Energy reassembled from the stored parts; needs the same `q` and
    /// `μ(t)` as the model that produced the record.
    pub fn recompose_energy(&self, q: T, mu: T) -> T {
        T::half() * self.l2_v + T::half() * mu * self.a_uu - self.log_moment / q
            + self.lq_u / (q * q)
    }

    /// CSV fields in [`CSV_COLUMNS`] order; `Y` is empty when unavailable.
    pub fn csv_fields(&self) -> Vec<String> {
        let f = |x: T| format!("{x:e}");
        vec![
            f(self.t),
            f(self.energy),
            f(self.nehari),
            f(self.potential),
            f(self.blowup_f),
            self.y.map(f).unwrap_or_default(),
            f(self.l2_u),
            f(self.l2_v),
            f(self.lq_u),
            f(self.a_uu),
            f(self.log_moment),
            f(self.damping_power),
            f(self.balance_residual),
        ]
    }

    /// Parses fields in [`CSV_COLUMNS`] order.
    pub fn from_csv_fields<S: AsRef<str>>(fields: &[S]) -> Result<Self> {
        if fields.len() != CSV_COLUMNS.len() {
            return Err(Error::DimensionMismatch {
                expected: CSV_COLUMNS.len(),
                found: fields.len(),
            });
        }
        let parse = |i: usize| -> Result<T> {
            let s = fields[i].as_ref().trim();
            s.parse::<f64>()
                .map(T::lit)
                .map_err(|e| Error::config(CSV_COLUMNS[i], format!("cannot parse `{s}`: {e}")))
        };
        let y_raw = fields[5].as_ref().trim();
        Ok(Self {
            t: parse(0)?,
            energy: parse(1)?,
            nehari: parse(2)?,
            potential: parse(3)?,
            blowup_f: parse(4)?,
            y: if y_raw.is_empty() { None } else { Some(parse(5)?) },
            l2_u: parse(6)?,
            l2_v: parse(7)?,
            lq_u: parse(8)?,
            a_uu: parse(9)?,
            log_moment: parse(10)?,
            damping_power: parse(11)?,
            balance_residual: parse(12)?,
        })
    }
}

/// Running time integrals of the energy identity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BalanceTerms<T> {
    /// `∫₀ᵗ ∫ g(u_t) u_t`.
    pub damping_work: T,
    /// `½ ∫₀ᵗ μ'(s) a(u,u) ds`.
    pub coefficient_work: T,
}

/// `E(t) + ∫₀ᵗ∫ g(u_t)u_t - ½∫₀ᵗ μ' a(u,u) - E(0)` at every record.
///
/// Zero for the exact solution; the magnitude measures discretization
/// error. Records and running integrals must be aligned.
pub fn balance_residuals<T: Real>(records: &[EnergyRecord<T>], work: &[BalanceTerms<T>]) -> Vec<T> {
    assert_eq!(records.len(), work.len(), "records and integrals must align");
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let e0 = first.energy;
    let w0 = work[0];
    records
        .iter()
        .zip(work)
        .map(|(r, w)| {
            r.energy + (w.damping_work - w0.damping_work) - (w.coefficient_work - w0.coefficient_work)
                - e0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CoefficientField, Diffusivity, DomainGrid, TimeCoefficient};
    use crate::model::{DampingLaw, Exponents};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    fn model(k: usize, q: f64, p: f64) -> WaveModel<f64> {
        let grid = DomainGrid::new(PI, k).unwrap();
        let coeff = CoefficientField::new(
            Diffusivity::Constant { value: 1.0 },
            TimeCoefficient::Constant { value: 1.0 },
            &grid,
            1.0,
        )
        .unwrap();
        WaveModel::new(grid, coeff, Exponents::new(q, p).unwrap()).unwrap()
    }

    fn mode(k: usize, j: usize, amp: f64) -> Vec<f64> {
        let mut u = vec![0.0; k];
        u[j] = amp;
        u
    }

    #[test]
    fn log_source_values() {
        assert_eq!(log_source(0.0, 3.0), 0.0);
        assert_eq!(log_source(1.0, 3.0), 0.0);
        assert_eq!(log_source(-1.0, 3.0), 0.0);
        assert!((log_source(E, 3.0) - E * E).abs() < 1e-12);
        assert!((log_source(-2.5_f64, 3.7) + log_source(2.5, 3.7)).abs() < 1e-14);
        // continuity at zero
        assert!(log_source(1e-8_f64, 2.5).abs() < 1e-10);
    }

    #[test]
    fn damping_values() {
        assert_eq!(power_damping(0.7, 0.0), 0.7);
        assert_eq!(power_damping(-2.0, 2.0), -8.0);
        assert_eq!(power_damping(0.0, 1.5), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (a, b): (f64, f64) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let p = rng.random_range(0.0..3.0);
            assert!((power_damping(a, p) - power_damping(b, p)) * (a - b) >= 0.0);
            assert!((power_damping(a, p) * a - a.abs().powf(p + 2.0)).abs() < 1e-9 * (1.0 + a.abs().powf(p + 2.0)));
        }
    }

    #[test]
    fn zero_state_functionals_vanish() {
        let m = model(4, 3.0, 0.0);
        let s = ModalState::zero(4);
        let ms = measures(&m, &s).unwrap();
        assert_eq!(ms.nehari(), 0.0);
        assert_eq!(ms.potential(), 0.0);
        assert_eq!(ms.energy(), 0.0);
        assert_eq!(ms.blowup_f(), 0.0);
        assert_eq!(ms.dissipation_rate(), 0.0);
    }

    #[test]
    fn kinetic_energy_of_unit_velocity() {
        let m = model(4, 3.0, 0.0);
        let s = ModalState::new(0.0, vec![0.0; 4], mode(4, 0, 1.0)).unwrap();
        assert!((total_e(&m, &s).unwrap() - 0.5).abs() < 1e-12);
        assert!((dissipation_rate(&m, &s).unwrap() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn nehari_sign_along_first_mode() {
        let m = model(4, 3.0, 0.0);
        let small = ModalState::new(0.0, mode(4, 0, 1e-3), vec![0.0; 4]).unwrap();
        let large = ModalState::new(0.0, mode(4, 0, 1e3), vec![0.0; 4]).unwrap();
        assert!(nehari_i(&m, &small).unwrap() > 0.0);
        assert!(nehari_i(&m, &large).unwrap() < 0.0);
        assert!(blowup_f(&m, &large).unwrap() < 0.0);
    }

    #[test]
    fn identities_on_random_states() {
        let m = model(8, 3.5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
            let s = ModalState::new(0.0, u, v).unwrap();
            let ms = measures(&m, &s).unwrap();
            let j = ms.potential();
            let scale = 1.0 + j.abs() + ms.a_uu + ms.lq_u;
            assert!((j - ms.potential_via_nehari()).abs() < 1e-12 * scale);
            let e = ms.energy();
            assert!((e - 0.5 * ms.l2_v - j).abs() < 1e-12 * (scale + ms.l2_v));
            let rec = EnergyRecord::from_measures(&ms, None, 0.0);
            assert!((rec.recompose_energy(3.5, 1.0) - e).abs() < 1e-12 * (scale + ms.l2_v));
            assert!(ms.dissipation_rate() <= 0.0);
        }
    }

    #[test]
    fn auxiliary_y_cases() {
        let alpha = Exponents::<f64>::new(5.0, 1.0).unwrap().alpha().unwrap();
        assert!((alpha - 0.2).abs() < 1e-15);
        let g: f64 = 2.0;
        assert!((auxiliary_y(g, 3.0, 0.0, alpha).unwrap() - g.powf(0.8)).abs() < 1e-15);
        assert!((auxiliary_y(g, 0.0, 0.7, alpha).unwrap() - g.powf(0.8)).abs() < 1e-15);
        assert!(auxiliary_y(0.0, 1.0, 0.1, alpha).is_err());
        assert!(auxiliary_y(-1.0, 1.0, 0.1, alpha).is_err());
    }

    #[test]
    fn single_record_balance_is_zero() {
        let m = model(2, 3.0, 0.0);
        let s = ModalState::new(0.0, vec![0.3, 0.1], vec![0.2, 0.0]).unwrap();
        let ms = measures(&m, &s).unwrap();
        let rec = EnergyRecord::from_measures(&ms, None, 0.0);
        assert_eq!(balance_residuals(&[rec], &[BalanceTerms::default()]), vec![0.0]);
    }

    #[test]
    fn csv_round_trip_keeps_missing_y() {
        let m = model(2, 3.0, 0.0);
        let s = ModalState::new(0.5, vec![0.3, 0.1], vec![0.2, 0.0]).unwrap();
        let rec = EnergyRecord::from_measures(&measures(&m, &s).unwrap(), None, 1e-9);
        let back = EnergyRecord::<f64>::from_csv_fields(&rec.csv_fields()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(rec.csv_fields()[5], "");
    }

    #[test]
    fn custom_damping_hook() {
        let m = model(2, 3.0, 0.0).with_damping(DampingLaw::Custom(std::sync::Arc::new(|v: f64| 2.0 * v)));
        let s = ModalState::new(0.0, vec![0.0; 2], vec![1.0, 0.0]).unwrap();
        assert!((measures(&m, &s).unwrap().damping_power - 2.0).abs() < 1e-10);
    }
}
