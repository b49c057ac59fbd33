use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::EnergyRecord;
use crate::num::Real;

/// Decay law being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `log E` linear in `t`; the reported rate is minus the slope.
    Exponential,
    /// `E^{-p/2}` linear in `t`, i.e. `E ~ t^{-2/p}`.
    #[serde(rename = "algebraic_2_over_p")]
    AlgebraicTwoOverP,
    /// `E^{-(p+2)/2}` linear in `t`, i.e. `E ~ t^{-2/(p+2)}`.
    #[serde(rename = "algebraic_2_over_p_plus_2")]
    AlgebraicTwoOverPPlusTwo,
}

impl DecayModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayModel::Exponential => "exponential",
            DecayModel::AlgebraicTwoOverP => "algebraic_2_over_p",
            DecayModel::AlgebraicTwoOverPPlusTwo => "algebraic_2_over_p_plus_2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit<T> {
    pub model: DecayModel,
    /// Exponential: decay rate (minus the slope of `log E`). Algebraic:
    /// slope of the transformed energy; positive means decay.
    pub rate_or_slope: T,
    pub window: (T, T),
    /// Coefficient of determination, clamped to `[0, 1]`.
    pub goodness: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport<T> {
    pub fits: Vec<DecayFit<T>>,
    /// Fit with the highest goodness.
    pub best: Option<DecayModel>,
}

/// Default tail fraction of `[1, t_end]` used by [`fit_decay`].
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;

/// Least-squares line `y = a + b t`; returns `(b, R²)`.
pub fn linear_fit<T: Real>(t: &[T], y: &[T]) -> (T, T) {
    let n = T::of_usize(t.len());
    let tm = t.iter().copied().sum::<T>() / n;
    let ym = y.iter().copied().sum::<T>() / n;
    let (mut stt, mut sty, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&ti, &yi) in t.iter().zip(y) {
        let (dt, dy) = (ti - tm, yi - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == T::zero() {
        return (T::zero(), T::zero());
    }
    let b = sty / stt;
    let scale = ym.abs().max(T::min_positive_value());
    if syy <= (T::epsilon() * scale).powi(2) * n {
        return (b, T::one());
    }
    let a = ym - b * tm;
    let ss_res: T = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let r = yi - (a + b * ti);
            r * r
        })
        .sum();
    let r2 = T::one() - ss_res / syy;
    (b, r2.max(T::zero()).min(T::one()))
}

/// Fits the decay laws to the tail `[t₁ - f (t₁ - 1), t₁]` of the
/// energy history (`t₁` the last record time; the whole history when
/// `t₁ ≤ 1`). Exponential for `p = 0`, both algebraic variants for `p > 0`.
pub fn fit_decay<T: Real>(records: &[EnergyRecord<T>], p: T, window_fraction: T) -> Result<DecayReport<T>> {
    if !(window_fraction > T::zero() && window_fraction <= T::one()) {
        return Err(Error::config("fit.window_fraction", "must lie in (0, 1]"));
    }
    let Some(last) = records.last() else {
        return Err(Error::Inapplicable("no records to fit".into()));
    };
    let t1 = last.t;
    let t0 = if t1 > T::one() {
        t1 - window_fraction * (t1 - T::one())
    } else {
        records[0].t
    };
    let window: Vec<&EnergyRecord<T>> = records.iter().filter(|r| r.t >= t0 && r.t <= t1).collect();
    if window.len() < 3 {
        return Err(Error::Inapplicable(format!(
            "decay fit needs at least 3 records in [{t0}, {t1}], found {}",
            window.len()
        )));
    }
    if let Some(bad) = window.iter().find(|r| !(r.energy > T::zero())) {
        return Err(Error::Inapplicable(format!(
            "energy {} at t = {} is not positive",
            bad.energy, bad.t
        )));
    }
    let ts: Vec<T> = window.iter().map(|r| r.t).collect();
    let mut fits = Vec::new();
    if p == T::zero() {
        let y: Vec<T> = window.iter().map(|r| r.energy.ln()).collect();
        let (b, r2) = linear_fit(&ts, &y);
        fits.push(DecayFit {
            model: DecayModel::Exponential,
            rate_or_slope: -b,
            window: (t0, t1),
            goodness: r2,
        });
    } else {
        for (model, expo) in [
            (DecayModel::AlgebraicTwoOverP, -p / T::two()),
            (DecayModel::AlgebraicTwoOverPPlusTwo, -(p + T::two()) / T::two()),
        ] {
            let y: Vec<T> = window.iter().map(|r| (expo * r.energy.ln()).exp()).collect();
            let (b, r2) = linear_fit(&ts, &y);
            fits.push(DecayFit {
                model,
                rate_or_slope: b,
                window: (t0, t1),
                goodness: r2,
            });
        }
    }
    let best = fits
        .iter()
        .fold(None::<&DecayFit<T>>, |acc, f| match acc {
            Some(a) if a.goodness >= f.goodness => Some(a),
            _ => Some(f),
        })
        .map(|f| f.model);
    Ok(DecayReport { fits, best })
}
