use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ModalState;
use crate::functionals::measures;
use crate::model::WaveModel;
use crate::num::{dot, Real};
use crate::varconst::{epsilon_prime, BlowupScalars, WellGeometry};

/// Which of the potential-well sets the initial data lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetMembership {
    /// `a(u₀,u₀) < r_*²` and `0 < E(0) < M`.
    W,
    /// `a(u₀,u₀) > r_*²` and `0 < E(0) < M`.
    #[serde(rename = "V_by_radius")]
    VByRadius,
    /// `E(0) ≤ 0`.
    #[serde(rename = "V_by_energy")]
    VByEnergy,
    #[serde(rename = "neither")]
    Neither,
}

impl SetMembership {
    pub fn as_str(&self) -> &'static str {
        match self {
            SetMembership::W => "W",
            SetMembership::VByRadius => "V_by_radius",
            SetMembership::VByEnergy => "V_by_energy",
            SetMembership::Neither => "neither",
        }
    }
}

/// Predicted long-time behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    GlobalDecayExponential,
    GlobalDecayAlgebraic,
    /// Damping dominates: `q < p + 2`.
    GlobalSubcritical,
    /// Negative initial energy with `q > p + 2`.
    #[serde(rename = "blowup_thm51")]
    BlowupNegativeEnergy,
    /// Outside the well with a large enough initial pairing.
    #[serde(rename = "blowup_thm52")]
    BlowupPositiveEnergy,
    NoPrediction,
}

impl Prediction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Prediction::GlobalDecayExponential => "global_decay_exponential",
            Prediction::GlobalDecayAlgebraic => "global_decay_algebraic",
            Prediction::GlobalSubcritical => "global_subcritical",
            Prediction::BlowupNegativeEnergy => "blowup_thm51",
            Prediction::BlowupPositiveEnergy => "blowup_thm52",
            Prediction::NoPrediction => "no_prediction",
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(
            self,
            Prediction::GlobalDecayExponential | Prediction::GlobalDecayAlgebraic | Prediction::GlobalSubcritical
        )
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, Prediction::BlowupNegativeEnergy | Prediction::BlowupPositiveEnergy)
    }
}

/// Both sides of the pairing condition `⟨u₀,u₁⟩ > h₁(ε′) E(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
    pub eps_prime: T,
    pub h1: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification<T> {
    pub set_membership: SetMembership,
    pub predicted: Prediction,
    #[serde(rename = "E0")]
    pub e0: T,
    pub a_u0u0: T,
    #[serde(rename = "M")]
    pub m: T,
    pub r_star_sq: T,
    pub q: T,
    pub p: T,
    /// `⟨u₀,u₁⟩`, evaluated when the data lies in V by radius.
    #[serde(rename = "thm52_lhs")]
    pub pairing_lhs: Option<T>,
    /// `h₁(ε′) E(0)`.
    #[serde(rename = "thm52_rhs")]
    pub pairing_rhs: Option<T>,
}

/// Set membership from the four comparison operands.
pub fn membership<T: Real>(nonzero: bool, e0: T, a_uu: T, m: T, r_star_sq: T) -> SetMembership {
    if !nonzero {
        SetMembership::Neither
    } else if e0 <= T::zero() {
        SetMembership::VByEnergy
    } else if e0 < m && a_uu < r_star_sq {
        SetMembership::W
    } else if e0 < m && a_uu > r_star_sq {
        SetMembership::VByRadius
    } else {
        SetMembership::Neither
    }
}

/// `⟨u₀,u₁⟩` against `h₁(ε′) E(0)`; requires `q > p + 2`, `0 < E(0) < M`
/// and `a(u₀,u₀) > r_*²`.
pub fn verify_pairing_condition<T: Real>(
    model: &WaveModel<T>,
    state0: &ModalState<T>,
    geometry: &WellGeometry<T>,
) -> Result<PairingCheck<T>> {
    let exps = model.exponents();
    let meas = measures(model, state0)?;
    let e0 = meas.energy();
    let r2 = geometry.r_star * geometry.r_star;
    if !exps.supercritical() {
        return Err(Error::Inapplicable("pairing condition needs q > p + 2".into()));
    }
    if !(e0 > T::zero() && e0 < geometry.m) {
        return Err(Error::Inapplicable(format!(
            "pairing condition needs 0 < E(0) < M, got E(0) = {e0}, M = {}",
            geometry.m
        )));
    }
    if !(meas.a_uu > r2) {
        return Err(Error::Inapplicable(format!(
            "pairing condition needs a(u0,u0) > r_*^2, got {} <= {r2}",
            meas.a_uu
        )));
    }
    let root = epsilon_prime(&BlowupScalars {
        q: exps.q,
        p: exps.p,
        a0: model.coeff().a0(),
        mu0: model.coeff().mu0(),
        b7: geometry.b7,
    })?;
    let lhs = dot(&state0.u, &state0.v);
    let rhs = root.h1 * e0;
    Ok(PairingCheck {
        lhs,
        rhs,
        holds: lhs > rhs,
        eps_prime: root.eps,
        h1: root.h1,
    })
}

/// Classifies initial data and dispatches the applicable prediction.
pub fn classify<T: Real>(
    model: &WaveModel<T>,
    state0: &ModalState<T>,
    geometry: &WellGeometry<T>,
) -> Result<Classification<T>> {
    let exps = *model.exponents();
    let meas = measures(model, state0)?;
    let e0 = meas.energy();
    let r2 = geometry.r_star * geometry.r_star;
    let nonzero = state0.u.iter().any(|&x| x != T::zero());
    let set = membership(nonzero, e0, meas.a_uu, geometry.m, r2);

    let mut lhs = None;
    let mut rhs = None;
    if set == SetMembership::VByRadius && exps.supercritical() {
        let check = verify_pairing_condition(model, state0, geometry)?;
        lhs = Some(check.lhs);
        rhs = Some(check.rhs);
    }
    let predicted = if exps.subcritical() {
        Prediction::GlobalSubcritical
    } else {
        match set {
            SetMembership::W if exps.p == T::zero() => Prediction::GlobalDecayExponential,
            SetMembership::W => Prediction::GlobalDecayAlgebraic,
            SetMembership::VByEnergy if exps.supercritical() => Prediction::BlowupNegativeEnergy,
            SetMembership::VByRadius => match (lhs, rhs) {
                (Some(l), Some(r)) if l > r => Prediction::BlowupPositiveEnergy,
                _ => Prediction::NoPrediction,
            },
            _ => Prediction::NoPrediction,
        }
    };
    Ok(Classification {
        set_membership: set,
        predicted,
        e0,
        a_u0u0: meas.a_uu,
        m: geometry.m,
        r_star_sq: r2,
        q: exps.q,
        p: exps.p,
        pairing_lhs: lhs,
        pairing_rhs: rhs,
    })
}
