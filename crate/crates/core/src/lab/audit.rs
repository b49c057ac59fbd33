use serde::{Deserialize, Serialize};

use crate::dynamics::{Outcome, Trajectory};
use crate::functionals::EnergyRecord;
use crate::num::Real;
use crate::varconst::{theta_bound, WellGeometry};

use super::classify::{Classification, Prediction, SetMembership};

/// Slack multiplier of the energy monotonicity check, in units of
/// `rel_tol · max(1, |E(0)|)`.
pub const MONOTONE_SLACK: f64 = 10.0;
/// Constant of the balance bound `C · rel_tol · max(1, t) · scale`.
pub const BALANCE_CONSTANT: f64 = 100.0;
/// Absolute slack of the `θ` bound check.
pub const THETA_SLACK: f64 = 1e-8;
/// Fraction of the time horizon inspected by the growth check.
pub const GROWTH_WINDOW: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck<T> {
    pub name: String,
    pub applicable: bool,
    pub passed: bool,
    /// Worst-case margin; negative when the check fails.
    pub margin: Option<T>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport<T> {
    pub checks: Vec<AuditCheck<T>>,
}

impl<T: Real> AuditReport<T> {
    /// Every applicable check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| !c.applicable || c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AuditCheck<T>> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&AuditCheck<T>> {
        self.checks.iter().filter(|c| c.applicable && !c.passed).collect()
    }
}

/// Observed long-time behaviour of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observed {
    Global,
    Blowup,
    /// Horizon reached with `‖u‖₂²` still growing monotonically and
    /// super-linearly.
    Growing,
    Undetermined,
}

impl Observed {
    pub fn as_str(&self) -> &'static str {
        match self {
            Observed::Global => "global",
            Observed::Blowup => "blowup",
            Observed::Growing => "growing",
            Observed::Undetermined => "undetermined",
        }
    }
}

/// Whether `‖u‖₂²` increases strictly over the last `fraction` of the
/// horizon with a larger mean slope in the second half of that window
/// than in the first.
pub fn superlinear_growth<T: Real>(records: &[EnergyRecord<T>], fraction: T) -> bool {
    let Some(last) = records.last() else {
        return false;
    };
    let t_start = records[0].t;
    let t0 = last.t - fraction * (last.t - t_start);
    let w: Vec<&EnergyRecord<T>> = records.iter().filter(|r| r.t >= t0).collect();
    if w.len() < 5 {
        return false;
    }
    if !w.windows(2).all(|p| p[1].l2_u > p[0].l2_u) {
        return false;
    }
    let mid = w.len() / 2;
    let slope = |a: &EnergyRecord<T>, b: &EnergyRecord<T>| (b.l2_u - a.l2_u) / (b.t - a.t);
    let s1 = slope(w[0], w[mid]);
    let s2 = slope(w[mid], w[w.len() - 1]);
    s1 > T::zero() && s2 > s1
}

pub fn observed<T: Real>(traj: &Trajectory<T>) -> Observed {
    match traj.outcome {
        Outcome::BlowupDetected => Observed::Blowup,
        Outcome::StepUnderflow => Observed::Undetermined,
        Outcome::Completed if superlinear_growth(&traj.records, T::lit(GROWTH_WINDOW)) => Observed::Growing,
        Outcome::Completed => Observed::Global,
    }
}

/// Whether the observed behaviour agrees with the prediction; `None` when
/// nothing was predicted.
pub fn prediction_matches(predicted: Prediction, observed: Observed) -> Option<bool> {
    match predicted {
        Prediction::NoPrediction => None,
        Prediction::BlowupPositiveEnergy => Some(matches!(observed, Observed::Blowup | Observed::Growing)),
        Prediction::BlowupNegativeEnergy => Some(observed == Observed::Blowup),
        // Global existence without a decay claim: unbounded growth over
        // infinite time is allowed.
        Prediction::GlobalSubcritical => Some(matches!(observed, Observed::Global | Observed::Growing)),
        Prediction::GlobalDecayExponential | Prediction::GlobalDecayAlgebraic => Some(observed == Observed::Global),
    }
}

fn check<T>(name: &str, passed: bool, margin: Option<T>, detail: String) -> AuditCheck<T> {
    AuditCheck {
        name: name.to_string(),
        applicable: true,
        passed,
        margin,
        detail,
    }
}

fn skipped<T>(name: &str, why: &str) -> AuditCheck<T> {
    AuditCheck {
        name: name.to_string(),
        applicable: false,
        passed: true,
        margin: None,
        detail: why.to_string(),
    }
}

/// Magnitude of the parts of the energy at a record: the balance bound is
/// relative to this once it exceeds `max(1, |E(0)|)`.
fn energy_scale<T: Real>(r: &EnergyRecord<T>, q: T) -> T {
    T::half() * r.l2_v + T::half() * r.mu_a().abs() + r.log_moment.abs() / q + r.lq_u / (q * q)
}

/// Audits a trajectory against the invariants implied by its
/// classification.
pub fn audit<T: Real>(
    traj: &Trajectory<T>,
    cls: &Classification<T>,
    geometry: &WellGeometry<T>,
    rel_tol: T,
) -> AuditReport<T> {
    let recs = &traj.records;
    let e0 = recs[0].energy;
    let unit = T::one().max(e0.abs());
    let mut checks = Vec::new();

    let slack = T::lit(MONOTONE_SLACK) * rel_tol * unit;
    let worst_rise = recs
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(T::neg_infinity(), T::max);
    if recs.len() < 2 {
        checks.push(check("energy_monotone", true, None, "single record".into()));
    } else {
        checks.push(check(
            "energy_monotone",
            worst_rise <= slack,
            Some(slack - worst_rise),
            format!("largest increase {worst_rise:e} against slack {slack:e}"),
        ));
    }

    let mut worst = T::infinity();
    let mut worst_t = T::zero();
    for r in recs {
        let scale = unit.max(energy_scale(r, cls.q));
        let bound = T::lit(BALANCE_CONSTANT) * rel_tol * T::one().max(r.t) * scale;
        let m = bound - r.balance_residual.abs();
        if m < worst {
            worst = m;
            worst_t = r.t;
        }
    }
    checks.push(check(
        "balance_bound",
        worst >= T::zero(),
        Some(worst),
        format!("tightest at t = {worst_t:e}"),
    ));

    let is_w = cls.set_membership == SetMembership::W;
    if is_w {
        let max_a = recs.iter().map(|r| r.a_uu).fold(T::neg_infinity(), T::max);
        let margin = cls.r_star_sq - max_a;
        checks.push(check(
            "w_confinement",
            margin > T::zero(),
            Some(margin),
            format!("max a(u,u) = {max_a:e}, r_*^2 = {:e}", cls.r_star_sq),
        ));
    } else {
        checks.push(skipped("w_confinement", "initial data not in W"));
    }

    if cls.set_membership == SetMembership::VByRadius {
        let worst = recs
            .iter()
            .map(|r| r.blowup_f.max(r.nehari))
            .fold(T::neg_infinity(), T::max);
        checks.push(check(
            "v_persistence",
            worst < T::zero(),
            Some(-worst),
            format!("largest of F and I over the records: {worst:e}"),
        ));
    } else {
        checks.push(skipped("v_persistence", "initial data not in V by radius"));
    }

    match (is_w, theta_bound(geometry.m, e0, cls.q)) {
        (true, Ok(theta)) => {
            let margin = recs
                .iter()
                .map(|r| r.nehari - theta * r.mu_a())
                .fold(T::infinity(), T::min);
            checks.push(check(
                "theta_bound",
                margin >= -T::lit(THETA_SLACK),
                Some(margin),
                format!("theta = {theta:e}"),
            ));
        }
        (true, Err(e)) => checks.push(skipped("theta_bound", &e.to_string())),
        (false, _) => checks.push(skipped("theta_bound", "initial data not in W")),
    }

    let obs = observed(traj);
    if cls.predicted == Prediction::BlowupPositiveEnergy {
        let ok = matches!(obs, Observed::Blowup | Observed::Growing);
        checks.push(check(
            "pairing_blowup_growth",
            ok,
            None,
            format!("observed {}", obs.as_str()),
        ));
    } else {
        checks.push(skipped("pairing_blowup_growth", "positive-energy blow-up not predicted"));
    }

    match prediction_matches(cls.predicted, obs) {
        Some(ok) => checks.push(check(
            "prediction_match",
            ok,
            None,
            format!("predicted {}, observed {}", cls.predicted.as_str(), obs.as_str()),
        )),
        None => checks.push(skipped("prediction_match", "no prediction")),
    }

    AuditReport { checks }
}
