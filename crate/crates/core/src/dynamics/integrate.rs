use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ModalState;
use crate::functionals::{auxiliary_y, measures, BalanceTerms, EnergyRecord};
use crate::model::{DampingLaw, SourceLaw, WaveModel};
use crate::num::{norm_sq, Real};

use super::dopri::Dopri5;
use super::rhs::GalerkinSystem;

/// Adaptive time-stepping and recording settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub dt_init: T,
    pub dt_min: T,
    pub dt_max: T,
    pub t_end: T,
    /// Run stops once `‖u‖₂²` exceeds this.
    pub blowup_l2_threshold: T,
    pub record_every: T,
    /// Step cap `factor / sqrt(μ(0) λ_max(S))`; `None` disables the cap.
    pub stability_factor: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            dt_init: T::lit(1e-3),
            dt_min: T::lit(1e-12),
            dt_max: T::lit(1e-1),
            t_end: T::lit(10.0),
            blowup_l2_threshold: T::lit(1e8),
            record_every: T::lit(1e-2),
            stability_factor: Some(T::lit(DEFAULT_STABILITY_FACTOR)),
            max_steps: 20_000_000,
        }
    }
}

/// Default step cap factor relative to the period scale of the fastest
/// linear mode.
pub const DEFAULT_STABILITY_FACTOR: f64 = 0.5;

impl<T: Real> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, x: T| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be positive and finite, got {x}")))
            }
        };
        pos("integrator.rel_tol", self.rel_tol)?;
        pos("integrator.abs_tol", self.abs_tol)?;
        pos("integrator.dt_min", self.dt_min)?;
        pos("integrator.t_end", self.t_end)?;
        pos("integrator.record_every", self.record_every)?;
        pos("integrator.blowup_l2_threshold", self.blowup_l2_threshold)?;
        if !(self.dt_min < self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::config(
                "integrator.dt_init",
                format!(
                    "need dt_min < dt_init <= dt_max, got {} / {} / {}",
                    self.dt_min, self.dt_init, self.dt_max
                ),
            ));
        }
        if let Some(f) = self.stability_factor {
            pos("integrator.stability_factor", f)?;
        }
        if self.max_steps == 0 {
            return Err(Error::config("integrator.max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// Per-record extras.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RecordOptions<T> {
    /// `ε` of the auxiliary functional `Y`; `Y` is recorded only when set.
    pub y_epsilon: Option<T>,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    BlowupDetected,
    StepUnderflow,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::BlowupDetected => "blowup_detected",
            Outcome::StepUnderflow => "step_underflow",
        }
    }
}

/// What tripped the blow-up detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupTrigger {
    Threshold,
    NonFinite,
    StepCollapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport<T> {
    pub t_detect: T,
    /// `‖u‖₂²` at detection.
    pub l2_at_detection: T,
    /// e-folding rate of `‖u‖₂²` over its last tenfold rise.
    pub growth_rate: T,
    pub trigger: BlowupTrigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats<T> {
    pub accepted: usize,
    pub rejected: usize,
    /// Effective upper step bound after the stability cap.
    pub dt_cap: T,
}

/// Recorded history of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub records: Vec<EnergyRecord<T>>,
    pub work: Vec<BalanceTerms<T>>,
    pub outcome: Outcome,
    pub blowup: Option<BlowupReport<T>>,
    pub stats: StepStats<T>,
    /// State at the last recorded time.
    pub final_state: ModalState<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn first(&self) -> &EnergyRecord<T> {
        &self.records[0]
    }

    pub fn last(&self) -> &EnergyRecord<T> {
        self.records.last().expect("trajectory has at least one record")
    }

    /// Largest `|balance residual|` over the records.
    pub fn max_balance_residual(&self) -> T {
        self.records
            .iter()
            .map(|r| r.balance_residual.abs())
            .fold(T::zero(), T::max)
    }

    pub fn times(&self) -> Vec<T> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// Integrates from `state0` to `config.t_end`, keeping every record.
pub fn integrate<T: Real>(
    model: &WaveModel<T>,
    state0: &ModalState<T>,
    config: &IntegratorConfig<T>,
    options: &RecordOptions<T>,
) -> Result<Trajectory<T>> {
    integrate_with(model, state0, config, options, |_| Ok(()))
}

/// Like [`integrate`], additionally handing each record to `sink` as soon as
/// it is produced.
pub fn integrate_with<T: Real>(
    model: &WaveModel<T>,
    state0: &ModalState<T>,
    config: &IntegratorConfig<T>,
    options: &RecordOptions<T>,
    mut sink: impl FnMut(&EnergyRecord<T>) -> Result<()>,
) -> Result<Trajectory<T>> {
    config.validate()?;
    let k = model.n_modes();
    if state0.u.len() != k || state0.v.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: state0.u.len(),
        });
    }
    let t0 = state0.t;
    if !(config.t_end > t0) {
        return Err(Error::config("integrator.t_end", "must exceed the initial time"));
    }

    let dt_cap = stability_cap(model, config);
    let mut sys = GalerkinSystem::new(model);
    let dim = sys.dim();
    let mut rk = Dopri5::new(dim);
    let mut y = Vec::with_capacity(dim);
    y.extend_from_slice(&state0.u);
    y.extend_from_slice(&state0.v);
    y.extend([T::zero(), T::zero()]);
    sys.eval(t0, &y, rk.first_stage_mut())?;

    let alpha = auxiliary_alpha(model);
    let m0 = measures(model, state0)?;
    let e0 = m0.energy();
    let mut recorder = Recorder {
        model,
        options,
        alpha,
        e0,
        records: Vec::new(),
        work: Vec::new(),
        last_state: state0.clone(),
    };
    recorder.push(t0, &y, &mut sink)?;

    let mut t = t0;
    let mut h = config.dt_init.min(dt_cap);
    let mut stats = StepStats {
        accepted: 0,
        rejected: 0,
        dt_cap,
    };
    let l2_0 = norm_sq(&state0.u);
    let mut history: Vec<(T, T)> = vec![(t0, l2_0)];
    let mut record_index = 1usize;
    let mut t_next = next_record_time(t0, config, record_index);
    let mut outcome = Outcome::Completed;
    let mut blowup = None;

    loop {
        if stats.accepted + stats.rejected >= config.max_steps {
            warn!("step budget of {} exhausted at t = {t}", config.max_steps);
            outcome = Outcome::StepUnderflow;
            break;
        }
        let clipped = h >= t_next - t;
        let h_try = if clipped { t_next - t } else { h };
        let attempt = rk.attempt(t, &y, h_try, |tt, yy, dy| sys.eval(tt, yy, dy));
        let err = match attempt {
            Ok(()) => rk.error_norm(&y, config.rel_tol, config.abs_tol),
            Err(_) => T::infinity(),
        };
        if err <= T::one() && rk.y_new.iter().all(|x| x.is_finite()) {
            t = if clipped { t_next } else { t + h_try };
            y.copy_from_slice(&rk.y_new);
            rk.accept();
            stats.accepted += 1;
            let l2 = norm_sq(&y[..k]);
            history.push((t, l2));

            let fac = step_factor(err, false);
            h = if clipped { h.max(h_try * fac) } else { h_try * fac };
            h = h.min(dt_cap);

            if l2 > config.blowup_l2_threshold {
                if !recorder.push(t, &y, &mut sink)? {
                    debug!("final state at t = {t} has non-finite functionals");
                }
                outcome = Outcome::BlowupDetected;
                blowup = Some(report(&history, BlowupTrigger::Threshold));
                break;
            }
            if clipped {
                if !recorder.push(t, &y, &mut sink)? {
                    outcome = Outcome::BlowupDetected;
                    blowup = Some(report(&history, BlowupTrigger::NonFinite));
                    break;
                }
                if t >= config.t_end {
                    break;
                }
                record_index += 1;
                t_next = next_record_time(t0, config, record_index);
            }
        } else {
            stats.rejected += 1;
            let fac = step_factor(err, true);
            h = h_try * fac;
            if h < config.dt_min {
                let l2 = norm_sq(&y[..k]);
                if recorder.last_t() < t {
                    recorder.push(t, &y, &mut sink)?;
                }
                let growing = l2 >= T::lit(1e3) * l2_0.max(T::one());
                if growing || !err.is_finite() {
                    outcome = Outcome::BlowupDetected;
                    blowup = Some(report(&history, BlowupTrigger::StepCollapse));
                } else {
                    outcome = Outcome::StepUnderflow;
                }
                break;
            }
        }
    }

    let Recorder {
        records,
        work,
        last_state,
        ..
    } = recorder;
    Ok(Trajectory {
        records,
        work,
        outcome,
        blowup,
        stats,
        final_state: last_state,
    })
}

fn next_record_time<T: Real>(t0: T, config: &IntegratorConfig<T>, index: usize) -> T {
    (t0 + config.record_every * T::of_usize(index)).min(config.t_end)
}

fn step_factor<T: Real>(err: T, rejected: bool) -> T {
    if !err.is_finite() {
        return T::lit(0.1);
    }
    let raw = if err == T::zero() {
        T::lit(5.0)
    } else {
        T::lit(0.9) * err.powf(T::lit(-0.2))
    };
    let hi = if rejected { T::one() } else { T::lit(5.0) };
    raw.max(T::lit(0.2)).min(hi)
}

/// `min(dt_max, factor / sqrt(μ(0) λ_max(S)))`.
pub fn stability_cap<T: Real>(model: &WaveModel<T>, config: &IntegratorConfig<T>) -> T {
    let Some(factor) = config.stability_factor else {
        return config.dt_max;
    };
    let lam_max = model
        .stiffness()
        .eigenvalues()
        .last()
        .copied()
        .unwrap_or(T::zero());
    let omega_sq = model.coeff().mu(T::zero()) * lam_max;
    if omega_sq > T::zero() {
        config.dt_max.min(factor / omega_sq.sqrt())
    } else {
        config.dt_max
    }
}

fn auxiliary_alpha<T: Real>(model: &WaveModel<T>) -> Option<T> {
    let standard = matches!(model.source(), SourceLaw::Logarithmic)
        && matches!(model.damping(), DampingLaw::Power);
    if standard {
        model.exponents().alpha()
    } else {
        None
    }
}

fn report<T: Real>(history: &[(T, T)], trigger: BlowupTrigger) -> BlowupReport<T> {
    let &(t_det, l2_det) = history.last().expect("history is never empty");
    let start = history
        .iter()
        .rev()
        .find(|(_, l2)| *l2 * T::lit(10.0) <= l2_det)
        .unwrap_or(&history[0]);
    let dt = t_det - start.0;
    let growth_rate = if dt > T::zero() && start.1 > T::zero() && l2_det.is_finite() {
        (l2_det / start.1).ln() / dt
    } else {
        T::nan()
    };
    BlowupReport {
        t_detect: t_det,
        l2_at_detection: l2_det,
        growth_rate,
        trigger,
    }
}

struct Recorder<'a, T> {
    model: &'a WaveModel<T>,
    options: &'a RecordOptions<T>,
    alpha: Option<T>,
    e0: T,
    records: Vec<EnergyRecord<T>>,
    work: Vec<BalanceTerms<T>>,
    last_state: ModalState<T>,
}

impl<T: Real> Recorder<'_, T> {
    fn last_t(&self) -> T {
        self.records.last().map(|r| r.t).unwrap_or(T::neg_infinity())
    }

    fn push(
        &mut self,
        t: T,
        y: &[T],
        sink: &mut impl FnMut(&EnergyRecord<T>) -> Result<()>,
    ) -> Result<bool> {
        let k = self.model.n_modes();
        let state = ModalState {
            t,
            u: y[..k].to_vec(),
            v: y[k..2 * k].to_vec(),
        };
        let m = match measures(self.model, &state) {
            Ok(m) => m,
            Err(Error::NonFinite { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let energy = m.energy();
        let work = BalanceTerms {
            damping_work: y[2 * k],
            coefficient_work: y[2 * k + 1],
        };
        let residual = energy + work.damping_work - work.coefficient_work - self.e0;
        let y_aux = match (self.options.y_epsilon, self.alpha) {
            (Some(eps), Some(alpha)) => auxiliary_y(-energy, m.pairing, eps, alpha).ok(),
            _ => None,
        };
        let record = EnergyRecord::from_measures(&m, y_aux, residual);
        sink(&record)?;
        self.records.push(record);
        self.work.push(work);
        self.last_state = state;
        Ok(true)
    }
}
