mod common;

use std::f64::consts::PI;

use common::{decaying_mu, model, model_with, rel, unit, unit_a};
use wavewell::dynamics::{
    galerkin_rhs, initial_state, integrate, integrate_with, stability_cap, BlowupTrigger, InitialShape,
    IntegratorConfig, Outcome, RecordOptions,
};
use wavewell::field::{CoefficientField, Diffusivity, DomainGrid, ModalState, TimeCoefficient};
use wavewell::functionals::total_e;
use wavewell::model::{DampingLaw, Exponents, SourceLaw};
use wavewell::{Error, ModelF32, StateF32};

fn config(t_end: f64) -> IntegratorConfig<f64> {
    IntegratorConfig {
        t_end,
        ..Default::default()
    }
}

#[test]
fn zero_data_is_an_equilibrium() {
    let m = model(16, 3.0, 1.0);
    let z = ModalState::zero(16);
    let (du, dv) = galerkin_rhs(&m, &z).unwrap();
    assert!(du.iter().chain(&dv).all(|&x| x == 0.0));
    let traj = integrate(&m, &z, &config(2.0), &RecordOptions::default()).unwrap();
    assert_eq!(traj.outcome, Outcome::Completed);
    assert!(traj.blowup.is_none());
    assert!(traj.records.iter().all(|r| r.energy == 0.0 && r.l2_u == 0.0 && r.l2_v == 0.0));
    assert_eq!(traj.last().t, 2.0);
}

#[test]
fn undamped_linear_mode_is_harmonic() {
    let m = model(8, 3.0, 0.0)
        .with_source(SourceLaw::Off)
        .with_damping(DampingLaw::Off);
    let s = ModalState::new(0.0, unit(8, 0), vec![0.0; 8]).unwrap();
    let (du, dv) = galerkin_rhs(&m, &s).unwrap();
    assert!(du.iter().all(|&x| x == 0.0));
    assert!((dv[0] + 1.0).abs() < 1e-12);
    assert!(dv[1..].iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn linear_damped_oscillator_closed_form() {
    let m = model(16, 3.0, 0.0).with_source(SourceLaw::Off);
    let s0 = ModalState::new(0.0, unit(16, 0), vec![0.0; 16]).unwrap();
    let traj = integrate(&m, &s0, &config(10.0), &RecordOptions::default()).unwrap();
    assert_eq!(traj.outcome, Outcome::Completed);
    // r'' + r' + r = 0 with r(0) = 1, r'(0) = 0.
    let w = 3f64.sqrt() / 2.0;
    for rec in &traj.records {
        let t = rec.t;
        let r = (-t / 2.0).exp() * ((w * t).cos() + (w * t).sin() / (2.0 * w));
        let dr = -(-t / 2.0).exp() * (w * t).sin() / w;
        let e = 0.5 * (r * r + dr * dr);
        assert!(rel(rec.energy, e) < 1e-6, "t = {t}: {} vs {e}", rec.energy);
    }
    let norms: Vec<f64> = traj.records.iter().map(|r| r.l2_u + r.l2_v).collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn large_negative_energy_data_blows_up() {
    let m = model(32, 3.0, 0.0);
    let s0 = common::mode_state(&m, 1, 20.0, InitialShape::Zero);
    assert!(total_e(&m, &s0).unwrap() < 0.0);
    let traj = integrate(&m, &s0, &config(100.0), &RecordOptions::default()).unwrap();
    assert_eq!(traj.outcome, Outcome::BlowupDetected);
    let rep = traj.blowup.unwrap();
    assert!(rep.t_detect < 100.0);
    assert_eq!(rep.trigger, BlowupTrigger::Threshold);
    assert!(rep.l2_at_detection > 1e8);
    assert!(rep.growth_rate > 0.0);
}

#[test]
fn detection_time_monotone_in_threshold() {
    let m = model(32, 4.0, 0.0);
    let s0 = common::mode_state(&m, 1, 5.0, InitialShape::Zero);
    let mut prev = 0.0;
    for thr in [1e3, 1e4, 1e6, 1e8] {
        let cfg = IntegratorConfig {
            t_end: 100.0,
            blowup_l2_threshold: thr,
            ..Default::default()
        };
        let traj = integrate(&m, &s0, &cfg, &RecordOptions::default()).unwrap();
        let t = traj.blowup.expect("blow-up").t_detect;
        assert!(t >= prev, "threshold {thr}: {t} < {prev}");
        prev = t;
    }
}

#[test]
fn bounded_run_has_no_report_and_records_on_cadence() {
    let m = model_with(16, 3.0, 0.0, unit_a(), decaying_mu());
    let s0 = common::mode_state(&m, 1, 0.1, InitialShape::Zero);
    let cfg = IntegratorConfig {
        t_end: 1.0,
        record_every: 0.1,
        ..Default::default()
    };
    let traj = integrate(&m, &s0, &cfg, &RecordOptions::default()).unwrap();
    assert!(traj.blowup.is_none());
    assert_eq!(traj.records.len(), 11);
    for (i, r) in traj.records.iter().enumerate() {
        assert!((r.t - 0.1 * i as f64).abs() < 1e-12);
    }
    assert_eq!(traj.final_state.t, 1.0);
    assert!(traj.stats.dt_cap <= 0.5 / (2.0 * 256f64).sqrt() + 1e-15);
}

#[test]
fn sink_sees_every_record_and_can_abort() {
    let m = model(8, 3.0, 0.0);
    let s0 = common::mode_state(&m, 1, 0.2, InitialShape::Zero);
    let mut seen = Vec::new();
    let traj = integrate_with(&m, &s0, &config(0.5), &RecordOptions::default(), |r| {
        seen.push(r.t);
        Ok(())
    })
    .unwrap();
    assert_eq!(seen, traj.times());

    let err = integrate_with(&m, &s0, &config(0.5), &RecordOptions::default(), |r| {
        if r.t > 0.2 {
            Err(Error::Degenerate("stop".into()))
        } else {
            Ok(())
        }
    });
    assert!(err.is_err());
}

#[test]
fn auxiliary_functional_recorded_when_requested() {
    // q = 5, p = 1 gives α = 0.2.
    let m = model(16, 5.0, 1.0);
    let s0 = common::mode_state(&m, 1, 5.0, InitialShape::Zero);
    let opts = RecordOptions { y_epsilon: Some(0.1) };
    assert!(total_e(&m, &s0).unwrap() < 0.0);
    let traj = integrate(&m, &s0, &config(0.2), &opts).unwrap();
    assert!(traj.records.iter().all(|r| r.y_available()));
    let plain = integrate(&m, &s0, &config(0.2), &RecordOptions::default()).unwrap();
    assert!(plain.records.iter().all(|r| !r.y_available()));
}

#[test]
fn config_validation() {
    let m = model(4, 3.0, 0.0);
    let s0 = ModalState::zero(4);
    let bad = [
        IntegratorConfig {
            rel_tol: -1.0,
            ..Default::default()
        },
        IntegratorConfig {
            dt_init: 1.0,
            dt_max: 0.1,
            ..Default::default()
        },
        IntegratorConfig {
            t_end: 0.0,
            ..Default::default()
        },
        IntegratorConfig {
            stability_factor: Some(0.0),
            ..Default::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::Config { .. })));
        assert!(integrate(&m, &s0, &cfg, &RecordOptions::default()).is_err());
    }
    assert!(integrate(&m, &ModalState::zero(5), &config(1.0), &RecordOptions::default()).is_err());
    let uncapped = IntegratorConfig {
        stability_factor: None,
        ..Default::default()
    };
    assert_eq!(stability_cap(&m, &uncapped), uncapped.dt_max);
    assert_eq!(stability_cap(&m, &IntegratorConfig::default()), 0.1);
    let wide = IntegratorConfig {
        dt_max: 1.0,
        ..Default::default()
    };
    assert!((stability_cap(&m, &wide) - 0.5 / 4.0).abs() < 1e-12);
}

#[test]
fn initial_shapes_project_onto_basis() {
    let grid = DomainGrid::new(PI, 8).unwrap();
    let mode = InitialShape::Mode { index: 3, amplitude: 2.0 };
    assert_eq!(mode.coefficients(&grid, None).unwrap(), {
        let mut e = vec![0.0; 8];
        e[2] = 2.0;
        e
    });
    assert!(InitialShape::Mode { index: 0, amplitude: 1.0 }.coefficients(&grid, None).is_err());
    assert!(InitialShape::Mode { index: 9, amplitude: 1.0 }.coefficients(&grid, None).is_err());

    let padded = InitialShape::Modal { coeffs: vec![1.0, -1.0] }.coefficients(&grid, None).unwrap();
    assert_eq!(padded.len(), 8);
    assert!(InitialShape::Modal { coeffs: vec![0.0; 9] }.coefficients(&grid, None).is_err());

    let bump = InitialShape::Gaussian {
        amplitude: 1.0,
        center: PI / 2.0,
        width: 0.3,
    };
    let c = bump.coefficients(&grid, None).unwrap();
    // Symmetric about the midpoint: even modes vanish.
    assert!(c[1].abs() < 1e-12 && c[3].abs() < 1e-12);
    let c2 = bump.scaled(2.0).coefficients(&grid, None).unwrap();
    for (a, b) in c.iter().zip(&c2) {
        assert!((2.0 * a - b).abs() < 1e-14);
    }

    let s = initial_state(&grid, &mode, &InitialShape::ScaledDisplacement { factor: 0.5 }).unwrap();
    assert_eq!(s.v[2], 1.0);
    assert!(initial_state(&grid, &InitialShape::ScaledDisplacement { factor: 1.0 }, &InitialShape::Zero).is_err());
}

#[test]
fn single_precision_run() {
    let grid = DomainGrid::<f32>::new(std::f32::consts::PI, 8).unwrap();
    let coeff = CoefficientField::new(
        Diffusivity::Constant { value: 1.0f32 },
        TimeCoefficient::Constant { value: 1.0 },
        &grid,
        10.0,
    )
    .unwrap();
    let m: ModelF32 = ModelF32::new(grid, coeff, Exponents::new(3.0f32, 0.0).unwrap()).unwrap();
    let mut u = vec![0.0f32; 8];
    u[0] = 0.3;
    let s0: StateF32 = ModalState::new(0.0, u, vec![0.0; 8]).unwrap();
    let cfg = IntegratorConfig::<f32> {
        rel_tol: 1e-5,
        abs_tol: 1e-7,
        dt_min: 1e-6,
        t_end: 2.0,
        ..Default::default()
    };
    let traj = integrate(&m, &s0, &cfg, &RecordOptions::default()).unwrap();
    assert_eq!(traj.outcome, Outcome::Completed);
    assert!(traj.last().energy < traj.first().energy);
    assert!(traj.max_balance_residual() < 1e-3 * traj.first().energy);
}


#[test]
fn energy_converges_under_mode_doubling() {
    let end_energy = |modes: usize| {
        let m = model_with(modes, 3.0, 0.0, unit_a(), decaying_mu());
        let s0 = common::mode_state(&m, 1, 0.5, InitialShape::Zero);
        let cfg = IntegratorConfig {
            t_end: 10.0,
            abs_tol: 1e-14,
            ..Default::default()
        };
        integrate(&m, &s0, &cfg, &RecordOptions::default()).unwrap().last().energy
    };
    let (coarse, fine) = (end_energy(32), end_energy(64));
    assert!(rel(coarse, fine) < 1e-4, "{coarse} vs {fine}");
}
