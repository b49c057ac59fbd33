//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::{decaying_mu, model_with, unit_a, unit_mu};
use wavewell::dynamics::{integrate, InitialShape, Outcome, RecordOptions};
use wavewell::field::{assemble_stiffness, Diffusivity, DomainGrid, TimeCoefficient};
use wavewell::functionals::{measures, total_e};
use wavewell::lab::{
    audit, classify, fit_decay, observed, prediction_matches, DecayModel, Prediction, SetMembership,
    DEFAULT_WINDOW_FRACTION,
};
use wavewell::varconst::{
    blowup_time_bound, epsilon_prime, mountain_pass_lambda, sample_directions, well_geometry, BlowupScalars,
    GeometryOptions, RayProfile,
};
use wavewell::{Model, Run, Settings, State};

struct Verdict {
    pass: bool,
    detail: String,
    /// Trajectories and their `rel_tol`, reused by the monotonicity check.
    runs: Vec<(String, Run, f64)>,
}

impl Verdict {
    fn new() -> Self {
        Self {
            pass: true,
            detail: String::new(),
            runs: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        if !ok {
            self.pass = false;
            self.detail.push_str("FAILED ");
        }
        self.detail.push_str(&what);
    }
}

fn run(m: &Model, s0: &State, cfg: &Settings) -> Run {
    integrate(m, s0, cfg, &RecordOptions::default()).expect("integration")
}

fn w1(m: &Model, amplitude: f64, velocity: InitialShape<f64>) -> State {
    common::mode_state(m, 1, amplitude, velocity)
}

/// Amplitude of `w₁` at which `E(0)` changes sign.
fn zero_energy_amplitude(m: &Model) -> f64 {
    let e = |a: f64| total_e(m, &w1(m, a, InitialShape::Zero)).unwrap();
    let (mut lo, mut hi) = (1.0, 100.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if e(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn energy_balance() -> Verdict {
    let mut v = Verdict::new();
    let m = model_with(64, 3.0, 0.0, unit_a(), decaying_mu());
    let s0 = w1(&m, 0.1, InitialShape::Zero);
    let base = Settings {
        t_end: 10.0,
        ..Default::default()
    };
    let traj = run(&m, &s0, &base);
    let scale = traj.first().energy.abs().max(1.0);
    let worst = traj.max_balance_residual() / scale;
    v.check(worst < 1e-5, format!("max |residual|/max(1,E0) = {worst:.2e} at rel_tol 1e-8"));
    let c_bound = traj
        .records
        .iter()
        .all(|r| r.balance_residual.abs() <= 100.0 * base.rel_tol * r.t.max(1.0) * scale);
    v.check(c_bound, "within 100*rel_tol*max(1,t)*max(1,|E0|)");
    let tight = |rel: f64| {
        let cfg = Settings {
            rel_tol: rel,
            abs_tol: rel * 1e-2,
            ..base
        };
        run(&m, &s0, &cfg).max_balance_residual()
    };
    let (a, b) = (tight(1e-12), tight(1e-13));
    v.check(a / b >= 5.0, format!("rel_tol 1e-12 -> 1e-13: {a:.2e} -> {b:.2e} (x{:.1})", a / b));
    v.runs.push(("reference".into(), traj, base.rel_tol));
    v
}

fn well_inequalities() -> Verdict {
    let mut v = Verdict::new();
    for q in [2.5, 3.0, 4.0] {
        for (name, a) in [
            ("A=1", Diffusivity::Constant { value: 1.0 }),
            ("A=1+x/pi", Diffusivity::Linear { intercept: 1.0, slope: 1.0 / PI }),
        ] {
            let m = model_with(16, q, 0.0, a, unit_mu());
            let g = well_geometry(&m, &GeometryOptions::default()).unwrap();
            let mut signs = true;
            for u in sample_directions::<f64>(16, 50, 1) {
                let l = mountain_pass_lambda(&m, &u, 1.0).unwrap();
                let ray = RayProfile::new(&m, &u, 1.0).unwrap();
                signs &= ray.nehari(0.5 * l) > 0.0 && ray.nehari(2.0 * l) < 0.0;
                signs &= ray.potential(l) >= ray.potential(0.5 * l) && ray.potential(l) >= ray.potential(2.0 * l);
            }
            v.check(
                g.r_star <= g.rho_star && g.d_estimate >= g.m && signs,
                format!(
                    "q={q} {name}: r*={:.4} rho*={:.4} M={:.4} d={:.4}",
                    g.r_star, g.rho_star, g.m, g.d_estimate
                ),
            );
        }
    }
    v
}

/// W-start runs with `p = 0` and `p = 1`; covers confinement, decay and the
/// `θ` bound.
fn stable_runs() -> (Verdict, Verdict) {
    let mut decay = Verdict::new();
    let mut theta = Verdict::new();
    for (p, t_end, abs_tol) in [(0.0, 30.0, 1e-16), (1.0, 40.0, 1e-14)] {
        let m = model_with(64, 3.0, p, unit_a(), decaying_mu());
        let g = well_geometry(&m, &GeometryOptions::default()).unwrap();
        let s0 = w1(&m, 0.5, InitialShape::Zero);
        let cls = classify(&m, &s0, &g).unwrap();
        let cfg = Settings {
            t_end,
            abs_tol,
            record_every: 0.05,
            ..Default::default()
        };
        let traj = run(&m, &s0, &cfg);
        let rep = audit(&traj, &cls, &g, cfg.rel_tol);
        let conf = rep.get("w_confinement").unwrap();
        decay.check(
            cls.set_membership == SetMembership::W && conf.applicable && conf.passed,
            format!("p={p}: W start, r*^2 - max a(u,u) = {:.3e}", conf.margin.unwrap_or(f64::NAN)),
        );
        let matched = prediction_matches(cls.predicted, observed(&traj)) == Some(true);
        decay.check(
            matched,
            format!("predicted {} observed {}", cls.predicted.as_str(), observed(&traj).as_str()),
        );
        match fit_decay(&traj.records, p, DEFAULT_WINDOW_FRACTION) {
            Ok(fits) => {
                let target = if p == 0.0 {
                    DecayModel::Exponential
                } else {
                    DecayModel::AlgebraicTwoOverP
                };
                for f in &fits.fits {
                    let line = format!(
                        "{} slope {:.4} R2 {:.4}",
                        f.model.as_str(),
                        f.rate_or_slope,
                        f.goodness
                    );
                    if f.model == target {
                        decay.check(f.rate_or_slope > 0.0 && f.goodness >= 0.99, line);
                    } else {
                        decay.check(true, format!("reported {line}"));
                    }
                }
                if p > 0.0 {
                    decay.check(fits.fits.len() == 2, "both algebraic variants reported");
                }
            }
            Err(e) => decay.check(false, format!("p={p}: fit failed: {e}")),
        }
        let th = rep.get("theta_bound").unwrap();
        theta.check(
            th.applicable && th.passed,
            format!(
                "p={p}: min I - theta*mu*a = {:.3e} ({})",
                th.margin.unwrap_or(f64::NAN),
                th.detail
            ),
        );
        decay.runs.push((format!("W start p={p}"), traj, cfg.rel_tol));
    }
    (decay, theta)
}

fn negative_energy_blowup() -> Verdict {
    let mut v = Verdict::new();
    let probe = model_with(64, 4.0, 0.0, unit_a(), decaying_mu());
    let amp = 1.1 * zero_energy_amplitude(&probe);
    let mut times = Vec::new();
    for modes in [64, 128] {
        let m = model_with(modes, 4.0, 0.0, unit_a(), decaying_mu());
        let s0 = w1(&m, amp, InitialShape::Zero);
        let g = well_geometry(&m, &GeometryOptions::default()).unwrap();
        let cls = classify(&m, &s0, &g).unwrap();
        v.check(
            cls.e0 <= 0.0 && cls.predicted == Prediction::BlowupNegativeEnergy,
            format!("{modes} modes: E0 = {:.3}", cls.e0),
        );
        for thr in [1e6, 1e8] {
            let cfg = Settings {
                t_end: 100.0,
                blowup_l2_threshold: thr,
                ..Default::default()
            };
            let traj = run(&m, &s0, &cfg);
            let t = traj.blowup.map(|b| b.t_detect).unwrap_or(f64::INFINITY);
            v.check(
                traj.outcome == Outcome::BlowupDetected && t < 100.0,
                format!("{modes} modes thr {thr:.0e}: t_detect {t:.4}"),
            );
            times.push(t);
            v.runs.push((format!("negative energy {modes}/{thr:.0e}"), traj, cfg.rel_tol));
        }
    }
    let thr_gap = ((times[0] - times[1]).abs() / times[1]).max((times[2] - times[3]).abs() / times[3]);
    v.check(thr_gap < 0.05, format!("threshold spread {:.2}%", 100.0 * thr_gap));
    let mode_gap = (times[1] - times[3]).abs() / times[1];
    v.check(mode_gap < 0.10, format!("64 vs 128 modes spread {:.2}%", 100.0 * mode_gap));
    v
}

fn positive_energy_blowup() -> Verdict {
    let mut v = Verdict::new();
    let m = model_with(32, 4.0, 0.0, unit_a(), decaying_mu());
    let g = well_geometry(&m, &GeometryOptions::default()).unwrap();
    let amp = 0.995 * zero_energy_amplitude(&m);
    let found = (0..40).map(|i| 0.02 * i as f64).find_map(|c| {
        let s0 = w1(&m, amp, InitialShape::ScaledDisplacement { factor: c });
        let cls = classify(&m, &s0, &g).ok()?;
        (cls.predicted == Prediction::BlowupPositiveEnergy).then_some((c, s0, cls))
    });
    let Some((c, s0, cls)) = found else {
        v.check(false, "no velocity factor on the scan satisfies the pairing condition");
        return v;
    };
    v.check(
        cls.set_membership == SetMembership::VByRadius && cls.e0 > 0.0 && cls.e0 < cls.m,
        format!(
            "c = {c:.2}: E0 = {:.4} in (0, M = {:.4}), a(u0,u0) = {:.3} > r*^2 = {:.3}, lhs {:.4} > rhs {:.4}",
            cls.e0,
            cls.m,
            cls.a_u0u0,
            cls.r_star_sq,
            cls.pairing_lhs.unwrap(),
            cls.pairing_rhs.unwrap()
        ),
    );
    let cfg = Settings {
        t_end: 100.0,
        ..Default::default()
    };
    let traj = run(&m, &s0, &cfg);
    let rep = audit(&traj, &cls, &g, cfg.rel_tol);
    let growth = rep.get("pairing_blowup_growth").unwrap();
    v.check(growth.passed, format!("{} at t = {:.4}", growth.detail, traj.last().t));
    let pers = rep.get("v_persistence").unwrap();
    v.check(pers.applicable && pers.passed, format!("F<0 and I<0 at all records: {}", pers.detail));
    v.runs.push(("positive energy".into(), traj, cfg.rel_tol));
    v
}

fn epsilon_root() -> Verdict {
    let mut v = Verdict::new();
    let s = BlowupScalars {
        q: 4.0_f64,
        p: 0.0,
        a0: 1.0,
        mu0: 1.0,
        b7: 1.0,
    };
    let r = epsilon_prime(&s).unwrap();
    let res = (r.h1 - r.h3).abs();
    v.check(res < 1e-10 * r.h1, format!("eps' = {:.12}, |h1-h3| = {res:.1e}", r.eps));
    v.check(r.eps > 0.0 && r.eps < 0.5, "eps' in (0, 0.5)");
    let lim = s.h3(1e-9);
    let target = 2.0 / 3f64.sqrt();
    v.check((lim - target).abs() < 1e-6, format!("h3(1e-9) = {lim:.9} vs 2/sqrt(3)"));
    v.check(s.h1(1e-12) > 1e6 && s.h3(0.5 - 1e-12) > 1e5, "h1 and h3 diverge at the bracket ends");
    v
}

fn subcritical_global() -> Verdict {
    let mut v = Verdict::new();
    let m = model_with(16, 3.0, 2.0, unit_a(), decaying_mu());
    let g = well_geometry(&m, &GeometryOptions::default()).unwrap();
    let s0 = w1(&m, 6.0, InitialShape::Zero);
    let cls = classify(&m, &s0, &g).unwrap();
    v.check(
        cls.e0 < 0.0 && cls.predicted == Prediction::GlobalSubcritical,
        format!("E0 = {:.3}, predicted {}", cls.e0, cls.predicted.as_str()),
    );
    let cfg = Settings {
        t_end: 20.0,
        ..Default::default()
    };
    let traj = run(&m, &s0, &cfg);
    v.check(
        traj.outcome == Outcome::Completed && traj.blowup.is_none() && traj.last().t == 20.0,
        format!(
            "{} at t = {}, no detection, max ||u||^2 = {:.3e}",
            traj.outcome.as_str(),
            traj.last().t,
            traj.records.iter().map(|r| r.l2_u).fold(0.0, f64::max)
        ),
    );
    v.runs.push(("subcritical".into(), traj, cfg.rel_tol));
    v
}

fn oracles() -> Verdict {
    let mut v = Verdict::new();

    let grid = DomainGrid::new(PI, 2).unwrap();
    let s = assemble_stiffness(&grid, &Diffusivity::Linear { intercept: 1.0, slope: 1.0 }).unwrap();
    let n = 1_000_000;
    let h = PI / n as f64;
    let f = |x: f64| (1.0 + x) * (2.0 / PI) * x.cos().powi(2);
    let trap = h * ((1..n).map(|i| f(i as f64 * h)).sum::<f64>() + 0.5 * (f(0.0) + f(PI)));
    let e = (s.get(0, 0) - trap).abs() / trap;
    v.check(e < 1e-10, format!("stiffness vs trapezoid: rel {e:.1e}"));

    let m = model_with(16, 3.0, 0.0, unit_a(), TimeCoefficient::Constant { value: 1.0 });
    let mut u = vec![0.0; 16];
    u[0] = 1.0;
    let l = mountain_pass_lambda(&m, &u, 1.0).unwrap();
    let nehari = |x: f64| {
        let st = State::new(0.0, u.iter().map(|c| c * x).collect(), vec![0.0; 16]).unwrap();
        measures(&m, &st).unwrap().nehari()
    };
    let mut x = 1e-3;
    while nehari(x) > 0.0 {
        x += 1e-3;
    }
    x -= 1e-3;
    while nehari(x) > 0.0 {
        x += 1e-6;
    }
    v.check((x - l).abs() <= 1e-6, format!("lambda* = {l:.9} vs scan {x:.9}"));

    let mut worst: f64 = 0.0;
    for (y0, xi, alpha) in [(1.0, 1.0, 0.2), (0.3, 2.0, 0.1), (5.0, 0.4, 0.45)] {
        let t_star = blowup_time_bound(y0, xi, alpha).unwrap();
        let k = 1.0 / (1.0 - alpha);
        let rhs = |y: f64| xi * y.powf(k);
        let dt = t_star * 1e-6;
        let (mut t, mut y) = (0.0, y0);
        while y <= 1e12 && t < 2.0 * t_star {
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * dt * k1);
            let k3 = rhs(y + 0.5 * dt * k2);
            let k4 = rhs(y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        let exact = t_star * (1.0 - (y0 / 1e12).powf(alpha / (1.0 - alpha)));
        v.check(t <= t_star * (1.0 + 1e-6), format!("ODE crossing {t:.6} <= T* {t_star:.6}"));
        worst = worst.max((t - exact).abs() / t_star);
    }
    v.check(worst < 1e-4, format!("crossing vs closed form: {worst:.1e} of T*"));

    let synthetic = |f: &dyn Fn(f64) -> f64| -> Vec<wavewell::Record> {
        (0..=1000)
            .map(|i| {
                let t = i as f64 * 0.01;
                wavewell::Record {
                    t,
                    energy: f(t),
                    nehari: 0.0,
                    potential: 0.0,
                    blowup_f: 0.0,
                    y: None,
                    l2_u: 0.0,
                    l2_v: 0.0,
                    lq_u: 0.0,
                    a_uu: 0.0,
                    log_moment: 0.0,
                    damping_power: 0.0,
                    balance_residual: 0.0,
                }
            })
            .collect()
    };
    let exp = synthetic(&|t| (-2.0 * t).exp());
    let alg = synthetic(&|t| 1.0 / (1.0 + t));
    let fe = fit_decay(&exp, 0.0, DEFAULT_WINDOW_FRACTION).unwrap().fits[0];
    let fa = fit_decay(&alg, 2.0, DEFAULT_WINDOW_FRACTION).unwrap().fits[0];
    v.check(
        (fe.rate_or_slope - 2.0).abs() < 1e-6 && fe.goodness > 1.0 - 1e-9,
        format!("exp fit rate {:.9}", fe.rate_or_slope),
    );
    v.check(
        fa.model == DecayModel::AlgebraicTwoOverP && (fa.rate_or_slope - 1.0).abs() < 1e-6,
        format!("algebraic fit slope {:.9}", fa.rate_or_slope),
    );
    v
}

fn monotone(runs: &[(String, Run, f64)]) -> Verdict {
    let mut v = Verdict::new();
    for (name, traj, rel_tol) in runs {
        let e0 = traj.first().energy;
        let slack = 10.0 * rel_tol * e0.abs().max(1.0);
        let rise = traj
            .records
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max);
        v.check(rise <= slack, format!("{name}: max rise {rise:.1e} (slack {slack:.0e})"));
    }
    v
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (c1, c3, (c4, c5), c6, c7, c8, c9, c10) = std::thread::scope(|s| {
        let h1 = s.spawn(energy_balance);
        let h3 = s.spawn(well_inequalities);
        let h4 = s.spawn(stable_runs);
        let h6 = s.spawn(negative_energy_blowup);
        let h7 = s.spawn(positive_energy_blowup);
        let h8 = s.spawn(epsilon_root);
        let h9 = s.spawn(subcritical_global);
        let h10 = s.spawn(oracles);
        (
            h1.join().unwrap(),
            h3.join().unwrap(),
            h4.join().unwrap(),
            h6.join().unwrap(),
            h7.join().unwrap(),
            h8.join().unwrap(),
            h9.join().unwrap(),
            h10.join().unwrap(),
        )
    });
    let all_runs: Vec<_> = [&c1, &c4, &c6, &c7, &c9]
        .iter()
        .flat_map(|v| v.runs.iter().map(|(n, t, r)| (n.clone(), t.clone(), *r)))
        .collect();
    let c2 = monotone(&all_runs);
    let verdicts = [
        ("energy balance identity", c1),
        ("energy monotonicity", c2),
        ("well-geometry inequalities", c3),
        ("stable-set confinement and decay", c4),
        ("theta-bound audit", c5),
        ("negative-energy blow-up", c6),
        ("positive-energy blow-up", c7),
        ("epsilon' root", c8),
        ("subcritical global existence", c9),
        ("oracle equivalences", c10),
    ];
    let mut failed = 0;
    for (i, (name, v)) in verdicts.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        verdicts.len() - failed,
        verdicts.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
