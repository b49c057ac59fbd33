//! Single-run pipeline shared by `simulate` and `sweep`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wavewell::dynamics::{integrate_with, BlowupReport, StepStats};
use wavewell::functionals::{EnergyRecord, CSV_COLUMNS};
use wavewell::lab::{
    audit, classify, fit_decay, observed, prediction_matches, AuditReport, Classification, DecayReport,
    DEFAULT_WINDOW_FRACTION,
};
use wavewell::varconst::well_geometry;
use wavewell::{Geometry, Model, Record};

use crate::config::RunConfig;
use crate::error::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const AUDIT_FILE: &str = "audit.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_echo: serde_json::Value,
    pub classification: Classification<f64>,
    pub outcome_flag: String,
    pub t_detect: Option<f64>,
    pub fits: Option<DecayReport<f64>>,
    /// Why `fits` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_note: Option<String>,
    pub geometry_digest: BTreeMap<String, serde_json::Value>,
    pub predicted: String,
    pub observed: String,
    pub prediction_match: Option<bool>,
    pub blowup: Option<BlowupReport<f64>>,
    pub audit_passed: bool,
    pub n_records: usize,
    pub stats: StepStats<f64>,
}

pub fn geometry(cfg: &RunConfig, model: &Model) -> Result<Geometry, CliError> {
    Ok(well_geometry(model, &cfg.constants)?)
}

/// Scalar constants and diagnostic flags of a geometry, keyed by name.
pub fn geometry_digest(g: &Geometry) -> BTreeMap<String, serde_json::Value> {
    let mut out: BTreeMap<String, serde_json::Value> = g
        .key_values()
        .into_iter()
        .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
        .collect();
    out.insert("approximate".into(), g.approximate.into());
    out.insert("sup_at_boundary".into(), g.sup_at_boundary.into());
    out.insert("surrogate_sign_changes".into(), g.surrogate_sign_changes.into());
    out
}

/// Flat `key = value` listing of a geometry.
pub fn geometry_text(g: &Geometry) -> String {
    let mut s = String::new();
    for (k, v) in g.key_values() {
        s.push_str(&format!("{k:<16} = {v:.12e}\n"));
    }
    s.push_str(&format!("{:<16} = {}\n", "surrogate_sign_changes", g.surrogate_sign_changes));
    s.push_str(&format!("{:<16} = {}\n", "sup_at_boundary", g.sup_at_boundary));
    s.push_str(&format!("{:<16} = {}\n", "approximate", g.approximate));
    s
}

pub fn classification_text(c: &Classification<f64>) -> String {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_else(|| "-".into());
    format!(
        "set_membership   = {}\npredicted        = {}\nE0               = {:.12e}\na_u0u0           = {:.12e}\n\
         M                = {:.12e}\nr_star_sq        = {:.12e}\npairing_lhs      = {}\npairing_rhs      = {}\n",
        c.set_membership.as_str(),
        c.predicted.as_str(),
        c.e0,
        c.a_u0u0,
        c.m,
        c.r_star_sq,
        opt(c.pairing_lhs),
        opt(c.pairing_rhs),
    )
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Integrates `cfg` and writes `trajectory.csv`, `summary.json` and
/// `audit.json` into `dir`. Blow-up and other scientific outcomes are part
/// of the summary, not errors.
pub fn simulate(cfg: &RunConfig, model: &Model, geom: &Geometry, dir: &Path) -> Result<Summary, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let state0 = cfg.build_state(model)?;
    let cls = classify(model, &state0, geom)?;

    let csv_path = dir.join(TRAJECTORY_FILE);
    let file = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    writer
        .write_record(CSV_COLUMNS)
        .map_err(|e| CliError::csv(&csv_path, e))?;
    let mut sink_err: Option<CliError> = None;
    let traj = integrate_with(model, &state0, &cfg.integrator, &cfg.record_options(), |r| {
        let res = writer.write_record(r.csv_fields()).and_then(|_| writer.flush().map_err(csv::Error::from));
        if let Err(e) = res {
            sink_err = Some(CliError::csv(&csv_path, e));
            return Err(wavewell::Error::Degenerate("trajectory sink failed".into()));
        }
        Ok(())
    });
    if let Some(e) = sink_err {
        return Err(e);
    }
    let traj = traj?;
    writer
        .into_inner()
        .map_err(|e| CliError::io(&csv_path, e.into_error()))?
        .flush()
        .map_err(|e| CliError::io(&csv_path, e))?;

    let (fits, fit_note) = match fit_decay(&traj.records, cfg.problem.p, DEFAULT_WINDOW_FRACTION) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report: AuditReport<f64> = audit(&traj, &cls, geom, cfg.integrator.rel_tol);
    let obs = observed(&traj);
    let summary = Summary {
        config_echo: cfg.echo(),
        outcome_flag: traj.outcome.as_str().to_string(),
        t_detect: traj.blowup.map(|b| b.t_detect),
        fits,
        fit_note,
        geometry_digest: geometry_digest(geom),
        predicted: cls.predicted.as_str().to_string(),
        observed: obs.as_str().to_string(),
        prediction_match: prediction_matches(cls.predicted, obs),
        blowup: traj.blowup,
        audit_passed: report.all_passed(),
        n_records: traj.records.len(),
        stats: traj.stats,
        classification: cls,
    };
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    write_json(&dir.join(AUDIT_FILE), &report)?;
    Ok(summary)
}

pub fn summary_text(s: &Summary) -> String {
    let mut out = classification_text(&s.classification);
    out.push_str(&format!("outcome_flag     = {}\n", s.outcome_flag));
    if let Some(t) = s.t_detect {
        out.push_str(&format!("t_detect         = {t:.6e}\n"));
    }
    out.push_str(&format!("observed         = {}\n", s.observed));
    let m = s.prediction_match.map(|b| b.to_string()).unwrap_or_else(|| "-".into());
    out.push_str(&format!("prediction_match = {m}\n"));
    out.push_str(&format!("audit_passed     = {}\n", s.audit_passed));
    if let Some(f) = &s.fits {
        out.push_str(&fits_text(f));
    }
    out
}

pub fn fits_text(f: &DecayReport<f64>) -> String {
    f.fits
        .iter()
        .map(|fit| {
            format!(
                "fit {:<26} rate_or_slope = {:.6e}  R2 = {:.6}  window = [{:.3}, {:.3}]\n",
                fit.model.as_str(),
                fit.rate_or_slope,
                fit.goodness,
                fit.window.0,
                fit.window.1
            )
        })
        .collect()
}

/// Reads a trajectory CSV written by [`simulate`].
pub fn read_trajectory(path: &Path) -> Result<Vec<Record>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header = reader.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(CliError::Usage(format!(
            "{}: header does not match the trajectory columns {}",
            path.display(),
            CSV_COLUMNS.join(",")
        )));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::csv(path, e))?;
        let fields: Vec<&str> = row.iter().collect();
        out.push(EnergyRecord::from_csv_fields(&fields)?);
    }
    Ok(out)
}
