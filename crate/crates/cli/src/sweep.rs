//! Parameter sweeps over `{q, p, amplitude}`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{self, Summary};

pub const RESULTS_FILE: &str = "results.jsonl";
pub const PHASE_TABLE_FILE: &str = "phase_table.txt";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub index: usize,
    pub q: f64,
    pub p: f64,
    pub amplitude: f64,
}

/// One line of `results.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLine {
    pub index: usize,
    pub q: f64,
    pub p: f64,
    pub amplitude: f64,
    pub run_dir: String,
    pub set_membership: Option<String>,
    pub predicted: Option<String>,
    pub observed: Option<String>,
    pub outcome_flag: Option<String>,
    pub t_detect: Option<f64>,
    pub prediction_match: Option<bool>,
    pub audit_passed: Option<bool>,
    pub error: Option<String>,
}

/// Grid points in `q`-major order.
pub fn grid(cfg: &RunConfig) -> Vec<Point> {
    let sweep = cfg.sweep.clone().unwrap_or(crate::config::SweepGrid {
        q: None,
        p: None,
        amplitude: None,
    });
    let qs = sweep.q.unwrap_or_else(|| vec![cfg.problem.q]);
    let ps = sweep.p.unwrap_or_else(|| vec![cfg.problem.p]);
    let amps = sweep.amplitude.unwrap_or_else(|| vec![1.0]);
    let mut out = Vec::new();
    for &q in &qs {
        for &p in &ps {
            for &amplitude in &amps {
                out.push(Point {
                    index: out.len(),
                    q,
                    p,
                    amplitude,
                });
            }
        }
    }
    out
}

/// Config of a single grid point; it carries no sweep section, so it can
/// be rerun with `simulate`.
pub fn point_config(base: &RunConfig, pt: &Point) -> RunConfig {
    let mut cfg = base.clone();
    cfg.sweep = None;
    cfg.output.dir = None;
    cfg.problem.q = pt.q;
    cfg.problem.p = pt.p;
    cfg.initial.u0 = cfg.initial.u0.scaled(pt.amplitude);
    cfg
}

fn run_point(base: &RunConfig, pt: &Point, dir: &Path) -> SweepLine {
    let mut line = SweepLine {
        index: pt.index,
        q: pt.q,
        p: pt.p,
        amplitude: pt.amplitude,
        run_dir: dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        set_membership: None,
        predicted: None,
        observed: None,
        outcome_flag: None,
        t_detect: None,
        prediction_match: None,
        audit_passed: None,
        error: None,
    };
    let cfg = point_config(base, pt);
    let result = (|| -> Result<Summary, CliError> {
        cfg.validate()?;
        let model = cfg.build_model()?;
        let geom = run::geometry(&cfg, &model)?;
        run::simulate(&cfg, &model, &geom, dir)
    })();
    match result {
        Ok(s) => {
            line.set_membership = Some(s.classification.set_membership.as_str().to_string());
            line.predicted = Some(s.predicted);
            line.observed = Some(s.observed);
            line.outcome_flag = Some(s.outcome_flag);
            line.t_detect = s.t_detect;
            line.prediction_match = s.prediction_match;
            line.audit_passed = Some(s.audit_passed);
        }
        Err(e) => line.error = Some(e.to_string()),
    }
    info!("sweep point {} (q = {}, p = {}, amplitude = {}) done", pt.index, pt.q, pt.p, pt.amplitude);
    line
}

/// Counts of `(predicted, observed)` pairs as a text table.
pub fn phase_table(lines: &[SweepLine]) -> String {
    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    for l in lines {
        let pred = l.predicted.clone().unwrap_or_else(|| "error".into());
        let obs = l.observed.clone().unwrap_or_else(|| "error".into());
        *counts.entry((pred, obs)).or_default() += 1;
    }
    let mut s = format!("{:<26} {:<14} {:>6}\n", "predicted", "observed", "count");
    for ((p, o), n) in &counts {
        s.push_str(&format!("{p:<26} {o:<14} {n:>6}\n"));
    }
    let matched = lines.iter().filter(|l| l.prediction_match == Some(true)).count();
    let judged = lines.iter().filter(|l| l.prediction_match.is_some()).count();
    let failed = lines.iter().filter(|l| l.error.is_some()).count();
    s.push_str(&format!("matched {matched} of {judged} predictions; {failed} failed runs of {}\n", lines.len()));
    s
}

/// Runs every grid point on a pool of `workers` threads. Each run writes
/// into its own `run_NNNN` directory; a single writer appends the result
/// lines to `results.jsonl` in grid order as they become available.
pub fn sweep(base: &RunConfig, out: &Path, workers: usize) -> Result<Vec<SweepLine>, CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let points = grid(base);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build worker pool: {e}")))?;
    let results_path = out.join(RESULTS_FILE);
    let file = File::create(&results_path).map_err(|e| CliError::io(&results_path, e))?;
    let mut writer = BufWriter::new(file);

    let (tx, rx) = mpsc::channel::<SweepLine>();
    let dirs: Vec<PathBuf> = points.iter().map(|p| out.join(format!("run_{:04}", p.index))).collect();
    let mut lines = Vec::with_capacity(points.len());
    let mut write_err = None;
    std::thread::scope(|s| {
        let points = &points;
        let dirs = &dirs;
        s.spawn(move || {
            pool.install(|| {
                points.par_iter().for_each_with(tx, |tx, pt| {
                    let _ = tx.send(run_point(base, pt, &dirs[pt.index]));
                });
            });
        });
        let mut pending = BTreeMap::new();
        for line in rx {
            pending.insert(line.index, line);
            while let Some(line) = pending.remove(&lines.len()) {
                if write_err.is_none() {
                    let res = serde_json::to_string(&line)
                        .map_err(CliError::from)
                        .and_then(|json| {
                            writeln!(writer, "{json}")
                                .and_then(|_| writer.flush())
                                .map_err(|e| CliError::io(&results_path, e))
                        });
                    write_err = res.err();
                }
                lines.push(line);
            }
        }
    });
    if let Some(e) = write_err {
        return Err(e);
    }
    let table_path = out.join(PHASE_TABLE_FILE);
    fs::write(&table_path, phase_table(&lines)).map_err(|e| CliError::io(&table_path, e))?;
    Ok(lines)
}
