//! Monte Carlo sweeps over snapshots, metrics and CSV output.
//!
//! Snapshots run in parallel; rows come back ordered by sweep value, then
//! snapshot, algorithm and alpha, so identical inputs give identical files.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gp::{run_algorithm2, GpOptions, Protection};
use crate::jpac::{outage_ratio, run_jpac_box, run_jpac_with, JpacOptions, JpacOutcome, Removal};
use crate::network::{sinr_of, NetworkInstance, PowerVector};
use crate::region::{build_fcir, FcirPolyhedron};
use crate::scenario::{generate_snapshot, ScenarioConfig};
use crate::{Error, Result, Tier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Admission control protected by the polyhedron.
    Jpac,
    /// Admission control protected by a fixed-ITL box.
    JpacBox,
    /// Throughput maximization under the polyhedron.
    GpPoly,
    /// Throughput maximization under a fixed-ITL box.
    GpBox,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Jpac, Algorithm::JpacBox, Algorithm::GpPoly, Algorithm::GpBox];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Jpac => "jpac",
            Algorithm::JpacBox => "jpac-box",
            Algorithm::GpPoly => "gp-poly",
            Algorithm::GpBox => "gp-box",
        }
    }

    /// Whether results depend on the box scaling alpha.
    pub fn uses_alpha(self) -> bool {
        matches!(self, Algorithm::JpacBox | Algorithm::GpBox)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    None,
    SuCount,
    D,
    Alpha,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::SuCount => "su_count",
            SweepAxis::D => "d",
            SweepAxis::Alpha => "alpha",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn none() -> Self {
        Self {
            axis: SweepAxis::None,
            values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub sweep: Sweep,
    /// Record wall-clock runtimes; off by default so output is reproducible.
    pub timing: bool,
    pub jpac: JpacOptions,
    pub gp: GpOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::Jpac, Algorithm::JpacBox],
            sweep: Sweep::none(),
            timing: false,
            jpac: JpacOptions::default(),
            gp: GpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotMetrics {
    pub pu_outage_ratio: f64,
    pub su_outage_ratio: f64,
    pub admitted_count: usize,
    /// Sum of `ln(1 + sinr)` over the SUs.
    pub aggregate_throughput: f64,
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub sweep_value: Option<f64>,
    pub snapshot: usize,
    pub algorithm: Algorithm,
    pub alpha: Option<f64>,
    /// `None` when the run failed; `status` then holds the error kind.
    pub metrics: Option<SnapshotMetrics>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemovalTraceRow {
    pub sweep_value: Option<f64>,
    pub snapshot: usize,
    pub algorithm: Algorithm,
    pub alpha: Option<f64>,
    pub iteration: usize,
    pub removal: Removal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpTraceRow {
    pub sweep_value: Option<f64>,
    pub snapshot: usize,
    pub algorithm: Algorithm,
    pub alpha: Option<f64>,
    pub outer_iteration: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub removal_traces: Vec<RemovalTraceRow>,
    pub gp_traces: Vec<GpTraceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sweep_value: Option<f64>,
    pub algorithm: Algorithm,
    pub alpha: Option<f64>,
    pub snapshots: usize,
    pub failures: usize,
    pub pu_outage: Option<f64>,
    pub su_outage: Option<f64>,
    pub admitted: Option<f64>,
    pub throughput_nats: Option<f64>,
}

/// Sum of `ln(1 + sinr)` over the SUs at powers `p`.
pub fn su_throughput(net: &NetworkInstance, p: &PowerVector) -> Result<f64> {
    let gamma = sinr_of(net, p)?;
    Ok(net.su_indices().map(|i| gamma[i].ln_1p()).sum())
}

fn jpac_metrics(net: &NetworkInstance, out: &JpacOutcome) -> Result<SnapshotMetrics> {
    Ok(SnapshotMetrics {
        pu_outage_ratio: out.pu_outage_ratio,
        su_outage_ratio: out.su_outage_ratio,
        admitted_count: out.admitted.len(),
        aggregate_throughput: su_throughput(net, &out.p_final)?,
        runtime_ms: None,
    })
}

/// Metrics and traces of one algorithm on one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: SnapshotMetrics,
    pub removals: Vec<Removal>,
    pub objective_trace: Vec<f64>,
}

/// Runs `algorithm` on `net`; `alpha` scales the box for the box variants.
pub fn run_algorithm(
    net: &NetworkInstance,
    fcir: &FcirPolyhedron,
    algorithm: Algorithm,
    alpha: f64,
    cfg: &ExperimentConfig,
) -> Result<RunOutput> {
    match algorithm {
        Algorithm::Jpac | Algorithm::JpacBox => {
            let out = if algorithm == Algorithm::Jpac {
                run_jpac_with(net, fcir, cfg.jpac)?
            } else {
                run_jpac_box(net, &fcir.baseline_itl(alpha), cfg.jpac)?
            };
            Ok(RunOutput {
                metrics: jpac_metrics(net, &out)?,
                removals: out.removal_trace,
                objective_trace: Vec::new(),
            })
        }
        Algorithm::GpPoly | Algorithm::GpBox => {
            let protection = if algorithm == Algorithm::GpPoly {
                Protection::Polyhedron(fcir.clone())
            } else {
                Protection::Box(fcir.baseline_itl(alpha))
            };
            let out = run_algorithm2(net, &protection, cfg.gp)?;
            // SUs all sit at or above target by construction
            let su_outage = outage_ratio(net, &out.p_full, Tier::Secondary)?;
            Ok(RunOutput {
                metrics: SnapshotMetrics {
                    pu_outage_ratio: out.pu_outage_ratio,
                    su_outage_ratio: su_outage,
                    admitted_count: net.num_su(),
                    aggregate_throughput: out.last.objective,
                    runtime_ms: None,
                },
                removals: Vec::new(),
                objective_trace: out.trace,
            })
        }
    }
}

fn scenario_at(base: &ScenarioConfig, axis: SweepAxis, value: Option<f64>) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    match (axis, value) {
        (SweepAxis::SuCount, Some(v)) => {
            if !(v >= 0.0 && v.fract() == 0.0) {
                return Err(Error::Config(format!("SU count must be a nonnegative integer, got {v}")));
            }
            cfg.num_su = v as usize;
        }
        (SweepAxis::D, Some(v)) => cfg.bs_separation = v,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// One (sweep value, snapshot) cell: every algorithm at every relevant alpha.
fn run_cell(
    scenario: &ScenarioConfig,
    exp: &ExperimentConfig,
    sweep_value: Option<f64>,
    snapshot: usize,
    alphas: &[f64],
) -> ExperimentResult {
    type Outcome = std::result::Result<RunOutput, &'static str>;
    let mut result = ExperimentResult::default();
    let seed = scenario.seed.wrapping_add(snapshot as u64);
    let prepared = generate_snapshot(scenario, seed).and_then(|net| {
        let fcir = build_fcir(&net, net.pu_targets())?;
        Ok((net, fcir))
    });
    let run = |algorithm: Algorithm, alpha: f64| -> Outcome {
        let (net, fcir) = prepared.as_ref().map_err(|e| e.kind())?;
        let start = Instant::now();
        let mut out = run_algorithm(net, fcir, algorithm, alpha, exp).map_err(|e| e.kind())?;
        out.metrics.runtime_ms = exp.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        Ok(out)
    };
    for &algorithm in &exp.algorithms {
        let alpha_list: Vec<Option<f64>> = if algorithm.uses_alpha() || exp.sweep.axis == SweepAxis::Alpha {
            alphas.iter().map(|a| Some(*a)).collect()
        } else {
            vec![None]
        };
        // alpha-free algorithms run once and repeat across an alpha sweep
        let fixed: Option<Outcome> = (!algorithm.uses_alpha()).then(|| run(algorithm, 0.0));
        for alpha in alpha_list {
            let row_sweep = if exp.sweep.axis == SweepAxis::Alpha { alpha } else { sweep_value };
            let row_alpha = if algorithm.uses_alpha() { alpha } else { None };
            let outcome = match &fixed {
                Some(o) => o.clone(),
                None => run(algorithm, alpha.unwrap_or(0.0)),
            };
            match outcome {
                Ok(run) => {
                    for (iteration, removal) in run.removals.into_iter().enumerate() {
                        result.removal_traces.push(RemovalTraceRow {
                            sweep_value: row_sweep,
                            snapshot,
                            algorithm,
                            alpha: row_alpha,
                            iteration,
                            removal,
                        });
                    }
                    for (outer_iteration, objective) in run.objective_trace.into_iter().enumerate() {
                        result.gp_traces.push(GpTraceRow {
                            sweep_value: row_sweep,
                            snapshot,
                            algorithm,
                            alpha: row_alpha,
                            outer_iteration,
                            objective,
                        });
                    }
                    result.rows.push(ExperimentRow {
                        sweep_value: row_sweep,
                        snapshot,
                        algorithm,
                        alpha: row_alpha,
                        metrics: Some(run.metrics),
                        status: "ok".into(),
                    });
                }
                Err(kind) => result.rows.push(ExperimentRow {
                    sweep_value: row_sweep,
                    snapshot,
                    algorithm,
                    alpha: row_alpha,
                    metrics: None,
                    status: kind.into(),
                }),
            }
        }
    }
    result
}

/// Runs every snapshot of every sweep point. Per-snapshot failures are
/// recorded in the rows; only an invalid configuration aborts.
pub fn run_experiment(scenario: &ScenarioConfig, exp: &ExperimentConfig) -> Result<ExperimentResult> {
    if exp.algorithms.is_empty() {
        return Err(Error::Config("no algorithms selected".into()));
    }
    let sweep_values: Vec<Option<f64>> = match exp.sweep.axis {
        SweepAxis::None | SweepAxis::Alpha => vec![None],
        _ => exp.sweep.values.iter().map(|v| Some(*v)).collect(),
    };
    if exp.sweep.axis != SweepAxis::None && exp.sweep.values.is_empty() {
        return Err(Error::Config(format!("sweep over {} has no values", exp.sweep.axis.name())));
    }
    let alphas: Vec<f64> = if exp.sweep.axis == SweepAxis::Alpha {
        exp.sweep.values.clone()
    } else {
        scenario.alphas.clone()
    };
    if alphas.is_empty() && exp.algorithms.iter().any(|a| a.uses_alpha()) {
        return Err(Error::Config("box algorithms need at least one alpha".into()));
    }
    if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::Config("alphas must be finite and >= 0".into()));
    }
    let configs: Vec<(Option<f64>, ScenarioConfig)> = sweep_values
        .into_iter()
        .map(|v| scenario_at(scenario, exp.sweep.axis, v).map(|c| (v, c)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..scenario.snapshots).map(move |s| (c, s)))
        .collect();
    let parts: Vec<ExperimentResult> = cells
        .par_iter()
        .map(|&(c, s)| {
            let (value, cfg) = &configs[c];
            run_cell(cfg, exp, *value, s, &alphas)
        })
        .collect();
    let mut out = ExperimentResult::default();
    for p in parts {
        out.rows.extend(p.rows);
        out.removal_traces.extend(p.removal_traces);
        out.gp_traces.extend(p.gp_traces);
    }
    Ok(out)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-(sweep value, algorithm, alpha) means over successful rows, in first-seen order.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Option<f64>, Algorithm, Option<f64>)> = Vec::new();
    for r in rows {
        let k = (r.sweep_value, r.algorithm, r.alpha);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(sweep_value, algorithm, alpha)| {
            let group: Vec<&ExperimentRow> = rows
                .iter()
                .filter(|r| r.sweep_value == sweep_value && r.algorithm == algorithm && r.alpha == alpha)
                .collect();
            let ok: Vec<&SnapshotMetrics> = group.iter().filter_map(|r| r.metrics.as_ref()).collect();
            SummaryRow {
                sweep_value,
                algorithm,
                alpha,
                snapshots: ok.len(),
                failures: group.len() - ok.len(),
                pu_outage: mean(ok.iter().map(|m| m.pu_outage_ratio)),
                su_outage: mean(ok.iter().map(|m| m.su_outage_ratio)),
                admitted: mean(ok.iter().map(|m| m.admitted_count as f64)),
                throughput_nats: mean(ok.iter().map(|m| m.aggregate_throughput)),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

pub const RESULTS_HEADER: [&str; 10] = [
    "sweep_value",
    "snapshot",
    "algorithm",
    "alpha",
    "pu_outage",
    "su_outage",
    "admitted",
    "throughput_nats",
    "runtime_ms",
    "status",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "sweep_value",
    "algorithm",
    "alpha",
    "snapshots",
    "failures",
    "pu_outage",
    "su_outage",
    "admitted",
    "throughput_nats",
];

pub fn write_results(path: &Path, rows: &[ExperimentRow]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        let m = r.metrics.as_ref();
        w.write_record([
            opt(r.sweep_value),
            r.snapshot.to_string(),
            r.algorithm.to_string(),
            opt(r.alpha),
            opt(m.map(|m| m.pu_outage_ratio)),
            opt(m.map(|m| m.su_outage_ratio)),
            m.map(|m| m.admitted_count.to_string()).unwrap_or_default(),
            opt(m.map(|m| m.aggregate_throughput)),
            opt(m.and_then(|m| m.runtime_ms)),
            r.status.clone(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_summary(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for s in summary {
        w.write_record([
            opt(s.sweep_value),
            s.algorithm.to_string(),
            opt(s.alpha),
            s.snapshots.to_string(),
            s.failures.to_string(),
            opt(s.pu_outage),
            opt(s.su_outage),
            opt(s.admitted),
            opt(s.throughput_nats),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_removal_traces(path: &Path, rows: &[RemovalTraceRow]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record([
        "sweep_value",
        "snapshot",
        "algorithm",
        "alpha",
        "iteration",
        "case",
        "removed_su",
        "distances",
    ])?;
    for r in rows {
        let distances: Vec<String> = r.removal.distances.iter().map(|d| d.to_string()).collect();
        w.write_record([
            opt(r.sweep_value),
            r.snapshot.to_string(),
            r.algorithm.to_string(),
            opt(r.alpha),
            r.iteration.to_string(),
            r.removal.case.tag().to_string(),
            r.removal.su.to_string(),
            distances.join(";"),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_gp_traces(path: &Path, rows: &[GpTraceRow]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["sweep_value", "snapshot", "algorithm", "alpha", "outer_iteration", "objective"])?;
    for r in rows {
        w.write_record([
            opt(r.sweep_value),
            r.snapshot.to_string(),
            r.algorithm.to_string(),
            opt(r.alpha),
            r.outer_iteration.to_string(),
            r.objective.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `results.csv`, `summary.csv`, `traces.csv` and `gp_trace.csv` into `dir`.
pub fn write_outputs(dir: &Path, result: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_results(&dir.join("results.csv"), &result.rows)?;
    write_summary(&dir.join("summary.csv"), &summarize(&result.rows))?;
    write_removal_traces(&dir.join("traces.csv"), &result.removal_traces)?;
    write_gp_traces(&dir.join("gp_trace.csv"), &result.gp_traces)
}
