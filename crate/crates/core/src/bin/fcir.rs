//! Command-line front end. Exit codes: 0 ok, 1 runtime error, 2 usage or
//! configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fcir::config::{load_config, parse_range, Config};
use fcir::experiment::{run_algorithm, run_experiment, write_outputs, write_removal_traces, Algorithm, RemovalTraceRow, SweepAxis};
use fcir::region::{boundary_samples, build_fcir};
use fcir::scenario::generate_snapshot;
use fcir::{Error, NetworkInstance, Result};

#[derive(Parser)]
#[command(name = "fcir", version, about = "Feasible interference regions for underlay cognitive radio networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,
    /// Seed override for the snapshot (or the master seed of a sweep)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the polyhedron of one snapshot and write fcir.toml
    Fcir {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Points per boundary face in fcir_boundary.csv (two PBSs only)
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Run admission control on one snapshot and print its metrics
    Jpac {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "jpac")]
        algorithm: Algorithm,
        /// Box scaling for jpac-box
        #[arg(long)]
        alpha: Option<f64>,
        /// Directory for traces.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run throughput maximization on one snapshot and print its metrics
    Throughput {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "gp-poly")]
        algorithm: Algorithm,
        /// Box scaling for gp-box
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run a Monte Carlo sweep and write CSV results
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        snapshots: Option<usize>,
        /// Alpha values, e.g. `0.2..2.0 step 0.2` or `0.1,1,10`
        #[arg(long, num_args = 1..=3)]
        alpha: Option<Vec<String>>,
        /// BS separation values
        #[arg(long, num_args = 1..=3)]
        d: Option<Vec<String>>,
        /// SU counts, e.g. `12..32 step 4`
        #[arg(long, num_args = 1..=3)]
        su_range: Option<Vec<String>>,
        /// Algorithms to run; repeat or separate with commas
        #[arg(long, value_delimiter = ',')]
        algorithm: Vec<Algorithm>,
        /// Record runtimes (output is then no longer reproducible)
        #[arg(long)]
        timing: bool,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn snapshot(cfg: &Config, seed: Option<u64>) -> Result<NetworkInstance> {
    match (&cfg.network, &cfg.scenario) {
        (Some(net), _) => Ok(net.clone()),
        (None, Some(s)) => generate_snapshot(s, seed.unwrap_or(s.seed)),
        (None, None) => Err(Error::Config("no network to run on".into())),
    }
}

fn default_alpha(cfg: &Config, alpha: Option<f64>) -> f64 {
    alpha
        .or_else(|| cfg.scenario.as_ref().and_then(|s| s.alphas.first().copied()))
        .unwrap_or(1.0)
}

fn range(parts: &[String]) -> Result<Vec<f64>> {
    parse_range(&parts.join(" "))
}

fn cmd_fcir(common: &Common, out: &Path, samples: usize) -> Result<()> {
    let cfg = load_config(&common.config)?;
    let net = snapshot(&cfg, common.seed)?;
    let fcir = build_fcir(&net, net.pu_targets())?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let doc_path = out.join("fcir.toml");
    fs::write(&doc_path, fcir.document().to_toml()).map_err(io_err(&doc_path))?;
    println!("stations = {}", fcir.dim());
    println!("max_inscribed_alpha = {}", fcir.max_inscribed_alpha());
    println!("document = {}", doc_path.display());
    if fcir.dim() == 2 {
        let path = out.join("fcir_boundary.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["face", "i1", "i2"])?;
        for (face, i1, i2) in boundary_samples(&fcir, samples) {
            w.write_record([face.to_string(), i1.to_string(), i2.to_string()])?;
        }
        w.flush().map_err(io_err(&path))?;
        println!("boundary = {}", path.display());
    }
    Ok(())
}

fn cmd_single(common: &Common, algorithm: Algorithm, alpha: Option<f64>, out: Option<&Path>, gp: bool) -> Result<()> {
    let cfg = load_config(&common.config)?;
    let is_gp = matches!(algorithm, Algorithm::GpPoly | Algorithm::GpBox);
    if is_gp != gp {
        return Err(Error::Config(format!("algorithm {algorithm} does not belong to this command")));
    }
    let net = snapshot(&cfg, common.seed)?;
    let fcir = build_fcir(&net, net.pu_targets())?;
    let alpha = default_alpha(&cfg, alpha);
    let run = run_algorithm(&net, &fcir, algorithm, alpha, &cfg.experiment)?;
    let m = run.metrics;
    println!("algorithm = {algorithm}");
    if algorithm.uses_alpha() {
        println!("alpha = {alpha}");
    }
    println!("pu_outage = {}", m.pu_outage_ratio);
    println!("su_outage = {}", m.su_outage_ratio);
    println!("admitted = {} of {}", m.admitted_count, net.num_su());
    println!("throughput_nats = {}", m.aggregate_throughput);
    if gp {
        println!("outer_iterations = {}", run.objective_trace.len().saturating_sub(1));
    } else {
        println!("removals = {}", run.removals.len());
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let rows: Vec<RemovalTraceRow> = run
            .removals
            .into_iter()
            .enumerate()
            .map(|(iteration, removal)| RemovalTraceRow {
                sweep_value: None,
                snapshot: 0,
                algorithm,
                alpha: algorithm.uses_alpha().then_some(alpha),
                iteration,
                removal,
            })
            .collect();
        write_removal_traces(&dir.join("traces.csv"), &rows)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    common: &Common,
    out: &Path,
    snapshots: Option<usize>,
    alpha: Option<&[String]>,
    d: Option<&[String]>,
    su_range: Option<&[String]>,
    algorithms: &[Algorithm],
    timing: bool,
) -> Result<()> {
    let cfg = load_config(&common.config)?;
    let mut scenario = cfg
        .scenario
        .ok_or_else(|| Error::Config("sweep needs a [scenario] table".into()))?;
    let mut exp = cfg.experiment;
    if let Some(seed) = common.seed {
        scenario.seed = seed;
    }
    if let Some(n) = snapshots {
        scenario.snapshots = n;
    }
    if !algorithms.is_empty() {
        exp.algorithms = algorithms.to_vec();
    }
    exp.timing |= timing;
    let alphas = alpha.map(range).transpose()?;
    let ds = d.map(range).transpose()?;
    let sus = su_range.map(range).transpose()?;
    let mut axes = Vec::new();
    if let Some(v) = sus {
        axes.push((SweepAxis::SuCount, v));
    }
    match ds {
        Some(v) if v.len() == 1 => scenario.bs_separation = v[0],
        Some(v) => axes.push((SweepAxis::D, v)),
        None => {}
    }
    match (axes.len(), alphas) {
        (0, Some(a)) => {
            exp.sweep.axis = SweepAxis::Alpha;
            exp.sweep.values = a;
        }
        (0, None) => {}
        (1, a) => {
            let (axis, values) = axes.pop().expect("one axis");
            exp.sweep.axis = axis;
            exp.sweep.values = values;
            if let Some(a) = a {
                scenario.alphas = a;
            }
        }
        _ => return Err(Error::Config("sweep over --su-range or --d, not both".into())),
    }
    scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
    let result = run_experiment(&scenario, &exp)?;
    write_outputs(out, &result)?;
    let failed = result.rows.iter().filter(|r| r.metrics.is_none()).count();
    println!("rows = {}", result.rows.len());
    println!("failed = {failed}");
    println!("results = {}", out.join("results.csv").display());
    println!("summary = {}", out.join("summary.csv").display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidScenario(_) | Error::InvalidNetwork(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fcir { common, out, samples } => cmd_fcir(common, out, *samples),
        Command::Jpac {
            common,
            algorithm,
            alpha,
            out,
        } => cmd_single(common, *algorithm, *alpha, out.as_deref(), false),
        Command::Throughput {
            common,
            algorithm,
            alpha,
        } => cmd_single(common, *algorithm, *alpha, None, true),
        Command::Sweep {
            common,
            out,
            snapshots,
            alpha,
            d,
            su_range,
            algorithm,
            timing,
        } => cmd_sweep(
            common,
            out,
            *snapshots,
            alpha.as_deref(),
            d.as_deref(),
            su_range.as_deref(),
            algorithm,
            *timing,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
