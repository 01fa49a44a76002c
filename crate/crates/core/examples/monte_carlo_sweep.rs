//! A small SU-count sweep written to CSV, the same files the `sweep`
//! command produces.
//!
//! Run with `cargo run --release --example monte_carlo_sweep [out_dir]`.

use std::path::PathBuf;

use fcir::experiment::{run_experiment, summarize, write_outputs, ExperimentConfig, Sweep, SweepAxis};
use fcir::scenario::{ScenarioConfig, ScenarioKind};

fn main() -> fcir::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("fcir_sweep"));
    let mut cfg = ScenarioConfig::new(ScenarioKind::FourCellA);
    cfg.snapshots = 30;
    let exp = ExperimentConfig {
        sweep: Sweep {
            axis: SweepAxis::SuCount,
            values: vec![12.0, 20.0, 28.0],
        },
        ..ExperimentConfig::default()
    };
    let result = run_experiment(&cfg, &exp)?;
    write_outputs(&out, &result)?;
    for s in summarize(&result.rows) {
        println!(
            "SUs {:>3} {:<9} alpha {:>5} PU outage {:.4} SU outage {:.4}",
            s.sweep_value.unwrap_or(0.0),
            s.algorithm.name(),
            s.alpha.map(|a| a.to_string()).unwrap_or_else(|| "-".into()),
            s.pu_outage.unwrap_or(f64::NAN),
            s.su_outage.unwrap_or(f64::NAN)
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
