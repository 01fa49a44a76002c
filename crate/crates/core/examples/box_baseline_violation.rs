//! Fixed-ITL boxes that exceed the polyhedron let admission control break
//! PU protection; the polyhedron never does.
//!
//! Run with `cargo run --release --example box_baseline_violation`.

use fcir::jpac::{run_jpac_box, run_jpac_with, JpacOptions};
use fcir::region::build_fcir;
use fcir::scenario::{generate_snapshot, ScenarioConfig, ScenarioKind};

fn main() -> fcir::Result<()> {
    let cfg = ScenarioConfig::new(ScenarioKind::FourCellA);
    let alphas = [0.1, 0.4, 1.0, 10.0];
    let snapshots = 40;
    let mut pu = vec![0.0; alphas.len() + 1];
    let mut su = vec![0.0; alphas.len() + 1];
    for s in 0..snapshots {
        let net = generate_snapshot(&cfg, s)?;
        let fcir = build_fcir(&net, net.pu_targets())?;
        let poly = run_jpac_with(&net, &fcir, JpacOptions::default())?;
        pu[0] += poly.pu_outage_ratio;
        su[0] += poly.su_outage_ratio;
        for (k, &a) in alphas.iter().enumerate() {
            let boxed = run_jpac_box(&net, &fcir.baseline_itl(a), JpacOptions::default())?;
            pu[k + 1] += boxed.pu_outage_ratio;
            su[k + 1] += boxed.su_outage_ratio;
        }
    }
    let n = snapshots as f64;
    println!("{:<14} {:>10} {:>10}", "protection", "PU outage", "SU outage");
    println!("{:<14} {:>10.4} {:>10.4}", "polyhedron", pu[0] / n, su[0] / n);
    for (k, a) in alphas.iter().enumerate() {
        println!("{:<14} {:>10.4} {:>10.4}", format!("box a={a}"), pu[k + 1] / n, su[k + 1] / n);
    }
    Ok(())
}
