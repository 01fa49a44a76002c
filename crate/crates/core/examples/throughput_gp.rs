//! Successive geometric programming for SU throughput, under the polyhedron
//! and under a box inscribed in it.
//!
//! Run with `cargo run --release --example throughput_gp`.

use fcir::gp::{run_algorithm2, GpOptions, Protection};
use fcir::region::build_fcir;
use fcir::scenario::{generate_snapshot, ScenarioConfig, ScenarioKind};

fn main() -> fcir::Result<()> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::FourCellA);
    cfg.num_pu = 8;
    cfg.num_su = 6;
    cfg.target_sinr_db = vec![-14.0, -18.0];
    cfg.require_full_feasibility = true;
    let net = generate_snapshot(&cfg, 5)?;
    let fcir = build_fcir(&net, net.pu_targets())?;

    let poly = run_algorithm2(&net, &Protection::Polyhedron(fcir.clone()), GpOptions::default())?;
    println!("polyhedron objective trace (nats): {:?}", poly.trace);
    println!("SU SINRs (dB): {:?}", poly.last.gamma.iter().map(|g| fcir::linear_to_db(*g)).collect::<Vec<_>>());

    let alpha = fcir.max_inscribed_alpha().min(1.0);
    let boxed = run_algorithm2(&net, &Protection::Box(fcir.baseline_itl(alpha)), GpOptions::default())?;
    println!(
        "box (alpha {alpha:.3}) objective {:.5} vs polyhedron {:.5}, PU outage {}",
        boxed.last.objective, poly.last.objective, boxed.pu_outage_ratio
    );
    Ok(())
}
