//! Joint power and admission control on a crowded four-cell snapshot.
//!
//! Run with `cargo run --example jpac_admission`.

use fcir::jpac::{run_jpac, JpacOptions};
use fcir::region::build_fcir;
use fcir::scenario::{generate_snapshot, ScenarioConfig, ScenarioKind};

fn main() -> fcir::Result<()> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::FourCellB);
    cfg.num_su = 32;
    let net = generate_snapshot(&cfg, 2024)?;
    let out = run_jpac(&net, JpacOptions::default())?;
    println!("SUs: {}, admitted: {}", net.num_su(), out.admitted.len());
    for (k, r) in out.removal_trace.iter().enumerate() {
        println!("removal {k}: SU {} (case {})", r.su, r.case.tag());
    }
    println!(
        "PU outage {:.3}, SU outage {:.3}, certified {}",
        out.pu_outage_ratio, out.su_outage_ratio, out.certified
    );
    let fcir = build_fcir(&net, net.pu_targets())?;
    let interference = fcir::network::cognitive_interference(&net, &out.p_final, &out.admitted);
    println!("final interference inside the region: {}", fcir.contains(&interference));
    Ok(())
}
