//! Polyhedral and box interference regions of a two-cell primary network.
//!
//! Run with `cargo run --example two_cell_region`.

use fcir::region::{build_fcir, build_ftir};
use fcir::scenario::{generate_layout, ScenarioConfig, ScenarioKind};

fn main() -> fcir::Result<()> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::TwoPbs);
    cfg.num_pu = 10;
    cfg.pbs_target_sinr_db = Some(vec![-18.0, -22.0]);
    let layout = generate_layout(&cfg, 7)?;
    let net = &layout.net;

    let fcir = build_fcir(net, net.pu_targets())?;
    let ftir = build_ftir(net, net.pu_targets())?;
    println!("PUs per PBS: {:?}", (0..2).map(|m| net.users_of(m).count()).collect::<Vec<_>>());
    println!("A = {}", fcir.a());
    println!("C = {:?}", fcir.c().as_slice());
    println!("total-interference box = {:?}", ftir.titl);
    println!("axis intercepts = {:?}", fcir.axis_intercepts());
    println!("largest inscribed box scaling = {:.4}", fcir.max_inscribed_alpha());

    // walk outward along the diagonal until protection fails
    let step = fcir.axis_intercepts().iter().cloned().fold(f64::INFINITY, f64::min) / 10.0;
    for k in 0..=12 {
        let i = [k as f64 * step, k as f64 * step];
        let report = fcir.infeasibility_report(&i);
        println!(
            "I = ({:.3e}, {:.3e}) inside = {} violated rows = {:?}",
            i[0],
            i[1],
            fcir.contains(&i),
            report.violated
        );
    }
    Ok(())
}
