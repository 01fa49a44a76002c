//! SINR targets to powers and back, and what happens past the feasibility edge.
//!
//! Run with `cargo run --example sinr_power_duality`.

use fcir::network::{is_sinr_feasible, powers_from_sinr, sinr_of};
use fcir::{NetworkInstance, SinrVector};

fn main() -> fcir::Result<()> {
    let net = NetworkInstance::builder(2, 0, 2, 0)
        .serving(vec![0, 1])
        .gains(vec![vec![1.0, 0.5], vec![0.5, 1.0]])
        .noise(vec![0.1, 0.1])
        .p_max(vec![1.0, 1.0])
        .target_sinr(vec![0.5, 0.5])
        .build()?;

    for target in [0.5, 1.0, 1.5, 1.9, 2.0, 2.5] {
        let gamma = SinrVector(vec![target; 2]);
        match powers_from_sinr(&net, &gamma) {
            Ok(p) => {
                let back = sinr_of(&net, &p)?;
                println!(
                    "target {target:>4}: p = ({:.4}, {:.4}) within caps = {} recovered = ({:.6}, {:.6})",
                    p[0],
                    p[1],
                    is_sinr_feasible(&net, &gamma),
                    back[0],
                    back[1]
                );
            }
            Err(e) => println!("target {target:>4}: {e}"),
        }
    }
    Ok(())
}
