//! Target-tracking power control converging to the minimal powers, and
//! saturating when the targets cannot be met.
//!
//! Run with `cargo run --example tpc_convergence`.

use fcir::network::powers_from_sinr;
use fcir::tpc::{run_tpc, tpc_step, TpcOptions};
use fcir::{NetworkInstance, PowerVector, SinrVector};

fn pair(target: f64) -> fcir::Result<NetworkInstance> {
    NetworkInstance::builder(2, 0, 2, 0)
        .serving(vec![0, 1])
        .gains(vec![vec![1.0, 0.5], vec![0.5, 1.0]])
        .noise(vec![0.1, 0.1])
        .p_max(vec![1.0, 1.0])
        .target_sinr(vec![target; 2])
        .build()
}

fn main() -> fcir::Result<()> {
    let net = pair(0.5)?;
    let mut p = PowerVector::zeros(2);
    for k in 1..=8 {
        p = tpc_step(&net, &p, &[0, 1]);
        println!("step {k}: p = ({:.6}, {:.6})", p[0], p[1]);
    }
    let r = run_tpc(&net, &[0, 1], &PowerVector::zeros(2), TpcOptions::default())?;
    let exact = powers_from_sinr(&net, &SinrVector(vec![0.5, 0.5]))?;
    println!(
        "fixed point after {} iterations: ({:.9}, {:.9}), closed form ({:.9}, {:.9})",
        r.iterations, r.p_stationary[0], r.p_stationary[1], exact[0], exact[1]
    );

    let hard = pair(2.5)?;
    let r = run_tpc(&hard, &[0, 1], &PowerVector::zeros(2), TpcOptions::default())?;
    println!(
        "infeasible targets: p = {:?} supported = {:?}",
        r.p_stationary.0,
        r.supported
    );
    Ok(())
}
