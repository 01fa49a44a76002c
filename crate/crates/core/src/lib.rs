//! Feasible interference regions for underlay cognitive radio networks.
//!
//! A primary radio network (PUs served by primary base stations) shares the
//! uplink spectrum with a secondary, cognitive network. This crate computes
//! the region of secondary-to-primary interference vectors under which every
//! primary user can still reach its target SINR, and uses it for:
//!
//! - [`region`]: the total-interference box (FTIR), the cognitive-interference
//!   polyhedron (FCIR), infeasibility measures and fixed-ITL box baselines.
//! - [`tpc`]: constrained target-SINR tracking power control.
//! - [`jpac`]: joint power and admission control for infeasible systems.
//! - [`gp`]: successive geometric programming for the maximum aggregate SU
//!   throughput of feasible systems, with an in-crate log-barrier solver.
//! - [`scenario`] and [`experiment`]: Monte Carlo snapshots of cellular and
//!   ad-hoc topologies, metrics and CSV output.
//!
//! Users are indexed PUs first (`0..num_pu`), then SUs. Stations are indexed
//! PBSs first (`0..num_pbs`), then SBSs. Powers are in watts and SINRs are
//! linear everywhere except configuration files, which use dB.
//!
//! ```
//! use fcir::network::NetworkInstance;
//! use fcir::region::build_fcir;
//!
//! // Two primary cells, one PU each, cross gain half of the direct gain.
//! let net = NetworkInstance::builder(2, 0, 2, 0)
//!     .serving(vec![0, 1])
//!     .gains(vec![vec![1.0, 0.5], vec![0.5, 1.0]])
//!     .noise(vec![0.1, 0.1])
//!     .p_max(vec![1.0, 1.0])
//!     .target_sinr(vec![0.5, 0.5])
//!     .build()
//!     .unwrap();
//! let fcir = build_fcir(&net, net.pu_targets()).unwrap();
//! assert!((fcir.a()[(0, 0)] - 1.6).abs() < 1e-12);
//! assert!((fcir.c()[0] - 2.8).abs() < 1e-12);
//! ```

pub mod config;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod jpac;
mod linalg;
pub mod network;
pub mod region;
pub mod scenario;
pub mod tpc;

pub use error::{Error, Result};
pub use network::{NetworkInstance, PowerVector, SinrVector, Tier};

/// Converts decibels to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
