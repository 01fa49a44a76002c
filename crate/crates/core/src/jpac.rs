//! Joint power and admission control for infeasible systems.
//!
//! All SUs start admitted. Each pass runs constrained TPC over the PUs and
//! the admitted SUs, then removes one SU:
//!
//! - Case 1: the stationary cognitive interference lies inside the FCIR but
//!   some admitted SU misses its target. Pick the SBS with the most
//!   unsupported SUs and remove the SU that disturbs it the most.
//! - Case 2: the interference lies outside the FCIR. Remove the SU whose
//!   removal minimizes the summed signed distance to the violated faces.
//!
//! The loop exits once the interference is inside the FCIR and every
//! admitted SU is supported. [`run_jpac_box`] is the fixed-ITL baseline: the
//! same loop with the polyhedron replaced by a per-PBS box.

use serde::Serialize;

use crate::network::{cognitive_interference, targets_for, is_sinr_feasible, NetworkInstance, PowerVector, Tier};
use crate::region::{build_fcir, FcirPolyhedron, MEMBERSHIP_TOL};
use crate::tpc::{run_tpc, TpcOptions, TpcResult};
use crate::{Error, Result};

/// Which rule removed an SU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RemovalCase {
    /// Primary tier protected, some SU unsupported.
    IntraTier = 1,
    /// Primary protection region violated.
    Protection = 2,
}

impl RemovalCase {
    pub fn tag(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Removal {
    pub su: usize,
    pub case: RemovalCase,
    /// Signed distance (polyhedron) or excess `I_m - itl_m` (box) per PBS at
    /// the stationary point that triggered the removal.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JpacOutcome {
    pub admitted: Vec<usize>,
    pub removal_trace: Vec<Removal>,
    pub p_final: PowerVector,
    pub pu_outage_ratio: f64,
    pub su_outage_ratio: f64,
    /// Number of TPC phases run.
    pub phases: usize,
    /// Exit certificate: every admitted SU and every PU supported, and the
    /// final cognitive interference inside the protection region.
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JpacOptions {
    pub tpc: TpcOptions,
}

fn argmax_lowest(values: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Case 1 removal candidate.
///
/// `m*` is the SBS with the most unsupported admitted SUs; the returned SU
/// maximizes `p_i h_{m* i}` over all admitted SUs. Ties go to the lowest index.
pub fn select_removal_case1(
    net: &NetworkInstance,
    p_stationary: &PowerVector,
    supported: &[bool],
    active_sus: &[usize],
) -> Result<usize> {
    if active_sus.is_empty() {
        return Err(Error::NoCandidate);
    }
    let mut unsupported = vec![0usize; net.num_stations()];
    for &i in active_sus {
        if !supported[i] {
            unsupported[net.serving(i)] += 1;
        }
    }
    let sbs = net.num_pbs()..net.num_stations();
    let m_star = argmax_lowest(sbs.map(|m| (m, unsupported[m] as f64))).ok_or(Error::NoCandidate)?;
    argmax_lowest(active_sus.iter().map(|&i| (i, p_stationary[i] * net.gain(m_star, i)))).ok_or(Error::NoCandidate)
}

/// Case 2 removal candidate: argmin over admitted SUs of the summed signed
/// distance, over currently violated faces, after removing that SU alone.
pub fn select_removal_case2(
    net: &NetworkInstance,
    fcir: &FcirPolyhedron,
    p_stationary: &PowerVector,
    active_sus: &[usize],
) -> Result<usize> {
    if active_sus.is_empty() {
        return Err(Error::NoCandidate);
    }
    let current = cognitive_interference(net, p_stationary, active_sus);
    let violated = fcir.infeasibility_report(&current).violated;
    let mut best: Option<(usize, f64)> = None;
    for &i in active_sus {
        let reduced: Vec<f64> = current
            .iter()
            .enumerate()
            .map(|(m, v)| v - p_stationary[i] * net.gain(m, i))
            .collect();
        let score: f64 = violated.iter().map(|&m| fcir.signed_distance(m, &reduced)).sum();
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::NoCandidate)
}

/// Fraction of `tier` users whose SINR is below target at `p`; 0 for an empty tier.
pub fn outage_ratio(net: &NetworkInstance, p: &PowerVector, tier: Tier) -> Result<f64> {
    let supported = crate::tpc::supported_users(net, p)?;
    let users = match tier {
        Tier::Primary => net.pu_indices(),
        Tier::Secondary => net.su_indices(),
    };
    let n = users.len();
    if n == 0 {
        return Ok(0.0);
    }
    let out = users.filter(|&i| !supported[i]).count();
    Ok(out as f64 / n as f64)
}

/// Primary protection rule used by the admission loop.
enum Protection<'a> {
    Polyhedron(&'a FcirPolyhedron),
    Box(&'a [f64]),
}

impl Protection<'_> {
    fn violations(&self, i_sp: &[f64]) -> (bool, Vec<f64>) {
        match self {
            Protection::Polyhedron(f) => {
                let r = f.infeasibility_report(i_sp);
                (r.violated.is_empty(), r.dist)
            }
            Protection::Box(itl) => {
                let excess: Vec<f64> = i_sp.iter().zip(itl.iter()).map(|(i, lim)| i - lim).collect();
                let inside = i_sp
                    .iter()
                    .zip(itl.iter())
                    .all(|(i, lim)| *i <= lim + MEMBERSHIP_TOL * lim.abs());
                (inside, excess)
            }
        }
    }

    fn select(&self, net: &NetworkInstance, p: &PowerVector, active: &[usize], excess: &[f64]) -> Result<usize> {
        match self {
            Protection::Polyhedron(f) => select_removal_case2(net, f, p, active),
            Protection::Box(_) => {
                let worst = argmax_lowest(excess.iter().copied().enumerate()).ok_or(Error::NoCandidate)?;
                argmax_lowest(active.iter().map(|&i| (i, p[i] * net.gain(worst, i)))).ok_or(Error::NoCandidate)
            }
        }
    }
}

fn ensure_primary_feasible(net: &NetworkInstance) -> Result<()> {
    if is_sinr_feasible(net, &targets_for(net, &[])) {
        Ok(())
    } else {
        Err(Error::PrimaryInfeasible("PUs cannot reach their targets without SUs".into()))
    }
}

fn admission_loop(net: &NetworkInstance, protection: Protection<'_>, opts: JpacOptions) -> Result<JpacOutcome> {
    let mut active: Vec<usize> = net.su_indices().collect();
    let mut trace = Vec::new();
    let mut warm = PowerVector::zeros(net.num_users());
    let mut phases = 0;
    let (tpc, inside) = loop {
        let users: Vec<usize> = net.pu_indices().chain(active.iter().copied()).collect();
        let tpc: TpcResult = run_tpc(net, &users, &warm, opts.tpc)?;
        phases += 1;
        let i_sp = cognitive_interference(net, &tpc.p_stationary, &active);
        let (inside, measures) = protection.violations(&i_sp);
        if active.is_empty() {
            break (tpc, inside);
        }
        let case = if inside && !tpc.all_supported(active.iter().copied()) {
            RemovalCase::IntraTier
        } else if !inside {
            RemovalCase::Protection
        } else {
            break (tpc, inside);
        };
        let su = match case {
            RemovalCase::IntraTier => select_removal_case1(net, &tpc.p_stationary, &tpc.supported, &active)?,
            RemovalCase::Protection => protection.select(net, &tpc.p_stationary, &active, &measures)?,
        };
        active.retain(|&i| i != su);
        trace.push(Removal {
            su,
            case,
            distances: measures,
        });
        warm = tpc.p_stationary;
        warm[su] = 0.0;
    };
    let certified = inside && tpc.converged && tpc.all_supported(net.pu_indices().chain(active.iter().copied()));
    let p = tpc.p_stationary;
    Ok(JpacOutcome {
        pu_outage_ratio: outage_ratio(net, &p, Tier::Primary)?,
        su_outage_ratio: outage_ratio(net, &p, Tier::Secondary)?,
        admitted: active,
        removal_trace: trace,
        p_final: p,
        phases,
        certified,
    })
}

/// Admission control protected by the FCIR polyhedron.
pub fn run_jpac(net: &NetworkInstance, opts: JpacOptions) -> Result<JpacOutcome> {
    ensure_primary_feasible(net)?;
    let fcir = build_fcir(net, net.pu_targets())?;
    run_jpac_with(net, &fcir, opts)
}

/// Same as [`run_jpac`] with a prebuilt polyhedron.
pub fn run_jpac_with(net: &NetworkInstance, fcir: &FcirPolyhedron, opts: JpacOptions) -> Result<JpacOutcome> {
    admission_loop(net, Protection::Polyhedron(fcir), opts)
}

/// Fixed-ITL baseline: the protection region is the box `[0, itl]`.
///
/// PUs are only guaranteed protection when the box lies inside the FCIR;
/// the outcome records the realized PU outage either way.
pub fn run_jpac_box(net: &NetworkInstance, itl: &[f64], opts: JpacOptions) -> Result<JpacOutcome> {
    if itl.len() != net.num_pbs() {
        return Err(Error::DimensionMismatch {
            expected: net.num_pbs(),
            found: itl.len(),
        });
    }
    ensure_primary_feasible(net)?;
    admission_loop(net, Protection::Box(itl), opts)
}
