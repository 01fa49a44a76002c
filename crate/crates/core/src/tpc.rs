//! Constrained target-SINR tracking power control.
//!
//! Every active user sets `p_i <- min(p_max_i, target_i * (interference_i +
//! noise) / h_ii)`, which equals `p_i * target_i / gamma_i(p)` whenever
//! `p_i > 0`. Inactive users stay silent. The update is a standard
//! interference function, so the iteration converges to a unique stationary
//! vector: the minimal target-achieving powers when the active set is
//! feasible, and `p_max` for every user that cannot be supported otherwise.

use crate::network::{sinr_of, NetworkInstance, PowerVector};
use crate::Result;

/// Relative SINR slack when deciding whether a user meets its target.
pub const SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpcOptions {
    /// Stop when `max_i |p_i' - p_i| / p_i'` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TpcOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpcResult {
    pub p_stationary: PowerVector,
    pub iterations: usize,
    pub converged: bool,
    /// Per-user flag; inactive users are reported as not supported.
    pub supported: Vec<bool>,
}

impl TpcResult {
    pub fn all_supported(&self, users: impl IntoIterator<Item = usize>) -> bool {
        users.into_iter().all(|i| self.supported[i])
    }
}

fn active_mask(net: &NetworkInstance, active: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; net.num_users()];
    for &i in active {
        mask[i] = true;
    }
    mask
}

fn step_masked(net: &NetworkInstance, p: &[f64], mask: &[bool]) -> Vec<f64> {
    let inn = net.interference_plus_noise(p);
    (0..net.num_users())
        .map(|i| {
            if mask[i] {
                let want = net.target_sinr()[i] * inn[i] / net.direct_gain(i);
                want.min(net.p_max()[i])
            } else {
                0.0
            }
        })
        .collect()
}

/// One synchronous update of every user in `active`.
pub fn tpc_step(net: &NetworkInstance, p: &PowerVector, active: &[usize]) -> PowerVector {
    PowerVector(step_masked(net, p, &active_mask(net, active)))
}

/// Whether each user meets its target within [`SUPPORT_TOL`].
pub fn supported_users(net: &NetworkInstance, p: &PowerVector) -> Result<Vec<bool>> {
    let gamma = sinr_of(net, p)?;
    Ok(gamma
        .iter()
        .zip(net.target_sinr())
        .map(|(g, t)| *g >= t * (1.0 - SUPPORT_TOL))
        .collect())
}

/// Iterates [`tpc_step`] from `p0` until the relative change is below `tol`.
pub fn run_tpc(net: &NetworkInstance, active: &[usize], p0: &PowerVector, opts: TpcOptions) -> Result<TpcResult> {
    let mask = active_mask(net, active);
    if p0.len() != net.num_users() {
        return Err(crate::Error::DimensionMismatch {
            expected: net.num_users(),
            found: p0.len(),
        });
    }
    let mut p: Vec<f64> = p0.iter().zip(&mask).map(|(x, &on)| if on { *x } else { 0.0 }).collect();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = step_masked(net, &p, &mask);
        iterations += 1;
        let change = next
            .iter()
            .zip(&p)
            .map(|(a, b)| {
                let d = (a - b).abs();
                if d == 0.0 {
                    0.0
                } else {
                    d / a.abs().max(b.abs())
                }
            })
            .fold(0.0, f64::max);
        p = next;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let p = PowerVector(p);
    let mut supported = supported_users(net, &p)?;
    for (s, on) in supported.iter_mut().zip(&mask) {
        *s &= *on;
    }
    Ok(TpcResult {
        p_stationary: p,
        iterations,
        converged,
        supported,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::*;
    use crate::network::{powers_from_sinr, SinrVector};
    use approx::assert_relative_eq;

    #[test]
    fn single_user_steps() {
        let net = single(1.0, 1.0);
        let p = tpc_step(&net, &PowerVector(vec![0.0]), &[0]);
        assert_relative_eq!(p[0], 0.1, max_relative = 1e-15);
        let p = tpc_step(&net, &PowerVector(vec![1.0]), &[0]);
        assert_relative_eq!(p[0], 0.1, max_relative = 1e-15);
        let hard = single(1.0, 100.0);
        let mut p = PowerVector(vec![0.0]);
        for _ in 0..5 {
            p = tpc_step(&hard, &p, &[0]);
            assert_eq!(p[0], 1.0);
        }
    }

    #[test]
    fn inactive_users_stay_silent() {
        let net = t2(1.0);
        let p = tpc_step(&net, &PowerVector(vec![0.3, 0.3]), &[0]);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn single_user_fixed_point() {
        let net = single(1.0, 1.0);
        let r = run_tpc(&net, &[0], &PowerVector::zeros(1), TpcOptions::default()).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.p_stationary[0], 0.1, max_relative = 1e-12);
        assert!(r.supported[0]);
    }

    #[test]
    fn t2_fixed_point_matches_inverse() {
        let net = t2(1.0);
        let r = run_tpc(&net, &[0, 1], &PowerVector::zeros(2), TpcOptions::default()).unwrap();
        assert!(r.converged);
        let exact = powers_from_sinr(&net, &SinrVector(vec![0.5, 0.5])).unwrap();
        for i in 0..2 {
            assert_relative_eq!(r.p_stationary[i], exact[i], max_relative = 1e-9);
            assert!(r.supported[i]);
        }
    }

    #[test]
    fn infeasible_pair_saturates() {
        let net = symmetric_pair(2.0);
        let r = run_tpc(&net, &[0, 1], &PowerVector::zeros(2), TpcOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.p_stationary.0, vec![1.0, 1.0]);
        assert_eq!(r.supported, vec![false, false]);
    }

    #[test]
    fn iterates_are_monotone_from_zero() {
        let net = t2(1.0);
        let mut p = PowerVector::zeros(2);
        for _ in 0..50 {
            let next = tpc_step(&net, &p, &[0, 1]);
            assert!(next.iter().zip(p.iter()).all(|(a, b)| *a >= b * (1.0 - 1e-15)));
            p = next;
        }
    }
}
