//! Maximum aggregate SU throughput in feasible systems by successive
//! geometric programming.
//!
//! The throughput `sum_i log(1 + gamma_i)` is not a posynomial objective, so
//! each outer step replaces `prod_i (1 + gamma_i)` by the monomial lower bound
//! `c * prod_i gamma_i^lambda_i`, tangent at the current SINRs, and solves the
//! resulting geometric program in log variables. The true objective is
//! nondecreasing across outer steps.
//!
//! PU powers react to SU interference: holding their targets they transmit
//! the powers given by the polyhedron's coupling matrix, which are affine in
//! the SU powers. The PU-to-SU interference is therefore modeled as
//! `e0 + E p_su` with nonnegative `e0` and `E`, which keeps every SINR
//! constraint a posynomial and the constraint set fixed across outer steps.

pub mod barrier;

use nalgebra::{DMatrix, DVector};

use crate::network::{is_sinr_feasible, powers_from_sinr, NetworkInstance, PowerVector, SinrVector};
use crate::region::{build_fcir, pu_powers_with, FcirPolyhedron};
use crate::{Error, Result};
use barrier::{BarrierOptions, ConvexProgram, LseConstraint};

/// Primary protection applied to the SU powers.
#[derive(Debug, Clone, PartialEq)]
pub enum Protection {
    /// Rows of the cognitive-interference polyhedron.
    Polyhedron(FcirPolyhedron),
    /// Fixed per-PBS interference limits.
    Box(Vec<f64>),
}

/// The SU throughput problem with the PU coupling folded in.
#[derive(Debug, Clone)]
pub struct GpProblem {
    su: Vec<usize>,
    /// `w[m][k]`: protection row `m` reads `sum_k w[m][k] p_k <= 1`.
    protection_rows: Vec<Vec<f64>>,
    caps: Vec<f64>,
    targets: Vec<f64>,
    /// SINR of SU `k` is `p_k / (coupling[k] . p + base[k])`.
    coupling: DMatrix<f64>,
    base: Vec<f64>,
    pu_offset: Vec<f64>,
    pu_slope: DMatrix<f64>,
    pu_caps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpIterate {
    /// SU powers, indexed by SU position (global index minus `num_pu`).
    pub p: Vec<f64>,
    /// True SINRs of the SUs at `p`.
    pub gamma: Vec<f64>,
    /// Condensation exponents used to produce this iterate.
    pub lambda: Vec<f64>,
    pub c: f64,
    /// `sum_i log(1 + gamma_i)` in nats.
    pub objective: f64,
    pub newton_steps: usize,
    pub kkt_residual: f64,
    pub stalled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpOptions {
    /// Stop when an outer step improves the objective by less than this.
    pub tol: f64,
    pub max_outer: usize,
    pub barrier: BarrierOptions,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_outer: 50,
            barrier: BarrierOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpOutcome {
    pub last: GpIterate,
    /// Objective at the start point followed by one entry per outer step.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Full power vector: PU powers needed to hold their targets, then SU powers.
    pub p_full: PowerVector,
    /// Fraction of PUs whose required power exceeds their cap.
    pub pu_outage_ratio: f64,
}

/// Interference received from all PUs at each SU's serving station.
pub fn pu_to_su_interference(net: &NetworkInstance, pu_powers: &[f64]) -> Vec<f64> {
    net.su_indices()
        .map(|i| {
            let b = net.serving(i);
            net.pu_indices().map(|j| pu_powers[j] * net.gain(b, j)).sum()
        })
        .collect()
}

/// Condensation weights `lambda_i = gamma_i / (gamma_i + 1)` and the constant
/// `c = prod (1 + gamma_i) / gamma_i^lambda_i`.
pub fn condense(gamma: &[f64]) -> Result<(Vec<f64>, f64)> {
    if let Some(k) = gamma.iter().position(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::DegenerateGamma(k));
    }
    let lambda: Vec<f64> = gamma.iter().map(|g| g / (g + 1.0)).collect();
    let log_c: f64 = gamma
        .iter()
        .zip(&lambda)
        .map(|(g, l)| g.ln_1p() - l * g.ln())
        .sum();
    Ok((lambda, log_c.exp()))
}

impl GpProblem {
    pub fn new(net: &NetworkInstance, protection: &Protection) -> Result<Self> {
        let fcir = build_fcir(net, net.pu_targets())?;
        Self::with_coupling(net, &fcir, protection)
    }

    /// `fcir` supplies the PU power coupling; `protection` the constraints.
    pub fn with_coupling(net: &NetworkInstance, fcir: &FcirPolyhedron, protection: &Protection) -> Result<Self> {
        let su: Vec<usize> = net.su_indices().collect();
        let ns = su.len();
        let bp = net.num_pbs();
        if let Some(k) = su.iter().position(|&i| !(net.target_sinr()[i] > 0.0)) {
            return Err(Error::DegenerateGamma(k));
        }
        let protection_rows = match protection {
            Protection::Polyhedron(poly) => {
                if poly.dim() != bp {
                    return Err(Error::DimensionMismatch {
                        expected: bp,
                        found: poly.dim(),
                    });
                }
                (0..bp)
                    .filter(|&m| poly.is_active_row(m))
                    .map(|m| {
                        let cm = poly.c()[m];
                        if cm <= 0.0 {
                            return Err(Error::InfeasibleProblem);
                        }
                        Ok(su
                            .iter()
                            .map(|&k| (0..bp).map(|n| poly.a()[(m, n)] * net.gain(n, k)).sum::<f64>() / cm)
                            .collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()?
            }
            Protection::Box(itl) => {
                if itl.len() != bp {
                    return Err(Error::DimensionMismatch {
                        expected: bp,
                        found: itl.len(),
                    });
                }
                itl.iter()
                    .enumerate()
                    .filter(|(_, l)| l.is_finite())
                    .map(|(m, &l)| {
                        if l <= 0.0 {
                            return Err(Error::InfeasibleProblem);
                        }
                        Ok(su.iter().map(|&k| net.gain(m, k) / l).collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()?
            }
        };

        // PU powers: offset at zero SU interference plus one column per SU.
        let gamma_p = net.pu_targets();
        let a = fcir.a();
        let pu_offset = pu_powers_with(net, a, gamma_p, &vec![0.0; bp]).into_inner();
        let mut pu_slope = DMatrix::zeros(net.num_pu(), ns);
        for j in net.pu_indices() {
            let b = net.serving(j);
            let scale = gamma_p[j] / (gamma_p[j] + 1.0) / net.direct_gain(j);
            for (col, &k) in su.iter().enumerate() {
                let reach: f64 = (0..bp).map(|n| a[(b, n)] * net.gain(n, k)).sum();
                pu_slope[(j, col)] = scale * reach;
            }
        }
        let e0 = pu_to_su_interference(net, &pu_offset);

        let mut coupling = DMatrix::zeros(ns, ns);
        let mut base = vec![0.0; ns];
        for (row, &i) in su.iter().enumerate() {
            let b = net.serving(i);
            let h = net.direct_gain(i);
            for (col, &k) in su.iter().enumerate() {
                let own = if k == i { 0.0 } else { net.gain(b, k) };
                let via_pu: f64 = net.pu_indices().map(|j| net.gain(b, j) * pu_slope[(j, col)]).sum();
                coupling[(row, col)] = (own + via_pu) / h;
            }
            base[row] = (e0[row] + net.noise()[b]) / h;
        }
        Ok(Self {
            caps: su.iter().map(|&i| net.p_max()[i]).collect(),
            targets: su.iter().map(|&i| net.target_sinr()[i]).collect(),
            su,
            protection_rows,
            coupling,
            base,
            pu_offset,
            pu_slope,
            pu_caps: net.pu_indices().map(|j| net.p_max()[j]).collect(),
        })
    }

    pub fn num_su(&self) -> usize {
        self.su.len()
    }

    /// SU SINRs at SU powers `p`, with the PUs holding their targets.
    pub fn sinr(&self, p: &[f64]) -> Vec<f64> {
        let pv = DVector::from_column_slice(p);
        let denom = &self.coupling * &pv;
        (0..self.su.len()).map(|k| p[k] / (denom[k] + self.base[k])).collect()
    }

    /// PU powers needed to hold their targets when the SUs transmit `p`.
    pub fn pu_powers(&self, p: &[f64]) -> Vec<f64> {
        let pv = DVector::from_column_slice(p);
        let slope = &self.pu_slope * pv;
        self.pu_offset.iter().zip(slope.iter()).map(|(a, b)| a + b).collect()
    }

    /// Largest protection-row value `sum_k w_mk p_k`; at most 1 when protected.
    pub fn protection_load(&self, p: &[f64]) -> f64 {
        self.protection_rows
            .iter()
            .map(|w| w.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Whether `p` satisfies the caps, the protection rows and the SU targets
    /// up to relative slack `tol`.
    pub fn is_feasible(&self, p: &[f64], tol: f64) -> bool {
        let gamma = self.sinr(p);
        p.iter().zip(&self.caps).all(|(x, c)| *x >= 0.0 && *x <= c * (1.0 + tol))
            && self.protection_load(p) <= 1.0 + tol
            && gamma.iter().zip(&self.targets).all(|(g, t)| *g >= t * (1.0 - tol))
    }

    fn objective_at(&self, p: &[f64]) -> (Vec<f64>, f64) {
        let gamma = self.sinr(p);
        let obj = gamma.iter().map(|g| g.ln_1p()).sum();
        (gamma, obj)
    }

    /// Variables are `x_k = ln p_k` (first block) and `y_k = ln gamma_k`.
    fn program(&self, lambda: &[f64]) -> ConvexProgram {
        let ns = self.su.len();
        let n = 2 * ns;
        let x = |k: usize| k;
        let y = |k: usize| ns + k;
        let mut constraints = Vec::new();
        for w in &self.protection_rows {
            let terms: Vec<_> = w
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0.0)
                .map(|(k, c)| (vec![(x(k), 1.0)], c.ln()))
                .collect();
            if !terms.is_empty() {
                constraints.push(LseConstraint::new(terms, n));
            }
        }
        for k in 0..ns {
            constraints.push(LseConstraint::new(vec![(vec![(x(k), 1.0)], -self.caps[k].ln())], n));
            constraints.push(LseConstraint::new(vec![(vec![(y(k), -1.0)], self.targets[k].ln())], n));
            let mut terms = vec![(vec![(y(k), 1.0), (x(k), -1.0)], self.base[k].ln())];
            for l in 0..ns {
                let c = self.coupling[(k, l)];
                if c > 0.0 {
                    terms.push((vec![(y(k), 1.0), (x(l), 1.0), (x(k), -1.0)], c.ln()));
                }
            }
            constraints.push(LseConstraint::new(terms, n));
        }
        let mut objective = DVector::zeros(n);
        for k in 0..ns {
            objective[y(k)] = -lambda[k];
        }
        ConvexProgram { objective, constraints }
    }
}

/// Maximizes `c * prod gamma^lambda` over the problem's constraints, starting
/// the search from SU powers `p_start`.
pub fn solve_inner(
    problem: &GpProblem,
    lambda: &[f64],
    c: f64,
    p_start: &[f64],
    opts: BarrierOptions,
) -> Result<GpIterate> {
    let ns = problem.num_su();
    if lambda.len() != ns || p_start.len() != ns {
        return Err(Error::DimensionMismatch {
            expected: ns,
            found: lambda.len().min(p_start.len()),
        });
    }
    let prog = problem.program(lambda);
    let gamma_start = problem.sinr(p_start);
    let z0 = DVector::from_iterator(
        2 * ns,
        p_start
            .iter()
            .map(|p| p.max(1e-300).ln())
            .chain(gamma_start.iter().zip(&problem.targets).map(|(g, t)| g.max(*t).ln())),
    );
    let start = prog.phase_one(&z0, opts).ok_or(Error::InfeasibleProblem)?;
    let (z, newton_steps, kkt_residual, stalled) = if lambda.iter().all(|l| *l == 0.0) {
        (start, 0, 0.0, false)
    } else {
        let r = prog.solve(start, opts, None);
        (r.z, r.newton_steps, r.kkt_residual, r.stalled)
    };
    let p: Vec<f64> = (0..ns).map(|k| z[k].exp()).collect();
    let (gamma, objective) = problem.objective_at(&p);
    Ok(GpIterate {
        p,
        gamma,
        lambda: lambda.to_vec(),
        c,
        objective,
        newton_steps,
        kkt_residual,
        stalled,
    })
}

/// Successive inner approximation from the minimal target-achieving powers.
pub fn run_algorithm2(net: &NetworkInstance, protection: &Protection, opts: GpOptions) -> Result<GpOutcome> {
    let all_targets = SinrVector(net.target_sinr().to_vec());
    if !is_sinr_feasible(net, &all_targets) {
        return Err(Error::FeasibilityRequired);
    }
    let problem = GpProblem::new(net, protection)?;
    let p_min = powers_from_sinr(net, &all_targets)?;
    let mut p: Vec<f64> = net.su_indices().map(|i| p_min[i]).collect();
    let (mut gamma, mut objective) = problem.objective_at(&p);
    let mut last = GpIterate {
        lambda: vec![0.0; p.len()],
        c: 1.0,
        p: p.clone(),
        gamma: gamma.clone(),
        objective,
        newton_steps: 0,
        kkt_residual: 0.0,
        stalled: false,
    };
    let mut trace = vec![objective];
    let mut converged = problem.num_su() == 0;
    if !converged {
        for _ in 0..opts.max_outer {
            let (lambda, c) = condense(&gamma)?;
            let next = solve_inner(&problem, &lambda, c, &p, opts.barrier)?;
            let gain = next.objective - objective;
            if gain < 0.0 {
                // numerical noise only; keep the better point
                converged = true;
                break;
            }
            trace.push(next.objective);
            p = next.p.clone();
            gamma = next.gamma.clone();
            objective = next.objective;
            last = next;
            if gain < opts.tol {
                converged = true;
                break;
            }
        }
    }
    let pu = problem.pu_powers(&p);
    let over = pu
        .iter()
        .zip(&problem.pu_caps)
        .filter(|(x, c)| **x > **c * (1.0 + 1e-9))
        .count();
    let pu_outage_ratio = if pu.is_empty() { 0.0 } else { over as f64 / pu.len() as f64 };
    let p_full = PowerVector(pu.into_iter().chain(p.iter().copied()).collect());
    Ok(GpOutcome {
        last,
        trace,
        converged,
        p_full,
        pu_outage_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{sinr_of, NetworkInstance};
    use crate::region::build_fcir;
    use approx::assert_relative_eq;

    /// One PBS with a PU, one SBS with `gains.len()` SUs.
    fn cell(su_gains: &[[f64; 2]], pu_pmax: f64) -> NetworkInstance {
        let ns = su_gains.len();
        let m = 1 + ns;
        let mut gains = vec![vec![0.0; m]; 2];
        gains[0][0] = 1.0;
        gains[1][0] = 0.01;
        for (k, g) in su_gains.iter().enumerate() {
            gains[0][1 + k] = g[0];
            gains[1][1 + k] = g[1];
        }
        let mut serving = vec![0];
        serving.extend(std::iter::repeat_n(1, ns));
        NetworkInstance::builder(1, ns, 1, 1)
            .serving(serving)
            .gains(gains)
            .noise(vec![0.1, 0.1])
            .p_max(std::iter::once(pu_pmax).chain(std::iter::repeat_n(1.0, ns)).collect())
            .target_sinr(std::iter::once(0.5).chain(std::iter::repeat_n(0.2, ns)).collect())
            .build()
            .unwrap()
    }

    #[test]
    fn pu_to_su_interference_examples() {
        let net = cell(&[[0.1, 1.0]], 1.0);
        assert_eq!(pu_to_su_interference(&net, &[0.0]), vec![0.0]);
        assert_relative_eq!(pu_to_su_interference(&net, &[0.1])[0], 0.001, max_relative = 1e-15);
    }

    #[test]
    fn condense_examples() {
        let (l, c) = condense(&[1.0]).unwrap();
        assert_eq!(l, vec![0.5]);
        assert_relative_eq!(c, 2.0, max_relative = 1e-15);
        let (l, c) = condense(&[1.0, 1.0]).unwrap();
        assert_eq!(l, vec![0.5, 0.5]);
        assert_relative_eq!(c, 4.0, max_relative = 1e-15);
        let (l, c) = condense(&[3.0]).unwrap();
        assert_eq!(l, vec![0.75]);
        assert_relative_eq!(c, 4.0 / 3f64.powf(0.75), max_relative = 1e-14);
        assert!(matches!(condense(&[1.0, 0.0]), Err(Error::DegenerateGamma(1))));
    }

    #[test]
    fn model_sinr_matches_network_sinr() {
        let net = cell(&[[0.1, 1.0], [0.2, 0.5]], 1.0);
        let fcir = build_fcir(&net, net.pu_targets()).unwrap();
        let problem = GpProblem::new(&net, &Protection::Polyhedron(fcir)).unwrap();
        let p_su = [0.3, 0.2];
        let pu = problem.pu_powers(&p_su);
        let full = PowerVector(vec![pu[0], p_su[0], p_su[1]]);
        let gamma = sinr_of(&net, &full).unwrap();
        assert_relative_eq!(gamma[0], 0.5, max_relative = 1e-12);
        let model = problem.sinr(&p_su);
        assert_relative_eq!(model[0], gamma[1], max_relative = 1e-12);
        assert_relative_eq!(model[1], gamma[2], max_relative = 1e-12);
    }

    #[test]
    fn single_su_reaches_binding_constraint() {
        // PU cap 1 limits the SU through the polyhedron row.
        let net = cell(&[[0.5, 1.0]], 1.0);
        let fcir = build_fcir(&net, net.pu_targets()).unwrap();
        let cap_row = fcir.c()[0] / (fcir.a()[(0, 0)] * net.gain(0, 1));
        let expected = cap_row.min(1.0);
        let out = run_algorithm2(&net, &Protection::Polyhedron(fcir), GpOptions::default()).unwrap();
        assert!(out.trace.len() <= 3, "{:?}", out.trace);
        assert_relative_eq!(out.last.p[0], expected, max_relative = 1e-7);
        assert_eq!(out.pu_outage_ratio, 0.0);
    }

    #[test]
    fn lambda_zero_returns_feasible_start() {
        let net = cell(&[[0.1, 1.0]], 1.0);
        let problem = GpProblem::new(&net, &Protection::Box(vec![0.05])).unwrap();
        let it = solve_inner(&problem, &[0.0], 1.0, &[0.5], BarrierOptions::default()).unwrap();
        assert!(problem.is_feasible(&it.p, 0.0));
    }

    #[test]
    fn infeasible_box_is_reported() {
        let net = cell(&[[0.1, 1.0]], 1.0);
        assert!(matches!(
            GpProblem::new(&net, &Protection::Box(vec![0.0])),
            Err(Error::InfeasibleProblem)
        ));
        // the SU needs p >= 0.02 but the box allows p <= 1e-4
        let problem = GpProblem::new(&net, &Protection::Box(vec![1e-5])).unwrap();
        let r = solve_inner(&problem, &[0.5], 1.0, &[0.5], BarrierOptions::default());
        assert!(matches!(r, Err(Error::InfeasibleProblem)));
    }

    #[test]
    fn objective_trace_is_monotone() {
        let net = cell(&[[0.1, 1.0], [0.05, 0.8], [0.2, 0.6]], 1.0);
        let fcir = build_fcir(&net, net.pu_targets()).unwrap();
        let out = run_algorithm2(&net, &Protection::Polyhedron(fcir), GpOptions::default()).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{:?}", out.trace);
        }
        assert!(out.converged);
        assert!(!out.last.stalled, "{:?}", out.last);
    }

    #[test]
    fn infeasible_system_is_rejected() {
        let mut net = cell(&[[0.1, 1.0]], 1.0);
        net = net.with_targets(vec![0.5, 1e6]).unwrap();
        let fcir = build_fcir(&net, net.pu_targets()).unwrap();
        assert!(matches!(
            run_algorithm2(&net, &Protection::Polyhedron(fcir), GpOptions::default()),
            Err(Error::FeasibilityRequired)
        ));
    }
}
