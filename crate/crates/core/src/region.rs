//! Feasible interference regions of the primary network.
//!
//! Given the PU target SINRs, the total-interference region is a box (one
//! limit per PBS) and the cognitive-interference region is the polyhedron
//! `{ I >= 0 : A I <= C }` with `A = (I - H)^-1` and `C = phi_max - A N`.
//! Rows for PBSs that serve no PU carry `C = +inf` and never bind.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, RHO_LIMIT};
use crate::network::{NetworkInstance, PowerVector};
use crate::{Error, Result};

/// Relative slack used by membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Per-PBS total interference temperature limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtirBox {
    pub titl: Vec<f64>,
}

impl FtirBox {
    pub fn contains(&self, total: &[f64]) -> bool {
        total
            .iter()
            .zip(&self.titl)
            .all(|(i, lim)| *i >= 0.0 && *i <= *lim + MEMBERSHIP_TOL * lim.abs())
    }
}

/// Halfspace description of the feasible cognitive-interference region.
#[derive(Debug, Clone, PartialEq)]
pub struct FcirPolyhedron {
    a: DMatrix<f64>,
    c: DVector<f64>,
    phi_max: Vec<f64>,
    noise: Vec<f64>,
}

/// Slack and signed distance of an interference vector to every FCIR face.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityReport {
    pub s_inf: Vec<f64>,
    pub dist: Vec<f64>,
    pub violated: Vec<usize>,
}

/// `x / y` with `x / 0 = +inf` for `x > 0`.
fn safe_div(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        f64::INFINITY
    } else {
        x / y
    }
}

/// Row-times-vector that skips zero coefficients, so infinite entries in
/// `v` paired with a zero coefficient contribute nothing.
fn sparse_dot(row: impl Iterator<Item = f64>, v: &[f64]) -> f64 {
    row.zip(v)
        .filter(|(a, _)| *a != 0.0)
        .map(|(a, x)| a * x)
        .sum()
}

fn pu_weight(gamma: f64) -> f64 {
    gamma / (gamma + 1.0)
}

fn check_pu_gamma(net: &NetworkInstance, gamma_p: &[f64]) -> Result<()> {
    if gamma_p.len() != net.num_pu() {
        return Err(Error::DimensionMismatch {
            expected: net.num_pu(),
            found: gamma_p.len(),
        });
    }
    if let Some(k) = gamma_p.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(Error::InvalidNetwork(format!("PU gamma[{k}] must be finite and >= 0")));
    }
    Ok(())
}

/// Coupling matrix `H` between PBSs.
///
/// `H[m][m] = sum_{i in cell m} g_i/(g_i+1)` and
/// `H[m][n] = sum_{i in cell n} (h_mi/h_ni) g_i/(g_i+1)`.
pub fn build_h_matrix(net: &NetworkInstance, gamma_p: &[f64]) -> Result<DMatrix<f64>> {
    check_pu_gamma(net, gamma_p)?;
    let bp = net.num_pbs();
    let mut h = DMatrix::zeros(bp, bp);
    for i in net.pu_indices() {
        let n = net.serving(i);
        let w = pu_weight(gamma_p[i]);
        for m in 0..bp {
            h[(m, n)] += if m == n {
                w
            } else {
                net.gain(m, i) / net.gain(n, i) * w
            };
        }
    }
    Ok(h)
}

/// `phi_max[m] = min_{i in cell m} p_max_i h_mi (g_i+1)/g_i`, `+inf` for empty cells.
fn phi_max(net: &NetworkInstance, gamma_p: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; net.num_pbs()];
    for i in net.pu_indices() {
        let m = net.serving(i);
        let cap = safe_div(net.p_max()[i] * net.gain(m, i), pu_weight(gamma_p[i]));
        out[m] = out[m].min(cap);
    }
    out
}

/// `(I - H)^-1`, failing when the PU-only system cannot be protected.
fn coupling_inverse(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rho = linalg::spectral_radius_nonneg(h);
    if rho.hi >= RHO_LIMIT && rho.estimate() >= RHO_LIMIT {
        return Err(Error::PrimaryInfeasible(format!(
            "spectral radius of H is {:.6}",
            rho.estimate()
        )));
    }
    let mut a = linalg::inverse_identity_minus(h)
        .ok_or_else(|| Error::PrimaryInfeasible("I - H is singular".into()))?;
    // A = sum_k H^k vanishes wherever H has no path; LU leaves ~1e-17 there,
    // which an empty cell's unbounded interference would otherwise amplify
    let n = h.nrows();
    let mut reach = DMatrix::from_fn(n, n, |i, j| i == j || h[(i, j)] != 0.0);
    for k in 0..n {
        for i in 0..n {
            if reach[(i, k)] {
                for j in 0..n {
                    if reach[(k, j)] {
                        reach[(i, j)] = true;
                    }
                }
            }
        }
    }
    a.zip_apply(&reach, |x, r| {
        if !r {
            *x = 0.0;
        }
    });
    if a.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::PrimaryInfeasible("(I - H)^-1 has negative entries".into()));
    }
    Ok(a)
}

/// Builds the FCIR polyhedron for the PU SINRs `gamma_p`.
pub fn build_fcir(net: &NetworkInstance, gamma_p: &[f64]) -> Result<FcirPolyhedron> {
    let h = build_h_matrix(net, gamma_p)?;
    let a = coupling_inverse(&h)?;
    let phi_max = phi_max(net, gamma_p);
    let noise = net.noise()[..net.num_pbs()].to_vec();
    let an = &a * DVector::from_column_slice(&noise);
    let c = DVector::from_fn(net.num_pbs(), |m, _| phi_max[m] - an[m]);
    if let Some(m) = c.iter().position(|x| *x < 0.0) {
        return Err(Error::PrimaryInfeasible(format!(
            "PBS {m} cannot protect its PUs even without cognitive interference (C = {:e})",
            c[m]
        )));
    }
    Ok(FcirPolyhedron {
        a,
        c,
        phi_max,
        noise,
    })
}

/// Total interference temperature limits of every PBS.
pub fn build_ftir(net: &NetworkInstance, gamma_p: &[f64]) -> Result<FtirBox> {
    check_pu_gamma(net, gamma_p)?;
    let phi_max = phi_max(net, gamma_p);
    let mut load = vec![0.0; net.num_pbs()];
    for i in net.pu_indices() {
        load[net.serving(i)] += pu_weight(gamma_p[i]);
    }
    let titl = (0..net.num_pbs())
        .map(|m| {
            if phi_max[m].is_infinite() {
                f64::INFINITY
            } else {
                phi_max[m] * (1.0 - load[m]) - net.noise()[m]
            }
        })
        .collect();
    Ok(FtirBox { titl })
}

/// PU powers required to hold `gamma_p` under cognitive interference `i_sp`.
///
/// Returns a vector over the PUs only.
pub fn pu_powers_from_interference(
    net: &NetworkInstance,
    gamma_p: &[f64],
    i_sp: &[f64],
) -> Result<PowerVector> {
    let h = build_h_matrix(net, gamma_p)?;
    let a = coupling_inverse(&h)?;
    Ok(pu_powers_with(net, &a, gamma_p, i_sp))
}

pub(crate) fn pu_powers_with(
    net: &NetworkInstance,
    a: &DMatrix<f64>,
    gamma_p: &[f64],
    i_sp: &[f64],
) -> PowerVector {
    let bp = net.num_pbs();
    let rhs = DVector::from_fn(bp, |m, _| net.noise()[m] + i_sp[m]);
    let phi = a * rhs;
    net.pu_indices()
        .map(|i| {
            let b = net.serving(i);
            pu_weight(gamma_p[i]) * phi[b] / net.gain(b, i)
        })
        .collect::<Vec<_>>()
        .into()
}

impl FcirPolyhedron {
    /// Builds a polyhedron directly from its halfspace data.
    pub fn from_parts(a: DMatrix<f64>, c: Vec<f64>, phi_max: Vec<f64>, noise: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if a.nrows() != n || a.ncols() != n || phi_max.len() != n || noise.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.nrows(),
            });
        }
        Ok(Self {
            a,
            c: DVector::from_vec(c),
            phi_max,
            noise,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn phi_max(&self) -> &[f64] {
        &self.phi_max
    }

    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    /// Whether row `m` constrains anything (its PBS serves at least one PU).
    pub fn is_active_row(&self, m: usize) -> bool {
        self.c[m].is_finite()
    }

    /// `(A i)_m`.
    pub fn row_value(&self, m: usize, i_sp: &[f64]) -> f64 {
        sparse_dot(self.a.row(m).iter().copied(), i_sp)
    }

    fn row_tol(&self, m: usize, i_sp: &[f64]) -> f64 {
        let mag: f64 = self
            .a
            .row(m)
            .iter()
            .zip(i_sp)
            .filter(|(a, _)| **a != 0.0)
            .map(|(a, x)| (a * x).abs())
            .sum();
        MEMBERSHIP_TOL * (self.c[m].abs() + mag)
    }

    /// `0 <= i_sp` and `A i_sp <= C`, with relative slack.
    pub fn contains(&self, i_sp: &[f64]) -> bool {
        if i_sp.len() != self.dim() {
            return false;
        }
        let scale = self.c.iter().filter(|c| c.is_finite()).fold(0.0f64, |s, c| s.max(c.abs()));
        if i_sp.iter().any(|x| *x < -MEMBERSHIP_TOL * scale) {
            return false;
        }
        (0..self.dim())
            .filter(|&m| self.is_active_row(m))
            .all(|m| self.row_value(m, i_sp) - self.c[m] <= self.row_tol(m, i_sp))
    }

    /// Slack `A i - C`, signed distances to each face, and the violated faces.
    pub fn infeasibility_report(&self, i_sp: &[f64]) -> InfeasibilityReport {
        let n = self.dim();
        let mut s_inf = Vec::with_capacity(n);
        let mut dist = Vec::with_capacity(n);
        let mut violated = Vec::new();
        for m in 0..n {
            if !self.is_active_row(m) {
                s_inf.push(f64::NEG_INFINITY);
                dist.push(f64::NEG_INFINITY);
                continue;
            }
            let s = self.row_value(m, i_sp) - self.c[m];
            s_inf.push(s);
            dist.push(s / self.row_norm(m));
            if s > self.row_tol(m, i_sp) {
                violated.push(m);
            }
        }
        InfeasibilityReport {
            s_inf,
            dist,
            violated,
        }
    }

    /// Signed distance of `i_sp` to face `m`.
    pub fn signed_distance(&self, m: usize, i_sp: &[f64]) -> f64 {
        if !self.is_active_row(m) {
            return f64::NEG_INFINITY;
        }
        (self.row_value(m, i_sp) - self.c[m]) / self.row_norm(m)
    }

    fn row_norm(&self, m: usize) -> f64 {
        self.a.row(m).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest cognitive interference tolerable at each PBS when all others
    /// receive none: `min_n C_n / A_nm`.
    pub fn axis_intercepts(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|m| {
                (0..self.dim())
                    .filter(|&n| self.is_active_row(n))
                    .map(|n| safe_div(self.c[n], self.a[(n, m)]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Fixed per-PBS ITLs `alpha * intercept`, the box baseline.
    pub fn baseline_itl(&self, alpha: f64) -> Vec<f64> {
        self.axis_intercepts()
            .into_iter()
            .map(|x| if alpha == 0.0 { 0.0 } else { alpha * x })
            .collect()
    }

    /// Whether the box `[0, itl]` lies inside the polyhedron. `A >= 0`, so
    /// checking the far corner suffices.
    pub fn box_inside(&self, itl: &[f64]) -> bool {
        (0..self.dim())
            .filter(|&m| self.is_active_row(m))
            .all(|m| self.row_value(m, itl) - self.c[m] <= self.row_tol(m, itl))
    }

    /// Largest `alpha` whose baseline box still lies inside the polyhedron.
    pub fn max_inscribed_alpha(&self) -> f64 {
        let corner = self.axis_intercepts();
        (0..self.dim())
            .filter(|&m| self.is_active_row(m))
            .map(|m| safe_div(self.c[m], self.row_value(m, &corner)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Serializable halfspace document.
    pub fn document(&self) -> FcirDocument {
        let n = self.dim();
        FcirDocument {
            dim: n,
            a: (0..n).map(|m| self.a.row(m).iter().copied().collect()).collect(),
            c: self.c.iter().copied().collect(),
            phi_max: self.phi_max.clone(),
            noise: self.noise.clone(),
            axis_intercepts: self.axis_intercepts(),
            max_inscribed_alpha: self.max_inscribed_alpha(),
        }
    }
}

/// Structured text form of an [`FcirPolyhedron`]. Inactive rows have
/// `c = inf` and `phi_max = inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcirDocument {
    pub dim: usize,
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub phi_max: Vec<f64>,
    pub noise: Vec<f64>,
    pub axis_intercepts: Vec<f64>,
    pub max_inscribed_alpha: f64,
}

impl FcirDocument {
    pub fn to_polyhedron(&self) -> Result<FcirPolyhedron> {
        let n = self.dim;
        if self.a.len() != n || self.a.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.a.len(),
            });
        }
        let a = DMatrix::from_fn(n, n, |i, j| self.a[i][j]);
        FcirPolyhedron::from_parts(a, self.c.clone(), self.phi_max.clone(), self.noise.clone())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("FCIR document serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn fcir_contains(fcir: &FcirPolyhedron, i_sp: &[f64]) -> bool {
    fcir.contains(i_sp)
}

pub fn infeasibility_report(fcir: &FcirPolyhedron, i_sp: &[f64]) -> InfeasibilityReport {
    fcir.infeasibility_report(i_sp)
}

pub fn baseline_itl(fcir: &FcirPolyhedron, alpha: f64) -> Vec<f64> {
    fcir.baseline_itl(alpha)
}

pub fn box_inside_fcir(fcir: &FcirPolyhedron, itl: &[f64]) -> bool {
    fcir.box_inside(itl)
}

/// Points along each face `A_m i = C_m` for two-PBS plots, clipped to the
/// positive quadrant. Returns `(face, i1, i2)` triples.
pub fn boundary_samples(fcir: &FcirPolyhedron, samples: usize) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    if fcir.dim() != 2 || samples < 2 {
        return out;
    }
    for m in 0..2 {
        if !fcir.is_active_row(m) {
            continue;
        }
        let (a1, a2, c) = (fcir.a[(m, 0)], fcir.a[(m, 1)], fcir.c[m]);
        let x_end = safe_div(c, a1);
        if !x_end.is_finite() {
            continue;
        }
        for k in 0..samples {
            let x = x_end * k as f64 / (samples - 1) as f64;
            let y = ((c - a1 * x) / a2).max(0.0);
            out.push((m, x, y));
        }
    }
    out
}
