//! Log-barrier Newton method for convex programs of the form
//!
//! ```text
//! minimize    c^T z
//! subject to  log sum_j exp(a_kj^T z + b_kj) <= 0,   k = 1..K
//! ```
//!
//! which is a geometric program after the change of variables `z = log x`.
//! Sizes here are tiny (a few dozen variables), so the Hessian is formed
//! densely and factored with Cholesky.

use nalgebra::{DMatrix, DVector};

/// One log-sum-exp constraint; each row of `a` is one exponent vector.
#[derive(Debug, Clone)]
pub struct LseConstraint {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LseConstraint {
    pub fn new(terms: Vec<(Vec<(usize, f64)>, f64)>, n: usize) -> Self {
        let mut a = DMatrix::zeros(terms.len(), n);
        let mut b = DVector::zeros(terms.len());
        for (r, (exps, coef)) in terms.into_iter().enumerate() {
            for (var, e) in exps {
                a[(r, var)] += e;
            }
            b[r] = coef;
        }
        Self { a, b }
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        let e = &self.a * z + &self.b;
        let mx = e.max();
        mx + e.iter().map(|v| (v - mx).exp()).sum::<f64>().ln()
    }

    /// Value, gradient and Hessian.
    fn eval(&self, z: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let e = &self.a * z + &self.b;
        let mx = e.max();
        let w: DVector<f64> = e.map(|v| (v - mx).exp());
        let total = w.sum();
        let w = w / total;
        let g = mx + total.ln();
        let grad = self.a.transpose() * &w;
        let n = z.len();
        let mut hess = DMatrix::zeros(n, n);
        if self.a.nrows() > 1 {
            for (r, wr) in w.iter().enumerate() {
                let row = self.a.row(r).transpose();
                hess.ger(*wr, &row, &row, 1.0);
            }
            hess.ger(-1.0, &grad, &grad, 1.0);
        }
        (g, grad, hess)
    }
}

#[derive(Debug, Clone)]
pub struct ConvexProgram {
    pub objective: DVector<f64>,
    pub constraints: Vec<LseConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions {
    /// Stop when the duality-gap bound `K / t` is below this.
    pub gap_tol: f64,
    pub t0: f64,
    /// Barrier parameter growth per outer step.
    pub mu: f64,
    /// Total Newton step budget.
    pub max_newton: usize,
    /// Centering stops when half the squared Newton decrement is below this.
    pub newton_tol: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            t0: 1.0,
            mu: 10.0,
            max_newton: 500,
            newton_tol: 1e-20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BarrierResult {
    pub z: DVector<f64>,
    pub objective: f64,
    pub newton_steps: usize,
    /// Duality-gap bound at exit.
    pub gap: f64,
    /// Norm of the centering gradient scaled by `1/t`, a KKT stationarity residual.
    pub kkt_residual: f64,
    pub stalled: bool,
}

impl ConvexProgram {
    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn max_constraint(&self, z: &DVector<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value(z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn strictly_feasible(&self, z: &DVector<f64>) -> bool {
        self.constraints.iter().all(|c| c.value(z) < 0.0)
    }

    fn barrier_value(&self, t: f64, z: &DVector<f64>) -> f64 {
        let mut v = t * self.objective.dot(z);
        for c in &self.constraints {
            let g = c.value(z);
            if g >= 0.0 {
                return f64::INFINITY;
            }
            v -= (-g).ln();
        }
        v
    }

    fn barrier_derivatives(&self, t: f64, z: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.dim();
        let mut grad = &self.objective * t;
        let mut hess = DMatrix::zeros(n, n);
        for c in &self.constraints {
            let (g, dg, d2g) = c.eval(z);
            let inv = -1.0 / g;
            grad.axpy(inv, &dg, 1.0);
            hess += d2g * inv;
            hess.ger(inv * inv, &dg, &dg, 1.0);
        }
        (grad, hess)
    }

    /// Minimizes from a strictly feasible `z0`. `early_stop` is checked after
    /// every Newton step.
    pub fn solve(
        &self,
        z0: DVector<f64>,
        opts: BarrierOptions,
        early_stop: Option<&dyn Fn(&DVector<f64>) -> bool>,
    ) -> BarrierResult {
        debug_assert!(self.strictly_feasible(&z0));
        let k = self.constraints.len().max(1) as f64;
        let mut z = z0;
        let mut t = opts.t0;
        let mut steps = 0;
        let mut stalled = false;
        'outer: loop {
            // centering
            let center_start = steps;
            loop {
                if steps - center_start >= 60 {
                    break;
                }
                if steps >= opts.max_newton {
                    stalled = true;
                    break 'outer;
                }
                let (grad, hess) = self.barrier_derivatives(t, &z);
                let dz = match newton_direction(hess, &grad) {
                    Some(d) => d,
                    None => {
                        stalled = true;
                        break 'outer;
                    }
                };
                let decrement = -grad.dot(&dz);
                if decrement / 2.0 <= opts.newton_tol {
                    break;
                }
                let f0 = self.barrier_value(t, &z);
                let mut s = 1.0;
                let mut accepted = false;
                while s > 1e-20 {
                    let cand = &z + &dz * s;
                    let f1 = self.barrier_value(t, &cand);
                    // full steps are safe inside the quadratic region, where
                    // function values may be below roundoff
                    let quadratic = decrement < 1e-2 && s == 1.0;
                    if f1.is_finite() && (quadratic || f1 < f0 - 0.25 * s * decrement) {
                        z = cand;
                        accepted = true;
                        break;
                    }
                    s *= 0.5;
                }
                steps += 1;
                if let Some(stop) = early_stop {
                    if stop(&z) {
                        break 'outer;
                    }
                }
                if !accepted {
                    // roundoff floor reached at this t; treat as centered
                    break;
                }
            }
            if k / t < opts.gap_tol {
                break;
            }
            t *= opts.mu;
        }
        let (grad, _) = self.barrier_derivatives(t, &z);
        BarrierResult {
            kkt_residual: grad.norm() / t,
            objective: self.objective.dot(&z),
            z,
            newton_steps: steps,
            gap: k / t,
            stalled,
        }
    }

    /// Finds a strictly feasible point by minimizing `s` subject to
    /// `g_k(z) <= s` and `s >= -1`, starting from an arbitrary `z0`.
    pub fn phase_one(&self, z0: &DVector<f64>, opts: BarrierOptions) -> Option<DVector<f64>> {
        let start_max = self.max_constraint(z0);
        if start_max < -1e-3 {
            return Some(z0.clone());
        }
        let n = self.dim();
        let s_var = n;
        let mut constraints: Vec<LseConstraint> = self
            .constraints
            .iter()
            .map(|c| {
                let mut a = c.a.clone().insert_column(n, 0.0);
                a.column_mut(s_var).fill(-1.0);
                LseConstraint { a, b: c.b.clone() }
            })
            .collect();
        constraints.push(LseConstraint::new(vec![(vec![(s_var, -1.0)], -1.0)], n + 1));
        let mut objective = DVector::zeros(n + 1);
        objective[s_var] = 1.0;
        let aux = ConvexProgram {
            objective,
            constraints,
        };
        let mut w0 = z0.clone().insert_row(n, 0.0);
        w0[s_var] = (start_max + 1.0).max(0.0);
        let stop = |w: &DVector<f64>| w[s_var] < -1e-3;
        let res = aux.solve(w0, opts, Some(&stop));
        let z = res.z.rows(0, n).into_owned();
        if self.strictly_feasible(&z) {
            Some(z)
        } else {
            None
        }
    }
}

fn newton_direction(mut hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let n = hess.nrows();
    let scale = (0..n).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..12 {
        if let Some(ch) = hess.clone().cholesky() {
            let d = ch.solve(&(-grad));
            if d.iter().all(|x| x.is_finite()) {
                return Some(d);
            }
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
        for i in 0..n {
            hess[(i, i)] += reg;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lse_matches_direct_sum() {
        let c = LseConstraint::new(vec![(vec![(0, 1.0)], 0.5f64.ln()), (vec![(1, 2.0)], 0.25f64.ln())], 2);
        let z = DVector::from_vec(vec![0.3, -0.2]);
        let direct = (0.5 * 0.3f64.exp() + 0.25 * (-0.4f64).exp()).ln();
        assert_relative_eq!(c.value(&z), direct, max_relative = 1e-14);
    }

    #[test]
    fn linear_program_box() {
        // minimize -x - y subject to x <= 1, y <= 2 (as single-term LSE)
        let prog = ConvexProgram {
            objective: DVector::from_vec(vec![-1.0, -1.0]),
            constraints: vec![
                LseConstraint::new(vec![(vec![(0, 1.0)], -1.0)], 2),
                LseConstraint::new(vec![(vec![(1, 1.0)], -2.0)], 2),
                // keep the problem bounded below
                LseConstraint::new(vec![(vec![(0, -1.0)], -10.0)], 2),
                LseConstraint::new(vec![(vec![(1, -1.0)], -10.0)], 2),
            ],
        };
        let r = prog.solve(DVector::zeros(2), BarrierOptions::default(), None);
        assert!(!r.stalled);
        assert_relative_eq!(r.z[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(r.z[1], 2.0, epsilon = 1e-8);
    }

    #[test]
    fn gp_maximize_xy_on_simplex() {
        // maximize x*y s.t. x + y <= 1, in log variables
        let prog = ConvexProgram {
            objective: DVector::from_vec(vec![-1.0, -1.0]),
            constraints: vec![LseConstraint::new(vec![(vec![(0, 1.0)], 0.0), (vec![(1, 1.0)], 0.0)], 2)],
        };
        let z0 = DVector::from_vec(vec![-2.0, -2.0]);
        let r = prog.solve(z0, BarrierOptions::default(), None);
        assert_relative_eq!(r.z[0].exp(), 0.5, epsilon = 1e-8);
        assert_relative_eq!(r.z[1].exp(), 0.5, epsilon = 1e-8);
        assert!(r.kkt_residual < 1e-7, "{r:?}");
    }

    #[test]
    fn phase_one_finds_interior() {
        let prog = ConvexProgram {
            objective: DVector::from_vec(vec![-1.0, -1.0]),
            constraints: vec![
                LseConstraint::new(vec![(vec![(0, 1.0)], 0.0), (vec![(1, 1.0)], 0.0)], 2),
                // x >= 0.1 and y >= 0.1
                LseConstraint::new(vec![(vec![(0, -1.0)], 0.1f64.ln())], 2),
                LseConstraint::new(vec![(vec![(1, -1.0)], 0.1f64.ln())], 2),
            ],
        };
        let z = prog.phase_one(&DVector::from_vec(vec![3.0, -7.0]), BarrierOptions::default()).unwrap();
        assert!(prog.max_constraint(&z) < 0.0);
    }

    #[test]
    fn phase_one_detects_infeasible() {
        // x + y <= 1 and x >= 0.6, y >= 0.6
        let prog = ConvexProgram {
            objective: DVector::from_vec(vec![-1.0, -1.0]),
            constraints: vec![
                LseConstraint::new(vec![(vec![(0, 1.0)], 0.0), (vec![(1, 1.0)], 0.0)], 2),
                LseConstraint::new(vec![(vec![(0, -1.0)], 0.6f64.ln())], 2),
                LseConstraint::new(vec![(vec![(1, -1.0)], 0.6f64.ln())], 2),
            ],
        };
        assert!(prog.phase_one(&DVector::zeros(2), BarrierOptions::default()).is_none());
    }
}
