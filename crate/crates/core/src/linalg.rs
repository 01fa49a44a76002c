//! Small dense helpers shared by the network model and the region builders.

use nalgebra::{DMatrix, DVector};

/// Matrices whose spectral radius is at or above this value are treated as
/// infeasible.
pub(crate) const RHO_LIMIT: f64 = 1.0 - 1e-9;

const POWER_ITER_TOL: f64 = 1e-10;
const POWER_ITER_CAP: usize = 10_000;

/// Lower and upper bounds on the spectral radius of a nonnegative matrix.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadiusBounds {
    pub lo: f64,
    pub hi: f64,
}

impl RadiusBounds {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Power iteration on `F + I` with Collatz-Wielandt bracketing.
///
/// For a nonnegative `F` and positive `x`, `min_i (Bx)_i/x_i <= rho(B) <=
/// max_i (Bx)_i/x_i`. The identity shift makes the Perron root strictly
/// dominant, so periodic matrices converge too. Iteration stops when the
/// bracket is narrower than the tolerance or when it already decides the
/// comparison against [`RHO_LIMIT`].
pub(crate) fn spectral_radius_nonneg(f: &DMatrix<f64>) -> RadiusBounds {
    let n = f.nrows();
    if n == 0 {
        return RadiusBounds { lo: 0.0, hi: 0.0 };
    }
    let mut x = DVector::from_element(n, 1.0);
    let mut bounds = RadiusBounds {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    for _ in 0..POWER_ITER_CAP {
        let y = f * &x + &x;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        bounds = RadiusBounds {
            lo: (lo - 1.0).max(bounds.lo),
            hi: (hi - 1.0).min(bounds.hi),
        };
        let scale = y.max();
        x = y / scale;
        if bounds.hi - bounds.lo < POWER_ITER_TOL
            || bounds.hi < RHO_LIMIT
            || bounds.lo >= RHO_LIMIT
        {
            break;
        }
    }
    bounds
}

/// Solves `(I - f) x = rhs` by LU with partial pivoting.
pub(crate) fn solve_identity_minus(f: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let n = f.nrows();
    let m = DMatrix::identity(n, n) - f;
    m.lu().solve(rhs)
}

/// Inverse of `I - f`.
pub(crate) fn inverse_identity_minus(f: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = f.nrows();
    let m = DMatrix::identity(n, n) - f;
    m.lu().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_matrix_brackets_radius() {
        // eigenvalues +-2; plain power iteration would oscillate
        let f = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]);
        let b = spectral_radius_nonneg(&f);
        assert!(b.lo >= RHO_LIMIT);
    }

    #[test]
    fn reducible_matrix_radius() {
        let f = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0]);
        let b = spectral_radius_nonneg(&f);
        assert!(b.hi < RHO_LIMIT);
        assert!(b.lo <= 0.5 + 1e-12 && b.hi >= 0.5 - 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let f = DMatrix::zeros(4, 4);
        let b = spectral_radius_nonneg(&f);
        assert_eq!(b.hi, 0.0);
    }
}
