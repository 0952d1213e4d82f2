use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::ConvergenceParams;
use crate::error::{Error, Result};
use crate::exbasis::SparseState;
use crate::operator::OperatorHandle;

/// Ritz pairs from a Lanczos run, lowest first.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<SparseState>,
    /// `‖A v − e v‖₂` per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Eigenpairs {
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what: "lanczos",
                iterations: self.iterations,
                residual: self.residuals.iter().copied().fold(0.0, f64::max),
            })
        }
    }
}

/// Lowest eigenpair reachable from `v0`.
pub fn lowest_eigenpair(handle: &OperatorHandle, v0: &SparseState, p: &ConvergenceParams) -> Result<Eigenpairs> {
    lowest_eigenpairs(handle, v0, 1, p)
}

/// The `k` lowest Ritz pairs of the Krylov space of `v0`, with full
/// reorthogonalization. Stops when every wanted residual is below
/// `p.tol` (absolute) or the Krylov space is exhausted.
pub fn lowest_eigenpairs(
    handle: &OperatorHandle,
    v0: &SparseState,
    k: usize,
    p: &ConvergenceParams,
) -> Result<Eigenpairs> {
    p.validate()?;
    if !handle.is_symmetric() {
        return Err(Error::InvalidConfig("Lanczos needs a symmetric operator".into()));
    }
    let k = k.max(1);
    let n0 = v0.norm();
    if n0 == 0.0 {
        return Err(Error::InvalidConfig("zero start vector".into()));
    }
    let mut q: Vec<SparseState> = vec![v0.scaled(Complex64::new(1.0 / n0, 0.0))];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best: (Vec<f64>, DMatrix<f64>, Vec<f64>) = (Vec::new(), DMatrix::zeros(0, 0), Vec::new());
    let mut converged = false;
    let mut iterations = 0;
    while iterations < p.max_iter {
        iterations += 1;
        let j = q.len() - 1;
        let mut w = handle.apply(&q[j])?;
        let a = q[j].dot(&w).re;
        alpha.push(a);
        w.axpy(Complex64::new(-a, 0.0), &q[j]);
        if j > 0 {
            w.axpy(Complex64::new(-beta[j - 1], 0.0), &q[j - 1]);
        }
        for _ in 0..2 {
            for qi in &q {
                let c = qi.dot(&w);
                w.axpy(-c, qi);
            }
        }
        let b = w.norm();
        let (vals, coeffs) = ritz(&alpha, &beta);
        let want = k.min(vals.len());
        let res: Vec<f64> = (0..want).map(|n| (b * coeffs[(j, n)]).abs()).collect();
        // the scale of the problem sets what "exhausted" means
        let scale = alpha.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let exhausted = b <= 1e-13 * scale;
        best = (vals[..want].to_vec(), coeffs.columns(0, want).into_owned(), res.clone());
        if (want == k && res.iter().all(|&r| r <= p.tol)) || exhausted {
            converged = want == k || exhausted;
            break;
        }
        beta.push(b);
        q.push(w.scaled(Complex64::new(1.0 / b, 0.0)));
    }
    let (values, coeffs, _) = best;
    let mut vectors = Vec::with_capacity(values.len());
    let mut residuals = Vec::with_capacity(values.len());
    for n in 0..values.len() {
        let mut v = SparseState::with_threshold(v0.drop_threshold());
        for (j, qj) in q.iter().enumerate().take(coeffs.nrows()) {
            v.axpy(Complex64::new(coeffs[(j, n)], 0.0), qj);
        }
        let nv = v.norm();
        v.scale(Complex64::new(1.0 / nv, 0.0));
        // explicit residual of the assembled vector
        let mut r = handle.apply(&v)?;
        r.axpy(Complex64::new(-values[n], 0.0), &v);
        residuals.push(r.norm());
        vectors.push(v);
    }
    Ok(Eigenpairs {
        values,
        vectors,
        residuals,
        iterations,
        converged,
    })
}

/// Eigen-decomposition of the tridiagonal Lanczos matrix, ascending.
fn ritz(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = alpha.len();
    let t = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}
