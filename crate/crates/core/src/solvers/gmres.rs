use num_complex::Complex64;

use super::ConvergenceParams;
use crate::error::{Error, Result};
use crate::exbasis::SparseState;
use crate::operator::OperatorHandle;

pub const GMRES_RESTART: usize = 50;

#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub x: SparseState,
    /// Arnoldi steps taken.
    pub iterations: usize,
    /// Operator applications, including explicit residual checks.
    pub matvecs: usize,
    /// Final `‖b − A x‖ / ‖b‖`.
    pub residual: f64,
    /// Relative residual after every Arnoldi step and every restart.
    pub history: Vec<f64>,
    /// Support of the iterate at each restart boundary.
    pub support_trace: Vec<usize>,
    pub converged: bool,
}

impl LinearSolve {
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what: "gmres",
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

/// Restarted GMRES for `A x = b` to relative residual `p.tol`, at most
/// `p.max_iter` Arnoldi steps.
pub fn linear_solve(
    handle: &OperatorHandle,
    b: &SparseState,
    x0: Option<&SparseState>,
    p: &ConvergenceParams,
) -> Result<LinearSolve> {
    p.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = b.norm();
    let mut x = x0
        .cloned()
        .unwrap_or_else(|| SparseState::with_threshold(b.drop_threshold()));
    let mut matvecs = 0;
    let mut iterations = 0;
    if bnorm == 0.0 {
        return Ok(LinearSolve {
            x: SparseState::with_threshold(b.drop_threshold()),
            iterations: 0,
            matvecs: 0,
            residual: 0.0,
            history: vec![0.0],
            support_trace: vec![0],
            converged: true,
        });
    }
    let residual_of = |x: &SparseState, matvecs: &mut usize| -> Result<SparseState> {
        let mut r = b.clone();
        if !x.is_empty() {
            *matvecs += 1;
            r.axpy(Complex64::new(-1.0, 0.0), &handle.apply(x)?);
        }
        Ok(r)
    };
    let mut r = residual_of(&x, &mut matvecs)?;
    let mut rel = r.norm() / bnorm;
    let mut history = vec![rel];
    let mut support_trace = vec![x.support()];
    while rel > p.tol && iterations < p.max_iter {
        let beta = r.norm();
        let mut v: Vec<SparseState> = vec![r.scaled(Complex64::new(1.0 / beta, 0.0))];
        let mut h: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<Complex64> = Vec::new();
        let mut g: Vec<Complex64> = vec![Complex64::new(beta, 0.0)];
        for j in 0..GMRES_RESTART {
            let mut w = handle.apply(&v[j])?;
            matvecs += 1;
            iterations += 1;
            let mut col = vec![zero; j + 2];
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = vi.dot(&w);
                    col[i] += c;
                    w.axpy(-c, vi);
                }
            }
            let hn = w.norm();
            col[j + 1] = Complex64::new(hn, 0.0);
            for i in 0..j {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = cs[i] * a + sn[i] * bb;
                col[i + 1] = -sn[i].conj() * a + cs[i] * bb;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = zero;
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            h.push(col);
            let est = g[j + 1].norm() / bnorm;
            history.push(est);
            let breakdown = hn <= 1e-14 * beta;
            if est <= p.tol || breakdown || iterations >= p.max_iter {
                break;
            }
            v.push(w.scaled(Complex64::new(1.0 / hn, 0.0)));
        }
        // back substitution on the triangular factor
        let k = h.len();
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= h[l][i] * y[l];
            }
            y[i] = acc / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &v[i]);
        }
        r = residual_of(&x, &mut matvecs)?;
        rel = r.norm() / bnorm;
        history.push(rel);
        support_trace.push(x.support());
    }
    Ok(LinearSolve {
        x,
        iterations,
        matvecs,
        residual: rel,
        history,
        support_trace,
        converged: rel <= p.tol,
    })
}

/// `(c, s)` with `c` real such that `[c s; −s̄ c]·[a; b] = [·; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm());
    }
    let t = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / t;
    let s = (a / a.norm()) * b.conj() / t;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::DenseOperator;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn identity_in_one_step() {
        let h = OperatorHandle::new(DenseOperator::from_matrix(DMatrix::identity(5, 5)).unwrap());
        let b: SparseState = h
            .basis()
            .into_iter()
            .enumerate()
            .map(|(k, s)| (s, Complex64::new(k as f64 + 1.0, 0.5)))
            .collect();
        let out = linear_solve(&h, &b, None, &ConvergenceParams::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        for (k, v) in b.iter() {
            assert!((out.x.get(k) - v).norm() < 1e-14);
        }
    }

    #[test]
    fn dense_nonsymmetric_system() {
        let n = 50;
        let m = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                4.0 + r as f64 * 0.05
            } else {
                ((r * 13 + c * 7) % 17) as f64 / 17.0 * 0.1 - 0.05
            }
        });
        let rhs = DVector::from_fn(n, |r, _| (r as f64).cos());
        let exact = m.clone().lu().solve(&rhs).unwrap();
        let h = OperatorHandle::new(DenseOperator::from_matrix(m).unwrap());
        let basis = h.basis();
        let b: SparseState = basis.iter().cloned().zip(rhs.iter()).map(|(s, &v)| (s, Complex64::new(v, 0.0))).collect();
        let out = linear_solve(&h, &b, None, &ConvergenceParams::with_tol(1e-12)).unwrap();
        assert!(out.converged);
        for (k, s) in basis.iter().enumerate() {
            assert!((out.x.get(s).re - exact[k]).abs() < 1e-10);
        }
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-8) + 1e-15);
        }
    }

    #[test]
    fn zero_rhs() {
        let h = OperatorHandle::new(DenseOperator::from_matrix(DMatrix::identity(2, 2)).unwrap());
        let out = linear_solve(&h, &SparseState::new(), None, &ConvergenceParams::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.x.support(), 0);
    }
}
