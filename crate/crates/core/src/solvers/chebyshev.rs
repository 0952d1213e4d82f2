use num_complex::Complex64;

use super::{gershgorin, ConvergenceParams};
use crate::error::{Error, Result};
use crate::exbasis::SparseState;
use crate::operator::OperatorHandle;

#[derive(Debug, Clone)]
pub struct Propagation {
    pub state: SparseState,
    /// Chebyshev order kept (one matvec per order).
    pub order: usize,
    /// Spectral interval used for the rescaling.
    pub bounds: (f64, f64),
    pub converged: bool,
}

impl Propagation {
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what: "chebyshev",
                iterations: self.order,
                residual: f64::NAN,
            })
        }
    }
}

/// `exp(−iAT)·v0` by a Chebyshev expansion. `bounds` must enclose the
/// spectrum; `None` takes Gershgorin discs over the whole basis. Terms
/// stop once `2|J_k(aT)| < p.tol` past the Bessel peak; more than
/// `p.max_iter` terms marks the result unconverged.
pub fn propagate(
    handle: &OperatorHandle,
    v0: &SparseState,
    time: f64,
    bounds: Option<(f64, f64)>,
    p: &ConvergenceParams,
) -> Result<Propagation> {
    p.validate()?;
    let (lo, hi) = match bounds {
        Some(b) => b,
        None => gershgorin(handle, handle.basis().iter())?,
    };
    let half = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    let global = Complex64::from_polar(1.0, -mid * time);
    if half <= 0.0 || time == 0.0 {
        // zero-width Gershgorin discs: A is mid·1
        return Ok(Propagation {
            state: v0.scaled(global),
            order: 0,
            bounds: (lo, hi),
            converged: true,
        });
    }
    let x = half * time.abs();
    let coeffs = chebyshev_coefficients(x, p.tol);
    let order = coeffs.len() - 1;
    let converged = order <= p.max_iter;
    let kept = order.min(p.max_iter);
    // (−i)^k for t > 0, (+i)^k for t < 0
    let unit = if time >= 0.0 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let scaled_apply = |v: &SparseState| -> Result<SparseState> {
        let mut w = handle.apply(v)?;
        w.axpy(Complex64::new(-mid, 0.0), v);
        w.scale(Complex64::new(1.0 / half, 0.0));
        Ok(w)
    };
    let mut out = v0.scaled(Complex64::new(coeffs[0], 0.0));
    let mut prev = v0.clone();
    let mut phase = Complex64::new(1.0, 0.0);
    if kept >= 1 {
        let mut cur = scaled_apply(v0)?;
        phase *= unit;
        out.axpy(phase * (2.0 * coeffs[1]), &cur);
        for c in coeffs.iter().take(kept + 1).skip(2) {
            let mut next = scaled_apply(&cur)?;
            next.scale(Complex64::new(2.0, 0.0));
            next.axpy(Complex64::new(-1.0, 0.0), &prev);
            phase *= unit;
            out.axpy(phase * (2.0 * c), &next);
            prev = cur;
            cur = next;
        }
    }
    out.scale(global);
    Ok(Propagation {
        state: out,
        order: kept,
        bounds: (lo, hi),
        converged,
    })
}

/// `J_0(x) … J_K(x)` with `K` the first order past `x` where
/// `2|J_K| < tol` and `2|J_{K+1}| < tol`.
fn chebyshev_coefficients(x: f64, tol: f64) -> Vec<f64> {
    let mut n = (x + 2.0 * x.cbrt() * (1.0 / tol).ln().powf(2.0 / 3.0) + 30.0).ceil() as usize;
    loop {
        let j = bessel_j(x, n);
        let cut = (0..n).find(|&k| k as f64 > x && 2.0 * j[k].abs() < tol && 2.0 * j[k + 1].abs() < tol);
        if let Some(k) = cut {
            return j[..=k].to_vec();
        }
        n *= 2;
    }
}

/// Bessel functions `J_0(x) … J_n(x)` for `x ≥ 0` by Miller's backward
/// recurrence, normalized with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j(x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = n.max(x.ceil() as usize);
    let mut start = top + 20 + (160.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        if j_cur.abs() > 1e200 {
            j_cur *= 1e-200;
            j_next *= 1e-200;
            sum *= 1e-200;
            for v in out.iter_mut() {
                *v *= 1e-200;
            }
        }
        let idx = k - 1;
        if idx <= n {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            sum += 2.0 * j_cur;
        }
    }
    sum += j_cur;
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}
