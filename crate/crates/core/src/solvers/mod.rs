//! Iterative kernels over [`OperatorHandle`]: lowest eigenpairs (Lanczos),
//! linear systems (restarted GMRES), and real-time propagation
//! (Chebyshev). Every kernel reports whether it converged; the iterate is
//! returned either way.

mod chebyshev;
mod gmres;
mod lanczos;

pub use chebyshev::{bessel_j, propagate, Propagation};
pub use gmres::{linear_solve, LinearSolve, GMRES_RESTART};
pub use lanczos::{lowest_eigenpair, lowest_eigenpairs, Eigenpairs};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exbasis::{ExcitationString, SparseState};
use crate::operator::OperatorHandle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParams {
    pub tol: f64,
    pub max_iter: usize,
    /// Spectral gap `Δ` used only by [`predicted_iterations`].
    pub gap: Option<f64>,
    /// Initial-state overlap `γ ∈ (0, 1]`.
    pub overlap: Option<f64>,
    /// Prefactor `C` of the iteration-count model.
    pub c: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
            gap: None,
            overlap: None,
            c: 1.0,
        }
    }
}

impl ConvergenceParams {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(g) = self.overlap {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::InvalidConfig(format!("overlap must lie in (0, 1], got {g}")));
            }
        }
        if let Some(d) = self.gap {
            if !(d > 0.0) {
                return Err(Error::InvalidConfig(format!("gap must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

/// `max(1, ⌈C·Δ⁻¹·ln(1/(tol·γ))⌉)`, with `γ = 1` when unset.
///
/// Bookkeeping only; no solver stops on this count.
pub fn predicted_iterations(p: &ConvergenceParams) -> Result<usize> {
    p.validate()?;
    let gap = p
        .gap
        .ok_or_else(|| Error::InvalidConfig("predicted_iterations needs a gap estimate".into()))?;
    let gamma = p.overlap.unwrap_or(1.0);
    let n = p.c / gap * (1.0 / (p.tol * gamma)).ln();
    // guard against ln rounding a whole number up by one ulp
    let n = (n - 1e-9).ceil();
    Ok(if n < 1.0 { 1 } else { n as usize })
}

/// Gershgorin interval `[min(a_μμ − r_μ), max(a_μμ + r_μ)]` over the given rows.
pub fn gershgorin<'a>(
    handle: &OperatorHandle,
    rows: impl IntoIterator<Item = &'a ExcitationString>,
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for mu in rows {
        let row = handle.row(mu)?;
        let mut d = 0.0;
        let mut r = 0.0;
        for (nu, v) in &row {
            if nu == mu {
                d += v;
            } else {
                r += v.abs();
            }
        }
        lo = lo.min(d - r);
        hi = hi.max(d + r);
    }
    if lo > hi {
        return Ok((0.0, 0.0));
    }
    Ok((lo, hi))
}

/// Power-iteration estimate of `‖A‖₂` from `A^T A`, starting from a seeded
/// random vector over the basis. Always a lower bound up to rounding.
pub fn power_norm(handle: &OperatorHandle, iterations: usize, seed: u64) -> Result<f64> {
    let basis = handle.basis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: SparseState = basis
        .into_iter()
        .map(|s| (s, Complex64::new(rng.gen_range(-1.0..1.0), 0.0)))
        .collect();
    let n = v.norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    v.scale(Complex64::new(1.0 / n, 0.0));
    let mut est: f64 = 0.0;
    for _ in 0..iterations {
        let av = handle.apply(&v)?;
        est = est.max(av.norm());
        let w = apply_transpose(handle, &av)?;
        let n = w.norm();
        if n == 0.0 {
            break;
        }
        v = w.scaled(Complex64::new(1.0 / n, 0.0));
    }
    Ok(est)
}

/// `A^T x` by scattering rows.
pub fn apply_transpose(handle: &OperatorHandle, x: &SparseState) -> Result<SparseState> {
    if handle.is_symmetric() {
        return handle.apply(x);
    }
    let mut y = SparseState::with_threshold(x.drop_threshold());
    for (mu, xv) in x.iter() {
        for (nu, a) in handle.row_shared(mu)?.iter() {
            y.add(nu.clone(), xv * a);
        }
    }
    y.prune();
    Ok(y)
}
