//! Support growth of repeated sparse matvecs from a single string.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{classical_cost, CostExpr, Method};
use crate::exbasis::{ExcitationString, SparseState};
use crate::model::IntegralSet;
use crate::operator::OperatorHandle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iter: usize,
    pub nnz: usize,
    /// Multiply–adds spent so far.
    pub cum_ops: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SparsityTrace {
    pub m: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "R_c")]
    pub r_c: f64,
    pub d: usize,
    pub origin: String,
    pub basis_dim: usize,
    pub s_max: usize,
    pub points: Vec<TracePoint>,
    pub max_support: usize,
    pub aborted: bool,
}

impl SparsityTrace {
    pub fn into_result(self) -> Result<Self> {
        if self.aborted {
            let support = self.points.last().map_or(0, |p| p.nnz);
            Err(Error::Aborted {
                support,
                limit: self.max_support,
            })
        } else {
            Ok(self)
        }
    }

    /// `iter,nnz,cum_ops,wall_ms` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,nnz,cum_ops,wall_ms\n");
        for p in &self.points {
            writeln!(out, "{},{},{},{:.3}", p.iter, p.nnz, p.cum_ops, p.wall_ms).unwrap();
        }
        out
    }

    /// As [`to_csv`](Self::to_csv) without the timing column, which is
    /// the only nondeterministic field.
    pub fn to_csv_deterministic(&self) -> String {
        let mut out = String::from("iter,nnz,cum_ops\n");
        for p in &self.points {
            writeln!(out, "{},{},{}", p.iter, p.nnz, p.cum_ops).unwrap();
        }
        out
    }

    /// `Σ_k nnz(k)·s_max` over the matvecs performed: the cost if every
    /// touched column were as long as the longest.
    pub fn ops_upper_estimate(&self) -> u64 {
        let n = self.points.len().saturating_sub(1);
        self.points[..n].iter().map(|p| p.nnz as u64 * self.s_max as u64).sum()
    }
}

/// Apply the operator `d` times to `unit(μ0)` with no dropping, recording
/// the support after every step. `visit` sees each iterate. Stops early,
/// flagged `aborted`, once the support exceeds `max_support`.
pub fn probe_with(
    handle: &OperatorHandle,
    ints: &IntegralSet,
    mu0: &ExcitationString,
    d: usize,
    max_support: usize,
    mut visit: impl FnMut(usize, &SparseState),
) -> Result<SparsityTrace> {
    let spec = handle.spec();
    let basis_dim = handle.basis_len();
    let start = Instant::now();
    let mut x = SparseState::with_threshold(0.0);
    x.set(mu0.clone(), Complex64::new(1.0, 0.0));
    visit(0, &x);
    let mut points = vec![TracePoint {
        iter: 0,
        nnz: 1,
        cum_ops: 0,
        wall_ms: 0.0,
    }];
    let mut cum = 0u64;
    let mut aborted = false;
    for k in 1..=d {
        let (y, ops) = handle.apply_counted(&x)?;
        cum += ops;
        // keep magnitudes O(1) without changing the support
        let n = y.max_abs();
        x = if n > 0.0 { y.scaled(Complex64::new(1.0 / n, 0.0)) } else { y };
        visit(k, &x);
        points.push(TracePoint {
            iter: k,
            nnz: x.support(),
            cum_ops: cum,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        if x.support() > max_support {
            aborted = true;
            break;
        }
    }
    Ok(SparsityTrace {
        m: spec.m,
        dim: ints.dim(),
        r_c: ints.r_c(),
        d,
        origin: mu0.to_string(),
        basis_dim,
        s_max: handle.s_max(),
        points,
        max_support,
        aborted,
    })
}

pub fn probe(
    handle: &OperatorHandle,
    ints: &IntegralSet,
    mu0: &ExcitationString,
    d: usize,
    max_support: usize,
) -> Result<SparsityTrace> {
    probe_with(handle, ints, mu0, d, max_support, |_, _| {})
}

/// Least-squares slope of `ln nnz(k)` against `ln(k + ½)` over the later
/// half of the growth window (`k ≥ 1`, `nnz < basis_dim / 10`), keeping at
/// least four points.
///
/// A ball of `k` unit moves in `n` coordinates holds `≈ (2^n/n!)(k + ½)^n`
/// points, so the offset removes most of the curvature at small `k`; the
/// later half drops the first steps, where ordering and exclusion
/// constraints among the indices still dominate.
pub fn fit_volume_exponent(trace: &SparsityTrace) -> Result<f64> {
    let window: Vec<&TracePoint> = trace
        .points
        .iter()
        .filter(|p| p.iter >= 1 && (p.nnz as f64) < trace.basis_dim as f64 / 10.0)
        .collect();
    if window.len() < 4 {
        return Err(Error::InvalidConfig(format!(
            "need at least 4 pre-saturation points, have {}",
            window.len()
        )));
    }
    let last = window[window.len() - 1].iter;
    let first = window.iter().position(|p| 2 * p.iter >= last).unwrap_or(0).min(window.len() - 4);
    let pts: Vec<(f64, f64)> = window[first..]
        .iter()
        .map(|p| ((p.iter as f64 + 0.5).ln(), (p.nnz as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// True when the holes and the particles of `s` can each be matched to
/// those of `origin` with every matched pair at most `reach` apart.
pub fn within_lightcone(ints: &IntegralSet, origin: &ExcitationString, s: &ExcitationString, reach: f64) -> bool {
    if origin.rank() != s.rank() {
        return false;
    }
    let a: Vec<usize> = origin.holes().collect();
    let b: Vec<usize> = s.holes().collect();
    let c: Vec<usize> = origin.particles().collect();
    let e: Vec<usize> = s.particles().collect();
    matchable(ints, &a, &b, reach) && matchable(ints, &c, &e, reach)
}

fn matchable(ints: &IntegralSet, from: &[usize], to: &[usize], reach: f64) -> bool {
    fn go(ints: &IntegralSet, from: &[usize], to: &[usize], used: &mut Vec<bool>, k: usize, reach: f64) -> bool {
        if k == from.len() {
            return true;
        }
        for j in 0..to.len() {
            if !used[j] && ints.distance(from[k], to[j]) <= reach + 1e-9 {
                used[j] = true;
                if go(ints, from, to, used, k + 1, reach) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let mut used = vec![false; to.len()];
    go(ints, from, to, &mut used, 0, reach)
}

/// Dominant classical cost of `d` sparse iterations.
pub fn classical_cost_expr(method: Method, m: usize, dim: usize, crystal: bool) -> CostExpr {
    classical_cost(method, m, dim, crystal, false)
}
