//! Linearized coupled cluster over excitation ranks `1..=m_max`.
//!
//! The amplitude equations `Σ_ν M_μν t_ν = −⟨μ|H|0⟩` use the projected
//! Liouvillian `M_μν = ⟨μ|[H, O_ν]|0⟩ = ⟨μ|H_N|ν⟩ − ⟨μ|O_ν H_N|0⟩`. The
//! second term is nonzero only for `μ = ν ∪ κ` with `κ` a double, where it
//! cancels `⟨μ|H_N|ν⟩` exactly (with zero occupied–virtual Fock block the
//! single-`κ` terms vanish too). So `M_μν = ⟨μ|H_N|ν⟩` whenever
//! `rank μ ≤ rank ν + 1` and zero otherwise.
//!
//! Columns of `M` are local; rows are not, because `⟨μ|H_N|μ ∪ κ⟩` is
//! nonzero for every connected double `κ` anywhere. Matvecs therefore
//! scatter columns.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::elements::{connected_doubles, element, local_neighbors, Bra, Interaction, ELEMENT_EPS};
use crate::error::{Error, Result};
use crate::exbasis::{BasisSpec, ExcitationString, SparseState};
use crate::model::IntegralSet;
use crate::operator::{OperatorHandle, OperatorKind, Row, SparseOperator};
use crate::solvers::{linear_solve, ConvergenceParams};

pub struct Liouvillian {
    ints: Arc<IntegralSet>,
    spec: BasisSpec,
    doubles: Vec<(ExcitationString, f64)>,
}

impl Liouvillian {
    pub fn new(ints: Arc<IntegralSet>, m_max: usize) -> Result<Self> {
        if m_max < 1 {
            return Err(Error::RankMismatch {
                got: m_max,
                expected: "m_max ≥ 1".into(),
            });
        }
        let spec = ints.basis(m_max)?;
        let doubles = if m_max >= 2 {
            connected_doubles(&ints, &spec)?
        } else {
            Vec::new()
        };
        Ok(Self { ints, spec, doubles })
    }

    /// Doubles `κ` with `⟨κ|H_N|0⟩ ≠ 0`, with that value.
    pub fn doubles(&self) -> &[(ExcitationString, f64)] {
        &self.doubles
    }

    fn check_rank(&self, s: &ExcitationString) -> Result<()> {
        if s.rank() < 1 || s.rank() > self.spec.m {
            return Err(Error::RankMismatch {
                got: s.rank(),
                expected: format!("1..={}", self.spec.m),
            });
        }
        Ok(())
    }
}

impl SparseOperator for Liouvillian {
    fn kind(&self) -> OperatorKind {
        OperatorKind::LccLiouvillian
    }

    fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    fn basis(&self) -> Vec<ExcitationString> {
        self.spec.strings(1..=self.spec.m)
    }

    fn basis_len(&self) -> usize {
        (1..=self.spec.m).map(|k| self.spec.dimension(k)).sum()
    }

    fn row(&self, mu: &ExcitationString) -> Result<Row> {
        self.check_rank(mu)?;
        let r = mu.rank();
        let bra = Bra::new(&self.ints, &self.spec, Interaction::Bare, mu)?;
        let mut row = Vec::new();
        for nu in local_neighbors(&self.ints, mu, r.saturating_sub(1).max(1), (r + 1).min(self.spec.m)) {
            let v = bra.element(&nu)?;
            if v.abs() > ELEMENT_EPS {
                row.push((nu, v));
            }
        }
        if r + 2 <= self.spec.m {
            for (kappa, _) in &self.doubles {
                if kappa.indices().any(|o| mu.indices().any(|x| x == o)) {
                    continue;
                }
                let holes: Vec<usize> = mu.holes().chain(kappa.holes()).collect();
                let parts: Vec<usize> = mu.particles().chain(kappa.particles()).collect();
                let (nu, _) = crate::exbasis::canonicalize(&holes, &parts)?;
                let v = bra.element(&nu)?;
                if v.abs() > ELEMENT_EPS {
                    row.push((nu, v));
                }
            }
            row.sort_by(|a, b| a.0.cmp(&b.0));
        }
        Ok(row)
    }

    fn column(&self, nu: &ExcitationString) -> Result<Row> {
        self.check_rank(nu)?;
        let r = nu.rank();
        // H is real symmetric, so ⟨μ|H_N|ν⟩ = ⟨ν|H_N|μ⟩
        let ket = Bra::new(&self.ints, &self.spec, Interaction::Bare, nu)?;
        let mut col = Vec::new();
        for mu in local_neighbors(&self.ints, nu, r.saturating_sub(2).max(1), (r + 1).min(self.spec.m)) {
            let v = ket.element(&mu)?;
            if v.abs() > ELEMENT_EPS {
                col.push((mu, v));
            }
        }
        Ok(col)
    }

    fn is_symmetric(&self) -> bool {
        false
    }
}

pub fn liouvillian_operator(ints: Arc<IntegralSet>, m_max: usize) -> Result<OperatorHandle> {
    Ok(OperatorHandle::new(Liouvillian::new(ints, m_max)?))
}

/// Row `μ` of the projected Liouvillian.
pub fn liouvillian_row(ints: &Arc<IntegralSet>, m_max: usize, mu: &ExcitationString) -> Result<Row> {
    Liouvillian::new(ints.clone(), m_max)?.row(mu)
}

/// `−⟨μ|H|0⟩`.
pub fn rhs(ints: &IntegralSet, spec: &BasisSpec, mu: &ExcitationString) -> Result<f64> {
    Ok(-element(ints, spec, Interaction::Bare, mu, &ExcitationString::vacuum())?)
}

/// Right-hand side over the whole manifold; only doubles contribute.
pub fn rhs_vector(op: &Liouvillian) -> SparseState {
    SparseState::from_real(op.doubles.iter().map(|(k, v)| (k.clone(), -v)))
}

#[derive(Debug, Clone)]
pub struct AmplitudeVector {
    pub amplitudes: SparseState,
    pub m_max: usize,
}

impl AmplitudeVector {
    /// `t <rank> <holes...> <particles...> <value>` lines in key order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (s, v) in self.amplitudes.real_parts() {
            write!(out, "t {}", s.rank()).unwrap();
            for i in s.holes().chain(s.particles()) {
                write!(out, " {i}").unwrap();
            }
            writeln!(out, " {v:e}").unwrap();
        }
        out
    }
}

/// `t_ij^ab = (V_ijab − V_ijba)/(f_ii + f_jj − f_aa − f_bb)` on every
/// connected double.
pub fn mp2_guess(op: &Liouvillian) -> Result<AmplitudeVector> {
    let ints = &op.ints;
    let mut t = SparseState::new();
    for (kappa, v) in &op.doubles {
        let denom: f64 = kappa.holes().map(|i| ints.f(i, i)).sum::<f64>()
            - kappa.particles().map(|a| ints.f(a, a)).sum::<f64>();
        if denom.abs() < 1e-12 {
            return Err(Error::DegenerateDenominator(kappa.to_string()));
        }
        t.add(kappa.clone(), Complex64::new(v / denom, 0.0));
    }
    t.prune();
    Ok(AmplitudeVector {
        amplitudes: t,
        m_max: op.spec.m,
    })
}

/// `E_c = Σ_κ ⟨0|H_N|κ⟩ t_κ` over canonical doubles.
pub fn correlation_energy(op: &Liouvillian, t: &SparseState) -> f64 {
    op.doubles.iter().map(|(k, v)| v * t.get(k).re).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub e_c: f64,
    pub e_mp2: f64,
    /// Krylov steps plus the initial residual check of the guess.
    pub iterations: usize,
    /// `‖M t − b‖₂ / ‖b‖₂`.
    pub residual: f64,
    pub support_trace: Vec<usize>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct LccSolution {
    pub amplitudes: AmplitudeVector,
    pub report: SolveReport,
}

impl LccSolution {
    pub fn into_result(self) -> Result<Self> {
        if self.report.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what: "lcc",
                iterations: self.report.iterations,
                residual: self.report.residual,
            })
        }
    }
}

/// Iteration cap `10·√dim + 200`.
pub fn default_max_iter(spec: &BasisSpec) -> usize {
    let dim: usize = (1..=spec.m).map(|k| spec.dimension(k)).sum();
    (10.0 * (dim as f64).sqrt()).ceil() as usize + 200
}

/// Solve the amplitude equations by restarted GMRES from the MP2 guess.
/// An unconverged solve still returns the last iterate, flagged.
pub fn lcc_solve(ints: Arc<IntegralSet>, m_max: usize, p: &ConvergenceParams) -> Result<LccSolution> {
    let op = Arc::new(Liouvillian::new(ints, m_max)?);
    let handle = OperatorHandle::from_arc(op.clone());
    solve_with(&op, &handle, p)
}

/// As [`lcc_solve`] with a caller-built handle (threads, statistics).
pub fn solve_with(op: &Liouvillian, handle: &OperatorHandle, p: &ConvergenceParams) -> Result<LccSolution> {
    let b = rhs_vector(op);
    let guess = mp2_guess(op)?;
    let e_mp2 = correlation_energy(op, &guess.amplitudes);
    let out = linear_solve(handle, &b, Some(&guess.amplitudes), p)?;
    let e_c = correlation_energy(op, &out.x);
    Ok(LccSolution {
        amplitudes: AmplitudeVector {
            amplitudes: out.x,
            m_max: op.spec.m,
        },
        report: SolveReport {
            e_c,
            e_mp2,
            iterations: out.iterations + 1,
            residual: out.residual,
            support_trace: out.support_trace,
            converged: out.converged,
        },
    })
}
