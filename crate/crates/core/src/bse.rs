//! The m-exciton effective Hamiltonian `A` in the Tamm–Dancoff form.
//!
//! Rows are evaluated on the fly: each quasiparticle carries its Fock
//! energy and hops, like-charge pairs interact through `W`, and
//! particle–hole pairs through `W` (direct) and `V` (exchange). Elements
//! are relative to the Hartree–Fock energy.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::elements::{local_neighbors, Bra, Interaction, ELEMENT_EPS};
use crate::error::{Error, Result};
use crate::exbasis::{BasisSpec, ExcitationString, SparseState};
use crate::model::IntegralSet;
use crate::operator::{OperatorHandle, OperatorKind, Row, SparseOperator, DENSE_LIMIT};

pub struct ExcitonHamiltonian {
    ints: Arc<IntegralSet>,
    spec: BasisSpec,
}

impl ExcitonHamiltonian {
    pub fn new(ints: Arc<IntegralSet>, m: usize) -> Result<Self> {
        if !(1..=3).contains(&m) {
            return Err(Error::RankMismatch {
                got: m,
                expected: "1..=3".into(),
            });
        }
        let spec = ints.basis(m)?;
        Ok(Self { ints, spec })
    }

    pub fn integrals(&self) -> &IntegralSet {
        &self.ints
    }
}

impl SparseOperator for ExcitonHamiltonian {
    fn kind(&self) -> OperatorKind {
        OperatorKind::BseA
    }

    fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    fn basis(&self) -> Vec<ExcitationString> {
        self.spec.strings_of_rank(self.spec.m)
    }

    fn basis_len(&self) -> usize {
        self.spec.dimension(self.spec.m)
    }

    fn row(&self, mu: &ExcitationString) -> Result<Row> {
        exciton_row(&self.ints, &self.spec, mu)
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Nonzero `(ν, A_μν)` for a rank-`m` string `μ`, in key order.
pub fn exciton_row(ints: &IntegralSet, spec: &BasisSpec, mu: &ExcitationString) -> Result<Row> {
    if mu.rank() != spec.m {
        return Err(Error::RankMismatch {
            got: mu.rank(),
            expected: format!("exactly {}", spec.m),
        });
    }
    let bra = Bra::new(ints, spec, Interaction::Screened, mu)?;
    let mut row = Vec::new();
    for nu in local_neighbors(ints, mu, spec.m, spec.m) {
        let v = bra.element(&nu)?;
        if v.abs() > ELEMENT_EPS {
            row.push((nu, v));
        }
    }
    Ok(row)
}

/// Handle for the rank-`m` exciton Hamiltonian.
pub fn exciton_operator(ints: Arc<IntegralSet>, m: usize) -> Result<OperatorHandle> {
    Ok(OperatorHandle::new(ExcitonHamiltonian::new(ints, m)?))
}

/// `A x`; `x` must live on rank-`m` strings.
pub fn apply_a(handle: &OperatorHandle, x: &SparseState) -> Result<SparseState> {
    handle.apply(x)
}

/// Dense `A` over all rank-`spec.m` strings in key order.
pub fn assemble_dense(ints: &IntegralSet, spec: &BasisSpec) -> Result<DMatrix<f64>> {
    let dim = spec.dimension(spec.m);
    if dim > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim,
            limit: DENSE_LIMIT,
        });
    }
    let basis = spec.strings_of_rank(spec.m);
    let mut a = DMatrix::zeros(dim, dim);
    for (r, mu) in basis.iter().enumerate() {
        for (nu, v) in exciton_row(ints, spec, mu)? {
            let c = basis.binary_search(&nu).expect("row stays in the rank-m basis");
            a[(r, c)] = v;
        }
    }
    Ok(a)
}

/// `2m·(2R_c+1)^D + 1`: one quasiparticle scattered within a cube of
/// half-width `R_c` at a time, plus the diagonal.
pub fn sparsity_bound(m: usize, r_c: usize, dim: usize) -> usize {
    2 * m * (2 * r_c + 1).pow(dim as u32) + 1
}

/// The rank-`m` string with one on-site particle–hole pair on each of the
/// given sites.
pub fn local_excitons(ints: &IntegralSet, sites: &[usize]) -> Result<ExcitationString> {
    let mut holes = Vec::new();
    let mut parts = Vec::new();
    for &site in sites {
        let on = |occ: bool| {
            (0..ints.n_orb())
                .find(|&p| ints.site_of(p) == site && ints.is_occ(p) == occ)
                .ok_or_else(|| Error::InvalidConfig(format!("site {site} has no {} orbital", if occ { "occupied" } else { "virtual" })))
        };
        holes.push(on(true)?);
        parts.push(on(false)?);
    }
    Ok(crate::exbasis::canonicalize(&holes, &parts)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    fn chain(n: usize, cfg: impl FnOnce(&mut ModelConfig)) -> Arc<IntegralSet> {
        let mut c = ModelConfig {
            n_sites: n,
            ..ModelConfig::default()
        };
        cfg(&mut c);
        Arc::new(c.build_lattice().unwrap())
    }

    #[test]
    fn rank_is_checked() {
        let ints = chain(2, |_| {});
        let spec = ints.basis(2).unwrap();
        let s = spec.strings_of_rank(1)[0].clone();
        assert!(matches!(exciton_row(&ints, &spec, &s), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn free_single_exciton_row() {
        let ints = chain(3, |c| {
            c.u = 0.0;
            c.lambda_cd = 0.0;
            c.lambda_dd = 0.0;
            c.t_hop = 0.0;
        });
        let spec = ints.basis(1).unwrap();
        for mu in spec.strings_of_rank(1) {
            let row = exciton_row(&ints, &spec, &mu).unwrap();
            assert_eq!(row.len(), 1);
            assert_eq!(row[0].1, 2.0);
        }
    }

    #[test]
    fn symmetric_dense() {
        let ints = chain(4, |c| c.t_hop = 0.3);
        let spec = ints.basis(1).unwrap();
        let a = assemble_dense(&ints, &spec).unwrap();
        assert_eq!(a.nrows(), 16);
        assert!((&a - a.transpose()).amax() < 1e-12);
        let spec2 = ints.basis(2).unwrap();
        let a2 = assemble_dense(&ints, &spec2).unwrap();
        assert!((&a2 - a2.transpose()).amax() < 1e-12);
    }

    #[test]
    fn bound_values() {
        assert_eq!(sparsity_bound(1, 1, 1), 7);
        assert_eq!(sparsity_bound(3, 1, 3), 163);
        assert_eq!(sparsity_bound(2, 0, 2), 5);
    }

    #[test]
    fn far_pairs_only_on_diagonal() {
        let ints = chain(8, |c| c.t_hop = 0.2);
        let spec = ints.basis(1).unwrap();
        for mu in spec.strings_of_rank(1) {
            for (nu, _) in exciton_row(&ints, &spec, &mu).unwrap() {
                if nu != mu {
                    let idx: Vec<usize> = mu.indices().chain(nu.indices()).collect();
                    let moved: Vec<usize> = idx.iter().copied().filter(|&p| !(mu.indices().any(|q| q == p) && nu.indices().any(|q| q == p))).collect();
                    assert!(ints.extent(&moved) <= ints.r_c() + 1e-9);
                }
            }
        }
    }
}
