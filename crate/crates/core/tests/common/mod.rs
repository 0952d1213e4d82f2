//! Brute-force Fock-space reference used by the integration tests.
//!
//! Determinants are bitmasks (orbital p is bit p) and fermion operators
//! carry the Jordan–Wigner sign of the occupied orbitals below them. The
//! Hamiltonian is applied term by term from dense `t` and `V` arrays, so
//! nothing here shares code with the library's element kernels.

#![allow(dead_code)]

use std::collections::BTreeMap;

use exspar::exbasis::ExcitationString;
use exspar::model::{IntegralSet, ModelConfig};
use nalgebra::DMatrix;

pub type FockState = BTreeMap<u64, f64>;

fn below(det: u64, p: usize) -> u32 {
    (det & ((1u64 << p) - 1)).count_ones()
}

pub fn annihilate(det: u64, p: usize) -> Option<(u64, f64)> {
    if det >> p & 1 == 0 {
        return None;
    }
    let sign = if below(det, p) % 2 == 0 { 1.0 } else { -1.0 };
    Some((det & !(1 << p), sign))
}

pub fn create(det: u64, p: usize) -> Option<(u64, f64)> {
    if det >> p & 1 == 1 {
        return None;
    }
    let sign = if below(det, p) % 2 == 0 { 1.0 } else { -1.0 };
    Some((det | 1 << p, sign))
}

/// Apply a product of operators, rightmost first. `(p, true)` is c†_p.
pub fn apply_ops(state: &FockState, ops: &[(usize, bool)]) -> FockState {
    let mut out = FockState::new();
    'det: for (&det, &c) in state {
        let (mut d, mut s) = (det, c);
        for &(p, dagger) in ops.iter().rev() {
            match if dagger { create(d, p) } else { annihilate(d, p) } {
                Some((nd, sg)) => {
                    d = nd;
                    s *= sg;
                }
                None => continue 'det,
            }
        }
        *out.entry(d).or_insert(0.0) += s;
    }
    out.retain(|_, v| *v != 0.0);
    out
}

pub fn inner(a: &FockState, b: &FockState) -> f64 {
    a.iter().map(|(d, x)| x * b.get(d).copied().unwrap_or(0.0)).sum()
}

pub fn axpy(y: &mut FockState, c: f64, x: &FockState) {
    for (&d, &v) in x {
        *y.entry(d).or_insert(0.0) += c * v;
    }
}

/// `H = Σ t_pq c†_p c_q + ½ Σ V_pqrs c†_p c†_q c_s c_r` on `L ≤ 63` orbitals.
pub struct FockOracle {
    pub l: usize,
    pub n_occ: usize,
    pub t: DMatrix<f64>,
    pub v: Vec<f64>,
}

impl FockOracle {
    pub fn new(l: usize, n_occ: usize, t: DMatrix<f64>, v: Vec<f64>) -> Self {
        assert!(l < 64);
        Self { l, n_occ, t, v }
    }

    /// Bare Hamiltonian of an integral set.
    pub fn bare(ints: &IntegralSet) -> Self {
        let l = ints.n_orb();
        let t = DMatrix::from_fn(l, l, |p, q| ints.t(p, q));
        let v = Self::tensor(l, |p, q, r, s| ints.v(p, q, r, s));
        Self::new(l, ints.n_occ(), t, v)
    }

    /// Hamiltonian whose normal-ordered part uses the screened interaction
    /// (bare `V` for exchange between two particle–hole densities, `W`
    /// otherwise) while its Fock matrix stays the model's `f`.
    pub fn screened(ints: &IntegralSet) -> Self {
        let l = ints.n_orb();
        let n_occ = ints.n_occ();
        let occ = |p: usize| p < n_occ;
        let v = Self::tensor(l, |p, q, r, s| {
            if occ(p) != occ(r) && occ(q) != occ(s) {
                ints.v(p, q, r, s)
            } else {
                ints.w(p, q, r, s)
            }
        });
        let idx = |p: usize, q: usize, r: usize, s: usize| ((p * l + q) * l + r) * l + s;
        let t = DMatrix::from_fn(l, l, |p, q| {
            let mf: f64 = (0..n_occ).map(|i| v[idx(p, i, q, i)] - v[idx(p, i, i, q)]).sum();
            ints.f(p, q) - mf
        });
        Self::new(l, n_occ, t, v)
    }

    fn tensor(l: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Vec<f64> {
        let mut v = vec![0.0; l.pow(4)];
        for p in 0..l {
            for q in 0..l {
                for r in 0..l {
                    for s in 0..l {
                        v[((p * l + q) * l + r) * l + s] = f(p, q, r, s);
                    }
                }
            }
        }
        v
    }

    fn vv(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let l = self.l;
        self.v[((p * l + q) * l + r) * l + s]
    }

    pub fn reference(&self) -> FockState {
        FockState::from([((1u64 << self.n_occ) - 1, 1.0)])
    }

    pub fn apply(&self, state: &FockState) -> FockState {
        let mut out = FockState::new();
        for (&det, &c) in state {
            for q in 0..self.l {
                let Some((d1, s1)) = annihilate(det, q) else { continue };
                for p in 0..self.l {
                    let t = self.t[(p, q)];
                    if t == 0.0 {
                        continue;
                    }
                    if let Some((d2, s2)) = create(d1, p) {
                        *out.entry(d2).or_insert(0.0) += t * c * s1 * s2;
                    }
                }
            }
            for r in 0..self.l {
                let Some((d1, s1)) = annihilate(det, r) else { continue };
                for s in 0..self.l {
                    let Some((d2, s2)) = annihilate(d1, s) else { continue };
                    for q in 0..self.l {
                        let Some((d3, s3)) = create(d2, q) else { continue };
                        for p in 0..self.l {
                            let v = self.vv(p, q, r, s);
                            if v == 0.0 {
                                continue;
                            }
                            if let Some((d4, s4)) = create(d3, p) {
                                *out.entry(d4).or_insert(0.0) += 0.5 * v * c * s1 * s2 * s3 * s4;
                            }
                        }
                    }
                }
            }
        }
        out.retain(|_, v| v.abs() > 0.0);
        out
    }

    pub fn reference_energy(&self) -> f64 {
        let r = self.reference();
        inner(&r, &self.apply(&r))
    }

    /// `H − E_0`.
    pub fn apply_normal(&self, state: &FockState) -> FockState {
        let mut out = self.apply(state);
        axpy(&mut out, -self.reference_energy(), state);
        out
    }

    /// The operator string `c†_{a1} c_{i1} c†_{a2} c_{i2} …` with pairs
    /// taken from the canonical lists in order.
    pub fn string_ops(s: &ExcitationString) -> Vec<(usize, bool)> {
        let mut ops = Vec::new();
        for (i, a) in s.holes().zip(s.particles()) {
            ops.push((a, true));
            ops.push((i, false));
        }
        ops
    }

    pub fn string_state(&self, s: &ExcitationString) -> FockState {
        apply_ops(&self.reference(), &Self::string_ops(s))
    }

    /// `⟨μ|H − E_0|ν⟩` over a list of strings.
    pub fn normal_block(&self, basis: &[ExcitationString]) -> DMatrix<f64> {
        let states: Vec<FockState> = basis.iter().map(|s| self.string_state(s)).collect();
        let images: Vec<FockState> = states.iter().map(|s| self.apply_normal(s)).collect();
        DMatrix::from_fn(basis.len(), basis.len(), |m, n| inner(&states[m], &images[n]))
    }

    /// `⟨μ|[H, O_ν]|0⟩`, built from both orderings of the product.
    pub fn commutator_block(&self, basis: &[ExcitationString]) -> DMatrix<f64> {
        let r = self.reference();
        let h0 = self.apply_normal(&r);
        let bras: Vec<FockState> = basis.iter().map(|s| self.string_state(s)).collect();
        let mut out = DMatrix::zeros(basis.len(), basis.len());
        for (n, nu) in basis.iter().enumerate() {
            let ops = Self::string_ops(nu);
            let mut c = self.apply_normal(&apply_ops(&r, &ops));
            axpy(&mut c, -1.0, &apply_ops(&h0, &ops));
            for (m, bra) in bras.iter().enumerate() {
                out[(m, n)] = inner(bra, &c);
            }
        }
        out
    }
}

pub fn chain(n_sites: usize) -> ModelConfig {
    ModelConfig {
        n_sites,
        ..ModelConfig::default()
    }
}

/// Lowest eigenvalues of a symmetric matrix, ascending.
pub fn sorted_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}
