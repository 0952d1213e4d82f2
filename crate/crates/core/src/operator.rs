//! Matrix-free operators over the excitation-string basis.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exbasis::{BasisSpec, ExcitationString, SparseState};

/// Largest basis `assemble_dense` will materialize.
pub const DENSE_LIMIT: usize = 10_000;

/// Default element budget of [`OperatorHandle::with_cache`].
pub const DEFAULT_CACHE_ELEMENTS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    BseA,
    LccLiouvillian,
    Dense,
}

pub type Row = Vec<(ExcitationString, f64)>;

pub trait SparseOperator: Send + Sync {
    fn kind(&self) -> OperatorKind;

    fn spec(&self) -> &BasisSpec;

    /// Every string of the operator's domain, in key order.
    fn basis(&self) -> Vec<ExcitationString>;

    fn basis_len(&self) -> usize {
        self.basis().len()
    }

    /// Nonzero `(ν, A_μν)`.
    fn row(&self, mu: &ExcitationString) -> Result<Row>;

    /// Nonzero `(μ, A_μν)`; defaults to the row for symmetric operators.
    fn column(&self, nu: &ExcitationString) -> Result<Row> {
        self.row(nu)
    }

    fn is_symmetric(&self) -> bool;
}

/// A shared operator plus running statistics over every row or column it
/// has produced: the largest row length `s_max` and largest `|element|`.
pub struct OperatorHandle {
    op: Arc<dyn SparseOperator>,
    s_max: AtomicUsize,
    max_abs: AtomicU64,
    pool: Option<Arc<rayon::ThreadPool>>,
    cache: Option<Arc<RowCache>>,
}

impl Clone for OperatorHandle {
    fn clone(&self) -> Self {
        Self {
            op: self.op.clone(),
            s_max: AtomicUsize::new(self.s_max()),
            max_abs: AtomicU64::new(self.max_abs.load(Ordering::Relaxed)),
            pool: self.pool.clone(),
            cache: self.cache.clone(),
        }
    }
}

/// Rows and columns computed so far, up to a budget of stored elements.
struct RowCache {
    rows: RwLock<HashMap<ExcitationString, Arc<Row>>>,
    cols: RwLock<HashMap<ExcitationString, Arc<Row>>>,
    budget: usize,
    used: AtomicUsize,
}

impl RowCache {
    fn get_or(
        &self,
        map: &RwLock<HashMap<ExcitationString, Arc<Row>>>,
        key: &ExcitationString,
        make: impl FnOnce() -> Result<Row>,
    ) -> Result<(Arc<Row>, bool)> {
        if let Some(r) = map.read().unwrap().get(key) {
            return Ok((r.clone(), false));
        }
        let r = Arc::new(make()?);
        if self.used.fetch_add(r.len(), Ordering::Relaxed) + r.len() <= self.budget {
            map.write().unwrap().insert(key.clone(), r.clone());
        }
        Ok((r, true))
    }
}

impl std::fmt::Debug for OperatorHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorHandle")
            .field("kind", &self.kind())
            .field("s_max", &self.s_max())
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl OperatorHandle {
    pub fn new(op: impl SparseOperator + 'static) -> Self {
        Self::from_arc(Arc::new(op))
    }

    pub fn from_arc(op: Arc<dyn SparseOperator>) -> Self {
        Self {
            op,
            s_max: AtomicUsize::new(0),
            max_abs: AtomicU64::new(0f64.to_bits()),
            pool: None,
            cache: None,
        }
    }

    /// Keep computed rows and columns, up to `elements` stored matrix
    /// elements in total, so repeated matvecs over the same strings skip
    /// the element kernels.
    pub fn with_cache(mut self, elements: usize) -> Self {
        self.cache = Some(Arc::new(RowCache {
            rows: RwLock::new(HashMap::new()),
            cols: RwLock::new(HashMap::new()),
            budget: elements,
            used: AtomicUsize::new(0),
        }));
        self
    }

    /// Use `n` workers inside `apply`; `n ≤ 1` is the deterministic
    /// single-worker mode.
    pub fn with_threads(mut self, n: usize) -> Result<Self> {
        self.pool = if n > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            Some(Arc::new(pool))
        } else {
            None
        };
        Ok(self)
    }

    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    pub fn kind(&self) -> OperatorKind {
        self.op.kind()
    }

    pub fn spec(&self) -> &BasisSpec {
        self.op.spec()
    }

    pub fn basis(&self) -> Vec<ExcitationString> {
        self.op.basis()
    }

    /// Size of the basis, without enumerating it.
    pub fn basis_len(&self) -> usize {
        self.op.basis_len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.op.is_symmetric()
    }

    pub fn inner(&self) -> &Arc<dyn SparseOperator> {
        &self.op
    }

    pub fn s_max(&self) -> usize {
        self.s_max.load(Ordering::Relaxed)
    }

    pub fn max_abs(&self) -> f64 {
        f64::from_bits(self.max_abs.load(Ordering::Relaxed))
    }

    /// `s_max · max|A_μν|` over everything observed so far.
    pub fn alpha(&self) -> f64 {
        self.s_max() as f64 * self.max_abs()
    }

    fn record(&self, row: &Row) {
        self.s_max.fetch_max(row.len(), Ordering::Relaxed);
        let m = row.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        // non-negative floats order like their bit patterns
        self.max_abs.fetch_max(m.to_bits(), Ordering::Relaxed);
    }

    pub fn row(&self, mu: &ExcitationString) -> Result<Row> {
        Ok(self.row_shared(mu)?.as_ref().clone())
    }

    pub fn column(&self, nu: &ExcitationString) -> Result<Row> {
        Ok(self.column_shared(nu)?.as_ref().clone())
    }

    pub(crate) fn row_shared(&self, mu: &ExcitationString) -> Result<Arc<Row>> {
        let (r, fresh) = match &self.cache {
            Some(c) => c.get_or(&c.rows, mu, || self.op.row(mu))?,
            None => (Arc::new(self.op.row(mu)?), true),
        };
        if fresh {
            self.record(&r);
        }
        Ok(r)
    }

    pub(crate) fn column_shared(&self, nu: &ExcitationString) -> Result<Arc<Row>> {
        let (c, fresh) = match &self.cache {
            Some(cache) => cache.get_or(&cache.cols, nu, || self.op.column(nu))?,
            None => (Arc::new(self.op.column(nu)?), true),
        };
        if fresh {
            self.record(&c);
        }
        Ok(c)
    }

    /// Visit every row of the basis so that `s_max` and `max_abs` are exact.
    pub fn scan(&self) -> Result<()> {
        for mu in self.basis() {
            self.row_shared(&mu)?;
        }
        Ok(())
    }

    /// `y = A x` by scattering columns. The result keeps `x`'s drop threshold.
    pub fn apply(&self, x: &SparseState) -> Result<SparseState> {
        Ok(self.apply_counted(x)?.0)
    }

    /// As `apply`, also returning the number of multiply–adds performed.
    pub fn apply_counted(&self, x: &SparseState) -> Result<(SparseState, u64)> {
        let items: Vec<(&ExcitationString, &Complex64)> = x.iter().collect();
        let (acc, ops) = match &self.pool {
            None => self.scatter(&items)?,
            Some(pool) => {
                let n_chunks = (pool.current_num_threads() * 4).max(1);
                let size = items.len().div_ceil(n_chunks).max(1);
                let parts: Vec<Result<(BTreeMap<ExcitationString, Complex64>, u64)>> =
                    pool.install(|| items.par_chunks(size).map(|c| self.scatter(c)).collect());
                let mut acc = BTreeMap::new();
                let mut ops = 0;
                for part in parts {
                    let (p, n) = part?;
                    ops += n;
                    for (k, v) in p {
                        *acc.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
                    }
                }
                (acc, ops)
            }
        };
        let mut y = SparseState::with_threshold(x.drop_threshold());
        for (k, v) in acc {
            y.set(k, v);
        }
        Ok((y, ops))
    }

    fn scatter(
        &self,
        items: &[(&ExcitationString, &Complex64)],
    ) -> Result<(BTreeMap<ExcitationString, Complex64>, u64)> {
        let mut acc: BTreeMap<ExcitationString, Complex64> = BTreeMap::new();
        let mut ops = 0u64;
        for (nu, &xv) in items {
            let col = self.column_shared(nu)?;
            ops += col.len() as u64;
            for (mu, a) in col.iter() {
                *acc.entry(mu.clone()).or_insert(Complex64::new(0.0, 0.0)) += xv * a;
            }
        }
        Ok((acc, ops))
    }

    /// Dense matrix in `basis()` order.
    pub fn assemble_dense(&self) -> Result<(Vec<ExcitationString>, DMatrix<f64>)> {
        let basis = self.basis();
        if basis.len() > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim: basis.len(),
                limit: DENSE_LIMIT,
            });
        }
        let index: HashMap<&ExcitationString, usize> = basis.iter().enumerate().map(|(n, s)| (s, n)).collect();
        let mut a = DMatrix::zeros(basis.len(), basis.len());
        for (r, mu) in basis.iter().enumerate() {
            for (nu, v) in self.row_shared(mu)?.iter().cloned() {
                let c = *index
                    .get(&nu)
                    .ok_or_else(|| Error::InvalidExcitation(format!("row {mu} leaves the basis at {nu}")))?;
                a[(r, c)] += v;
            }
        }
        Ok((basis, a))
    }

    /// `A + c·1` sharing the same underlying operator.
    pub fn shifted(&self, c: f64) -> OperatorHandle {
        let mut h = OperatorHandle::new(Shifted {
            inner: self.op.clone(),
            shift: c,
        });
        h.pool = self.pool.clone();
        h
    }
}

struct Shifted {
    inner: Arc<dyn SparseOperator>,
    shift: f64,
}

fn shift_diag(mut r: Row, s: &ExcitationString, c: f64) -> Row {
    match r.iter_mut().find(|(k, _)| k == s) {
        Some(e) => e.1 += c,
        None => r.push((s.clone(), c)),
    }
    r.retain(|(_, v)| *v != 0.0);
    r
}

impl SparseOperator for Shifted {
    fn kind(&self) -> OperatorKind {
        self.inner.kind()
    }

    fn spec(&self) -> &BasisSpec {
        self.inner.spec()
    }

    fn basis(&self) -> Vec<ExcitationString> {
        self.inner.basis()
    }

    fn basis_len(&self) -> usize {
        self.inner.basis_len()
    }

    fn row(&self, mu: &ExcitationString) -> Result<Row> {
        Ok(shift_diag(self.inner.row(mu)?, mu, self.shift))
    }

    fn column(&self, nu: &ExcitationString) -> Result<Row> {
        Ok(shift_diag(self.inner.column(nu)?, nu, self.shift))
    }

    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }
}

/// An explicit matrix indexed by a list of strings.
pub struct DenseOperator {
    spec: BasisSpec,
    basis: Vec<ExcitationString>,
    index: HashMap<ExcitationString, usize>,
    matrix: DMatrix<f64>,
    symmetric: bool,
}

impl DenseOperator {
    pub fn new(spec: BasisSpec, basis: Vec<ExcitationString>, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::InvalidConfig(format!(
                "{}x{} matrix for {} basis strings",
                matrix.nrows(),
                matrix.ncols(),
                basis.len()
            )));
        }
        let mut sorted = basis.clone();
        sorted.sort();
        if sorted != basis {
            return Err(Error::InvalidConfig("basis must be in key order without repeats".into()));
        }
        sorted.dedup();
        if sorted.len() != basis.len() {
            return Err(Error::InvalidConfig("repeated basis string".into()));
        }
        let index = basis.iter().cloned().enumerate().map(|(n, s)| (s, n)).collect();
        let symmetric = matrix == matrix.transpose();
        Ok(Self {
            spec,
            basis,
            index,
            matrix,
            symmetric,
        })
    }

    /// An `n × n` matrix on the strings `|0→1⟩ … |0→n⟩` of a one-hole basis.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        let spec = BasisSpec::new(1, n.max(1), 1, 1)?;
        let basis = spec.strings_of_rank(1);
        Self::new(spec, basis, matrix)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    fn index_of(&self, s: &ExcitationString) -> Result<usize> {
        self.index
            .get(s)
            .copied()
            .ok_or_else(|| Error::InvalidExcitation(format!("{s} not in the operator basis")))
    }
}

impl SparseOperator for DenseOperator {
    fn kind(&self) -> OperatorKind {
        OperatorKind::Dense
    }

    fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    fn basis(&self) -> Vec<ExcitationString> {
        self.basis.clone()
    }

    fn row(&self, mu: &ExcitationString) -> Result<Row> {
        let r = self.index_of(mu)?;
        Ok((0..self.basis.len())
            .filter(|&c| self.matrix[(r, c)] != 0.0)
            .map(|c| (self.basis[c].clone(), self.matrix[(r, c)]))
            .collect())
    }

    fn column(&self, nu: &ExcitationString) -> Result<Row> {
        let c = self.index_of(nu)?;
        Ok((0..self.basis.len())
            .filter(|&r| self.matrix[(r, c)] != 0.0)
            .map(|r| (self.basis[r].clone(), self.matrix[(r, c)]))
            .collect())
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}
