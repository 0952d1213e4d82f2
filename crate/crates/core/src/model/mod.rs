//! Integral providers.
//!
//! Three backends share one [`IntegralSet`] surface: an open-boundary toy
//! lattice, the same lattice with periodic (minimum-image) geometry, and
//! tabulated integrals read from the `exints v1` text format.
//!
//! Two-electron integrals use physicists' ordering `V_pqrs = ⟨pq|rs⟩`, so
//! `{p, r}` is the density of electron 1 and `{q, s}` the density of
//! electron 2. The toy model classifies an element by how many of those two
//! densities are transition densities (`p ≠ r`):
//!
//! * none: density–density, `U/(1+r)`, never truncated;
//! * one: charge–dipole, `λ_cd/(1+r)²`;
//! * two: dipole–dipole between on-site particle–hole transitions, `λ_dd/(1+r)³`.
//!
//! `r` is the largest distance between any two sites the element touches;
//! the last two classes vanish beyond `R_c`.

mod io;
mod lattice;

pub use io::{dump_integrals, load_integrals, parse_integrals};
pub use lattice::ModelConfig;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exbasis::{BasisSpec, OneTwoBody};

const DIST_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    File,
    Lattice,
    Crystal,
}

/// Symmetric sparse matrix stored on its upper triangle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymMatrix {
    entries: BTreeMap<(u32, u32), f64>,
}

impl SymMatrix {
    pub fn get(&self, p: usize, q: usize) -> f64 {
        let key = if p <= q { (p as u32, q as u32) } else { (q as u32, p as u32) };
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    pub fn insert(&mut self, p: usize, q: usize, v: f64) {
        let key = if p <= q { (p as u32, q as u32) } else { (q as u32, p as u32) };
        if v == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(p, q), &v)| (p as usize, q as usize, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Couplings {
    pub u: f64,
    pub lambda_cd: f64,
    pub lambda_dd: f64,
}

#[derive(Debug, Clone)]
enum Backend {
    Analytic(Couplings),
    Table {
        v: HashMap<[u32; 4], f64>,
        w: HashMap<[u32; 4], f64>,
    },
}

/// Interaction class of a two-electron element, by count of transition densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralClass {
    DensityDensity,
    ChargeDipole,
    DipoleDipole,
}

/// One- and two-electron integrals over localized orbitals.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    mode: Mode,
    n_occ: usize,
    n_orb: usize,
    dim: usize,
    positions: Vec<[f64; 3]>,
    period: Option<[f64; 3]>,
    site_of: Vec<usize>,
    n_sites: usize,
    eps_screen: f64,
    r_c: f64,
    r_loc: f64,
    backend: Backend,
    t: SymMatrix,
    f: SymMatrix,
    near: Vec<Vec<u32>>,
}

impl IntegralSet {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn n_occ(&self) -> usize {
        self.n_occ
    }

    pub fn n_virt(&self) -> usize {
        self.n_orb - self.n_occ
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps_screen(&self) -> f64 {
        self.eps_screen
    }

    pub fn r_c(&self) -> f64 {
        self.r_c
    }

    pub fn r_loc(&self) -> f64 {
        self.r_loc
    }

    pub fn period(&self) -> Option<[f64; 3]> {
        self.period
    }

    pub fn basis(&self, m: usize) -> Result<BasisSpec> {
        BasisSpec::new(self.n_occ, self.n_virt(), m, self.dim)
    }

    pub fn is_occ(&self, p: usize) -> bool {
        p < self.n_occ
    }

    pub fn position(&self, p: usize) -> [f64; 3] {
        self.positions[p]
    }

    /// Index of the site hosting orbital `p` (orbitals sharing a position share a site).
    pub fn site_of(&self, p: usize) -> usize {
        self.site_of[p]
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Euclidean distance, minimum image in crystal mode.
    pub fn distance(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (self.positions[p], self.positions[q]);
        let mut d2 = 0.0;
        for k in 0..self.dim {
            let mut d = (a[k] - b[k]).abs();
            if let Some(period) = self.period {
                let l = period[k];
                if l > 0.0 {
                    d %= l;
                    d = d.min(l - d);
                }
            }
            d2 += d * d;
        }
        d2.sqrt()
    }

    pub fn within_cutoff(&self, p: usize, q: usize) -> bool {
        self.distance(p, q) <= self.r_c + DIST_EPS
    }

    /// Orbitals other than `p` within `R_c` of it, ascending.
    pub fn near(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        self.near[p].iter().map(|&q| q as usize)
    }

    /// Largest pairwise distance among the given orbitals.
    pub fn extent(&self, orbs: &[usize]) -> f64 {
        let mut r: f64 = 0.0;
        for (x, &p) in orbs.iter().enumerate() {
            for &q in &orbs[x + 1..] {
                r = r.max(self.distance(p, q));
            }
        }
        r
    }

    pub fn t(&self, p: usize, q: usize) -> f64 {
        self.t.get(p, q)
    }

    pub fn f(&self, p: usize, q: usize) -> f64 {
        self.f.get(p, q)
    }

    pub fn t_matrix(&self) -> &SymMatrix {
        &self.t
    }

    pub fn f_matrix(&self) -> &SymMatrix {
        &self.f
    }

    /// Bare Coulomb `V_pqrs`.
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        match &self.backend {
            Backend::Analytic(c) => self.analytic_v(c, p, q, r, s),
            Backend::Table { v, .. } => v.get(&canonical_key(p, q, r, s)).copied().unwrap_or(0.0),
        }
    }

    /// Statically screened Coulomb `W_pqrs`.
    pub fn w(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        match &self.backend {
            Backend::Analytic(c) => self.analytic_v(c, p, q, r, s) / self.eps_screen,
            Backend::Table { w, .. } => w.get(&canonical_key(p, q, r, s)).copied().unwrap_or(0.0),
        }
    }

    /// The interaction an effective particle–hole Hamiltonian sees: bare
    /// `V` when both densities are particle–hole transitions (exchange),
    /// screened `W` otherwise.
    pub fn screened(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let mixed = |x: usize, y: usize| self.is_occ(x) != self.is_occ(y);
        if mixed(p, r) && mixed(q, s) {
            self.v(p, q, r, s)
        } else {
            self.w(p, q, r, s)
        }
    }

    pub fn class_of(p: usize, q: usize, r: usize, s: usize) -> IntegralClass {
        match (p != r) as u8 + (q != s) as u8 {
            0 => IntegralClass::DensityDensity,
            1 => IntegralClass::ChargeDipole,
            _ => IntegralClass::DipoleDipole,
        }
    }

    fn analytic_v(&self, c: &Couplings, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let allowed = |x: usize, y: usize| {
            if x == y {
                true
            } else if self.is_occ(x) == self.is_occ(y) {
                self.within_cutoff(x, y)
            } else {
                self.site_of[x] == self.site_of[y]
            }
        };
        if !allowed(p, r) || !allowed(q, s) {
            return 0.0;
        }
        match Self::class_of(p, q, r, s) {
            IntegralClass::DensityDensity => {
                if c.u == 0.0 {
                    0.0
                } else {
                    c.u / (1.0 + self.distance(p, q))
                }
            }
            IntegralClass::ChargeDipole => {
                let r_ext = self.extent(&[p, q, r, s]);
                if c.lambda_cd == 0.0 || r_ext > self.r_c + DIST_EPS {
                    0.0
                } else {
                    c.lambda_cd / (1.0 + r_ext).powi(2)
                }
            }
            IntegralClass::DipoleDipole => {
                let on_site_transition =
                    |x: usize, y: usize| self.is_occ(x) != self.is_occ(y) && self.site_of[x] == self.site_of[y];
                if !on_site_transition(p, r) || !on_site_transition(q, s) {
                    return 0.0;
                }
                let r_ext = self.extent(&[p, q, r, s]);
                if c.lambda_dd == 0.0 || r_ext > self.r_c + DIST_EPS {
                    0.0
                } else {
                    c.lambda_dd / (1.0 + r_ext).powi(3)
                }
            }
        }
    }

    /// `f_pq = t_pq + Σ_{i∈occ} (V_piqi − V_piiq)` evaluated from `t` and `V`.
    pub fn fock_from_integrals(&self, p: usize, q: usize) -> f64 {
        match self.backend {
            Backend::Analytic(_) => {
                let direct = if p == q { self.direct_field(p) } else { 0.0 };
                self.fock_with_direct(p, q, direct)
            }
            Backend::Table { .. } => {
                let mut acc = self.t(p, q);
                for i in 0..self.n_occ {
                    acc += self.v(p, i, q, i) - self.v(p, i, i, q);
                }
                acc
            }
        }
    }

    /// `Σ_{i∈occ} V_pipi`, the only mean-field term with unbounded range.
    pub(crate) fn direct_field(&self, p: usize) -> f64 {
        (0..self.n_occ).map(|i| self.v(p, i, p, i)).sum()
    }

    /// Fock element with the diagonal direct term supplied by the caller
    /// (ignored off the diagonal). Remaining terms only involve occupied
    /// orbitals within `R_c` of `p` or `q`, which holds for the analytic
    /// backend.
    pub(crate) fn fock_with_direct(&self, p: usize, q: usize, direct: f64) -> f64 {
        let mut cand: Vec<usize> = [p, q]
            .into_iter()
            .chain(self.near(p))
            .chain(self.near(q))
            .filter(|&i| i < self.n_occ)
            .collect();
        cand.sort_unstable();
        cand.dedup();
        let mut acc = self.t(p, q);
        if p == q {
            acc += direct;
        }
        for i in cand {
            if p != q {
                acc += self.v(p, i, q, i);
            }
            acc -= self.v(p, i, i, q);
        }
        acc
    }

    /// Largest deviation between the stored Fock matrix and the one
    /// rebuilt from `t` and `V`, over the diagonal and every `R_c` pair.
    pub fn fock_consistency(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for p in 0..self.n_orb {
            dev = dev.max((self.fock_from_integrals(p, p) - self.f(p, p)).abs());
            for q in self.near(p).filter(|&q| q > p) {
                dev = dev.max((self.fock_from_integrals(p, q) - self.f(p, q)).abs());
            }
        }
        dev
    }

    /// Every integral multiplied by `c`.
    pub fn scaled(&self, c: f64) -> IntegralSet {
        let mut out = self.clone();
        out.backend = match &self.backend {
            Backend::Analytic(k) => Backend::Analytic(Couplings {
                u: k.u * c,
                lambda_cd: k.lambda_cd * c,
                lambda_dd: k.lambda_dd * c,
            }),
            Backend::Table { v, w } => Backend::Table {
                v: v.iter().map(|(k, x)| (*k, x * c)).collect(),
                w: w.iter().map(|(k, x)| (*k, x * c)).collect(),
            },
        };
        let scale = |m: &SymMatrix| SymMatrix {
            entries: m.entries.iter().map(|(k, x)| (*k, x * c)).collect(),
        };
        out.t = scale(&self.t);
        out.f = scale(&self.f);
        out
    }

    /// Nonzero two-electron entries, one per symmetry orbit, in key order.
    pub fn two_body_entries(&self) -> Vec<([u32; 4], f64, f64)> {
        match &self.backend {
            Backend::Table { v, w } => {
                let mut keys: Vec<[u32; 4]> = v.keys().chain(w.keys()).copied().collect();
                keys.sort_unstable();
                keys.dedup();
                keys.into_iter()
                    .map(|k| (k, v.get(&k).copied().unwrap_or(0.0), w.get(&k).copied().unwrap_or(0.0)))
                    .collect()
            }
            Backend::Analytic(_) => {
                let mut out = BTreeMap::new();
                for p in 0..self.n_orb {
                    for q in p..self.n_orb {
                        let key = canonical_key(p, q, p, q);
                        let v = self.v(p, q, p, q);
                        if v != 0.0 {
                            out.insert(key, v);
                        }
                    }
                }
                for p in 0..self.n_orb {
                    for r in self.near(p) {
                        for q in std::iter::once(p).chain(self.near(p)) {
                            for s in std::iter::once(q).chain(self.near(q)) {
                                let key = canonical_key(p, q, r, s);
                                if out.contains_key(&key) {
                                    continue;
                                }
                                let v = self.v(p, q, r, s);
                                if v != 0.0 {
                                    out.insert(key, v);
                                }
                            }
                        }
                    }
                }
                out.into_iter().map(|(k, v)| (k, v, self.w(k[0] as usize, k[1] as usize, k[2] as usize, k[3] as usize))).collect()
            }
        }
    }

    pub(crate) fn from_parts(parts: Parts) -> Result<IntegralSet> {
        let Parts {
            mode,
            n_occ,
            dim,
            positions,
            period,
            eps_screen,
            r_c,
            r_loc,
            backend,
            t,
            f,
        } = parts;
        let n_orb = positions.len();
        let mut site_of = Vec::with_capacity(n_orb);
        let mut seen: Vec<[f64; 3]> = Vec::new();
        let mut index: HashMap<[u64; 3], usize> = HashMap::new();
        for pos in &positions {
            let key = pos.map(|x| (x + 0.0).to_bits());
            let idx = *index.entry(key).or_insert_with(|| {
                seen.push(*pos);
                seen.len() - 1
            });
            site_of.push(idx);
        }
        let mut set = IntegralSet {
            mode,
            n_occ,
            n_orb,
            dim,
            positions,
            period,
            site_of,
            n_sites: seen.len(),
            eps_screen,
            r_c,
            r_loc,
            backend: match backend {
                PartsBackend::Analytic(c) => Backend::Analytic(c),
                PartsBackend::Table { v, w } => Backend::Table { v, w },
            },
            t: t.unwrap_or_default(),
            f: f.unwrap_or_default(),
            near: Vec::new(),
        };
        set.near = set.neighbour_lists(&seen);
        Ok(set)
    }

    /// Orbitals within `R_c` of each orbital, found by bucketing sites into
    /// cells of side `R_c` and comparing adjacent cells only.
    fn neighbour_lists(&self, sites: &[[f64; 3]]) -> Vec<Vec<u32>> {
        let cell = self.r_c.max(DIST_EPS);
        let mut orbs_at: Vec<Vec<u32>> = vec![Vec::new(); sites.len()];
        for (p, &s) in self.site_of.iter().enumerate() {
            orbs_at[s].push(p as u32);
        }
        let mut ncell = [1i64; 3];
        let mut width = [cell; 3];
        let mut lo = [0.0f64; 3];
        for k in 0..self.dim {
            lo[k] = sites.iter().map(|s| s[k]).fold(f64::INFINITY, f64::min);
            let hi = sites.iter().map(|s| s[k]).fold(f64::NEG_INFINITY, f64::max);
            match self.period {
                // equal cells of side ≥ R_c tiling the period
                Some(per) if per[k] > 0.0 => {
                    ncell[k] = ((per[k] / cell).floor() as i64).max(1);
                    width[k] = per[k] / ncell[k] as f64;
                }
                _ => ncell[k] = ((hi - lo[k]) / cell).floor() as i64 + 1,
            }
        }
        let periodic = |k: usize| matches!(self.period, Some(per) if per[k] > 0.0);
        let coord = |s: &[f64; 3]| -> [i64; 3] {
            let mut c = [0i64; 3];
            for k in 0..self.dim {
                let raw = ((s[k] - lo[k]) / width[k]).floor() as i64;
                c[k] = if periodic(k) { raw.rem_euclid(ncell[k]) } else { raw.clamp(0, ncell[k] - 1) };
            }
            c
        };
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, s) in sites.iter().enumerate() {
            buckets.entry(coord(s)).or_default().push(i);
        }
        let mut near_site: Vec<Vec<usize>> = vec![Vec::new(); sites.len()];
        for (i, s) in sites.iter().enumerate() {
            let c = coord(s);
            let mut found = Vec::new();
            let span = |k: usize| if k < self.dim { -1..=1 } else { 0..=0 };
            for dx in span(0) {
                for dy in span(1) {
                    for dz in span(2) {
                        let mut key = c;
                        let mut ok = true;
                        for (k, d) in [dx, dy, dz].into_iter().enumerate() {
                            key[k] += d;
                            if periodic(k) {
                                key[k] = key[k].rem_euclid(ncell[k]);
                            } else if key[k] < 0 || key[k] >= ncell[k] {
                                ok = false;
                            }
                        }
                        if ok {
                            if let Some(b) = buckets.get(&key) {
                                found.extend_from_slice(b);
                            }
                        }
                    }
                }
            }
            found.sort_unstable();
            found.dedup();
            let p = orbs_at[i][0] as usize;
            near_site[i] = found
                .into_iter()
                .filter(|&j| self.within_cutoff(p, orbs_at[j][0] as usize))
                .collect();
        }
        (0..self.n_orb)
            .map(|p| {
                let mut out: Vec<u32> = near_site[self.site_of[p]]
                    .iter()
                    .flat_map(|&j| orbs_at[j].iter().copied())
                    .filter(|&q| q as usize != p)
                    .collect();
                out.sort_unstable();
                out
            })
            .collect()
    }

    pub(crate) fn set_one_body(&mut self, t: SymMatrix, f: SymMatrix) {
        self.t = t;
        self.f = f;
    }

    pub(crate) fn check_brillouin(&self, tol: f64) -> Result<()> {
        for (p, q, v) in self.f.iter() {
            if self.is_occ(p) != self.is_occ(q) && v.abs() > tol {
                return Err(Error::InconsistentIntegrals(format!(
                    "Brillouin condition violated: f({p},{q}) = {v:e}"
                )));
            }
        }
        Ok(())
    }
}

impl OneTwoBody for IntegralSet {
    fn one_body(&self, p: usize, q: usize) -> f64 {
        self.t(p, q)
    }

    fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.v(p, q, r, s)
    }
}

pub(crate) enum PartsBackend {
    Analytic(Couplings),
    Table {
        v: HashMap<[u32; 4], f64>,
        w: HashMap<[u32; 4], f64>,
    },
}

pub(crate) struct Parts {
    pub mode: Mode,
    pub n_occ: usize,
    pub dim: usize,
    pub positions: Vec<[f64; 3]>,
    pub period: Option<[f64; 3]>,
    pub eps_screen: f64,
    pub r_c: f64,
    pub r_loc: f64,
    pub backend: PartsBackend,
    pub t: Option<SymMatrix>,
    pub f: Option<SymMatrix>,
}

/// The eight index permutations that leave a real `⟨pq|rs⟩` unchanged.
pub fn symmetry_images(p: usize, q: usize, r: usize, s: usize) -> [[u32; 4]; 8] {
    let (p, q, r, s) = (p as u32, q as u32, r as u32, s as u32);
    [
        [p, q, r, s],
        [r, q, p, s],
        [p, s, r, q],
        [r, s, p, q],
        [q, p, s, r],
        [q, r, s, p],
        [s, p, q, r],
        [s, r, q, p],
    ]
}

pub fn canonical_key(p: usize, q: usize, r: usize, s: usize) -> [u32; 4] {
    symmetry_images(p, q, r, s).into_iter().min().unwrap()
}
