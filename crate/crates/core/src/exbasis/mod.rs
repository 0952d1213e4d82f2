//! Excitation-string basis over a Hartree–Fock reference.
//!
//! Orbitals are numbered `0..L` with the occupied block first, so holes live
//! in `0..n_occ` and particles in `n_occ..L`. A string of rank `k` is the
//! state `c†_{a_1} c_{i_1} … c†_{a_k} c_{i_k} |0⟩` with both index lists
//! stored strictly decreasing.

mod determinant;
mod state;

pub use determinant::{slater_condon, to_determinant, Determinant, OneTwoBody};
pub use state::{SparseState, DEFAULT_DROP_THRESHOLD};

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type IndexList = SmallVec<[u32; 4]>;

/// Shape of an excitation manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub n_occ: usize,
    pub n_virt: usize,
    /// Maximum excitation rank.
    pub m: usize,
    /// Spatial dimension of the underlying lattice.
    pub dim: usize,
}

impl BasisSpec {
    pub fn new(n_occ: usize, n_virt: usize, m: usize, dim: usize) -> Result<Self> {
        let spec = Self {
            n_occ,
            n_virt,
            m,
            dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidBasis("excitation rank m must be ≥ 1".into()));
        }
        if self.n_occ < self.m || self.n_virt < self.m {
            return Err(Error::InvalidBasis(format!(
                "need n_occ ≥ m and n_virt ≥ m (n_occ={}, n_virt={}, m={})",
                self.n_occ, self.n_virt, self.m
            )));
        }
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidBasis(format!("dimension D={} not in 1..=3", self.dim)));
        }
        if self.key_bits() > 128 {
            return Err(Error::InvalidBasis(format!(
                "packed key needs {} bits (> 128)",
                self.key_bits()
            )));
        }
        Ok(())
    }

    pub fn n_orb(&self) -> usize {
        self.n_occ + self.n_virt
    }

    pub fn bits_per_index(&self) -> u32 {
        ceil_log2(self.n_orb()).max(1)
    }

    pub fn rank_bits(&self) -> u32 {
        ceil_log2(self.m + 1).max(1)
    }

    pub fn key_bits(&self) -> u32 {
        self.rank_bits() + 2 * self.m as u32 * self.bits_per_index()
    }

    pub fn is_hole(&self, p: usize) -> bool {
        p < self.n_occ
    }

    pub fn is_particle(&self, p: usize) -> bool {
        p >= self.n_occ && p < self.n_orb()
    }

    /// Same manifold with a different maximum rank.
    pub fn with_rank(&self, m: usize) -> Result<Self> {
        Self::new(self.n_occ, self.n_virt, m, self.dim)
    }

    /// Canonicalize and check that holes are occupied and particles virtual.
    pub fn canonicalize(&self, holes: &[usize], particles: &[usize]) -> Result<(ExcitationString, i8)> {
        if holes.len() > self.m {
            return Err(Error::RankMismatch {
                got: holes.len(),
                expected: format!("0..={}", self.m),
            });
        }
        for &i in holes {
            if !self.is_hole(i) {
                return Err(Error::BadIndex { index: i, role: "hole" });
            }
        }
        for &a in particles {
            if !self.is_particle(a) {
                return Err(Error::BadIndex { index: a, role: "particle" });
            }
        }
        canonicalize(holes, particles)
    }

    /// `C(n_occ, k) · C(n_virt, k)`.
    pub fn dimension(&self, k: usize) -> usize {
        if k > self.m {
            return 0;
        }
        binomial(self.n_occ, k) * binomial(self.n_virt, k)
    }

    /// Packs `s` as `rank | holes (high to low) | particles (high to low)`,
    /// each index field `bits_per_index` wide, unused slots zero.
    pub fn encode(&self, s: &ExcitationString) -> u128 {
        let b = self.bits_per_index();
        let m = self.m as u32;
        let mut key = s.rank() as u128;
        for slot in 0..m {
            key = (key << b) | s.holes.get(slot as usize).copied().unwrap_or(0) as u128;
        }
        for slot in 0..m {
            key = (key << b) | s.particles.get(slot as usize).copied().unwrap_or(0) as u128;
        }
        key
    }

    pub fn decode(&self, key: u128) -> Result<ExcitationString> {
        let b = self.bits_per_index();
        let mask = (1u128 << b) - 1;
        let m = self.m;
        let mut fields = Vec::with_capacity(2 * m);
        let mut rest = key;
        for _ in 0..2 * m {
            fields.push((rest & mask) as usize);
            rest >>= b;
        }
        fields.reverse();
        let rank = rest as usize;
        if rank > m {
            return Err(Error::RankMismatch {
                got: rank,
                expected: format!("0..={m}"),
            });
        }
        let holes = &fields[..rank];
        let particles = &fields[m..m + rank];
        let (s, sign) = self.canonicalize(holes, particles)?;
        if sign != 1 || fields[rank..m].iter().chain(&fields[m + rank..]).any(|&x| x != 0) {
            return Err(Error::InvalidExcitation(format!("key {key:#x} is not canonical")));
        }
        Ok(s)
    }

    /// All strings of exactly rank `k`, in encoded-key order.
    pub fn strings_of_rank(&self, k: usize) -> Vec<ExcitationString> {
        if k > self.m {
            return Vec::new();
        }
        let hole_sets = decreasing_combinations(0, self.n_occ, k);
        let particle_sets = decreasing_combinations(self.n_occ, self.n_orb(), k);
        let mut out = Vec::with_capacity(hole_sets.len() * particle_sets.len());
        for h in &hole_sets {
            for p in &particle_sets {
                out.push(ExcitationString {
                    holes: h.clone(),
                    particles: p.clone(),
                });
            }
        }
        out.sort();
        out
    }

    /// All strings with rank in `ranks`, in encoded-key order.
    pub fn strings(&self, ranks: std::ops::RangeInclusive<usize>) -> Vec<ExcitationString> {
        ranks.flat_map(|k| self.strings_of_rank(k)).collect()
    }
}

/// Canonical particle–hole label. Equality and ordering ignore any sign;
/// signs from canonicalization are returned separately.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ExcitationString {
    holes: IndexList,
    particles: IndexList,
}

impl ExcitationString {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.holes.len()
    }

    pub fn holes(&self) -> impl Iterator<Item = usize> + '_ {
        self.holes.iter().map(|&x| x as usize)
    }

    pub fn particles(&self) -> impl Iterator<Item = usize> + '_ {
        self.particles.iter().map(|&x| x as usize)
    }

    pub fn hole_list(&self) -> &[u32] {
        &self.holes
    }

    pub fn particle_list(&self) -> &[u32] {
        &self.particles
    }

    pub fn has_hole(&self, i: usize) -> bool {
        self.holes.contains(&(i as u32))
    }

    pub fn has_particle(&self, a: usize) -> bool {
        self.particles.contains(&(a as u32))
    }

    /// Every index of the string, holes first.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.holes().chain(self.particles())
    }

    /// True when every hole and particle of `other` also appears here.
    pub fn contains(&self, other: &ExcitationString) -> bool {
        other.holes.iter().all(|h| self.holes.contains(h))
            && other.particles.iter().all(|p| self.particles.contains(p))
    }

    /// Holes and particles of `self` not in `other`, canonical.
    pub fn difference(&self, other: &ExcitationString) -> ExcitationString {
        ExcitationString {
            holes: self.holes.iter().copied().filter(|h| !other.holes.contains(h)).collect(),
            particles: self
                .particles
                .iter()
                .copied()
                .filter(|p| !other.particles.contains(p))
                .collect(),
        }
    }

    /// Build from lists already known to be canonical.
    pub(crate) fn from_sorted(holes: IndexList, particles: IndexList) -> Self {
        debug_assert!(holes.windows(2).all(|w| w[0] > w[1]));
        debug_assert!(particles.windows(2).all(|w| w[0] > w[1]));
        Self { holes, particles }
    }

    /// Replace hole `old` by `new`, returning the canonical string and the
    /// parity of the re-sorting.
    pub fn replace_hole(&self, old: usize, new: usize) -> Result<(ExcitationString, i8)> {
        let holes: Vec<usize> = self.holes().map(|h| if h == old { new } else { h }).collect();
        let particles: Vec<usize> = self.particles().collect();
        canonicalize(&holes, &particles)
    }

    pub fn replace_particle(&self, old: usize, new: usize) -> Result<(ExcitationString, i8)> {
        let holes: Vec<usize> = self.holes().collect();
        let particles: Vec<usize> = self.particles().map(|a| if a == old { new } else { a }).collect();
        canonicalize(&holes, &particles)
    }
}

impl Ord for ExcitationString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.holes.cmp(&other.holes))
            .then_with(|| self.particles.cmp(&other.particles))
    }
}

impl PartialOrd for ExcitationString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExcitationString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank() == 0 {
            return write!(f, "|0>");
        }
        let join = |v: &IndexList| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "|{}->{}>", join(&self.holes), join(&self.particles))
    }
}

/// Sort both index lists strictly decreasing. The returned sign is the
/// product of the two sorting-permutation parities.
pub fn canonicalize(holes: &[usize], particles: &[usize]) -> Result<(ExcitationString, i8)> {
    if holes.len() != particles.len() {
        return Err(Error::LengthMismatch {
            holes: holes.len(),
            particles: particles.len(),
        });
    }
    let (h, sh) = sort_decreasing(holes)?;
    let (p, sp) = sort_decreasing(particles)?;
    Ok((ExcitationString { holes: h, particles: p }, sh * sp))
}

fn sort_decreasing(xs: &[usize]) -> Result<(IndexList, i8)> {
    let mut v: IndexList = SmallVec::with_capacity(xs.len());
    for &x in xs {
        let x32 = u32::try_from(x).map_err(|_| Error::BadIndex { index: x, role: "orbital" })?;
        v.push(x32);
    }
    // insertion sort, counting transpositions
    let mut sign = 1i8;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] < v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return Err(Error::RepeatedIndex(v[j] as usize));
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::RepeatedIndex(v.windows(2).find(|w| w[0] == w[1]).unwrap()[0] as usize));
    }
    Ok((v, sign))
}

fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc as usize
}

/// k-subsets of `lo..hi`, each listed strictly decreasing.
fn decreasing_combinations(lo: usize, hi: usize, k: usize) -> Vec<IndexList> {
    fn rec(lo: usize, top: usize, k: usize, cur: &mut IndexList, out: &mut Vec<IndexList>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        // next element must be < top and leave room for k-1 smaller ones
        for x in (lo + k - 1..top).rev() {
            cur.push(x as u32);
            rec(lo, x, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if hi >= lo && hi - lo >= k {
        rec(lo, hi, k, &mut SmallVec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_examples() {
        let (s, sign) = canonicalize(&[3, 1], &[2, 0]).unwrap();
        assert_eq!(s.hole_list(), &[3, 1]);
        assert_eq!(s.particle_list(), &[2, 0]);
        assert_eq!(sign, 1);

        let (s, sign) = canonicalize(&[1, 3], &[2, 0]).unwrap();
        assert_eq!(s.hole_list(), &[3, 1]);
        assert_eq!(sign, -1);

        assert!(matches!(canonicalize(&[1, 1], &[2, 0]), Err(Error::RepeatedIndex(1))));
        assert!(matches!(canonicalize(&[2, 0, 2], &[5, 4, 3]), Err(Error::RepeatedIndex(2))));
    }

    #[test]
    fn out_of_range_indices() {
        let spec = BasisSpec::new(2, 2, 1, 1).unwrap();
        assert!(matches!(spec.canonicalize(&[2], &[3]), Err(Error::BadIndex { index: 2, .. })));
        assert!(matches!(spec.canonicalize(&[0], &[1]), Err(Error::BadIndex { index: 1, .. })));
        assert!(matches!(spec.canonicalize(&[0], &[4]), Err(Error::BadIndex { index: 4, .. })));
    }

    #[test]
    fn packing_examples() {
        let spec = BasisSpec::new(3, 3, 2, 1).unwrap();
        assert_eq!(spec.encode(&ExcitationString::vacuum()), 0);

        let spec = BasisSpec::new(2, 2, 1, 1).unwrap();
        assert_eq!(spec.bits_per_index(), 2);
        let (s, _) = spec.canonicalize(&[1], &[2]).unwrap();
        assert_eq!(spec.encode(&s), 0b1_01_10);
    }

    #[test]
    fn dimension_examples() {
        let spec = BasisSpec::new(4, 4, 2, 1).unwrap();
        assert_eq!(spec.dimension(2), 36);
        assert_eq!(spec.dimension(0), 1);
        assert_eq!(spec.dimension(1), 16);
    }

    #[test]
    fn round_trip_exhaustive() {
        let spec = BasisSpec::new(3, 3, 2, 1).unwrap();
        let all = spec.strings(0..=2);
        assert_eq!(all.len(), 1 + 9 + 9);
        let rank2: Vec<_> = all.iter().filter(|s| s.rank() == 2).collect();
        assert_eq!(rank2.len(), 9);
        for s in &all {
            assert_eq!(&spec.decode(spec.encode(s)).unwrap(), s);
        }
    }

    #[test]
    fn key_order_matches_string_order() {
        let spec = BasisSpec::new(4, 5, 3, 2).unwrap();
        let all = spec.strings(0..=3);
        let keys: Vec<u128> = all.iter().map(|s| spec.encode(s)).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn injective_over_full_bases() {
        for (n_occ, n_virt, m) in [(8, 8, 3), (5, 11, 3), (6, 6, 2), (3, 13, 1)] {
            let spec = BasisSpec::new(n_occ, n_virt, m, 1).unwrap();
            let all = spec.strings(0..=m);
            let keys: std::collections::HashSet<u128> = all.iter().map(|s| spec.encode(s)).collect();
            assert_eq!(keys.len(), all.len());
            let total: usize = (0..=m).map(|k| spec.dimension(k)).sum();
            assert_eq!(total, keys.len());
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(BasisSpec::new(1, 4, 2, 1).is_err());
        assert!(BasisSpec::new(4, 4, 0, 1).is_err());
        assert!(BasisSpec::new(4, 4, 1, 4).is_err());
    }
}
