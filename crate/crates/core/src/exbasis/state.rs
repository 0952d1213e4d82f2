use std::collections::btree_map::{self, BTreeMap};

use num_complex::Complex64;

use super::ExcitationString;

pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-14;

/// Amplitudes keyed by excitation string, iterated in encoded-key order.
///
/// Entries with `|amplitude| < drop_threshold` are never stored, so a
/// threshold of zero keeps structural zeros and tracks pure support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    entries: BTreeMap<ExcitationString, Complex64>,
    drop_threshold: f64,
}

impl Default for SparseState {
    fn default() -> Self {
        Self::new()
    }
}

impl SparseState {
    pub fn new() -> Self {
        Self::with_threshold(DEFAULT_DROP_THRESHOLD)
    }

    pub fn with_threshold(drop_threshold: f64) -> Self {
        Self {
            entries: BTreeMap::new(),
            drop_threshold,
        }
    }

    pub fn unit(s: ExcitationString) -> Self {
        let mut st = Self::new();
        st.set(s, Complex64::new(1.0, 0.0));
        st
    }

    pub fn from_real(items: impl IntoIterator<Item = (ExcitationString, f64)>) -> Self {
        let mut st = Self::new();
        for (s, v) in items {
            st.add(s, Complex64::new(v, 0.0));
        }
        st
    }

    pub fn drop_threshold(&self) -> f64 {
        self.drop_threshold
    }

    pub fn set_drop_threshold(&mut self, t: f64) {
        self.drop_threshold = t;
        self.prune();
    }

    /// Number of stored (nonzero) entries.
    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, s: &ExcitationString) -> Complex64 {
        self.entries.get(s).copied().unwrap_or_default()
    }

    pub fn set(&mut self, s: ExcitationString, v: Complex64) {
        if v.norm() < self.drop_threshold {
            self.entries.remove(&s);
        } else {
            self.entries.insert(s, v);
        }
    }

    /// Accumulate without pruning; call [`prune`](Self::prune) afterwards.
    pub fn add(&mut self, s: ExcitationString, v: Complex64) {
        *self.entries.entry(s).or_default() += v;
    }

    pub fn prune(&mut self) {
        let t = self.drop_threshold;
        self.entries.retain(|_, v| v.norm() >= t);
    }

    pub fn iter(&self) -> btree_map::Iter<'_, ExcitationString, Complex64> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &ExcitationString> {
        self.entries.keys()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn dot(&self, other: &SparseState) -> Complex64 {
        let (small, large, flip) = if self.support() <= other.support() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::default();
        for (k, v) in small.iter() {
            if let Some(w) = large.entries.get(k) {
                acc += if flip { w.conj() * v } else { v.conj() * w };
            }
        }
        acc
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in self.entries.values_mut() {
            *v *= c;
        }
        self.prune();
    }

    pub fn scaled(&self, c: Complex64) -> SparseState {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c · x`.
    pub fn axpy(&mut self, c: Complex64, x: &SparseState) {
        for (k, v) in x.iter() {
            *self.entries.entry(k.clone()).or_default() += c * v;
        }
        self.prune();
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn into_entries(self) -> BTreeMap<ExcitationString, Complex64> {
        self.entries
    }

    pub fn real_parts(&self) -> impl Iterator<Item = (&ExcitationString, f64)> {
        self.entries.iter().map(|(k, v)| (k, v.re))
    }
}

impl FromIterator<(ExcitationString, Complex64)> for SparseState {
    fn from_iter<I: IntoIterator<Item = (ExcitationString, Complex64)>>(iter: I) -> Self {
        let mut st = Self::new();
        for (k, v) in iter {
            st.add(k, v);
        }
        st.prune();
        st
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exbasis::canonicalize;

    fn s(i: usize, a: usize) -> ExcitationString {
        canonicalize(&[i], &[a]).unwrap().0
    }

    #[test]
    fn threshold_drops_small_entries() {
        let mut st = SparseState::new();
        st.set(s(0, 3), Complex64::new(1e-15, 0.0));
        assert_eq!(st.support(), 0);
        st.add(s(0, 3), Complex64::new(1.0, 0.0));
        st.add(s(1, 3), Complex64::new(1.0, 0.0));
        st.add(s(1, 3), Complex64::new(-1.0, 0.0));
        st.prune();
        assert_eq!(st.support(), 1);
    }

    #[test]
    fn zero_threshold_keeps_structure() {
        let mut st = SparseState::with_threshold(0.0);
        st.add(s(1, 3), Complex64::new(1.0, 0.0));
        st.add(s(1, 3), Complex64::new(-1.0, 0.0));
        st.prune();
        assert_eq!(st.support(), 1);
    }

    #[test]
    fn dot_and_axpy() {
        let x = SparseState::from_real([(s(0, 2), 1.0), (s(1, 2), 2.0)]);
        let mut y = SparseState::from_real([(s(1, 2), 3.0)]);
        assert_eq!(x.dot(&y).re, 6.0);
        y.axpy(Complex64::new(-1.5, 0.0), &x);
        assert_eq!(y.get(&s(1, 2)).re, 0.0);
        assert_eq!(y.support(), 1);
    }
}
