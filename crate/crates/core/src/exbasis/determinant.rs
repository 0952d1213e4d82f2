use std::fmt;

use super::{BasisSpec, ExcitationString};
use crate::error::{Error, Result};

/// Occupation bit vector over `L` orbitals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Determinant {
    words: Vec<u64>,
    n_orb: usize,
}

impl Determinant {
    pub fn empty(n_orb: usize) -> Self {
        Self {
            words: vec![0; n_orb.div_ceil(64).max(1)],
            n_orb,
        }
    }

    /// The reference determinant with orbitals `0..n_occ` filled.
    pub fn hartree_fock(spec: &BasisSpec) -> Self {
        Self::from_occupied(spec.n_orb(), 0..spec.n_occ)
    }

    pub fn from_occupied(n_orb: usize, occ: impl IntoIterator<Item = usize>) -> Self {
        let mut d = Self::empty(n_orb);
        for p in occ {
            d.set(p, true);
        }
        d
    }

    pub fn n_orb(&self) -> usize {
        self.n_orb
    }

    pub fn is_occupied(&self, p: usize) -> bool {
        self.words[p / 64] >> (p % 64) & 1 == 1
    }

    fn set(&mut self, p: usize, on: bool) {
        if on {
            self.words[p / 64] |= 1 << (p % 64);
        } else {
            self.words[p / 64] &= !(1 << (p % 64));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of occupied orbitals with index below `p`.
    pub fn count_below(&self, p: usize) -> usize {
        let w = p / 64;
        let mut n: usize = self.words[..w].iter().map(|x| x.count_ones() as usize).sum();
        let mask = (1u64 << (p % 64)) - 1;
        n += (self.words[w] & mask).count_ones() as usize;
        n
    }

    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_orb).filter(|&p| self.is_occupied(p))
    }

    /// Apply `c_p`; returns the fermionic sign or `None` if `p` is empty.
    pub fn annihilate(&mut self, p: usize) -> Option<i8> {
        if !self.is_occupied(p) {
            return None;
        }
        let sign = parity(self.count_below(p));
        self.set(p, false);
        Some(sign)
    }

    /// Apply `c†_p`; returns the fermionic sign or `None` if `p` is filled.
    pub fn create(&mut self, p: usize) -> Option<i8> {
        if self.is_occupied(p) {
            return None;
        }
        let sign = parity(self.count_below(p));
        self.set(p, true);
        Some(sign)
    }

    /// Apply the operator string `ops` right to left; `(p, true)` is `c†_p`.
    pub fn apply_ops(&self, ops: &[(usize, bool)]) -> Option<(Determinant, i8)> {
        let mut d = self.clone();
        let mut sign = 1i8;
        for &(p, dagger) in ops.iter().rev() {
            sign *= if dagger { d.create(p)? } else { d.annihilate(p)? };
        }
        Some((d, sign))
    }

    /// Orbitals occupied here but not in `other`, ascending.
    pub fn minus(&self, other: &Determinant) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let mut x = a & !b;
            while x != 0 {
                let bit = x.trailing_zeros() as usize;
                out.push(w * 64 + bit);
                x &= x - 1;
            }
        }
        out
    }
}

impl fmt::Debug for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.n_orb)
            .map(|p| if self.is_occupied(p) { '1' } else { '0' })
            .collect();
        write!(f, "Determinant({bits})")
    }
}

fn parity(n: usize) -> i8 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Expand a canonical string into its determinant: `O_μ|0⟩ = phase·|D⟩`
/// with `O_μ = Π_k c†_{a_k} c_{i_k}`, first pair leftmost.
pub fn to_determinant(s: &ExcitationString, spec: &BasisSpec) -> Result<(Determinant, i8)> {
    let mut ops = Vec::with_capacity(2 * s.rank());
    for (i, a) in s.holes().zip(s.particles()) {
        if i >= spec.n_orb() || a >= spec.n_orb() {
            return Err(Error::InvalidExcitation(format!("{s} outside {} orbitals", spec.n_orb())));
        }
        ops.push((a, true));
        ops.push((i, false));
    }
    Determinant::hartree_fock(spec)
        .apply_ops(&ops)
        .ok_or_else(|| Error::InvalidExcitation(format!("{s} acts on an empty or filled orbital")))
}

/// One- and two-electron integrals of `H = Σ t_pq p†q + ½ Σ V_pqrs p†q†sr`
/// (physicists' ordering: `V_pqrs = ⟨pq|rs⟩`).
pub trait OneTwoBody {
    fn one_body(&self, p: usize, q: usize) -> f64;
    fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> f64;

    fn antisym(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.two_body(p, q, r, s) - self.two_body(p, q, s, r)
    }
}

/// `⟨d1|H|d2⟩` by the Slater–Condon rules.
pub fn slater_condon<H: OneTwoBody + ?Sized>(d1: &Determinant, d2: &Determinant, h: &H) -> f64 {
    assert_eq!(d1.count(), d2.count(), "determinants must have equal particle number");
    let only1 = d1.minus(d2);
    let only2 = d2.minus(d1);
    match only1.len() {
        0 => {
            let occ: Vec<usize> = d1.occupied().collect();
            let mut e = 0.0;
            for (x, &k) in occ.iter().enumerate() {
                e += h.one_body(k, k);
                for &l in &occ[x + 1..] {
                    e += h.antisym(k, l, k, l);
                }
            }
            e
        }
        1 => {
            let (p, q) = (only1[0], only2[0]);
            let Some((_, sign)) = d2.apply_ops(&[(p, true), (q, false)]) else {
                return 0.0;
            };
            let mut v = h.one_body(p, q);
            for k in d1.occupied() {
                if k != p {
                    v += h.antisym(p, k, q, k);
                }
            }
            sign as f64 * v
        }
        2 => {
            let (p, q) = (only1[0], only1[1]);
            let (r, s) = (only2[0], only2[1]);
            let Some((_, sign)) = d2.apply_ops(&[(p, true), (q, true), (s, false), (r, false)]) else {
                return 0.0;
            };
            sign as f64 * h.antisym(p, q, r, s)
        }
        _ => 0.0,
    }
}
