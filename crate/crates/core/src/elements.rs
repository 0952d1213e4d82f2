//! Matrix elements of the normal-ordered Hamiltonian between excitation
//! strings, and the local neighbourhoods in which they can be nonzero.
//!
//! With `H_N = H − E_HF` written through the Fock matrix, an element
//! between two strings is a Slater–Condon rule in particle–hole form:
//!
//! * diagonal: `Σ_P f_aa − Σ_H f_ii + ½Σ_PP ⟨ab||ab⟩ + ½Σ_HH ⟨ij||ij⟩ − Σ_PH ⟨ai||ai⟩`
//! * one orbital differs (`p` for `q`): `f_pq + Σ_{k∈P} ⟨pk||qk⟩ − Σ_{k∈H} ⟨pk||qk⟩`
//!   over spectators common to both strings
//! * two differ: `⟨pq||rs⟩`
//!
//! times the fermionic line-up sign and both strings' determinant phases.
//! The screened variant swaps `V` for the model's screened interaction
//! inside `⟨··||··⟩`; the Fock part is unchanged.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::exbasis::{to_determinant, BasisSpec, Determinant, ExcitationString};
use crate::model::IntegralSet;

/// Elements smaller than this are treated as structural zeros.
pub const ELEMENT_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    /// Bare `V` throughout (exact `⟨μ|H_N|ν⟩`).
    Bare,
    /// `W` for direct terms, `V` for particle–hole exchange.
    Screened,
}

fn anti(ints: &IntegralSet, inter: Interaction, p: usize, q: usize, r: usize, s: usize) -> f64 {
    match inter {
        Interaction::Bare => ints.v(p, q, r, s) - ints.v(p, q, s, r),
        Interaction::Screened => ints.screened(p, q, r, s) - ints.screened(p, q, s, r),
    }
}

/// `μ` expanded once, for evaluating a whole row against it.
pub struct Bra<'a> {
    ints: &'a IntegralSet,
    spec: &'a BasisSpec,
    inter: Interaction,
    s: ExcitationString,
    det: Determinant,
    phase: i8,
}

impl<'a> Bra<'a> {
    pub fn new(
        ints: &'a IntegralSet,
        spec: &'a BasisSpec,
        inter: Interaction,
        s: &ExcitationString,
    ) -> Result<Self> {
        let (det, phase) = to_determinant(s, spec)?;
        Ok(Self {
            ints,
            spec,
            inter,
            s: s.clone(),
            det,
            phase,
        })
    }

    pub fn string(&self) -> &ExcitationString {
        &self.s
    }

    /// `⟨μ|H_N|ν⟩`.
    pub fn element(&self, nu: &ExcitationString) -> Result<f64> {
        let (dn, pn) = to_determinant(nu, self.spec)?;
        let only_mu = self.det.minus(&dn);
        let only_nu = dn.minus(&self.det);
        let ints = self.ints;
        let a = |p, q, r, s| anti(ints, self.inter, p, q, r, s);
        let value = match only_mu.len() {
            0 => self.diagonal(),
            1 => {
                let (p, q) = (only_mu[0], only_nu[0]);
                let Some((_, sign)) = dn.apply_ops(&[(p, true), (q, false)]) else {
                    return Ok(0.0);
                };
                let mut v = ints.f(p, q);
                for k in self.s.particles().filter(|&k| k != p) {
                    v += a(p, k, q, k);
                }
                for k in self.s.holes().filter(|&k| k != q) {
                    v -= a(p, k, q, k);
                }
                sign as f64 * v
            }
            2 => {
                let (p, q, r, s) = (only_mu[0], only_mu[1], only_nu[0], only_nu[1]);
                let Some((_, sign)) = dn.apply_ops(&[(p, true), (q, true), (s, false), (r, false)]) else {
                    return Ok(0.0);
                };
                sign as f64 * a(p, q, r, s)
            }
            _ => 0.0,
        };
        Ok((self.phase * pn) as f64 * value)
    }

    fn diagonal(&self) -> f64 {
        let ints = self.ints;
        let a = |p, q, r, s| anti(ints, self.inter, p, q, r, s);
        let holes: Vec<usize> = self.s.holes().collect();
        let parts: Vec<usize> = self.s.particles().collect();
        let mut e = 0.0;
        for &x in &parts {
            e += ints.f(x, x);
        }
        for &i in &holes {
            e -= ints.f(i, i);
        }
        for (n, &x) in parts.iter().enumerate() {
            for &y in &parts[n + 1..] {
                e += a(x, y, x, y);
            }
        }
        for (n, &i) in holes.iter().enumerate() {
            for &j in &holes[n + 1..] {
                e += a(i, j, i, j);
            }
        }
        for &x in &parts {
            for &i in &holes {
                e -= a(x, i, x, i);
            }
        }
        e
    }
}

/// `⟨μ|H_N|ν⟩` without caching.
pub fn element(
    ints: &IntegralSet,
    spec: &BasisSpec,
    inter: Interaction,
    mu: &ExcitationString,
    nu: &ExcitationString,
) -> Result<f64> {
    Bra::new(ints, spec, inter, mu)?.element(nu)
}

/// Strings reachable from `s` by toggling at most four orbitals, all of
/// them within `R_c` of one another and of some index of `s`, with the
/// resulting rank in `min_rank..=max_rank`. `s` itself is included when
/// its rank is in range.
///
/// Every string `ν` with `⟨s|H_N|ν⟩ ≠ 0` is in this set, except those
/// obtained by adding two fresh particle–hole pairs far from `s`.
pub fn local_neighbors(
    ints: &IntegralSet,
    s: &ExcitationString,
    min_rank: usize,
    max_rank: usize,
) -> Vec<ExcitationString> {
    let n_occ = ints.n_occ();
    let mut out: BTreeMap<ExcitationString, ()> = BTreeMap::new();
    let rank = s.rank();
    if (min_rank..=max_rank).contains(&rank) {
        out.insert(s.clone(), ());
    }
    let mut pool: Vec<usize> = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(4);
    for y in s.indices() {
        pool.clear();
        pool.push(y);
        pool.extend(ints.near(y));
        pool.sort_unstable();
        toggle_sets(ints, &pool, 0, &mut chosen, &mut |t| {
            // ΔH = ΔP keeps the electron count and the rank balance
            let mut dh = 0i32;
            let mut dp = 0i32;
            for &o in t {
                let inside = if o < n_occ { s.has_hole(o) } else { s.has_particle(o) };
                let d = if inside { -1 } else { 1 };
                if o < n_occ {
                    dh += d;
                } else {
                    dp += d;
                }
            }
            if dh != dp {
                return;
            }
            let new_rank = rank as i32 + dh;
            if new_rank < min_rank as i32 || new_rank > max_rank as i32 {
                return;
            }
            out.insert(toggle(s, t, n_occ), ());
        });
    }
    out.into_keys().collect()
}

/// Visit every nonempty subset of `pool[start..]` of size 2 or 4 whose
/// members are pairwise within `R_c`.
fn toggle_sets(
    ints: &IntegralSet,
    pool: &[usize],
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == 2 || chosen.len() == 4 {
        visit(chosen);
    }
    if chosen.len() == 4 {
        return;
    }
    for k in start..pool.len() {
        let o = pool[k];
        if chosen.iter().all(|&c| ints.within_cutoff(c, o)) {
            chosen.push(o);
            toggle_sets(ints, pool, k + 1, chosen, visit);
            chosen.pop();
        }
    }
}

fn toggle(s: &ExcitationString, t: &[usize], n_occ: usize) -> ExcitationString {
    let mut holes: Vec<usize> = s.holes().collect();
    let mut parts: Vec<usize> = s.particles().collect();
    for &o in t {
        let list = if o < n_occ { &mut holes } else { &mut parts };
        if let Some(pos) = list.iter().position(|&x| x == o) {
            list.remove(pos);
        } else {
            list.push(o);
        }
    }
    holes.sort_unstable_by(|a, b| b.cmp(a));
    parts.sort_unstable_by(|a, b| b.cmp(a));
    ExcitationString::from_sorted(
        holes.into_iter().map(|x| x as u32).collect(),
        parts.into_iter().map(|x| x as u32).collect(),
    )
}

/// Every double excitation `κ` with `⟨κ|H_N|0⟩ ≠ 0`, with that value.
pub fn connected_doubles(ints: &IntegralSet, spec: &BasisSpec) -> Result<Vec<(ExcitationString, f64)>> {
    let vac = ExcitationString::vacuum();
    let mut seen: BTreeMap<ExcitationString, f64> = BTreeMap::new();
    let mut pool = Vec::new();
    let mut chosen = Vec::with_capacity(4);
    let mut candidates = Vec::new();
    for i in 0..ints.n_occ() {
        pool.clear();
        pool.push(i);
        pool.extend(ints.near(i));
        pool.sort_unstable();
        toggle_sets(ints, &pool, 0, &mut chosen, &mut |t| {
            if t.len() == 4 && t[0] == i && t[1] < ints.n_occ() && t[2] >= ints.n_occ() {
                candidates.push(toggle(&vac, t, ints.n_occ()));
            }
        });
    }
    for kappa in candidates {
        if seen.contains_key(&kappa) {
            continue;
        }
        let v = element(ints, spec, Interaction::Bare, &kappa, &vac)?;
        seen.insert(kappa, v);
    }
    Ok(seen.into_iter().filter(|(_, v)| v.abs() > ELEMENT_EPS).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exbasis::slater_condon;
    use crate::model::ModelConfig;

    fn model() -> IntegralSet {
        ModelConfig {
            n_sites: 3,
            t_hop: 0.2,
            eps_screen: 1.0,
            ..ModelConfig::default()
        }
        .build_lattice()
        .unwrap()
    }

    #[test]
    fn bare_elements_match_slater_condon() {
        let ints = model();
        let spec = ints.basis(2).unwrap();
        let strings = spec.strings(0..=2);
        let d0 = Determinant::hartree_fock(&spec);
        let e_hf = slater_condon(&d0, &d0, &ints);
        for mu in &strings {
            let bra = Bra::new(&ints, &spec, Interaction::Bare, mu).unwrap();
            let (dm, pm) = to_determinant(mu, &spec).unwrap();
            for nu in &strings {
                let (dn, pn) = to_determinant(nu, &spec).unwrap();
                let mut want = (pm * pn) as f64 * slater_condon(&dm, &dn, &ints);
                if mu == nu {
                    want -= e_hf;
                }
                let got = bra.element(nu).unwrap();
                assert!((got - want).abs() < 1e-12, "{mu} {nu}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn neighbourhood_covers_nonzero_elements() {
        let ints = ModelConfig {
            n_sites: 5,
            t_hop: 0.2,
            r_c: 1.0,
            ..ModelConfig::default()
        }
        .build_lattice()
        .unwrap();
        let spec = ints.basis(3).unwrap();
        let strings = spec.strings(1..=3);
        let doubles: Vec<ExcitationString> =
            connected_doubles(&ints, &spec).unwrap().into_iter().map(|(k, _)| k).collect();
        for mu in strings.iter().step_by(7) {
            let bra = Bra::new(&ints, &spec, Interaction::Bare, mu).unwrap();
            let local = local_neighbors(&ints, mu, 1, 3);
            for nu in &strings {
                let v = bra.element(nu).unwrap();
                if v.abs() <= ELEMENT_EPS {
                    continue;
                }
                let far_pairs = nu.rank() == mu.rank() + 2
                    && nu.contains(mu)
                    && doubles.contains(&nu.difference(mu));
                assert!(local.contains(nu) || far_pairs, "{mu} -> {nu} = {v} missed");
            }
        }
    }

    #[test]
    fn doubles_are_local() {
        let ints = model();
        let spec = ints.basis(2).unwrap();
        for (k, _) in connected_doubles(&ints, &spec).unwrap() {
            let idx: Vec<usize> = k.indices().collect();
            assert!(ints.extent(&idx) <= ints.r_c() + 1e-9);
        }
    }
}
