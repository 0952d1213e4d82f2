use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Couplings, IntegralSet, Mode, Parts, PartsBackend, SymMatrix};
use crate::error::{Error, Result};

/// Parameters of the two-orbital-per-site toy semiconductor.
///
/// Each site carries one occupied orbital at `-eps_gap/2` and one virtual
/// orbital at `+eps_gap/2`. `fragments > 1` repeats the block along the
/// first axis with `fragment_gap` empty lattice spacings in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "D")]
    pub dim: usize,
    pub n_sites: usize,
    pub eps_gap: f64,
    pub t_hop: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub eps_screen: f64,
    pub lambda_cd: f64,
    pub lambda_dd: f64,
    #[serde(rename = "R_c")]
    pub r_c: f64,
    #[serde(rename = "R_loc")]
    pub r_loc: f64,
    #[serde(default = "default_drop")]
    pub drop_threshold: f64,
    #[serde(default = "one")]
    pub fragments: usize,
    #[serde(default)]
    pub fragment_gap: Option<f64>,
    #[serde(default)]
    pub periodic: bool,
}

fn default_drop() -> f64 {
    crate::exbasis::DEFAULT_DROP_THRESHOLD
}

fn one() -> usize {
    1
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            n_sites: 4,
            eps_gap: 2.0,
            t_hop: 0.1,
            u: 0.5,
            eps_screen: 2.0,
            lambda_cd: 0.2,
            lambda_dd: 0.1,
            r_c: 1.0,
            r_loc: 1.0,
            drop_threshold: default_drop(),
            fragments: 1,
            fragment_gap: None,
            periodic: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(1..=3).contains(&self.dim) {
            return bad(format!("D = {} must be 1, 2 or 3", self.dim));
        }
        if self.n_sites == 0 {
            return bad("n_sites must be ≥ 1".into());
        }
        if !(self.eps_gap > 0.0) {
            return bad(format!("eps_gap = {} must be > 0", self.eps_gap));
        }
        if !(self.eps_screen >= 1.0) {
            return bad(format!("eps_screen = {} must be ≥ 1", self.eps_screen));
        }
        if !(self.r_c >= 1.0) {
            return bad(format!("R_c = {} must be ≥ 1", self.r_c));
        }
        if !(self.r_loc >= 0.0 && self.r_loc <= self.r_c) {
            return bad(format!("R_loc = {} must lie in [0, R_c]", self.r_loc));
        }
        for (name, v) in [
            ("t_hop", self.t_hop),
            ("U", self.u),
            ("lambda_cd", self.lambda_cd),
            ("lambda_dd", self.lambda_dd),
            ("drop_threshold", self.drop_threshold),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} = {v} must be a finite value ≥ 0"));
            }
        }
        if self.fragments == 0 {
            return bad("fragments must be ≥ 1".into());
        }
        if self.fragments > 1 {
            if self.periodic {
                return bad("fragments cannot be combined with periodic boundaries".into());
            }
            if self.gap() <= self.r_c {
                return bad(format!("fragment_gap = {} must exceed R_c", self.gap()));
            }
        }
        Ok(())
    }

    fn gap(&self) -> f64 {
        self.fragment_gap.unwrap_or(self.r_c.floor() + 1.0)
    }

    pub fn sites_per_fragment(&self) -> usize {
        self.n_sites.pow(self.dim as u32)
    }

    pub fn total_sites(&self) -> usize {
        self.sites_per_fragment() * self.fragments
    }

    fn site_positions(&self) -> Vec<[f64; 3]> {
        let n = self.n_sites;
        let stride = (n - 1) as f64 + self.gap();
        let mut out = Vec::with_capacity(self.total_sites());
        for frag in 0..self.fragments {
            for idx in 0..self.sites_per_fragment() {
                let mut pos = [0.0; 3];
                let mut rest = idx;
                for axis in pos.iter_mut().take(self.dim) {
                    *axis = (rest % n) as f64;
                    rest /= n;
                }
                pos[0] += frag as f64 * stride;
                out.push(pos);
            }
        }
        out
    }

    /// Open-boundary lattice (or periodic when `periodic` is set).
    pub fn build_lattice(&self) -> Result<IntegralSet> {
        self.build(self.periodic)
    }

    /// Periodic lattice, integrals depending only on minimum-image displacements.
    pub fn build_crystal(&self) -> Result<IntegralSet> {
        if self.fragments > 1 {
            return Err(Error::InvalidConfig("crystal mode has no fragments".into()));
        }
        self.build(true)
    }

    fn build(&self, periodic: bool) -> Result<IntegralSet> {
        self.validate()?;
        let sites = self.site_positions();
        let n = sites.len();
        let positions: Vec<[f64; 3]> = sites.iter().chain(sites.iter()).copied().collect();
        let period = periodic.then(|| {
            let mut p = [0.0; 3];
            for axis in p.iter_mut().take(self.dim) {
                *axis = self.n_sites as f64;
            }
            p
        });
        let mut set = IntegralSet::from_parts(Parts {
            mode: if periodic { Mode::Crystal } else { Mode::Lattice },
            n_occ: n,
            dim: self.dim,
            positions,
            period,
            eps_screen: self.eps_screen,
            r_c: self.r_c,
            r_loc: self.r_loc,
            backend: PartsBackend::Analytic(Couplings {
                u: self.u,
                lambda_cd: self.lambda_cd,
                lambda_dd: self.lambda_dd,
            }),
            t: None,
            f: None,
        })?;

        let mut f = SymMatrix::default();
        for p in 0..2 * n {
            let onsite = if p < n { -self.eps_gap / 2.0 } else { self.eps_gap / 2.0 };
            f.insert(p, p, onsite);
            if self.t_hop > 0.0 && self.r_loc > 0.0 {
                for q in set.near(p).filter(|&q| q > p && (q < n) == (p < n)) {
                    let r = set.distance(p, q);
                    if r > 0.0 && r <= self.r_loc + 1e-9 {
                        f.insert(p, q, self.t_hop * (-r / self.r_loc).exp());
                    }
                }
            }
        }
        // t is whatever makes the mean-field formula reproduce f
        let mut t = SymMatrix::default();
        set.set_one_body(SymMatrix::default(), f.clone());
        // the direct field depends on the site only
        let mut direct: HashMap<usize, f64> = HashMap::new();
        for p in 0..2 * n {
            let d = *direct.entry(set.site_of(p)).or_insert_with(|| set.direct_field(p));
            for q in std::iter::once(p).chain(set.near(p).filter(|&q| q > p)) {
                let mf = set.fock_with_direct(p, q, d);
                t.insert(p, q, f.get(p, q) - mf);
            }
        }
        set.set_one_body(t, f);
        Ok(set)
    }
}
