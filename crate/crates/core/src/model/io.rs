//! `exints v1` text format.
//!
//! ```text
//! exints v1 L=<int> nocc=<int> D=<int>
//! pos <p> <x> [<y> [<z>]]
//! t <p> <q> <val>
//! V <p> <q> <r> <s> <val>
//! W <p> <q> <r> <s> <val>
//! ```
//!
//! `#` starts a comment. Comments of the form `#! key=value ...` carry
//! optional metadata (`eps_screen`, `R_c`, `R_loc`, `period`).
//! Symmetry-redundant entries may be omitted; when present they must agree.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{canonical_key, IntegralSet, Mode, Parts, PartsBackend, SymMatrix};
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;

pub fn dump_integrals(ints: &IntegralSet) -> String {
    let mut out = String::new();
    let d = ints.dim();
    writeln!(out, "exints v1 L={} nocc={} D={}", ints.n_orb(), ints.n_occ(), d).unwrap();
    write!(
        out,
        "#! eps_screen={:e} R_c={:e} R_loc={:e}",
        ints.eps_screen(),
        ints.r_c(),
        ints.r_loc()
    )
    .unwrap();
    if let Some(p) = ints.period() {
        let parts: Vec<String> = p[..d].iter().map(|x| format!("{x:e}")).collect();
        write!(out, " period={}", parts.join(",")).unwrap();
    }
    out.push('\n');
    for p in 0..ints.n_orb() {
        let pos = ints.position(p);
        let coords: Vec<String> = pos[..d].iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "pos {p} {}", coords.join(" ")).unwrap();
    }
    for (p, q, v) in ints.t_matrix().iter() {
        writeln!(out, "t {p} {q} {v:e}").unwrap();
    }
    let entries = ints.two_body_entries();
    for (k, v, _) in &entries {
        if *v != 0.0 {
            writeln!(out, "V {} {} {} {} {v:e}", k[0], k[1], k[2], k[3]).unwrap();
        }
    }
    for (k, _, w) in &entries {
        if *w != 0.0 {
            writeln!(out, "W {} {} {} {} {w:e}", k[0], k[1], k[2], k[3]).unwrap();
        }
    }
    out
}

pub fn load_integrals(path: impl AsRef<Path>) -> Result<IntegralSet> {
    let text = std::fs::read_to_string(path)?;
    parse_integrals(&text)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_integrals(text: &str) -> Result<IntegralSet> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .ok_or_else(|| perr(1, "missing header"))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some("exints") || tok.next() != Some("v1") {
        return Err(perr(hline, "header must start with `exints v1`"));
    }
    let mut l = None;
    let mut nocc = None;
    let mut dim = None;
    for kv in tok {
        let (k, v) = kv.split_once('=').ok_or_else(|| perr(hline, format!("bad header field `{kv}`")))?;
        let v: usize = v.parse().map_err(|_| perr(hline, format!("bad integer in `{kv}`")))?;
        match k {
            "L" => l = Some(v),
            "nocc" => nocc = Some(v),
            "D" => dim = Some(v),
            _ => return Err(perr(hline, format!("unknown header field `{k}`"))),
        }
    }
    let (l, nocc, dim) = match (l, nocc, dim) {
        (Some(l), Some(n), Some(d)) => (l, n, d),
        _ => return Err(perr(hline, "header needs L=, nocc= and D=")),
    };
    if nocc > l || !(1..=3).contains(&dim) {
        return Err(perr(hline, "need nocc ≤ L and D in 1..=3"));
    }

    let mut positions: Vec<Option<[f64; 3]>> = vec![None; l];
    let mut t_raw: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    let mut v_map: HashMap<[u32; 4], f64> = HashMap::new();
    let mut w_map: HashMap<[u32; 4], f64> = HashMap::new();
    let mut meta_eps = None;
    let mut meta_rc = None;
    let mut meta_rloc = None;
    let mut period = None;

    for (ln, raw) in lines {
        let line = raw.trim();
        if let Some(meta) = line.strip_prefix("#!") {
            for kv in meta.split_whitespace() {
                let Some((k, v)) = kv.split_once('=') else { continue };
                let num = |s: &str| s.parse::<f64>().map_err(|_| perr(ln, format!("bad number in `{kv}`")));
                match k {
                    "eps_screen" => meta_eps = Some(num(v)?),
                    "R_c" => meta_rc = Some(num(v)?),
                    "R_loc" => meta_rloc = Some(num(v)?),
                    "period" => {
                        let mut p = [0.0; 3];
                        for (axis, s) in v.split(',').enumerate() {
                            if axis >= 3 {
                                return Err(perr(ln, "period has more than 3 components"));
                            }
                            p[axis] = num(s)?;
                        }
                        period = Some(p);
                    }
                    _ => {}
                }
            }
            continue;
        }
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let index = |s: &str| -> Result<usize> {
            let p: usize = s.parse().map_err(|_| perr(ln, format!("bad index `{s}`")))?;
            if p >= l {
                return Err(perr(ln, format!("index {p} ≥ L={l}")));
            }
            Ok(p)
        };
        let value = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| perr(ln, format!("bad value `{s}`")))?;
            if !v.is_finite() {
                return Err(perr(ln, "non-finite value"));
            }
            Ok(v)
        };
        match fields[0] {
            "pos" => {
                if fields.len() != 2 + dim {
                    return Err(perr(ln, format!("pos needs an index and {dim} coordinates")));
                }
                let p = index(fields[1])?;
                let mut x = [0.0; 3];
                for k in 0..dim {
                    x[k] = value(fields[2 + k])?;
                }
                positions[p] = Some(x);
            }
            "t" => {
                if fields.len() != 4 {
                    return Err(perr(ln, "t needs 2 indices and a value"));
                }
                let (p, q, v) = (index(fields[1])?, index(fields[2])?, value(fields[3])?);
                let key = (p.min(q), p.max(q));
                if let Some(&(old, _)) = t_raw.get(&key) {
                    if (old - v).abs() > SYMMETRY_TOL {
                        return Err(Error::InconsistentIntegrals(format!(
                            "line {ln}: t({p},{q}) = {v:e} disagrees with {old:e}"
                        )));
                    }
                }
                t_raw.insert(key, (v, ln));
            }
            "V" | "W" => {
                if fields.len() != 6 {
                    return Err(perr(ln, format!("{} needs 4 indices and a value", fields[0])));
                }
                let idx = [index(fields[1])?, index(fields[2])?, index(fields[3])?, index(fields[4])?];
                let v = value(fields[5])?;
                let key = canonical_key(idx[0], idx[1], idx[2], idx[3]);
                let map = if fields[0] == "V" { &mut v_map } else { &mut w_map };
                if let Some(&old) = map.get(&key) {
                    if (old - v).abs() > SYMMETRY_TOL {
                        return Err(Error::InconsistentIntegrals(format!(
                            "line {ln}: {}{:?} = {v:e} disagrees with symmetric image {old:e}",
                            fields[0], idx
                        )));
                    }
                }
                map.insert(key, v);
            }
            other => return Err(perr(ln, format!("unknown record `{other}`"))),
        }
    }

    let positions: Vec<[f64; 3]> = positions
        .into_iter()
        .enumerate()
        .map(|(p, x)| x.ok_or_else(|| perr(0, format!("missing pos for orbital {p}"))))
        .collect::<Result<_>>()?;
    v_map.retain(|_, v| *v != 0.0);
    w_map.retain(|_, v| *v != 0.0);

    let mut t = SymMatrix::default();
    for (&(p, q), &(v, _)) in &t_raw {
        t.insert(p, q, v);
    }

    let mut set = IntegralSet::from_parts(Parts {
        mode: Mode::File,
        n_occ: nocc,
        dim,
        positions,
        period,
        eps_screen: meta_eps.unwrap_or(1.0),
        r_c: f64::INFINITY,
        r_loc: 0.0,
        backend: PartsBackend::Table {
            v: v_map.clone(),
            w: w_map.clone(),
        },
        t: None,
        f: None,
    })?;

    // interaction range actually present in the data
    let mut r_c: f64 = meta_rc.unwrap_or(1.0);
    let mut r_loc: f64 = meta_rloc.unwrap_or(0.0);
    for (p, q, _) in t.iter().filter(|(p, q, _)| p != q) {
        let r = set.distance(p, q);
        r_c = r_c.max(r);
        r_loc = r_loc.max(r);
    }
    for k in v_map.keys().chain(w_map.keys()) {
        let [p, q, r, s] = k.map(|x| x as usize);
        if p != r || q != s {
            r_c = r_c.max(set.extent(&[p, q, r, s]));
        }
    }

    // f_pq = t_pq + Σ_i (V_piqi − V_piiq), summed over distinct symmetry images
    let mut f = t.clone();
    let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
    for (key, &v) in &v_map {
        let [a, b, c, d] = key.map(|x| x as usize);
        let mut imgs = super::symmetry_images(a, b, c, d);
        imgs.sort_unstable();
        let mut last = None;
        for img in imgs {
            if last == Some(img) {
                continue;
            }
            last = Some(img);
            let [p, i, q, j] = img.map(|x| x as usize);
            if i == j && i < nocc {
                *acc.entry((p, q)).or_default() += v;
            }
            if i == q && i < nocc {
                *acc.entry((p, j)).or_default() -= v;
            }
        }
    }
    for ((p, q), v) in acc {
        if p <= q {
            f.insert(p, q, f.get(p, q) + v);
        }
    }
    let rebuilt = IntegralSet::from_parts(Parts {
        mode: Mode::File,
        n_occ: nocc,
        dim,
        positions: (0..l).map(|p| set.position(p)).collect(),
        period,
        eps_screen: meta_eps.unwrap_or(1.0),
        r_c,
        r_loc,
        backend: PartsBackend::Table { v: v_map, w: w_map },
        t: Some(t.clone()),
        f: Some(f.clone()),
    })?;
    set = rebuilt;
    set.check_brillouin(SYMMETRY_TOL)?;
    // enforce the zero occupied–virtual block exactly
    let mut f_clean = f;
    let ov: Vec<(usize, usize)> = f_clean
        .iter()
        .filter(|(p, q, _)| (*p < nocc) != (*q < nocc))
        .map(|(p, q, _)| (p, q))
        .collect();
    for (p, q) in ov {
        f_clean.insert(p, q, 0.0);
    }
    set.set_one_body(t, f_clean);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    #[test]
    fn single_one_body_entry() {
        let text = "exints v1 L=2 nocc=1 D=1\npos 0 0\npos 1 0\nt 0 0 -1.0\n";
        let ints = parse_integrals(text).unwrap();
        assert_eq!(ints.f(0, 0), -1.0);
        assert_eq!(ints.mode(), Mode::File);
    }

    #[test]
    fn two_orbital_fock_by_hand() {
        // f_00 = t_00 + (V_0000 − V_0000) = 0, f_11 = t_11 + V_1010 − V_1001
        let text = "exints v1 L=2 nocc=1 D=1\npos 0 0\npos 1 0\nV 0 0 0 0 0.7\nV 1 0 1 0 0.3\nV 1 0 0 1 0.1\n";
        let ints = parse_integrals(text).unwrap();
        assert_eq!(ints.f(0, 0), 0.0);
        assert!((ints.f(1, 1) - (0.3 - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "exints v1 L=2 nocc=1 D=1\npos 0 0\npos 1 0\nt 0 zero 1.0\n";
        match parse_integrals(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_integrals("hello"), Err(Error::Parse { line: 1, .. })));
        let text = "exints v1 L=2 nocc=1 D=1\npos 0 0\npos 1 0\nX 0\n";
        assert!(matches!(parse_integrals(text), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn symmetry_violation() {
        let text = "exints v1 L=2 nocc=1 D=1\npos 0 0\npos 1 0\nV 0 1 1 0 0.5\nV 1 0 0 1 0.501\n";
        assert!(matches!(parse_integrals(text), Err(Error::InconsistentIntegrals(_))));
    }

    #[test]
    fn brillouin_violation() {
        let text = "exints v1 L=2 nocc=1 D=1\npos 0 0\npos 1 0\nt 0 1 0.2\n";
        assert!(matches!(parse_integrals(text), Err(Error::InconsistentIntegrals(_))));
    }

    #[test]
    fn lattice_round_trip() {
        let cfg = ModelConfig {
            n_sites: 5,
            t_hop: 0.3,
            r_c: 2.0,
            r_loc: 1.0,
            ..ModelConfig::default()
        };
        let ints = cfg.build_lattice().unwrap();
        let back = parse_integrals(&dump_integrals(&ints)).unwrap();
        assert_eq!(back.r_c(), ints.r_c());
        assert_eq!(back.eps_screen(), ints.eps_screen());
        let n = ints.n_orb();
        for p in 0..n {
            for q in 0..n {
                assert!((back.t(p, q) - ints.t(p, q)).abs() <= 1e-15);
                assert!((back.f(p, q) - ints.f(p, q)).abs() <= 1e-12);
                for r in 0..n {
                    for s in 0..n {
                        assert!((back.v(p, q, r, s) - ints.v(p, q, r, s)).abs() <= 1e-15);
                        assert!((back.w(p, q, r, s) - ints.w(p, q, r, s)).abs() <= 1e-15);
                    }
                }
            }
        }
    }
}
