//! Symbolic cost model for the quantum algorithms and the speedup over
//! classical sparse iteration.
//!
//! Costs are monomials over `d` (iterations), `R_c`, the system volume
//! `V`, `1/γ`, `1/ε` and `L_c = d·R_c`, with rational exponents. Polylog
//! factors are a flag, never an exponent.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operator::{OperatorHandle, DEFAULT_CACHE_ELEMENTS};
use crate::solvers::power_norm;

pub type Exp = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    V,
    D,
    Rc,
    Lc,
    InvGamma,
    InvEps,
}

impl Symbol {
    fn label(self) -> &'static str {
        match self {
            Symbol::V => "V",
            Symbol::D => "d",
            Symbol::Rc => "Rc",
            Symbol::Lc => "Lc",
            Symbol::InvGamma => "(1/gamma)",
            Symbol::InvEps => "(1/eps)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CostExpr {
    exps: BTreeMap<Symbol, Exp>,
    pub polylog: bool,
}

impl CostExpr {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn polylog_one() -> Self {
        Self {
            exps: BTreeMap::new(),
            polylog: true,
        }
    }

    pub fn sym(s: Symbol, e: i64) -> Self {
        Self::one().times(s, Exp::from_integer(e))
    }

    /// `d^a · R_c^b`.
    pub fn d_rc(a: i64, b: i64) -> Self {
        Self::sym(Symbol::D, a).mul(&Self::sym(Symbol::Rc, b))
    }

    pub fn times(mut self, s: Symbol, e: Exp) -> Self {
        let v = self.exps.entry(s).or_insert_with(|| Exp::from_integer(0));
        *v += e;
        if *v == Exp::from_integer(0) {
            self.exps.remove(&s);
        }
        self
    }

    pub fn exponent(&self, s: Symbol) -> Exp {
        self.exps.get(&s).copied().unwrap_or_else(|| Exp::from_integer(0))
    }

    pub fn mul(&self, other: &CostExpr) -> CostExpr {
        let mut out = self.clone();
        for (&s, &e) in &other.exps {
            out = out.times(s, e);
        }
        out.polylog |= other.polylog;
        out
    }

    pub fn div(&self, other: &CostExpr) -> CostExpr {
        let mut out = self.clone();
        for (&s, &e) in &other.exps {
            out = out.times(s, -e);
        }
        out.polylog |= other.polylog;
        out
    }

    pub fn pow(&self, k: i64) -> CostExpr {
        CostExpr {
            exps: self.exps.iter().map(|(&s, &e)| (s, e * k)).collect(),
            polylog: self.polylog,
        }
    }

    /// Replace `L_c` by `d·R_c`.
    pub fn expand(&self) -> CostExpr {
        let lc = self.exponent(Symbol::Lc);
        let mut out = self.clone();
        out.exps.remove(&Symbol::Lc);
        out.times(Symbol::D, lc).times(Symbol::Rc, lc)
    }

    /// Fold the common power of `d` and `R_c` into `L_c`.
    pub fn lc_form(&self) -> CostExpr {
        let e = self.expand();
        let (a, b) = (e.exponent(Symbol::D), e.exponent(Symbol::Rc));
        let zero = Exp::from_integer(0);
        if a <= zero || b <= zero {
            return e;
        }
        let k = a.min(b);
        e.times(Symbol::D, -k).times(Symbol::Rc, -k).times(Symbol::Lc, k)
    }

    /// Equal as monomials once `L_c` is expanded (polylog flag ignored).
    pub fn same_monomial(&self, other: &CostExpr) -> bool {
        self.expand().exps == other.expand().exps
    }

    /// True when every exponent is at least the other's, after expansion.
    pub fn dominates(&self, other: &CostExpr) -> bool {
        let (a, b) = (self.expand(), other.expand());
        let syms: Vec<Symbol> = a.exps.keys().chain(b.exps.keys()).copied().collect();
        syms.into_iter().all(|s| a.exponent(s) >= b.exponent(s))
    }

    /// Sum of monomials reduced to its asymptotically dominant term.
    pub fn dominant(terms: &[CostExpr]) -> CostExpr {
        let pick = terms
            .iter()
            .find(|t| terms.iter().all(|o| t.dominates(o)))
            .or_else(|| terms.iter().max_by_key(|t| t.expand().exps.values().sum::<Exp>()))
            .cloned()
            .unwrap_or_default();
        let polylog = terms.iter().any(|t| t.polylog && t.same_monomial(&pick));
        CostExpr { polylog, ..pick }
    }

    /// Evaluate with numeric values for the symbols present (`L_c` from
    /// `d` and `R_c` when not given).
    pub fn eval(&self, values: &BTreeMap<Symbol, f64>) -> f64 {
        let e = self.expand();
        e.exps
            .iter()
            .map(|(s, x)| values.get(s).copied().unwrap_or(1.0).powf(*x.numer() as f64 / *x.denom() as f64))
            .product()
    }
}

impl fmt::Display for CostExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (s, e) in &self.exps {
            let label = s.label();
            if *e == Exp::from_integer(1) {
                parts.push(label.to_string());
            } else if e.is_integer() {
                parts.push(format!("{label}^{}", e.numer()));
            } else {
                parts.push(format!("{label}^({}/{})", e.numer(), e.denom()));
            }
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        if self.polylog {
            parts.push("polylog".into());
        }
        write!(f, "{}", parts.join(" * "))
    }
}

impl Serialize for CostExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bse,
    Lcc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum InputModel {
    /// Integrals loaded from a table.
    Integrals,
    /// Integrals computed on the fly from atomic data.
    Atomic,
    /// Translation-invariant crystal.
    Crystal,
}

impl InputModel {
    pub const ALL: [InputModel; 3] = [InputModel::Integrals, InputModel::Atomic, InputModel::Crystal];
}

impl fmt::Display for InputModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputModel::Integrals => "integrals",
            InputModel::Atomic => "atomic",
            InputModel::Crystal => "crystal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub method: Method,
    pub input_model: InputModel,
    pub m: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    /// BSE only: the exciton centre of mass is not pinned, which costs an
    /// extra factor of `V` classically.
    pub com_delocalized: bool,
    /// Multiply the eigenvalue cost by `1/γ`.
    pub include_overlap: bool,
    /// LCC only: `R_c^D` amplitude-estimation overhead for reading out `E_c`.
    pub include_readout: bool,
}

impl ScenarioConfig {
    pub fn new(method: Method, input_model: InputModel, m: usize, dim: usize) -> Self {
        Self {
            method,
            input_model,
            m,
            dim,
            com_delocalized: false,
            include_overlap: false,
            include_readout: method == Method::Lcc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrepKind {
    Unit,
    HartreeFock,
    AmplitudeLoad,
    CrystalFill,
}

/// Initial-state preparation cost.
pub fn prep_cost(kind: PrepKind, dim: usize) -> CostExpr {
    match kind {
        PrepKind::Unit => CostExpr::one(),
        PrepKind::HartreeFock | PrepKind::CrystalFill => CostExpr::polylog_one(),
        PrepKind::AmplitudeLoad => CostExpr::sym(Symbol::V, 1).mul(&CostExpr::sym(Symbol::Rc, dim as i64)),
    }
}

/// Block-encoding cost per query.
pub fn block_encoding_cost(sc: &ScenarioConfig) -> CostExpr {
    let dim = sc.dim as i64;
    match (sc.method, sc.input_model) {
        (Method::Bse, InputModel::Integrals) => CostExpr::sym(Symbol::Lc, 2 * dim),
        (Method::Bse, InputModel::Atomic) => CostExpr::sym(Symbol::Lc, dim),
        (Method::Lcc, InputModel::Integrals) => CostExpr::sym(Symbol::V, 1).mul(&CostExpr::sym(Symbol::Rc, dim)),
        (Method::Lcc, InputModel::Atomic) => CostExpr::sym(Symbol::V, 1),
        (_, InputModel::Crystal) => CostExpr::one(),
    }
}

pub fn init_cost(sc: &ScenarioConfig) -> CostExpr {
    match (sc.method, sc.input_model) {
        (Method::Bse, _) => prep_cost(PrepKind::Unit, sc.dim),
        (Method::Lcc, InputModel::Crystal) => prep_cost(PrepKind::CrystalFill, sc.dim),
        (Method::Lcc, _) => prep_cost(PrepKind::AmplitudeLoad, sc.dim),
    }
}

/// `(C_init + C_BE·s·d)` with `s = R_c^D`, times `1/γ` (BSE, optional) or
/// the `R_c^D` readout overhead (LCC, optional), reduced to its dominant term.
pub fn quantum_cost(sc: &ScenarioConfig) -> CostExpr {
    let s = CostExpr::sym(Symbol::Rc, sc.dim as i64);
    let d = CostExpr::sym(Symbol::D, 1);
    let query = block_encoding_cost(sc).mul(&s).mul(&d);
    let mut cost = CostExpr::dominant(&[init_cost(sc), query]);
    if sc.method == Method::Bse && sc.include_overlap {
        cost = cost.mul(&CostExpr::sym(Symbol::InvGamma, 1));
    }
    if sc.method == Method::Lcc && sc.include_readout {
        cost = cost.mul(&s);
    }
    cost.expand()
}

/// `d^{2mD+1} R_c^{(2m+1)D}`, times `V` for LCC outside crystals and for
/// BSE with a delocalized centre of mass.
pub fn classical_cost(method: Method, m: usize, dim: usize, crystal: bool, com_delocalized: bool) -> CostExpr {
    let (m, dim) = (m as i64, dim as i64);
    let base = CostExpr::d_rc(2 * m * dim + 1, (2 * m + 1) * dim);
    let extra_v = match method {
        Method::Lcc => !crystal,
        Method::Bse => com_delocalized,
    };
    if extra_v {
        base.mul(&CostExpr::sym(Symbol::V, 1))
    } else {
        base
    }
}

fn classical_for(sc: &ScenarioConfig) -> CostExpr {
    classical_cost(
        sc.method,
        sc.m,
        sc.dim,
        sc.input_model == InputModel::Crystal,
        sc.method == Method::Bse && sc.com_delocalized,
    )
}

fn ratio_f64(r: Exp) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct Speedup {
    /// Classical over quantum cost, in `L_c` form.
    pub ratio: CostExpr,
    pub classical: CostExpr,
    pub quantum: CostExpr,
    /// `(a₁/a₂, b₁/b₂)` from the raw `d` and `R_c` exponents.
    pub power_raw: (f64, f64),
    /// `a₁` over the leftover `d` power of the ratio, the convention used
    /// for LCC rows; equals `power_raw` when no `d` is left over.
    pub power_table: (f64, f64),
}

pub fn speedup(sc: &ScenarioConfig) -> Speedup {
    let classical = classical_for(sc);
    let quantum = quantum_cost(sc);
    let ratio = classical.div(&quantum).lc_form();
    let (a1, b1) = (classical.exponent(Symbol::D), classical.exponent(Symbol::Rc));
    let (a2, b2) = (quantum.exponent(Symbol::D), quantum.exponent(Symbol::Rc));
    let power_raw = (ratio_f64(a1 / a2), ratio_f64(b1 / b2));
    let leftover = ratio.exponent(Symbol::D);
    let power_table = if sc.method == Method::Lcc && leftover > Exp::from_integer(0) {
        (ratio_f64(a1 / leftover), power_raw.1)
    } else {
        power_raw
    };
    Speedup {
        ratio,
        classical,
        quantum,
        power_raw,
        power_table,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QubitCount {
    /// `2m·⌈log₂ L⌉`: one register of `⌈log₂ L⌉` bits per index.
    pub packed: usize,
    /// `m·round(2·log₂ L)`: the unrounded `2 log₂ L` per excitation.
    pub per_excitation: usize,
}

pub fn qubit_count(l: usize, m: usize) -> QubitCount {
    let bits = if l <= 2 { 1 } else { (usize::BITS - (l - 1).leading_zeros()) as usize };
    QubitCount {
        packed: 2 * m * bits,
        per_excitation: m * (2.0 * (l as f64).log2()).round() as usize,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub method: Method,
    pub input_model: InputModel,
    pub quantum_cost: CostExpr,
    pub classical_cost: CostExpr,
    pub speedup_ratio: CostExpr,
    pub power_raw: (f64, f64),
    pub power_table: (f64, f64),
}

/// Both methods over the three input models.
pub fn table(m: usize, dim: usize, methods: &[Method], inputs: &[InputModel], overlap: bool) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for &method in methods {
        for &input_model in inputs {
            let mut sc = ScenarioConfig::new(method, input_model, m, dim);
            sc.include_overlap = overlap;
            let s = speedup(&sc);
            rows.push(TableRow {
                method,
                input_model,
                quantum_cost: s.quantum,
                classical_cost: s.classical,
                speedup_ratio: s.ratio,
                power_raw: round2(s.power_raw),
                power_table: round2(s.power_table),
            });
        }
    }
    rows
}

/// Two significant figures.
fn round2(p: (f64, f64)) -> (f64, f64) {
    let r = |x: f64| format!("{x:.1e}").parse::<f64>().unwrap_or(x);
    (r(p.0), r(p.1))
}

/// Aligned plain-text rendering of [`table`].
pub fn render_table(rows: &[TableRow]) -> String {
    let header = ["method", "input", "quantum cost", "speedup ratio", "power (raw)", "power (table)"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                format!("{:?}", r.method).to_lowercase(),
                r.input_model.to_string(),
                r.quantum_cost.to_string(),
                r.speedup_ratio.to_string(),
                format!("({}, {})", r.power_raw.0, r.power_raw.1),
                format!("({}, {})", r.power_table.0, r.power_table.1),
            ]
        })
        .collect();
    let mut width = header.map(|h| h.chars().count());
    for c in &cells {
        for (k, s) in c.iter().enumerate() {
            width[k] = width[k].max(s.chars().count());
        }
    }
    let line = |c: &[String]| {
        c.iter()
            .enumerate()
            .map(|(k, s)| format!("{s:<w$}", w = width[k]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(&header.map(String::from));
    out.push('\n');
    for c in &cells {
        out.push_str(&line(c));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Subnormalization {
    /// `s_max · max|A_μν|`.
    pub alpha: f64,
    pub s_max: usize,
    pub max_abs: f64,
    /// Power-iteration estimate of `‖A‖₂`.
    pub norm_estimate: f64,
    pub bound_holds: bool,
}

/// Scan every row, then compare `α` with a power-iteration norm estimate.
pub fn subnormalization(handle: &OperatorHandle) -> Result<Subnormalization> {
    let cached;
    let handle = if handle.has_cache() {
        handle
    } else {
        cached = handle.clone().with_cache(DEFAULT_CACHE_ELEMENTS);
        &cached
    };
    handle.scan()?;
    let norm_estimate = power_norm(handle, 200, 7)?;
    let alpha = handle.alpha();
    Ok(Subnormalization {
        alpha,
        s_max: handle.s_max(),
        max_abs: handle.max_abs(),
        norm_estimate,
        bound_holds: norm_estimate <= alpha * (1.0 + 1e-12),
    })
}
