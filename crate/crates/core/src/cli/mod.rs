//! Command-line front end. `run` parses arguments, executes one command
//! and returns the process exit code:
//! 0 ok, 2 parse error, 3 invariant violation, 4 not converged,
//! 5 resource guard.

mod manifest;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

pub use manifest::RunManifest;

use crate::bse::{exciton_operator, local_excitons};
use crate::error::Error;
use crate::estimator::{qubit_count, render_table, table, InputModel, Method};
use crate::exbasis::SparseState;
use crate::lcc::{default_max_iter, solve_with, Liouvillian};
use crate::lightcone::{fit_volume_exponent, probe_with, within_lightcone};
use crate::model::{dump_integrals, parse_integrals, IntegralClass, IntegralSet, ModelConfig};
use crate::operator::{OperatorHandle, DEFAULT_CACHE_ELEMENTS};
use crate::solvers::{lowest_eigenpairs, propagate, ConvergenceParams};

pub const DEFAULT_MAX_SUPPORT: usize = 50_000_000;

#[derive(Debug, Parser)]
#[command(name = "exspar", version, about = "Sparse excitation-space solvers and resource estimates")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Print errors only.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print machine-readable JSON only.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for matvecs; 1 is the deterministic mode.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutDir {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or load a model and write its integral dump.
    Model(ModelArgs),
    /// Exciton eigenvalues or dynamics.
    #[command(subcommand)]
    Bse(BseCommand),
    /// Linearized coupled cluster.
    #[command(subcommand)]
    Lcc(LccCommand),
    /// Support growth of repeated matvecs.
    Probe(ProbeArgs),
    /// Quantum cost and speedup table.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// JSON model configuration file.
    #[arg(long, conflicts_with = "model")]
    pub config: Option<PathBuf>,
    /// Model as a config path, inline JSON or integral file.
    #[arg(long)]
    pub model: Option<String>,
    /// Integral dump path; the summary and manifest go next to it.
    #[arg(long, default_value = "ints.txt")]
    pub out: PathBuf,
    /// Build the periodic crystal instead of the open lattice.
    #[arg(long)]
    pub crystal: bool,
}

#[derive(Debug, Subcommand)]
pub enum BseCommand {
    /// Lowest eigenvalues by Lanczos.
    Eig(BseEigArgs),
    /// Real-time propagation from a local exciton.
    Dyn(BseDynArgs),
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Config path, inline JSON, or integral file.
    #[arg(long)]
    pub model: String,
}

#[derive(Debug, Args)]
pub struct BseEigArgs {
    #[command(flatten)]
    pub out: OutDir,
    #[command(flatten)]
    pub src: ModelSource,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 500)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct BseDynArgs {
    #[command(flatten)]
    pub out: OutDir,
    #[command(flatten)]
    pub src: ModelSource,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Total time.
    #[arg(long = "t", default_value_t = 5.0)]
    pub time: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Initial state, `site:<k>` (an on-site exciton at site k, then k+1, …).
    #[arg(long, default_value = "site:0")]
    pub init: String,
    /// Sites whose particle occupation is reported (default: the initial sites and their neighbours).
    #[arg(long, value_delimiter = ',')]
    pub sites: Vec<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum LccCommand {
    /// Solve the amplitude equations.
    Solve(LccSolveArgs),
}

#[derive(Debug, Args)]
pub struct LccSolveArgs {
    #[command(flatten)]
    pub out: OutDir,
    #[command(flatten)]
    pub src: ModelSource,
    /// Highest excitation rank.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration cap (default 10·√dim + 200).
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeMethod {
    Bse,
    Lcc,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub out: OutDir,
    /// Model to probe; by default a lattice sized to stay clear of saturation.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_enum, default_value = "bse")]
    pub method: ProbeMethod,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long = "D", default_value_t = 1)]
    pub dim: usize,
    #[arg(long = "Rc", default_value_t = 1.0)]
    pub r_c: f64,
    /// Number of matvecs.
    #[arg(long, default_value_t = 6)]
    pub d: usize,
    #[arg(long = "max-support", default_value_t = DEFAULT_MAX_SUPPORT)]
    pub max_support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Bse,
    Lcc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputArg {
    Integrals,
    Atomic,
    Crystal,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub out: OutDir,
    /// Restrict to one method (default: both).
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Restrict to one input model (default: all three).
    #[arg(long, value_enum)]
    pub input: Option<InputArg>,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long = "D", default_value_t = 3)]
    pub dim: usize,
    /// Orbital count for the qubit estimate.
    #[arg(long = "L", default_value_t = 100_000)]
    pub l: usize,
    /// Include the 1/γ overlap factor in eigenvalue costs.
    #[arg(long)]
    pub overlap: bool,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::Io(_) => 2,
            Error::NotConverged { .. } => 4,
            Error::Aborted { .. } | Error::TooLarge { .. } => 5,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

struct Ctx {
    global: Global,
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl Ctx {
    fn say(&self, text: &str) {
        if !self.global.quiet && !self.global.json {
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }

    fn emit_json(&self, value: &serde_json::Value) {
        if self.global.json {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(value).unwrap());
        }
    }

    fn path(&self, name: &Path) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write(&mut self, name: impl AsRef<Path>, contents: &str) -> CmdResult {
        let path = self.path(name.as_ref());
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(Error::from)?;
        }
        fs::write(&path, contents).map_err(Error::from)?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Pretty JSON with the manifest digest as the first field.
    fn write_json(&mut self, name: &str, value: serde_json::Value) -> CmdResult {
        let mut obj = serde_json::Map::new();
        obj.insert("manifest_digest".into(), json!(self.manifest.digest));
        if let serde_json::Value::Object(map) = value {
            obj.extend(map);
        }
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(obj))
            .map_err(|e| Failure {
                code: 3,
                message: e.to_string(),
            })?
            + "\n";
        self.write(name, &text)
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, &describe(&args)) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli, description: &str) -> CmdResult {
    let out_dir = match &cli.command {
        Command::Model(a) => match a.out.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        },
        Command::Bse(BseCommand::Eig(a)) => a.out.out.clone(),
        Command::Bse(BseCommand::Dyn(a)) => a.out.out.clone(),
        Command::Lcc(LccCommand::Solve(a)) => a.out.out.clone(),
        Command::Probe(a) => a.out.out.clone(),
        Command::Estimate(a) => a.out.out.clone(),
    };
    let mut ctx = Ctx {
        manifest: RunManifest::start(description, cli.global.seed),
        global: cli.global,
        out_dir,
    };
    fs::create_dir_all(&ctx.out_dir).map_err(Error::from)?;
    let result = match &cli.command {
        Command::Model(a) => cmd_model(&mut ctx, a),
        Command::Bse(BseCommand::Eig(a)) => cmd_bse_eig(&mut ctx, a),
        Command::Bse(BseCommand::Dyn(a)) => cmd_bse_dyn(&mut ctx, a),
        Command::Lcc(LccCommand::Solve(a)) => cmd_lcc(&mut ctx, a),
        Command::Probe(a) => cmd_probe(&mut ctx, a),
        Command::Estimate(a) => cmd_estimate(&mut ctx, a),
    };
    ctx.manifest.finish();
    let text = serde_json::to_string_pretty(&ctx.manifest).unwrap() + "\n";
    fs::write(ctx.path(Path::new("manifest.json")), text).map_err(Error::from)?;
    result
}

/// The command line without the program name, output location, thread
/// count and verbosity, so the digest only reflects what is computed.
fn describe(args: &[OsString]) -> String {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args.iter().skip(1) {
        let a = a.to_string_lossy();
        if skip {
            skip = false;
        } else if a == "--out" || a == "--threads" {
            skip = true;
        } else if !a.starts_with("--out=") && !a.starts_with("--threads=") && a != "--quiet" && a != "--json" {
            out.push(a.into_owned());
        }
    }
    out.join(" ")
}

fn parse_json_config(text: &str) -> Result<ModelConfig, Failure> {
    serde_json::from_str::<ModelConfig>(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        let code = if e.is_data() { 3 } else { 2 };
        Failure {
            code,
            message: format!(
                "model config: {e} (byte offset {offset})"
            ),
        }
    })
}

/// Byte offset of a 1-based line and column as reported by serde_json.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut off = 0;
    for (n, l) in text.split_inclusive('\n').enumerate() {
        if n + 1 == line {
            return off + column.saturating_sub(1).min(l.len());
        }
        off += l.len();
    }
    text.len()
}

/// A model from inline JSON, a JSON config file, or an integral file.
/// The returned text is what the digest covers.
fn load_model(ctx: &mut Ctx, spec: &str, crystal: bool) -> Result<IntegralSet, Failure> {
    let trimmed = spec.trim_start();
    let (text, is_json) = if trimmed.starts_with('{') {
        (spec.to_string(), true)
    } else {
        let text = fs::read_to_string(spec).map_err(|e| Failure {
            code: 2,
            message: format!("{spec}: {e}"),
        })?;
        let is_json = spec.ends_with(".json") || text.trim_start().starts_with('{');
        (text, is_json)
    };
    ctx.manifest.absorb(&text);
    if is_json {
        let cfg = parse_json_config(&text)?;
        let ints = if crystal { cfg.build_crystal() } else { cfg.build_lattice() }?;
        Ok(ints)
    } else {
        Ok(parse_integrals(&text)?)
    }
}

fn cmd_model(ctx: &mut Ctx, a: &ModelArgs) -> CmdResult {
    let source = match (&a.config, &a.model) {
        (Some(p), _) => p.display().to_string(),
        (None, Some(m)) => m.clone(),
        (None, None) => {
            return Err(Failure {
                code: 2,
                message: "model needs --config or --model".into(),
            })
        }
    };
    let ints = load_model(ctx, &source, a.crystal)?;
    let dump_name = PathBuf::from(a.out.file_name().unwrap_or("ints.txt".as_ref()));
    let digest = ctx.manifest.digest.clone();
    let dump = format!("# manifest {digest}\n{}", dump_integrals(&ints));
    ctx.write(&dump_name, &dump)?;
    let mut hist = [0usize; 3];
    let entries = ints.two_body_entries();
    for (k, _, _) in &entries {
        let c = IntegralSet::class_of(k[0] as usize, k[1] as usize, k[2] as usize, k[3] as usize);
        hist[match c {
            IntegralClass::DensityDensity => 0,
            IntegralClass::ChargeDipole => 1,
            IntegralClass::DipoleDipole => 2,
        }] += 1;
    }
    let summary = json!({
        "mode": ints.mode(),
        "orbitals": ints.n_orb(),
        "occupied": ints.n_occ(),
        "D": ints.dim(),
        "R_c": ints.r_c(),
        "eps_screen": ints.eps_screen(),
        "one_body_entries": ints.t_matrix().len(),
        "two_body_orbits": entries.len(),
        "class_histogram": {
            "density_density": hist[0],
            "charge_dipole": hist[1],
            "dipole_dipole": hist[2],
        },
        "integrals": dump_name.display().to_string(),
    });
    ctx.write_json("model_summary.json", summary.clone())?;
    ctx.emit_json(&summary);
    ctx.say(&format!(
        "{} orbitals ({} occupied), {} two-body orbits; wrote {}",
        ints.n_orb(),
        ints.n_occ(),
        entries.len(),
        ctx.path(&dump_name).display()
    ));
    Ok(())
}

fn handle_for(ctx: &Ctx, h: OperatorHandle) -> Result<OperatorHandle, Failure> {
    Ok(h.with_threads(ctx.global.threads)?.with_cache(DEFAULT_CACHE_ELEMENTS))
}

fn cmd_bse_eig(ctx: &mut Ctx, a: &BseEigArgs) -> CmdResult {
    let ints = Arc::new(load_model(ctx, &a.src.model, false)?);
    let h = handle_for(ctx, exciton_operator(ints, a.m)?)?;
    let basis = h.basis();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.global.seed);
    let v0: SparseState = basis
        .iter()
        .map(|s| (s.clone(), Complex64::new(rng.gen_range(-1.0..1.0), 0.0)))
        .collect();
    let p = ConvergenceParams {
        tol: a.tol,
        max_iter: a.max_iter,
        ..ConvergenceParams::default()
    };
    let out = lowest_eigenpairs(&h, &v0, a.k, &p)?;
    let report = json!({
        "m": a.m,
        "dimension": basis.len(),
        "eigenvalues": out.values,
        "residuals": out.residuals,
        "iterations": out.iterations,
        "converged": out.converged,
    });
    ctx.write_json("bse_eig.json", report.clone())?;
    ctx.emit_json(&report);
    ctx.say(&format!("lowest eigenvalues: {:?} ({} iterations)", out.values, out.iterations));
    out.into_result()?;
    Ok(())
}

fn parse_init(init: &str, m: usize) -> Result<Vec<usize>, Failure> {
    let site = init
        .strip_prefix("site:")
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Failure {
            code: 2,
            message: format!("--init must look like site:<k>, got `{init}`"),
        })?;
    Ok((site..site + m).collect())
}

fn cmd_bse_dyn(ctx: &mut Ctx, a: &BseDynArgs) -> CmdResult {
    let ints = Arc::new(load_model(ctx, &a.src.model, false)?);
    let sites = parse_init(&a.init, a.m)?;
    let mu0 = local_excitons(&ints, &sites)?;
    let h = handle_for(ctx, exciton_operator(ints.clone(), a.m)?)?;
    let bounds = crate::solvers::gershgorin(&h, h.basis().iter())?;
    let report: Vec<usize> = if a.sites.is_empty() {
        let lo = sites[0].saturating_sub(1);
        let hi = (sites[sites.len() - 1] + 1).min(ints.n_sites() - 1);
        (lo..=hi).collect()
    } else {
        a.sites.clone()
    };
    let p = ConvergenceParams {
        tol: a.tol,
        max_iter: 1_000_000,
        ..ConvergenceParams::default()
    };
    let steps = a.steps.max(1);
    let dt = a.time / steps as f64;
    let mut v = SparseState::unit(mu0);
    let mut csv = String::from("time,support,norm,energy");
    for s in &report {
        csv.push_str(&format!(",p_site{s}"));
    }
    csv.push('\n');
    let mut worst_norm: f64 = 0.0;
    for step in 0..=steps {
        if step > 0 {
            v = propagate(&h, &v, dt, Some(bounds), &p)?.into_result()?.state;
        }
        let norm = v.norm();
        worst_norm = worst_norm.max((norm - 1.0).abs());
        let energy = v.dot(&h.apply(&v)?).re;
        let mut line = format!("{:.6},{},{:.15},{:.12}", step as f64 * dt, v.support(), norm, energy);
        for &site in &report {
            let prob: f64 = v
                .iter()
                .map(|(s, c)| c.norm_sqr() * s.particles().filter(|&p| ints.site_of(p) == site).count() as f64)
                .sum();
            line.push_str(&format!(",{prob:.12}"));
        }
        csv.push_str(&line);
        csv.push('\n');
    }
    let digest = ctx.manifest.digest.clone();
    ctx.write("bse_dyn.csv", &format!("# manifest {digest}\n{csv}"))?;
    let summary = json!({
        "m": a.m,
        "time": a.time,
        "steps": steps,
        "spectral_bounds": [bounds.0, bounds.1],
        "max_norm_deviation": worst_norm,
        "final_support": v.support(),
    });
    ctx.write_json("bse_dyn.json", summary.clone())?;
    ctx.emit_json(&summary);
    ctx.say(&format!("propagated to t = {}; max |norm − 1| = {worst_norm:.2e}", a.time));
    Ok(())
}

fn cmd_lcc(ctx: &mut Ctx, a: &LccSolveArgs) -> CmdResult {
    let ints = Arc::new(load_model(ctx, &a.src.model, false)?);
    let op = Arc::new(Liouvillian::new(ints, a.m)?);
    let h = handle_for(ctx, OperatorHandle::from_arc(op.clone()))?;
    let p = ConvergenceParams {
        tol: a.tol,
        max_iter: a.max_iter.unwrap_or_else(|| default_max_iter(h.spec())),
        ..ConvergenceParams::default()
    };
    let sol = solve_with(&op, &h, &p)?;
    let mut report = serde_json::to_value(&sol.report).unwrap();
    report["m_max"] = json!(a.m);
    ctx.write_json("lcc_report.json", report.clone())?;
    let digest = ctx.manifest.digest.clone();
    ctx.write(
        "lcc_amplitudes.txt",
        &format!("# manifest {digest}\n{}", sol.amplitudes.dump()),
    )?;
    ctx.emit_json(&report);
    ctx.say(&format!(
        "E_c = {:.12} (MP2 {:.12}), {} iterations, residual {:.2e}",
        sol.report.e_c, sol.report.e_mp2, sol.report.iterations, sol.report.residual
    ));
    sol.into_result()?;
    Ok(())
}

/// Sites per axis for a probe that stays well inside the boundary.
fn probe_sites(m: usize, dim: usize, r_c: f64, d: usize) -> usize {
    let reach = d * r_c.ceil() as usize;
    let factor = if dim == 1 { 8 } else { 4 };
    factor * reach.max(1) + 2 * m + 1
}

#[derive(Serialize)]
struct ProbeReport {
    method: &'static str,
    m: usize,
    #[serde(rename = "D")]
    dim: usize,
    #[serde(rename = "R_c")]
    r_c: f64,
    d: usize,
    origin: String,
    basis_dim: usize,
    s_max: usize,
    nnz: Vec<usize>,
    cum_ops: Vec<u64>,
    exponent: Option<f64>,
    lightcone_ok: bool,
    aborted: bool,
}

fn cmd_probe(ctx: &mut Ctx, a: &ProbeArgs) -> CmdResult {
    let ints = match &a.model {
        Some(m) => load_model(ctx, m, false)?,
        None => {
            let cfg = ModelConfig {
                dim: a.dim,
                n_sites: probe_sites(a.m, a.dim, a.r_c, a.d),
                r_c: a.r_c,
                ..ModelConfig::default()
            };
            ctx.manifest.absorb(&serde_json::to_string(&cfg).unwrap());
            cfg.build_lattice()?
        }
    };
    let ints = Arc::new(ints);
    // an on-site exciton (or a row of them) in the middle of the lattice
    let n = (ints.n_sites() as f64).powf(1.0 / ints.dim() as f64).round() as usize;
    let mut centre = 0;
    for axis in (0..ints.dim()).rev() {
        centre = centre * n + n / 2 - if axis == 0 { a.m / 2 } else { 0 };
    }
    let sites: Vec<usize> = (centre..centre + a.m).collect();
    let mu0 = local_excitons(&ints, &sites)?;
    let (h, method) = match a.method {
        ProbeMethod::Bse => (exciton_operator(ints.clone(), a.m)?, "bse"),
        ProbeMethod::Lcc => (OperatorHandle::new(Liouvillian::new(ints.clone(), a.m)?), "lcc"),
    };
    let h = handle_for(ctx, h)?;
    let reach = ints.r_c();
    let mut cone_ok = true;
    let trace = probe_with(&h, &ints, &mu0, a.d, a.max_support, |k, x| {
        if a.method == ProbeMethod::Bse {
            cone_ok &= x.keys().all(|s| within_lightcone(&ints, &mu0, s, k as f64 * reach));
        }
    })?;
    let exponent = fit_volume_exponent(&trace).ok();
    let digest = ctx.manifest.digest.clone();
    ctx.write("probe.csv", &format!("# manifest {digest}\n{}", trace.to_csv()))?;
    let report = ProbeReport {
        method,
        m: a.m,
        dim: ints.dim(),
        r_c: ints.r_c(),
        d: a.d,
        origin: trace.origin.clone(),
        basis_dim: trace.basis_dim,
        s_max: trace.s_max,
        nnz: trace.points.iter().map(|p| p.nnz).collect(),
        cum_ops: trace.points.iter().map(|p| p.cum_ops).collect(),
        exponent,
        lightcone_ok: cone_ok,
        aborted: trace.aborted,
    };
    let value = serde_json::to_value(&report).unwrap();
    ctx.write_json("probe.json", value.clone())?;
    ctx.emit_json(&value);
    match exponent {
        Some(e) => ctx.say(&format!("support {:?}; fitted exponent {e:.3}", report.nnz)),
        None => ctx.say(&format!("support {:?}; too few points to fit", report.nnz)),
    }
    trace.into_result()?;
    Ok(())
}

fn cmd_estimate(ctx: &mut Ctx, a: &EstimateArgs) -> CmdResult {
    if a.m == 0 || !(1..=3).contains(&a.dim) {
        return Err(Failure {
            code: 3,
            message: "need m ≥ 1 and D in 1..=3".into(),
        });
    }
    let methods: Vec<Method> = match a.method {
        Some(MethodArg::Bse) => vec![Method::Bse],
        Some(MethodArg::Lcc) => vec![Method::Lcc],
        None => vec![Method::Bse, Method::Lcc],
    };
    let inputs: Vec<InputModel> = match a.input {
        Some(InputArg::Integrals) => vec![InputModel::Integrals],
        Some(InputArg::Atomic) => vec![InputModel::Atomic],
        Some(InputArg::Crystal) => vec![InputModel::Crystal],
        None => InputModel::ALL.to_vec(),
    };
    let rows = table(a.m, a.dim, &methods, &inputs, a.overlap);
    let q = qubit_count(a.l, a.m);
    let value = json!({
        "m": a.m,
        "D": a.dim,
        "rows": rows,
        "qubits": { "L": a.l, "m": a.m, "packed": q.packed, "per_excitation": q.per_excitation },
    });
    ctx.write_json("estimate.json", value.clone())?;
    let text = format!(
        "{}\nqubits for L={}, m={}: packed {}, per-excitation {}\n",
        render_table(&rows),
        a.l,
        a.m,
        q.packed,
        q.per_excitation
    );
    ctx.write("estimate.txt", &text)?;
    ctx.emit_json(&value);
    ctx.say(text.trim_end());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_offsets() {
        let t = "{\n  \"D\": 1,\n  oops\n}";
        assert_eq!(byte_offset(t, 1, 1), 0);
        assert_eq!(byte_offset(t, 3, 3), 14);
    }

    #[test]
    fn probe_lattice_size() {
        assert_eq!(probe_sites(1, 1, 1.0, 6), 51);
        assert_eq!(probe_sites(1, 2, 1.0, 4), 19);
    }
}
