//! Command-line front end for `npick`.
//!
//! Every command produces an [`Outcome`]: a JSON report for standard output,
//! a short human summary for standard error, and an exit code
//! (0 success, 1 negative verdict, 2 input error, 3 numerical failure).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use npick::datasets::{self, BtoaData, Dataset};
use npick::fixtures;
use npick::json::{complex_to_value, matrix_to_value};
use npick::lft::{make_interpolant, FreeParameter, Interpolant};
use npick::numkit::{re, CMatrix, Inertia};
use npick::pick::{pick_matrix, PickReport};
use npick::realization::{MatrixFunction, Realization};
use npick::verify::{check_interpolation, ContourConfig, ResidualReport};
use npick::winding::{certify, pole_count, KappaCertificate, WindingConfig};
use npick::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Threshold for residuals and contractivity in `verify`.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "npick", version, about = "Bitangential Nevanlinna-Pick interpolation on the right half plane")]
pub struct Cli {
    /// Zero threshold for inertia and rank decisions.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for random free parameters and demo data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit only the JSON report, without the summary on standard error.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check admissibility of a data file.
    Validate { path: PathBuf },
    /// Pick matrix, its inertia and the solvability verdict.
    Pick { path: PathBuf },
    /// Build the parametrization and evaluate the interpolant.
    Solve {
        path: PathBuf,
        #[command(flatten)]
        g: GArgs,
        /// Points at which to evaluate S, e.g. `5`, `1+2i`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex)]
        eval: Vec<Complex64>,
    },
    /// Check the interpolation conditions for a candidate S.
    Verify {
        path: PathBuf,
        /// S from a realization file, `{"kind":"constant",...}` or `{"kind":"realization",...}`.
        #[arg(long, conflicts_with = "s_from_solve")]
        s_file: Option<PathBuf>,
        /// S from the parametrization with the free parameter below.
        #[arg(long)]
        s_from_solve: bool,
        #[command(flatten)]
        g: GArgs,
        /// Quadrature nodes per circle.
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Expected number of poles; nonzero selects the generalized mode.
        #[arg(long, default_value_t = 0)]
        kappa: usize,
    },
    /// Certify the pole count of the interpolant by winding numbers.
    Kappa {
        path: PathBuf,
        #[command(flatten)]
        g: GArgs,
    },
    /// Run the pipeline on the built-in fixtures.
    Demo,
}

#[derive(Debug, Args, Default)]
#[group(multiple = false)]
pub struct GArgs {
    /// Free parameter file.
    #[arg(long)]
    pub g_file: Option<PathBuf>,
    /// G = 0 (the default).
    #[arg(long)]
    pub g_zero: bool,
    /// A random constant contraction drawn from `--seed`.
    #[arg(long)]
    pub g_random: bool,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    s.trim().parse::<Complex64>().map_err(|e| format!("invalid complex number {s:?}: {e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub report: Value,
    pub summary: String,
}

impl Outcome {
    fn new(code: u8, report: Value, summary: String) -> Self {
        Outcome { code, report, summary }
    }

    fn failure(command: &str, code: u8, message: String) -> Self {
        let kind = if code == EXIT_INPUT { "input" } else { "numerical" };
        Outcome::new(
            code,
            json!({"command": command, "error": {"kind": kind, "message": message}}),
            format!("{command}: {kind} error: {message}"),
        )
    }
}

/// Failure of a command before it can produce its own report.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code_for(&e),
            message: e.to_string(),
        }
    }
}

fn input_failure(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonSquare { .. }
        | Error::NonFinite(_)
        | Error::InvalidData(_)
        | Error::InvalidParameter(_)
        | Error::InvalidProjection(_)
        | Error::NotHermitian { .. } => EXIT_INPUT,
        Error::Singular(_)
        | Error::SpectralOverlap { .. }
        | Error::PoleProximity { .. }
        | Error::SingularDenominator { .. }
        | Error::Contour(_)
        | Error::Winding(_)
        | Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

/// Finite numbers as JSON numbers, anything else as `null`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| input_failure(format!("cannot read {}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_slice(&read(path)?)
        .map_err(|e| input_failure(format!("{}: invalid JSON: {e}", path.display())))
}

fn load(path: &Path) -> Result<Dataset, Failure> {
    Ok(datasets::parse_dataset(&read(path)?)?)
}

/// Load a data file and insist that it is admissible.
fn load_admissible(path: &Path) -> Result<BtoaData, Failure> {
    let d = load(path)?.to_btoa()?;
    let report = datasets::validate_admissible_default(&d)?;
    if !report.verdict {
        return Err(input_failure(format!(
            "data are not admissible (spectra_ok {}, controllable {}, observable {}, sylvester residual {:e})",
            report.spectra_ok, report.controllable, report.observable, report.sylvester_residual
        )));
    }
    Ok(d)
}

fn free_parameter(g: &GArgs, seed: u64, d: &BtoaData) -> Result<FreeParameter, Failure> {
    if let Some(path) = &g.g_file {
        return Ok(FreeParameter::from_value(&read_json(path)?, d.p, d.m)?);
    }
    if g.g_random {
        let mut rng = fixtures::seeded_rng(seed);
        return Ok(FreeParameter::constant(fixtures::random_contraction(&mut rng, d.p, d.m))?);
    }
    Ok(FreeParameter::zero(d.p, d.m))
}

fn inertia_value(i: &Inertia) -> Value {
    json!({"n_plus": i.n_plus, "n_zero": i.n_zero, "n_minus": i.n_minus, "tolerance": num(i.tolerance)})
}

fn pick_verdict(r: &PickReport) -> &'static str {
    if r.inertia.n_minus > 0 {
        "indefinite"
    } else if r.degenerate {
        "degenerate"
    } else {
        "solvable"
    }
}

fn pick_value(r: &PickReport) -> Value {
    json!({
        "gamma_l": matrix_to_value(&r.gamma_l),
        "gamma_r": matrix_to_value(&r.gamma_r),
        "gamma_d": matrix_to_value(&r.gamma_d),
        "inertia": inertia_value(&r.inertia),
        "solvable_schur": r.solvable_schur,
        "degenerate": r.degenerate,
        "kappa": r.kappa,
        "verdict": pick_verdict(r),
    })
}

fn residual_value(r: &ResidualReport) -> Value {
    json!({
        "r_left": num(r.r_left),
        "r_right": num(r.r_right),
        "r_bi": num(r.r_bi),
        "contractivity_max": num(r.contractivity_max),
        "contractivity_interior": num(r.contractivity_interior),
        "samples_used": r.samples_used,
    })
}

fn certificate_value(k: &KappaCertificate) -> Value {
    json!({
        "kappa_pick": k.kappa_pick,
        "wno_theta22": k.wno_theta22,
        "wno_psi": k.wno_psi,
        "wno_psi_inv": k.wno_psi_inv,
        "wno_identity_ok": k.wno_identity_ok,
        "pole_count_s": k.pole_count_s,
        "side_condition_ok": k.side_condition_ok,
        "certified": k.certified,
    })
}

fn interpolant_value(s: &Interpolant) -> Value {
    let sc = &s.side_condition;
    json!({
        "kappa": s.kappa_expected,
        "g": s.g.to_value(),
        "theta": {
            "realization": s.theta.base.to_value(),
            "J": matrix_to_value(&s.theta.j),
            "gamma_d": matrix_to_value(&s.theta.gamma_d),
            "lyapunov_residual": num(s.theta.lyapunov_residual),
        },
        "psi": {
            "realization": s.psi.base.to_value(),
            "inverse": s.psi.inverse.to_value(),
            "P": matrix_to_value(&s.psi.p),
        },
        "side_condition": {
            "nodes": sc.nodes.iter().map(|&z| complex_to_value(z)).collect::<Vec<_>>(),
            "values": sc.values.iter().map(|&z| complex_to_value(z)).collect::<Vec<_>>(),
            "min_abs": num(sc.min_abs),
            "ok": sc.ok,
        },
    })
}

pub fn run(cli: &Cli) -> Outcome {
    let name = match &cli.command {
        Command::Validate { .. } => "validate",
        Command::Pick { .. } => "pick",
        Command::Solve { .. } => "solve",
        Command::Verify { .. } => "verify",
        Command::Kappa { .. } => "kappa",
        Command::Demo => "demo",
    };
    let result = match &cli.command {
        Command::Validate { path } => cmd_validate(path, cli.tol),
        Command::Pick { path } => cmd_pick(path, cli.tol),
        Command::Solve { path, g, eval } => cmd_solve(path, g, eval, cli),
        Command::Verify {
            path,
            s_file,
            s_from_solve: _,
            g,
            nodes,
            kappa,
        } => cmd_verify(path, s_file.as_deref(), g, *nodes, *kappa, cli),
        Command::Kappa { path, g } => cmd_kappa(path, g, cli),
        Command::Demo => cmd_demo(cli.seed),
    };
    result.unwrap_or_else(|f| Outcome::failure(name, f.code, f.message))
}

fn cmd_validate(path: &Path, tol: Option<f64>) -> Result<Outcome, Failure> {
    let ds = load(path)?;
    let d = ds.to_btoa()?;
    let r = match tol {
        Some(t) => datasets::validate_admissible(&d, t)?,
        None => datasets::validate_admissible_default(&d)?,
    };
    let kind = match ds {
        Dataset::Simple(_) => "simple",
        Dataset::Btoa(_) => "btoa",
    };
    let report = json!({
        "command": "validate",
        "kind": kind,
        "dimensions": {"n_z": d.n_z(), "n_w": d.n_w(), "p": d.p, "m": d.m},
        "spectra_ok": r.spectra_ok,
        "controllable": r.controllable,
        "observable": r.observable,
        "sylvester_residual": num(r.sylvester_residual),
        "compatible": r.compatible,
        "verdict": r.verdict,
    });
    let summary = format!(
        "validate: {} (spectra_ok {}, controllable {}, observable {}, sylvester residual {:.3e})",
        if r.verdict { "admissible" } else { "NOT admissible" },
        r.spectra_ok,
        r.controllable,
        r.observable,
        r.sylvester_residual
    );
    Ok(Outcome::new(if r.verdict { EXIT_OK } else { EXIT_NEGATIVE }, report, summary))
}

fn cmd_pick(path: &Path, tol: Option<f64>) -> Result<Outcome, Failure> {
    let d = load_admissible(path)?;
    let r = pick_matrix(&d, tol)?;
    let mut report = pick_value(&r);
    report["command"] = json!("pick");
    let i = &r.inertia;
    let summary = format!(
        "pick: {} (inertia +{} 0:{} -{}){}",
        pick_verdict(&r),
        i.n_plus,
        i.n_zero,
        i.n_minus,
        r.kappa.map(|k| format!(", kappa = {k}")).unwrap_or_default()
    );
    Ok(Outcome::new(if r.solvable_schur { EXIT_OK } else { EXIT_NEGATIVE }, report, summary))
}

fn build(path: &Path, g: &GArgs, cli: &Cli) -> Result<(BtoaData, Interpolant), Failure> {
    let d = load_admissible(path)?;
    let g = free_parameter(g, cli.seed, &d)?;
    let s = make_interpolant(&d, g)?;
    Ok((d, s))
}

fn cmd_solve(path: &Path, g: &GArgs, eval: &[Complex64], cli: &Cli) -> Result<Outcome, Failure> {
    let (_, s) = build(path, g, cli)?;
    let mut evaluations = Vec::new();
    let mut summary = format!(
        "solve: kappa = {}, side condition {}",
        s.kappa_expected,
        if s.side_condition_ok() { "ok" } else { "VIOLATED" }
    );
    for &lambda in eval {
        let value = s.eval(lambda)?;
        if value.len() == 1 {
            let v = value[(0, 0)];
            let _ = write!(summary, "\n  S({lambda}) = {v}");
        }
        evaluations.push(json!({"lambda": complex_to_value(lambda), "value": matrix_to_value(&value)}));
    }
    let mut report = interpolant_value(&s);
    report["command"] = json!("solve");
    report["evaluations"] = Value::Array(evaluations);
    let code = if s.side_condition_ok() { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Outcome::new(code, report, summary))
}

/// A candidate S read from a file: a constant or a realization.
fn load_candidate(path: &Path) -> Result<Realization, Failure> {
    let v = read_json(path)?;
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or("realization");
    match kind {
        "constant" => {
            let value = v.get("value").ok_or_else(|| input_failure("S file: missing \"value\"".into()))?;
            let m = npick::json::matrix_from_value(value, "value")?
                .ok_or_else(|| input_failure("S file: constant value must be nonempty".into()))?;
            Ok(Realization::constant(m))
        }
        "realization" => Ok(Realization::from_value(&v, "")?),
        other => Err(input_failure(format!("S file: unknown kind {other:?}"))),
    }
}

fn cmd_verify(
    path: &Path,
    s_file: Option<&Path>,
    g: &GArgs,
    nodes: usize,
    kappa: usize,
    cli: &Cli,
) -> Result<Outcome, Failure> {
    if nodes < 8 {
        return Err(input_failure(format!("--nodes must be at least 8, got {nodes}")));
    }
    let cfg = ContourConfig::with_nodes(nodes);
    let generalized = kappa > 0;
    let (residuals, poles, source) = match s_file {
        Some(file) => {
            let d = load_admissible(path)?;
            let s = load_candidate(file)?;
            if s.shape() != (d.p, d.m) {
                return Err(input_failure(format!(
                    "S is {}x{} but the data need {}x{}",
                    s.shape().0,
                    s.shape().1,
                    d.p,
                    d.m
                )));
            }
            let r = check_interpolation(&s, &d, &cfg)?;
            let poles = s.poles().iter().filter(|p| p.re > 0.0).count();
            (r, poles, "file")
        }
        None => {
            let (d, s) = build(path, g, cli)?;
            let r = check_interpolation(&s, &d, &cfg)?;
            let poles = if generalized { pole_count(&s, &WindingConfig::default())? } else { 0 };
            (r, poles, "solve")
        }
    };
    let residual = residuals.r_left.max(residuals.r_right).max(residuals.r_bi);
    let mut pass = residual <= VERIFY_TOL;
    let norm = residuals.contractivity_max.max(residuals.contractivity_interior);
    if generalized {
        // Poles of a realization may be uncontrollable, so only an excess
        // is decisive there.
        pass &= if source == "solve" { poles == kappa } else { poles >= kappa };
    } else {
        pass &= norm <= 1.0 + VERIFY_TOL;
    }
    let report = json!({
        "command": "verify",
        "mode": if generalized { "generalized" } else { "schur" },
        "kappa": kappa,
        "source": source,
        "nodes_per_circle": nodes,
        "tolerance": VERIFY_TOL,
        "residuals": residual_value(&residuals),
        "poles_in_right_half_plane": if generalized { json!(poles) } else { Value::Null },
        "pass": pass,
    });
    let summary = format!(
        "verify ({} mode): {} (max residual {:.3e}, sampled norm {})",
        if generalized { "generalized" } else { "Schur" },
        if pass { "PASS" } else { "FAIL" },
        residual,
        if norm.is_finite() { format!("{norm:.6}") } else { "unbounded".into() }
    );
    Ok(Outcome::new(if pass { EXIT_OK } else { EXIT_NEGATIVE }, report, summary))
}

fn cmd_kappa(path: &Path, g: &GArgs, cli: &Cli) -> Result<Outcome, Failure> {
    let (_, s) = build(path, g, cli)?;
    let k = certify(&s, &WindingConfig::default())?;
    let mut report = certificate_value(&k);
    report["command"] = json!("kappa");
    let summary = format!(
        "kappa: {} (kappa {}, wno det Theta22 {}, wno det psi {}, poles of S {}, side condition {})",
        if k.certified { "certified" } else { "NOT certified" },
        k.kappa_pick,
        k.wno_theta22,
        k.wno_psi,
        k.pole_count_s,
        if k.side_condition_ok { "ok" } else { "violated" }
    );
    Ok(Outcome::new(if k.certified { EXIT_OK } else { EXIT_NEGATIVE }, report, summary))
}

fn demo_case(name: &str, d: &BtoaData, g: FreeParameter) -> Result<(Value, bool, String), Failure> {
    let pick = pick_matrix(d, None)?;
    let s = make_interpolant(d, g)?;
    let r = check_interpolation(&s, d, &ContourConfig::default())?;
    let k = certify(&s, &WindingConfig::default())?;
    let residual = r.r_left.max(r.r_right).max(r.r_bi);
    let mut ok = residual <= VERIFY_TOL && k.certified;
    if pick.solvable_schur {
        ok &= r.contractivity_max.max(r.contractivity_interior) <= 1.0 + VERIFY_TOL;
    }
    let value = json!({
        "name": name,
        "pick": {"verdict": pick_verdict(&pick), "kappa": pick.kappa, "inertia": inertia_value(&pick.inertia)},
        "g": s.g.to_value(),
        "residuals": residual_value(&r),
        "certificate": certificate_value(&k),
        "ok": ok,
    });
    let line = format!(
        "  {name}: {} kappa = {}, max residual {residual:.2e}, {}",
        pick_verdict(&pick),
        k.kappa_pick,
        if ok { "ok" } else { "FAILED" }
    );
    Ok((value, ok, line))
}

fn cmd_demo(seed: u64) -> Result<Outcome, Failure> {
    let half = FreeParameter::constant(CMatrix::from_element(1, 1, re(0.5)))?;
    let mut cases = vec![
        ("D1", fixtures::d1(), FreeParameter::zero(1, 1)),
        ("D2", fixtures::d2(), half),
        ("D3", fixtures::d3(), FreeParameter::zero(1, 1)),
        ("D4", fixtures::d4(re(0.1)), FreeParameter::zero(1, 1)),
    ];
    let mut rng = fixtures::seeded_rng(seed);
    for kappa in [0, 1] {
        let d = fixtures::random_with_kappa(&mut rng, kappa, kappa == 0).to_btoa()?;
        let g = FreeParameter::constant(fixtures::random_contraction(&mut rng, d.p, d.m))?;
        cases.push((if kappa == 0 { "random definite" } else { "random indefinite" }, d, g));
    }
    let mut reports = Vec::new();
    let mut all_ok = true;
    let mut summary = format!("demo (seed {seed}):");
    for (name, d, g) in cases {
        let (value, ok, line) = demo_case(name, &d, g)?;
        all_ok &= ok;
        reports.push(value);
        summary.push('\n');
        summary.push_str(&line);
    }
    let report = json!({"command": "demo", "seed": seed, "cases": reports, "ok": all_ok});
    Ok(Outcome::new(if all_ok { EXIT_OK } else { EXIT_NEGATIVE }, report, summary))
}

/// Print the report and summary, writing `--out` if requested. Returns the
/// final exit code.
pub fn emit(cli: &Cli, outcome: &Outcome) -> u8 {
    let text = npick::json::to_string(&outcome.report);
    println!("{text}");
    if !cli.json {
        eprintln!("{}", outcome.summary);
    }
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    outcome.code
}
