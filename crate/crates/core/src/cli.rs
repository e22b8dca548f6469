//! Command-line front end. Every command writes its artifacts into the
//! output directory, prints a JSON report on stdout and maps failures to
//! exit status 2 (invalid input) or 3 (numerical failure), with a JSON
//! error report on stderr and in `error.json`.
//!
//! Options may also come from a TOML file of flat `key = value` lines
//! (`--config`); keys are the long flag names with `_` for `-`, and flags
//! given on the command line win.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::circlefn::{CircleFunction, LineFunction};
use crate::doi::{
    divided_difference_on_spectra, doi_compute, line_divided_difference_on_spectra, trace_norm,
};
use crate::error::{Error, Result};
use crate::flowderiv::fd_probe;
use crate::io::{self, Cell, Format, Table, SCHEMA_VERSION};
use crate::multiplier::{divided_difference_kernel, half_step_grid, multiplier_bounds, schur_norm_with, SchurNormOptions};
use crate::spectra::{
    decompose_hermitian, decompose_unitary, path_point, random_instance, trace, HermitianMatrix, UnitaryMatrix,
    DEFAULT_GAP_TOL,
};
use crate::ssf::{
    build_ssf, ssf_for_pair, track_eigenphases, twist_scan, twist_scan_rotated, verify_trace_formula, TrackingPolicy,
    SIGN_CONVENTION,
};
use crate::suite::{run_suite, CheckOutcome, SuiteConfig};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Random instance U, A and V = e^{iA}U
    Gen,
    /// Double operator integral of a divided difference against T
    Doi,
    /// Derivative operator along the path and its finite-difference check
    Deriv,
    /// Spectral shift function of (U, e^{iA}U)
    Ssf,
    /// Both sides of the trace formula
    Verify,
    /// Multiplier-norm bounds of divided differences on grids
    Schurnorm,
    /// trace(f(zU) - f(zV)) around the circle
    Twist,
    /// The acceptance battery
    Suite,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Doi => "doi",
            Command::Deriv => "deriv",
            Command::Ssf => "ssf",
            Command::Verify => "verify",
            Command::Schurnorm => "schurnorm",
            Command::Twist => "twist",
            Command::Suite => "suite",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Eigenvalues of U and V
    Direct,
    /// Rotated functions against the spectral shift function
    Ssf,
}

#[derive(Debug, Parser)]
#[command(name = "krein", version, about = "Trace formulas, double operator integrals and Schur multipliers for unitary matrices")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML file of `key = value` defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Function: z^n, abs-theta, cos, sawtooth[:m], or a TrigPoly JSON file
    #[arg(long = "fn")]
    pub function: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated grid sizes
    #[arg(long, value_delimiter = ',')]
    pub grids: Option<Vec<usize>>,
    /// Comma-separated finite-difference steps, decreasing
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Unitary matrix U (JSON)
    #[arg(long)]
    pub u: Option<PathBuf>,
    /// Hermitian generator A (JSON)
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Second unitary matrix V (JSON)
    #[arg(long)]
    pub v: Option<PathBuf>,
    /// Matrix T the double operator integral acts on (JSON)
    #[arg(long)]
    pub t: Option<PathBuf>,
    /// Hermitian D for the real-line double operator integral (JSON)
    #[arg(long)]
    pub hermitian: Option<PathBuf>,
    /// Path parameter
    #[arg(long)]
    pub s: Option<f64>,
    /// Random instance `n rank seed` instead of --u/--a
    #[arg(long, num_args = 3, value_names = ["N", "RANK", "SEED"])]
    pub random: Option<Vec<u64>>,
    /// Twist-scan grid size
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum)]
    pub route: Option<Route>,
    /// Bound on generator eigenvalues for `gen`
    #[arg(long)]
    pub norm_bound: Option<f64>,
    /// Largest grid solved by bisection in `schurnorm`
    #[arg(long)]
    pub bisect_max: Option<usize>,
    /// Comma-separated check ids for `suite`
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(rename = "fn")]
    function: Option<String>,
    n: Option<usize>,
    rank: Option<usize>,
    seed: Option<u64>,
    grids: Option<Vec<usize>>,
    steps: Option<Vec<f64>>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<FormatArg>,
    u: Option<PathBuf>,
    a: Option<PathBuf>,
    v: Option<PathBuf>,
    t: Option<PathBuf>,
    hermitian: Option<PathBuf>,
    s: Option<f64>,
    grid: Option<usize>,
    route: Option<Route>,
    norm_bound: Option<f64>,
    bisect_max: Option<usize>,
    only: Option<Vec<String>>,
}

/// Fully resolved options for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub function: Option<String>,
    pub n: Option<usize>,
    pub rank: Option<usize>,
    pub seed: u64,
    pub grids: Vec<usize>,
    pub steps: Vec<f64>,
    pub tol: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
    pub u: Option<PathBuf>,
    pub a: Option<PathBuf>,
    pub v: Option<PathBuf>,
    pub t: Option<PathBuf>,
    pub hermitian: Option<PathBuf>,
    pub s: f64,
    pub random: Option<(usize, usize, u64)>,
    pub grid: usize,
    pub route: Route,
    pub norm_bound: f64,
    pub bisect_max: usize,
    pub only: Option<Vec<String>>,
}

impl RunConfig {
    /// Merges flags over the optional config file and checks that every
    /// input path exists.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str::<ConfigFile>(&text).map_err(|e| Error::Parse(format!("config {}: {e}", p.display())))?
            }
            None => ConfigFile::default(),
        };
        let random = match cli.random {
            Some(v) => Some((v[0] as usize, v[1] as usize, v[2])),
            None => None,
        };
        let cfg = Self {
            command: cli.command,
            function: cli.function.or(file.function),
            n: cli.n.or(file.n),
            rank: cli.rank.or(file.rank),
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            grids: cli.grids.or(file.grids).unwrap_or_else(|| vec![16, 64, 256]),
            steps: cli.steps.or(file.steps).unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]),
            tol: cli.tol.or(file.tol),
            out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            format: match cli.format.or(file.format).unwrap_or(FormatArg::Csv) {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            },
            u: cli.u.or(file.u),
            a: cli.a.or(file.a),
            v: cli.v.or(file.v),
            t: cli.t.or(file.t),
            hermitian: cli.hermitian.or(file.hermitian),
            s: cli.s.or(file.s).unwrap_or(0.0),
            random,
            grid: cli.grid.or(file.grid).unwrap_or(256),
            route: cli.route.or(file.route).unwrap_or(Route::Direct),
            norm_bound: cli.norm_bound.or(file.norm_bound).unwrap_or(1.0),
            bisect_max: cli.bisect_max.or(file.bisect_max).unwrap_or(16),
            only: cli.only.or(file.only),
        };
        for p in [&cfg.u, &cfg.a, &cfg.v, &cfg.t, &cfg.hermitian].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::InvalidArgument(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }

    fn function(&self) -> Result<CircleFunction> {
        let spec = self
            .function
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("{} needs --fn", self.command.name())))?;
        io::read_function(spec)
    }

    fn required<'a>(&self, p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        p.as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("{} needs --{flag}", self.command.name())))
    }

    fn unitary(&self, p: &Option<PathBuf>, flag: &str) -> Result<UnitaryMatrix> {
        io::read_unitary(self.required(p, flag)?)
    }

    fn hermitian_input(&self, p: &Option<PathBuf>, flag: &str) -> Result<HermitianMatrix> {
        io::read_hermitian(self.required(p, flag)?)
    }

    /// `(U, A)` from files or from `--random`.
    fn instance(&self) -> Result<(UnitaryMatrix, HermitianMatrix)> {
        match self.random {
            Some((n, rank, seed)) => random_instance(n, rank, self.norm_bound, seed),
            None => Ok((self.unitary(&self.u, "u")?, self.hermitian_input(&self.a, "a")?)),
        }
    }

    /// `V` from `--v`, else `e^{iA}U`.
    fn second_unitary(&self, u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        match (&self.v, &self.a) {
            (Some(_), _) => self.unitary(&self.v, "v"),
            (None, Some(_)) => path_point(u, &self.hermitian_input(&self.a, "a")?, 1.0),
            (None, None) => Err(Error::InvalidArgument(format!("{} needs --v or --a", self.command.name()))),
        }
    }
}

struct Outcome {
    report: Value,
    status: i32,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self { report, status: 0 }
    }
}

fn header(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(cfg.command.name()));
    m
}

fn with_header(cfg: &RunConfig, body: Value) -> Value {
    let mut m = header(cfg);
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_gen(cfg: &RunConfig) -> Result<Outcome> {
    let n = cfg.n.ok_or_else(|| Error::InvalidArgument("gen needs --n".into()))?;
    let rank = cfg.rank.unwrap_or(1);
    let (u, a) = random_instance(n, rank, cfg.norm_bound, cfg.seed)?;
    let v = path_point(&u, &a, 1.0)?;
    let mut files = Vec::new();
    for (name, m) in [("U.json", u.matrix()), ("A.json", a.matrix()), ("V.json", v.matrix())] {
        let p = cfg.out.join(name);
        io::write_matrix(&p, m)?;
        files.push(name);
    }
    Ok(Outcome::ok(with_header(
        cfg,
        json!({"n": n, "rank": rank, "seed": cfg.seed, "norm_bound": cfg.norm_bound, "files": files}),
    )))
}

fn parse_line_function(spec: &str) -> Result<LineFunction> {
    match spec.strip_prefix("x^").map(str::parse::<usize>) {
        Some(Ok(k)) => Ok(LineFunction::power(k)),
        _ => Err(Error::InvalidArgument(format!(
            "with --hermitian the function must be x^k, got {spec}"
        ))),
    }
}

fn cmd_doi(cfg: &RunConfig) -> Result<Outcome> {
    let t = io::read_matrix(cfg.required(&cfg.t, "t")?)?;
    let result = if cfg.hermitian.is_some() {
        let f = parse_line_function(cfg.function.as_deref().unwrap_or_default())?;
        let d = decompose_hermitian(&cfg.hermitian_input(&cfg.hermitian, "hermitian")?, DEFAULT_GAP_TOL)?;
        let phi = line_divided_difference_on_spectra(&f, &d, &d)?;
        doi_compute(&phi, &d, &t, &d)?
    } else {
        let f = cfg.function()?;
        let u = cfg.unitary(&cfg.u, "u")?;
        let v = if cfg.v.is_some() { cfg.unitary(&cfg.v, "v")? } else { u.clone() };
        let du = decompose_unitary(&u, DEFAULT_GAP_TOL)?;
        let dv = decompose_unitary(&v, DEFAULT_GAP_TOL)?;
        let phi = divided_difference_on_spectra(&f, &du, &dv)?;
        doi_compute(&phi, &du, &t, &dv)?
    };
    let path = cfg.out.join("doi.json");
    io::write_matrix(&path, &result)?;
    let tr = trace(&result);
    Ok(Outcome::ok(with_header(
        cfg,
        json!({"trace_re": tr.re, "trace_im": tr.im, "trace_norm": trace_norm(&result)?, "output": file_name(&path)}),
    )))
}

fn cmd_deriv(cfg: &RunConfig) -> Result<Outcome> {
    let f = cfg.function()?;
    let (u, a) = cfg.instance()?;
    let r = fd_probe(&f, &u, &a, cfg.s, &cfg.steps)?;
    let mut table = Table::new("deriv", &["step", "error"]);
    for &(t, e) in &r.fd_errors {
        table.push(vec![Cell::from(t), Cell::from(e)]);
    }
    let path = table.write(&cfg.out, "deriv", cfg.format)?;
    Ok(Outcome::ok(with_header(
        cfg,
        json!({
            "s": r.s,
            "qs_norm": r.qs.norm(),
            "fitted_order": r.fitted_order,
            "fit_residual": r.fit_residual,
            "flagged_steps": r.flagged_steps,
            "output": file_name(&path),
        }),
    )))
}

fn cmd_ssf(cfg: &RunConfig) -> Result<Outcome> {
    let (u, a) = cfg.instance()?;
    let xi = build_ssf(&track_eigenphases(&u, &a, &TrackingPolicy::default())?)?;
    let merged = xi.merged();
    let mut table = Table::new("ssf", &["theta_start", "theta_end", "xi_value"]);
    for (s, e, v) in merged.arcs() {
        table.push(vec![Cell::from(s), Cell::from(e), Cell::from(v)]);
    }
    let path = table.write(&cfg.out, "ssf", cfg.format)?;
    Ok(Outcome::ok(with_header(
        cfg,
        json!({
            "mean_check": xi.mean(),
            "breakpoint_count": xi.breakpoints.len(),
            "arc_count": merged.breakpoints.len(),
            "normalization_shift": xi.normalization_shift,
            "convention": SIGN_CONVENTION,
            "output": file_name(&path),
        }),
    )))
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let f = cfg.function()?;
    let (u, a) = cfg.instance()?;
    let r = verify_trace_formula(&f, &u, &a)?;
    let tol = cfg.tol.unwrap_or(1e-7);
    let passed = r.rel_error <= tol;
    let report = with_header(
        cfg,
        json!({
            "lhs_re": r.lhs.re,
            "lhs_im": r.lhs.im,
            "rhs_re": r.rhs.re,
            "rhs_im": r.rhs.im,
            "abs_error": r.abs_error,
            "rel_error": r.rel_error,
            "tol": tol,
            "passed": passed,
            "convention": r.convention,
        }),
    );
    Ok(Outcome {
        report,
        status: if passed { 0 } else { 3 },
    })
}

fn cmd_schurnorm(cfg: &RunConfig) -> Result<Outcome> {
    let f = cfg.function()?;
    let opts = SchurNormOptions {
        tol: cfg.tol.unwrap_or(1e-3),
        seed: cfg.seed,
        ..Default::default()
    };
    let mut table = Table::new("schurnorm", &["n", "lower_bound", "upper_bound", "iterations", "residual"]);
    let mut running: f64 = 0.0;
    let mut rows = Vec::new();
    for &n in &cfg.grids {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("grid size must be at least 2, got {n}")));
        }
        let k = divided_difference_kernel(&f, &half_step_grid(n))?;
        let r = if n <= cfg.bisect_max { schur_norm_with(&k, &opts)? } else { multiplier_bounds(&k, &opts)? };
        running = running.max(r.lower);
        let residual = (-r.certificate.min_eigenvalue).max(0.0);
        table.push(vec![
            Cell::from(n),
            Cell::from(running),
            Cell::from(r.upper),
            Cell::from(r.certificate.iterations),
            Cell::from(residual),
        ]);
        rows.push(json!({"n": n, "grid_lower": r.lower, "bounds_only": r.bounds_only}));
    }
    let path = table.write(&cfg.out, "schurnorm", cfg.format)?;
    Ok(Outcome::ok(with_header(cfg, json!({"function": f.name(), "grids": rows, "output": file_name(&path)}))))
}

fn cmd_twist(cfg: &RunConfig) -> Result<Outcome> {
    let f = cfg.function()?;
    let u = match cfg.random {
        Some(_) => cfg.instance()?.0,
        None => cfg.unitary(&cfg.u, "u")?,
    };
    let v = match cfg.random {
        Some(_) => {
            let (u, a) = cfg.instance()?;
            path_point(&u, &a, 1.0)?
        }
        None => cfg.second_unitary(&u)?,
    };
    let scan = match cfg.route {
        Route::Direct => twist_scan(&f, &u, &v, cfg.grid)?,
        Route::Ssf => twist_scan_rotated(&f, &ssf_for_pair(&u, &v, &TrackingPolicy::default())?, cfg.grid)?,
    };
    let mut table = Table::new("twist", &["theta_k", "re", "im"]);
    for &(t, z) in &scan.samples {
        table.push(vec![Cell::from(t), Cell::from(z.re), Cell::from(z.im)]);
    }
    let path = table.write(&cfg.out, "twist", cfg.format)?;
    let route = match cfg.route {
        Route::Direct => "direct",
        Route::Ssf => "ssf",
    };
    Ok(Outcome::ok(with_header(
        cfg,
        json!({"grid": cfg.grid, "route": route, "max_jump": scan.max_jump, "output": file_name(&path)}),
    )))
}

fn cmd_suite(cfg: &RunConfig) -> Result<Outcome> {
    let config = SuiteConfig {
        dkbs_tol: cfg.tol.unwrap_or(SuiteConfig::default().dkbs_tol),
        only: cfg.only.clone(),
    };
    // An explicit instance is validated before any work starts.
    let extra = match (&cfg.u, &cfg.a) {
        (None, None) => None,
        _ => Some(cfg.instance()?),
    };
    let mut outcomes: Vec<CheckOutcome> = run_suite(&config, |o| eprintln!("{}", o.line()))?;
    if let Some((u, a)) = extra {
        let f = match &cfg.function {
            Some(_) => cfg.function()?,
            None => CircleFunction::monomial(2),
        };
        let r = verify_trace_formula(&f, &u, &a)?;
        outcomes.push(CheckOutcome {
            id: "input-instance",
            description: "trace formula on the supplied instance",
            passed: r.rel_error <= 1e-7,
            measured: r.rel_error,
            threshold: 1e-7,
            instances: 1,
            seconds: 0.0,
            runtime_limit: None,
            detail: format!("f = {}", f.name()),
        });
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let report = with_header(
        cfg,
        json!({
            "passed": passed,
            "dkbs_tol": config.dkbs_tol,
            "checks": serde_json::to_value(&outcomes)?,
        }),
    );
    Ok(Outcome {
        report,
        status: if passed { 0 } else { 3 },
    })
}

/// Executes one resolved command and returns its exit status.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    fs::create_dir_all(&cfg.out)?;
    let outcome = match cfg.command {
        Command::Gen => cmd_gen(cfg),
        Command::Doi => cmd_doi(cfg),
        Command::Deriv => cmd_deriv(cfg),
        Command::Ssf => cmd_ssf(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Schurnorm => cmd_schurnorm(cfg),
        Command::Twist => cmd_twist(cfg),
        Command::Suite => cmd_suite(cfg),
    }?;
    let text = io::to_json_string(&outcome.report)?;
    fs::write(cfg.out.join(format!("{}_report.json", cfg.command.name())), &text)?;
    print!("{text}");
    Ok(outcome.status)
}

fn error_report(command: Option<Command>, e: &Error) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "command": command.map(Command::name),
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    })
}

/// Parses `args` (including the program name), runs, and returns the exit
/// status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let command = cli.command;
    let out = cli.out.clone();
    let result = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(status) => status,
        Err(e) => {
            let report = error_report(Some(command), &e);
            let text = io::to_json_string(&report).unwrap_or_else(|_| format!("{report}\n"));
            eprint!("{text}");
            if let Some(dir) = out.filter(|d| d.is_dir()) {
                let _ = fs::write(dir.join("error.json"), &text);
            }
            e.exit_code()
        }
    }
}
