//! Command-line front end. `run` parses arguments, merges an optional TOML
//! config underneath the flags, executes one command and renders a report
//! `{command, params, results, verdict, timestamp}`.
//!
//! Exit codes: 0 pass, 1 mathematical failure, 2 usage or configuration error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fedosov::{ricci, ChartModel};
use crate::fock::{EffectiveSubspace, FockModel, C64, I};
use crate::forms::{FormAlgebra, SpinorForm};
use crate::killing::{
    candidate_spectrum, flat_rigidity, isotropic_sigma, sphere_nonexistence, Certificate, CertificateKind,
    FlatRigidityOptions, SigmaScaling, SphereOptions,
};

/// Environment variable selecting the tolerance profile.
pub const PROFILE_ENV: &str = "SYMSPIN_TOLERANCE_PROFILE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Sphere,
    Flat,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Default,
    Strict,
}

impl Profile {
    fn parse(raw: Option<&str>) -> Result<Self> {
        match raw.map(str::trim) {
            None | Some("") | Some("default") => Ok(Profile::Default),
            Some("strict") => Ok(Profile::Strict),
            Some(other) => Err(Error::Config(format!(
                "{PROFILE_ENV}={other}: expected strict or default"
            ))),
        }
    }

    fn factor(self) -> f64 {
        match self {
            Profile::Default => 1.0,
            Profile::Strict => 0.1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "symspin",
    version,
    about = "Symplectic spinor operator calculus and Killing spinor certificates"
)]
pub struct Cli {
    /// TOML file with default parameters; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the rendered report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Clifford, H, F+/F- and projection identities.
    Verify(VerifyArgs),
    /// Killing numbers allowed by the prolongation.
    Spectrum(SpectrumArgs),
    /// Rigidity certificate on flat space.
    KillingFlat(FlatArgs),
    /// Nonexistence certificate on the round sphere.
    KillingSphere(SphereArgs),
    /// Summarize a saved report or certificate.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub margin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, value_enum)]
    pub case: Option<Case>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, value_enum)]
    pub sigma: Option<SigmaArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaArg {
    Radius,
    Curvature,
}

impl From<SigmaArg> for SigmaScaling {
    fn from(s: SigmaArg) -> Self {
        match s {
            SigmaArg::Radius => SigmaScaling::Radius,
            SigmaArg::Curvature => SigmaScaling::Curvature,
        }
    }
}

#[derive(Debug, Args)]
pub struct FlatArgs {
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Nodes per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Nonzero Killing number used to confirm the kernel disappears.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Also write the certificate JSON here.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SphereArgs {
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub theta_nodes: Option<usize>,
    #[arg(long)]
    pub fourier_modes: Option<usize>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub pole_margin: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub sigma: Option<SigmaArg>,
    /// Plant a kernel vector; the verdict must flip.
    #[arg(long)]
    pub fabricate: bool,
    #[arg(long)]
    pub certificate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
}

/// Keys accepted in the TOML config; all optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub l: Option<usize>,
    pub cutoff: Option<usize>,
    pub margin: Option<usize>,
    pub seed: Option<u64>,
    pub case: Option<Case>,
    pub radius: Option<f64>,
    pub count: Option<usize>,
    pub sigma: Option<SigmaArg>,
    pub grid: Option<usize>,
    pub half_width: Option<f64>,
    pub lambda: Option<f64>,
    pub n_max: Option<usize>,
    pub theta_nodes: Option<usize>,
    pub fourier_modes: Option<usize>,
    pub pole_margin: Option<f64>,
    pub tolerance: Option<f64>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: String) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: msg,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub params: Value,
    pub results: Vec<Value>,
    pub verdict: bool,
    pub timestamp: u64,
    /// CSV header used when `results` is empty.
    #[serde(skip)]
    pub columns: Vec<String>,
}

impl Report {
    fn new(command: &str, params: impl Serialize, results: Vec<Value>, verdict: bool) -> Self {
        Report {
            command: command.into(),
            params: serde_json::to_value(params).expect("params serialize"),
            results,
            verdict,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            columns: Vec::new(),
        }
    }
}

/// One identity of the verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerances for the identity suite before profile scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteTolerances {
    pub commutator: f64,
    pub h_relation: f64,
    pub omega_square: f64,
    pub algebra: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        Self {
            commutator: 1e-12,
            h_relation: 1e-11,
            omega_square: 1e-12,
            algebra: 1e-10,
        }
    }
}

impl SuiteTolerances {
    fn scaled(self, f: f64) -> Self {
        Self {
            commutator: self.commutator * f,
            h_relation: self.h_relation * f,
            omega_square: self.omega_square * f,
            algebra: self.algebra * f,
        }
    }

    fn uniform(t: f64) -> Self {
        Self {
            commutator: t,
            h_relation: t,
            omega_square: t,
            algebra: t,
        }
    }
}

/// Runs the algebraic identity suite on random effective-subspace data.
pub fn identity_suite(model: FockModel, margin: usize, seed: u64, tol: SuiteTolerances) -> Result<Vec<IdentityCheck>> {
    if margin < 2 {
        return Err(Error::Config(format!("margin {margin}: the suite needs at least 2")));
    }
    let eff = EffectiveSubspace::new(model, margin);
    if eff.dim() == 0 {
        return Err(Error::Config(format!(
            "margin {margin} leaves no effective subspace at cutoff {}",
            model.cutoff()
        )));
    }
    let alg = FormAlgebra::standard(model)?;
    let space = alg.space().clone();
    let l = model.l();
    let n = 2 * l;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = 4;
    let mut out = Vec::new();
    let mut push = |name: &str, err: f64, t: f64| {
        out.push(IdentityCheck {
            identity: name.into(),
            max_error: err,
            tolerance: t,
            pass: err < t,
        })
    };

    let mut comm = 0.0f64;
    for b in eff.indices() {
        let mut v = nalgebra::DVector::zeros(model.dim());
        v[b] = C64::new(1.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let lhs = model.clifford_basis(i, &model.clifford_basis(j, &v))
                    - model.clifford_basis(j, &model.clifford_basis(i, &v))
                    + &v * (I * space.omega(i, j));
                comm = comm.max(lhs.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    push("clifford_commutator", comm, tol.commutator);

    let mut h_err = 0.0f64;
    for r in 0..=n {
        for _ in 0..trials {
            let f = SpinorForm::random(&eff, r, &mut rng)?;
            let d = alg.h_op(&f)?.axpy(-I * (r as f64 - l as f64), &f)?;
            h_err = h_err.max(d.max_abs_on(&eff));
        }
    }
    push("h_relation", h_err, tol.h_relation);

    let mut sq = 0.0f64;
    let mut dirac = 0.0f64;
    for _ in 0..trials {
        let s = eff.random(&mut rng);
        let s0 = SpinorForm::from_spinor(&s);
        let fp = alg.f_plus(&s0)?;
        let d = alg.f_plus(&fp)?.axpy(I * 0.5, &alg.omega_tensor(&s.coeffs)?)?;
        sq = sq.max(d.max_abs_on(&eff));
        let back = alg.f_plus(&alg.f_minus(&fp)?)?;
        let d = back.scale(C64::new(-1.0, 0.0)).axpy(-I * l as f64, &fp)?;
        dirac = dirac.max(d.max_abs_on(&eff));
    }
    push("f_plus_square", sq, tol.omega_square);

    let mut kern = 0.0f64;
    let mut p10 = 0.0f64;
    let mut p20 = 0.0f64;
    for _ in 0..trials {
        let psi = SpinorForm::random(&eff, 1, &mut rng)?;
        let p = alg.p10(&psi)?;
        kern = kern.max(alg.f_minus(&psi.sub(&p)?)?.max_abs_on(&eff));
        p10 = p10.max(alg.p10(&p)?.sub(&p)?.max_abs_on(&eff));
        if n >= 2 {
            let chi = SpinorForm::random(&eff, 2, &mut rng)?;
            let q = alg.p20(&chi)?;
            p20 = p20.max(alg.p20(&q)?.sub(&q)?.max_abs_on(&eff));
        }
    }
    push("f_minus_kills_complement", kern, tol.algebra);
    push("eq1_on_image", dirac, tol.algebra);
    push("p10_idempotent", p10, tol.algebra);
    push("p20_idempotent", p20, tol.algebra);

    let osc = model.oscillator(0)?;
    let eig = SymmetricEigen::new(osc).eigenvalues;
    let top = model.cutoff().saturating_sub(2);
    let spec = (0..top)
        .map(|k| {
            let want = -(2.0 * k as f64 + 1.0);
            eig.iter().map(|e| (e - want).abs()).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    push("oscillator_spectrum", spec, tol.algebra);
    Ok(out)
}

fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => 1,
        _ => 2,
    }
}

fn lambda_text(re: f64, im: f64) -> String {
    if re == 0.0 && im == 0.0 {
        "0".into()
    } else if re == 0.0 {
        format!("{im:+.6}i")
    } else {
        format!("{re:+.6}{im:+.6}i")
    }
}

fn flat_row(v: &Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m
            .iter()
            .filter(|(_, x)| !x.is_object() && !x.is_array())
            .map(|(k, x)| (k.clone(), x.clone()))
            .collect(),
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other.clone());
            m
        }
    }
}

fn render_csv(results: &[Value], columns: &[String]) -> Result<String> {
    let rows: Vec<Map<String, Value>> = results.iter().map(flat_row).collect();
    let mut header: Vec<String> = if rows.is_empty() { columns.to_vec() } else { Vec::new() };
    for r in &rows {
        for k in r.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for r in &rows {
        let rec: Vec<String> = header
            .iter()
            .map(|k| match r.get(k) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(x) => x.to_string(),
            })
            .collect();
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn render_text(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}: {}",
        report.command,
        if report.verdict { "PASS" } else { "FAIL" }
    );
    for r in &report.results {
        let m = flat_row(r);
        let line: Vec<String> = m
            .iter()
            .map(|(k, v)| match v {
                Value::String(x) => format!("{k}={x}"),
                x => format!("{k}={x}"),
            })
            .collect();
        let _ = writeln!(s, "  {}", line.join("  "));
    }
    s
}

/// Renders a report in the requested format.
pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report).expect("report serializes") + "\n"),
        Format::Csv => render_csv(&report.results, &report.columns),
        Format::Text => Ok(render_text(report)),
    }
}

fn certificate_row(c: &Certificate) -> Value {
    serde_json::to_value(c).expect("certificate serializes")
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli, file: &FileConfig, profile: Profile) -> Result<Report> {
    match &cli.command {
        Command::Verify(a) => {
            let l = pick(a.l, file.l, 1);
            let cutoff = pick(a.cutoff, file.cutoff, 16);
            let margin = pick(a.margin, file.margin, EffectiveSubspace::DEFAULT_MARGIN);
            let seed = pick(a.seed, file.seed, 1);
            let model = FockModel::new(l, cutoff)?;
            let tol = match a.tolerance.or(file.tolerance) {
                Some(t) if t > 0.0 => SuiteTolerances::uniform(t),
                Some(t) => return Err(Error::Config(format!("tolerance {t} must be positive"))),
                None => SuiteTolerances::default().scaled(profile.factor()),
            };
            let checks = identity_suite(model, margin, seed, tol)?;
            let verdict = checks.iter().all(|c| c.pass);
            let params = json!({"l": l, "cutoff": cutoff, "margin": margin, "seed": seed, "profile": profile, "tolerances": tol});
            let rows = checks.iter().map(|c| serde_json::to_value(c).expect("row")).collect();
            Ok(Report::new("verify", params, rows, verdict))
        }
        Command::Spectrum(a) => {
            let case = pick(a.case, file.case, Case::Sphere);
            let count = pick(a.count, file.count, 3);
            let radius = pick(a.radius, file.radius, 1.0);
            let sigma = pick(a.sigma, file.sigma, SigmaArg::Radius);
            let (l, sigma_data) = match case {
                Case::Sphere => {
                    if !(radius > 0.0 && radius.is_finite()) {
                        return Err(Error::Config(format!("radius {radius}")));
                    }
                    (1, isotropic_sigma(1, SigmaScaling::from(sigma).sigma(radius), 1)?)
                }
                Case::Flat => {
                    let l = pick(a.l, file.l, 1);
                    (l, ricci(&ChartModel::flat(l, 5, 1.0)?)?)
                }
                Case::Perturbed => {
                    let l = pick(a.l, file.l, 1);
                    (
                        l,
                        ricci(&ChartModel::perturbed_flat(l, 5, 1.0, 0.3, pick(None, file.seed, 1))?)?,
                    )
                }
            };
            let default_cutoff = crate::fock::max_cutoff(l).unwrap_or(8);
            let cutoff = pick(a.cutoff, file.cutoff, default_cutoff);
            let model = FockModel::new(l, cutoff)?;
            let cands = candidate_spectrum(&sigma_data, model, count)?;
            let rows: Vec<Value> = cands
                .iter()
                .map(|c| {
                    json!({
                        "n": c.hermite_level,
                        "eigenvalue": c.eigenvalue,
                        "lambda_re": c.lambda[0],
                        "lambda_im": c.lambda[1],
                        "lambda": lambda_text(c.lambda[0], c.lambda[1]),
                    })
                })
                .collect();
            let params =
                json!({"case": case, "radius": radius, "count": count, "l": l, "cutoff": cutoff, "sigma": sigma});
            let mut report = Report::new("spectrum", params, rows, true);
            report.columns = ["n", "eigenvalue", "lambda_re", "lambda_im", "lambda"]
                .map(String::from)
                .to_vec();
            Ok(report)
        }
        Command::KillingFlat(a) => {
            let d = FlatRigidityOptions::default();
            let opts = FlatRigidityOptions {
                l: pick(a.l, file.l, d.l),
                cutoff: pick(a.cutoff, file.cutoff, d.cutoff),
                nodes_per_axis: pick(a.grid, file.grid, d.nodes_per_axis),
                half_width: pick(a.half_width, file.half_width, d.half_width),
                injected_lambda: pick(a.lambda, file.lambda, d.injected_lambda),
                rank_tol: pick(a.tolerance, file.tolerance, d.rank_tol * profile.factor()),
            };
            if !(opts.half_width > 0.0 && opts.half_width.is_finite()) || !(opts.rank_tol > 0.0) {
                return Err(Error::Config("half-width and tolerance must be positive".into()));
            }
            let cert = flat_rigidity(&opts)?;
            if let Some(p) = &a.certificate {
                write_file(p, &cert.to_json())?;
            }
            let verdict = cert.kind == CertificateKind::Rigidity && cert.verdict;
            Ok(Report::new("killing-flat", opts, vec![certificate_row(&cert)], verdict))
        }
        Command::KillingSphere(a) => {
            let d = SphereOptions::default();
            let opts = SphereOptions {
                radius: pick(a.radius, file.radius, d.radius),
                n_max: pick(a.n_max, file.n_max, d.n_max),
                theta_nodes: pick(a.theta_nodes, file.theta_nodes, d.theta_nodes),
                fourier_modes: pick(a.fourier_modes, file.fourier_modes, d.fourier_modes),
                cutoff: pick(a.cutoff, file.cutoff, d.cutoff),
                pole_margin: pick(a.pole_margin, file.pole_margin, d.pole_margin),
                tolerance: pick(a.tolerance, file.tolerance, d.tolerance / profile.factor()),
                stability: d.stability,
                sigma: pick(a.sigma, file.sigma, SigmaArg::Radius).into(),
                fabricate_solution: a.fabricate,
            };
            let cert = sphere_nonexistence(&opts)?;
            if let Some(p) = &a.certificate {
                write_file(p, &cert.to_json())?;
            }
            let verdict = cert.kind == CertificateKind::Nonexistence && cert.verdict;
            Ok(Report::new(
                "killing-sphere",
                opts,
                vec![certificate_row(&cert)],
                verdict,
            ))
        }
        Command::Report(a) => {
            let text =
                std::fs::read_to_string(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            if value.get("kind").is_some() {
                let cert = Certificate::from_json(&text)?;
                let verdict = cert.verdict;
                let params = json!({"input": a.input.display().to_string()});
                return Ok(Report::new("report", params, vec![certificate_row(&cert)], verdict));
            }
            let results = value
                .get("results")
                .and_then(Value::as_array)
                .cloned()
                .ok_or_else(|| Error::Config("input is neither a certificate nor a report".into()))?;
            let verdict = value
                .get("verdict")
                .and_then(Value::as_bool)
                .ok_or_else(|| Error::Config("report has no verdict".into()))?;
            let params = json!({"input": a.input.display().to_string(), "source": value.get("command")});
            Ok(Report::new("report", params, results, verdict))
        }
    }
}

/// Runs the CLI with an explicit tolerance-profile value.
pub fn run_with_profile<I, T>(args: I, profile: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome::usage(text)
            };
        }
    };
    let profile = match Profile::parse(profile) {
        Ok(p) => p,
        Err(e) => return Outcome::usage(format!("error: {e}\n")),
    };
    let file = match &cli.config {
        None => FileConfig::default(),
        Some(p) => match std::fs::read_to_string(p)
            .map_err(|e| Error::Io(format!("{}: {e}", p.display())))
            .and_then(|t| FileConfig::from_toml(&t))
        {
            Ok(f) => f,
            Err(e) => return Outcome::usage(format!("error: {e}\n")),
        },
    };
    let format = pick(cli.format, file.format, Format::Text);
    let report = match execute(&cli, &file, profile) {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                code: error_code(&e),
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let rendered = match render(&report, format) {
        Ok(r) => r,
        Err(e) => return Outcome::usage(format!("error: {e}\n")),
    };
    let code = if report.verdict { 0 } else { 1 };
    match &cli.output {
        Some(p) => match write_file(p, &rendered) {
            Ok(()) => Outcome {
                code,
                stdout: format!(
                    "{}: {} -> {}\n",
                    report.command,
                    if report.verdict { "PASS" } else { "FAIL" },
                    p.display()
                ),
                stderr: String::new(),
            },
            Err(e) => Outcome::usage(format!("error: {e}\n")),
        },
        None => Outcome {
            code,
            stdout: rendered,
            stderr: String::new(),
        },
    }
}

/// Runs the CLI, reading the tolerance profile from the environment.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let profile = std::env::var(PROFILE_ENV).ok();
    run_with_profile(args, profile.as_deref())
}
