//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 oracle mismatch,
//! 4 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diffpoly::{parse, DiffPoly};
use crate::error::{Error, Result};
use crate::fredholm::{
    build_quadrature, coupling, fredholm_logdet, nystrom_eigenvalues, nystrom_logdet, split_half_line, DetResult,
    IntervalUnion, Kernel, QuadratureRule, TailMap,
};
use crate::gdtools::{
    change_variables_ising, compare_systems, derive_string_system, gd_polynomials, gd_via_commutator,
    lax_matrices_p2, pi_hierarchy_equation, verify_zero_curvature, StringData,
};
use crate::golden;
use crate::hirota::{derive_pde, even_part, log_form, PdeCase};
use crate::painleve::{solve_pi2_with, BvpOptions};
use crate::pdeverify::{verify_cv_pde, Axis, GridSpec, Steps, VerifyOptions};
use crate::wavekernel::KernelOperator;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "pqstring", version, about = "(p,q) string equations, Hirota forms and Fredholm kernels")]
pub struct Cli {
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gel'fand-Dickey polynomials omega_0..omega_n.
    Gd(GdArgs),
    /// Painleve-like system of a (p, q) string equation.
    StringSystem(StringSystemArgs),
    /// 2x2 Lax pair of a p = 2 string equation.
    Lax(LaxArgs),
    /// Hirota symbol and its differential form.
    Hirota(HirotaArgs),
    /// Log-determinant PDE of one of the three cases.
    DerivePde(DerivePdeArgs),
    /// Real pole-free solution of the second PI hierarchy member.
    SolvePi2(SolvePi2Args),
    /// Kernel values K(lambda, lambda') at fixed (x, t).
    Kernel(KernelArgs),
    /// Fredholm determinant on a half-line or interval.
    Fredholm(FredholmArgs),
    /// Numerical residual of the PI2 log-determinant PDE.
    VerifyPde(VerifyPdeArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GdArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Compare with the commutator route and the stored omega_1.
    #[arg(long)]
    pub check: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    Pi2,
    Ising3,
    Ising4,
}

#[derive(Args, Debug, Serialize)]
pub struct StringSystemArgs {
    #[arg(long)]
    pub p: u32,
    /// Comma-separated T_{p+1}, ..., T_{p+q}.
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    /// Rewrite in the Ising variables u, v (p = 3, 4).
    #[arg(long)]
    pub ising: bool,
    /// Stored system to compare with.
    #[arg(long, value_enum)]
    pub reference: Option<Reference>,
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct LaxArgs {
    /// Comma-separated T_3, T_4, ...
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    /// Integration constant of the string equation.
    #[arg(long, default_value = "c")]
    pub c: String,
    /// Check zero curvature modulo the string equation.
    #[arg(long)]
    pub check: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseArg {
    Pi2,
    CriticalIsing,
    TricriticalIsing,
}

impl CaseArg {
    fn case(self) -> PdeCase {
        match self {
            CaseArg::Pi2 => PdeCase::Pi2,
            CaseArg::CriticalIsing => PdeCase::CriticalIsing,
            CaseArg::TricriticalIsing => PdeCase::TricriticalIsing,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct HirotaArgs {
    #[arg(long, value_enum, conflicts_with = "symbol")]
    pub case: Option<CaseArg>,
    /// Arbitrary symbol in d1..d9.
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct DerivePdeArgs {
    #[arg(long, value_enum)]
    pub case: CaseArg,
    /// Also print the bilinear form and the rewritten equations.
    #[arg(long)]
    pub show_substitutions: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SolvePi2Args {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    /// Half-width of the domain [-L, L].
    #[arg(long, default_value_t = 10.0)]
    pub l: f64,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub branch: i8,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Finite-difference stencil order.
    #[arg(long, default_value_t = 4)]
    pub accuracy: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct BvpArgs {
    /// Half-width of the PI2 solve.
    #[arg(long = "bvp-l", default_value_t = 12.0)]
    pub bvp_l: f64,
    #[arg(long = "bvp-n", default_value_t = 1500)]
    pub bvp_n: usize,
    #[arg(long = "bvp-accuracy", default_value_t = 12)]
    pub bvp_accuracy: usize,
}

impl BvpArgs {
    fn operator(&self, t: f64, c: f64, x: f64) -> Result<KernelOperator> {
        let opts = BvpOptions { n: self.bvp_n, accuracy: self.bvp_accuracy, ..BvpOptions::default() };
        let sol = solve_pi2_with(t, self.bvp_l, &opts, 1, c)?;
        KernelOperator::pi2(Arc::new(sol), x)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Comma-separated spectral points.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    pub lambdas: Option<String>,
    /// Equispaced points `lo:hi:n`.
    #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
    pub grid: Option<Axis>,
    /// Use the Airy kernel instead of PI2.
    #[arg(long)]
    pub airy: bool,
    #[command(flatten)]
    pub bvp: BvpArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Airy,
    Pi2,
}

#[derive(Args, Debug, Serialize)]
pub struct FredholmArgs {
    #[arg(long, value_enum, default_value_t = KernelKind::Airy)]
    pub kernel: KernelKind,
    /// Left endpoint of E.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s: f64,
    /// Right endpoint; E is the half-line [s, inf) when absent.
    #[arg(long, allow_negative_numbers = true)]
    pub upper: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu_re: f64,
    #[arg(long, default_value_t = 1.0 / (2.0 * std::f64::consts::PI), allow_negative_numbers = true)]
    pub mu_im: f64,
    /// Nodes per panel.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    #[arg(long, value_parser = parse_tail_map, default_value = "algebraic")]
    pub tail_map: TailMap,
    /// Break between the finite panel and the mapped tail of a half-line.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub split: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Sweep the left endpoint over `lo:hi:n`.
    #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
    pub sweep: Option<Axis>,
    /// Check the doubling error, the spectrum and, with a sweep, monotonicity.
    #[arg(long)]
    pub check: bool,
    /// Bound on the doubling error under --check.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(flatten)]
    pub bvp: BvpArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyPdeArgs {
    #[arg(long = "s-grid", value_parser = parse_axis, default_value = "-2:2:5", allow_hyphen_values = true)]
    pub s_grid: Axis,
    #[arg(long = "x-grid", value_parser = parse_axis, default_value = "-1:1:5", allow_hyphen_values = true)]
    pub x_grid: Axis,
    #[arg(long = "t-grid", value_parser = parse_axis, default_value = "-0.5:0.5:5", allow_hyphen_values = true)]
    pub t_grid: Axis,
    #[arg(long, default_value_t = 0.05)]
    pub hs: f64,
    #[arg(long, default_value_t = 0.05)]
    pub hx: f64,
    #[arg(long, default_value_t = 0.025)]
    pub ht: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.05)]
    pub richardson_tol: f64,
    /// Nodes per panel of the determinant quadrature.
    #[arg(long, default_value_t = 48)]
    pub n_nodes: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    #[command(flatten)]
    pub bvp: BvpArgs,
    /// Exit with status 3 unless the report passes.
    #[arg(long)]
    pub check: bool,
}

fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("expected lo:hi:n, got `{s}`"));
    };
    let f = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let n = n.trim().parse::<usize>().map_err(|e| format!("`{n}`: {e}"))?;
    let (lo, hi) = (f(lo)?, f(hi)?);
    if n == 0 || !(lo <= hi) {
        return Err(format!("empty range `{s}`"));
    }
    Ok(Axis::new(lo, hi, n))
}

fn parse_tail_map(s: &str) -> std::result::Result<TailMap, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty()).collect()
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    parse_list(s)
        .into_iter()
        .map(|v| v.parse::<f64>().map_err(|e| Error::InvalidInput(format!("`{v}`: {e}"))))
        .collect()
}

/// Rendered result of one subcommand.
#[derive(Debug, Default)]
pub struct Outcome {
    pub config: Value,
    pub json: Value,
    pub text: String,
    pub csv: Option<String>,
    /// Oracle verdict when a check ran.
    pub mismatch: bool,
}

impl Outcome {
    fn new<A: Serialize>(command: &str, args: &A) -> Outcome {
        let mut config = serde_json::to_value(args).expect("arguments serialize");
        config["command"] = json!(command);
        Outcome { config, json: json!({}), ..Outcome::default() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn verdict(&mut self, name: &str, ok: bool) {
        self.line(format!("{name}: {}", if ok { "MATCH" } else { "MISMATCH" }));
        self.json["checks"][name] = json!(ok);
        self.mismatch |= !ok;
    }

    /// Renders in the requested format, config first.
    pub fn render(&self, format: Format) -> Result<String> {
        let header = format!("# config: {}\n", self.config);
        Ok(match format {
            Format::Text => header + &self.text,
            Format::Csv => match &self.csv {
                Some(c) => header + c,
                None => return Err(Error::InvalidInput("this command has no CSV output".into())),
            },
            Format::Json => {
                let mut v = self.json.clone();
                v["config"] = self.config.clone();
                serde_json::to_string_pretty(&v).expect("json") + "\n"
            }
        })
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Parse { .. } | Error::InvalidSymbol(_) => EXIT_USAGE,
        Error::GoldenMismatch(_) => EXIT_MISMATCH,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command).and_then(|o| Ok((o.render(cli.format)?, o.mismatch))) {
        Ok((out, mismatch)) => {
            let written = match &cli.output {
                Some(p) => std::fs::write(p, out),
                None => std::io::stdout().write_all(out.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
            if mismatch {
                EXIT_MISMATCH
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one subcommand.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Gd(a) => gd(a),
        Command::StringSystem(a) => string_system(a),
        Command::Lax(a) => lax(a),
        Command::Hirota(a) => hirota(a),
        Command::DerivePde(a) => derive(a),
        Command::SolvePi2(a) => solve(a),
        Command::Kernel(a) => kernel(a),
        Command::Fredholm(a) => fredholm(a),
        Command::VerifyPde(a) => verify(a),
    }
}

fn strings(ps: &[DiffPoly]) -> Vec<String> {
    ps.iter().map(|p| p.to_string()).collect()
}

fn gd(a: &GdArgs) -> Result<Outcome> {
    let mut o = Outcome::new("gd", a);
    let om = gd_polynomials(a.n)?;
    for (k, w) in om.iter().enumerate() {
        o.line(format!("omega{k} = {w}"));
    }
    o.json["omega"] = json!(strings(&om));
    if a.check {
        let commutator = (0..a.n.min(5)).all(|j| gd_via_commutator(j as u32).is_ok_and(|c| c == om[j + 1]));
        o.verdict("commutator", commutator);
        if a.n >= 1 {
            let g = golden::load("pi_hierarchy")?;
            o.verdict("omega1", om[1] == golden::entry(&g, "omega1")?);
        }
    }
    Ok(o)
}

fn string_system(a: &StringSystemArgs) -> Result<Outcome> {
    let mut o = Outcome::new("string-system", a);
    let data = StringData::parse(a.p, &parse_list(&a.t))?;
    for w in data.warnings() {
        o.line(format!("warning: {w}"));
    }
    let mut s = derive_string_system(&data)?;
    if a.ising {
        s = change_variables_ising(&s)?;
    }
    for (i, e) in s.integrated.iter().enumerate() {
        match e {
            Some(e) => o.line(format!("E{i}: {e} = 0")),
            None => o.line(format!("E{i}: not integrated, d_x form {} = 0", s.symmetric[i])),
        }
    }
    o.json = s.to_json();
    if a.check {
        o.verdict("consistency", s.check_consistency());
    }
    if let Some(r) = a.reference {
        let der: Vec<DiffPoly> = s
            .integrated
            .iter()
            .map(|e| e.clone().ok_or_else(|| Error::Numerical("system not fully integrated".into())))
            .collect::<Result<_>>()?;
        let (refs, constants, as_x): (Vec<DiffPoly>, &[&str], &[&str]) = match r {
            Reference::Pi2 => (vec![golden::entry(&golden::load("pi_hierarchy")?, "pi2_t")?], &["c3"], &[]),
            Reference::Ising3 => (golden::load("ising3")?.into_values().collect(), &["t1", "t2"], &["t1"]),
            Reference::Ising4 => (golden::load("ising4")?.into_values().collect(), &["t1", "t2", "t3"], &["t1"]),
        };
        if refs.len() != der.len() {
            o.verdict("reference", false);
            return Ok(o);
        }
        let m = compare_systems(&der, &refs, constants, as_x);
        let factors: Vec<String> = m.factors.iter().map(|f| f.clone().unwrap_or_else(|| "-".into())).collect();
        o.line(format!("factors: {}", factors.join(", ")));
        for (c, k) in &m.constant_scales {
            o.line(format!("constant {c} = {k} * reference"));
        }
        o.json["comparison"] = serde_json::to_value(&m).expect("match serializes");
        o.verdict("reference", m.matched);
    }
    Ok(o)
}

fn lax(a: &LaxArgs) -> Result<Outcome> {
    let mut o = Outcome::new("lax", a);
    let t: Vec<DiffPoly> = parse_list(&a.t).into_iter().map(parse).collect::<Result<_>>()?;
    let pair = lax_matrices_p2(&t)?;
    for (name, m) in [("U", &pair.u), ("V", &pair.v)] {
        for (i, row) in m.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                o.line(format!("{name}[{}{}] = {e}", i + 1, j + 1));
            }
        }
    }
    let eq = pi_hierarchy_equation(&t, &parse(&a.c)?)?;
    o.line(format!("string equation: {eq} = 0"));
    o.json = pair.to_json();
    o.json["equation"] = json!(eq.to_string());
    if a.check {
        o.verdict("zero_curvature", verify_zero_curvature(&pair, &eq)?);
    }
    Ok(o)
}

fn hirota(a: &HirotaArgs) -> Result<Outcome> {
    let mut o = Outcome::new("hirota", a);
    let (symbol, scale, keys) = match (a.case, &a.symbol) {
        (Some(c), _) => {
            let case = c.case();
            let keys = match case {
                PdeCase::Pi2 => ("combo_symbol", "combo_log"),
                PdeCase::CriticalIsing => ("y4_symbol", "y4_log"),
                PdeCase::TricriticalIsing => ("y14_symbol", "y14_log"),
            };
            (case.symbol(), case.log_scale(), Some(keys))
        }
        (None, Some(s)) => (parse(s)?, 1, None),
        (None, None) => return Err(Error::InvalidInput("give --case or --symbol".into())),
    };
    let even = even_part(&symbol);
    let form = log_form(&symbol).scale_int(scale);
    o.line(format!("symbol: {symbol}"));
    o.line(format!("even part: {even}"));
    o.line(format!("log form: {form}"));
    o.json = json!({"symbol": symbol.to_string(), "even_part": even.to_string(), "log_form": form.to_string(), "scale": scale});
    if a.check {
        let Some((ks, kl)) = keys else {
            return Err(Error::InvalidInput("--check needs --case".into()));
        };
        let g = golden::load("hirota")?;
        o.verdict("symbol", symbol == golden::entry(&g, ks)?);
        o.verdict("log_form", form == golden::entry(&g, kl)?);
    }
    Ok(o)
}

fn derive(a: &DerivePdeArgs) -> Result<Outcome> {
    let mut o = Outcome::new("derive-pde", a);
    let case = a.case.case();
    let d = derive_pde(case)?;
    if a.show_substitutions {
        o.line(format!("bilinear: {} = 0", d.bilinear));
        o.line(format!("g equation: {} = 0", d.g_equation));
        o.line(format!("g0 equation: {} = 0", d.g0_equation));
        for n in &d.notes {
            o.line(format!("note: {n}"));
        }
    }
    o.line(format!("{}: {} = 0", case.name(), d.equation));
    o.json = d.to_json();
    let g = golden::load("pdes")?;
    let key = case.name().replace('-', "_");
    o.verdict("golden", d.equation == golden::entry(&g, &key)?);
    Ok(o)
}

fn solve(a: &SolvePi2Args) -> Result<Outcome> {
    let mut o = Outcome::new("solve-pi2", a);
    let opts = BvpOptions { n: a.n, accuracy: a.accuracy, ..BvpOptions::default() };
    let sol = solve_pi2_with(a.t, a.l, &opts, a.branch, a.c)?;
    let meta = sol.metadata();
    if let Value::Object(m) = &meta {
        for (k, v) in m {
            o.line(format!("{k} = {v}"));
        }
    }
    for x in [-a.l / 2.0, 0.0, a.l / 2.0] {
        o.line(format!("y({x}) = {:.12e}", sol.y_at(x)?));
    }
    o.json = json!({"metadata": meta, "x": sol.grid, "jets": sol.jets});
    o.csv = Some(sol.to_csv());
    Ok(o)
}

fn kernel_operator(airy: bool, bvp: &BvpArgs, x: f64, t: f64, c: f64) -> Result<KernelOperator> {
    if airy {
        KernelOperator::airy(x)
    } else {
        bvp.operator(t, c, x)
    }
}

fn kernel(a: &KernelArgs) -> Result<Outcome> {
    let mut o = Outcome::new("kernel", a);
    let lambdas = match (&a.lambdas, &a.grid) {
        (Some(l), _) => parse_f64_list(l)?,
        (None, Some(g)) => g.values(),
        (None, None) => return Err(Error::InvalidInput("give --lambdas or --grid".into())),
    };
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("no spectral points".into()));
    }
    let op = kernel_operator(a.airy, &a.bvp, a.x, a.t, a.c)?;
    let w = op.waves(&lambdas)?;
    let k = w.kernel_matrix();
    let mut csv = String::from("lambda,lambda_prime,K\n");
    for (i, &l1) in lambdas.iter().enumerate() {
        for (j, &l2) in lambdas.iter().enumerate() {
            csv.push_str(&format!("{l1},{l2},{:.17e}\n", k[i][j]));
        }
    }
    o.text.push_str(&csv);
    o.line(format!("wronskian_drift = {:e}", w.wronskian_drift));
    o.line(format!("init_error = {:e}", w.init_error));
    o.json = json!({
        "metadata": op.metadata(),
        "lambdas": lambdas,
        "K": k,
        "wronskian_drift": w.wronskian_drift,
        "init_error": w.init_error,
    });
    o.csv = Some(csv);
    Ok(o)
}

/// Determinant on `[s, upper]` or on the split half-line `[s, ∞)`.
fn determinant(k: &dyn Kernel, a: &FredholmArgs, s: f64, mu: Complex64) -> Result<(DetResult, IntervalUnion, QuadratureRule)> {
    if let Some(b) = a.upper {
        let e = IntervalUnion::finite(s, b)?;
        let d = fredholm_logdet(k, &e, mu, a.n, a.tail_map)?;
        let rule = build_quadrature(&e, a.n, a.tail_map)?;
        return Ok((d, e, rule));
    }
    let e = IntervalUnion::half_line(s)?;
    let gamma = coupling(mu);
    let r1 = split_half_line(s, a.split, a.n, a.tail_map)?;
    let r2 = split_half_line(s, a.split, 2 * a.n, a.tail_map)?;
    let (l1, cutoff) = nystrom_logdet(k, &r1, gamma)?;
    let (l2, _) = nystrom_logdet(k, &r2, gamma)?;
    let d = DetResult { log_det: l1, n_nodes: r1.nodes.len(), err_estimate: (l2 - l1).norm(), mu, cutoff };
    Ok((d, e, r1))
}

fn fredholm(a: &FredholmArgs) -> Result<Outcome> {
    let mut o = Outcome::new("fredholm", a);
    if a.n == 0 {
        return Err(Error::InvalidInput("--n must be positive".into()));
    }
    let op = kernel_operator(a.kernel == KernelKind::Airy, &a.bvp, a.x, a.t, a.c)?;
    let mu = Complex64::new(a.mu_re, a.mu_im);
    let ss = a.sweep.map_or_else(|| vec![a.s], |ax| ax.values());
    let mut rows = Vec::new();
    let mut csv = String::from("s,log_det_re,log_det_im,det_re,det_im,err\n");
    let mut worst_err: f64 = 0.0;
    let mut spectrum_ok = true;
    for &s in &ss {
        let (d, e, rule) = determinant(&op, a, s, mu)?;
        let det = d.det();
        csv.push_str(&format!(
            "{s},{:.17e},{:.17e},{:.17e},{:.17e},{:e}\n",
            d.log_det.re, d.log_det.im, det.re, det.im, d.err_estimate
        ));
        worst_err = worst_err.max(d.err_estimate);
        if a.check {
            let ev = nystrom_eigenvalues(&op, &rule)?;
            spectrum_ok &= ev.iter().all(|&l| (-1e-10..1.0).contains(&l));
        }
        rows.push(d.to_json(&e));
    }
    o.text.push_str(&csv);
    o.csv = Some(csv);
    o.json = json!({"kernel": op.metadata(), "results": rows});
    if a.check {
        o.verdict("doubling", worst_err <= a.tol);
        o.verdict("spectrum", spectrum_ok);
        if ss.len() > 1 {
            let dets: Vec<f64> = rows.iter().map(|r| r["log_det"][0].as_f64().unwrap_or(f64::NAN)).collect();
            o.verdict("monotone", dets.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }
    Ok(o)
}

fn verify(a: &VerifyPdeArgs) -> Result<Outcome> {
    let mut o = Outcome::new("verify-pde", a);
    let opts = VerifyOptions {
        grid: GridSpec { s: a.s_grid, x: a.x_grid, t: a.t_grid },
        steps: Steps { s: a.hs, x: a.hx, t: a.ht },
        tol: a.tol,
        richardson_tol: a.richardson_tol,
        n_nodes: a.n_nodes,
        c: a.c,
        bvp_half_width: a.bvp.bvp_l,
        bvp: BvpOptions { n: a.bvp.bvp_n, accuracy: a.bvp.bvp_accuracy, ..BvpOptions::default() },
        ..VerifyOptions::default()
    };
    let r = verify_cv_pde(&opts)?;
    o.config["resolved"] = opts.to_json();
    o.line(format!("equation: {} = 0", r.equation));
    o.line(format!("points: {}", r.points.len()));
    o.line(format!("relative_residual = {:e}", r.relative_residual));
    o.line(format!("halving_ratio = {}", r.halving_ratio));
    o.line(format!("excluded = {}", r.excluded.len()));
    o.line(format!("clairaut_ok = {}", r.clairaut_ok));
    o.line(format!("passed = {}", r.passed));
    o.json = serde_json::to_value(&r).expect("report serializes");
    o.csv = Some(r.to_csv());
    if a.check {
        o.verdict("residual", r.passed);
    }
    Ok(o)
}
