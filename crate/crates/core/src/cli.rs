//! Command-line surface: argument definitions, commands, and output rendering.
//!
//! Every angle on the command line is the `γ` of `W(γ) = ⟨−γ, π/4| C |−γ, π/4⟩`;
//! the state itself is prepared with cost angle `−γ`. JSON floats carry 12
//! significant digits.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::analytic::{EvalMode, ExpectationReport, TermMethod};
use crate::error::{Error, Result};
use crate::instance::{self, Instance, SignMode};
use crate::limits::Limits;
use crate::sampler::{self, SampleReport};
use crate::schedule::{self, GuaranteeReport, ScanReport};
use crate::statevector::{self, AngleParams};
use crate::typical::{self, EnsembleReport};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "e3lin2-qaoa",
    version,
    about = "Level-1 QAOA on bounded-occurrence Max E3LIN2"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Largest neighborhood support enumerated exactly (overrides E3LIN2_Q_MAX).
    #[arg(long, global = true)]
    pub q_max: Option<usize>,

    /// Largest qubit count for statevector simulation (overrides E3LIN2_N_MAX).
    #[arg(long, global = true)]
    pub n_max: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output to this file (atomically) instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random bounded-occurrence instance file.
    Gen(GenArgs),
    /// Evaluate W(γ) clause by clause.
    Eval(EvalArgs),
    /// Evaluate W on the Chebyshev angle grid and report the worst-case guarantee.
    Scan(ScanArgs),
    /// Prepare the QAOA state, measure it, and count satisfied equations.
    Sample(SampleArgs),
    /// Average W(γ) over random right-hand sides for the instance's triples.
    Typical(TypicalArgs),
    /// Print the worst-case and typical-case guarantees for (m, D).
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(short = 'n')]
    pub n: usize,
    #[arg(short = 'm')]
    pub m: usize,
    /// Every variable appears in at most D+1 clauses.
    #[arg(short = 'D')]
    pub d_bound: usize,
    #[arg(long, value_enum, default_value_t = SignArg::UniformRandom)]
    pub signs: SignArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    UniformRandom,
    AllZeroRhs,
}

impl From<SignArg> for SignMode {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::UniformRandom => SignMode::UniformRandom,
            SignArg::AllZeroRhs => SignMode::AllZeroRhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Auto,
    Mc,
}

#[derive(Debug, Args)]
pub struct EvalModeArgs {
    /// Clause evaluation: exact enumeration, auto (exact with Monte Carlo fallback), or Monte Carlo.
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Monte Carlo samples per clause.
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EvalModeArgs {
    fn mode(&self) -> EvalMode {
        match self.mode {
            ModeArg::Exact => EvalMode::Exact,
            ModeArg::Auto => EvalMode::Auto {
                samples: self.mc_samples,
                seed: self.seed,
            },
            ModeArg::Mc => EvalMode::MonteCarlo {
                samples: self.mc_samples,
                seed: self.seed,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub instance: PathBuf,
    /// Angle γ of W(γ); the state is prepared at −γ.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[command(flatten)]
    pub mode: EvalModeArgs,
    /// Also compute W(γ) by dense statevector simulation.
    #[arg(long)]
    pub compare_statevector: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub mode: EvalModeArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub instance: PathBuf,
    /// Angle γ of W(γ); the state is prepared at −γ.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub beta: f64,
    /// Shot count, or `auto` for ⌈m ln m⌉.
    #[arg(long, default_value = "auto")]
    pub samples: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Auto,
    Exhaustive,
    Mc,
}

#[derive(Debug, Args)]
pub struct TypicalArgs {
    /// Instance whose triples define the ensemble (its right-hand sides are ignored).
    pub instance: PathBuf,
    /// Angle γ, or `auto` for 1/√(3D).
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    pub gamma: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `auto` enumerates all 2^m sign choices when m is small enough.
    #[arg(long, value_enum, default_value_t = EnsembleArg::Auto)]
    pub method: EnsembleArg,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(short = 'm')]
    pub m: usize,
    #[arg(short = 'D')]
    pub d_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRow {
    pub clause: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub rhs: u8,
    pub q_size: usize,
    pub value: f64,
    pub method: TermMethod,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalOutput {
    pub command: &'static str,
    pub n: usize,
    pub m: usize,
    pub d_bound: usize,
    pub gamma: f64,
    pub state_gamma: f64,
    pub beta: f64,
    pub mode: EvalMode,
    pub total: f64,
    pub stderr: f64,
    pub expected_satisfied: f64,
    pub terms: Vec<TermRow>,
    pub statevector_total: Option<f64>,
    pub statevector_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutput {
    pub command: &'static str,
    pub n: usize,
    pub m: usize,
    pub mode: EvalMode,
    pub scan: ScanReport,
    pub guarantee: GuaranteeReport,
    /// `best.w ≥ grid_bound`; always true when the bound is vacuous.
    pub grid_bound_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutput {
    pub command: &'static str,
    pub samples_policy: &'static str,
    #[serde(flatten)]
    pub report: SampleReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalOutput {
    pub command: &'static str,
    pub gamma_policy: &'static str,
    #[serde(flatten)]
    pub report: EnsembleReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsOutput {
    pub command: &'static str,
    pub m: usize,
    pub d_bound: usize,
    /// Worst-case grid guarantee on the expected advantage over m/2.
    pub worst_case: GuaranteeReport,
    pub worst_case_note: Option<String>,
    /// Typical-case expected advantage over m/2, m/(2√(3e)√D).
    pub typical_advantage: f64,
    pub typical_note: &'static str,
    pub typical_gamma: f64,
    pub typical_expected_satisfied: f64,
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered(pub String);

pub fn limits_for(cli: &Cli) -> Limits {
    let mut limits = Limits::from_env();
    if let Some(q) = cli.q_max {
        limits.q_max = q;
    }
    if let Some(n) = cli.n_max {
        limits.n_max = n;
    }
    limits
}

fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read instance {}: {e}", path.display())))?;
    instance::parse(&text)
}

/// Runs the parsed command and renders its output.
pub fn execute(cli: &Cli) -> Result<Rendered> {
    let limits = limits_for(cli);
    let fmt = cli.format;
    let text = match &cli.command {
        Command::Gen(a) => {
            let inst = instance::generate_random(a.n, a.m, a.d_bound, a.signs.into(), a.seed)?;
            instance::serialize(&inst)
        }
        Command::Eval(a) => {
            let out = cmd_eval(
                &load(&a.instance)?,
                a.gamma,
                a.mode.mode(),
                a.compare_statevector,
                &limits,
            )?;
            render(&out, fmt, eval_csv)?
        }
        Command::Scan(a) => render(&cmd_scan(&load(&a.instance)?, a.mode.mode(), &limits)?, fmt, scan_csv)?,
        Command::Sample(a) => {
            let samples = parse_samples(&a.samples)?;
            let out = cmd_sample(&load(&a.instance)?, a.gamma, a.beta, samples, a.seed, &limits)?;
            render(&out, fmt, sample_csv)?
        }
        Command::Typical(a) => {
            let gamma = parse_gamma(&a.gamma)?;
            let out = cmd_typical(&load(&a.instance)?, gamma, a.trials, a.seed, a.method, &limits)?;
            render(&out, fmt, typical_csv)?
        }
        Command::Bounds(a) => render(&cmd_bounds(a.m, a.d_bound)?, fmt, bounds_csv)?,
    };
    Ok(Rendered(text))
}

fn parse_samples(s: &str) -> Result<Option<usize>> {
    if s == "auto" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::InvalidParameter(format!("--samples expects a count or `auto`, got {s:?}")))
}

fn parse_gamma(s: &str) -> Result<Option<f64>> {
    if s == "auto" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::InvalidParameter(format!("--gamma expects a number or `auto`, got {s:?}")))
}

pub fn cmd_eval(
    inst: &Instance,
    gamma: f64,
    mode: EvalMode,
    compare_statevector: bool,
    limits: &Limits,
) -> Result<EvalOutput> {
    let report: ExpectationReport = crate::analytic::objective_expectation(inst, gamma, mode, limits)?;
    let (statevector_total, statevector_difference) = if compare_statevector {
        let sv = statevector::reference_w(inst, gamma, limits)?;
        (Some(sv), Some(report.total - sv))
    } else {
        (None, None)
    };
    let neighborhoods = crate::analytic::build_neighborhoods(inst);
    let terms = report
        .terms
        .iter()
        .zip(&neighborhoods)
        .map(|(t, nb)| TermRow {
            clause: t.clause,
            a: nb.focal.a,
            b: nb.focal.b,
            c: nb.focal.c,
            rhs: nb.focal.rhs,
            q_size: nb.q_size(),
            value: t.value,
            method: t.method,
            stderr: t.stderr,
        })
        .collect();
    Ok(EvalOutput {
        command: "eval",
        n: inst.n(),
        m: inst.m(),
        d_bound: inst.d_bound(),
        gamma,
        state_gamma: -gamma,
        beta: std::f64::consts::FRAC_PI_4,
        mode,
        total: report.total,
        stderr: report.stderr,
        expected_satisfied: inst.m() as f64 / 2.0 + report.total,
        terms,
        statevector_total,
        statevector_difference,
    })
}

pub fn cmd_scan(inst: &Instance, mode: EvalMode, limits: &Limits) -> Result<ScanOutput> {
    let d = inst.d_bound().max(1);
    let sched = schedule::make_schedule(d)?;
    let scan = schedule::scan(inst, &sched, mode, limits)?;
    let guarantee = schedule::guarantee(inst.m().max(1), d)?;
    let grid_bound_met = guarantee.grid_bound_vacuous || scan.best.w >= guarantee.grid_bound;
    Ok(ScanOutput {
        command: "scan",
        n: inst.n(),
        m: inst.m(),
        mode,
        scan,
        guarantee,
        grid_bound_met,
    })
}

pub fn cmd_sample(
    inst: &Instance,
    gamma: f64,
    beta: f64,
    samples: Option<usize>,
    seed: u64,
    limits: &Limits,
) -> Result<SampleOutput> {
    let (count, policy) = match samples {
        Some(s) => (s, "explicit"),
        None => (sampler::recommended_samples(inst.m())?, "ceil(m ln m)"),
    };
    let report = sampler::run(inst, AngleParams::new(-gamma, beta), count, seed, limits)?;
    Ok(SampleOutput {
        command: "sample",
        samples_policy: policy,
        report,
    })
}

pub fn cmd_typical(
    inst: &Instance,
    gamma: Option<f64>,
    trials: usize,
    seed: u64,
    method: EnsembleArg,
    limits: &Limits,
) -> Result<TypicalOutput> {
    let (gamma, gamma_policy) = match gamma {
        Some(g) => (g, "explicit"),
        None => (typical::optimal_gamma_typical(inst.d_bound().max(1))?, "1/sqrt(3D)"),
    };
    let exhaustive = match method {
        EnsembleArg::Exhaustive => true,
        EnsembleArg::Mc => false,
        EnsembleArg::Auto => inst.m() <= limits.exhaustive_max_m.min(12),
    };
    let report = if exhaustive {
        typical::ensemble_mean_exhaustive(inst, gamma, limits)?
    } else {
        typical::ensemble_mean_mc(inst, gamma, trials, seed, limits)?
    };
    Ok(TypicalOutput {
        command: "typical",
        gamma_policy,
        report,
    })
}

pub fn cmd_bounds(m: usize, d_bound: usize) -> Result<BoundsOutput> {
    if m < 1 {
        return Err(Error::InvalidParameter("clause count m must be at least 1".into()));
    }
    let worst_case = schedule::guarantee(m, d_bound)?;
    let typical_advantage = typical::typical_guarantee(m, d_bound)?;
    let worst_case_note = worst_case
        .grid_bound_vacuous
        .then(|| "grid bound is vacuous (non-positive) at this D".to_string());
    Ok(BoundsOutput {
        command: "bounds",
        m,
        d_bound,
        worst_case,
        worst_case_note,
        typical_advantage,
        typical_note:
            "expected advantage over m/2 averaged over uniformly random right-hand sides, at gamma = 1/sqrt(3D)",
        typical_gamma: typical::optimal_gamma_typical(d_bound)?,
        typical_expected_satisfied: m as f64 / 2.0 + typical_advantage,
    })
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to 12 significant digits and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn render<T: Serialize>(value: &T, fmt: Format, csv: fn(&T) -> String) -> Result<String> {
    match fmt {
        Format::Json => to_json(value),
        Format::Csv => Ok(csv(value)),
    }
}

fn f(x: f64) -> String {
    if x.is_finite() {
        round_sig(x).to_string()
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

fn method_name(m: TermMethod) -> &'static str {
    match m {
        TermMethod::ExactEnumeration => "exact-enumeration",
        TermMethod::MonteCarlo => "monte-carlo",
    }
}

pub const EVAL_CSV_HEADER: &str = "clause,a,b,c,rhs,q_size,value,method,stderr";
pub const SCAN_CSV_HEADER: &str = "r,gamma,w";
pub const SAMPLE_CSV_HEADER: &str =
    "state_gamma,gamma,beta,m,samples,seed,mean_satisfied,best_satisfied,best_string,predicted_mean,predicted_std";
pub const TYPICAL_CSV_HEADER: &str =
    "method,m,d_bound,gamma,trials,mean_w,stderr,variance,closed_form_mean,lower_bound,upper_bound,variance_bound";
pub const BOUNDS_CSV_HEADER: &str =
    "m,d_bound,k,grid_bound,grid_bound_vacuous,asymptotic_bound,typical_gamma,typical_advantage";

fn eval_csv(o: &EvalOutput) -> String {
    let mut s = format!("{EVAL_CSV_HEADER}\n");
    for t in &o.terms {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            t.clause,
            t.a,
            t.b,
            t.c,
            t.rhs,
            t.q_size,
            f(t.value),
            method_name(t.method),
            f(t.stderr)
        )
        .unwrap();
    }
    writeln!(s, "total,,,,,,{},,{}", f(o.total), f(o.stderr)).unwrap();
    s
}

fn scan_csv(o: &ScanOutput) -> String {
    let mut s = format!("{SCAN_CSV_HEADER}\n");
    for p in &o.scan.curve {
        writeln!(s, "{},{},{}", p.r, f(p.gamma), f(p.w)).unwrap();
    }
    writeln!(s, "best,{},{}", f(o.scan.best.gamma), f(o.scan.best.w)).unwrap();
    s
}

fn sample_csv(o: &SampleOutput) -> String {
    let r = &o.report;
    format!(
        "{SAMPLE_CSV_HEADER}\n{},{},{},{},{},{},{},{},{},{},{}\n",
        f(r.state_gamma),
        f(r.gamma),
        f(r.beta),
        r.m,
        r.samples,
        r.seed,
        f(r.mean_satisfied),
        r.best_satisfied,
        r.best_string,
        f(r.predicted_mean),
        f(r.predicted_std)
    )
}

fn typical_csv(o: &TypicalOutput) -> String {
    let r = &o.report;
    let method = match r.method {
        typical::EnsembleMethod::Exhaustive => "exhaustive",
        typical::EnsembleMethod::MonteCarlo => "monte-carlo",
    };
    format!(
        "{TYPICAL_CSV_HEADER}\n{method},{},{},{},{},{},{},{},{},{},{},{}\n",
        r.m,
        r.d_bound,
        f(r.gamma),
        r.trials,
        f(r.mean_w),
        f(r.stderr),
        f(r.variance),
        f(r.closed_form_mean),
        f(r.lower_bound),
        f(r.upper_bound),
        f(r.variance_bound)
    )
}

fn bounds_csv(o: &BoundsOutput) -> String {
    let g = &o.worst_case;
    format!(
        "{BOUNDS_CSV_HEADER}\n{},{},{},{},{},{},{},{}\n",
        o.m,
        o.d_bound,
        g.k,
        f(g.grid_bound),
        g.grid_bound_vacuous,
        opt(g.asymptotic_bound),
        f(o.typical_gamma),
        f(o.typical_advantage)
    )
}

/// Writes `content` to `path` via a temporary file in the same directory, or to stdout.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            let dir = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(content.as_bytes())?;
            tmp.persist(p).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
