mod config;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use spinbath_core::collective::{allowed_j, identity_report, multiplicity};
use spinbath_core::dynamics::{BathType, CouplingScaling, ModelParams};
use spinbath_core::limits::{c_infinity, erfcx, f_asymptote};
use spinbath_core::oracle::{run_fixed_check, run_oracle_check, OracleCheckConfig, OracleCheckReport, ORACLE_TIMES};
use spinbath_core::series::{figure, figure_defaults, simulate, InitialState, TimeSeries};
use spinbath_core::wigner::{verify_decomposition, wigner3j, ThreeJArgs};
use spinbath_core::{Error, HalfInt};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "spinbath", version, about = "Collective-spin identities and two-qubit spin-bath dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print ν(N, j) for every allowed j (or one j) and check the sum identities.
    Multiplicity {
        #[arg(long)]
        n: u32,
        /// Total spin, e.g. 3/2 or 1.5.
        #[arg(long, allow_hyphen_values = true)]
        j: Option<HalfInt>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Exact Wigner 3j symbol (j1 j2 j3; m1 m2 m3).
    #[command(name = "wigner3j")]
    Wigner3j {
        #[arg(allow_hyphen_values = true, num_args = 6, value_names = ["J1", "J2", "J3", "M1", "M2", "M3"])]
        labels: Vec<HalfInt>,
    },
    /// Check the two-part multiplicity decomposition for N1 + N2 spins.
    VerifyDecomposition {
        #[arg(long)]
        n1: u32,
        #[arg(long)]
        n2: u32,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Evolve a two-qubit state and tabulate ρ(t) and the concurrence.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Flat JSON file of run settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Data series behind figure 1–6.
    Figure {
        id: u8,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare the closed-form dynamics with exact full-space evolution.
    OracleCheck {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Random parameter draws per bath type.
        #[arg(long, default_value_t = 20)]
        draws: usize,
        /// Fixed couplings instead of random draws; unset ones are zero.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hbeta: Option<f64>,
        #[arg(long, value_enum)]
        scaling: Option<ScalingArg>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Long-time concurrence C(∞) and f(∞) in the N → ∞ limit.
    Asymptote {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
}

/// Model and grid flags shared by `simulate` and `figure`.
#[derive(Args, Clone, Debug, Default)]
pub struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Bath field times inverse temperature.
    #[arg(long, allow_hyphen_values = true)]
    pub hbeta: Option<f64>,
    /// Spins per bath.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_enum)]
    pub bath: Option<BathArg>,
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingArg>,
    #[arg(long)]
    pub t_start: Option<f64>,
    #[arg(long)]
    pub t_stop: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub initial: Option<InitialArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum BathArg {
    Deltaz,
    Sigmaz,
}

impl From<BathArg> for BathType {
    fn from(b: BathArg) -> Self {
        match b {
            BathArg::Deltaz => BathType::DeltaZ,
            BathArg::Sigmaz => BathType::SigmaZ,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ScalingArg {
    Sqrtn,
    Linearn,
}

impl From<ScalingArg> for CouplingScaling {
    fn from(s: ScalingArg) -> Self {
        match s {
            ScalingArg::Sqrtn => CouplingScaling::SqrtN,
            ScalingArg::Linearn => CouplingScaling::LinearN,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum InitialArg {
    BellOuter,
    BellInner,
}

impl From<InitialArg> for InitialState {
    fn from(i: InitialArg) -> Self {
        match i {
            InitialArg::BellOuter => InitialState::BellOuter,
            InitialArg::BellInner => InitialState::BellInner,
        }
    }
}

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const MISMATCH: u8 = 1;
    pub const BAD_ARGS: u8 = 2;
    pub const IO: u8 = 3;
    pub const MODEL: u8 = 4;

    pub fn bad_args(message: impl Into<String>) -> Self {
        CliError { code: Self::BAD_ARGS, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: Self::IO, message: message.into() }
    }

    fn mismatch(message: impl Into<String>) -> Self {
        CliError { code: Self::MISMATCH, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotBlockForm(_) | Error::Precondition(_) => Self::MODEL,
            Error::Numerical(_) | Error::LengthMismatch(..) => Self::MISMATCH,
            _ => Self::BAD_ARGS,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult = Result<(), CliError>;

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io(format!("cannot write to stdout: {e}")))
        }
    }
}

fn series_json(s: &TimeSeries) -> Value {
    let meta: Map<String, Value> = s.metadata.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    json!({ "metadata": meta, "columns": s.columns, "rows": s.rows })
}

fn render_series(s: &TimeSeries, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => s.to_csv(),
        OutputFormat::Json => format!("{:#}\n", series_json(s)),
    }
}

fn print_json(v: &impl serde::Serialize) -> CliResult {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::mismatch(format!("serialization failed: {e}")))?;
    emit(&format!("{text}\n"), None)
}

fn cmd_multiplicity(n: u32, j: Option<HalfInt>, format: OutputFormat) -> CliResult {
    if n == 0 {
        return Err(CliError::bad_args("N must be at least 1"));
    }
    let js = match j {
        Some(j) if !allowed_j(n).contains(&j) => return Err(Error::InvalidJ { n, j }.into()),
        Some(j) => vec![j],
        None => allowed_j(n),
    };
    let rows = js.into_iter().map(|j| Ok((j, multiplicity(n, j)?))).collect::<Result<Vec<_>, Error>>()?;
    let report = identity_report(n)?;
    if format == OutputFormat::Json {
        let rows: Vec<Value> =
            rows.iter().map(|(j, nu)| json!({"j": j.to_string(), "multiplicity": nu.to_string()})).collect();
        return print_json(&json!({ "n": n, "rows": rows, "identities": report, "pass": report.all_pass() }));
    }
    let mut out = String::from("j,multiplicity\n");
    for (j, nu) in &rows {
        let _ = writeln!(out, "{j},{nu}");
    }
    for check in report.checks() {
        let _ = writeln!(
            out,
            "# {}: {} = {} {}",
            check.name,
            check.lhs,
            check.rhs,
            if check.pass { "pass" } else { "FAIL" }
        );
    }
    emit(&out, None)?;
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::mismatch(format!("identity check failed for N = {n}")))
    }
}

fn cmd_wigner3j(labels: &[HalfInt]) -> CliResult {
    let args = ThreeJArgs::new(labels[0], labels[1], labels[2], labels[3], labels[4], labels[5]);
    let value = wigner3j(&args)?;
    emit(&format!("{value}\t{:.17e}\n", value.to_f64()), None)
}

fn cmd_verify_decomposition(n1: u32, n2: u32, format: OutputFormat) -> CliResult {
    if n1 == 0 || n2 == 0 {
        return Err(CliError::bad_args("N1 and N2 must be at least 1"));
    }
    if n1 + n2 > 12 {
        return Err(CliError::bad_args(format!("N1 + N2 must be at most 12, got {}", n1 + n2)));
    }
    let report = verify_decomposition(n1, n2)?;
    if format == OutputFormat::Json {
        print_json(&json!({ "report": report, "pass": report.all_pass() }))?;
    } else {
        let mut out = format!("# N1={n1} N2={n2}\nJ,rhs,multiplicity,pass\n");
        for row in &report.rows {
            let _ = writeln!(out, "{},{},{},{}", row.j, row.rhs, row.multiplicity, row.pass);
        }
        let _ = writeln!(out, "# stretched sum = {} {}", report.stretched_value, pass_word(report.stretched_pass));
        if let (Some(sum), Some(pass)) = (&report.zero_j_sum, report.zero_j_pass) {
            let _ = writeln!(out, "# J=0 against sum_j nu(N1,j) nu(N2,j) = {sum} {}", pass_word(pass));
        }
        emit(&out, None)?;
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::mismatch(format!("decomposition mismatch for N1={n1}, N2={n2}")))
    }
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_simulate(model: &ModelArgs, config: Option<&Path>) -> CliResult {
    let mut cfg = RunConfig::default();
    if let Some(path) = config {
        cfg.apply_file(path)?;
    }
    cfg.apply_flags(model);
    cfg.validate()?;
    let mut series = simulate(&cfg.params, &cfg.initial.state(), &cfg.grid)?;
    series.push_meta(
        "initial",
        match &cfg.initial {
            config::Initial::Preset(InitialState::BellOuter) => "bell-outer",
            config::Initial::Preset(InitialState::BellInner) => "bell-inner",
            config::Initial::Custom(_) => "custom",
        },
    );
    emit(&render_series(&series, cfg.format), cfg.out.as_deref())
}

fn cmd_figure(id: u8, model: &ModelArgs, config: Option<&Path>) -> CliResult {
    let mut setup = figure_defaults(id)?;
    let mut cfg = RunConfig {
        params: setup.params,
        grid: setup.grid,
        initial: config::Initial::Preset(setup.initial),
        ..RunConfig::default()
    };
    if let Some(path) = config {
        cfg.apply_file(path)?;
    }
    cfg.apply_flags(model);
    // the swept coupling's flag sets where the sweep starts
    match id {
        5 => {
            if let Some(l) = model.lambda {
                cfg.grid.start = l;
            }
        }
        6 => {
            if let Some(g) = model.gamma {
                cfg.grid.start = g;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    setup.params = cfg.params;
    setup.grid = cfg.grid;
    setup.initial = match cfg.initial {
        config::Initial::Preset(p) => p,
        config::Initial::Custom(_) => return Err(CliError::bad_args("figures use a preset initial state")),
    };
    let series = figure(&setup)?;
    emit(&render_series(&series, cfg.format), cfg.out.as_deref())
}

fn oracle_summary(report: &OracleCheckReport, tol: f64) -> String {
    let mut out = format!(
        "runs: {}\nmax element deviation: {:.3e}\nmax concurrence deviation: {:.3e}\ntolerance: {tol:e}\n",
        report.runs.len(),
        report.max_element_deviation,
        report.max_concurrence_deviation
    );
    if let Some(w) = report.worst() {
        let p = &w.params;
        let _ = writeln!(
            out,
            "worst run: state={} bath={:?} scaling={:?} n={} lambda={} gamma={} mu={} delta={} h={} beta={}",
            w.state, p.bath, p.scaling, p.n_bath, p.lambda, p.gamma, p.mu, p.delta, p.h, p.beta
        );
        for e in &w.report.entries {
            let _ = writeln!(
                out,
                "  t[{}]: max |Δρ| = {:.3e} at {:?}, |ΔC| = {:.3e} {}",
                e.index,
                e.max_element_deviation,
                e.worst_element,
                e.concurrence_deviation,
                pass_word(e.pass)
            );
        }
    }
    let _ = writeln!(out, "result: {}", pass_word(report.pass));
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle_check(
    n: u32,
    seed: u64,
    tol: f64,
    draws: usize,
    fixed: [Option<f64>; 5],
    scaling: Option<ScalingArg>,
    format: OutputFormat,
) -> CliResult {
    if !(1..=3).contains(&n) {
        return Err(CliError::bad_args(format!("oracle-check needs 1 ≤ N ≤ 3, got {n}")));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(CliError::bad_args("tol must be nonnegative"));
    }
    let report = if fixed.iter().any(Option::is_some) || scaling.is_some() {
        let [lambda, gamma, mu, delta, hbeta] = fixed.map(|v| v.unwrap_or(0.0));
        let mut runs = Vec::new();
        for bath in [BathType::DeltaZ, BathType::SigmaZ] {
            let params = ModelParams {
                lambda,
                gamma,
                mu,
                delta,
                h: hbeta,
                beta: 1.0,
                n_bath: n,
                bath,
                scaling: scaling.map(Into::into).unwrap_or_default(),
            };
            runs.extend(run_fixed_check(&params, seed, &ORACLE_TIMES, tol)?.runs);
        }
        let max_element_deviation = runs.iter().map(|r| r.report.max_element_deviation).fold(0.0, f64::max);
        let max_concurrence_deviation = runs.iter().map(|r| r.report.max_concurrence_deviation).fold(0.0, f64::max);
        let pass = runs.iter().all(|r| r.report.pass);
        OracleCheckReport { runs, max_element_deviation, max_concurrence_deviation, pass }
    } else {
        let mut cfg = OracleCheckConfig::new(n, seed, tol);
        cfg.draws = draws;
        run_oracle_check(&cfg)?
    };
    if format == OutputFormat::Json {
        print_json(&report)?;
    } else {
        emit(&oracle_summary(&report, tol), None)?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::mismatch(format!(
            "oracle deviation {:.3e} exceeds tolerance {tol:e}",
            report.max_element_deviation.max(report.max_concurrence_deviation)
        )))
    }
}

fn cmd_asymptote(lambda: f64, gamma: f64, format: OutputFormat) -> CliResult {
    let c = c_infinity(lambda, gamma)?;
    let f = f_asymptote(lambda, gamma)?;
    let x = 2.0 * lambda.abs() / gamma.abs();
    if format == OutputFormat::Json {
        return print_json(
            &json!({"lambda": lambda, "gamma": gamma, "x": x, "erfcx": erfcx(x), "c_infinity": c, "f_infinity": f}),
        );
    }
    emit(
        &format!("lambda,gamma,x,erfcx,c_infinity,f_infinity\n{lambda:.16e},{gamma:.16e},{x:.16e},{:.16e},{c:.16e},{f:.16e}\n", erfcx(x)),
        None,
    )
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Multiplicity { n, j, format } => cmd_multiplicity(n, j, format),
        Command::Wigner3j { labels } => cmd_wigner3j(&labels),
        Command::VerifyDecomposition { n1, n2, format } => cmd_verify_decomposition(n1, n2, format),
        Command::Simulate { model, config } => cmd_simulate(&model, config.as_deref()),
        Command::Figure { id, model, config } => cmd_figure(id, &model, config.as_deref()),
        Command::OracleCheck { n, seed, tol, draws, lambda, gamma, mu, delta, hbeta, scaling, format } => {
            cmd_oracle_check(n, seed, tol, draws, [lambda, gamma, mu, delta, hbeta], scaling, format)
        }
        Command::Asymptote { lambda, gamma, format } => cmd_asymptote(lambda, gamma, format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(CliError::BAD_ARGS) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
