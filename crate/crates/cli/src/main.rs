//! `nabla-frac`: operators, boundary problems, Green's kernels and Lyapunov
//! checks from the command line.
//!
//! Exit codes: 0 success, 1 refutation or failed verification, 2 usage or
//! input error.

mod ingest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nabla_frac::bvp::{bvp_solve_direct, ivp_solve, BvpShape, BvpSpec, InitialConditions, IvpSpec};
use nabla_frac::calculus::{caputo_diff, frac_sum};
use nabla_frac::export::{kernel_csv, kernel_json, reports_csv};
use nabla_frac::greens::{greens_closed_form, greens_kernel, solve_nonhomogeneous_full};
use nabla_frac::lyapunov::{
    lyapunov_report, synth_critical_instance, system_matrix, BoundaryPattern, Variant,
    RANK_TOLERANCE,
};
use nabla_frac::parallel::{thread_cap_from_env, with_thread_cap, Execution};
use nabla_frac::verify::{run_criterion, VerifyConfig, VerifyReport, CRITERIA, DEFAULT_SEED};
use nabla_frac::{linalg, Error, Grid, GridFunction, Order};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("input: {0}")]
    Input(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(
                Error::SingularSystem | Error::BudgetExhausted { .. } | Error::Consistency(_),
            ) => 1,
            CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "nabla-frac", version, about = "Nabla Caputo fractional difference toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the Caputo difference or the fractional sum to a grid function.
    Eval(EvalArgs),
    /// Solve an initial value problem.
    SolveIvp(IvpArgs),
    /// Solve a (k, N-k) boundary value problem.
    SolveBvp(BvpArgs),
    /// Tabulate the Green's kernel of a (k, N-k) problem.
    Greens(GreensArgs),
    /// Check a potential against its Lyapunov threshold.
    Lyapunov(LyapunovArgs),
    /// Run the acceptance suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OrderArgs {
    /// Order nu > 0.
    #[arg(long)]
    nu: f64,
    /// Left endpoint a.
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
}

#[derive(Args)]
struct IntervalArgs {
    #[command(flatten)]
    order: OrderArgs,
    /// Right endpoint b; b - a must be a positive integer.
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    order: OrderArgs,
    #[arg(long, value_enum, default_value = "caputo")]
    op: Operator,
    /// Grid function, CSV `n,value` or JSON `{a, lo, hi, values}`; `-` reads stdin.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Operator {
    Caputo,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitKind {
    /// `nabla^k x(a) = c_k`
    Derivatives,
    /// `x(a - i) = A_i`
    Points,
}

#[derive(Args)]
struct IvpArgs {
    #[command(flatten)]
    interval: IntervalArgs,
    /// The N initial values, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    init: Vec<f64>,
    #[arg(long, value_enum, default_value = "points")]
    init_kind: InitKind,
    /// Forcing h on a+1..=b; zero when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Potential q in `+ q(t) x(t-1)`; needs point initial values.
    #[arg(long)]
    q: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct ShapeArgs {
    #[command(flatten)]
    interval: IntervalArgs,
    /// Number of left conditions.
    #[arg(long)]
    k: usize,
    /// Orders of the right conditions, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    j: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BvpMethod {
    Direct,
    Greens,
}

#[derive(Args)]
struct BvpArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Left values `nabla^i x(a-N+k)`, i < k; zero when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    left: Vec<f64>,
    /// Right values `nabla^{j_m} x(b)`; zero when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    right: Vec<f64>,
    /// Forcing h on a+1..=b; zero when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "direct")]
    method: BvpMethod,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct GreensArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Use the closed form (needs k = N-1) in its own sign convention.
    #[arg(long)]
    closed_form: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct LyapunovArgs {
    #[command(flatten)]
    interval: IntervalArgs,
    /// conjugate_A or focal_H2; lower-order conditions default to a-1.
    #[arg(long, conflicts_with = "pattern")]
    variant: Option<Variant>,
    /// Placements of the lower-order conditions, e.g. `a-1,b`.
    #[arg(long, requires = "variant")]
    placements: Option<String>,
    /// Full pattern label, e.g. `focal_H2[a-1,b]`.
    #[arg(long)]
    pattern: Option<String>,
    /// Potential q on a+1..=b.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    q: Option<PathBuf>,
    /// Synthesize a potential with a nontrivial solution instead.
    #[arg(long)]
    synth: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Relative singular-value cutoff for nontriviality.
    #[arg(long, default_value_t = RANK_TOLERANCE)]
    rank_tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Comma-separated subset of criteria 1..=8; all when omitted.
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u32>,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
    /// Emit the full report instead of summary lines.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn order(nu: f64) -> Result<Order, CliError> {
    Order::new(nu).map_err(|e| CliError::Usage(format!("--nu: {e}")))
}

/// `b - a`, which must be a positive integer.
fn span(a: f64, b: f64) -> Result<i64, CliError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(CliError::Usage("--a and --b must be finite".into()));
    }
    let d = b - a;
    let r = d.round();
    if (d - r).abs() > 1e-9 * d.abs().max(1.0) || r < 1.0 {
        return Err(CliError::Usage(format!(
            "b - a = {d} must be a positive integer"
        )));
    }
    Ok(r as i64)
}

fn bvp_shape(s: &ShapeArgs) -> Result<BvpShape, CliError> {
    let i = &s.interval;
    let o = order(i.order.nu)?;
    Ok(BvpShape::new(o, i.order.a, span(i.order.a, i.b)?, s.k, s.j.clone())?)
}

fn forcing(path: Option<&PathBuf>, a: f64, span: i64) -> Result<GridFunction, CliError> {
    match path {
        Some(p) => ingest::read_grid_function(p, a),
        None => Ok(GridFunction::zeros(Grid::new(a, 1, span)?)),
    }
}

fn grid_function_out(f: &GridFunction, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json(f),
        Format::Csv => Ok(ingest::grid_function_csv(f)),
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Output(e.to_string()))
}

struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

fn eval(args: &EvalArgs) -> Result<Outcome, CliError> {
    let f = ingest::read_grid_function(&args.input, args.order.a)?;
    let out = match args.op {
        Operator::Caputo => caputo_diff(&f, order(args.order.nu)?, 0)?,
        Operator::Sum => frac_sum(&f, args.order.nu, 0)?,
    };
    Ok(Outcome::ok(grid_function_out(&out, args.format)?))
}

fn solve_ivp(args: &IvpArgs) -> Result<Outcome, CliError> {
    let i = &args.interval;
    let o = order(i.order.nu)?;
    let span = span(i.order.a, i.b)?;
    let rhs = forcing(args.input.as_ref(), i.order.a, span)?.restrict(1, span)?;
    let potential = args
        .q
        .as_ref()
        .map(|p| ingest::read_grid_function(p, i.order.a))
        .transpose()?;
    let initial = match args.init_kind {
        InitKind::Derivatives => InitialConditions::Derivatives(args.init.clone()),
        InitKind::Points => InitialConditions::PointValues(args.init.clone()),
    };
    let spec = IvpSpec {
        order: o,
        a: 0,
        rhs,
        initial,
        potential,
    };
    Ok(Outcome::ok(grid_function_out(&ivp_solve(&spec)?, args.format)?))
}

fn values_or_zero(v: &[f64], n: usize) -> Vec<f64> {
    if v.is_empty() {
        vec![0.0; n]
    } else {
        v.to_vec()
    }
}

fn solve_bvp(args: &BvpArgs) -> Result<Outcome, CliError> {
    let shape = bvp_shape(&args.shape)?;
    let h = forcing(args.input.as_ref(), shape.base(), shape.span())?;
    let left = values_or_zero(&args.left, shape.k());
    let right = values_or_zero(&args.right, shape.j_orders().len());
    let spec = BvpSpec::new(shape, left, right, h)?;
    let x = match args.method {
        BvpMethod::Direct => bvp_solve_direct(&spec)?.x,
        BvpMethod::Greens => solve_nonhomogeneous_full(&spec)?,
    };
    Ok(Outcome::ok(grid_function_out(&x, args.format)?))
}

fn greens(args: &GreensArgs) -> Result<Outcome, CliError> {
    let shape = bvp_shape(&args.shape)?;
    let kernel = if args.closed_form {
        let n = shape.n() as usize;
        if shape.k() != n - 1 {
            return Err(CliError::Usage(format!(
                "--closed-form needs --k {} for N = {n}",
                n - 1
            )));
        }
        greens_closed_form(shape.order(), shape.j_orders()[0], shape.base(), shape.span())?
    } else {
        greens_kernel(&shape)?
    };
    let text = match args.format {
        Format::Json => json(&kernel_json(&kernel)?)?,
        Format::Csv => kernel_csv(&kernel)?,
    };
    Ok(Outcome::ok(text))
}

fn pattern(args: &LyapunovArgs, n: usize) -> Result<BoundaryPattern, CliError> {
    if let Some(label) = &args.pattern {
        return label.parse().map_err(|e: Error| CliError::Usage(format!("--pattern: {e}")));
    }
    let Some(variant) = args.variant else {
        return Err(CliError::Usage("one of --variant or --pattern is required".into()));
    };
    match &args.placements {
        None => Ok(BoundaryPattern::all_left(variant, n)),
        Some(p) => format!("{}[{p}]", variant.name())
            .parse()
            .map_err(|e: Error| CliError::Usage(format!("--placements: {e}"))),
    }
}

fn lyapunov(args: &LyapunovArgs) -> Result<Outcome, CliError> {
    let i = &args.interval;
    let o = order(i.order.nu)?;
    let span = span(i.order.a, i.b)?;
    let pattern = pattern(args, o.n_ceil())?;
    let q = match &args.q {
        Some(p) => ingest::read_grid_function(p, i.order.a)?,
        None => {
            let inst = with_thread_cap(thread_cap_from_env(), || {
                synth_critical_instance(o, span, &pattern, args.seed)
            })?;
            GridFunction::new(Grid::new(i.order.a, 1, span)?, inst.q.into_values())?
        }
    };
    let mut report = lyapunov_report(o, i.order.a, span, &q, &pattern, Some(args.seed))?;
    if args.rank_tol != RANK_TOLERANCE {
        let ratio = linalg::singular_value_ratio(&system_matrix(o, span, &q, &pattern)?);
        report.nontrivial_exists = ratio < args.rank_tol;
    }
    let text = match args.format {
        Format::Json => json(&report)?,
        Format::Csv => reports_csv(std::slice::from_ref(&report))?,
    };
    Ok(Outcome {
        text,
        code: if report.is_refutation() { 1 } else { 0 },
    })
}

fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let criteria: Vec<u32> = if args.criteria.is_empty() {
        CRITERIA.iter().map(|&(c, _)| c).collect()
    } else {
        args.criteria.clone()
    };
    if let Some(c) = criteria.iter().find(|c| !CRITERIA.iter().any(|(k, _)| k == *c)) {
        return Err(CliError::Usage(format!("--criteria: no criterion {c} (expected 1..=8)")));
    }
    let cfg = VerifyConfig {
        seed: args.seed,
        exec: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let report = with_thread_cap(thread_cap_from_env(), || VerifyReport {
        seed: cfg.seed,
        suites: criteria.iter().map(|&c| run_criterion(c, &cfg)).collect(),
    });
    let text = match args.format {
        Some(Format::Json) => json(&report)?,
        Some(Format::Csv) => {
            let mut s = String::from("criterion,name,checks,failures,passed\n");
            for r in &report.suites {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.criterion,
                    r.name.replace(',', ";"),
                    r.checks,
                    r.failures,
                    r.passed()
                ));
            }
            s
        }
        None => {
            let mut s = format!("seed {}\n", report.seed);
            for r in &report.suites {
                s.push_str(&r.summary_line());
                s.push('\n');
                for f in &r.failure_samples {
                    s.push_str(&format!("    failure: {f}\n"));
                }
            }
            let failed = report.suites.iter().filter(|r| !r.passed()).count();
            s.push_str(&format!("{} of {} criteria passed\n", report.suites.len() - failed, report.suites.len()));
            s
        }
    };
    Ok(Outcome {
        text,
        code: if report.passed() { 0 } else { 1 },
    })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Eval(a) => eval(a),
        Command::SolveIvp(a) => solve_ivp(a),
        Command::SolveBvp(a) => solve_bvp(a),
        Command::Greens(a) => greens(a),
        Command::Lyapunov(a) => lyapunov(a),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
