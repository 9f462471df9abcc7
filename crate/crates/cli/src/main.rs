use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdperm_core::harness::BoundRecord;
use mdperm_core::{
    evaluate_all, gen, omega_ratio_report, paper_example, parse_matrix, permanent, permanent_auto, run_fuzz,
    write_matrix, BoundName, BoundOptions, Error, Exec, FuzzConfig, GenChoice, GenSpec, Method, MultiMatrix,
    PermConfig,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "mdperm",
    version,
    about = "Permanents of multidimensional (0,1) matrices and their upper bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the exact permanent of a matrix.
    Compute(ComputeArgs),
    /// Evaluate upper bounds on the permanent.
    Bounds(BoundsArgs),
    /// Generate random instances and check every bound against the exact permanent.
    Fuzz(FuzzArgs),
    /// Print a built-in matrix in mdm format.
    Example(ExampleArgs),
    /// Report per A / (n!^(d-2) e^(-n)) for random one-per-line matrices.
    Omega(OmegaArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltIn {
    Paper,
}

#[derive(Args)]
struct InputArgs {
    /// mdm file to read, or `-` for stdin.
    #[arg(conflicts_with_all = ["example", "spec"])]
    input: Option<PathBuf>,
    /// Use a built-in matrix instead of a file.
    #[arg(long, value_enum)]
    example: Option<BuiltIn>,
    /// Regenerate a matrix from a generator spec, e.g. "uniform d=3 n=4 p=0.5 seed=42".
    #[arg(long, conflicts_with = "example")]
    spec: Option<String>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest number of terms an exact algorithm may visit.
    #[arg(long, default_value_t = mdperm_core::permanent::DEFAULT_TERM_BUDGET)]
    budget_terms: u64,
    /// Largest order accepted by the Ryser kernel.
    #[arg(long, default_value_t = mdperm_core::permanent::DEFAULT_RYSER_MAX_ORDER)]
    ryser_max_n: usize,
}

impl BudgetArgs {
    fn config(&self) -> PermConfig {
        PermConfig {
            term_budget: self.budget_terms,
            ryser_max_order: self.ryser_max_n,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Naive,
    Laplace,
    Decompose,
    Ryser,
    Auto,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Slice dimension minus one for `--method decompose` (1 <= k <= d-2).
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Also write the result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// `all` or a comma-separated list of bound names.
    #[arg(long, default_value = "all")]
    which: String,
    /// Minimize the covering bound over all axis orders.
    #[arg(long)]
    minimize_axis_orders: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenArg {
    Uniform,
    FixedSums,
    BlockDiagonal,
    OnePerLine,
    Mixed,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "mixed")]
    gen: GenArg,
    /// Density for `--gen uniform`; drawn per instance when omitted.
    #[arg(long)]
    p: Option<f64>,
    /// Hyperplane sums for `--gen fixed-sums`.
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<u64>>,
    /// Require every other axis to get near-equal hyperplane sums too.
    #[arg(long)]
    strict: bool,
    /// Block orders for `--gen block-diagonal`; random when omitted.
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    #[arg(long, default_value = "all")]
    which: String,
    #[arg(long)]
    minimize_axis_orders: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Write the full report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ExampleArgs {
    #[arg(value_enum, default_value = "paper")]
    name: BuiltIn,
}

#[derive(Args)]
struct OmegaArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(String),
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::BudgetExceeded { .. }) => 3,
            CliError::Core(Error::Numerical(_)) => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("MDPERM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("MDPERM_THREADS must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn run(command: Command) -> CliResult<ExitCode> {
    match command {
        Command::Compute(args) => compute(args),
        Command::Bounds(args) => bounds(args),
        Command::Fuzz(args) => fuzz(args),
        Command::Example(args) => {
            let BuiltIn::Paper = args.name;
            print!("{}", write_matrix(&paper_example()));
            Ok(ExitCode::SUCCESS)
        }
        Command::Omega(args) => omega(args),
    }
}

fn load(input: &InputArgs) -> CliResult<MultiMatrix> {
    if let Some(BuiltIn::Paper) = input.example {
        return Ok(paper_example());
    }
    if let Some(spec) = &input.spec {
        let spec: GenSpec = spec.parse()?;
        return Ok(gen(&spec)?);
    }
    let text = match input.input.as_deref() {
        None => {
            return Err(CliError::Usage(
                "no input: give a file, `-`, --example or --spec".into(),
            ))
        }
        Some(p) if p == Path::new("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Io(format!("reading stdin: {e}")))?;
            s
        }
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("reading {}: {e}", p.display())))?,
    };
    Ok(parse_matrix(&text)?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn json_log(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn compute(args: ComputeArgs) -> CliResult<ExitCode> {
    let a = load(&args.input)?;
    let cfg = args.budget.config();
    let method = match (args.method, args.k) {
        (MethodArg::Decompose, k) => Some(Method::Decompose { k: k.unwrap_or(1) }),
        (_, Some(_)) => return Err(CliError::Usage("--k is only meaningful with --method decompose".into())),
        (MethodArg::Naive, _) => Some(Method::Naive),
        (MethodArg::Laplace, _) => Some(Method::Laplace),
        (MethodArg::Ryser, _) => Some(Method::Ryser),
        (MethodArg::Auto, _) => None,
    };
    let start = Instant::now();
    let value = match method {
        Some(m) => permanent(&a, m, &cfg)?,
        None => permanent_auto(&a, &cfg)?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    println!("{value}");
    eprintln!("elapsed: {elapsed:.6} s");
    if let Some(path) = &args.json {
        let report = json!({
            "d": a.dim(),
            "n": a.order(),
            "method": method_label(method),
            "permanent": value.to_string(),
            "exact": value.is_exact(),
            "log_permanent": json_log(value.ln()),
            "elapsed_seconds": elapsed,
        });
        write_json(path, &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn method_label(method: Option<Method>) -> String {
    match method {
        None => "auto".into(),
        Some(Method::Naive) => "naive".into(),
        Some(Method::Laplace) => "laplace".into(),
        Some(Method::Ryser) => "ryser".into(),
        Some(Method::Decompose { k }) => format!("decompose k={k}"),
    }
}

fn parse_which(which: &str) -> CliResult<Vec<BoundName>> {
    if which.trim() == "all" {
        return Ok(BoundName::ALL.to_vec());
    }
    which
        .split(',')
        .map(|s| s.trim().parse::<BoundName>().map_err(CliError::from))
        .collect()
}

fn plain(v: f64) -> String {
    if !v.is_finite() || v >= 1e15 {
        return "-".into();
    }
    if (v - v.round()).abs() <= 1e-9 * v.max(1.0) {
        format!("{}", v.round())
    } else {
        format!("{v:.6}")
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn bounds(args: BoundsArgs) -> CliResult<ExitCode> {
    let a = load(&args.input)?;
    let opts = BoundOptions {
        which: parse_which(&args.which)?,
        minimize_axis_orders: args.minimize_axis_orders,
        perm: args.budget.config(),
    };
    let list = evaluate_all(&a, &opts)?;
    let per = match permanent_auto(&a, &opts.perm) {
        Ok(v) => Some(v),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let log_per = per.as_ref().map(|v| v.ln());
    let records: Vec<BoundRecord> = list.iter().map(|b| BoundRecord::new(b, log_per)).collect();

    let mut out = String::new();
    writeln!(
        out,
        "{:<18} {:<16} {:>20} {:>20} {:>7} {:>11} {:>6}",
        "bound", "variant", "log_value", "value", "proven", "applicable", "holds"
    )
    .unwrap();
    for r in &records {
        let holds = match r.holds.filter(|_| r.applicable) {
            Some(true) => "\u{2713}",
            Some(false) => "\u{2717}",
            None => "-",
        };
        writeln!(
            out,
            "{:<18} {:<16} {:>20} {:>20} {:>7} {:>11} {:>6}",
            r.name.as_str(),
            r.variant,
            format!("{:.12}", r.log_value),
            plain(r.log_value.exp()),
            flag(r.proven),
            flag(r.applicable),
            holds
        )
        .unwrap();
    }
    match (&per, log_per) {
        (Some(v), Some(l)) => writeln!(out, "permanent: {v} (log {l:.12})").unwrap(),
        _ => writeln!(out, "permanent: not computed (budget exceeded)").unwrap(),
    }
    print!("{out}");

    if let Some(path) = &args.json {
        let report = json!({
            "d": a.dim(),
            "n": a.order(),
            "permanent": per.as_ref().map(|v| v.to_string()),
            "log_permanent": log_per.map(json_log),
            "bounds": records,
        });
        write_json(path, &report)?;
    }
    let violated = records
        .iter()
        .any(|r| r.proven && r.applicable && r.holds == Some(false));
    Ok(if violated { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn fuzz(args: FuzzArgs) -> CliResult<ExitCode> {
    let choice = match args.gen {
        GenArg::Uniform => GenChoice::Uniform { p: args.p },
        GenArg::FixedSums => GenChoice::FixedSums {
            sums: args
                .r
                .clone()
                .ok_or_else(|| CliError::Usage("--gen fixed-sums needs --r r1,...,rn".into()))?,
            strict: args.strict,
        },
        GenArg::BlockDiagonal => GenChoice::BlockDiagonal {
            blocks: args.blocks.clone(),
        },
        GenArg::OnePerLine => GenChoice::OnePerLine,
        GenArg::Mixed => GenChoice::Mixed,
    };
    let mut cfg = FuzzConfig::new(args.d, args.n, args.count, args.seed, choice);
    cfg.bounds = BoundOptions {
        which: parse_which(&args.which)?,
        minimize_axis_orders: args.minimize_axis_orders,
        perm: args.budget.config(),
    };
    let report = run_fuzz(&cfg)?;
    for inst in report.instances.iter().filter(|i| i.proven_violation) {
        eprintln!("PROVEN BOUND VIOLATION: instance {} [{}]", inst.index, inst.spec);
    }
    for inst in report.instances.iter().filter(|i| i.conjecture_candidate) {
        println!("conjecture candidate: instance {} [{}]", inst.index, inst.spec);
    }
    println!("{}", report.summary_line());
    if let Some(path) = &args.json {
        write_json(path, &report)?;
    }
    Ok(if report.has_proven_violation() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn omega(args: OmegaArgs) -> CliResult<ExitCode> {
    let samples = omega_ratio_report(args.count, args.d, args.n, args.seed, &args.budget.config())?;
    for s in &samples {
        println!(
            "{:<40} per={:<10} ratio={:.6}",
            s.spec.to_string(),
            s.permanent,
            s.ratio
        );
    }
    Ok(ExitCode::SUCCESS)
}
