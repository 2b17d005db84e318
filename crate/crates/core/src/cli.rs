//! The `polybern` command line.
//!
//! Exit codes: `0` when every check passes or is skipped, `1` when a check
//! is violated, `2` for usage errors (bad flags, malformed literals,
//! invalid orders, unwritable paths).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bernoulli::{self, Backend, ParamVector, SheppOlkinPath};
use crate::entropy::{self, EntropyOrder, Family, Method};
use crate::error::{Error, Result};
use crate::mixing;
use crate::rational::{self, Rational};
use crate::sweep::{self, Format, Mode, SweepSpec};
use crate::verification::{self, Constraint, SearchConfig, Suite, SCHEMA_VERSION};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "POLYBERN_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "polybern", version, about = "Entropy of Poisson–binomial laws along one-coordinate paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mass function of the sum of the given Bernoulli variables.
    Pmf {
        params: Vec<String>,
        #[command(flatten)]
        backend: BackendFlags,
    },
    /// Shannon, Rényi or Tsallis entropy of the sum.
    Entropy {
        params: Vec<String>,
        #[command(flatten)]
        order: OrderFlags,
        #[command(flatten)]
        backend: BackendFlags,
    },
    /// First and second derivative of the entropy as the last parameter moves.
    Derivative {
        #[arg(required = true)]
        params: Vec<String>,
        #[command(flatten)]
        order: OrderFlags,
        #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
        method: MethodArg,
        /// Step for --method fd.
        #[arg(long, default_value_t = entropy::DEFAULT_STEP)]
        h: f64,
    },
    /// Mixing coefficients of the law of the given coins, extended by a fair coin.
    Mixing {
        params: Vec<String>,
        #[arg(long, default_value_t = 3)]
        rmax: usize,
    },
    /// Run check suites; the last parameter is the moving coordinate.
    Verify {
        #[arg(required = true)]
        params: Vec<String>,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 5)]
        rmax: usize,
        /// Seed for the random test tables of the identities suite.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter sweep written as CSV or JSON.
    Sweep(SweepArgs),
    /// Tsallis derivative for (1/2 − ε, 1/2) against its leading term, for q > 2.
    Counterexample {
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Number of times ε is halved.
        #[arg(long, default_value_t = 4)]
        halvings: usize,
    },
    /// Seeded search for negative Tsallis derivatives with q in (0, 2].
    Search {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        q_min: f64,
        #[arg(long, default_value_t = 2.0)]
        q_max: f64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        rmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct BackendFlags {
    /// Exact rational arithmetic (default).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Binary64 arithmetic.
    #[arg(long)]
    float: bool,
}

impl BackendFlags {
    fn backend(&self) -> Backend {
        if self.float {
            Backend::Float
        } else {
            Backend::Exact
        }
    }
}

#[derive(Args, Debug)]
struct OrderFlags {
    #[arg(long, value_enum, default_value_t = FamilyArg::Shannon)]
    family: FamilyArg,
    /// Order; required for renyi and tsallis.
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FamilyArg {
    Shannon,
    Renyi,
    Tsallis,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Direct,
    Mixing,
    Fd,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SuiteArg {
    All,
    Monotonicity,
    Spacing,
    Appendix,
    Identities,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Grid,
    Random,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ConstraintArg {
    Half,
    Open,
    Unit,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON sweep spec; flags given alongside override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Number of coins including the moving one.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lo: Option<String>,
    #[arg(long)]
    hi: Option<String>,
    #[arg(long)]
    step: Option<String>,
    /// Value of the moving (last) coordinate.
    #[arg(long)]
    last: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    constraint: Option<ConstraintArg>,
    /// Comma-separated Tsallis orders for extra derivative columns.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long)]
    rmax: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses arguments (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Pmf { params, backend } => cmd_pmf(&params, backend.backend(), out),
        Command::Entropy {
            params,
            order,
            backend,
        } => cmd_entropy(&params, &order, backend.backend(), out),
        Command::Derivative {
            params,
            order,
            method,
            h,
        } => cmd_derivative(&params, &order, method, h, out),
        Command::Mixing { params, rmax } => cmd_mixing(&params, rmax, out),
        Command::Verify {
            params,
            suite,
            rmax,
            seed,
            out: path,
        } => cmd_verify(&params, suite, rmax, seed, path.as_deref(), out),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Counterexample { q, eps, halvings } => cmd_counterexample(q, eps, halvings, out),
        Command::Search {
            samples,
            seed,
            q_min,
            q_max,
            n_min,
            n_max,
            rmax,
            out: path,
        } => {
            let config = SearchConfig {
                n_min,
                n_max,
                q_min,
                q_max,
                samples,
                seed,
                r_max: rmax,
            };
            cmd_search(&config, path.as_deref(), out)
        }
    }
}

fn entropy_order(flags: &OrderFlags) -> Result<EntropyOrder> {
    let family = match flags.family {
        FamilyArg::Shannon => Family::Shannon,
        FamilyArg::Renyi => Family::Renyi,
        FamilyArg::Tsallis => Family::Tsallis,
    };
    match (family, flags.q) {
        (Family::Shannon, None) => Ok(EntropyOrder::shannon()),
        (_, None) => Err(Error::Config("--q is required for renyi and tsallis".into())),
        (f, Some(q)) => EntropyOrder::new(f, q),
    }
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    match path {
        Some(p) => {
            let mut file = File::create(p)
                .map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))?;
            writeln!(file, "{text}")?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn with_schema(mut value: Value) -> Value {
    if let Value::Object(map) = &mut value {
        map.insert("schema".into(), json!(SCHEMA_VERSION));
    }
    value
}

fn cmd_pmf(params: &[String], backend: Backend, out: &mut dyn Write) -> Result<i32> {
    let params = ParamVector::parse(params)?;
    let f = bernoulli::pmf(&params, backend);
    writeln!(out, "{}", f.to_strings().join(" "))?;
    Ok(EXIT_OK)
}

fn cmd_entropy(
    params: &[String],
    flags: &OrderFlags,
    backend: Backend,
    out: &mut dyn Write,
) -> Result<i32> {
    let order = entropy_order(flags)?;
    let params = ParamVector::parse(params)?;
    let f = bernoulli::pmf(&params, backend);
    let value = entropy::entropy(&f, order)?;
    emit_json(
        &with_schema(json!({
            "params": params,
            "family": order.family,
            "q": order.q,
            "entropy": value,
        })),
        None,
        out,
    )?;
    Ok(EXIT_OK)
}

fn cmd_derivative(
    params: &[String],
    flags: &OrderFlags,
    method: MethodArg,
    h: f64,
    out: &mut dyn Write,
) -> Result<i32> {
    let order = entropy_order(flags)?;
    if order.family != Family::Shannon && order.q == 1.0 {
        return Err(Error::InvalidOrder {
            q: 1.0,
            reason: "q = 1 is the Shannon case; use --family shannon",
        });
    }
    let params = ParamVector::parse(params)?;
    let path = SheppOlkinPath::from_params(&params)?;
    let record = match method {
        MethodArg::Direct => entropy::derivative(&path, order, Method::Direct)?,
        MethodArg::Mixing => entropy::derivative(&path, order, Method::Mixing)?,
        MethodArg::Fd => entropy::finite_difference(&path, order, h)?,
    };
    let mut value = serde_json::to_value(&record).map_err(|e| Error::Io(e.to_string()))?;
    if let Value::Object(map) = &mut value {
        map.insert("params".into(), json!(params));
        map.insert("family".into(), json!(order.family));
        map.insert("q".into(), json!(order.q));
    }
    emit_json(&with_schema(value), None, out)?;
    Ok(EXIT_OK)
}

fn cmd_mixing(params: &[String], r_max: usize, out: &mut dyn Write) -> Result<i32> {
    if r_max == 0 {
        return Err(Error::ZeroOrder);
    }
    let params = ParamVector::parse(params)?;
    let g = bernoulli::pmf(&params, Backend::Exact);
    let f = bernoulli::shifted_mixture(&g, &rational::half())?;
    let profile = mixing::mixing_profile(&g)?;
    let chains = (1..=r_max)
        .map(|r| mixing::s_chain(&g, &f, &profile, r))
        .collect::<Result<Vec<_>>>()?;
    let fmt = |xs: &[Rational]| xs.iter().map(rational::format).collect::<Vec<_>>();
    emit_json(
        &with_schema(json!({
            "params": params,
            "g": g.to_strings(),
            "f": f.to_strings(),
            "alphas": fmt(&profile.alphas),
            "betas": fmt(&profile.betas),
            "spacings": fmt(&profile.spacings()),
            "chains": chains,
        })),
        None,
        out,
    )?;
    Ok(EXIT_OK)
}

fn suite_of(arg: SuiteArg) -> Suite {
    match arg {
        SuiteArg::All => Suite::All,
        SuiteArg::Monotonicity => Suite::Monotonicity,
        SuiteArg::Spacing => Suite::Spacing,
        SuiteArg::Appendix => Suite::Appendix,
        SuiteArg::Identities => Suite::Identities,
    }
}

fn cmd_verify(
    params: &[String],
    suite: SuiteArg,
    r_max: usize,
    seed: u64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let params = ParamVector::parse(params)?;
    let mut report = verification::run_suite(&params, suite_of(suite), r_max, seed)?;
    report.set_info("skipped", json!(report.has_skips()));
    emit_json(&report, path, out)?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

/// Builds a pool honouring [`THREADS_ENV`], if set.
fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::Config(e.to_string()))
}

fn in_pool<T: Send>(job: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(match thread_pool()? {
        Some(pool) => pool.install(job),
        None => job(),
    })
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Io(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => SweepSpec::default(),
    };
    if let Some(m) = args.mode {
        spec.mode = match m {
            ModeArg::Grid => Mode::Grid,
            ModeArg::Random => Mode::Random,
        };
    }
    if let Some(n) = args.n {
        spec.n = n;
    }
    for (field, text) in [
        (&mut spec.lo, &args.lo),
        (&mut spec.hi, &args.hi),
        (&mut spec.step, &args.step),
        (&mut spec.last, &args.last),
    ] {
        if let Some(t) = text {
            *field = rational::parse(t)?;
        }
    }
    if let Some(s) = args.samples {
        spec.samples = s;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(c) = args.constraint {
        spec.constraint = match c {
            ConstraintArg::Half => Constraint::Half,
            ConstraintArg::Open => Constraint::Open,
            ConstraintArg::Unit => Constraint::Unit,
        };
    }
    if let Some(qs) = &args.q {
        spec.qs = qs.clone();
    }
    if let Some(r) = args.rmax {
        spec.r_max = r;
    }
    if let Some(f) = args.format {
        spec.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    spec.validate()?;
    Ok(spec)
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = sweep_spec(args)?;
    let rows = in_pool(|| sweep::run(&spec))??;
    match &args.out {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            sweep::write(&spec, &rows, &mut w)?;
            w.flush()?;
        }
        None => sweep::write(&spec, &rows, &mut *out)?,
    }
    Ok(EXIT_OK)
}

fn cmd_counterexample(q: f64, eps: f64, halvings: usize, out: &mut dyn Write) -> Result<i32> {
    let mut rows = Vec::with_capacity(halvings + 1);
    let mut previous: Option<f64> = None;
    let mut e = eps;
    for _ in 0..=halvings {
        let (exact, leading) = entropy::counterexample_leading_term(q, e)?;
        let gap = (exact - leading).abs();
        let ratio = previous.map(|p| p / gap);
        rows.push(json!({
            "eps": e,
            "exact": exact,
            "leading": leading,
            "gap": gap,
            "gap_ratio": ratio,
        }));
        previous = Some(gap);
        e /= 2.0;
    }
    emit_json(&with_schema(json!({ "q": q, "rows": rows })), None, out)?;
    Ok(EXIT_OK)
}

fn cmd_search(config: &SearchConfig, path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let report = in_pool(|| verification::search_tsallis(config))??;
    emit_json(&report, path, out)?;
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}
