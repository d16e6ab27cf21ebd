//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 the `verify` input is not
//! an Ulam tuple, 3 numerical failure (with `--strict`, any path that hit
//! the step budget or ended singular).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::cvec::{format_complex, parse_tuple, CVec};
use crate::enumerate::{enumerate_ulam, PathStats, SolutionSet};
use crate::error::UlamError;
use crate::homotopy::TrackerConfig;
use crate::map::{iterate_map, verify_fixed_point};
use crate::oracle::{exact_verify_rational, multistart_newton, oracle_u3, parse_rational_tuple, DEFAULT_BOX_RADIUS};
use crate::polyroots::{roots_aberth, MonicPoly, RootFindConfig};

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "ULAM_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_ULAM: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ulam", version, about = "Enumerate and verify Ulam polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find every Ulam polynomial of degree N by homotopy continuation.
    Enumerate(EnumerateArgs),
    /// Check whether a tuple is a fixed point.
    Verify(VerifyArgs),
    /// Print the forward orbit of a tuple.
    Orbit(OrbitArgs),
    /// Roots of the monic polynomial with the given coefficients.
    Roots(RootsArgs),
    /// Independent solution sets for cross-checking.
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Multistart,
    Elimination,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Exit with status 3 if any path failed.
    #[arg(long)]
    strict: bool,
    /// Worker threads (default: $ULAM_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[arg(short = 'n', long = "degree")]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated entries such as "1,-1,-1" or "0.5+2i,0.5-2i".
    #[arg(long, allow_hyphen_values = true)]
    tuple: String,
    /// Check in exact rational arithmetic (real entries; decimals or p/q).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[arg(long, allow_hyphen_values = true)]
    tuple: String,
    #[arg(long)]
    iters: usize,
}

#[derive(Args, Debug)]
struct RootsArgs {
    /// Coefficients c_1..c_n of z^n + c_1 z^{n-1} + ... + c_n.
    #[arg(long, allow_hyphen_values = true)]
    coeffs: String,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(short = 'n', long = "degree")]
    n: usize,
    #[arg(long, default_value_t = 20000)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Multistart)]
    method: Method,
    /// Sampling radius for multistart.
    #[arg(long, default_value_t = DEFAULT_BOX_RADIUS)]
    radius: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Everything needed to reproduce a run.
///
/// Thread count and wall-clock time are left out so that output bytes do
/// not depend on the machine; the duration is reported on stderr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub degree: usize,
    pub seed: u64,
    pub config: TrackerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub residual: f64,
    pub is_real: bool,
    pub is_trivial: bool,
    pub cluster_size: usize,
    pub condition: f64,
}

impl SolutionRecord {
    pub fn point(&self) -> Result<CVec, UlamError> {
        if self.re.len() != self.im.len() {
            return Err(UlamError::LengthMismatch { expected: self.re.len(), actual: self.im.len() });
        }
        CVec::from_parts(&self.re, &self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathsRecord {
    pub total: usize,
    pub converged: usize,
    pub diverged: usize,
    pub max_steps: usize,
    pub singular: usize,
}

impl From<PathStats> for PathsRecord {
    fn from(s: PathStats) -> Self {
        PathsRecord {
            total: s.total,
            converged: s.converged,
            diverged: s.diverged,
            max_steps: s.max_steps,
            singular: s.singular,
        }
    }
}

/// The JSON document written by `enumerate` and `oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub degree: usize,
    pub seed: u64,
    pub solutions: Vec<SolutionRecord>,
    pub paths: PathsRecord,
    pub manifest: RunManifest,
}

impl SolutionDocument {
    pub fn new(set: &SolutionSet, manifest: RunManifest) -> Self {
        let solutions = set
            .solutions
            .iter()
            .map(|s| SolutionRecord {
                re: s.x.re(),
                im: s.x.im(),
                residual: s.residual_norm,
                is_real: s.is_real,
                is_trivial: s.is_trivial,
                cluster_size: s.cluster_size,
                condition: s.condition_estimate,
            })
            .collect();
        SolutionDocument {
            degree: set.degree,
            seed: set.seed,
            solutions,
            paths: set.path_stats.into(),
            manifest,
        }
    }

    /// Pretty JSON with every float at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter(PrettyFormatter::new()));
        self.serialize(&mut ser).expect("serializing to memory cannot fail");
        buf.push(b'\n');
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_csv(&self) -> String {
        let n = self.degree;
        let mut header: Vec<String> = (1..=n).map(|k| format!("re_{k}")).collect();
        header.extend((1..=n).map(|k| format!("im_{k}")));
        header.extend(["residual", "is_real", "is_trivial"].map(String::from));
        let mut out = header.join(",");
        out.push('\n');
        for s in &self.solutions {
            let mut row: Vec<String> = s.re.iter().chain(&s.im).map(|v| fmt_sig(*v)).collect();
            row.push(fmt_sig(s.residual));
            row.push(s.is_real.to_string());
            row.push(s.is_trivial.to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn fmt_sig(v: f64) -> String {
    format!("{v:.16e}")
}

/// `PrettyFormatter` with floats written as `d.dddddddddddddddde±x`.
struct SigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_sig(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// A failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<UlamError> for Failure {
    fn from(e: UlamError) -> Self {
        let code = match e {
            UlamError::NoConvergence { .. } | UlamError::SingularJacobian | UlamError::OracleMismatch(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(format!("I/O error: {e}"))
    }
}

/// Runs with the process's stdout and stderr. `argv[0]` is the program name.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_command_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs with explicit output streams; returns the exit code.
pub fn run_command_with_io<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Enumerate(a) => cmd_enumerate(a, out, err),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Orbit(a) => cmd_orbit(a, out, err),
        Command::Roots(a) => cmd_roots(a, out),
        Command::Oracle(a) => cmd_oracle(a, out, err),
    };
    let _ = out.flush();
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<usize, Failure> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if n == 0 {
        return Err(Failure::usage("thread count must be at least 1"));
    }
    Ok(n)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn emit(doc: &SolutionDocument, set: &SolutionSet, args: &OutputArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let text = match args.format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(),
    };
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    for w in &set.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let s = set.path_stats;
    if args.strict && (s.max_steps > 0 || s.singular > 0) {
        let _ = writeln!(err, "error: {} paths hit the step limit, {} ended singular", s.max_steps, s.singular);
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn cmd_enumerate(a: EnumerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let threads = thread_count(a.output.threads)?;
    let cfg = TrackerConfig::with_seed(a.seed);
    let start = Instant::now();
    let set = in_pool(threads, || enumerate_ulam(a.n, &cfg))??;
    let _ = writeln!(
        err,
        "enumerate: degree {} gave {} solutions from {} paths in {:.3}s",
        a.n,
        set.solutions.len(),
        set.path_stats.total,
        start.elapsed().as_secs_f64()
    );
    let manifest = RunManifest {
        command: "enumerate".into(),
        degree: a.n,
        seed: a.seed,
        config: cfg,
        method: None,
        starts: None,
        radius: None,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    emit(&SolutionDocument::new(&set, manifest), &set, &a.output, out, err)
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let threads = thread_count(a.output.threads)?;
    let start = Instant::now();
    let (set, method, starts, radius) = match a.method {
        Method::Multistart => {
            let set = in_pool(threads, || multistart_newton(a.n, a.starts, a.radius, a.seed))??;
            (set, "multistart", Some(a.starts), Some(a.radius))
        }
        Method::Elimination => {
            if a.n != 3 {
                return Err(Failure::usage("elimination is only available for degree 3"));
            }
            (oracle_u3()?, "elimination", None, None)
        }
    };
    let _ = writeln!(
        err,
        "oracle: degree {} gave {} solutions in {:.3}s",
        a.n,
        set.solutions.len(),
        start.elapsed().as_secs_f64()
    );
    let manifest = RunManifest {
        command: "oracle".into(),
        degree: a.n,
        seed: set.seed,
        config: set.config,
        method: Some(method.into()),
        starts,
        radius,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    emit(&SolutionDocument::new(&set, manifest), &set, &a.output, out, err)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let ok = if a.exact {
        if a.tuple.contains(['i', 'I']) {
            return Err(Failure::usage("--exact accepts real rational entries only"));
        }
        let q = parse_rational_tuple(&a.tuple)?;
        let ok = exact_verify_rational(&q);
        writeln!(out, "exact: {}", if ok { "fixed point" } else { "not a fixed point" })?;
        ok
    } else {
        let x = parse_tuple(&a.tuple)?;
        let (ok, res) = verify_fixed_point(&x, a.tol)?;
        writeln!(out, "residual: {res:e}")?;
        writeln!(out, "{}", if ok { "fixed point" } else { "not a fixed point" })?;
        ok
    };
    Ok(if ok { EXIT_OK } else { EXIT_NOT_ULAM })
}

fn cmd_orbit(a: OrbitArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let x = parse_tuple(&a.tuple)?;
    let orbit = iterate_map(&x, a.iters)?;
    for (k, p) in orbit.points.iter().enumerate() {
        writeln!(out, "{k}: {p}")?;
    }
    if orbit.diverged {
        let _ = writeln!(err, "orbit: escaped after {} iterates", orbit.points.len() - 1);
    }
    Ok(EXIT_OK)
}

fn cmd_roots(a: RootsArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let c = parse_tuple(&a.coeffs)?;
    let roots = roots_aberth(&MonicPoly::new(c)?, &RootFindConfig::default())?;
    for r in &roots {
        writeln!(out, "{}", format_complex(*r))?;
    }
    Ok(EXIT_OK)
}
