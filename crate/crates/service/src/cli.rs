//! Command-line front end: batch debugging, a terminal session, scripted
//! simulation and the HTTP server.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use kbdebug::dpi::{Dpi, IdSet, Mode};
use kbdebug::hstree::{non_interactive_debug, Limits};
use kbdebug::interactive::{scripted_answer, Session};
use kbdebug::logic::Formula;
use kbdebug::probability::{prior_diag_probs, FormulaProbs};
use kbdebug::query::Measure;

use crate::input::{load, parse_ids, InputError, ParamsSpec, ProbSource};

/// Exit code for unreadable, unparsable or non-admissible input and
/// failed sessions.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for bad flags.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kbdebug", version, about = "Interactive debugging of propositional knowledge bases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute diagnoses without queries and print them best-first.
    Debug(DebugArgs),
    /// Debug interactively, answering queries on the terminal.
    Interactive {
        file: PathBuf,
        #[command(flatten)]
        probs: ProbArgs,
        #[command(flatten)]
        session: SessionArgs,
    },
    /// Run a session against a simulated user who knows the faulty formulas.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        probs: ProbArgs,
        #[command(flatten)]
        session: SessionArgs,
        /// Ids of the faulty formulas, e.g. `5,7`.
        #[arg(long, value_name = "IDS", value_parser = parse_diag)]
        true_diag: IdSet,
    },
    /// Serve the HTTP/JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Debug, Args)]
pub struct DebugArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub probs: ProbArgs,
    #[arg(long)]
    pub nmin: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long, value_name = "MS", default_value_t = 1000)]
    pub timeout_ms: u64,
    /// Compute all minimal diagnoses.
    #[arg(long, conflicts_with_all = ["nmin", "nmax", "auto"])]
    pub all: bool,
    /// Return only the most probable diagnosis.
    #[arg(long)]
    pub auto: bool,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    /// Equal fault probability for every formula (the default).
    #[arg(long, conflicts_with = "probs")]
    pub uniform: bool,
    /// Element fault probability file.
    #[arg(long, value_name = "FILE")]
    pub probs: Option<PathBuf>,
    /// Adaptation factor applied to element-derived probabilities.
    #[arg(long, requires = "probs")]
    pub c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub nmin: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long, value_name = "MS")]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub pool_size: Option<usize>,
    #[arg(long)]
    pub measure: Option<Measure>,
}

impl SessionArgs {
    fn spec(&self) -> ParamsSpec {
        ParamsSpec {
            mode: self.mode,
            sigma: self.sigma,
            n_min: self.nmin,
            n_max: self.nmax,
            timeout_ms: self.timeout_ms,
            pool_size: self.pool_size,
            measure: self.measure,
        }
    }
}

fn parse_diag(s: &str) -> Result<IdSet, String> {
    Ok(parse_ids(s)?.into_iter().collect())
}

/// A failure with its exit code.
struct Failure(i32, String);

impl From<InputError> for Failure {
    fn from(e: InputError) -> Failure {
        let code = if matches!(e, InputError::Params(_)) { EXIT_USAGE } else { EXIT_INPUT };
        Failure(code, e.to_string())
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_files(file: &Path, probs: &ProbArgs) -> Result<(Dpi, FormulaProbs), Failure> {
    let source = match &probs.probs {
        Some(p) => ProbSource::Elements { text: read(p)?, c: probs.c },
        None => ProbSource::Uniform,
    };
    let text = read(file)?;
    load(&text, &source).map_err(|e| {
        let Failure(code, msg) = Failure::from(e);
        Failure(code, format!("{}: {msg}", file.display()))
    })
}

/// Renders ids as `[5 7]`.
pub fn fmt_diag(d: &IdSet) -> String {
    let parts: Vec<String> = d.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(" "))
}

fn fmt_query(q: &[Formula]) -> String {
    let parts: Vec<String> = q.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn print_state(s: &Session, out: &mut dyn Write) -> std::io::Result<()> {
    let mut entries = s.distribution().entries().to_vec();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (d, p) in entries {
        writeln!(out, "  {:<16} {p:.6}", fmt_diag(&d))?;
    }
    Ok(())
}

fn print_solution(s: &Session, out: &mut dyn Write) -> std::io::Result<()> {
    let sol = s.solution().expect("finished session");
    writeln!(out, "diagnosis {} with probability {:.6}", fmt_diag(&sol.diagnosis), sol.probability)?;
    writeln!(out, "repaired KB:")?;
    for f in &sol.kb {
        writeln!(out, "  {f}")?;
    }
    Ok(())
}

fn debug(args: &DebugArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (dpi, p) = load_files(&args.file, &args.probs)?;
    let limits = if args.all {
        Limits::all()
    } else {
        let n_min = args.nmin.unwrap_or(2);
        let n_max = args.nmax.unwrap_or(n_min);
        if n_min == 0 || n_max < n_min {
            return Err(Failure(EXIT_USAGE, format!("need 1 <= nmin <= nmax, got {n_min} and {n_max}")));
        }
        Limits::new(n_min, n_max, Duration::from_millis(args.timeout_ms))
    };
    let diags = non_interactive_debug(&dpi, limits, &p, args.auto).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    let dist = prior_diag_probs(&diags, &p);
    for d in &diags {
        writeln!(out, "{:<16} {:.6}", fmt_diag(d), dist.get(d).unwrap_or(0.0)).map_err(io_fail)?;
    }
    Ok(())
}

fn start(file: &Path, probs: &ProbArgs, args: &SessionArgs) -> Result<Session, Failure> {
    let params = args.spec().resolve()?;
    let (dpi, p) = load_files(file, probs)?;
    Session::start(dpi, p, params).map_err(|e| Failure(EXIT_INPUT, e.to_string()))
}

fn simulate(
    file: &Path,
    probs: &ProbArgs,
    args: &SessionArgs,
    truth: &IdSet,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut s = start(file, probs, args)?;
    if let Some(bad) = truth.iter().find(|&&i| i == 0 || i > s.dpi().len()) {
        return Err(Failure(EXIT_USAGE, format!("--true-diag: formula {bad} is not in the KB")));
    }
    if !s.dpi().is_diagnosis(truth) {
        return Err(Failure(EXIT_USAGE, format!("--true-diag: {} is not a diagnosis", fmt_diag(truth))));
    }
    let mut n = 0;
    while let Some(entry) = s.pending().cloned() {
        n += 1;
        let a = scripted_answer(truth, &entry.query, &s).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
        let pt = &entry.partition;
        writeln!(
            out,
            "query {n}: {}  (dx {}, dnx {}, dz {}) -> {a}",
            fmt_query(&entry.query),
            pt.dx.len(),
            pt.dnx.len(),
            pt.dz.len()
        )
        .map_err(io_fail)?;
        s.answer(a).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    }
    writeln!(out, "{n} queries").map_err(io_fail)?;
    print_solution(&s, out).map_err(io_fail)
}

fn interactive(
    file: &Path,
    probs: &ProbArgs,
    args: &SessionArgs,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut s = start(file, probs, args)?;
    let run =
        |s: &mut Session, input: &mut dyn BufRead, out: &mut dyn Write| -> std::io::Result<Result<bool, String>> {
            while let Some(entry) = s.pending().cloned() {
                writeln!(out, "leading diagnoses:")?;
                print_state(s, out)?;
                writeln!(out, "Is {} true in the intended KB?", fmt_query(&entry.query))?;
                loop {
                    write!(out, "[y]es / [n]o / [s]kip / [q]uit: ")?;
                    out.flush()?;
                    let mut line = String::new();
                    if input.read_line(&mut line)? == 0 {
                        return Ok(Ok(false));
                    }
                    let r = match line.trim().to_ascii_lowercase().as_str() {
                        "y" | "yes" | "t" | "true" => s.answer(true),
                        "n" | "no" | "f" | "false" => s.answer(false),
                        "s" | "skip" => s.skip(),
                        "q" | "quit" => return Ok(Ok(false)),
                        _ => continue,
                    };
                    match r {
                        Ok(()) => break,
                        Err(e) if s.pending().is_some() => writeln!(out, "{e}")?,
                        Err(e) => return Ok(Err(e.to_string())),
                    }
                }
            }
            Ok(Ok(true))
        };
    match run(&mut s, input, out).map_err(io_fail)? {
        Ok(true) => print_solution(&s, out).map_err(io_fail),
        Ok(false) => {
            writeln!(out, "stopped; leading diagnoses:").map_err(io_fail)?;
            print_state(&s, out).map_err(io_fail)
        }
        Err(msg) => Err(Failure(EXIT_INPUT, msg)),
    }
}

fn serve(host: IpAddr, port: u16) -> Result<(), Failure> {
    let rt = tokio::runtime::Runtime::new().map_err(io_fail)?;
    rt.block_on(crate::api::serve(SocketAddr::new(host, port))).map_err(io_fail)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Debug(args) => debug(args, out),
        Command::Interactive { file, probs, session } => interactive(file, probs, session, input, out),
        Command::Simulate { file, probs, session, true_diag } => simulate(file, probs, session, true_diag, out),
        Command::Serve { port, host } => serve(*host, *port),
    };
    match result {
        Ok(()) => 0,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
