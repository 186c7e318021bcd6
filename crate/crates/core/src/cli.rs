//! Command-line front end: REPL, script runner and benchmark sweeper.

use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;

use clap::Parser;

use crate::bench::run_benchmark_sweep;
use crate::collectors::CollectorKind;
use crate::evaluator::{Interpreter, InterpreterConfig, DEFAULT_DEPTH_LIMIT};
use crate::heap::HeapConfig;
use crate::metrics::{render_report, BenchRow, BenchStatus, CSV_HEADER};
use crate::reader::{tokenize, TokenKind};

pub const PROMPT: &str = "minilisp> ";

pub const EXIT_OK: i32 = 0;
pub const EXIT_EVAL_ERROR: i32 = 1;
pub const EXIT_OUT_OF_MEMORY: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Parses a byte count, accepting an optional `K`/`KB`/`M`/`MB` suffix
/// (powers of 1024).
pub fn parse_bytes(text: &str) -> Result<usize, String> {
    let t = text.trim().to_ascii_uppercase();
    let (digits, unit) = if let Some(d) = t.strip_suffix("KB").or_else(|| t.strip_suffix('K')) {
        (d, 1024)
    } else if let Some(d) = t.strip_suffix("MB").or_else(|| t.strip_suffix('M')) {
        (d, 1024 * 1024)
    } else {
        (t.as_str(), 1)
    };
    let n: usize = digits
        .parse()
        .map_err(|_| format!("invalid byte count '{text}'"))?;
    match n.checked_mul(unit) {
        Some(b) if b > 0 => Ok(b),
        _ => Err(format!("invalid byte count '{text}'")),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "microlisp",
    version,
    about = "A small Lisp on a managed heap with swappable garbage collectors"
)]
pub struct Args {
    /// Collector: mark-sweep, cheney or lisp2.
    #[arg(long = "gc", default_value = "cheney")]
    pub collector: CollectorKind,

    /// Total arena size. Under cheney the mutator sees half of it.
    #[arg(long, default_value = "10240", value_parser = parse_bytes)]
    pub heap_bytes: usize,

    /// Evaluate a script file instead of starting the REPL.
    #[arg(long)]
    pub script: Option<PathBuf>,

    /// Run the benchmark script across --sizes x --collectors and emit CSV.
    #[arg(long)]
    pub bench: bool,

    /// Heap sizes for --bench.
    #[arg(long, value_delimiter = ',', value_parser = parse_bytes,
          default_value = "8K,10K,12K,15K")]
    pub sizes: Vec<usize>,

    /// Collectors for --bench.
    #[arg(long, value_delimiter = ',', default_value = "mark-sweep,cheney")]
    pub collectors: Vec<CollectorKind>,

    /// Write timing results as CSV to this file instead of stdout.
    #[arg(long)]
    pub stats_csv: Option<PathBuf>,

    /// Collect before every allocation.
    #[arg(long)]
    pub stress_gc: bool,

    /// Maximum nesting of function applications.
    #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
    pub depth_limit: usize,

    /// Check heap invariants after every collection.
    #[arg(long)]
    pub verify_heap: bool,
}

impl Args {
    pub fn interpreter_config(&self) -> InterpreterConfig {
        InterpreterConfig {
            heap: HeapConfig::new(self.heap_bytes, self.collector)
                .with_stress(self.stress_gc)
                .with_verify(self.verify_heap),
            depth_limit: self.depth_limit,
        }
    }
}

fn paren_balance(text: &str) -> isize {
    tokenize(text)
        .iter()
        .map(|t| match t.kind {
            TokenKind::LeftParen => 1,
            TokenKind::RightParen => -1,
            _ => 0,
        })
        .sum()
}

/// Interactive loop. With `echo`, each input line is written after the
/// prompt, so piped sessions read like a terminal transcript. Errors are
/// reported and the session continues; the timing report is printed at end
/// of input.
pub fn run_repl<R: BufRead, W: Write>(
    config: InterpreterConfig,
    mut input: R,
    out: &mut W,
    echo: bool,
) -> io::Result<Interpreter> {
    let mut interp = Interpreter::new(config);
    let mut pending = String::new();
    let mut line = String::new();
    loop {
        if !echo && pending.is_empty() {
            write!(out, "{PROMPT}")?;
            out.flush()?;
        }
        line.clear();
        if input.read_line(&mut line)? == 0 {
            if !echo {
                writeln!(out)?;
            }
            break;
        }
        if echo {
            let prefix = if pending.is_empty() { PROMPT } else { "" };
            writeln!(out, "{prefix}{}", line.trim_end_matches(['\n', '\r']))?;
        }
        pending.push_str(&line);
        if paren_balance(&pending) > 0 {
            continue;
        }
        match interp.eval_line(&pending) {
            Ok(Some(value)) => writeln!(out, "{value}")?,
            Ok(None) => {}
            Err(e) => writeln!(out, "ERROR: {e}")?,
        }
        pending.clear();
    }
    if !pending.trim().is_empty() {
        if let Err(e) = interp.eval_line(&pending) {
            writeln!(out, "ERROR: {e}")?;
        }
    }
    write!(out, "{}", render_report(interp.heap().timing()))?;
    out.flush()?;
    Ok(interp)
}

/// Evaluates a whole script, one result per line, then the report.
/// Returns the process exit code.
pub fn run_script<W: Write, E: Write>(
    config: InterpreterConfig,
    source: &str,
    out: &mut W,
    err: &mut E,
) -> io::Result<(i32, Interpreter)> {
    let mut interp = Interpreter::new(config);
    let mut write_error = None;
    let result = interp.run_source(source, |value| {
        if write_error.is_none() {
            if let Err(e) = writeln!(out, "{value}") {
                write_error = Some(e);
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e);
    }
    match result {
        Ok(()) => {
            write!(out, "{}", render_report(interp.heap().timing()))?;
            Ok((EXIT_OK, interp))
        }
        Err(e) => {
            writeln!(err, "error: {e}")?;
            let code = if e.is_out_of_memory() {
                EXIT_OUT_OF_MEMORY
            } else {
                EXIT_EVAL_ERROR
            };
            Ok((code, interp))
        }
    }
}

fn write_csv<W: Write>(out: &mut W, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    Ok(())
}

fn emit_csv(path: Option<&PathBuf>, rows: &[BenchRow]) -> io::Result<()> {
    match path {
        Some(p) => write_csv(&mut fs::File::create(p)?, rows),
        None => write_csv(&mut io::stdout().lock(), rows),
    }
}

fn run_row(args: &Args, interp: &Interpreter, status: BenchStatus) -> BenchRow {
    BenchRow {
        heap_bytes: args.heap_bytes,
        collector: args.collector.name().to_owned(),
        stats: *interp.heap().timing(),
        status,
    }
}

/// Entry point shared by the binary and tests.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if HeapConfig::new(args.heap_bytes, args.collector).capacity_slots() < 2 {
        eprintln!("error: --heap-bytes {} is too small", args.heap_bytes);
        return EXIT_USAGE;
    }
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn run(args: &Args) -> io::Result<i32> {
    if args.bench {
        let rows = run_benchmark_sweep(&args.sizes, &args.collectors, args.depth_limit);
        emit_csv(args.stats_csv.as_ref(), &rows)?;
        return Ok(EXIT_OK);
    }
    let config = args.interpreter_config();
    if let Some(path) = &args.script {
        let source = match fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return Ok(EXIT_USAGE);
            }
        };
        let (code, interp) =
            run_script(config, &source, &mut io::stdout().lock(), &mut io::stderr())?;
        if args.stats_csv.is_some() {
            let status = match code {
                EXIT_OK => BenchStatus::Ok,
                EXIT_OUT_OF_MEMORY => BenchStatus::OutOfMemory,
                _ => BenchStatus::Error,
            };
            emit_csv(args.stats_csv.as_ref(), &[run_row(args, &interp, status)])?;
        }
        return Ok(code);
    }
    let stdin = io::stdin();
    let echo = !stdin.is_terminal();
    let interp = run_repl(config, stdin.lock(), &mut io::stdout().lock(), echo)?;
    if args.stats_csv.is_some() {
        emit_csv(
            args.stats_csv.as_ref(),
            &[run_row(args, &interp, BenchStatus::Ok)],
        )?;
    }
    Ok(EXIT_OK)
}
