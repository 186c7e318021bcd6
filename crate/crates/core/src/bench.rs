//! The benchmark script and the heap-size sweep driver.

use crate::collectors::CollectorKind;
use crate::evaluator::{Interpreter, InterpreterConfig};
use crate::heap::HeapConfig;
use crate::metrics::{BenchRow, BenchStatus, TimingStats};

/// Recursive definitions, list generation and a higher-order `map`; the
/// last form dominates the run with naive recursive Fibonacci.
pub const BENCHMARK_SCRIPT: &str = "\
(QUOTE A)
(QUOTE (A B C))
(CAR (QUOTE (A B C)))
(CDR (QUOTE (A B C)))
(CONS (QUOTE A) (QUOTE (B C)))
(= (CAR (QUOTE (A B))) (QUOTE A))
(= (CAR (CDR (QUOTE (A B)))) (QUOTE A))
(CAR (QUOTE (0 1)))
(CDR (CONS (+ 0 1) (+ 2 3)))
(DEFINE foo (+ 0 1))
foo
(DEFINE bar 0)
bar
(+ foo bar)
(COND (#T (+ 0 1)))
(COND ((= foo bar) 7) (#T 9))
(COND ((= (QUOTE A) (QUOTE B)) (QUOTE C)) ((NOT #F) (QUOTE yee)))
((LAMBDA (X) (+ X 1)) 5)
(DEFINE add (LAMBDA (X) (LAMBDA (Y) (+ X Y))))
((add 4) 5)
(DEFINE fac (LAMBDA (N) (COND ((= N 0) 1) (#T (* N (fac (- N 1)))))))
(fac 0)
(fac 10)
(DEFINE range (LAMBDA (LOW HIGH) (COND ((> LOW HIGH) NIL) (#T (CONS LOW (range (+ LOW 1) HIGH))))))
(range 0 100)
(DEFINE map (LAMBDA (f xs) (COND ((= xs NIL) NIL) (#T (CONS (f (CAR xs)) (map f (CDR xs)))))))
(map (LAMBDA (x) (+ x 1)) (range 0 50))
(map (LAMBDA (x) (fac x)) (range 0 15))
(DEFINE fib (LAMBDA (n) (COND ((OR (= n 0) (= n 1)) 1) (#T (+ (fib (- n 1)) (fib (- n 2)))))))
(map (LAMBDA (x) (fib x)) (range 0 20))
";

/// Outcome of one scripted run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub outputs: Vec<String>,
    pub stats: TimingStats,
    pub status: BenchStatus,
    pub error: Option<String>,
}

/// Evaluates `script` on a fresh interpreter.
pub fn run_script_source(config: InterpreterConfig, script: &str) -> RunOutcome {
    let mut interp = Interpreter::new(config);
    let mut outputs = Vec::new();
    let result = interp.run_source(script, |line| outputs.push(line));
    let (status, error) = match result {
        Ok(()) => (BenchStatus::Ok, None),
        Err(e) if e.is_out_of_memory() => (BenchStatus::OutOfMemory, Some(e.to_string())),
        Err(e) => (BenchStatus::Error, Some(e.to_string())),
    };
    RunOutcome {
        outputs,
        stats: *interp.heap().timing(),
        status,
        error,
    }
}

/// Runs the benchmark script once per (collector, heap size), collectors
/// outermost, with heap verification off.
pub fn run_benchmark_sweep(
    heap_sizes: &[usize],
    collectors: &[CollectorKind],
    depth_limit: usize,
) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &kind in collectors {
        for &bytes in heap_sizes {
            let config = InterpreterConfig {
                heap: HeapConfig::new(bytes, kind).with_verify(false),
                depth_limit,
            };
            let outcome = run_script_source(config, BENCHMARK_SCRIPT);
            rows.push(BenchRow {
                heap_bytes: bytes,
                collector: kind.name().to_owned(),
                stats: outcome.stats,
                status: outcome.status,
            });
        }
    }
    rows
}
