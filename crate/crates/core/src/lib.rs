//! A small Lisp whose every value lives in an explicitly managed heap,
//! collected by one of three interchangeable stop-the-world collectors:
//! tri-color mark-sweep, Cheney semispace copying, and Lisp-2 sliding
//! compaction.

pub mod bench;
pub mod cli;
pub mod collectors;
pub mod evaluator;
pub mod heap;
pub mod metrics;
pub mod reader;

pub use collectors::CollectorKind;
pub use evaluator::{Error, EvalError, Interpreter, InterpreterConfig};
pub use heap::{Heap, HeapAddress, HeapConfig, Payload};
