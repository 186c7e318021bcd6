use std::process::ExitCode;
use std::thread;

// Deep recursion in the evaluator needs far more than the default stack.
const STACK_BYTES: usize = 1 << 30;

fn main() -> ExitCode {
    let args: Vec<_> = std::env::args_os().collect();
    let code = thread::Builder::new()
        .name("microlisp".into())
        .stack_size(STACK_BYTES)
        .spawn(move || microlisp::cli::main_with_args(args))
        .expect("failed to spawn interpreter thread")
        .join()
        .unwrap_or(101);
    ExitCode::from(code as u8)
}
