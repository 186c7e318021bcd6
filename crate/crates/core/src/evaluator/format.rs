use std::fmt::Write as _;

use crate::heap::{Heap, HeapAddress, Payload};

/// Nesting depth past which the printer emits `...`.
pub const MAX_PRINT_DEPTH: usize = 1000;

/// Renders a value the way the REPL prints it.
pub fn format_value(heap: &Heap, value: HeapAddress) -> String {
    let mut out = String::new();
    write_value(heap, value, 0, &mut out);
    out
}

fn write_value(heap: &Heap, value: HeapAddress, depth: usize, out: &mut String) {
    if depth > MAX_PRINT_DEPTH {
        out.push_str("...");
        return;
    }
    if value.is_nil() {
        out.push_str("NIL");
        return;
    }
    match heap.payload(value) {
        Payload::Integer(n) => write!(out, "{n}").unwrap(),
        Payload::Symbol(id) => out.push_str(heap.symbols().name(id)),
        Payload::Boolean(true) => out.push_str("#T"),
        Payload::Boolean(false) => out.push_str("#F"),
        Payload::Builtin(b) => write!(out, "#<builtin {}>", b.name()).unwrap(),
        Payload::Lambda { .. } => out.push_str("#<lambda>"),
        Payload::Record { .. } => write!(out, "#<record {value}>").unwrap(),
        Payload::Cons { car, mut cdr } => {
            out.push('(');
            write_value(heap, car, depth + 1, out);
            loop {
                if cdr.is_nil() {
                    break;
                }
                match heap.payload(cdr) {
                    Payload::Cons { car, cdr: next } => {
                        out.push(' ');
                        write_value(heap, car, depth + 1, out);
                        cdr = next;
                    }
                    _ => {
                        out.push_str(" . ");
                        write_value(heap, cdr, depth + 1, out);
                        break;
                    }
                }
            }
            out.push(')');
        }
    }
}
