//! Eval/apply over heap-resident expressions.
//!
//! Environments are association lists of `(symbol . value)` pairs built
//! from ordinary cons cells. A closure captures the local association list
//! it was created in; lookups fall through to the global list, which lives
//! in a dedicated root slot and is the only thing DEFINE touches.
//!
//! Every address the evaluator needs across an allocation is kept on the
//! heap's root stack and re-read from there, since a moving collector may
//! relocate it.

mod builtins;
mod format;

use thiserror::Error;

pub use builtins::values_equal;
pub use format::{format_value, MAX_PRINT_DEPTH};

use crate::heap::{
    Builtin, Heap, HeapAddress, HeapConfig, HeapError, Payload, RootHandle, SymbolId,
};
use crate::reader::{self, ReadError, Reader};

pub const DEFAULT_DEPTH_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound symbol: {0}")]
    UnboundSymbol(String),
    #[error("not callable: {0}")]
    NotCallable(String),
    #[error("{name} expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("CAR of non-list: {0}")]
    CarOfNonList(String),
    #[error("CDR of non-list: {0}")]
    CdrOfNonList(String),
    #[error("{op}: expected an integer, got {value}")]
    TypeMismatch { op: String, value: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("recursion limit of {0} applications exceeded")]
    RecursionLimit(usize),
    #[error("malformed {0} form")]
    Malformed(&'static str),
    #[error(transparent)]
    Heap(#[from] HeapError),
}

/// Any failure of read or eval.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Error {
    pub fn is_out_of_memory(&self) -> bool {
        matches!(
            self,
            Error::Read(ReadError::Heap(HeapError::OutOfMemory { .. }))
                | Error::Eval(EvalError::Heap(HeapError::OutOfMemory { .. }))
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterpreterConfig {
    pub heap: HeapConfig,
    pub depth_limit: usize,
}

impl InterpreterConfig {
    pub fn new(heap: HeapConfig) -> Self {
        InterpreterConfig {
            heap,
            depth_limit: DEFAULT_DEPTH_LIMIT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Special {
    Quote,
    Cond,
    Define,
    Lambda,
    And,
    Or,
}

const SPECIAL_FORMS: [(&str, Special); 6] = [
    ("QUOTE", Special::Quote),
    ("COND", Special::Cond),
    ("DEFINE", Special::Define),
    ("LAMBDA", Special::Lambda),
    ("AND", Special::And),
    ("OR", Special::Or),
];

/// What a reserved symbol id denotes. Builtins are interned first, then the
/// special forms, so the id indexes this table directly.
#[derive(Clone, Copy, Debug)]
enum Reserved {
    Builtin(Builtin),
    Special(Special),
}

pub struct Interpreter {
    heap: Heap,
    globals: RootHandle,
    reserved: Vec<Reserved>,
    depth: usize,
    depth_limit: usize,
}

impl Interpreter {
    pub fn new(config: InterpreterConfig) -> Self {
        let mut heap = Heap::new(config.heap);
        let mut reserved = Vec::new();
        for b in Builtin::ALL {
            let id = heap.intern(b.name());
            debug_assert_eq!(id.0 as usize, reserved.len());
            reserved.push(Reserved::Builtin(b));
        }
        for (name, s) in SPECIAL_FORMS {
            heap.intern(name);
            reserved.push(Reserved::Special(s));
        }
        let globals = heap.push_root(HeapAddress::NIL);
        Interpreter {
            heap,
            globals,
            reserved,
            depth: 0,
            depth_limit: config.depth_limit,
        }
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    pub fn heap_mut(&mut self) -> &mut Heap {
        &mut self.heap
    }

    /// Head of the global association list.
    pub fn globals(&self) -> HeapAddress {
        self.heap.root(self.globals)
    }

    pub fn format(&self, value: HeapAddress) -> String {
        format_value(&self.heap, value)
    }

    /// Reads and evaluates every form in `source`, handing each formatted
    /// result to `emit`. Stops at the first error.
    pub fn run_source(&mut self, source: &str, mut emit: impl FnMut(String)) -> Result<(), Error> {
        let tokens = reader::tokenize(source);
        let mut reader = Reader::new(&tokens);
        while let Some(form) = reader.next_form(&mut self.heap)? {
            let value = self.eval_toplevel(form)?;
            emit(self.format(value));
        }
        Ok(())
    }

    /// Reads exactly one form from `line` and evaluates it. Blank input
    /// yields `None`.
    pub fn eval_line(&mut self, line: &str) -> Result<Option<String>, Error> {
        let tokens = reader::tokenize(line);
        match reader::parse(&tokens, &mut self.heap)? {
            None => Ok(None),
            Some(form) => {
                let value = self.eval_toplevel(form)?;
                Ok(Some(self.format(value)))
            }
        }
    }

    /// Evaluates `form` in the global environment.
    pub fn eval_toplevel(&mut self, form: HeapAddress) -> Result<HeapAddress, EvalError> {
        self.depth = 0;
        let base = self.heap.roots().len();
        let result = self.eval(form, HeapAddress::NIL);
        self.heap.roots_mut().truncate(base);
        result
    }

    fn reserved(&self, id: SymbolId) -> Option<Reserved> {
        self.reserved.get(id.0 as usize).copied()
    }

    fn symbol_name(&self, id: SymbolId) -> String {
        self.heap.symbols().name(id).to_owned()
    }

    #[inline]
    fn car(&self, addr: HeapAddress) -> HeapAddress {
        match self.heap.payload(addr) {
            Payload::Cons { car, .. } => car,
            _ => unreachable!("car of non-cons"),
        }
    }

    #[inline]
    fn cdr(&self, addr: HeapAddress) -> HeapAddress {
        match self.heap.payload(addr) {
            Payload::Cons { cdr, .. } => cdr,
            _ => unreachable!("cdr of non-cons"),
        }
    }

    fn is_cons(&self, addr: HeapAddress) -> bool {
        !addr.is_nil() && self.heap.payload(addr).is_cons()
    }

    /// Elements of a proper list, or `None` if `list` is improper.
    fn list_items(&self, mut list: HeapAddress) -> Option<Vec<HeapAddress>> {
        let mut items = Vec::new();
        while !list.is_nil() {
            if !self.is_cons(list) {
                return None;
            }
            items.push(self.car(list));
            list = self.cdr(list);
        }
        Some(items)
    }

    fn exactly<const N: usize>(&self, list: HeapAddress) -> Option<[HeapAddress; N]> {
        self.list_items(list)?.try_into().ok()
    }

    fn truthy(&self, value: HeapAddress) -> bool {
        !value.is_nil() && self.heap.payload(value) != Payload::Boolean(false)
    }

    fn boolean(&mut self, b: bool) -> Result<HeapAddress, EvalError> {
        Ok(self.heap.allocate(Payload::Boolean(b))?)
    }

    fn lookup(&self, id: SymbolId, env: HeapAddress) -> Result<HeapAddress, EvalError> {
        for mut list in [env, self.globals()] {
            while !list.is_nil() {
                let pair = self.car(list);
                if self.heap.payload(self.car(pair)) == Payload::Symbol(id) {
                    return Ok(self.cdr(pair));
                }
                list = self.cdr(list);
            }
        }
        Err(EvalError::UnboundSymbol(self.symbol_name(id)))
    }

    /// Global binding pair for `id`, if any.
    fn global_pair(&self, id: SymbolId) -> Option<HeapAddress> {
        let mut list = self.globals();
        while !list.is_nil() {
            let pair = self.car(list);
            if self.heap.payload(self.car(pair)) == Payload::Symbol(id) {
                return Some(pair);
            }
            list = self.cdr(list);
        }
        None
    }

    /// Evaluates `expr` in `env`. The result is not rooted.
    pub fn eval(&mut self, expr: HeapAddress, env: HeapAddress) -> Result<HeapAddress, EvalError> {
        let base = self.heap.roots().len();
        let result = self.eval_rooted(expr, env);
        self.heap.roots_mut().truncate(base);
        result
    }

    fn eval_rooted(
        &mut self,
        expr: HeapAddress,
        env: HeapAddress,
    ) -> Result<HeapAddress, EvalError> {
        if expr.is_nil() {
            return Ok(HeapAddress::NIL);
        }
        match self.heap.payload(expr) {
            Payload::Symbol(id) => match self.reserved(id) {
                Some(Reserved::Builtin(b)) => Ok(self.heap.allocate(Payload::Builtin(b))?),
                Some(Reserved::Special(_)) => Err(EvalError::Malformed("special")),
                None => self.lookup(id, env),
            },
            Payload::Cons { car: head, .. } => {
                let expr_h = self.heap.push_root(expr);
                let env_h = self.heap.push_root(env);
                if let Some(id) = self.symbol_id(head) {
                    match self.reserved(id) {
                        Some(Reserved::Special(s)) => return self.eval_special(s, expr_h, env_h),
                        Some(Reserved::Builtin(b)) => {
                            let (args_base, n) = self.eval_args(expr_h, env_h)?;
                            return self.apply_builtin(b, args_base, n);
                        }
                        None => {}
                    }
                }
                let op = self.eval(head, env)?;
                let op_h = self.heap.push_root(op);
                let (args_base, n) = self.eval_args(expr_h, env_h)?;
                match self.heap.payload(self.heap.root(op_h)) {
                    Payload::Builtin(b) => self.apply_builtin(b, args_base, n),
                    Payload::Lambda { .. } => self.apply_lambda(op_h, args_base, n),
                    _ => Err(EvalError::NotCallable(self.format(self.heap.root(op_h)))),
                }
            }
            _ => Ok(expr),
        }
    }

    fn symbol_id(&self, addr: HeapAddress) -> Option<SymbolId> {
        match addr.is_nil() {
            true => None,
            false => match self.heap.payload(addr) {
                Payload::Symbol(id) => Some(id),
                _ => None,
            },
        }
    }

    /// Evaluates the operands of the application at `expr_h` left to right,
    /// pushing each value on the root stack. Returns the stack position of
    /// the first value and the count.
    fn eval_args(
        &mut self,
        expr_h: RootHandle,
        env_h: RootHandle,
    ) -> Result<(usize, usize), EvalError> {
        let cursor = self.heap.push_root(self.cdr(self.heap.root(expr_h)));
        let base = self.heap.roots().len();
        let mut n = 0;
        loop {
            let rest = self.heap.root(cursor);
            if rest.is_nil() {
                break;
            }
            if !self.is_cons(rest) {
                return Err(EvalError::Malformed("application"));
            }
            let value = self.eval(self.car(rest), self.heap.root(env_h))?;
            self.heap.push_root(value);
            n += 1;
            let rest = self.heap.root(cursor);
            self.heap.set_root(cursor, self.cdr(rest));
        }
        Ok((base, n))
    }

    fn apply_lambda(
        &mut self,
        lambda_h: RootHandle,
        args_base: usize,
        n: usize,
    ) -> Result<HeapAddress, EvalError> {
        let Payload::Lambda { params, env, .. } = self.heap.payload(self.heap.root(lambda_h))
        else {
            unreachable!()
        };
        let expected = self.list_items(params).map_or(0, |p| p.len());
        if expected != n {
            return Err(EvalError::ArityMismatch {
                name: "LAMBDA".into(),
                expected,
                got: n,
            });
        }
        if self.depth >= self.depth_limit {
            return Err(EvalError::RecursionLimit(self.depth_limit));
        }
        let env_h = self.heap.push_root(env);
        let params_h = self.heap.push_root(params);
        for i in 0..n {
            let param = self.car(self.heap.root(params_h));
            let pair = self.heap.cons(param, self.heap.roots().at(args_base + i))?;
            let frame = self.heap.cons(pair, self.heap.root(env_h))?;
            self.heap.set_root(env_h, frame);
            let rest = self.cdr(self.heap.root(params_h));
            self.heap.set_root(params_h, rest);
        }
        let Payload::Lambda { body, .. } = self.heap.payload(self.heap.root(lambda_h)) else {
            unreachable!()
        };
        self.depth += 1;
        let result = self.eval(body, self.heap.root(env_h));
        self.depth -= 1;
        result
    }

    fn eval_special(
        &mut self,
        form: Special,
        expr_h: RootHandle,
        env_h: RootHandle,
    ) -> Result<HeapAddress, EvalError> {
        let args = self.cdr(self.heap.root(expr_h));
        match form {
            Special::Quote => match self.exactly::<1>(args) {
                Some([quoted]) => Ok(quoted),
                None => Err(EvalError::Malformed("QUOTE")),
            },
            Special::Lambda => {
                let Some([params, body]) = self.exactly::<2>(args) else {
                    return Err(EvalError::Malformed("LAMBDA"));
                };
                let all_symbols = self
                    .list_items(params)
                    .is_some_and(|ps| ps.iter().all(|p| self.symbol_id(*p).is_some()));
                if !all_symbols {
                    return Err(EvalError::Malformed("LAMBDA"));
                }
                Ok(self.heap.allocate(Payload::Lambda {
                    params,
                    body,
                    env: self.heap.root(env_h),
                })?)
            }
            Special::Define => {
                let Some([name, value_expr]) = self.exactly::<2>(args) else {
                    return Err(EvalError::Malformed("DEFINE"));
                };
                let Some(id) = self.symbol_id(name) else {
                    return Err(EvalError::Malformed("DEFINE"));
                };
                if self.reserved(id).is_some() {
                    return Err(EvalError::Malformed("DEFINE"));
                }
                let value = self.eval(value_expr, self.heap.root(env_h))?;
                if let Some(pair) = self.global_pair(id) {
                    self.heap
                        .write_field(pair, crate::heap::Field::Cdr, value)?;
                } else {
                    let value_h = self.heap.push_root(value);
                    // The name symbol is re-read: the value's evaluation may
                    // have moved the defining form.
                    let name = self.car(self.cdr(self.heap.root(expr_h)));
                    let pair = self.heap.cons(name, self.heap.root(value_h))?;
                    let globals = self.heap.cons(pair, self.globals())?;
                    self.heap.set_root(self.globals, globals);
                }
                Ok(HeapAddress::NIL)
            }
            Special::Cond => {
                let clauses_h = self.heap.push_root(args);
                loop {
                    let clauses = self.heap.root(clauses_h);
                    if clauses.is_nil() {
                        return Ok(HeapAddress::NIL);
                    }
                    if !self.is_cons(clauses) {
                        return Err(EvalError::Malformed("COND"));
                    }
                    let clause = self.car(clauses);
                    let Some(parts) = self.list_items(clause) else {
                        return Err(EvalError::Malformed("COND"));
                    };
                    let (test, consequent) = match parts.as_slice() {
                        [test] => (*test, None),
                        [test, consequent] => (*test, Some(*consequent)),
                        _ => return Err(EvalError::Malformed("COND")),
                    };
                    let value = self.eval(test, self.heap.root(env_h))?;
                    if self.truthy(value) {
                        return match consequent {
                            None => Ok(value),
                            Some(_) => {
                                // Re-read: evaluating the test may have moved the clause.
                                let clause = self.car(self.heap.root(clauses_h));
                                let consequent = self.car(self.cdr(clause));
                                self.eval(consequent, self.heap.root(env_h))
                            }
                        };
                    }
                    let rest = self.cdr(self.heap.root(clauses_h));
                    self.heap.set_root(clauses_h, rest);
                }
            }
            Special::And | Special::Or => {
                let is_and = form == Special::And;
                let rest_h = self.heap.push_root(args);
                loop {
                    let rest = self.heap.root(rest_h);
                    if rest.is_nil() {
                        return self.boolean(is_and);
                    }
                    if !self.is_cons(rest) {
                        return Err(EvalError::Malformed(if is_and { "AND" } else { "OR" }));
                    }
                    let value = self.eval(self.car(rest), self.heap.root(env_h))?;
                    if self.truthy(value) != is_and {
                        return self.boolean(!is_and);
                    }
                    let rest = self.cdr(self.heap.root(rest_h));
                    self.heap.set_root(rest_h, rest);
                }
            }
        }
    }
}
