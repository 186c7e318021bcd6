use super::{EvalError, Interpreter};
use crate::heap::{Builtin, Heap, HeapAddress, Payload};

/// Deep structural equality. Integers, symbols and booleans compare by
/// value, conses element-wise, closures and records by identity.
pub fn values_equal(heap: &Heap, a: HeapAddress, b: HeapAddress) -> bool {
    let mut work = vec![(a, b)];
    while let Some((x, y)) = work.pop() {
        if x == y {
            continue;
        }
        if x.is_nil() || y.is_nil() {
            return false;
        }
        match (heap.payload(x), heap.payload(y)) {
            (Payload::Cons { car: xa, cdr: xd }, Payload::Cons { car: ya, cdr: yd }) => {
                work.push((xd, yd));
                work.push((xa, ya));
            }
            (Payload::Integer(p), Payload::Integer(q)) if p == q => {}
            (Payload::Symbol(p), Payload::Symbol(q)) if p == q => {}
            (Payload::Boolean(p), Payload::Boolean(q)) if p == q => {}
            (Payload::Builtin(p), Payload::Builtin(q)) if p == q => {}
            _ => return false,
        }
    }
    true
}

fn arity(b: Builtin) -> usize {
    match b {
        Builtin::Car | Builtin::Cdr | Builtin::Atom | Builtin::Not => 1,
        _ => 2,
    }
}

impl Interpreter {
    fn integer_arg(&self, b: Builtin, value: HeapAddress) -> Result<i32, EvalError> {
        match (value.is_nil(), value) {
            (false, v) => match self.heap.payload(v) {
                Payload::Integer(n) => Ok(n),
                _ => Err(self.type_mismatch(b, v)),
            },
            (true, v) => Err(self.type_mismatch(b, v)),
        }
    }

    fn type_mismatch(&self, b: Builtin, value: HeapAddress) -> EvalError {
        EvalError::TypeMismatch {
            op: b.name().to_owned(),
            value: self.format(value),
        }
    }

    /// Applies `b` to the `n` values on the root stack starting at `base`.
    pub(super) fn apply_builtin(
        &mut self,
        b: Builtin,
        base: usize,
        n: usize,
    ) -> Result<HeapAddress, EvalError> {
        if n != arity(b) {
            return Err(EvalError::ArityMismatch {
                name: b.name().to_owned(),
                expected: arity(b),
                got: n,
            });
        }
        let arg = |i: usize| self.heap.roots().at(base + i);
        let (x, y) = (arg(0), if n > 1 { arg(1) } else { HeapAddress::NIL });
        match b {
            Builtin::Car => match self.is_cons(x) {
                true => Ok(self.car(x)),
                false => Err(EvalError::CarOfNonList(self.format(x))),
            },
            Builtin::Cdr => match self.is_cons(x) {
                true => Ok(self.cdr(x)),
                false => Err(EvalError::CdrOfNonList(self.format(x))),
            },
            Builtin::Cons => Ok(self.heap.cons(x, y)?),
            Builtin::Atom => {
                let atom = !self.is_cons(x);
                self.boolean(atom)
            }
            Builtin::Not => {
                let t = self.truthy(x);
                self.boolean(!t)
            }
            Builtin::Equal | Builtin::NumEq => {
                let eq = values_equal(&self.heap, x, y);
                self.boolean(eq)
            }
            Builtin::Add | Builtin::Sub | Builtin::Mul | Builtin::Div => {
                let (p, q) = (self.integer_arg(b, x)?, self.integer_arg(b, y)?);
                let r = match b {
                    Builtin::Add => p.wrapping_add(q),
                    Builtin::Sub => p.wrapping_sub(q),
                    Builtin::Mul => p.wrapping_mul(q),
                    _ => {
                        if q == 0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        p.wrapping_div(q)
                    }
                };
                Ok(self.heap.allocate(Payload::Integer(r))?)
            }
            Builtin::Gt | Builtin::Ge | Builtin::Lt | Builtin::Le => {
                let (p, q) = (self.integer_arg(b, x)?, self.integer_arg(b, y)?);
                let r = match b {
                    Builtin::Gt => p > q,
                    Builtin::Ge => p >= q,
                    Builtin::Lt => p < q,
                    _ => p <= q,
                };
                self.boolean(r)
            }
        }
    }
}
