//! Tokenizer and parser producing heap-resident expressions.

use thiserror::Error;

use crate::heap::{Heap, HeapAddress, HeapError, Payload};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    LeftParen,
    RightParen,
    Integer,
    Symbol,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

fn is_integer_literal(text: &str) -> bool {
    let digits = text.strip_prefix('-').unwrap_or(text);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Splits `text` into parentheses and maximal runs of other
/// non-whitespace characters. Lines and columns are 1-based.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            '(' | ')' => {
                chars.next();
                tokens.push(Token {
                    kind: if c == '(' {
                        TokenKind::LeftParen
                    } else {
                        TokenKind::RightParen
                    },
                    text: c.to_string(),
                    line,
                    column,
                });
                column += 1;
            }
            _ => {
                let start = column;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    column += 1;
                }
                let kind = if is_integer_literal(&word) {
                    TokenKind::Integer
                } else {
                    TokenKind::Symbol
                };
                tokens.push(Token {
                    kind,
                    text: word,
                    line,
                    column: start,
                });
            }
        }
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("unbalanced parentheses at line {line}, column {column}")]
    UnbalancedParens { line: usize, column: usize },
    #[error("unexpected input after complete form at line {line}, column {column}")]
    TrailingTokens { line: usize, column: usize },
    #[error("integer literal {text} out of range at line {line}, column {column}")]
    IntegerOutOfRange {
        text: String,
        line: usize,
        column: usize,
    },
    #[error(transparent)]
    Heap(#[from] HeapError),
}

/// Cursor over a token sequence yielding one form at a time.
pub struct Reader<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Reader<'t> {
    pub fn new(tokens: &'t [Token]) -> Self {
        Reader { tokens, pos: 0 }
    }

    pub fn is_at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    /// Parses the next complete form, or `None` at end of input.
    pub fn next_form(&mut self, heap: &mut Heap) -> Result<Option<HeapAddress>, ReadError> {
        if self.is_at_end() {
            return Ok(None);
        }
        self.form(heap).map(Some)
    }

    fn form(&mut self, heap: &mut Heap) -> Result<HeapAddress, ReadError> {
        let tok = &self.tokens[self.pos];
        self.pos += 1;
        match tok.kind {
            TokenKind::RightParen => Err(ReadError::UnbalancedParens {
                line: tok.line,
                column: tok.column,
            }),
            TokenKind::Integer => {
                let value: i32 = tok.text.parse().map_err(|_| ReadError::IntegerOutOfRange {
                    text: tok.text.clone(),
                    line: tok.line,
                    column: tok.column,
                })?;
                Ok(heap.allocate(Payload::Integer(value))?)
            }
            TokenKind::Symbol => Ok(match tok.text.as_str() {
                "NIL" => HeapAddress::NIL,
                "#T" => heap.allocate(Payload::Boolean(true))?,
                "#F" => heap.allocate(Payload::Boolean(false))?,
                name => {
                    let id = heap.intern(name);
                    heap.allocate(Payload::Symbol(id))?
                }
            }),
            TokenKind::LeftParen => {
                let (open_line, open_column) = (tok.line, tok.column);
                let base = heap.roots().len();
                let acc = heap.push_root(HeapAddress::NIL);
                let result = self
                    .list_items(heap, open_line, open_column)
                    .and_then(|count| {
                        // Elements sit on the root stack above `acc`; cons them
                        // up back to front.
                        for i in (0..count).rev() {
                            let item = heap.roots().at(base + 1 + i);
                            let cell = heap.cons(item, heap.root(acc))?;
                            heap.set_root(acc, cell);
                        }
                        Ok(heap.root(acc))
                    });
                heap.roots_mut().truncate(base);
                result
            }
        }
    }

    fn list_items(
        &mut self,
        heap: &mut Heap,
        line: usize,
        column: usize,
    ) -> Result<usize, ReadError> {
        let mut count = 0;
        loop {
            match self.tokens.get(self.pos) {
                None => return Err(ReadError::UnbalancedParens { line, column }),
                Some(t) if t.kind == TokenKind::RightParen => {
                    self.pos += 1;
                    return Ok(count);
                }
                Some(_) => {
                    let item = self.form(heap)?;
                    heap.push_root(item);
                    count += 1;
                }
            }
        }
    }
}

/// Parses exactly one form; anything after it is an error.
pub fn parse(tokens: &[Token], heap: &mut Heap) -> Result<Option<HeapAddress>, ReadError> {
    let mut reader = Reader::new(tokens);
    let form = reader.next_form(heap)?;
    if let Some(extra) = tokens.get(reader.pos) {
        return Err(ReadError::TrailingTokens {
            line: extra.line,
            column: extra.column,
        });
    }
    Ok(form)
}
