//! Text syntax for thinging-machine models (`.tm` files).
//!
//! The grammar is documented in `docs/grammar.md`. Parsing collects every
//! recoverable error, resynchronising at statement boundaries.

mod lexer;
mod parser;
mod serialize;

pub use parser::{parse_model, parse_model_named, ParseError, ANONYMOUS_SOURCE};
pub use serialize::{serialize_model, SerializeError};

pub(crate) use lexer::quote;
pub(crate) use lexer::Tok;
pub(crate) use parser::{Cursor, PResult, Reported};
