//! Reading and writing terms.

pub mod lexer;
pub mod ops;
pub mod parser;
pub mod writer;

pub use lexer::{SourcePos, SyntaxError};
pub use ops::{OpDef, OpError, OpTable, OpType};
pub use parser::{read_term, ReadTerm, TermReader};
pub use writer::{write_detached, write_term, WriteCtx, WriteOpts};
