//! A small constraint logic programming kernel: terms, a reader, an
//! interpreter with a trail-based store, coroutining, attributed
//! variables, a numeric tower with bounded reals and an interval
//! constraint solver.

pub mod arith;
pub mod atom;
pub mod attvar;
pub mod engine;
pub mod expand;
pub mod ic;
pub mod interval;
pub mod number;
pub mod reader;
pub mod store;
pub mod susp;
pub mod term;

pub use atom::Atom;
pub use engine::{Answer, Delayed, Engine, EngineError};
pub use interval::{Interval, IntervalError, Scalar};
pub use number::{NumError, Number};
pub use term::{SuspId, Term, VarId};

/// Bounded real: a pair of doubles enclosing the true value.
pub type Breal = Interval<f64>;
