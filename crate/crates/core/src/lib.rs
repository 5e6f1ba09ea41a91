//! Resource lambda-calculus: simple terms, differential substitution,
//! reduction to normal form, Taylor expansion of algebraic lambda-terms,
//! System F typing and bounded finiteness probes on infinite combinations.

pub mod algebra;
pub mod error;
pub mod finiteness;
pub mod gen;
pub mod parse;
pub mod rewrite;
pub mod subst;
pub mod syntax;
pub mod sysf;
pub mod taylor;

pub use algebra::{Boolean, Field, LinComb, Natural, Rational, Semiring};
pub use error::{Error, ParseError};
pub use syntax::{Bag, Term, TermView};
