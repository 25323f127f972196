//! Semantic domains, sort-tagged values, partial interpretations, ground-term
//! evaluation and the `⊕_Z` update operator.

mod domain;
mod interp;
mod state;
mod term;
mod value;

pub use domain::DomainDescriptor;
pub use interp::{
    interpretations_equal, oplus, substitute, ArithOp, Body, InterpError, PartialInterpretation, Primitive,
};
pub use state::{render_body, EvalError, ResolvedTerm, State, StateError};
pub use term::GroundTerm;
pub use value::{CrossSortComparison, Payload, Status, Value};
