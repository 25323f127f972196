//! Evolving multialgebras (EMAs): multi-sorted partial algebras whose
//! dynamic symbols are rewritten each step by a semialgebraic functional.
//!
//! The crate provides the algebraic core ([`signature`], [`algebra`],
//! [`functional`]), an execution [`engine`], reference simulators for window
//! Turing machines, transition RAMs and type-0 grammars ([`machines`]), and
//! translators between those machines and EMAs ([`translate`]). JSON
//! document formats live in [`doc`].

pub mod algebra;
pub mod doc;
pub mod engine;
pub mod functional;
pub mod machines;
pub mod signature;
pub mod translate;
