//! Reference simulators for window Turing machines, transition RAMs and
//! type-0 grammars.

mod grammar;
mod tm;
mod tram;

use std::fmt;

pub use grammar::{derivation_closure, grammar_derives, grammar_step, Grammar, GrammarError};
pub use tm::{tm_local_config, tm_run, tm_step, LocalConfig, TmAction, TmConfig, TmError, TmStep, TmTrace, WindowTm};
pub use tram::{
    boolean_test_count, tram_addressed, tram_run, tram_step, tram_tests, ArithTerm, Tram, TramAction, TramConfig,
    TramError, TramStep, TramTrace,
};

/// How a machine run ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MachineOutcome {
    Accepted,
    Rejected,
    Stuck(String),
    StepLimit,
}

impl fmt::Display for MachineOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MachineOutcome::Accepted => f.write_str("Accepted"),
            MachineOutcome::Rejected => f.write_str("Rejected"),
            MachineOutcome::Stuck(r) => write!(f, "Stuck:{r}"),
            MachineOutcome::StepLimit => f.write_str("StepLimit"),
        }
    }
}

/// Position of `label` in `labels`.
fn label_index(labels: &[String], label: &str) -> Option<usize> {
    labels.iter().position(|l| l == label)
}
