//! Translations between machine models and EMAs of the matching classes,
//! class membership checks and lockstep comparison.

mod compare;
mod gra;
mod report;
mod tram;
mod wt;

use thiserror::Error;

use crate::engine::{Ema, EmaError};
use crate::functional::{canonical_form, normalize_presentation, MAX_NORMALIZE_GUARDS};
use crate::machines::{GrammarError, TmError, TramError};

pub use compare::{compare_grammar, compare_tm, compare_tram, Lockstep};
pub use gra::{ema_to_grammar, gra_input, gra_word, grammar_to_ema, GraShape};
pub use report::{ClassId, ClassReport, ClassViolation, Parameters};
pub use tram::{ema_to_tram, tram_input, tram_project, tram_to_ema, TramShape};
pub use wt::{ema_to_tm, tm_to_ema, wt_input, wt_project, WtShape};

/// Largest number of local configurations or test vectors a translation
/// will enumerate.
pub const MAX_ENUMERATION: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("{0}")]
    Class(ClassReport),
    #[error("the step at {0} reads the tape outside the window")]
    WindowDependence(String),
    #[error("the halting step at {0} also changes the machine")]
    HaltingSideEffect(String),
    #[error("not representable as a machine: {0}")]
    Unrepresentable(String),
    #[error("the operation catalog has no `zero`")]
    MissingZero,
    #[error("{0} configurations exceed the enumeration limit")]
    TooLarge(usize),
    #[error("a grammar needs at least one rule")]
    NoRules,
    #[error(transparent)]
    Tm(#[from] TmError),
    #[error(transparent)]
    Tram(#[from] TramError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Ema(#[from] EmaError),
}

pub fn check_class(ema: &Ema, class: ClassId) -> ClassReport {
    match class {
        ClassId::Wt => wt::check(ema).0,
        ClassId::Tram => tram::check(ema).0,
        ClassId::Gra => gra::check(ema).0,
    }
}

pub fn wt_shape(ema: &Ema) -> Result<WtShape, ClassReport> {
    match wt::check(ema) {
        (_, Some(shape)) => Ok(shape),
        (report, None) => Err(report),
    }
}

pub fn tram_shape(ema: &Ema) -> Result<TramShape, ClassReport> {
    match tram::check(ema) {
        (_, Some(shape)) => Ok(shape),
        (report, None) => Err(report),
    }
}

pub fn gra_shape(ema: &Ema) -> Result<GraShape, ClassReport> {
    match gra::check(ema) {
        (_, Some(shape)) => Ok(shape),
        (report, None) => Err(report),
    }
}

/// The same EMA with every functional in canonical form. Presentations with
/// few guards are expanded exhaustively; larger ones must have disjoint rows.
pub fn normalize_ema(ema: &Ema) -> Result<Ema, TranslateError> {
    let functionals = ema
        .functionals()
        .iter()
        .enumerate()
        .map(|(index, p)| {
            if p.guard_count() <= MAX_NORMALIZE_GUARDS {
                normalize_presentation(p).map_err(|error| EmaError::Presentation { index, error })
            } else {
                canonical_form(p).ok_or_else(|| EmaError::Presentation {
                    index,
                    error: crate::functional::PresentationError::GuardCountTooLarge(p.guard_count()),
                })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ema::new(
        ema.signature().clone(),
        ema.domains().to_vec(),
        ema.statics().clone(),
        ema.initials().clone(),
        functionals,
    )?)
}
