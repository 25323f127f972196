use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::ArithOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassId {
    Wt,
    Tram,
    Gra,
}

impl ClassId {
    pub fn name(self) -> &'static str {
        match self {
            ClassId::Wt => "wt",
            ClassId::Tram => "tram",
            ClassId::Gra => "gra",
        }
    }

    pub fn parse(s: &str) -> Option<ClassId> {
        [ClassId::Wt, ClassId::Tram, ClassId::Gra].into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters recovered from a class member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parameters {
    Wt { n: usize, k: usize, r: usize, s: usize },
    Tram { n: usize, k: usize, r: usize, ops: Vec<ArithOp> },
    Gra { rules: usize },
}

impl fmt::Display for Parameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameters::Wt { n, k, r, s } => write!(f, "n={n} k={k} r={r} s={s}"),
            Parameters::Tram { n, k, r, ops } => {
                let names: Vec<&str> = ops.iter().map(|o| o.name()).collect();
                write!(f, "n={n} k={k} r={r} ops={}", names.join(","))
            }
            Parameters::Gra { rules } => write!(f, "rules={rules}"),
        }
    }
}

/// A violated clause of a class definition. Clause `(0)` covers conditions
/// outside the numbered ones: determinism, external symbols and the shape
/// of the functional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassViolation {
    pub clause: u8,
    pub message: String,
}

impl fmt::Display for ClassViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.clause, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub class: ClassId,
    pub parameters: Option<Parameters>,
    pub violations: Vec<ClassViolation>,
}

impl ClassReport {
    pub fn new(class: ClassId) -> Self {
        ClassReport { class, parameters: None, violations: Vec::new() }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.parameters.is_some()
    }

    pub fn clauses(&self) -> Vec<u8> {
        let mut c: Vec<u8> = self.violations.iter().map(|v| v.clause).collect();
        c.dedup();
        c
    }

    /// The single name in `found`, or a violation of `clause`.
    pub(crate) fn exactly_one(
        &mut self,
        clause: u8,
        found: &[String],
        what: impl FnOnce() -> String,
    ) -> Option<String> {
        match found {
            [x] => Some(x.clone()),
            [] => {
                self.violate(clause, format!("no {}", what()));
                None
            }
            _ => {
                self.violate(clause, format!("more than one {}", what()));
                None
            }
        }
    }

    pub(crate) fn violate(&mut self, clause: u8, message: impl Into<String>) {
        self.violations.push(ClassViolation { clause, message: message.into() });
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.parameters, self.violations.is_empty()) {
            (Some(p), true) => write!(f, "ok {} {p}", self.class),
            _ => {
                write!(f, "not {}", self.class)?;
                for v in &self.violations {
                    write!(f, "\n{v}")?;
                }
                Ok(())
            }
        }
    }
}
