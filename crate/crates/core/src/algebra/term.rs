use std::fmt;

use serde::{Deserialize, Serialize};

/// A ground term in prefix form. There are no variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTerm {
    pub head: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<GroundTerm>,
}

impl GroundTerm {
    pub fn constant(head: impl Into<String>) -> Self {
        GroundTerm { head: head.into(), args: Vec::new() }
    }

    pub fn app(head: impl Into<String>, args: Vec<GroundTerm>) -> Self {
        GroundTerm { head: head.into(), args }
    }

    pub fn unary(head: impl Into<String>, arg: GroundTerm) -> Self {
        GroundTerm::app(head, vec![arg])
    }

    /// `times`-fold application of a unary symbol.
    pub fn iterate(head: &str, times: usize, base: GroundTerm) -> Self {
        (0..times).fold(base, |t, _| GroundTerm::unary(head, t))
    }

    pub fn depth(&self) -> usize {
        1 + self.args.iter().map(GroundTerm::depth).max().unwrap_or(0)
    }

    /// Visits this term and every subterm, outermost first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a GroundTerm)) {
        f(self);
        for a in &self.args {
            a.walk(f);
        }
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.head)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
