use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::DomainDescriptor;
use crate::signature::SortId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Go,
    Acc,
    Rej,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::Go, Status::Acc, Status::Rej];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Go => "go",
            Status::Acc => "acc",
            Status::Rej => "rej",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        Status::ALL.into_iter().find(|st| st.as_str() == s)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Untagged element of a carrier set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Payload {
    /// Index into a finite enumeration.
    Label(u32),
    Int(i64),
    Nat(u64),
    Word(String),
    Set(BTreeSet<Payload>),
    Atom(u64),
    Status(Status),
}

impl Payload {
    /// Whether this payload is an element of `domain`.
    pub fn belongs_to(&self, domain: &DomainDescriptor) -> bool {
        match (self, domain) {
            (Payload::Label(i), DomainDescriptor::FiniteEnum(labels)) => (*i as usize) < labels.len(),
            (Payload::Int(_), DomainDescriptor::IntLine(_)) => true,
            (Payload::Nat(_), DomainDescriptor::Naturals(_)) => true,
            (Payload::Word(w), DomainDescriptor::Words(alphabet)) => w.chars().all(|c| alphabet.contains(&c)),
            (Payload::Set(items), DomainDescriptor::FiniteSubsets(base)) => items.iter().all(|p| p.belongs_to(base)),
            (Payload::Atom(_), DomainDescriptor::Atoms) => true,
            (Payload::Status(_), DomainDescriptor::Status) => true,
            _ => false,
        }
    }

    pub fn render(&self, domain: &DomainDescriptor) -> String {
        match (self, domain) {
            (Payload::Label(i), DomainDescriptor::FiniteEnum(labels)) => {
                labels.get(*i as usize).cloned().unwrap_or_else(|| format!("#{i}"))
            }
            (Payload::Nat(n), DomainDescriptor::Naturals(tag)) => match *tag {
                0 => n.to_string(),
                DomainDescriptor::ADDR_TAG => format!("{n}@addr"),
                t => format!("{n}@{t}"),
            },
            (Payload::Set(items), DomainDescriptor::FiniteSubsets(base)) => {
                let parts: Vec<String> = items.iter().map(|p| p.render(base)).collect();
                format!("[{}]", parts.join(","))
            }
            (p, _) => p.to_string(),
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Label(i) => write!(f, "#{i}"),
            Payload::Int(i) => write!(f, "{i}"),
            Payload::Nat(n) => write!(f, "{n}"),
            Payload::Word(w) => write!(f, "{w:?}"),
            Payload::Set(items) => {
                f.write_str("[")?;
                for (i, p) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("]")
            }
            Payload::Atom(a) => write!(f, "atom_{a}"),
            Payload::Status(s) => write!(f, "{s}"),
        }
    }
}

/// A sort-tagged semantic value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value {
    pub sort: SortId,
    pub payload: Payload,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot compare a value of sort {left} with one of sort {right}")]
pub struct CrossSortComparison {
    pub left: SortId,
    pub right: SortId,
}

impl Value {
    pub fn new(sort: SortId, payload: Payload) -> Self {
        Value { sort, payload }
    }

    pub fn label(sort: SortId, index: u32) -> Self {
        Value::new(sort, Payload::Label(index))
    }

    pub fn int(sort: SortId, i: i64) -> Self {
        Value::new(sort, Payload::Int(i))
    }

    pub fn nat(sort: SortId, n: u64) -> Self {
        Value::new(sort, Payload::Nat(n))
    }

    pub fn word(sort: SortId, w: impl Into<String>) -> Self {
        Value::new(sort, Payload::Word(w.into()))
    }

    pub fn status(sort: SortId, s: Status) -> Self {
        Value::new(sort, Payload::Status(s))
    }

    /// Equality between values of the same sort. Comparing across sorts is a
    /// program error rather than `false`.
    pub fn same_as(&self, other: &Value) -> Result<bool, CrossSortComparison> {
        if self.sort != other.sort {
            return Err(CrossSortComparison { left: self.sort, right: other.sort });
        }
        Ok(self.payload == other.payload)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.payload {
            Payload::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self.payload {
            Payload::Nat(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_label(&self) -> Option<u32> {
        match self.payload {
            Payload::Label(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_word(&self) -> Option<&str> {
        match &self.payload {
            Payload::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_status(&self) -> Option<Status> {
        match self.payload {
            Payload::Status(s) => Some(s),
            _ => None,
        }
    }

    /// Whether the payload kind matches the descriptor of the value's sort.
    pub fn is_well_sorted(&self, domains: &[DomainDescriptor]) -> bool {
        let idx = self.sort.0 as usize;
        idx >= 1 && idx <= domains.len() && self.payload.belongs_to(&domains[idx - 1])
    }

    /// Canonical trace rendering.
    pub fn render(&self, domains: &[DomainDescriptor]) -> String {
        match domains.get(self.sort.index()) {
            Some(d) => self.payload.render(d),
            None => self.payload.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering() {
        let domains = vec![
            DomainDescriptor::FiniteEnum(vec!["q0".into(), "q1".into()]),
            DomainDescriptor::Naturals(1),
            DomainDescriptor::Words(vec!['a', 'b']),
            DomainDescriptor::FiniteSubsets(Box::new(DomainDescriptor::Atoms)),
            DomainDescriptor::Status,
        ];
        assert_eq!(Value::label(SortId(1), 1).render(&domains), "q1");
        assert_eq!(Value::nat(SortId(2), 7).render(&domains), "7@addr");
        assert_eq!(Value::word(SortId(3), "ab").render(&domains), "\"ab\"");
        let set = Payload::Set([Payload::Atom(1), Payload::Atom(0)].into_iter().collect());
        assert_eq!(Value::new(SortId(4), set).render(&domains), "[atom_0,atom_1]");
        assert_eq!(Value::status(SortId(5), Status::Rej).render(&domains), "rej");
    }

    #[test]
    fn cross_sort_comparison_is_an_error() {
        let a = Value::int(SortId(1), 0);
        let b = Value::int(SortId(2), 0);
        assert!(a.same_as(&b).is_err());
        assert_eq!(a.same_as(&a.clone()), Ok(true));
    }

    #[test]
    fn word_membership() {
        let d = DomainDescriptor::Words(vec!['a', 'b']);
        assert!(Payload::Word(String::new()).belongs_to(&d));
        assert!(!Payload::Word("abc".into()).belongs_to(&d));
        assert!(!Payload::Int(3).belongs_to(&d));
    }
}
