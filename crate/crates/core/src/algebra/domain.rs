use serde::{Deserialize, Serialize};

/// Carrier set of one sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DomainDescriptor {
    /// A finite set of named elements, such as control states or letters.
    FiniteEnum(Vec<String>),
    /// A copy of the integers; distinct tags are disjoint copies.
    IntLine(u32),
    /// A copy of the naturals; tag 0 is plain ℕ, tag 1 the address copy.
    Naturals(u32),
    /// Finite words over an alphabet of single characters.
    Words(Vec<char>),
    FiniteSubsets(Box<DomainDescriptor>),
    /// An unstructured infinite set of atoms.
    Atoms,
    Status,
}

impl DomainDescriptor {
    pub const ADDR_TAG: u32 = 1;

    pub fn is_finite(&self) -> bool {
        matches!(self, DomainDescriptor::FiniteEnum(_) | DomainDescriptor::Status)
    }

    /// Number of elements of a finite domain.
    pub fn cardinality(&self) -> Option<usize> {
        match self {
            DomainDescriptor::FiniteEnum(labels) => Some(labels.len()),
            DomainDescriptor::Status => Some(3),
            _ => None,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self {
            DomainDescriptor::FiniteEnum(labels) => Some(labels),
            _ => None,
        }
    }

    pub fn is_empty_set(&self) -> bool {
        match self {
            DomainDescriptor::FiniteEnum(labels) => labels.is_empty(),
            _ => false,
        }
    }
}
