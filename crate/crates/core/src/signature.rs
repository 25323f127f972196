//! Sorts, n-sort types, symbols and the five-part signature of an EMA.
//!
//! A [`Signature`] partitions its symbols into static, static-input,
//! dynamic-input, dynamic and external parts. Sort `n` (the last one) is the
//! status sort and is referenced by exactly one symbol, the `status` constant.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::GroundTerm;

/// Reserved name of the status constant.
pub const STATUS: &str = "status";

/// 1-based index of a sort in the multidomain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SortId(pub u32);

impl SortId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for SortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Argument sorts and result sorts of a symbol. More than one result sort
/// makes the symbol product-valued.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NSortType {
    pub args: Vec<SortId>,
    pub results: Vec<SortId>,
}

impl NSortType {
    pub fn constant(sort: SortId) -> Self {
        NSortType { args: Vec::new(), results: vec![sort] }
    }

    pub fn function(args: Vec<SortId>, result: SortId) -> Self {
        NSortType { args, results: vec![result] }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_constant(&self) -> bool {
        self.args.is_empty() && self.results.len() == 1
    }

    pub fn is_product(&self) -> bool {
        self.results.len() > 1
    }

    /// The result sort of a single-valued symbol.
    pub fn result(&self) -> Option<SortId> {
        match self.results.as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    fn sorts(&self) -> impl Iterator<Item = SortId> + '_ {
        self.args.iter().chain(self.results.iter()).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    #[serde(flatten)]
    pub ty: NSortType,
}

impl Symbol {
    pub fn new(name: impl Into<String>, ty: NSortType) -> Self {
        Symbol { name: name.into(), ty }
    }
}

/// Which of the five signature parts a symbol belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Static,
    StaticInput,
    DynamicInput,
    Dynamic,
    External,
}

impl SymbolKind {
    pub const ALL: [SymbolKind; 5] = [
        SymbolKind::Static,
        SymbolKind::StaticInput,
        SymbolKind::DynamicInput,
        SymbolKind::Dynamic,
        SymbolKind::External,
    ];

    /// Dynamic and dynamic-input symbols are the ones a functional may update.
    pub fn is_updatable(self) -> bool {
        matches!(self, SymbolKind::DynamicInput | SymbolKind::Dynamic)
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SymbolKind::Static => "static",
            SymbolKind::StaticInput => "static-input",
            SymbolKind::DynamicInput => "dynamic-input",
            SymbolKind::Dynamic => "dynamic",
            SymbolKind::External => "external",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawSignature {
    sorts: u32,
    statik: Vec<Symbol>,
    static_input: Vec<Symbol>,
    dynamic_input: Vec<Symbol>,
    dynamic: Vec<Symbol>,
    #[serde(default)]
    external: Vec<Symbol>,
}

/// The five-part typed signature.
///
/// Symbols are addressed globally by their position in declaration order
/// (static, static-input, dynamic-input, dynamic, external). The first
/// declaration of a name wins in the lookup index; duplicates are reported by
/// [`Signature::validate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "RawSignature", into = "RawSignature")]
pub struct Signature {
    sort_count: u32,
    symbols: Vec<Symbol>,
    kinds: Vec<SymbolKind>,
    index: HashMap<String, usize>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.sort_count == other.sort_count && self.symbols == other.symbols && self.kinds == other.kinds
    }
}

impl Eq for Signature {}

impl From<RawSignature> for Signature {
    fn from(raw: RawSignature) -> Self {
        let mut b = Signature::builder(raw.sorts);
        for s in raw.statik {
            b = b.with(SymbolKind::Static, s);
        }
        for s in raw.static_input {
            b = b.with(SymbolKind::StaticInput, s);
        }
        for s in raw.dynamic_input {
            b = b.with(SymbolKind::DynamicInput, s);
        }
        for s in raw.dynamic {
            b = b.with(SymbolKind::Dynamic, s);
        }
        for s in raw.external {
            b = b.with(SymbolKind::External, s);
        }
        b.build()
    }
}

impl From<Signature> for RawSignature {
    fn from(sig: Signature) -> Self {
        let part = |k| sig.part(k).cloned().collect::<Vec<_>>();
        RawSignature {
            sorts: sig.sort_count,
            statik: part(SymbolKind::Static),
            static_input: part(SymbolKind::StaticInput),
            dynamic_input: part(SymbolKind::DynamicInput),
            dynamic: part(SymbolKind::Dynamic),
            external: part(SymbolKind::External),
        }
    }
}

pub struct SignatureBuilder {
    sort_count: u32,
    parts: [Vec<Symbol>; 5],
}

impl SignatureBuilder {
    pub fn with(mut self, kind: SymbolKind, symbol: Symbol) -> Self {
        self.parts[kind as usize].push(symbol);
        self
    }

    pub fn push(&mut self, kind: SymbolKind, symbol: Symbol) {
        self.parts[kind as usize].push(symbol);
    }

    pub fn build(self) -> Signature {
        let mut symbols = Vec::new();
        let mut kinds = Vec::new();
        for (kind, part) in SymbolKind::ALL.into_iter().zip(self.parts) {
            for s in part {
                symbols.push(s);
                kinds.push(kind);
            }
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            index.entry(s.name.clone()).or_insert(i);
        }
        Signature { sort_count: self.sort_count, symbols, kinds, index }
    }
}

impl Signature {
    pub fn builder(sort_count: u32) -> SignatureBuilder {
        SignatureBuilder { sort_count, parts: Default::default() }
    }

    pub fn sort_count(&self) -> u32 {
        self.sort_count
    }

    pub fn status_sort(&self) -> SortId {
        SortId(self.sort_count)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol(&self, idx: usize) -> &Symbol {
        &self.symbols[idx]
    }

    pub fn kind(&self, idx: usize) -> SymbolKind {
        self.kinds[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Option<(SymbolKind, &Symbol)> {
        self.index_of(name).map(|i| (self.kinds[i], &self.symbols[i]))
    }

    /// Global indices of the symbols of one part, in declaration order.
    pub fn indices(&self, kind: SymbolKind) -> impl Iterator<Item = usize> + '_ {
        self.kinds.iter().enumerate().filter(move |(_, k)| **k == kind).map(|(i, _)| i)
    }

    pub fn part(&self, kind: SymbolKind) -> impl Iterator<Item = &Symbol> + '_ {
        self.indices(kind).map(move |i| &self.symbols[i])
    }

    pub fn status_index(&self) -> Option<usize> {
        self.index_of(STATUS)
    }

    /// Checks every structural invariant and lists the violations. An empty
    /// list means the signature is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.sort_count;
        if n == 0 {
            out.push(Violation::new(ViolationKind::NoSorts, ""));
        }
        let mut seen = HashMap::new();
        for (i, s) in self.symbols.iter().enumerate() {
            if !is_identifier(&s.name) {
                out.push(Violation::new(ViolationKind::BadName, &s.name));
            }
            if let Some(prev) = seen.insert(s.name.as_str(), i) {
                let kind = if self.kinds[prev] == self.kinds[i] {
                    ViolationKind::DuplicateName
                } else {
                    ViolationKind::OverlappingParts
                };
                if s.name != STATUS {
                    out.push(Violation::new(kind, &s.name));
                }
            }
            if s.ty.results.is_empty() {
                out.push(Violation::new(ViolationKind::NoResultSort, &s.name));
            }
            if s.ty.sorts().any(|sort| sort.0 == 0 || sort.0 > n) {
                out.push(Violation::new(ViolationKind::SortOutOfRange, &s.name));
                continue;
            }
            let touches_status = s.ty.sorts().any(|sort| sort.0 == n);
            let status_literal = self.kinds[i] == SymbolKind::Static && s.ty.is_constant();
            if touches_status && s.name != STATUS && !status_literal {
                out.push(Violation::new(ViolationKind::StatusSortMisuse, &s.name));
            }
            if self.kinds[i] == SymbolKind::External && !s.ty.is_constant() {
                out.push(Violation::new(ViolationKind::ExternalNotConstant, &s.name));
            }
            if s.ty.is_product() && self.kinds[i] != SymbolKind::Static {
                out.push(Violation::new(ViolationKind::ProductNotStatic, &s.name));
            }
        }
        let status: Vec<usize> = (0..self.symbols.len()).filter(|&i| self.symbols[i].name == STATUS).collect();
        match status.as_slice() {
            [] => out.push(Violation::new(ViolationKind::MissingStatus, STATUS)),
            [i] => {
                let s = &self.symbols[*i];
                if s.ty != NSortType::constant(SortId(n)) {
                    out.push(Violation::new(ViolationKind::StatusBadType, STATUS));
                }
                if !self.kinds[*i].is_updatable() {
                    out.push(Violation::new(ViolationKind::StatusBadPart, STATUS));
                }
            }
            _ => out.push(Violation::new(ViolationKind::DuplicateStatus, STATUS)),
        }
        out
    }

    /// Sort(s) of a ground term. Single-valued terms yield one sort; a
    /// product-valued application at the root yields its component sorts.
    pub fn type_check_term(&self, term: &GroundTerm) -> Result<Vec<SortId>, TypeError> {
        self.type_of(term, true)
    }

    /// Single sort of a term that must not be a bare multiterm.
    pub fn sort_of(&self, term: &GroundTerm) -> Result<SortId, TypeError> {
        let sorts = self.type_of(term, false)?;
        Ok(sorts[0])
    }

    fn type_of(&self, term: &GroundTerm, allow_product: bool) -> Result<Vec<SortId>, TypeError> {
        let (_, sym) = self.lookup(&term.head).ok_or_else(|| TypeError::UnknownSymbol(term.head.clone()))?;
        if sym.ty.args.len() != term.args.len() {
            return Err(TypeError::ArityMismatch {
                symbol: sym.name.clone(),
                expected: sym.ty.args.len(),
                found: term.args.len(),
            });
        }
        for (pos, (arg, want)) in term.args.iter().zip(&sym.ty.args).enumerate() {
            let got = self.type_of(arg, false)?;
            if got[0] != *want {
                return Err(TypeError::SortMismatch {
                    symbol: sym.name.clone(),
                    position: pos,
                    expected: *want,
                    found: got[0],
                });
            }
        }
        if sym.ty.is_product() && !allow_product {
            return Err(TypeError::ProjectionRequired(sym.name.clone()));
        }
        Ok(sym.ty.results.clone())
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    NoSorts,
    BadName,
    DuplicateName,
    OverlappingParts,
    NoResultSort,
    SortOutOfRange,
    StatusSortMisuse,
    MissingStatus,
    DuplicateStatus,
    StatusBadType,
    StatusBadPart,
    ExternalNotConstant,
    ProductNotStatic,
}

impl ViolationKind {
    pub fn message(self) -> &'static str {
        match self {
            ViolationKind::NoSorts => "signature declares no sorts",
            ViolationKind::BadName => "symbol name is not an ASCII identifier",
            ViolationKind::DuplicateName => "duplicate symbol name",
            ViolationKind::OverlappingParts => "symbol declared in two signature parts",
            ViolationKind::NoResultSort => "symbol has no result sort",
            ViolationKind::SortOutOfRange => "sort index out of range",
            ViolationKind::StatusSortMisuse => {
                "only the status constant and static constants may involve the status sort"
            }
            ViolationKind::MissingStatus => "missing status symbol",
            ViolationKind::DuplicateStatus => "duplicate status symbol",
            ViolationKind::StatusBadType => "status symbol must be a constant of the status sort",
            ViolationKind::StatusBadPart => "status symbol must be dynamic or dynamic-input",
            ViolationKind::ExternalNotConstant => "external symbol not a constant",
            ViolationKind::ProductNotStatic => "product-valued symbol must be static",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub symbol: String,
}

impl Violation {
    fn new(kind: ViolationKind, symbol: &str) -> Self {
        Violation { kind, symbol: symbol.to_owned() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.kind.message(), self.symbol)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} argument(s), got {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("argument {position} of `{symbol}` has sort {found}, expected {expected}")]
    SortMismatch { symbol: String, position: usize, expected: SortId, found: SortId },
    #[error("product-valued `{0}` used where a single sort is expected")]
    ProjectionRequired(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GroundTerm as T;

    /// The C^(1)_wT signature with two states and two letters.
    fn wt1() -> Signature {
        let (z, q, s, st) = (SortId(1), SortId(2), SortId(3), SortId(4));
        let mut b = Signature::builder(4);
        for name in ["q_q0", "q_q1"] {
            b.push(SymbolKind::Static, Symbol::new(name, NSortType::constant(q)));
        }
        for name in ["sigma_a", "sigma_b"] {
            b.push(SymbolKind::Static, Symbol::new(name, NSortType::constant(s)));
        }
        for name in ["go", "acc", "rej"] {
            b.push(SymbolKind::Static, Symbol::new(name, NSortType::constant(st)));
        }
        b.push(SymbolKind::Static, Symbol::new("Succ1", NSortType::function(vec![z], z)));
        b.push(SymbolKind::Static, Symbol::new("Pred1", NSortType::function(vec![z], z)));
        b.push(SymbolKind::DynamicInput, Symbol::new("c1", NSortType::function(vec![z], s)));
        b.push(SymbolKind::Dynamic, Symbol::new("pos1", NSortType::constant(z)));
        b.push(SymbolKind::Dynamic, Symbol::new("q", NSortType::constant(q)));
        b.push(SymbolKind::Dynamic, Symbol::new(STATUS, NSortType::constant(st)));
        b.build()
    }

    #[test]
    fn wt_signature_is_valid() {
        assert_eq!(wt1().validate(), vec![]);
    }

    #[test]
    fn duplicate_status_is_reported() {
        let sig = Signature::builder(2)
            .with(SymbolKind::DynamicInput, Symbol::new(STATUS, NSortType::constant(SortId(2))))
            .with(SymbolKind::Dynamic, Symbol::new(STATUS, NSortType::constant(SortId(2))))
            .build();
        let v = sig.validate();
        assert!(v.iter().any(|v| v.kind == ViolationKind::DuplicateStatus), "{v:?}");
        assert_eq!(ViolationKind::DuplicateStatus.message(), "duplicate status symbol");
    }

    #[test]
    fn binary_external_is_reported() {
        let sig = Signature::builder(2)
            .with(SymbolKind::DynamicInput, Symbol::new(STATUS, NSortType::constant(SortId(2))))
            .with(SymbolKind::External, Symbol::new("pick", NSortType::function(vec![SortId(1), SortId(1)], SortId(1))))
            .build();
        let v = sig.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::ExternalNotConstant);
        assert_eq!(v[0].kind.message(), "external symbol not a constant");
        assert_eq!(v[0].symbol, "pick");
    }

    #[test]
    fn status_sort_is_reserved() {
        let sig = Signature::builder(2)
            .with(SymbolKind::Static, Symbol::new("go", NSortType::constant(SortId(2))))
            .with(SymbolKind::Static, Symbol::new("is_go", NSortType::function(vec![SortId(2)], SortId(1))))
            .with(SymbolKind::Dynamic, Symbol::new("flag", NSortType::constant(SortId(2))))
            .with(SymbolKind::Dynamic, Symbol::new(STATUS, NSortType::constant(SortId(2))))
            .build();
        let v = sig.validate();
        assert_eq!(
            v,
            vec![
                Violation::new(ViolationKind::StatusSortMisuse, "is_go"),
                Violation::new(ViolationKind::StatusSortMisuse, "flag"),
            ]
        );
    }

    #[test]
    fn overlapping_parts() {
        let sig = wt1();
        let mut b = Signature::builder(4);
        for (i, s) in sig.symbols().iter().enumerate() {
            b.push(sig.kind(i), s.clone());
        }
        b.push(SymbolKind::Static, Symbol::new("q", NSortType::constant(SortId(2))));
        let v = b.build().validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::OverlappingParts);
    }

    #[test]
    fn succ_of_pos_has_tape_sort() {
        let t = T::app("Succ1", vec![T::constant("pos1")]);
        assert_eq!(wt1().type_check_term(&t), Ok(vec![SortId(1)]));
    }

    #[test]
    fn tape_of_state_is_a_sort_mismatch() {
        let t = T::app("c1", vec![T::constant("q")]);
        assert_eq!(
            wt1().type_check_term(&t),
            Err(TypeError::SortMismatch { symbol: "c1".into(), position: 0, expected: SortId(1), found: SortId(2) })
        );
    }

    #[test]
    fn unknown_and_arity() {
        let sig = wt1();
        assert_eq!(sig.type_check_term(&T::constant("nope")), Err(TypeError::UnknownSymbol("nope".into())));
        assert!(matches!(
            sig.type_check_term(&T::constant("Succ1")),
            Err(TypeError::ArityMismatch { expected: 1, found: 0, .. })
        ));
    }

    fn smm() -> Signature {
        // sorts: X, P_fin(X), status
        let (x, set) = (SortId(1), SortId(2));
        Signature::builder(3)
            .with(SymbolKind::Static, Symbol::new("new", NSortType { args: vec![set], results: vec![x, set] }))
            .with(SymbolKind::DynamicInput, Symbol::new(STATUS, NSortType::constant(SortId(3))))
            .with(SymbolKind::Dynamic, Symbol::new("U", NSortType::constant(set)))
            .with(SymbolKind::Dynamic, Symbol::new("x", NSortType::constant(x)))
            .build()
    }

    #[test]
    fn product_typed_term() {
        let sig = smm();
        assert_eq!(sig.validate(), vec![]);
        let t = T::app("new", vec![T::constant("U")]);
        assert_eq!(sig.type_check_term(&t), Ok(vec![SortId(1), SortId(2)]));
        // nesting a multiterm needs a projection
        let nested = T::app("new", vec![t]);
        assert_eq!(sig.type_check_term(&nested), Err(TypeError::ProjectionRequired("new".into())));
    }

    #[test]
    fn serde_keeps_part_order() {
        let sig = wt1();
        let json = serde_json::to_value(&sig).unwrap();
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert!(keys.contains(&"staticInput".to_string()));
        let back: Signature = serde_json::from_value(json).unwrap();
        assert_eq!(back, sig);
    }
}
