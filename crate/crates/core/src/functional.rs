//! Finitary presentations of semialgebraic functionals.
//!
//! A [`Presentation`] holds one global list of guard pairs `(t_i, t'_i)` and
//! one [`BetaTable`] per updatable symbol. Evaluating the guards gives a
//! Boolean vector; each table maps it (first matching row wins) to a finite
//! set of update tuples `(u_1, …, u_k, v)`. Applying the presentation either
//! yields, per symbol, the set `Z` of updated points with their new values
//! `G`, or reports why the functional is undefined.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{GroundTerm, ResolvedTerm, State, Value};
use crate::signature::{Signature, SortId, TypeError};

/// Largest guard count accepted by [`normalize_presentation`].
pub const MAX_NORMALIZE_GUARDS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardPair {
    pub left: GroundTerm,
    pub right: GroundTerm,
}

impl GuardPair {
    pub fn new(left: GroundTerm, right: GroundTerm) -> Self {
        GuardPair { left, right }
    }
}

/// Right-hand side of an update.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UpdateValue {
    Term(GroundTerm),
    /// Component `component` of a product-valued application. All components
    /// of one source must be fired together.
    Paired {
        source: GroundTerm,
        component: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawUpdate", into = "RawUpdate")]
pub struct UpdateTuple {
    pub args: Vec<GroundTerm>,
    pub value: UpdateValue,
}

impl UpdateTuple {
    pub fn new(args: Vec<GroundTerm>, value: GroundTerm) -> Self {
        UpdateTuple { args, value: UpdateValue::Term(value) }
    }

    pub fn constant(value: GroundTerm) -> Self {
        UpdateTuple::new(Vec::new(), value)
    }

    fn terms(&self) -> impl Iterator<Item = &GroundTerm> {
        let v = match &self.value {
            UpdateValue::Term(t) => t,
            UpdateValue::Paired { source, .. } => source,
        };
        self.args.iter().chain(std::iter::once(v))
    }
}

impl fmt::Display for UpdateTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for a in &self.args {
            write!(f, "{a}, ")?;
        }
        match &self.value {
            UpdateValue::Term(t) => write!(f, "{t})"),
            UpdateValue::Paired { source, component } => write!(f, "{source}.{component})"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaired {
    source: GroundTerm,
    component: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUpdate {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    args: Vec<GroundTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<GroundTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    paired: Option<RawPaired>,
}

impl TryFrom<RawUpdate> for UpdateTuple {
    type Error = String;

    fn try_from(raw: RawUpdate) -> Result<Self, String> {
        let value = match (raw.value, raw.paired) {
            (Some(t), None) => UpdateValue::Term(t),
            (None, Some(p)) => UpdateValue::Paired { source: p.source, component: p.component },
            _ => return Err("an update needs exactly one of `value` and `paired`".into()),
        };
        Ok(UpdateTuple { args: raw.args, value })
    }
}

impl From<UpdateTuple> for RawUpdate {
    fn from(u: UpdateTuple) -> Self {
        let (value, paired) = match u.value {
            UpdateValue::Term(t) => (Some(t), None),
            UpdateValue::Paired { source, component } => (None, Some(RawPaired { source, component })),
        };
        RawUpdate { args: u.args, value, paired }
    }
}

/// One entry of a row pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tri {
    False,
    True,
    Any,
}

impl Tri {
    fn as_char(self) -> char {
        match self {
            Tri::False => '0',
            Tri::True => '1',
            Tri::Any => '*',
        }
    }
}

/// Row pattern over the guard vector, written as a string over `0`, `1`, `*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Pattern(pub Vec<Tri>);

impl Pattern {
    pub fn wildcard(len: usize) -> Self {
        Pattern(vec![Tri::Any; len])
    }

    /// A fully specified pattern.
    pub fn exact(bits: &[bool]) -> Self {
        Pattern(bits.iter().map(|b| if *b { Tri::True } else { Tri::False }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_wildcard(&self) -> bool {
        self.0.iter().all(|t| *t == Tri::Any)
    }

    pub fn is_exact(&self) -> bool {
        self.0.iter().all(|t| *t != Tri::Any)
    }

    pub fn matches(&self, valuation: &[bool]) -> bool {
        self.0.len() == valuation.len()
            && self.0.iter().zip(valuation).all(|(t, b)| match t {
                Tri::Any => true,
                Tri::True => *b,
                Tri::False => !*b,
            })
    }

    /// No valuation matches both patterns.
    pub fn disjoint(&self, other: &Pattern) -> bool {
        self.0.iter().zip(&other.0).any(|pair| matches!(pair, (Tri::True, Tri::False) | (Tri::False, Tri::True)))
    }
}

impl PartialOrd for Pattern {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// '*' > '1' > '0' in ASCII, matching the string order of the JSON form.
impl Ord for Pattern {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |p: &Pattern| p.0.iter().map(|t| t.as_char()).collect::<String>();
        key(self).cmp(&key(other))
    }
}

impl TryFrom<String> for Pattern {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(Tri::False),
                '1' => Ok(Tri::True),
                '*' => Ok(Tri::Any),
                other => Err(format!("invalid pattern character {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Pattern)
    }
}

impl From<Pattern> for String {
    fn from(p: Pattern) -> String {
        p.to_string()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|t| write!(f, "{}", t.as_char()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Row {
    pub pattern: Pattern,
    pub updates: Vec<UpdateTuple>,
}

impl Row {
    pub fn new(pattern: Pattern, updates: Vec<UpdateTuple>) -> Self {
        Row { pattern, updates }
    }

    fn canonical_updates(&self) -> Vec<UpdateTuple> {
        let set: BTreeSet<UpdateTuple> = self.updates.iter().cloned().collect();
        set.into_iter().collect()
    }
}

/// β restricted to one target symbol: first matching row wins, and the last
/// row is the all-wildcard catch-all.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaTable {
    pub symbol: String,
    pub rows: Vec<Row>,
}

impl BetaTable {
    /// A table that never changes its symbol.
    pub fn unchanged(symbol: impl Into<String>, guard_count: usize) -> Self {
        BetaTable { symbol: symbol.into(), rows: vec![Row::new(Pattern::wildcard(guard_count), vec![])] }
    }

    pub fn select(&self, valuation: &[bool]) -> Option<&Row> {
        self.rows.iter().find(|r| r.pattern.matches(valuation))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presentation {
    pub guards: Vec<GuardPair>,
    pub tables: Vec<BetaTable>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("guard {0}: sides have different sorts")]
    GuardSorts(usize),
    #[error("table targets `{0}`, which is not a dynamic or dynamic-input symbol")]
    BadTarget(String),
    #[error("symbol `{0}` has more than one table")]
    DuplicateTable(String),
    #[error("symbol `{0}` has no table")]
    MissingTable(String),
    #[error("table `{0}`: a row pattern does not have one entry per guard")]
    PatternLength(String),
    #[error("table `{0}`: the last row must be the all-wildcard catch-all")]
    NoCatchAll(String),
    #[error("table `{symbol}`: update {update} has the wrong shape")]
    UpdateShape { symbol: String, update: String },
    #[error("{0} guards exceed the normalization limit")]
    GuardCountTooLarge(usize),
}

impl Presentation {
    pub fn guard_count(&self) -> usize {
        self.guards.len()
    }

    pub fn table(&self, symbol: &str) -> Option<&BetaTable> {
        self.tables.iter().find(|t| t.symbol == symbol)
    }

    /// Every term mentioned anywhere in the presentation.
    pub fn terms(&self) -> impl Iterator<Item = &GroundTerm> {
        let guards = self.guards.iter().flat_map(|g| [&g.left, &g.right]);
        let updates =
            self.tables.iter().flat_map(|t| t.rows.iter()).flat_map(|r| r.updates.iter()).flat_map(|u| u.terms());
        guards.chain(updates)
    }

    /// Checks the presentation against a signature.
    pub fn check(&self, sig: &Signature) -> Result<(), PresentationError> {
        self.compile(sig).map(|_| ())
    }

    pub fn compile(&self, sig: &Signature) -> Result<CompiledPresentation, PresentationError> {
        let q = self.guards.len();
        let mut guards = Vec::with_capacity(q);
        for (i, g) in self.guards.iter().enumerate() {
            if sig.sort_of(&g.left)? != sig.sort_of(&g.right)? {
                return Err(PresentationError::GuardSorts(i));
            }
            guards.push((ResolvedTerm::resolve(sig, &g.left, false)?, ResolvedTerm::resolve(sig, &g.right, false)?));
        }
        let mut seen = BTreeSet::new();
        let mut tables = Vec::with_capacity(self.tables.len());
        for table in &self.tables {
            let (sym, kind) = match sig.index_of(&table.symbol) {
                Some(i) => (i, sig.kind(i)),
                None => return Err(PresentationError::BadTarget(table.symbol.clone())),
            };
            if !kind.is_updatable() {
                return Err(PresentationError::BadTarget(table.symbol.clone()));
            }
            if !seen.insert(sym) {
                return Err(PresentationError::DuplicateTable(table.symbol.clone()));
            }
            if table.rows.iter().any(|r| r.pattern.len() != q) {
                return Err(PresentationError::PatternLength(table.symbol.clone()));
            }
            if !table.rows.last().is_some_and(|r| r.pattern.is_wildcard()) {
                return Err(PresentationError::NoCatchAll(table.symbol.clone()));
            }
            let target = sig.symbol(sym);
            let mut rows = Vec::with_capacity(table.rows.len());
            let mut cache: HashMap<&[UpdateTuple], Arc<[CompiledUpdate]>> = HashMap::new();
            for row in &table.rows {
                if let Some(updates) = cache.get(row.updates.as_slice()) {
                    rows.push(CompiledRow { mask: Mask::from_pattern(&row.pattern), updates: updates.clone() });
                    continue;
                }
                let mut updates = Vec::new();
                for u in row.canonical_updates() {
                    let shape_err =
                        || PresentationError::UpdateShape { symbol: table.symbol.clone(), update: u.to_string() };
                    if u.args.len() != target.ty.arity() {
                        return Err(shape_err());
                    }
                    let mut args = Vec::with_capacity(u.args.len());
                    for (a, want) in u.args.iter().zip(&target.ty.args) {
                        if sig.sort_of(a)? != *want {
                            return Err(shape_err());
                        }
                        args.push(ResolvedTerm::resolve(sig, a, false)?);
                    }
                    let result = target.ty.result().ok_or_else(shape_err)?;
                    let value = match &u.value {
                        UpdateValue::Term(t) => {
                            if sig.sort_of(t)? != result {
                                return Err(shape_err());
                            }
                            CompiledValue::Term(ResolvedTerm::resolve(sig, t, false)?)
                        }
                        UpdateValue::Paired { source, component } => {
                            let sorts = sig.type_check_term(source)?;
                            if sorts.len() < 2 || sorts.get(*component) != Some(&result) {
                                return Err(shape_err());
                            }
                            CompiledValue::Paired {
                                source: ResolvedTerm::resolve(sig, source, true)?,
                                component: *component,
                                width: sorts.len(),
                            }
                        }
                    };
                    updates.push(CompiledUpdate { args, value, original: u });
                }
                let updates: Arc<[CompiledUpdate]> = updates.into();
                cache.insert(&row.updates, updates.clone());
                rows.push(CompiledRow { mask: Mask::from_pattern(&row.pattern), updates });
            }
            tables.push(CompiledTable { sym, name: table.symbol.clone(), rows });
        }
        for i in 0..sig.len() {
            if sig.kind(i).is_updatable() && !seen.contains(&i) {
                return Err(PresentationError::MissingTable(sig.symbol(i).name.clone()));
            }
        }
        Ok(CompiledPresentation { guards, tables })
    }
}

/// Bitset form of a pattern.
#[derive(Clone, Debug)]
struct Mask {
    care: Vec<u64>,
    bits: Vec<u64>,
}

impl Mask {
    fn from_pattern(p: &Pattern) -> Self {
        let words = p.len().div_ceil(64);
        let mut care = vec![0u64; words];
        let mut bits = vec![0u64; words];
        for (i, t) in p.0.iter().enumerate() {
            match t {
                Tri::Any => {}
                Tri::True => {
                    care[i / 64] |= 1 << (i % 64);
                    bits[i / 64] |= 1 << (i % 64);
                }
                Tri::False => care[i / 64] |= 1 << (i % 64),
            }
        }
        Mask { care, bits }
    }

    fn matches(&self, valuation: &[u64]) -> bool {
        self.care.iter().zip(&self.bits).zip(valuation).all(|((c, b), v)| (v ^ b) & c == 0)
    }
}

fn pack(valuation: &[bool]) -> Vec<u64> {
    let mut out = vec![0u64; valuation.len().div_ceil(64)];
    for (i, b) in valuation.iter().enumerate() {
        if *b {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

#[derive(Clone, Debug)]
enum CompiledValue {
    Term(ResolvedTerm),
    Paired { source: ResolvedTerm, component: usize, width: usize },
}

#[derive(Clone, Debug)]
struct CompiledUpdate {
    args: Vec<ResolvedTerm>,
    value: CompiledValue,
    original: UpdateTuple,
}

#[derive(Clone, Debug)]
struct CompiledRow {
    mask: Mask,
    updates: Arc<[CompiledUpdate]>,
}

#[derive(Clone, Debug)]
struct CompiledTable {
    sym: usize,
    name: String,
    rows: Vec<CompiledRow>,
}

/// A presentation resolved against a signature, ready to apply repeatedly.
#[derive(Clone, Debug)]
pub struct CompiledPresentation {
    guards: Vec<(ResolvedTerm, ResolvedTerm)>,
    tables: Vec<CompiledTable>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Why a functional is undefined on a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Undefinedness {
    /// Condition (a): a guard side has no value.
    GuardTermUndefined { guard: usize, side: Side },
    /// Condition (b): an argument term of a selected update has no value.
    UpdateArgUndefined { symbol: String, update: UpdateTuple },
    /// Condition (c): two selected updates hit the same point.
    Clash { symbol: String, first: Box<UpdateTuple>, second: Box<UpdateTuple> },
}

impl fmt::Display for Undefinedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Undefinedness::GuardTermUndefined { guard, .. } => write!(f, "guard-undefined({guard})"),
            Undefinedness::UpdateArgUndefined { symbol, .. } => {
                write!(f, "update-arg-undefined({symbol})")
            }
            Undefinedness::Clash { symbol, .. } => write!(f, "clash({symbol})"),
        }
    }
}

/// New points and values for one symbol. Keys of `g` are the points of `z`;
/// a `None` value leaves the point undefined.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolUpdate {
    pub z: BTreeSet<Vec<Value>>,
    pub g: BTreeMap<Vec<Value>, Option<Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Updates(BTreeMap<String, SymbolUpdate>),
    UndefinedAt(Undefinedness),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("components of `{0}` are not fired together exactly once each")]
    UncorrelatedMultiterm(String),
}

/// Result of applying a compiled presentation, keyed by symbol index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applied {
    Updates(Vec<(usize, SymbolUpdate)>),
    Undefined(Undefinedness),
}

impl CompiledPresentation {
    pub fn guard_count(&self) -> usize {
        self.guards.len()
    }

    /// Guard vector, or the first guard with an undefined side.
    pub fn evaluate_guards(&self, state: &State) -> Result<Vec<bool>, Undefinedness> {
        self.guards
            .iter()
            .enumerate()
            .map(|(i, (l, r))| {
                let lv =
                    state.eval_resolved(l).ok_or(Undefinedness::GuardTermUndefined { guard: i, side: Side::Left })?;
                let rv =
                    state.eval_resolved(r).ok_or(Undefinedness::GuardTermUndefined { guard: i, side: Side::Right })?;
                Ok(lv == rv)
            })
            .collect()
    }

    pub fn apply(&self, state: &State) -> Result<Applied, ApplyError> {
        let valuation = match self.evaluate_guards(state) {
            Ok(v) => v,
            Err(u) => return Ok(Applied::Undefined(u)),
        };
        self.apply_with(state, &valuation)
    }

    /// Applies the presentation with a given guard vector.
    pub fn apply_with(&self, state: &State, valuation: &[bool]) -> Result<Applied, ApplyError> {
        let packed = pack(valuation);
        let selected: Vec<&CompiledRow> = self
            .tables
            .iter()
            .map(|t| {
                t.rows.iter().find(|r| r.mask.matches(&packed)).expect("the catch-all row matches every valuation")
            })
            .collect();
        self.check_correlation(&selected)?;
        let mut multi: Vec<(&ResolvedTerm, Option<Vec<Value>>)> = Vec::new();
        let mut out = Vec::with_capacity(self.tables.len());
        for (table, row) in self.tables.iter().zip(selected) {
            let mut update = SymbolUpdate::default();
            let mut by_point: BTreeMap<Vec<Value>, &CompiledUpdate> = BTreeMap::new();
            for u in row.updates.iter() {
                let mut point = Vec::with_capacity(u.args.len());
                for a in &u.args {
                    match state.eval_resolved(a) {
                        Some(v) => point.push(v),
                        None => {
                            return Ok(Applied::Undefined(Undefinedness::UpdateArgUndefined {
                                symbol: table.name.clone(),
                                update: u.original.clone(),
                            }))
                        }
                    }
                }
                if let Some(prev) = by_point.get(&point) {
                    return Ok(Applied::Undefined(Undefinedness::Clash {
                        symbol: table.name.clone(),
                        first: Box::new(prev.original.clone()),
                        second: Box::new(u.original.clone()),
                    }));
                }
                let value = match &u.value {
                    CompiledValue::Term(t) => state.eval_resolved(t),
                    CompiledValue::Paired { source, component, .. } => {
                        let tuple = match multi.iter().find(|(s, _)| *s == source) {
                            Some((_, t)) => t.clone(),
                            None => {
                                let t = state.eval_resolved_multi(source);
                                multi.push((source, t.clone()));
                                t
                            }
                        };
                        tuple.and_then(|t| t.get(*component).cloned())
                    }
                };
                update.z.insert(point.clone());
                update.g.insert(point.clone(), value);
                by_point.insert(point, u);
            }
            out.push((table.sym, update));
        }
        Ok(Applied::Updates(out))
    }

    fn check_correlation(&self, selected: &[&CompiledRow]) -> Result<(), ApplyError> {
        let mut fired: Vec<(&ResolvedTerm, usize, Vec<usize>)> = Vec::new();
        for row in selected {
            for u in row.updates.iter() {
                if let CompiledValue::Paired { source, component, width } = &u.value {
                    match fired.iter_mut().find(|(s, _, _)| *s == source) {
                        Some((_, _, comps)) => comps.push(*component),
                        None => fired.push((source, *width, vec![*component])),
                    }
                }
            }
        }
        for (source, width, mut comps) in fired {
            comps.sort_unstable();
            if comps != (0..width).collect::<Vec<_>>() {
                let name = selected
                    .iter()
                    .flat_map(|r| r.updates.iter())
                    .find_map(|u| match (&u.value, &u.original.value) {
                        (CompiledValue::Paired { source: s, .. }, UpdateValue::Paired { source: t, .. })
                            if s == source =>
                        {
                            Some(t.to_string())
                        }
                        _ => None,
                    })
                    .unwrap_or_default();
                return Err(ApplyError::UncorrelatedMultiterm(name));
            }
        }
        Ok(())
    }

    /// Symbol indices of the tables, in table order.
    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.tables.iter().map(|t| t.sym)
    }
}

impl Applied {
    pub fn into_step_result(self, sig: &Signature) -> StepResult {
        match self {
            Applied::Updates(list) => {
                StepResult::Updates(list.into_iter().map(|(i, u)| (sig.symbol(i).name.clone(), u)).collect())
            }
            Applied::Undefined(u) => StepResult::UndefinedAt(u),
        }
    }
}

/// Guard vector of `guards` in `state`, or `None` if some side is undefined.
pub fn evaluate_guards(state: &State, guards: &[GuardPair]) -> Result<Option<Vec<bool>>, TypeError> {
    let mut out = Vec::with_capacity(guards.len());
    for g in guards {
        let l = state.eval_term(&g.left).map_err(|e| match e {
            crate::algebra::EvalError::Type(t) => t,
        })?;
        let r = state.eval_term(&g.right).map_err(|e| match e {
            crate::algebra::EvalError::Type(t) => t,
        })?;
        match (l, r) {
            (Some(l), Some(r)) => {
                if l.sort != r.sort {
                    return Err(TypeError::SortMismatch {
                        symbol: g.right.head.clone(),
                        position: 0,
                        expected: l.sort,
                        found: r.sort,
                    });
                }
                out.push(l == r)
            }
            _ => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// Applies `p` to `state`: the per-symbol `(Z, G)` of every table, or the
/// reason the functional is undefined.
pub fn apply_presentation(state: &State, p: &Presentation) -> Result<StepResult, ApplyError> {
    let compiled = p.compile(state.signature())?;
    Ok(compiled.apply(state)?.into_step_result(state.signature()))
}

/// Canonical form by exhaustive expansion: every table gets one row per guard
/// valuation in lexicographic order, with sorted update sets; the last row
/// (all guards true) is written as the catch-all. Tables are sorted by
/// symbol name.
pub fn normalize_presentation(p: &Presentation) -> Result<Presentation, PresentationError> {
    let q = p.guards.len();
    if q > MAX_NORMALIZE_GUARDS {
        return Err(PresentationError::GuardCountTooLarge(q));
    }
    let total = 1usize << q;
    let valuations: Vec<Pattern> = (0..total)
        .map(|v| {
            let bits: Vec<bool> = (0..q).map(|i| (v >> (q - 1 - i)) & 1 == 1).collect();
            if v + 1 == total {
                Pattern::wildcard(q)
            } else {
                Pattern::exact(&bits)
            }
        })
        .collect();
    let mut tables = Vec::with_capacity(p.tables.len());
    for table in &p.tables {
        if table.rows.iter().any(|r| r.pattern.len() != q) {
            return Err(PresentationError::PatternLength(table.symbol.clone()));
        }
        // Later rows are painted first so that the first match wins.
        let mut selected = vec![usize::MAX; total];
        for (idx, row) in table.rows.iter().enumerate().rev() {
            let (mut fixed, mut free) = (0usize, 0usize);
            for (i, t) in row.pattern.0.iter().enumerate() {
                let bit = 1 << (q - 1 - i);
                match t {
                    Tri::True => fixed |= bit,
                    Tri::False => {}
                    Tri::Any => free |= bit,
                }
            }
            let mut sub = 0usize;
            loop {
                selected[fixed | sub] = idx;
                if sub == free {
                    break;
                }
                sub = sub.wrapping_sub(free) & free;
            }
        }
        let updates: Vec<Vec<UpdateTuple>> = table.rows.iter().map(Row::canonical_updates).collect();
        let mut rows = Vec::with_capacity(total);
        for (idx, pattern) in selected.into_iter().zip(&valuations) {
            if idx == usize::MAX {
                return Err(PresentationError::NoCatchAll(table.symbol.clone()));
            }
            rows.push(Row::new(pattern.clone(), updates[idx].clone()));
        }
        tables.push(BetaTable { symbol: table.symbol.clone(), rows });
    }
    tables.sort_by(|a, b| a.symbol.cmp(&b.symbol));
    Ok(Presentation { guards: p.guards.clone(), tables })
}

/// Cheaper canonical form for presentations whose rows, apart from the final
/// catch-all, are pairwise disjoint: such rows commute under first-match, so
/// sorting them preserves the functional. Returns `None` when some pair of
/// rows overlaps.
pub fn canonical_form(p: &Presentation) -> Option<Presentation> {
    let mut tables = Vec::with_capacity(p.tables.len());
    for table in &p.tables {
        let (last, body) = table.rows.split_last()?;
        if !last.pattern.is_wildcard() {
            return None;
        }
        let mut rows: Vec<Row> = body.iter().map(|r| Row::new(r.pattern.clone(), r.canonical_updates())).collect();
        rows.sort_by(|a, b| a.pattern.cmp(&b.pattern));
        let disjoint = if rows.iter().all(|r| r.pattern.is_exact()) {
            rows.windows(2).all(|w| w[0].pattern != w[1].pattern)
        } else {
            (0..rows.len()).all(|i| (i + 1..rows.len()).all(|j| rows[i].pattern.disjoint(&rows[j].pattern)))
        };
        if !disjoint {
            return None;
        }
        rows.push(Row::new(last.pattern.clone(), last.canonical_updates()));
        tables.push(BetaTable { symbol: table.symbol.clone(), rows });
    }
    tables.sort_by(|a, b| a.symbol.cmp(&b.symbol));
    Some(Presentation { guards: p.guards.clone(), tables })
}

/// Sorts of a term list, used by class checkers.
pub fn sorts_of(sig: &Signature, terms: &[GroundTerm]) -> Result<Vec<SortId>, TypeError> {
    terms.iter().map(|t| sig.sort_of(t)).collect()
}
