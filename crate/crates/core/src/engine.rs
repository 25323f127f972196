//! Assembled machines, initial states and runs.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::{
    oplus, Body, DomainDescriptor, InterpError, PartialInterpretation, Payload, State, StateError, Status, Value,
};
use crate::functional::{Applied, CompiledPresentation, Presentation, PresentationError, Undefinedness};
use crate::signature::{Signature, SymbolKind, Violation, STATUS};

/// Default bound on the number of transitions of a run.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Default bound for seeded external naturals.
pub const DEFAULT_EXTERNAL_BOUND: u64 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EmaError {
    #[error("invalid signature: {}", join(.0))]
    Signature(Vec<Violation>),
    #[error("the multidomain has {found} sorts, the signature {expected}")]
    SortCount { expected: usize, found: usize },
    #[error("the last sort must be the status domain")]
    StatusDomain,
    #[error("{part}: missing interpretation for `{symbol}`")]
    Missing { part: &'static str, symbol: String },
    #[error("{part}: `{symbol}` is not a symbol of this part")]
    Extra { part: &'static str, symbol: String },
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("functional {index}: {error}")]
    Presentation { index: usize, error: PresentationError },
    #[error("an EMA needs at least one functional")]
    NoFunctionals,
    #[error("external `{symbol}`: {message}")]
    External { symbol: String, message: String },
}

fn join(vs: &[Violation]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// An evolving multialgebra: signature, multidomain, static frame, initial
/// dynamic values and one or more functionals.
#[derive(Clone, Debug)]
pub struct Ema {
    signature: Arc<Signature>,
    domains: Arc<[DomainDescriptor]>,
    statics: BTreeMap<String, Body>,
    initials: BTreeMap<String, Body>,
    functionals: Vec<Presentation>,
    compiled: Vec<CompiledPresentation>,
}

impl PartialEq for Ema {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.domains == other.domains
            && self.statics == other.statics
            && self.initials == other.initials
            && self.functionals == other.functionals
    }
}

fn check_cover(
    sig: &Signature,
    kind: SymbolKind,
    part: &'static str,
    bodies: &BTreeMap<String, Body>,
    optional: Option<&str>,
) -> Result<(), EmaError> {
    for sym in sig.part(kind) {
        if !bodies.contains_key(&sym.name) && optional != Some(sym.name.as_str()) {
            return Err(EmaError::Missing { part, symbol: sym.name.clone() });
        }
    }
    for name in bodies.keys() {
        if sig.lookup(name).map(|(k, _)| k) != Some(kind) {
            return Err(EmaError::Extra { part, symbol: name.clone() });
        }
    }
    Ok(())
}

impl Ema {
    pub fn new(
        signature: Signature,
        domains: Vec<DomainDescriptor>,
        statics: BTreeMap<String, Body>,
        initials: BTreeMap<String, Body>,
        functionals: Vec<Presentation>,
    ) -> Result<Self, EmaError> {
        let violations = signature.validate();
        if !violations.is_empty() {
            return Err(EmaError::Signature(violations));
        }
        if domains.len() != signature.sort_count() as usize {
            return Err(EmaError::SortCount { expected: signature.sort_count() as usize, found: domains.len() });
        }
        if domains.last() != Some(&DomainDescriptor::Status) {
            return Err(EmaError::StatusDomain);
        }
        check_cover(&signature, SymbolKind::Static, "static frame", &statics, None)?;
        check_cover(&signature, SymbolKind::Dynamic, "initial values", &initials, None)?;
        for (name, body) in statics.iter().chain(&initials) {
            let (_, sym) = signature.lookup(name).expect("covered");
            PartialInterpretation::new(sym.clone(), body.clone()).check(&domains)?;
        }
        for idx in signature.indices(SymbolKind::External) {
            let sort = signature.symbol(idx).ty.result().expect("validated");
            if !matches!(
                domains[sort.index()],
                DomainDescriptor::Naturals(_) | DomainDescriptor::FiniteEnum(_) | DomainDescriptor::IntLine(_)
            ) {
                return Err(EmaError::External {
                    symbol: signature.symbol(idx).name.clone(),
                    message: "only natural, integer and finite sorts can be chosen".into(),
                });
            }
        }
        if functionals.is_empty() {
            return Err(EmaError::NoFunctionals);
        }
        let compiled = functionals
            .iter()
            .enumerate()
            .map(|(index, p)| p.compile(&signature).map_err(|error| EmaError::Presentation { index, error }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ema { signature: Arc::new(signature), domains: domains.into(), statics, initials, functionals, compiled })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domains(&self) -> &[DomainDescriptor] {
        &self.domains
    }

    /// Interpretations of the static symbols.
    pub fn statics(&self) -> &BTreeMap<String, Body> {
        &self.statics
    }

    /// Initial interpretations of the dynamic symbols.
    pub fn initials(&self) -> &BTreeMap<String, Body> {
        &self.initials
    }

    pub fn functionals(&self) -> &[Presentation] {
        &self.functionals
    }

    pub fn compiled(&self, branch: usize) -> &CompiledPresentation {
        &self.compiled[branch]
    }

    /// Number of functionals; 1 for deterministic machines.
    pub fn width(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_deterministic(&self) -> bool {
        self.functionals.len() == 1
    }
}

/// Values of the input symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Input {
    pub statics: BTreeMap<String, Body>,
    /// Dynamic-input symbols; a missing status defaults to go.
    pub dynamics: BTreeMap<String, Body>,
}

impl Input {
    pub fn new() -> Self {
        Input::default()
    }

    pub fn with_dynamic(mut self, name: impl Into<String>, body: Body) -> Self {
        self.dynamics.insert(name.into(), body);
        self
    }

    pub fn with_static(mut self, name: impl Into<String>, body: Body) -> Self {
        self.statics.insert(name.into(), body);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RunError {
    #[error(transparent)]
    Ema(#[from] EmaError),
    #[error("branch {branch} out of range for {width} functionals")]
    BadBranch { branch: usize, width: usize },
    #[error("no value supplied for external `{0}`")]
    MissingExternal(String),
    #[error("value for external `{0}` has the wrong sort")]
    ExternalSort(String),
    #[error("scripted choices exhausted at step {0}")]
    ChoiceExhausted(usize),
    #[error("components of `{0}` are not fired together")]
    UncorrelatedMultiterm(String),
    #[error("{0}")]
    ClassShape(String),
}

/// Where branch indices and external values come from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChoiceSource {
    /// Consumed in step order. An empty branch list is allowed for
    /// deterministic machines.
    Scripted { branches: Vec<usize>, externals: Vec<BTreeMap<String, Value>> },
    /// Uniform draws: branches in `[0, width)`, naturals and integers in
    /// `[0, external_bound)`, finite sorts over all labels.
    Seeded { seed: u64, external_bound: u64 },
}

impl ChoiceSource {
    pub fn none() -> Self {
        ChoiceSource::Scripted { branches: Vec::new(), externals: Vec::new() }
    }

    pub fn seeded(seed: u64) -> Self {
        ChoiceSource::Seeded { seed, external_bound: DEFAULT_EXTERNAL_BOUND }
    }

    fn stream(&self) -> ChoiceStream<'_> {
        match self {
            ChoiceSource::Scripted { branches, externals } => ChoiceStream::Scripted { branches, externals },
            ChoiceSource::Seeded { seed, external_bound } => ChoiceStream::Seeded {
                rng: Box::new(ChaCha8Rng::seed_from_u64(*seed)),
                bound: (*external_bound).max(1),
            },
        }
    }
}

enum ChoiceStream<'a> {
    Scripted { branches: &'a [usize], externals: &'a [BTreeMap<String, Value>] },
    Seeded { rng: Box<ChaCha8Rng>, bound: u64 },
}

impl ChoiceStream<'_> {
    fn next(&mut self, ema: &Ema, step: usize) -> Result<(usize, BTreeMap<String, Value>), RunError> {
        let sig = ema.signature();
        let has_externals = sig.indices(SymbolKind::External).next().is_some();
        match self {
            ChoiceStream::Scripted { branches, externals } => {
                let branch = match branches.get(step) {
                    Some(b) => *b,
                    None if ema.width() == 1 => 0,
                    None => return Err(RunError::ChoiceExhausted(step)),
                };
                let ext = if has_externals {
                    externals.get(step).cloned().ok_or(RunError::ChoiceExhausted(step))?
                } else {
                    BTreeMap::new()
                };
                Ok((branch, ext))
            }
            ChoiceStream::Seeded { rng, bound } => {
                let branch = rng.gen_range(0..ema.width());
                let mut ext = BTreeMap::new();
                for idx in sig.indices(SymbolKind::External) {
                    let sym = sig.symbol(idx);
                    let sort = sym.ty.result().expect("external constant");
                    let payload = match &ema.domains()[sort.index()] {
                        DomainDescriptor::Naturals(_) => Payload::Nat(rng.gen_range(0..*bound)),
                        DomainDescriptor::IntLine(_) => Payload::Int(rng.gen_range(0..*bound) as i64),
                        DomainDescriptor::FiniteEnum(labels) if !labels.is_empty() => {
                            Payload::Label(rng.gen_range(0..labels.len()) as u32)
                        }
                        _ => return Err(RunError::ExternalSort(sym.name.clone())),
                    };
                    ext.insert(sym.name.clone(), Value::new(sort, payload));
                }
                Ok((branch, ext))
            }
        }
    }
}

/// Why a run got stuck.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StuckReason {
    /// The functional is undefined at the current state.
    Undefined(Undefinedness),
    /// The status has no value.
    StatusUndefined,
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::Undefined(u) => write!(f, "{u}"),
            StuckReason::StatusUndefined => f.write_str("status-undefined"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    NextState(State),
    Halted(Status),
    Stuck(StuckReason),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    Rejected,
    Stuck(StuckReason),
    StepLimit,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Accepted => f.write_str("Accepted"),
            Outcome::Rejected => f.write_str("Rejected"),
            Outcome::Stuck(r) => write!(f, "Stuck:{r}"),
            Outcome::StepLimit => f.write_str("StepLimit"),
        }
    }
}

/// A recorded run. `steps` counts transitions, so `states.len() == steps + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub states: Vec<State>,
    pub outcome: Outcome,
    pub steps: usize,
}

/// One trace line: status followed by the dynamic-input and dynamic symbols
/// in declaration order.
pub fn render_state(t: usize, state: &State) -> String {
    let status = state.status().map_or("undef", Status::as_str);
    let sig = state.signature();
    let parts: Vec<String> = (0..sig.len())
        .filter(|&i| sig.kind(i).is_updatable() && sig.symbol(i).name != STATUS)
        .map(|i| format!("{}={}", sig.symbol(i).name, state.render_symbol(i)))
        .collect();
    if parts.is_empty() {
        format!("t={t} status={status}")
    } else {
        format!("t={t} status={status} {}", parts.join(";"))
    }
}

impl Trace {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("a trace has at least one state")
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (t, s) in self.states.iter().enumerate() {
            out.push_str(&render_state(t, s));
            out.push('\n');
        }
        out.push_str(&format!("outcome={} steps={}\n", self.outcome, self.steps));
        out
    }
}

/// The state `M_0` for `input`: statics from the frame, dynamics from the
/// initial values, inputs from `input`, externals undefined.
pub fn init_state(ema: &Ema, input: &Input) -> Result<State, EmaError> {
    let sig = ema.signature();
    check_cover(sig, SymbolKind::StaticInput, "static input", &input.statics, None)?;
    check_cover(sig, SymbolKind::DynamicInput, "dynamic input", &input.dynamics, Some(STATUS))?;
    let status_sort = sig.status_sort();
    let bodies = sig
        .symbols()
        .iter()
        .enumerate()
        .map(|(i, sym)| {
            let name = &sym.name;
            match sig.kind(i) {
                SymbolKind::Static => ema.statics[name].clone(),
                SymbolKind::StaticInput => input.statics[name].clone(),
                SymbolKind::DynamicInput => input
                    .dynamics
                    .get(name)
                    .cloned()
                    .unwrap_or_else(|| Body::element(Value::status(status_sort, Status::Go))),
                SymbolKind::Dynamic => ema.initials[name].clone(),
                SymbolKind::External => Body::undefined(),
            }
        })
        .collect();
    Ok(State::new(ema.signature.clone(), ema.domains.clone(), bodies)?)
}

/// One transition with functional `branch` and the given external values.
pub fn step(
    ema: &Ema,
    state: &State,
    branch: usize,
    externals: &BTreeMap<String, Value>,
) -> Result<StepOutcome, RunError> {
    match state.status() {
        None => return Ok(StepOutcome::Stuck(StuckReason::StatusUndefined)),
        Some(Status::Go) => {}
        Some(s) => return Ok(StepOutcome::Halted(s)),
    }
    if branch >= ema.width() {
        return Err(RunError::BadBranch { branch, width: ema.width() });
    }
    let sig = ema.signature();
    let mut current = state.clone();
    let externals_idx: Vec<usize> = sig.indices(SymbolKind::External).collect();
    for &idx in &externals_idx {
        let sym = sig.symbol(idx);
        let v = externals.get(&sym.name).ok_or_else(|| RunError::MissingExternal(sym.name.clone()))?;
        if Some(v.sort) != sym.ty.result() || !v.is_well_sorted(ema.domains()) {
            return Err(RunError::ExternalSort(sym.name.clone()));
        }
        current.replace_unchecked(idx, PartialInterpretation::new(sym.clone(), Body::element(v.clone())));
    }
    let applied = ema.compiled(branch).apply(&current).map_err(|e| match e {
        crate::functional::ApplyError::UncorrelatedMultiterm(s) => RunError::UncorrelatedMultiterm(s),
        crate::functional::ApplyError::Presentation(error) => {
            RunError::Ema(EmaError::Presentation { index: branch, error })
        }
    })?;
    let updates = match applied {
        Applied::Undefined(u) => return Ok(StepOutcome::Stuck(StuckReason::Undefined(u))),
        Applied::Updates(u) => u,
    };
    let mut next = state.clone();
    for (idx, upd) in updates {
        if upd.z.is_empty() {
            continue;
        }
        let pi = oplus(next.interp(idx), &upd.z, &upd.g).map_err(EmaError::from)?;
        next.replace_unchecked(idx, pi);
    }
    Ok(StepOutcome::NextState(next))
}

/// Runs from `init_state` until the machine halts, gets stuck or reaches
/// `max_steps` transitions.
pub fn run(ema: &Ema, input: &Input, choices: &ChoiceSource, max_steps: usize) -> Result<Trace, RunError> {
    let mut states = vec![init_state(ema, input)?];
    let mut stream = choices.stream();
    loop {
        let steps = states.len() - 1;
        let current = states.last().expect("nonempty");
        let finished = |outcome| Ok(Trace { outcome, steps, states: Vec::new() });
        let done: Result<Trace, RunError> = match current.status() {
            None => finished(Outcome::Stuck(StuckReason::StatusUndefined)),
            Some(Status::Acc) => finished(Outcome::Accepted),
            Some(Status::Rej) => finished(Outcome::Rejected),
            Some(Status::Go) if steps >= max_steps => finished(Outcome::StepLimit),
            Some(Status::Go) => {
                let (branch, ext) = stream.next(ema, steps)?;
                match step(ema, current, branch, &ext)? {
                    StepOutcome::NextState(s) => {
                        states.push(s);
                        continue;
                    }
                    StepOutcome::Stuck(r) => finished(Outcome::Stuck(r)),
                    StepOutcome::Halted(_) => unreachable!("status checked above"),
                }
            }
        };
        let mut trace = done?;
        trace.states = states;
        return Ok(trace);
    }
}

/// The single updatable word-valued constant of a grammar-shaped machine.
fn word_symbol(ema: &Ema) -> Result<usize, RunError> {
    let sig = ema.signature();
    let candidates: Vec<usize> = (0..sig.len())
        .filter(|&i| {
            let sym = sig.symbol(i);
            sig.kind(i).is_updatable()
                && sym.ty.is_constant()
                && sym.ty.result().is_some_and(|s| matches!(ema.domains()[s.index()], DomainDescriptor::Words(_)))
        })
        .collect();
    match candidates.as_slice() {
        [i] => Ok(*i),
        _ => Err(RunError::ClassShape("expected exactly one word-valued dynamic constant".into())),
    }
}

/// All external valuations worth trying in `state`: naturals and integers up
/// to the current word length, finite sorts over all labels.
fn external_valuations(ema: &Ema, word_len: usize) -> Result<Vec<BTreeMap<String, Value>>, RunError> {
    let sig = ema.signature();
    let mut out = vec![BTreeMap::new()];
    for idx in sig.indices(SymbolKind::External) {
        let sym = sig.symbol(idx);
        let sort = sym.ty.result().expect("external constant");
        let values: Vec<Value> = match &ema.domains()[sort.index()] {
            DomainDescriptor::Naturals(_) => (0..word_len as u64).map(|n| Value::nat(sort, n)).collect(),
            DomainDescriptor::IntLine(_) => (0..word_len as i64).map(|n| Value::int(sort, n)).collect(),
            DomainDescriptor::FiniteEnum(labels) => (0..labels.len() as u32).map(|l| Value::label(sort, l)).collect(),
            _ => return Err(RunError::ExternalSort(sym.name.clone())),
        };
        out = out
            .into_iter()
            .flat_map(|m| {
                values.iter().map(move |v| {
                    let mut m = m.clone();
                    m.insert(sym.name.clone(), v.clone());
                    m
                })
            })
            .collect();
    }
    Ok(out)
}

/// Words reachable from the input within `depth` steps, over every branch
/// and every external value that can affect the word.
pub fn reachable_words(ema: &Ema, input: &Input, depth: usize) -> Result<BTreeSet<String>, RunError> {
    let w = word_symbol(ema)?;
    let word_of = |s: &State| s.interp(w).apply(&[]).and_then(|v| v.as_word().map(str::to_owned));
    let start = init_state(ema, input)?;
    let key = |s: &State| render_state(0, s);
    let mut seen: HashSet<String> = HashSet::from([key(&start)]);
    let mut words = BTreeSet::new();
    words.extend(word_of(&start));
    let mut frontier = VecDeque::from([(start, 0usize)]);
    while let Some((state, d)) = frontier.pop_front() {
        if d == depth {
            continue;
        }
        let len = word_of(&state).map_or(0, |s| s.chars().count());
        for ext in external_valuations(ema, len)? {
            for branch in 0..ema.width() {
                if let StepOutcome::NextState(next) = step(ema, &state, branch, &ext)? {
                    if seen.insert(key(&next)) {
                        words.extend(word_of(&next));
                        frontier.push_back((next, d + 1));
                    }
                }
            }
        }
    }
    Ok(words)
}
