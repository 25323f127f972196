use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{label_index, MachineOutcome};
use crate::algebra::{ArithOp, GroundTerm};
use crate::signature::is_identifier;

/// Arithmetic over the contents of the addressed registers. `Contents(x)`
/// is the content of the `x`-th addressed register in address order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithTerm {
    Contents(usize),
    Op(ArithOp, Vec<ArithTerm>),
}

impl ArithTerm {
    pub fn op(op: ArithOp, args: Vec<ArithTerm>) -> Self {
        ArithTerm::Op(op, args)
    }

    /// Value against the addressed contents; `None` on overflow.
    pub fn eval(&self, contents: &[u64]) -> Option<u64> {
        match self {
            ArithTerm::Contents(x) => contents.get(*x).copied(),
            ArithTerm::Op(op, args) => {
                let vals = args.iter().map(|a| a.eval(contents)).collect::<Option<Vec<_>>>()?;
                op.apply(&vals)
            }
        }
    }

    fn ops(&self, out: &mut BTreeSet<ArithOp>) {
        if let ArithTerm::Op(op, args) = self {
            out.insert(*op);
            args.iter().for_each(|a| a.ops(out));
        }
    }

    /// Name of the content leaf for register `i` (1-based) after `j`
    /// indirections.
    pub fn contents_name(i: usize, j: usize) -> String {
        format!("c{i}_{j}")
    }

    fn to_ground(&self, depth: usize) -> GroundTerm {
        match self {
            ArithTerm::Contents(x) => GroundTerm::constant(Self::contents_name(x / (depth + 1) + 1, x % (depth + 1))),
            ArithTerm::Op(op, args) => GroundTerm::app(op.name(), args.iter().map(|a| a.to_ground(depth)).collect()),
        }
    }

    fn from_ground(t: &GroundTerm, registers: usize, depth: usize) -> Result<Self, TramError> {
        if let Some(op) = ArithOp::from_name(&t.head) {
            if t.args.len() != op.arity() {
                return Err(TramError::Arity(t.head.clone()));
            }
            let args = t.args.iter().map(|a| Self::from_ground(a, registers, depth)).collect::<Result<_, _>>()?;
            return Ok(ArithTerm::Op(op, args));
        }
        let leaf = t
            .head
            .strip_prefix('c')
            .and_then(|r| r.split_once('_'))
            .and_then(|(i, j)| Some((i.parse::<usize>().ok()?, j.parse::<usize>().ok()?)))
            .filter(|&(i, j)| t.args.is_empty() && (1..=registers).contains(&i) && j <= depth);
        match leaf {
            Some((i, j)) => Ok(ArithTerm::Contents((i - 1) * (depth + 1) + j)),
            None => Err(TramError::UnsupportedOperation(t.head.clone())),
        }
    }
}

impl fmt::Display for ArithTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithTerm::Contents(x) => write!(f, "#{x}"),
            ArithTerm::Op(op, args) if args.is_empty() => write!(f, "{op}"),
            ArithTerm::Op(op, args) => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{op}({})", parts.join(","))
            }
        }
    }
}

/// Writes of one transition, one optional term per addressed register in
/// address order: `rho_i` at `(i, 0)` and `tau_{i,j}` at `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TramAction {
    pub state: usize,
    pub writes: Vec<Option<ArithTerm>>,
}

/// An `n`-register transition RAM with addressing depth `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTram", into = "RawTram")]
pub struct Tram {
    pub registers: usize,
    pub depth: usize,
    pub ops: Vec<ArithOp>,
    pub states: Vec<String>,
    pub accept: BTreeSet<(usize, Vec<bool>)>,
    pub reject: BTreeSet<(usize, Vec<bool>)>,
    pub rules: BTreeMap<(usize, Vec<bool>), TramAction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TramError {
    #[error("a TRAM needs at least one register and one state")]
    Empty,
    #[error("`{0}` is not a valid label")]
    BadLabel(String),
    #[error("label `{0}` is declared twice")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("operation `{0}` is not in the machine's catalog")]
    UnsupportedOperation(String),
    #[error("operation `{0}` is listed twice")]
    DuplicateOperation(String),
    #[error("`{0}` applied to the wrong number of arguments")]
    Arity(String),
    #[error("a test vector or write list has the wrong shape")]
    Shape,
    #[error("`{0}` is not a test vector")]
    BadTests(String),
    #[error("a configuration is listed twice")]
    Duplicate,
    #[error("a final configuration also has a transition")]
    FinalWithRule,
    #[error("a configuration is both accepting and rejecting")]
    AcceptReject,
}

/// `m + m(m-1)/2` with `m = n(1+k)`: zero tests plus pairwise equalities.
pub fn boolean_test_count(n: usize, k: usize) -> usize {
    let m = n * (1 + k);
    m + m * (m - 1) / 2
}

impl Tram {
    /// Number of addressed registers.
    pub fn addressed(&self) -> usize {
        self.registers * (1 + self.depth)
    }

    pub fn test_count(&self) -> usize {
        boolean_test_count(self.registers, self.depth)
    }

    pub fn validate(&self) -> Result<(), TramError> {
        if self.registers == 0 || self.states.is_empty() {
            return Err(TramError::Empty);
        }
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !is_identifier(s) {
                return Err(TramError::BadLabel(s.clone()));
            }
            if !seen.insert(s) {
                return Err(TramError::DuplicateLabel(s.clone()));
            }
        }
        let mut ops = BTreeSet::new();
        for op in &self.ops {
            if !ops.insert(*op) {
                return Err(TramError::DuplicateOperation(op.name().into()));
            }
        }
        let b = self.test_count();
        for (q, tests) in self.accept.iter().chain(&self.reject).chain(self.rules.keys()) {
            if *q >= self.states.len() || tests.len() != b {
                return Err(TramError::Shape);
            }
        }
        for act in self.rules.values() {
            if act.state >= self.states.len() || act.writes.len() != self.addressed() {
                return Err(TramError::Shape);
            }
            for t in act.writes.iter().flatten() {
                let mut used = BTreeSet::new();
                t.ops(&mut used);
                if let Some(op) = used.difference(&ops).next() {
                    return Err(TramError::UnsupportedOperation(op.name().into()));
                }
                check_term(t, self.addressed())?;
            }
        }
        if self.accept.intersection(&self.reject).next().is_some() {
            return Err(TramError::AcceptReject);
        }
        if self.rules.keys().any(|c| self.accept.contains(c) || self.reject.contains(c)) {
            return Err(TramError::FinalWithRule);
        }
        Ok(())
    }

    pub fn initial_config(&self, memory: BTreeMap<u64, u64>) -> TramConfig {
        TramConfig { state: 0, memory: memory.into_iter().filter(|(_, v)| *v != 0).collect() }
    }
}

fn check_term(t: &ArithTerm, m: usize) -> Result<(), TramError> {
    match t {
        ArithTerm::Contents(x) if *x < m => Ok(()),
        ArithTerm::Contents(_) => Err(TramError::Shape),
        ArithTerm::Op(op, args) if args.len() == op.arity() => args.iter().try_for_each(|a| check_term(a, m)),
        ArithTerm::Op(op, _) => Err(TramError::Arity(op.name().into())),
    }
}

/// Control state and memory; zero registers are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TramConfig {
    pub state: usize,
    pub memory: BTreeMap<u64, u64>,
}

impl TramConfig {
    pub fn read(&self, addr: u64) -> u64 {
        self.memory.get(&addr).copied().unwrap_or(0)
    }
}

/// Addresses `addr(i, j)` for `i = 1..n`, `j = 0..k`, register-major.
pub fn tram_addressed(t: &Tram, c: &TramConfig) -> Vec<u64> {
    let mut out = Vec::with_capacity(t.addressed());
    for i in 1..=t.registers as u64 {
        let mut a = i;
        out.push(a);
        for _ in 0..t.depth {
            a = c.read(a);
            out.push(a);
        }
    }
    out
}

/// Zero tests in address order, then equality tests over pairs `x < y` in
/// lexicographic order.
pub fn tram_tests(t: &Tram, c: &TramConfig) -> Vec<bool> {
    let contents: Vec<u64> = tram_addressed(t, c).into_iter().map(|a| c.read(a)).collect();
    let mut out: Vec<bool> = contents.iter().map(|v| *v == 0).collect();
    for x in 0..contents.len() {
        for y in x + 1..contents.len() {
            out.push(contents[x] == contents[y]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TramStep {
    Next(TramConfig),
    Accept,
    Reject,
    Stuck(&'static str),
}

/// One transition. All terms read the old memory; two writes to the same
/// address make the machine stuck.
pub fn tram_step(t: &Tram, c: &TramConfig) -> TramStep {
    let tests = tram_tests(t, c);
    let key = (c.state, tests);
    if t.accept.contains(&key) {
        return TramStep::Accept;
    }
    if t.reject.contains(&key) {
        return TramStep::Reject;
    }
    let Some(act) = t.rules.get(&key) else { return TramStep::Stuck("no-transition") };
    let addrs = tram_addressed(t, c);
    let contents: Vec<u64> = addrs.iter().map(|&a| c.read(a)).collect();
    let mut writes = BTreeMap::new();
    for (addr, term) in addrs.iter().zip(&act.writes) {
        let Some(term) = term else { continue };
        let Some(v) = term.eval(&contents) else { return TramStep::Stuck("overflow") };
        if writes.insert(*addr, v).is_some() {
            return TramStep::Stuck("alias");
        }
    }
    let mut next = c.clone();
    next.state = act.state;
    for (a, v) in writes {
        if v == 0 {
            next.memory.remove(&a);
        } else {
            next.memory.insert(a, v);
        }
    }
    TramStep::Next(next)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TramTrace {
    pub configs: Vec<TramConfig>,
    pub outcome: MachineOutcome,
    pub steps: usize,
}

pub fn tram_run(t: &Tram, memory: BTreeMap<u64, u64>, max_steps: usize) -> TramTrace {
    let mut configs = vec![t.initial_config(memory)];
    loop {
        let steps = configs.len() - 1;
        let outcome = match tram_step(t, configs.last().expect("nonempty")) {
            TramStep::Accept => MachineOutcome::Accepted,
            TramStep::Reject => MachineOutcome::Rejected,
            TramStep::Stuck(r) => MachineOutcome::Stuck(r.into()),
            TramStep::Next(_) if steps >= max_steps => MachineOutcome::StepLimit,
            TramStep::Next(c) => {
                configs.push(c);
                continue;
            }
        };
        return TramTrace { configs, outcome, steps };
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKey {
    state: String,
    tests: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    when: RawKey,
    state: String,
    rho: Vec<Option<GroundTerm>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tau: Vec<Vec<Option<GroundTerm>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTram {
    registers: usize,
    depth: usize,
    ops: Vec<String>,
    states: Vec<String>,
    #[serde(default)]
    accept: Vec<RawKey>,
    #[serde(default)]
    reject: Vec<RawKey>,
    #[serde(default)]
    rules: Vec<RawRule>,
}

impl RawTram {
    fn state(&self, s: &str) -> Result<usize, TramError> {
        label_index(&self.states, s).ok_or_else(|| TramError::UnknownLabel(s.into()))
    }

    /// Test vectors matching a pattern over `0`, `1`, `*`.
    fn expand(&self, key: &RawKey) -> Result<Vec<(usize, Vec<bool>)>, TramError> {
        let q = self.state(&key.state)?;
        if key.tests.chars().count() != boolean_test_count(self.registers, self.depth) {
            return Err(TramError::Shape);
        }
        let mut acc: Vec<Vec<bool>> = vec![Vec::new()];
        for ch in key.tests.chars() {
            let choices: &[bool] = match ch {
                '0' => &[false],
                '1' => &[true],
                '*' => &[false, true],
                _ => return Err(TramError::BadTests(key.tests.clone())),
            };
            acc = acc
                .into_iter()
                .flat_map(|p| {
                    choices.iter().map(move |&b| {
                        let mut p = p.clone();
                        p.push(b);
                        p
                    })
                })
                .collect();
        }
        Ok(acc.into_iter().map(|v| (q, v)).collect())
    }

    fn term(&self, t: &Option<GroundTerm>) -> Result<Option<ArithTerm>, TramError> {
        t.as_ref().map(|t| ArithTerm::from_ground(t, self.registers, self.depth)).transpose()
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

impl TryFrom<RawTram> for Tram {
    type Error = TramError;

    fn try_from(raw: RawTram) -> Result<Self, TramError> {
        let ops = raw
            .ops
            .iter()
            .map(|o| ArithOp::from_name(o).ok_or_else(|| TramError::UnsupportedOperation(o.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut accept = BTreeSet::new();
        let mut reject = BTreeSet::new();
        for (list, set) in [(&raw.accept, &mut accept), (&raw.reject, &mut reject)] {
            for key in list {
                for c in raw.expand(key)? {
                    if !set.insert(c) {
                        return Err(TramError::Duplicate);
                    }
                }
            }
        }
        let mut rules = BTreeMap::new();
        for rule in &raw.rules {
            if rule.rho.len() != raw.registers
                || !(rule.tau.len() == raw.registers || rule.tau.is_empty() && raw.depth == 0)
                || rule.tau.iter().any(|row| row.len() != raw.depth)
            {
                return Err(TramError::Shape);
            }
            let mut writes = Vec::with_capacity(raw.registers * (raw.depth + 1));
            for i in 0..raw.registers {
                writes.push(raw.term(&rule.rho[i])?);
                if raw.depth > 0 {
                    for t in &rule.tau[i] {
                        writes.push(raw.term(t)?);
                    }
                }
            }
            let act = TramAction { state: raw.state(&rule.state)?, writes };
            for c in raw.expand(&rule.when)? {
                if rules.insert(c, act.clone()).is_some() {
                    return Err(TramError::Duplicate);
                }
            }
        }
        let t = Tram { registers: raw.registers, depth: raw.depth, ops, states: raw.states, accept, reject, rules };
        t.validate()?;
        Ok(t)
    }
}

impl From<Tram> for RawTram {
    fn from(t: Tram) -> Self {
        let key = |(q, v): &(usize, Vec<bool>)| RawKey { state: t.states[*q].clone(), tests: bits(v) };
        let k = t.depth;
        let ground = |w: &Option<ArithTerm>| w.as_ref().map(|a| a.to_ground(k));
        let rules = t
            .rules
            .iter()
            .map(|(c, act)| {
                let chunks: Vec<&[Option<ArithTerm>]> = act.writes.chunks(k + 1).collect();
                RawRule {
                    when: key(c),
                    state: t.states[act.state].clone(),
                    rho: chunks.iter().map(|ch| ground(&ch[0])).collect(),
                    tau: if k == 0 {
                        Vec::new()
                    } else {
                        chunks.iter().map(|ch| ch[1..].iter().map(ground).collect()).collect()
                    },
                }
            })
            .collect();
        RawTram {
            registers: t.registers,
            depth: t.depth,
            ops: t.ops.iter().map(|o| o.name().to_string()).collect(),
            accept: t.accept.iter().map(key).collect(),
            reject: t.reject.iter().map(key).collect(),
            rules,
            states: t.states.clone(),
        }
    }
}
