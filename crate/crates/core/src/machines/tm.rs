use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{label_index, MachineOutcome};
use crate::signature::is_identifier;

/// Control state plus the `2k+1` scanned letters of every tape, as indices
/// into the state and letter lists.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalConfig {
    pub state: usize,
    pub windows: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmAction {
    pub state: usize,
    pub write: Vec<Vec<usize>>,
    pub moves: Vec<i64>,
}

/// An `n`-tape window Turing machine of radius `k`. Letter 0 is the blank
/// and state 0 is initial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTm", into = "RawTm")]
pub struct WindowTm {
    pub tapes: usize,
    pub radius: usize,
    pub alphabet: Vec<String>,
    pub states: Vec<String>,
    pub accept: BTreeSet<LocalConfig>,
    pub reject: BTreeSet<LocalConfig>,
    pub rules: BTreeMap<LocalConfig, TmAction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TmError {
    #[error("a machine needs at least one tape")]
    NoTapes,
    #[error("the alphabet and the state set must be nonempty")]
    Empty,
    #[error("`{0}` is not a valid label")]
    BadLabel(String),
    #[error("label `{0}` is declared twice")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("a window or write has the wrong shape")]
    Shape,
    #[error("move {0} exceeds the radius")]
    MoveOutOfRange(i64),
    #[error("a local configuration is listed twice")]
    Duplicate,
    #[error("a final local configuration also has a transition")]
    FinalWithRule,
    #[error("a local configuration is both accepting and rejecting")]
    AcceptReject,
}

impl WindowTm {
    pub fn width(&self) -> usize {
        2 * self.radius + 1
    }

    /// Checks labels, shapes and the disjointness conditions.
    pub fn validate(&self) -> Result<(), TmError> {
        if self.tapes == 0 {
            return Err(TmError::NoTapes);
        }
        if self.alphabet.is_empty() || self.states.is_empty() {
            return Err(TmError::Empty);
        }
        let mut seen = BTreeSet::new();
        for l in self.alphabet.iter().chain(&self.states) {
            if !is_identifier(l) {
                return Err(TmError::BadLabel(l.clone()));
            }
        }
        for labels in [&self.alphabet, &self.states] {
            seen.clear();
            for l in labels {
                if !seen.insert(l) {
                    return Err(TmError::DuplicateLabel(l.clone()));
                }
            }
        }
        let k = self.radius as i64;
        let shape_ok = |ws: &Vec<Vec<usize>>| {
            ws.len() == self.tapes
                && ws.iter().all(|w| w.len() == self.width() && w.iter().all(|&a| a < self.alphabet.len()))
        };
        for lc in self.accept.iter().chain(&self.reject).chain(self.rules.keys()) {
            if lc.state >= self.states.len() || !shape_ok(&lc.windows) {
                return Err(TmError::Shape);
            }
        }
        for act in self.rules.values() {
            if act.state >= self.states.len() || !shape_ok(&act.write) || act.moves.len() != self.tapes {
                return Err(TmError::Shape);
            }
            if let Some(m) = act.moves.iter().find(|m| m.abs() > k) {
                return Err(TmError::MoveOutOfRange(*m));
            }
        }
        if self.accept.intersection(&self.reject).next().is_some() {
            return Err(TmError::AcceptReject);
        }
        if self.rules.keys().any(|lc| self.accept.contains(lc) || self.reject.contains(lc)) {
            return Err(TmError::FinalWithRule);
        }
        Ok(())
    }

    /// Letter indices of a word given as labels.
    pub fn word(&self, labels: &[&str]) -> Result<Vec<usize>, TmError> {
        labels
            .iter()
            .map(|l| label_index(&self.alphabet, l).ok_or_else(|| TmError::UnknownLabel(l.to_string())))
            .collect()
    }

    /// Every local configuration, in lexicographic order.
    pub fn all_local_configs(&self) -> Vec<LocalConfig> {
        let cells = self.tapes * self.width();
        let s = self.alphabet.len();
        let mut out = Vec::new();
        for state in 0..self.states.len() {
            let mut digits = vec![0usize; cells];
            loop {
                out.push(LocalConfig { state, windows: digits.chunks(self.width()).map(<[usize]>::to_vec).collect() });
                let Some(i) = (0..cells).rev().find(|&i| digits[i] + 1 < s) else { break };
                digits[i] += 1;
                digits[i + 1..].iter_mut().for_each(|d| *d = 0);
            }
        }
        out
    }

    pub fn initial_config(&self, input: &[usize]) -> TmConfig {
        let mut tapes = vec![BTreeMap::new(); self.tapes];
        for (i, &a) in input.iter().enumerate() {
            if a != 0 {
                tapes[0].insert(i as i64, a);
            }
        }
        TmConfig { state: 0, heads: vec![0; self.tapes], tapes }
    }
}

/// State, head positions and tape contents; blank cells are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmConfig {
    pub state: usize,
    pub heads: Vec<i64>,
    pub tapes: Vec<BTreeMap<i64, usize>>,
}

impl TmConfig {
    pub fn cell(&self, tape: usize, pos: i64) -> usize {
        self.tapes[tape].get(&pos).copied().unwrap_or(0)
    }
}

pub fn tm_local_config(m: &WindowTm, c: &TmConfig) -> LocalConfig {
    let k = m.radius as i64;
    let windows = (0..m.tapes).map(|i| (-k..=k).map(|o| c.cell(i, c.heads[i] + o)).collect()).collect();
    LocalConfig { state: c.state, windows }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TmStep {
    Next(TmConfig),
    Accept,
    Reject,
    Stuck,
}

/// One transition. Writes are applied to the scanned windows before the
/// heads move.
pub fn tm_step(m: &WindowTm, c: &TmConfig) -> TmStep {
    let lc = tm_local_config(m, c);
    if m.accept.contains(&lc) {
        return TmStep::Accept;
    }
    if m.reject.contains(&lc) {
        return TmStep::Reject;
    }
    let Some(act) = m.rules.get(&lc) else { return TmStep::Stuck };
    let k = m.radius as i64;
    let mut next = c.clone();
    next.state = act.state;
    for i in 0..m.tapes {
        for (o, &a) in (-k..=k).zip(&act.write[i]) {
            let p = c.heads[i] + o;
            if a == 0 {
                next.tapes[i].remove(&p);
            } else {
                next.tapes[i].insert(p, a);
            }
        }
        next.heads[i] += act.moves[i];
    }
    TmStep::Next(next)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TmTrace {
    pub configs: Vec<TmConfig>,
    pub outcome: MachineOutcome,
    pub steps: usize,
}

pub fn tm_run(m: &WindowTm, input: &[usize], max_steps: usize) -> TmTrace {
    let mut configs = vec![m.initial_config(input)];
    loop {
        let steps = configs.len() - 1;
        let outcome = match tm_step(m, configs.last().expect("nonempty")) {
            TmStep::Accept => MachineOutcome::Accepted,
            TmStep::Reject => MachineOutcome::Rejected,
            TmStep::Stuck => MachineOutcome::Stuck("no-transition".into()),
            TmStep::Next(_) if steps >= max_steps => MachineOutcome::StepLimit,
            TmStep::Next(c) => {
                configs.push(c);
                continue;
            }
        };
        return TmTrace { configs, outcome, steps };
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocal {
    state: String,
    windows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    when: RawLocal,
    state: String,
    write: Vec<Vec<String>>,
    #[serde(rename = "move")]
    moves: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTm {
    tapes: usize,
    radius: usize,
    alphabet: Vec<String>,
    states: Vec<String>,
    #[serde(default)]
    accept: Vec<RawLocal>,
    #[serde(default)]
    reject: Vec<RawLocal>,
    #[serde(default)]
    rules: Vec<RawRule>,
}

/// Wildcard letter in input files: any letter in `when`, the old letter in
/// `write`.
const ANY: &str = "*";

impl RawTm {
    fn letter(&self, l: &str) -> Result<usize, TmError> {
        label_index(&self.alphabet, l).ok_or_else(|| TmError::UnknownLabel(l.into()))
    }

    fn state(&self, l: &str) -> Result<usize, TmError> {
        label_index(&self.states, l).ok_or_else(|| TmError::UnknownLabel(l.into()))
    }

    /// All local configurations matching a pattern with wildcards.
    fn expand(&self, raw: &RawLocal) -> Result<Vec<LocalConfig>, TmError> {
        let state = self.state(&raw.state)?;
        let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for w in &raw.windows {
            let mut cells: Vec<Vec<usize>> = vec![Vec::new()];
            for l in w {
                let choices: Vec<usize> =
                    if l == ANY { (0..self.alphabet.len()).collect() } else { vec![self.letter(l)?] };
                cells = cells
                    .into_iter()
                    .flat_map(|prefix| {
                        choices.iter().map(move |&a| {
                            let mut p = prefix.clone();
                            p.push(a);
                            p
                        })
                    })
                    .collect();
            }
            acc = acc
                .into_iter()
                .flat_map(|ws| {
                    cells.iter().map(move |cell| {
                        let mut ws = ws.clone();
                        ws.push(cell.clone());
                        ws
                    })
                })
                .collect();
        }
        Ok(acc.into_iter().map(|windows| LocalConfig { state, windows }).collect())
    }
}

impl TryFrom<RawTm> for WindowTm {
    type Error = TmError;

    fn try_from(raw: RawTm) -> Result<Self, TmError> {
        let mut accept = BTreeSet::new();
        let mut reject = BTreeSet::new();
        for (list, set) in [(&raw.accept, &mut accept), (&raw.reject, &mut reject)] {
            for r in list {
                for lc in raw.expand(r)? {
                    if !set.insert(lc) {
                        return Err(TmError::Duplicate);
                    }
                }
            }
        }
        let mut rules = BTreeMap::new();
        for rule in &raw.rules {
            let state = raw.state(&rule.state)?;
            if rule.write.len() != raw.tapes {
                return Err(TmError::Shape);
            }
            for lc in raw.expand(&rule.when)? {
                let mut write = Vec::with_capacity(raw.tapes);
                for (w, old) in rule.write.iter().zip(&lc.windows) {
                    if w.len() != old.len() {
                        return Err(TmError::Shape);
                    }
                    let cells = w
                        .iter()
                        .zip(old)
                        .map(|(l, &o)| if l == ANY { Ok(o) } else { raw.letter(l) })
                        .collect::<Result<Vec<_>, _>>()?;
                    write.push(cells);
                }
                let act = TmAction { state, write, moves: rule.moves.clone() };
                if rules.insert(lc, act).is_some() {
                    return Err(TmError::Duplicate);
                }
            }
        }
        let m = WindowTm {
            tapes: raw.tapes,
            radius: raw.radius,
            alphabet: raw.alphabet,
            states: raw.states,
            accept,
            reject,
            rules,
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<WindowTm> for RawTm {
    fn from(m: WindowTm) -> Self {
        let labels = |ws: &[Vec<usize>]| -> Vec<Vec<String>> {
            ws.iter().map(|w| w.iter().map(|&a| m.alphabet[a].clone()).collect()).collect()
        };
        let local = |lc: &LocalConfig| RawLocal { state: m.states[lc.state].clone(), windows: labels(&lc.windows) };
        RawTm {
            tapes: m.tapes,
            radius: m.radius,
            accept: m.accept.iter().map(local).collect(),
            reject: m.reject.iter().map(local).collect(),
            rules: m
                .rules
                .iter()
                .map(|(lc, act)| RawRule {
                    when: local(lc),
                    state: m.states[act.state].clone(),
                    write: labels(&act.write),
                    moves: act.moves.clone(),
                })
                .collect(),
            alphabet: m.alphabet.clone(),
            states: m.states.clone(),
        }
    }
}
