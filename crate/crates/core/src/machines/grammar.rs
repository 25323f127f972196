use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::substitute;

/// A type-0 grammar: rewriting rules over an alphabet of single characters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGrammar", into = "RawGrammar")]
pub struct Grammar {
    pub alphabet: Vec<char>,
    pub rules: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("rule {0} has an empty left-hand side")]
    EmptyLhs(usize),
    #[error("letter `{0}` is not in the alphabet")]
    UnknownLetter(String),
    #[error("alphabet entry `{0}` is not a single character")]
    BadLetter(String),
    #[error("letter `{0}` is declared twice")]
    DuplicateLetter(char),
}

impl Grammar {
    pub fn new(alphabet: Vec<char>, rules: Vec<(String, String)>) -> Result<Self, GrammarError> {
        let g = Grammar { alphabet, rules };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GrammarError> {
        let mut seen = BTreeSet::new();
        for &c in &self.alphabet {
            if !seen.insert(c) {
                return Err(GrammarError::DuplicateLetter(c));
            }
        }
        for (i, (u, v)) in self.rules.iter().enumerate() {
            if u.is_empty() {
                return Err(GrammarError::EmptyLhs(i));
            }
            self.check_word(u)?;
            self.check_word(v)?;
        }
        Ok(())
    }

    pub fn check_word(&self, w: &str) -> Result<(), GrammarError> {
        match w.chars().find(|c| !self.alphabet.contains(c)) {
            Some(c) => Err(GrammarError::UnknownLetter(c.to_string())),
            None => Ok(()),
        }
    }

    /// Every word obtainable from `w` in one step.
    fn successors(&self, w: &str) -> BTreeSet<String> {
        let len = w.chars().count() as u64;
        (0..self.rules.len())
            .flat_map(|r| (0..len).map(move |p| (r, p)))
            .map(|(r, p)| grammar_step(self, w, r, p))
            .collect()
    }
}

/// Rewrites the factor `u_rule` at character position `pos`, or returns `w`
/// unchanged when it does not occur there.
pub fn grammar_step(g: &Grammar, w: &str, rule: usize, pos: u64) -> String {
    let (u, v) = &g.rules[rule];
    substitute(w, pos, u, v)
}

/// Words derivable from `from` in at most `depth` steps.
pub fn derivation_closure(g: &Grammar, from: &str, depth: usize) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([from.to_owned()]);
    let mut frontier = vec![from.to_owned()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for s in g.successors(w) {
                if seen.insert(s.clone()) {
                    next.push(s);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// A shortest derivation from `from` to `to` of at most `bound` steps,
/// starting with `from` and ending with `to`.
pub fn grammar_derives(g: &Grammar, from: &str, to: &str, bound: usize) -> Option<Vec<String>> {
    let mut parent: HashMap<String, Option<String>> = HashMap::from([(from.to_owned(), None)]);
    let mut queue = VecDeque::from([(from.to_owned(), 0usize)]);
    while let Some((w, d)) = queue.pop_front() {
        if w == to {
            let mut path = vec![w.clone()];
            let mut cur = w;
            while let Some(Some(p)) = parent.get(&cur) {
                path.push(p.clone());
                cur = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        if d == bound {
            continue;
        }
        for s in g.successors(&w) {
            if !parent.contains_key(&s) {
                parent.insert(s.clone(), Some(w.clone()));
                queue.push_back((s, d + 1));
            }
        }
    }
    None
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrammar {
    alphabet: Vec<String>,
    rules: Vec<(String, String)>,
}

impl TryFrom<RawGrammar> for Grammar {
    type Error = GrammarError;

    fn try_from(raw: RawGrammar) -> Result<Self, GrammarError> {
        let alphabet = raw
            .alphabet
            .iter()
            .map(|s| {
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(GrammarError::BadLetter(s.clone())),
                }
            })
            .collect::<Result<_, _>>()?;
        Grammar::new(alphabet, raw.rules)
    }
}

impl From<Grammar> for RawGrammar {
    fn from(g: Grammar) -> Self {
        RawGrammar { alphabet: g.alphabet.iter().map(|c| c.to_string()).collect(), rules: g.rules }
    }
}
