use std::collections::BTreeMap;
use std::fmt;

use super::{gra, tram, wt, TranslateError};
use crate::algebra::{State, Status};
use crate::engine::{run, ChoiceSource, Ema, Outcome, Trace};
use crate::machines::{grammar_step, tm_run, tram_run, Grammar, MachineOutcome, Tram, TramConfig, WindowTm};

/// Result of running a machine and an EMA side by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lockstep {
    /// Every configuration matched; the EMA took one extra step to commit a
    /// halting status.
    Agree {
        steps: usize,
        outcome: MachineOutcome,
    },
    Diverge {
        step: usize,
        machine: String,
        ema: String,
    },
}

impl fmt::Display for Lockstep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lockstep::Agree { steps, outcome } => write!(f, "agree steps={steps} outcome={outcome}"),
            Lockstep::Diverge { step, machine, ema } => {
                write!(f, "diverge at t={step}\n  machine: {machine}\n  ema:     {ema}")
            }
        }
    }
}

fn status_name(s: &State) -> &'static str {
    s.status().map_or("undef", Status::as_str)
}

/// Compares machine configurations with projected EMA states, then checks
/// that the EMA ends the way the machine does.
fn lockstep<P: PartialEq>(
    configs: &[P],
    outcome: &MachineOutcome,
    trace: &Trace,
    project: impl Fn(&State) -> Option<P>,
    render: impl Fn(&P) -> String,
) -> Lockstep {
    let diverge = |step, machine: String, ema: String| Lockstep::Diverge { step, machine, ema };
    for (t, c) in configs.iter().enumerate() {
        let Some(s) = trace.states.get(t) else {
            return diverge(t, render(c), format!("ended with {}", trace.outcome));
        };
        match project(s) {
            Some(p) if p == *c && s.status() == Some(Status::Go) => {}
            Some(p) => return diverge(t, render(c), format!("{} status={}", render(&p), status_name(s))),
            None => return diverge(t, render(c), "no machine configuration".into()),
        }
    }
    let last = configs.len() - 1;
    let len = trace.states.len();
    let ok = match outcome {
        MachineOutcome::Accepted => len == last + 2 && trace.outcome == Outcome::Accepted,
        MachineOutcome::Rejected => len == last + 2 && trace.outcome == Outcome::Rejected,
        MachineOutcome::Stuck(_) => len == last + 1 && matches!(trace.outcome, Outcome::Stuck(_)),
        MachineOutcome::StepLimit => len == last + 2 && trace.states[last + 1].status() == Some(Status::Go),
    };
    if ok {
        Lockstep::Agree { steps: last, outcome: outcome.clone() }
    } else {
        let ema = match trace.states.get(last + 1) {
            Some(s) => format!("status={} outcome={}", status_name(s), trace.outcome),
            None => format!("outcome={}", trace.outcome),
        };
        diverge(last + 1, format!("outcome={outcome}"), ema)
    }
}

fn render_tm(m: &WindowTm) -> impl Fn(&crate::machines::TmConfig) -> String + '_ {
    move |c| {
        let tapes: Vec<String> = c
            .tapes
            .iter()
            .map(|t| {
                let cells: Vec<String> = t.iter().map(|(p, a)| format!("{p}:{}", m.alphabet[*a])).collect();
                format!("{{{}}}", cells.join(","))
            })
            .collect();
        format!("q={} heads={:?} tapes={}", m.states[c.state], c.heads, tapes.join(""))
    }
}

fn render_tram(t: &Tram) -> impl Fn(&TramConfig) -> String + '_ {
    move |c| {
        let cells: Vec<String> = c.memory.iter().map(|(a, v)| format!("{a}:{v}")).collect();
        format!("q={} memory={{{}}}", t.states[c.state], cells.join(","))
    }
}

/// Runs `m` for up to `max_steps` transitions and `ema` for one more.
pub fn compare_tm(m: &WindowTm, ema: &Ema, word: &[usize], max_steps: usize) -> Result<Lockstep, TranslateError> {
    let (report, shape) = wt::check(ema);
    let shape = shape.ok_or(TranslateError::Class(report))?;
    let machine = tm_run(m, word, max_steps);
    let trace = run(ema, &wt::wt_input(&shape, word), &ChoiceSource::none(), max_steps + 1)
        .map_err(|e| TranslateError::Unrepresentable(e.to_string()))?;
    Ok(lockstep(&machine.configs, &machine.outcome, &trace, |s| wt::wt_project(&shape, s), render_tm(m)))
}

pub fn compare_tram(
    t: &Tram,
    ema: &Ema,
    memory: &BTreeMap<u64, u64>,
    max_steps: usize,
) -> Result<Lockstep, TranslateError> {
    let (report, shape) = tram::check(ema);
    let shape = shape.ok_or(TranslateError::Class(report))?;
    let machine = tram_run(t, memory.clone(), max_steps);
    let trace = run(ema, &tram::tram_input(&shape, memory), &ChoiceSource::none(), max_steps + 1)
        .map_err(|e| TranslateError::Unrepresentable(e.to_string()))?;
    Ok(lockstep(&machine.configs, &machine.outcome, &trace, |s| tram::tram_project(&shape, s), render_tram(t)))
}

/// Replays the derivation `moves` (rule, position) in both models.
pub fn compare_grammar(g: &Grammar, ema: &Ema, word: &str, moves: &[(usize, u64)]) -> Result<Lockstep, TranslateError> {
    let (report, shape) = gra::check(ema);
    let shape = shape.ok_or(TranslateError::Class(report))?;
    let mut words = vec![word.to_owned()];
    for &(rule, pos) in moves {
        if rule >= g.rules.len() {
            return Err(TranslateError::Unrepresentable(format!("rule {rule} does not exist")));
        }
        let next = grammar_step(g, words.last().expect("nonempty"), rule, pos);
        words.push(next);
    }
    let choices = ChoiceSource::Scripted {
        branches: moves.iter().map(|m| m.0).collect(),
        externals: moves.iter().map(|m| shape.choice(m.1)).collect(),
    };
    let trace = run(ema, &gra::gra_input(&shape, word), &choices, moves.len())
        .map_err(|e| TranslateError::Unrepresentable(e.to_string()))?;
    // A derivation never halts, so the EMA is held to the same length.
    let mut padded = trace.clone();
    if padded.states.len() == words.len() {
        padded.states.push(trace.final_state().clone());
    }
    Ok(lockstep(&words, &MachineOutcome::StepLimit, &padded, |s| gra::gra_word(&shape, s), String::clone))
}
