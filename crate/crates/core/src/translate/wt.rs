use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::report::{ClassId, ClassReport, Parameters};
use super::{TranslateError, MAX_ENUMERATION};
use crate::algebra::{Body, DomainDescriptor, GroundTerm, PartialInterpretation, Primitive, State, Status, Value};
use crate::engine::{init_state, Ema, EmaError, Input};
use crate::functional::{Applied, BetaTable, GuardPair, Pattern, Presentation, Row, UpdateTuple};
use crate::machines::{LocalConfig, TmAction, TmConfig, WindowTm};
use crate::signature::{NSortType, Signature, SortId, Symbol, SymbolKind, STATUS};

/// The parts of a window-machine EMA, located by type and interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WtShape {
    pub tapes: usize,
    pub radius: usize,
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    state_sort: SortId,
    letter_sort: SortId,
    q: String,
    pos: Vec<String>,
    cells: Vec<String>,
    succ: Vec<String>,
    pred: Vec<String>,
}

fn z_sort(t: usize) -> SortId {
    SortId(t as u32 + 1)
}

pub(super) fn check(ema: &Ema) -> (ClassReport, Option<WtShape>) {
    let mut rep = ClassReport::new(ClassId::Wt);
    let sig = ema.signature();
    let doms = ema.domains();
    if !ema.is_deterministic() {
        rep.violate(0, "the machine must have exactly one functional");
    }
    for i in sig.indices(SymbolKind::External) {
        rep.violate(0, format!("external symbol `{}` is not allowed", sig.symbol(i).name));
    }

    let n = doms.len().saturating_sub(3);
    let mut tags = BTreeSet::new();
    let lines_ok = doms[..n].iter().all(|d| matches!(d, DomainDescriptor::IntLine(t) if tags.insert(*t)));
    let finite = |i: usize| matches!(doms.get(i), Some(DomainDescriptor::FiniteEnum(l)) if !l.is_empty());
    if n == 0 || !lines_ok || !finite(n) || !finite(n + 1) {
        rep.violate(1, "sorts must be n >= 1 integer lines, then states, letters and the status");
        return (rep, None);
    }
    let state_sort = SortId(n as u32 + 1);
    let letter_sort = SortId(n as u32 + 2);
    let status_sort = sig.status_sort();
    let states = doms[n].labels().expect("finite").to_vec();
    let alphabet = doms[n + 1].labels().expect("finite").to_vec();

    let mut state_consts = vec![Vec::new(); states.len()];
    let mut letter_consts = vec![Vec::new(); alphabet.len()];
    let mut status_consts = vec![Vec::new(); 3];
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for i in sig.indices(SymbolKind::Static) {
        let sym = sig.symbol(i);
        let name = sym.name.clone();
        let res = sym.ty.result();
        let line = |a: &[SortId]| match a {
            [s] if Some(*s) == res && s.index() < n => Some(s.index()),
            _ => None,
        };
        match (&ema.statics()[&sym.name], sym.ty.args.as_slice()) {
            (Body::Element(Some(v)), []) if res == Some(state_sort) => {
                state_consts[v.as_label().expect("sorted") as usize].push(name)
            }
            (Body::Element(Some(v)), []) if res == Some(letter_sort) => {
                letter_consts[v.as_label().expect("sorted") as usize].push(name)
            }
            (Body::Element(Some(v)), []) if res == Some(status_sort) => {
                status_consts[v.as_status().expect("sorted") as usize].push(name)
            }
            (Body::Builtin(Primitive::Succ), a) if line(a).is_some() => succ[line(a).unwrap()].push(name),
            (Body::Builtin(Primitive::Pred), a) if line(a).is_some() => pred[line(a).unwrap()].push(name),
            _ => rep.violate(2, format!("unexpected static symbol `{name}`")),
        }
    }
    for (j, found) in state_consts.iter().enumerate() {
        rep.exactly_one(2, found, || format!("constant for state `{}`", states[j]));
    }
    for (a, found) in letter_consts.iter().enumerate() {
        rep.exactly_one(2, found, || format!("constant for letter `{}`", alphabet[a]));
    }
    for s in [Status::Go, Status::Acc, Status::Rej] {
        rep.exactly_one(2, &status_consts[s as usize], || format!("constant for status {}", s.as_str()));
    }
    let succ: Vec<Option<String>> =
        (0..n).map(|t| rep.exactly_one(2, &succ[t], || format!("successor on line {}", t + 1))).collect();
    let pred: Vec<Option<String>> =
        (0..n).map(|t| rep.exactly_one(2, &pred[t], || format!("predecessor on line {}", t + 1))).collect();

    for i in sig.indices(SymbolKind::StaticInput) {
        rep.violate(3, format!("static input `{}` is not allowed", sig.symbol(i).name));
    }

    let mut has_status = false;
    let mut q = Vec::new();
    let mut pos = vec![Vec::new(); n];
    for i in sig.indices(SymbolKind::Dynamic) {
        let sym = sig.symbol(i);
        let init = &ema.initials()[&sym.name];
        let res = sym.ty.result();
        if sym.name == STATUS {
            has_status = true;
            if *init != Body::element(Value::status(status_sort, Status::Go)) {
                rep.violate(4, "status must start at go");
            }
        } else if sym.ty.is_constant() && res == Some(state_sort) {
            if *init != Body::element(Value::label(state_sort, 0)) {
                rep.violate(4, format!("`{}` must start in state `{}`", sym.name, states[0]));
            }
            q.push(sym.name.clone());
        } else if let Some(t) = res.filter(|s| sym.ty.is_constant() && s.index() < n).map(SortId::index) {
            if *init != Body::element(Value::int(z_sort(t), 0)) {
                rep.violate(4, format!("head `{}` must start at 0", sym.name));
            }
            pos[t].push(sym.name.clone());
        } else {
            rep.violate(4, format!("unexpected dynamic symbol `{}`", sym.name));
        }
    }
    if !has_status {
        rep.violate(4, "status must be a dynamic symbol");
    }
    let q = rep.exactly_one(4, &q, || "dynamic state constant".into());
    let pos: Vec<Option<String>> =
        (0..n).map(|t| rep.exactly_one(4, &pos[t], || format!("head on line {}", t + 1))).collect();

    let mut cells = vec![Vec::new(); n];
    for i in sig.indices(SymbolKind::DynamicInput) {
        let sym = sig.symbol(i);
        if sym.name == STATUS {
            continue;
        }
        match (sym.ty.args.as_slice(), sym.ty.result()) {
            ([a], Some(r)) if a.index() < n && r == letter_sort => cells[a.index()].push(sym.name.clone()),
            _ => rep.violate(5, format!("unexpected dynamic input `{}`", sym.name)),
        }
    }
    let cells: Vec<Option<String>> =
        (0..n).map(|t| rep.exactly_one(5, &cells[t], || format!("tape on line {}", t + 1))).collect();

    if !rep.violations.is_empty() {
        return (rep, None);
    }
    let all = |v: Vec<Option<String>>| v.into_iter().collect::<Option<Vec<_>>>().expect("checked");
    let mut shape = WtShape {
        tapes: n,
        radius: 0,
        states,
        alphabet,
        state_sort,
        letter_sort,
        q: q.expect("checked"),
        pos: all(pos),
        cells: all(cells),
        succ: all(succ),
        pred: all(pred),
    };
    shape.radius = shape.radius_of(&ema.functionals()[0]);
    rep.parameters = Some(Parameters::Wt { n, k: shape.radius, r: shape.states.len(), s: shape.alphabet.len() });
    (rep, Some(shape))
}

enum Line {
    Head,
    Step(i64),
}

impl WtShape {
    fn lines(&self) -> HashMap<&str, Line> {
        let mut m = HashMap::new();
        for t in 0..self.tapes {
            m.insert(self.pos[t].as_str(), Line::Head);
            m.insert(self.succ[t].as_str(), Line::Step(1));
            m.insert(self.pred[t].as_str(), Line::Step(-1));
        }
        m
    }

    /// Largest head offset at which the functional reads or writes.
    fn radius_of(&self, p: &Presentation) -> usize {
        let lines = self.lines();
        fn offset(lines: &HashMap<&str, Line>, t: &GroundTerm) -> Option<i64> {
            match lines.get(t.head.as_str())? {
                Line::Head => Some(0),
                Line::Step(d) => Some(offset(lines, t.args.first()?)? + d),
            }
        }
        fn reach(lines: &HashMap<&str, Line>, t: &GroundTerm, k: &mut u64) {
            match offset(lines, t) {
                Some(o) => *k = (*k).max(o.unsigned_abs()),
                None => t.args.iter().for_each(|a| reach(lines, a, k)),
            }
        }
        let mut k = 0;
        for t in p.terms() {
            reach(&lines, t, &mut k);
        }
        k as usize
    }

    fn letter(&self, a: usize) -> Value {
        Value::label(self.letter_sort, a as u32)
    }

    fn tape_body(&self, t: usize, fill: usize, cells: impl IntoIterator<Item = (i64, usize)>) -> Body {
        let exceptions = cells
            .into_iter()
            .filter(|&(_, a)| a != fill)
            .map(|(p, a)| (vec![Value::int(z_sort(t), p)], Some(self.letter(a))))
            .collect();
        Body::Defaulted { default: self.letter(fill), exceptions }
    }

    /// `state` with control state and windows of `lc` around head 0, and
    /// `fill` everywhere else.
    fn local_state(&self, base: &State, lc: &LocalConfig, fill: usize) -> Result<State, EmaError> {
        let k = self.radius as i64;
        let sig = base.signature();
        let mut s = base.clone();
        let set = |s: &mut State, name: &str, body: Body| {
            let idx = sig.index_of(name).expect("shape symbol");
            s.replace(idx, PartialInterpretation::new(sig.symbol(idx).clone(), body))
        };
        set(&mut s, &self.q, Body::element(Value::label(self.state_sort, lc.state as u32)))?;
        for t in 0..self.tapes {
            let window = (-k..=k).zip(lc.windows[t].iter().copied());
            set(&mut s, &self.cells[t], self.tape_body(t, fill, window))?;
        }
        Ok(s)
    }

    fn describe(&self, lc: &LocalConfig) -> String {
        let windows: Vec<String> = lc
            .windows
            .iter()
            .map(|w| w.iter().map(|&a| self.alphabet[a].as_str()).collect::<Vec<_>>().join(","))
            .collect();
        format!("{} [{}]", self.states[lc.state], windows.join("|"))
    }
}

/// Input whose first tape holds `word` from cell 0 on; other tapes blank.
pub fn wt_input(shape: &WtShape, word: &[usize]) -> Input {
    let mut input = Input::new();
    for t in 0..shape.tapes {
        let cells: Vec<(i64, usize)> =
            if t == 0 { word.iter().enumerate().map(|(i, &a)| (i as i64, a)).collect() } else { Vec::new() };
        input = input.with_dynamic(shape.cells[t].clone(), shape.tape_body(t, 0, cells));
    }
    input
}

/// The machine configuration an EMA state stands for, when the tapes are
/// blank almost everywhere.
pub fn wt_project(shape: &WtShape, state: &State) -> Option<TmConfig> {
    let value = |name: &str| state.interp_by_name(name)?.apply(&[]);
    let control = value(&shape.q)?.as_label()? as usize;
    let heads = shape.pos.iter().map(|p| value(p)?.as_int()).collect::<Option<Vec<_>>>()?;
    let mut tapes = Vec::with_capacity(shape.tapes);
    for name in &shape.cells {
        let Body::Defaulted { default, exceptions } = &state.interp_by_name(name)?.body else { return None };
        if default.as_label()? != 0 {
            return None;
        }
        let mut tape = BTreeMap::new();
        for (point, v) in exceptions {
            let a = v.as_ref()?.as_label()? as usize;
            if a != 0 {
                tape.insert(point.first()?.as_int()?, a);
            }
        }
        tapes.push(tape);
    }
    Some(TmConfig { state: control, heads, tapes })
}

/// Reads a window machine off a class member by running its functional on
/// every local configuration.
pub fn ema_to_tm(ema: &Ema) -> Result<WindowTm, TranslateError> {
    let (report, shape) = check(ema);
    let shape = shape.ok_or(TranslateError::Class(report))?;
    let (n, k, r, s) = (shape.tapes, shape.radius, shape.states.len(), shape.alphabet.len());
    let count = (s as u64)
        .checked_pow((n * (2 * k + 1)) as u32)
        .and_then(|c| c.checked_mul(r as u64))
        .filter(|&c| c <= MAX_ENUMERATION as u64)
        .ok_or(TranslateError::TooLarge(usize::MAX))?;
    let mut tm = WindowTm {
        tapes: n,
        radius: k,
        alphabet: shape.alphabet.clone(),
        states: shape.states.clone(),
        accept: BTreeSet::new(),
        reject: BTreeSet::new(),
        rules: BTreeMap::new(),
    };
    let sig = ema.signature();
    let status = sig.status_index().expect("validated");
    let q = sig.index_of(&shape.q).expect("shape symbol");
    let pos: Vec<usize> = shape.pos.iter().map(|p| sig.index_of(p).expect("shape symbol")).collect();
    let cells: Vec<usize> = shape.cells.iter().map(|c| sig.index_of(c).expect("shape symbol")).collect();
    let base = init_state(ema, &wt_input(&shape, &[]))?;
    let phi = ema.compiled(0);
    let apply = |st: &State| phi.apply(st).map_err(|e| TranslateError::Unrepresentable(e.to_string()));
    let configs = tm.all_local_configs();
    debug_assert_eq!(configs.len() as u64, count);
    for lc in configs {
        let applied = apply(&shape.local_state(&base, &lc, 0)?)?;
        if s > 1 && apply(&shape.local_state(&base, &lc, 1)?)? != applied {
            return Err(TranslateError::WindowDependence(shape.describe(&lc)));
        }
        let Applied::Updates(updates) = applied else { continue };
        let undefined =
            || TranslateError::Unrepresentable(format!("a value becomes undefined at {}", shape.describe(&lc)));
        let mut halt = None;
        let mut changed = false;
        let mut action = TmAction { state: lc.state, write: lc.windows.clone(), moves: vec![0; n] };
        for (idx, upd) in updates {
            for (point, v) in &upd.g {
                let v = v.as_ref().ok_or_else(undefined)?;
                if idx == status {
                    match v.as_status().expect("sorted") {
                        Status::Go => {}
                        st => halt = Some(st),
                    }
                } else if idx == q {
                    action.state = v.as_label().expect("sorted") as usize;
                    changed |= action.state != lc.state;
                } else if let Some(t) = pos.iter().position(|&p| p == idx) {
                    action.moves[t] = v.as_int().expect("sorted");
                    changed |= action.moves[t] != 0;
                } else if let Some(t) = cells.iter().position(|&c| c == idx) {
                    let o = point[0].as_int().expect("sorted");
                    let slot = usize::try_from(o + k as i64).ok().filter(|&i| i <= 2 * k).ok_or_else(undefined)?;
                    let a = v.as_label().expect("sorted") as usize;
                    changed |= a != lc.windows[t][slot];
                    action.write[t][slot] = a;
                }
            }
        }
        match halt {
            Some(_) if changed => return Err(TranslateError::HaltingSideEffect(shape.describe(&lc))),
            Some(Status::Acc) => {
                tm.accept.insert(lc);
            }
            Some(_) => {
                tm.reject.insert(lc);
            }
            None => {
                tm.rules.insert(lc, action);
            }
        }
    }
    tm.validate()?;
    Ok(tm)
}

struct WtNames {
    pos: Vec<String>,
    cells: Vec<String>,
    succ: Vec<String>,
    pred: Vec<String>,
}

impl WtNames {
    fn new(n: usize) -> Self {
        let names = |p: &str| (1..=n).map(|i| format!("{p}{i}")).collect();
        WtNames { pos: names("pos"), cells: names("c"), succ: names("Succ"), pred: names("Pred") }
    }

    fn offset(&self, t: usize, o: i64) -> GroundTerm {
        let head = GroundTerm::constant(&self.pos[t]);
        let step = if o >= 0 { &self.succ[t] } else { &self.pred[t] };
        GroundTerm::iterate(step, o.unsigned_abs() as usize, head)
    }

    fn cell(&self, t: usize, o: i64) -> GroundTerm {
        GroundTerm::unary(&self.cells[t], self.offset(t, o))
    }
}

fn state_const(m: &WindowTm, j: usize) -> GroundTerm {
    GroundTerm::constant(format!("q_{}", m.states[j]))
}

fn letter_const(m: &WindowTm, a: usize) -> GroundTerm {
    GroundTerm::constant(format!("sigma_{}", m.alphabet[a]))
}

/// Compiles a window machine into a class member. Rows are exact local
/// configurations and record only actual changes; configurations without a
/// transition fall through to a catch-all that clashes on `q`.
pub fn tm_to_ema(m: &WindowTm) -> Result<Ema, TranslateError> {
    m.validate()?;
    let (n, r, s) = (m.tapes, m.states.len(), m.alphabet.len());
    let k = m.radius as i64;
    let width = m.width();
    let count = (s as u64)
        .checked_pow((n * width) as u32)
        .and_then(|c| c.checked_mul(r as u64))
        .filter(|&c| c <= MAX_ENUMERATION as u64)
        .ok_or(TranslateError::TooLarge(usize::MAX))?;
    let names = WtNames::new(n);
    let state_sort = SortId(n as u32 + 1);
    let letter_sort = SortId(n as u32 + 2);
    let status_sort = SortId(n as u32 + 3);

    let mut b = Signature::builder(n as u32 + 3);
    let mut statics = BTreeMap::new();
    for j in 0..r {
        b.push(SymbolKind::Static, Symbol::new(state_const(m, j).head, NSortType::constant(state_sort)));
        statics.insert(state_const(m, j).head, Body::element(Value::label(state_sort, j as u32)));
    }
    for a in 0..s {
        b.push(SymbolKind::Static, Symbol::new(letter_const(m, a).head, NSortType::constant(letter_sort)));
        statics.insert(letter_const(m, a).head, Body::element(Value::label(letter_sort, a as u32)));
    }
    for st in [Status::Go, Status::Acc, Status::Rej] {
        b.push(SymbolKind::Static, Symbol::new(st.as_str(), NSortType::constant(status_sort)));
        statics.insert(st.as_str().to_owned(), Body::element(Value::status(status_sort, st)));
    }
    for t in 0..n {
        let z = z_sort(t);
        for (name, prim) in [(&names.succ[t], Primitive::Succ), (&names.pred[t], Primitive::Pred)] {
            b.push(SymbolKind::Static, Symbol::new(name, NSortType::function(vec![z], z)));
            statics.insert(name.clone(), Body::Builtin(prim));
        }
    }
    for t in 0..n {
        b.push(
            SymbolKind::DynamicInput,
            Symbol::new(&names.cells[t], NSortType::function(vec![z_sort(t)], letter_sort)),
        );
    }
    let mut initials = BTreeMap::new();
    for t in 0..n {
        b.push(SymbolKind::Dynamic, Symbol::new(&names.pos[t], NSortType::constant(z_sort(t))));
        initials.insert(names.pos[t].clone(), Body::element(Value::int(z_sort(t), 0)));
    }
    b.push(SymbolKind::Dynamic, Symbol::new("q", NSortType::constant(state_sort)));
    initials.insert("q".into(), Body::element(Value::label(state_sort, 0)));
    b.push(SymbolKind::Dynamic, Symbol::new(STATUS, NSortType::constant(status_sort)));
    initials.insert(STATUS.into(), Body::element(Value::status(status_sort, Status::Go)));

    let q_term = GroundTerm::constant("q");
    let mut guards: Vec<GuardPair> = (0..r).map(|j| GuardPair::new(q_term.clone(), state_const(m, j))).collect();
    for t in 0..n {
        for o in -k..=k {
            for a in 0..s {
                guards.push(GuardPair::new(names.cell(t, o), letter_const(m, a)));
            }
        }
    }
    let guard_of = |t: usize, slot: usize, a: usize| r + (t * width + slot) * s + a;
    let qn = guards.len();

    let mut cell_rows = vec![Vec::new(); n];
    let mut pos_rows = vec![Vec::new(); n];
    let mut q_rows = Vec::new();
    let mut status_rows = Vec::new();
    let configs = m.all_local_configs();
    debug_assert_eq!(configs.len() as u64, count);
    for lc in configs {
        let mut bits = vec![false; qn];
        bits[lc.state] = true;
        for (t, w) in lc.windows.iter().enumerate() {
            for (slot, &a) in w.iter().enumerate() {
                bits[guard_of(t, slot, a)] = true;
            }
        }
        let pattern = Pattern::exact(&bits);
        let halt = if m.accept.contains(&lc) {
            Some(Status::Acc)
        } else if m.reject.contains(&lc) {
            Some(Status::Rej)
        } else {
            None
        };
        if let Some(st) = halt {
            status_rows.push(Row::new(pattern.clone(), vec![UpdateTuple::constant(GroundTerm::constant(st.as_str()))]));
            q_rows.push(Row::new(pattern, vec![]));
            continue;
        }
        let Some(act) = m.rules.get(&lc) else { continue };
        let q_updates =
            if act.state == lc.state { vec![] } else { vec![UpdateTuple::constant(state_const(m, act.state))] };
        q_rows.push(Row::new(pattern.clone(), q_updates));
        for t in 0..n {
            let writes: Vec<UpdateTuple> = (0..width)
                .filter(|&slot| act.write[t][slot] != lc.windows[t][slot])
                .map(|slot| {
                    let o = slot as i64 - k;
                    UpdateTuple::new(vec![names.offset(t, o)], letter_const(m, act.write[t][slot]))
                })
                .collect();
            if !writes.is_empty() {
                cell_rows[t].push(Row::new(pattern.clone(), writes));
            }
            if act.moves[t] != 0 {
                let mv = UpdateTuple::constant(names.offset(t, act.moves[t]));
                pos_rows[t].push(Row::new(pattern.clone(), vec![mv]));
            }
        }
    }
    let table = |symbol: &str, mut rows: Vec<Row>, fallback: Vec<UpdateTuple>| {
        rows.push(Row::new(Pattern::wildcard(qn), fallback));
        BetaTable { symbol: symbol.to_owned(), rows }
    };
    let clash = vec![UpdateTuple::constant(q_term.clone()), UpdateTuple::constant(state_const(m, 0))];
    let mut tables = Vec::new();
    for (t, rows) in cell_rows.into_iter().enumerate() {
        tables.push(table(&names.cells[t], rows, vec![]));
    }
    for (t, rows) in pos_rows.into_iter().enumerate() {
        tables.push(table(&names.pos[t], rows, vec![]));
    }
    tables.push(table("q", q_rows, clash));
    tables.push(table(STATUS, status_rows, vec![]));

    let mut domains: Vec<DomainDescriptor> = (0..n as u32).map(DomainDescriptor::IntLine).collect();
    domains.push(DomainDescriptor::FiniteEnum(m.states.clone()));
    domains.push(DomainDescriptor::FiniteEnum(m.alphabet.clone()));
    domains.push(DomainDescriptor::Status);
    Ok(Ema::new(b.build(), domains, statics, initials, vec![Presentation { guards, tables }])?)
}
