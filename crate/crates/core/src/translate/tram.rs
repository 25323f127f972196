use std::collections::{BTreeMap, BTreeSet};

use super::report::{ClassId, ClassReport, Parameters};
use super::{TranslateError, MAX_ENUMERATION};
use crate::algebra::{ArithOp, Body, DomainDescriptor, GroundTerm, Primitive, State, Status, Value};
use crate::engine::{Ema, Input};
use crate::functional::{BetaTable, GuardPair, Pattern, Presentation, Row, UpdateTuple, UpdateValue};
use crate::machines::{boolean_test_count, ArithTerm, Tram, TramAction, TramConfig};
use crate::signature::{NSortType, Signature, SortId, Symbol, SymbolKind, STATUS};

const NAT: SortId = SortId(1);
const ADDR: SortId = SortId(2);
const STATE: SortId = SortId(3);
const STATUS_SORT: SortId = SortId(4);

/// The parts of a TRAM-shaped EMA, located by type and interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TramShape {
    pub registers: usize,
    pub depth: usize,
    pub states: Vec<String>,
    pub ops: Vec<ArithOp>,
    regs: Vec<String>,
    state_consts: Vec<String>,
    status_consts: [String; 3],
    op_names: Vec<String>,
    cast: String,
    memory: String,
    q: String,
}

impl TramShape {
    fn addressed(&self) -> usize {
        self.registers * (1 + self.depth)
    }

    fn address(&self, x: usize) -> GroundTerm {
        let (i, j) = (x / (self.depth + 1), x % (self.depth + 1));
        let reg = GroundTerm::constant(&self.regs[i]);
        (0..j).fold(GroundTerm::unary(&self.cast, reg), |a, _| {
            GroundTerm::unary(&self.cast, GroundTerm::unary(&self.memory, a))
        })
    }

    fn contents(&self, x: usize) -> GroundTerm {
        GroundTerm::unary(&self.memory, self.address(x))
    }

    fn zero(&self) -> Option<GroundTerm> {
        let i = self.ops.iter().position(|&o| o == ArithOp::Zero)?;
        Some(GroundTerm::constant(&self.op_names[i]))
    }

    fn guards(&self) -> Option<Vec<GuardPair>> {
        let q = GroundTerm::constant(&self.q);
        let mut g: Vec<GuardPair> =
            self.state_consts.iter().map(|c| GuardPair::new(q.clone(), GroundTerm::constant(c))).collect();
        let zero = self.zero()?;
        let m = self.addressed();
        g.extend((0..m).map(|x| GuardPair::new(self.contents(x), zero.clone())));
        for x in 0..m {
            for y in x + 1..m {
                g.push(GuardPair::new(self.contents(x), self.contents(y)));
            }
        }
        Some(g)
    }

    fn term(&self, t: &ArithTerm) -> GroundTerm {
        match t {
            ArithTerm::Contents(x) => self.contents(*x),
            ArithTerm::Op(op, args) => {
                let i = self.ops.iter().position(|o| o == op).expect("catalog op");
                GroundTerm::app(&self.op_names[i], args.iter().map(|a| self.term(a)).collect())
            }
        }
    }

    fn arith(&self, t: &GroundTerm) -> Option<ArithTerm> {
        if let Some(i) = self.op_names.iter().position(|n| *n == t.head) {
            let args = t.args.iter().map(|a| self.arith(a)).collect::<Option<Vec<_>>>()?;
            return Some(ArithTerm::Op(self.ops[i], args));
        }
        (0..self.addressed()).find(|&x| self.contents(x) == *t).map(ArithTerm::Contents)
    }
}

pub(super) fn check(ema: &Ema) -> (ClassReport, Option<TramShape>) {
    let mut rep = ClassReport::new(ClassId::Tram);
    let sig = ema.signature();
    let doms = ema.domains();
    if !ema.is_deterministic() {
        rep.violate(0, "the machine must have exactly one functional");
    }
    for i in sig.indices(SymbolKind::External) {
        rep.violate(0, format!("external symbol `{}` is not allowed", sig.symbol(i).name));
    }
    let sorts_ok = matches!(
        doms,
        [DomainDescriptor::Naturals(0), DomainDescriptor::Naturals(DomainDescriptor::ADDR_TAG), DomainDescriptor::FiniteEnum(l), DomainDescriptor::Status]
            if !l.is_empty()
    );
    if !sorts_ok {
        rep.violate(1, "sorts must be the naturals, the addresses, the states and the status");
        if doms.len() != 4 {
            return (rep, None);
        }
    }
    let states = doms[2].labels().unwrap_or_default().to_vec();

    let mut regs: BTreeMap<u64, Vec<String>> = BTreeMap::new();
    let mut state_consts = vec![Vec::new(); states.len()];
    let mut status_consts = vec![Vec::new(); 3];
    let mut casts = Vec::new();
    let mut ops: Vec<(ArithOp, String)> = Vec::new();
    for i in sig.indices(SymbolKind::Static) {
        let sym = sig.symbol(i);
        let name = sym.name.clone();
        let res = sym.ty.result();
        match (&ema.statics()[&name], sym.ty.args.as_slice()) {
            (Body::Element(Some(v)), []) if res == Some(NAT) && sorts_ok => {
                regs.entry(v.as_nat().expect("sorted")).or_default().push(name)
            }
            (Body::Element(Some(v)), []) if res == Some(STATE) && sorts_ok => {
                state_consts[v.as_label().expect("sorted") as usize].push(name)
            }
            (Body::Element(Some(v)), []) if res == Some(STATUS_SORT) => {
                status_consts[v.as_status().expect("sorted") as usize].push(name)
            }
            (Body::Builtin(Primitive::Cast), [NAT]) if res == Some(ADDR) => casts.push(name),
            (Body::Builtin(Primitive::Arith(op)), args)
                if res == Some(NAT) && args.len() == op.arity() && args.iter().all(|&a| a == NAT) =>
            {
                if ops.iter().any(|(o, _)| o == op) {
                    rep.violate(2, format!("operation {} is declared twice", op.name()));
                }
                ops.push((*op, name));
            }
            _ => rep.violate(2, format!("unexpected static symbol `{name}`")),
        }
    }
    let n = regs.len();
    let mut reg_names = Vec::with_capacity(n);
    for (expected, (i, names)) in (1..).zip(&regs) {
        if *i != expected {
            rep.violate(2, "register constants must denote 1, ..., n");
            break;
        }
        match names.as_slice() {
            [x] => reg_names.push(x.clone()),
            _ => rep.violate(2, format!("register {i} has more than one constant")),
        }
    }
    if n == 0 {
        rep.violate(2, "no register constants");
    }
    let state_consts: Vec<Option<String>> = state_consts
        .iter()
        .zip(&states)
        .map(|(found, l)| rep.exactly_one(2, found, || format!("constant for state `{l}`")))
        .collect();
    let status_consts: Vec<Option<String>> = [Status::Go, Status::Acc, Status::Rej]
        .into_iter()
        .map(|s| rep.exactly_one(2, &status_consts[s as usize], || format!("constant for status {}", s.as_str())))
        .collect();
    let cast = rep.exactly_one(2, &casts, || "cast".into());

    for i in sig.indices(SymbolKind::StaticInput) {
        rep.violate(3, format!("static input `{}` is not allowed", sig.symbol(i).name));
    }

    let mut has_status = false;
    let mut q = Vec::new();
    for i in sig.indices(SymbolKind::Dynamic) {
        let sym = sig.symbol(i);
        let init = &ema.initials()[&sym.name];
        if sym.name == STATUS {
            has_status = true;
            if *init != Body::element(Value::status(STATUS_SORT, Status::Go)) {
                rep.violate(4, "status must start at go");
            }
        } else if sym.ty.is_constant() && sym.ty.result() == Some(STATE) {
            if *init != Body::element(Value::label(STATE, 0)) {
                rep.violate(4, format!("`{}` must start in the first state", sym.name));
            }
            q.push(sym.name.clone());
        } else {
            rep.violate(4, format!("unexpected dynamic symbol `{}`", sym.name));
        }
    }
    if !has_status {
        rep.violate(4, "status must be a dynamic symbol");
    }
    let q = rep.exactly_one(4, &q, || "dynamic state constant".into());

    let mut memory = Vec::new();
    for i in sig.indices(SymbolKind::DynamicInput) {
        let sym = sig.symbol(i);
        if sym.name == STATUS {
            continue;
        }
        if sym.ty.args == [ADDR] && sym.ty.result() == Some(NAT) {
            memory.push(sym.name.clone());
        } else {
            rep.violate(5, format!("unexpected dynamic input `{}`", sym.name));
        }
    }
    let memory = rep.exactly_one(5, &memory, || "memory".into());

    if !rep.violations.is_empty() {
        return (rep, None);
    }
    let all = |v: Vec<Option<String>>| v.into_iter().collect::<Option<Vec<_>>>().expect("checked");
    let [go, acc, rej]: [String; 3] = all(status_consts).try_into().expect("three");
    let mut shape = TramShape {
        registers: n,
        depth: 0,
        states,
        ops: ops.iter().map(|(o, _)| *o).collect(),
        regs: reg_names,
        state_consts: all(state_consts),
        status_consts: [go, acc, rej],
        op_names: ops.into_iter().map(|(_, n)| n).collect(),
        cast: cast.expect("checked"),
        memory: memory.expect("checked"),
        q: q.expect("checked"),
    };
    let p = &ema.functionals()[0];
    let tests = p.guard_count().checked_sub(shape.states.len());
    let depth =
        tests.and_then(|b| (0..=b).find(|&k| boolean_test_count(n, k) >= b).filter(|&k| boolean_test_count(n, k) == b));
    match depth {
        Some(k) => {
            shape.depth = k;
            if shape.guards().as_deref() != Some(p.guards.as_slice()) {
                rep.violate(0, "the guards must be the state tests followed by the zero and equality tests");
            }
        }
        None => rep.violate(0, "the number of guards does not match any addressing depth"),
    }
    if !rep.violations.is_empty() {
        return (rep, None);
    }
    rep.parameters = Some(Parameters::Tram { n, k: shape.depth, r: shape.states.len(), ops: shape.ops.clone() });
    (rep, Some(shape))
}

/// Input holding `memory`; every other register is 0.
pub fn tram_input(shape: &TramShape, memory: &BTreeMap<u64, u64>) -> Input {
    let exceptions = memory
        .iter()
        .filter(|(_, v)| **v != 0)
        .map(|(a, v)| (vec![Value::nat(ADDR, *a)], Some(Value::nat(NAT, *v))))
        .collect();
    Input::new().with_dynamic(shape.memory.clone(), Body::Defaulted { default: Value::nat(NAT, 0), exceptions })
}

pub fn tram_project(shape: &TramShape, state: &State) -> Option<TramConfig> {
    let control = state.interp_by_name(&shape.q)?.apply(&[])?.as_label()? as usize;
    let Body::Defaulted { default, exceptions } = &state.interp_by_name(&shape.memory)?.body else { return None };
    if default.as_nat()? != 0 {
        return None;
    }
    let mut memory = BTreeMap::new();
    for (point, v) in exceptions {
        let v = v.as_ref()?.as_nat()?;
        if v != 0 {
            memory.insert(point.first()?.as_nat()?, v);
        }
    }
    Some(TramConfig { state: control, memory })
}

fn configurations(r: usize, b: usize) -> Result<impl Iterator<Item = (usize, Vec<bool>)>, TranslateError> {
    let count = 1u64.checked_shl(b as u32).and_then(|c| c.checked_mul(r as u64));
    if count.is_none_or(|c| c > MAX_ENUMERATION as u64) {
        return Err(TranslateError::TooLarge(usize::MAX));
    }
    Ok((0..r)
        .flat_map(move |q| (0..1usize << b).map(move |v| (q, (0..b).map(|i| (v >> (b - 1 - i)) & 1 == 1).collect()))))
}

fn valuation(r: usize, q: usize, tests: &[bool]) -> Vec<bool> {
    let mut bits = vec![false; r];
    bits[q] = true;
    bits.extend_from_slice(tests);
    bits
}

/// Reads a TRAM off a class member by evaluating every row symbolically
/// over all control states and test vectors.
pub fn ema_to_tram(ema: &Ema) -> Result<Tram, TranslateError> {
    let (report, shape) = check(ema);
    let shape = shape.ok_or(TranslateError::Class(report))?;
    let p = &ema.functionals()[0];
    let r = shape.states.len();
    let m = shape.addressed();
    let table = |sym: &str| p.table(sym).expect("validated");
    let (q_table, mem_table, status_table) = (table(&shape.q), table(&shape.memory), table(STATUS));
    let shape_err = |what: &str, u: &UpdateTuple| TranslateError::Unrepresentable(format!("{what} update {u}"));
    let mut tram = Tram {
        registers: shape.registers,
        depth: shape.depth,
        ops: shape.ops.clone(),
        states: shape.states.clone(),
        accept: BTreeSet::new(),
        reject: BTreeSet::new(),
        rules: BTreeMap::new(),
    };
    for (q, tests) in configurations(r, boolean_test_count(shape.registers, shape.depth))? {
        let bits = valuation(r, q, &tests);
        let rows = [q_table, mem_table, status_table].map(|t| &t.select(&bits).expect("catch-all").updates);
        let value = |u: &UpdateTuple| match &u.value {
            UpdateValue::Term(t) => Some(t.clone()),
            UpdateValue::Paired { .. } => None,
        };
        // Any two distinct tuples at the same point clash.
        if rows[0].len() > 1 || rows[2].len() > 1 {
            continue;
        }
        let mut target = q;
        if let Some(u) = rows[0].first() {
            let t = value(u).ok_or_else(|| shape_err("state", u))?;
            if t.head != shape.q {
                target = shape.state_consts.iter().position(|c| *c == t.head).ok_or_else(|| shape_err("state", u))?;
            }
        }
        let mut writes: Vec<Option<ArithTerm>> = vec![None; m];
        let mut clash = false;
        for u in rows[1] {
            let [arg] = u.args.as_slice() else { return Err(shape_err("memory", u)) };
            let x = (0..m).find(|&x| shape.address(x) == *arg).ok_or_else(|| shape_err("memory", u))?;
            let t = value(u).and_then(|t| shape.arith(&t)).ok_or_else(|| shape_err("memory", u))?;
            clash |= writes[x].replace(t).is_some();
        }
        if clash {
            continue;
        }
        let mut halt = None;
        if let Some(u) = rows[2].first() {
            let t = value(u).ok_or_else(|| shape_err("status", u))?;
            let [go, acc, rej] = &shape.status_consts;
            halt = match t.head.as_str() {
                h if h == acc => Some(Status::Acc),
                h if h == rej => Some(Status::Rej),
                h if h == go || h == STATUS => None,
                _ => return Err(shape_err("status", u)),
            };
        }
        let key = (q, tests);
        match halt {
            Some(_) if target != q || writes.iter().any(Option::is_some) => {
                return Err(TranslateError::HaltingSideEffect(format!("state {}", shape.states[q])));
            }
            Some(Status::Acc) => {
                tram.accept.insert(key);
            }
            Some(_) => {
                tram.reject.insert(key);
            }
            None => {
                tram.rules.insert(key, TramAction { state: target, writes });
            }
        }
    }
    tram.validate()?;
    Ok(tram)
}

/// Compiles a TRAM into a class member. The catalog must contain `zero`,
/// which the zero tests compare against.
pub fn tram_to_ema(t: &Tram) -> Result<Ema, TranslateError> {
    t.validate()?;
    if !t.ops.contains(&ArithOp::Zero) {
        return Err(TranslateError::MissingZero);
    }
    let n = t.registers;
    let r = t.states.len();
    let shape = TramShape {
        registers: n,
        depth: t.depth,
        states: t.states.clone(),
        ops: t.ops.clone(),
        regs: (1..=n).map(|i| format!("reg{i}")).collect(),
        state_consts: t.states.iter().map(|l| format!("q_{l}")).collect(),
        status_consts: [Status::Go, Status::Acc, Status::Rej].map(|s| s.as_str().to_owned()),
        op_names: t.ops.iter().map(|o| o.name().to_owned()).collect(),
        cast: "cast".into(),
        memory: "c".into(),
        q: "q".into(),
    };
    let mut b = Signature::builder(4);
    let mut statics = BTreeMap::new();
    for (i, name) in shape.regs.iter().enumerate() {
        b.push(SymbolKind::Static, Symbol::new(name, NSortType::constant(NAT)));
        statics.insert(name.clone(), Body::element(Value::nat(NAT, i as u64 + 1)));
    }
    for (j, name) in shape.state_consts.iter().enumerate() {
        b.push(SymbolKind::Static, Symbol::new(name, NSortType::constant(STATE)));
        statics.insert(name.clone(), Body::element(Value::label(STATE, j as u32)));
    }
    for (name, s) in shape.status_consts.iter().zip([Status::Go, Status::Acc, Status::Rej]) {
        b.push(SymbolKind::Static, Symbol::new(name, NSortType::constant(STATUS_SORT)));
        statics.insert(name.clone(), Body::element(Value::status(STATUS_SORT, s)));
    }
    b.push(SymbolKind::Static, Symbol::new(&shape.cast, NSortType::function(vec![NAT], ADDR)));
    statics.insert(shape.cast.clone(), Body::Builtin(Primitive::Cast));
    for (op, name) in t.ops.iter().zip(&shape.op_names) {
        b.push(SymbolKind::Static, Symbol::new(name, NSortType::function(vec![NAT; op.arity()], NAT)));
        statics.insert(name.clone(), Body::Builtin(Primitive::Arith(*op)));
    }
    b.push(SymbolKind::DynamicInput, Symbol::new(&shape.memory, NSortType::function(vec![ADDR], NAT)));
    b.push(SymbolKind::Dynamic, Symbol::new(&shape.q, NSortType::constant(STATE)));
    b.push(SymbolKind::Dynamic, Symbol::new(STATUS, NSortType::constant(STATUS_SORT)));
    let initials = BTreeMap::from([
        (shape.q.clone(), Body::element(Value::label(STATE, 0))),
        (STATUS.to_owned(), Body::element(Value::status(STATUS_SORT, Status::Go))),
    ]);

    let guards = shape.guards().expect("zero is in the catalog");
    let qn = guards.len();
    let mut q_rows = Vec::new();
    let mut mem_rows = Vec::new();
    let mut status_rows = Vec::new();
    let finals = t.accept.iter().map(|k| (k, Status::Acc)).chain(t.reject.iter().map(|k| (k, Status::Rej)));
    for ((q, tests), st) in finals {
        let pattern = Pattern::exact(&valuation(r, *q, tests));
        status_rows.push(Row::new(pattern.clone(), vec![UpdateTuple::constant(GroundTerm::constant(st.as_str()))]));
        q_rows.push(Row::new(pattern, vec![]));
    }
    for ((q, tests), act) in &t.rules {
        let pattern = Pattern::exact(&valuation(r, *q, tests));
        let q_updates = if act.state == *q {
            vec![]
        } else {
            vec![UpdateTuple::constant(GroundTerm::constant(&shape.state_consts[act.state]))]
        };
        q_rows.push(Row::new(pattern.clone(), q_updates));
        let writes: Vec<UpdateTuple> = act
            .writes
            .iter()
            .enumerate()
            .filter_map(|(x, w)| Some(UpdateTuple::new(vec![shape.address(x)], shape.term(w.as_ref()?))))
            .collect();
        if !writes.is_empty() {
            mem_rows.push(Row::new(pattern, writes));
        }
    }
    let table = |symbol: &str, mut rows: Vec<Row>, fallback: Vec<UpdateTuple>| {
        rows.push(Row::new(Pattern::wildcard(qn), fallback));
        BetaTable { symbol: symbol.to_owned(), rows }
    };
    let q_term = GroundTerm::constant(&shape.q);
    let clash =
        vec![UpdateTuple::constant(q_term), UpdateTuple::constant(GroundTerm::constant(&shape.state_consts[0]))];
    let tables = vec![
        table(&shape.memory, mem_rows, vec![]),
        table(&shape.q, q_rows, clash),
        table(STATUS, status_rows, vec![]),
    ];
    let domains = vec![
        DomainDescriptor::Naturals(0),
        DomainDescriptor::Naturals(DomainDescriptor::ADDR_TAG),
        DomainDescriptor::FiniteEnum(t.states.clone()),
        DomainDescriptor::Status,
    ];
    Ok(Ema::new(b.build(), domains, statics, initials, vec![Presentation { guards, tables }])?)
}
