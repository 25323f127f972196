use std::sync::Arc;

use thiserror::Error;

use super::{Body, DomainDescriptor, GroundTerm, InterpError, PartialInterpretation, Status, Value};
use crate::signature::{Signature, SymbolKind, TypeError};

/// A term whose symbols have been resolved to signature indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResolvedTerm {
    pub sym: usize,
    pub args: Vec<ResolvedTerm>,
}

impl ResolvedTerm {
    /// Type-checks `term` against `sig` and resolves its symbols. With
    /// `allow_product` a product-valued head is accepted at the root only.
    pub fn resolve(sig: &Signature, term: &GroundTerm, allow_product: bool) -> Result<Self, TypeError> {
        if allow_product {
            sig.type_check_term(term)?;
        } else {
            sig.sort_of(term)?;
        }
        Ok(Self::resolve_unchecked(sig, term))
    }

    fn resolve_unchecked(sig: &Signature, term: &GroundTerm) -> Self {
        ResolvedTerm {
            sym: sig.index_of(&term.head).expect("type-checked term"),
            args: term.args.iter().map(|a| Self::resolve_unchecked(sig, a)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StateError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("symbol `{0}` is static and cannot be overwritten")]
    Frozen(String),
    #[error("interpretation for `{0}` does not match its declaration")]
    WrongSymbol(String),
    #[error("expected {expected} interpretations, got {found}")]
    Coverage { expected: usize, found: usize },
    #[error("the multidomain has {found} sorts, the signature {expected}")]
    SortCount { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// A multialgebra: one interpretation per signature symbol over a fixed
/// multidomain. Cloning is cheap; interpretations are shared.
#[derive(Clone, Debug)]
pub struct State {
    signature: Arc<Signature>,
    domains: Arc<[DomainDescriptor]>,
    interps: Vec<Arc<PartialInterpretation>>,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.domains == other.domains
            && self.interps.len() == other.interps.len()
            && self
                .interps
                .iter()
                .zip(&other.interps)
                .all(|(a, b)| Arc::ptr_eq(a, b) || a.symbol == b.symbol && a.body.normalized() == b.body.normalized())
    }
}

impl State {
    /// Builds a state from one body per symbol, in signature order.
    pub fn new(
        signature: Arc<Signature>,
        domains: Arc<[DomainDescriptor]>,
        bodies: Vec<Body>,
    ) -> Result<Self, StateError> {
        if bodies.len() != signature.len() {
            return Err(StateError::Coverage { expected: signature.len(), found: bodies.len() });
        }
        if domains.len() != signature.sort_count() as usize {
            return Err(StateError::SortCount { expected: signature.sort_count() as usize, found: domains.len() });
        }
        let interps = signature
            .symbols()
            .iter()
            .zip(bodies)
            .map(|(sym, body)| {
                let pi = PartialInterpretation::new(sym.clone(), body);
                pi.check(&domains)?;
                Ok(Arc::new(pi))
            })
            .collect::<Result<Vec<_>, StateError>>()?;
        Ok(State { signature, domains, interps })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn domains(&self) -> &[DomainDescriptor] {
        &self.domains
    }

    pub fn domains_arc(&self) -> &Arc<[DomainDescriptor]> {
        &self.domains
    }

    pub fn interp(&self, idx: usize) -> &PartialInterpretation {
        &self.interps[idx]
    }

    pub fn interp_by_name(&self, name: &str) -> Option<&PartialInterpretation> {
        self.signature.index_of(name).map(|i| self.interp(i))
    }

    /// Replaces the interpretation of a non-static symbol.
    pub fn replace(&mut self, idx: usize, pi: PartialInterpretation) -> Result<(), StateError> {
        if self.signature.kind(idx) == SymbolKind::Static {
            return Err(StateError::Frozen(pi.symbol.name));
        }
        if pi.symbol != *self.signature.symbol(idx) {
            return Err(StateError::WrongSymbol(pi.symbol.name));
        }
        pi.check(&self.domains)?;
        self.interps[idx] = Arc::new(pi);
        Ok(())
    }

    pub(crate) fn replace_unchecked(&mut self, idx: usize, pi: PartialInterpretation) {
        self.interps[idx] = Arc::new(pi);
    }

    /// Whether the interpretation at `idx` is shared with `other`'s.
    pub fn shares(&self, other: &State, idx: usize) -> bool {
        Arc::ptr_eq(&self.interps[idx], &other.interps[idx])
    }

    pub fn status(&self) -> Option<Status> {
        let idx = self.signature.status_index()?;
        self.interps[idx].apply(&[]).and_then(|v| v.as_status())
    }

    /// Value of a single-sorted ground term, or `None` when undefined.
    pub fn eval_term(&self, term: &GroundTerm) -> Result<Option<Value>, EvalError> {
        let t = ResolvedTerm::resolve(&self.signature, term, false)?;
        Ok(self.eval_resolved(&t))
    }

    /// Full result tuple of a product-valued application.
    pub fn eval_multiterm(&self, term: &GroundTerm) -> Result<Option<Vec<Value>>, EvalError> {
        let t = ResolvedTerm::resolve(&self.signature, term, true)?;
        Ok(self.eval_resolved_multi(&t))
    }

    /// Strict evaluation of a resolved single-valued term.
    pub fn eval_resolved(&self, t: &ResolvedTerm) -> Option<Value> {
        let pi = &self.interps[t.sym];
        match t.args.as_slice() {
            [] => pi.apply(&[]),
            [a] => {
                let v = self.eval_resolved(a)?;
                pi.apply(std::slice::from_ref(&v))
            }
            args => {
                let vals = args.iter().map(|a| self.eval_resolved(a)).collect::<Option<Vec<_>>>()?;
                pi.apply(&vals)
            }
        }
    }

    pub fn eval_resolved_multi(&self, t: &ResolvedTerm) -> Option<Vec<Value>> {
        let vals = t.args.iter().map(|a| self.eval_resolved(a)).collect::<Option<Vec<_>>>()?;
        self.interps[t.sym].apply_multi(&vals)
    }

    /// Canonical rendering of a symbol's interpretation.
    pub fn render_symbol(&self, idx: usize) -> String {
        render_body(&self.interps[idx].body, &self.domains)
    }
}

fn render_tuple(tuple: &[Value], domains: &[DomainDescriptor]) -> String {
    match tuple {
        [v] => v.render(domains),
        vs => {
            let parts: Vec<String> = vs.iter().map(|v| v.render(domains)).collect();
            format!("({})", parts.join(","))
        }
    }
}

fn render_opt(v: Option<&Value>, domains: &[DomainDescriptor]) -> String {
    v.map_or_else(|| "undef".to_owned(), |v| v.render(domains))
}

pub fn render_body(body: &Body, domains: &[DomainDescriptor]) -> String {
    match body {
        Body::Element(v) => render_opt(v.as_ref(), domains),
        Body::Table(map) => {
            let parts: Vec<String> =
                map.iter().map(|(k, v)| format!("{}:{}", render_tuple(k, domains), v.render(domains))).collect();
            format!("{{{}}}", parts.join(","))
        }
        Body::Defaulted { default, exceptions } => {
            let mut parts: Vec<String> = exceptions
                .iter()
                .filter(|(_, v)| v.as_ref() != Some(default))
                .map(|(k, v)| format!("{}:{}", render_tuple(k, domains), render_opt(v.as_ref(), domains)))
                .collect();
            parts.push(format!("*:{}", default.render(domains)));
            format!("{{{}}}", parts.join(","))
        }
        Body::Builtin(p) => format!("<{p:?}>"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Payload, Primitive};
    use crate::signature::{NSortType, SortId, Symbol, STATUS};
    use std::collections::BTreeSet;

    const Z: SortId = SortId(1);
    const Q: SortId = SortId(2);
    const S: SortId = SortId(3);

    fn wt_state(pos: i64, q: Option<u32>, exceptions: &[(i64, u32)]) -> State {
        let sig = Signature::builder(4)
            .with(SymbolKind::Static, Symbol::new("sigma_a", NSortType::constant(S)))
            .with(SymbolKind::Static, Symbol::new("sigma_b", NSortType::constant(S)))
            .with(SymbolKind::Static, Symbol::new("Succ1", NSortType::function(vec![Z], Z)))
            .with(SymbolKind::Static, Symbol::new("Pred1", NSortType::function(vec![Z], Z)))
            .with(SymbolKind::DynamicInput, Symbol::new("c1", NSortType::function(vec![Z], S)))
            .with(SymbolKind::Dynamic, Symbol::new("pos1", NSortType::constant(Z)))
            .with(SymbolKind::Dynamic, Symbol::new("q", NSortType::constant(Q)))
            .with(SymbolKind::Dynamic, Symbol::new(STATUS, NSortType::constant(SortId(4))))
            .build();
        let domains: Arc<[DomainDescriptor]> = vec![
            DomainDescriptor::IntLine(1),
            DomainDescriptor::FiniteEnum(vec!["q0".into(), "q1".into()]),
            DomainDescriptor::FiniteEnum(vec!["a".into(), "b".into()]),
            DomainDescriptor::Status,
        ]
        .into();
        let bodies = vec![
            Body::element(Value::label(S, 0)),
            Body::element(Value::label(S, 1)),
            Body::Builtin(Primitive::Succ),
            Body::Builtin(Primitive::Pred),
            Body::Defaulted {
                default: Value::label(S, 0),
                exceptions: exceptions
                    .iter()
                    .map(|(k, v)| (vec![Value::int(Z, *k)], Some(Value::label(S, *v))))
                    .collect(),
            },
            Body::element(Value::int(Z, pos)),
            Body::Element(q.map(|q| Value::label(Q, q))),
            Body::element(Value::status(SortId(4), Status::Go)),
        ];
        State::new(Arc::new(sig), domains, bodies).unwrap()
    }

    fn t(head: &str, args: Vec<GroundTerm>) -> GroundTerm {
        GroundTerm::app(head, args)
    }

    fn k(head: &str) -> GroundTerm {
        GroundTerm::constant(head)
    }

    #[test]
    fn double_successor() {
        let st = wt_state(0, Some(0), &[]);
        let term = t("Succ1", vec![t("Succ1", vec![k("pos1")])]);
        assert_eq!(st.eval_term(&term), Ok(Some(Value::int(Z, 2))));
    }

    #[test]
    fn tape_default_outside_support() {
        let st = wt_state(0, Some(0), &[(1, 1)]);
        let term = t("c1", vec![t("Pred1", vec![k("pos1")])]);
        assert_eq!(st.eval_term(&term), Ok(Some(Value::label(S, 0))));
        let term = t("c1", vec![t("Succ1", vec![k("pos1")])]);
        assert_eq!(st.eval_term(&term), Ok(Some(Value::label(S, 1))));
    }

    #[test]
    fn undefined_constant() {
        let st = wt_state(0, None, &[]);
        assert_eq!(st.eval_term(&k("q")), Ok(None));
        assert!(st.eval_term(&t("c1", vec![k("q")])).is_err());
    }

    #[test]
    fn statics_are_frozen() {
        let mut st = wt_state(0, Some(0), &[]);
        let pi = st.interp(0).clone();
        assert!(matches!(st.replace(0, pi), Err(StateError::Frozen(_))));
        let pi = PartialInterpretation::new(st.interp(6).symbol.clone(), Body::undefined());
        st.replace(6, pi).unwrap();
        assert_eq!(st.status(), Some(Status::Go));
    }

    fn smm_state(atoms: &[u64]) -> State {
        let (x, set) = (SortId(1), SortId(2));
        let sig = Signature::builder(3)
            .with(SymbolKind::Static, Symbol::new("new", NSortType { args: vec![set], results: vec![x, set] }))
            .with(SymbolKind::DynamicInput, Symbol::new(STATUS, NSortType::constant(SortId(3))))
            .with(SymbolKind::Dynamic, Symbol::new("U", NSortType::constant(set)))
            .with(SymbolKind::Dynamic, Symbol::new("V", NSortType::constant(set)))
            .build();
        let domains: Arc<[DomainDescriptor]> = vec![
            DomainDescriptor::Atoms,
            DomainDescriptor::FiniteSubsets(Box::new(DomainDescriptor::Atoms)),
            DomainDescriptor::Status,
        ]
        .into();
        let u: BTreeSet<Payload> = atoms.iter().map(|a| Payload::Atom(*a)).collect();
        let bodies = vec![
            Body::Builtin(Primitive::New),
            Body::element(Value::status(SortId(3), Status::Go)),
            Body::element(Value::new(set, Payload::Set(u))),
            Body::undefined(),
        ];
        State::new(Arc::new(sig), domains, bodies).unwrap()
    }

    #[test]
    fn new_on_empty_and_singleton() {
        for (atoms, fresh) in [(vec![], 0u64), (vec![0], 1), (vec![0, 2], 1)] {
            let st = smm_state(&atoms);
            let out = st.eval_multiterm(&t("new", vec![k("U")])).unwrap().unwrap();
            let Payload::Set(before) = st.eval_term(&k("U")).unwrap().unwrap().payload else { panic!() };
            // oracle: fresh atom outside A, second component A ∪ {a}
            assert!(!before.contains(&out[0].payload));
            assert_eq!(out[0].payload, Payload::Atom(fresh));
            let mut grown = before.clone();
            grown.insert(out[0].payload.clone());
            assert_eq!(out[1].payload, Payload::Set(grown));
        }
    }

    #[test]
    fn new_of_undefined_is_undefined() {
        let st = smm_state(&[]);
        assert_eq!(st.eval_multiterm(&t("new", vec![k("V")])), Ok(None));
        assert!(st.eval_term(&t("new", vec![k("U")])).is_err());
    }

    #[test]
    fn render_defaulted() {
        let st = wt_state(0, Some(1), &[(0, 1), (1, 0)]);
        assert_eq!(st.render_symbol(4), "{0:b,*:a}");
        assert_eq!(st.render_symbol(6), "q1");
    }
}
