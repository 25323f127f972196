use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DomainDescriptor, Payload, Value};
use crate::signature::{SortId, Symbol};

/// Fixed catalog of total operations on the naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ArithOp {
    Zero,
    Succ,
    /// Predecessor with 0 − 1 = 0.
    Pred,
    Add,
    /// Truncated subtraction.
    Monus,
    Mul,
}

impl ArithOp {
    pub const CATALOG: [ArithOp; 6] =
        [ArithOp::Zero, ArithOp::Succ, ArithOp::Pred, ArithOp::Add, ArithOp::Monus, ArithOp::Mul];

    pub fn name(self) -> &'static str {
        match self {
            ArithOp::Zero => "zero",
            ArithOp::Succ => "succ",
            ArithOp::Pred => "pred",
            ArithOp::Add => "add",
            ArithOp::Monus => "monus",
            ArithOp::Mul => "mul",
        }
    }

    pub fn from_name(name: &str) -> Option<ArithOp> {
        ArithOp::CATALOG.into_iter().find(|op| op.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            ArithOp::Zero => 0,
            ArithOp::Succ | ArithOp::Pred => 1,
            ArithOp::Add | ArithOp::Monus | ArithOp::Mul => 2,
        }
    }

    /// Applies the operation; `None` on arity mismatch or u64 overflow.
    pub fn apply(self, args: &[u64]) -> Option<u64> {
        match (self, args) {
            (ArithOp::Zero, []) => Some(0),
            (ArithOp::Succ, [a]) => a.checked_add(1),
            (ArithOp::Pred, [a]) => Some(a.saturating_sub(1)),
            (ArithOp::Add, [a, b]) => a.checked_add(*b),
            (ArithOp::Monus, [a, b]) => Some(a.saturating_sub(*b)),
            (ArithOp::Mul, [a, b]) => a.checked_mul(*b),
            _ => None,
        }
    }
}

impl fmt::Display for ArithOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Interpretations given by a fixed mathematical function rather than a table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Primitive {
    /// Successor on a copy of ℤ.
    Succ,
    /// Predecessor on a copy of ℤ.
    Pred,
    /// Identity from ℕ to a copy of ℕ.
    Cast,
    Arith(ArithOp),
    /// `(p, U)` ↦ `U` with the factor `lhs` at position `p` replaced by `rhs`.
    Subst {
        lhs: String,
        rhs: String,
    },
    /// Choice function `A ↦ (a, A ∪ {a})` with `a` the least atom not in `A`.
    New,
}

/// Replaces the factor `lhs` at character position `pos` of `word` by `rhs`;
/// the word is returned unchanged when the factor is absent there.
pub fn substitute(word: &str, pos: u64, lhs: &str, rhs: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    let pat: Vec<char> = lhs.chars().collect();
    let p = match usize::try_from(pos) {
        Ok(p) if p <= chars.len() && chars.len() - p >= pat.len() => p,
        _ => return word.to_owned(),
    };
    if chars[p..p + pat.len()] != pat[..] {
        return word.to_owned();
    }
    let mut out: String = chars[..p].iter().collect();
    out.push_str(rhs);
    out.extend(&chars[p + pat.len()..]);
    out
}

impl Primitive {
    /// Evaluates the primitive. `results` are the symbol's result sorts.
    pub fn apply(&self, args: &[Value], results: &[SortId]) -> Option<Vec<Value>> {
        let single = |p: Payload| Some(vec![Value::new(results[0], p)]);
        match (self, args) {
            (Primitive::Succ, [v]) => single(Payload::Int(v.as_int()?.checked_add(1)?)),
            (Primitive::Pred, [v]) => single(Payload::Int(v.as_int()?.checked_sub(1)?)),
            (Primitive::Cast, [v]) => single(Payload::Nat(v.as_nat()?)),
            (Primitive::Arith(op), _) => {
                let nats: Option<Vec<u64>> = args.iter().map(Value::as_nat).collect();
                single(Payload::Nat(op.apply(&nats?)?))
            }
            (Primitive::Subst { lhs, rhs }, [p, w]) => {
                single(Payload::Word(substitute(w.as_word()?, p.as_nat()?, lhs, rhs)))
            }
            (Primitive::New, [set]) => {
                let Payload::Set(items) = &set.payload else { return None };
                let fresh = (0u64..).find(|a| !items.contains(&Payload::Atom(*a)))?;
                let mut grown = items.clone();
                grown.insert(Payload::Atom(fresh));
                Some(vec![Value::new(results[0], Payload::Atom(fresh)), Value::new(results[1], Payload::Set(grown))])
            }
            _ => None,
        }
    }
}

/// How a symbol is interpreted in a multialgebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Body {
    /// A possibly undefined element, for constants.
    Element(Option<Value>),
    /// A finite graph over a finite argument domain.
    Table(BTreeMap<Vec<Value>, Value>),
    /// A total-by-default unary function over an infinite domain. An
    /// exception of `None` makes the function undefined at that point.
    Defaulted {
        default: Value,
        exceptions: BTreeMap<Vec<Value>, Option<Value>>,
    },
    Builtin(Primitive),
}

impl Body {
    pub fn undefined() -> Body {
        Body::Element(None)
    }

    pub fn element(v: Value) -> Body {
        Body::Element(Some(v))
    }

    pub fn defaulted(default: Value) -> Body {
        Body::Defaulted { default, exceptions: BTreeMap::new() }
    }

    /// Drops exceptions that coincide with the default value.
    pub fn normalized(&self) -> Body {
        match self {
            Body::Defaulted { default, exceptions } => Body::Defaulted {
                default: default.clone(),
                exceptions: exceptions
                    .iter()
                    .filter(|(_, v)| v.as_ref() != Some(default))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
            },
            other => other.clone(),
        }
    }
}

/// A symbol together with its interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialInterpretation {
    pub symbol: Symbol,
    pub body: Body,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("`{symbol}`: {message}")]
    Ill { symbol: String, message: String },
    #[error("`{0}` is interpreted by a builtin and cannot be updated")]
    NotUpdatable(String),
    #[error("`{0}`: builtin interpretations over infinite domains cannot be compared with tables")]
    Incomparable(String),
}

impl PartialInterpretation {
    pub fn new(symbol: Symbol, body: Body) -> Self {
        PartialInterpretation { symbol, body }
    }

    fn ill(&self, message: impl Into<String>) -> InterpError {
        InterpError::Ill { symbol: self.symbol.name.clone(), message: message.into() }
    }

    /// Value at a single-valued point.
    pub fn apply(&self, args: &[Value]) -> Option<Value> {
        match &self.body {
            Body::Element(v) => v.clone(),
            Body::Table(map) => map.get(args).cloned(),
            Body::Defaulted { default, exceptions } => match exceptions.get(args) {
                Some(v) => v.clone(),
                None => Some(default.clone()),
            },
            Body::Builtin(p) => p.apply(args, &self.symbol.ty.results)?.into_iter().next(),
        }
    }

    /// Full result tuple, for product-valued builtins.
    pub fn apply_multi(&self, args: &[Value]) -> Option<Vec<Value>> {
        match &self.body {
            Body::Builtin(p) => p.apply(args, &self.symbol.ty.results),
            _ => self.apply(args).map(|v| vec![v]),
        }
    }

    fn check_tuple(&self, tuple: &[Value]) -> Result<(), InterpError> {
        let want = &self.symbol.ty.args;
        if tuple.len() != want.len() || tuple.iter().zip(want).any(|(v, s)| v.sort != *s) {
            return Err(self.ill("argument tuple has the wrong sorts"));
        }
        Ok(())
    }

    fn check_value(&self, v: &Value) -> Result<(), InterpError> {
        if Some(v.sort) != self.symbol.ty.result() {
            return Err(self.ill(format!("value of sort {} does not match the result sort", v.sort)));
        }
        Ok(())
    }

    /// Checks that every stored key and value is sort-correct and that the
    /// representation suits the symbol's type.
    pub fn check(&self, domains: &[DomainDescriptor]) -> Result<(), InterpError> {
        let ty = &self.symbol.ty;
        let dom = |s: SortId| domains.get(s.index());
        let well = |v: &Value| {
            if v.is_well_sorted(domains) {
                Ok(())
            } else {
                Err(self.ill(format!("value {} is not an element of its sort", v.payload)))
            }
        };
        if ty.args.iter().chain(&ty.results).any(|s| dom(*s).is_none()) {
            return Err(self.ill("sort out of range"));
        }
        match &self.body {
            Body::Element(v) => {
                if !ty.is_constant() {
                    return Err(self.ill("element interpretation for a non-constant"));
                }
                if let Some(v) = v {
                    self.check_value(v)?;
                    well(v)?;
                }
            }
            Body::Table(map) => {
                if ty.is_product() || ty.args.is_empty() {
                    return Err(self.ill("finite tables need a single result and arguments"));
                }
                if ty.args.iter().any(|s| !dom(*s).is_some_and(|d| d.is_finite())) {
                    return Err(self.ill("finite table over an infinite argument domain"));
                }
                for (k, v) in map {
                    self.check_tuple(k)?;
                    k.iter().try_for_each(well)?;
                    self.check_value(v)?;
                    well(v)?;
                }
            }
            Body::Defaulted { default, exceptions } => {
                if ty.args.len() != 1 || ty.is_product() {
                    return Err(self.ill("defaulted tables are unary"));
                }
                if dom(ty.args[0]).is_some_and(|d| d.is_finite()) {
                    return Err(self.ill("defaulted table over a finite argument domain"));
                }
                self.check_value(default)?;
                well(default)?;
                for (k, v) in exceptions {
                    self.check_tuple(k)?;
                    k.iter().try_for_each(well)?;
                    if let Some(v) = v {
                        self.check_value(v)?;
                        well(v)?;
                    }
                }
            }
            Body::Builtin(p) => self.check_builtin(p, domains)?,
        }
        Ok(())
    }

    fn check_builtin(&self, p: &Primitive, domains: &[DomainDescriptor]) -> Result<(), InterpError> {
        use DomainDescriptor as D;
        let ty = &self.symbol.ty;
        let d = |s: &SortId| &domains[s.index()];
        let args: Vec<&D> = ty.args.iter().map(d).collect();
        let res: Vec<&D> = ty.results.iter().map(d).collect();
        let ok = match p {
            Primitive::Succ | Primitive::Pred => {
                ty.args.len() == 1 && ty.results == ty.args && matches!(args[0], D::IntLine(_))
            }
            Primitive::Cast => {
                matches!((args.as_slice(), res.as_slice()), ([D::Naturals(_)], [D::Naturals(_)]))
            }
            Primitive::Arith(op) => {
                args.len() == op.arity()
                    && ty.results.len() == 1
                    && matches!(res[0], D::Naturals(_))
                    && ty.args.iter().all(|s| *s == ty.results[0])
            }
            Primitive::Subst { lhs, rhs } => match (args.as_slice(), res.as_slice()) {
                ([D::Naturals(_), D::Words(alpha)], [D::Words(_)]) => {
                    ty.args[1] == ty.results[0] && lhs.chars().chain(rhs.chars()).all(|c| alpha.contains(&c))
                }
                _ => false,
            },
            Primitive::New => match (args.as_slice(), res.as_slice()) {
                ([D::FiniteSubsets(base)], [D::Atoms, _]) => **base == D::Atoms && ty.results[1] == ty.args[0],
                _ => false,
            },
        };
        if ok {
            Ok(())
        } else {
            Err(self.ill(format!("builtin {p:?} does not fit the symbol type")))
        }
    }
}

/// `F ⊕_Z G`: outside `z` the result agrees with `f`; inside `z` it agrees
/// with `g` (undefined where `g` is).
pub fn oplus(
    f: &PartialInterpretation,
    z: &BTreeSet<Vec<Value>>,
    g: &BTreeMap<Vec<Value>, Option<Value>>,
) -> Result<PartialInterpretation, InterpError> {
    for x in z.iter().chain(g.keys()) {
        f.check_tuple(x)?;
    }
    for v in g.values().flatten() {
        f.check_value(v)?;
    }
    let new_at = |x: &Vec<Value>| g.get(x).cloned().flatten();
    let body = match &f.body {
        Body::Element(old) => {
            if z.is_empty() {
                Body::Element(old.clone())
            } else {
                Body::Element(new_at(&Vec::new()))
            }
        }
        Body::Table(map) => {
            let mut map = map.clone();
            for x in z {
                match new_at(x) {
                    Some(v) => map.insert(x.clone(), v),
                    None => map.remove(x),
                };
            }
            Body::Table(map)
        }
        Body::Defaulted { default, exceptions } => {
            let mut exceptions = exceptions.clone();
            for x in z {
                match new_at(x) {
                    Some(v) if v == *default => exceptions.remove(x),
                    v => exceptions.insert(x.clone(), v),
                };
            }
            Body::Defaulted { default: default.clone(), exceptions }
        }
        Body::Builtin(_) => return Err(InterpError::NotUpdatable(f.symbol.name.clone())),
    };
    Ok(PartialInterpretation { symbol: f.symbol.clone(), body })
}

/// Whether two interpretations denote the same partial function.
pub fn interpretations_equal(a: &PartialInterpretation, b: &PartialInterpretation) -> Result<bool, InterpError> {
    if a.symbol.ty != b.symbol.ty {
        return Ok(false);
    }
    match (&a.body.normalized(), &b.body.normalized()) {
        (Body::Builtin(p), Body::Builtin(q)) => Ok(p == q),
        (Body::Builtin(_), _) | (_, Body::Builtin(_)) => Err(InterpError::Incomparable(a.symbol.name.clone())),
        (Body::Element(x), Body::Element(y)) => Ok(x == y),
        (Body::Table(x), Body::Table(y)) => Ok(x == y),
        (Body::Defaulted { default: d1, exceptions: e1 }, Body::Defaulted { default: d2, exceptions: e2 }) => {
            Ok(d1 == d2 && e1 == e2)
        }
        // a defaulted table is defined on infinitely many points, a finite table is not
        (Body::Table(_), Body::Defaulted { .. }) | (Body::Defaulted { .. }, Body::Table(_)) => Ok(false),
        (Body::Element(_), _) | (_, Body::Element(_)) => Err(InterpError::Incomparable(a.symbol.name.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::NSortType;
    use proptest::prelude::*;

    const Z: SortId = SortId(1);
    const L: SortId = SortId(2);

    fn tape(default: u32, exceptions: &[(i64, Option<u32>)]) -> PartialInterpretation {
        PartialInterpretation::new(
            Symbol::new("c1", NSortType::function(vec![Z], L)),
            Body::Defaulted {
                default: Value::label(L, default),
                exceptions: exceptions
                    .iter()
                    .map(|(k, v)| (vec![Value::int(Z, *k)], v.map(|v| Value::label(L, v))))
                    .collect(),
            },
        )
    }

    fn finite(entries: &[(u32, u32)]) -> PartialInterpretation {
        PartialInterpretation::new(
            Symbol::new("f", NSortType::function(vec![L], L)),
            Body::Table(entries.iter().map(|(k, v)| (vec![Value::label(L, *k)], Value::label(L, *v))).collect()),
        )
    }

    fn key(k: u32) -> Vec<Value> {
        vec![Value::label(L, k)]
    }

    #[test]
    fn oplus_with_empty_z_is_identity() {
        let f = finite(&[(1, 0), (2, 0)]);
        let g = [(key(1), Some(Value::label(L, 3)))].into_iter().collect();
        assert_eq!(oplus(&f, &BTreeSet::new(), &g).unwrap(), f);
    }

    #[test]
    fn oplus_deletes_points_outside_g() {
        let f = finite(&[(1, 0), (2, 0)]);
        let z = [key(2)].into_iter().collect();
        let r = oplus(&f, &z, &BTreeMap::new()).unwrap();
        assert_eq!(r, finite(&[(1, 0)]));
    }

    #[test]
    fn oplus_overwrites() {
        let f = finite(&[(1, 0)]);
        let z = [key(1)].into_iter().collect();
        let g = [(key(1), Some(Value::label(L, 1)))].into_iter().collect();
        assert_eq!(oplus(&f, &z, &g).unwrap(), finite(&[(1, 1)]));
    }

    #[test]
    fn oplus_on_constants() {
        let sym = Symbol::new("q", NSortType::constant(L));
        let f = PartialInterpretation::new(sym.clone(), Body::element(Value::label(L, 0)));
        let g = [(vec![], Some(Value::label(L, 2)))].into_iter().collect();
        assert_eq!(oplus(&f, &BTreeSet::new(), &g).unwrap(), f);
        let z = [vec![]].into_iter().collect();
        let r = oplus(&f, &z, &g).unwrap();
        assert_eq!(r.body, Body::element(Value::label(L, 2)));
        let r = oplus(&f, &z, &BTreeMap::new()).unwrap();
        assert_eq!(r.body, Body::undefined());
    }

    #[test]
    fn oplus_rejects_ill_sorted_tuples() {
        let f = finite(&[(1, 0)]);
        let z = [vec![Value::int(Z, 1)]].into_iter().collect();
        assert!(matches!(oplus(&f, &z, &BTreeMap::new()), Err(InterpError::Ill { .. })));
    }

    #[test]
    fn defaulted_equality_normalizes() {
        assert_eq!(interpretations_equal(&tape(0, &[(3, Some(0))]), &tape(0, &[])), Ok(true));
        assert_eq!(interpretations_equal(&tape(0, &[(3, None)]), &tape(0, &[])), Ok(false));
    }

    #[test]
    fn builtin_equality_compares_parameters() {
        let ty = NSortType::function(vec![SortId(1), SortId(2)], SortId(2));
        let a = PartialInterpretation::new(
            Symbol::new("subst1", ty.clone()),
            Body::Builtin(Primitive::Subst { lhs: "ab".into(), rhs: "ba".into() }),
        );
        let b = PartialInterpretation::new(
            Symbol::new("subst1", ty.clone()),
            Body::Builtin(Primitive::Subst { lhs: "ab".into(), rhs: "ab".into() }),
        );
        assert_eq!(interpretations_equal(&a, &b), Ok(false));
        assert_eq!(interpretations_equal(&a, &a.clone()), Ok(true));
        let t = PartialInterpretation::new(Symbol::new("subst1", ty), Body::Table(BTreeMap::new()));
        assert!(matches!(interpretations_equal(&a, &t), Err(InterpError::Incomparable(_))));
    }

    #[test]
    fn finite_table_inequality() {
        assert_eq!(interpretations_equal(&finite(&[(0, 0)]), &finite(&[(0, 1)])), Ok(false));
    }

    #[test]
    fn substitution() {
        assert_eq!(substitute("S", 0, "S", "ab"), "ab");
        assert_eq!(substitute("aa", 0, "S", "ab"), "aa");
        assert_eq!(substitute("aab", 1, "ab", "ba"), "aba");
        assert_eq!(substitute("aab", 2, "ab", "ba"), "aab");
        assert_eq!(substitute("aab", 99, "ab", "ba"), "aab");
        assert_eq!(substitute("xSy", 1, "S", ""), "xy");
    }

    #[test]
    fn new_picks_least_fresh_atom() {
        let results = [SortId(1), SortId(2)];
        let empty = Value::new(SortId(2), Payload::Set(BTreeSet::new()));
        let out = Primitive::New.apply(&[empty], &results).unwrap();
        assert_eq!(out[0].payload, Payload::Atom(0));
        let one: BTreeSet<_> = [Payload::Atom(0)].into_iter().collect();
        assert_eq!(out[1].payload, Payload::Set(one.clone()));
        let out = Primitive::New.apply(&[out[1].clone()], &results).unwrap();
        assert_eq!(out[0].payload, Payload::Atom(1));
    }

    #[test]
    fn arith_catalog() {
        assert_eq!(ArithOp::Pred.apply(&[0]), Some(0));
        assert_eq!(ArithOp::Monus.apply(&[3, 5]), Some(0));
        assert_eq!(ArithOp::Add.apply(&[u64::MAX, 1]), None);
        assert_eq!(ArithOp::Zero.apply(&[1]), None);
        for op in ArithOp::CATALOG {
            assert_eq!(ArithOp::from_name(op.name()), Some(op));
        }
    }

    fn table_strategy() -> impl Strategy<Value = BTreeMap<u32, u32>> {
        prop::collection::btree_map(0u32..6, 0u32..4, 0..6)
    }

    proptest! {
        #[test]
        fn oplus_domain_equation(
            f in table_strategy(),
            z in prop::collection::btree_set(0u32..6, 0..6),
            g in prop::collection::btree_map(0u32..6, prop::option::of(0u32..4), 0..6),
        ) {
            let fi = finite(&f.iter().map(|(k, v)| (*k, *v)).collect::<Vec<_>>());
            let zs: BTreeSet<_> = z.iter().map(|k| key(*k)).collect();
            let gs: BTreeMap<_, _> = g.iter().map(|(k, v)| (key(*k), v.map(|v| Value::label(L, v)))).collect();
            let r = oplus(&fi, &zs, &gs).unwrap();
            for x in 0u32..6 {
                let got = r.apply(&key(x));
                let want = if z.contains(&x) {
                    g.get(&x).copied().flatten().map(|v| Value::label(L, v))
                } else {
                    f.get(&x).map(|v| Value::label(L, *v))
                };
                prop_assert_eq!(got, want);
            }
            // idempotence
            let again = oplus(&r, &zs, &gs).unwrap();
            prop_assert_eq!(again, r);
        }
    }
}
