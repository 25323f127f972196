use std::collections::BTreeMap;

use super::report::{ClassId, ClassReport, Parameters};
use super::TranslateError;
use crate::algebra::{Body, DomainDescriptor, GroundTerm, Primitive, State, Value};
use crate::engine::{Ema, Input};
use crate::functional::{BetaTable, Pattern, Presentation, Row, UpdateTuple};
use crate::machines::Grammar;
use crate::signature::{NSortType, Signature, SortId, Symbol, SymbolKind, STATUS};

const NAT: SortId = SortId(1);
const WORD: SortId = SortId(2);
const STATUS_SORT: SortId = SortId(3);

/// The parts of a grammar-shaped EMA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraShape {
    pub alphabet: Vec<char>,
    pub rules: Vec<(String, String)>,
    word: String,
    choose: String,
}

pub(super) fn check(ema: &Ema) -> (ClassReport, Option<GraShape>) {
    let mut rep = ClassReport::new(ClassId::Gra);
    let sig = ema.signature();
    let alphabet = match ema.domains() {
        [DomainDescriptor::Naturals(0), DomainDescriptor::Words(a), DomainDescriptor::Status] => a.clone(),
        _ => {
            rep.violate(1, "sorts must be the naturals, the words and the status");
            return (rep, None);
        }
    };

    let mut rules = Vec::new();
    for i in sig.indices(SymbolKind::Static) {
        let sym = sig.symbol(i);
        match &ema.statics()[&sym.name] {
            Body::Builtin(Primitive::Subst { lhs, rhs })
                if sym.ty.args == [NAT, WORD] && sym.ty.result() == Some(WORD) =>
            {
                if lhs.is_empty() {
                    rep.violate(2, format!("`{}` rewrites the empty word", sym.name));
                }
                if lhs.chars().chain(rhs.chars()).any(|c| !alphabet.contains(&c)) {
                    rep.violate(2, format!("`{}` uses letters outside the alphabet", sym.name));
                }
                rules.push((lhs.clone(), rhs.clone()));
            }
            _ => rep.violate(2, format!("unexpected static symbol `{}`", sym.name)),
        }
    }
    if rules.is_empty() {
        rep.violate(2, "no substitution symbols");
    }

    for kind in [SymbolKind::StaticInput, SymbolKind::Dynamic] {
        for i in sig.indices(kind) {
            rep.violate(3, format!("`{}` must not be a {} symbol", sig.symbol(i).name, kind));
        }
    }

    let mut words = Vec::new();
    let mut has_status = false;
    for i in sig.indices(SymbolKind::DynamicInput) {
        let sym = sig.symbol(i);
        if sym.name == STATUS {
            has_status = true;
        } else if sym.ty.is_constant() && sym.ty.result() == Some(WORD) {
            words.push(sym.name.clone());
        } else {
            rep.violate(4, format!("unexpected dynamic input `{}`", sym.name));
        }
    }
    if !has_status {
        rep.violate(4, "status must be a dynamic input");
    }
    if words.len() != 1 {
        rep.violate(4, "exactly one word constant is required");
    }

    let ext: Vec<usize> = sig.indices(SymbolKind::External).collect();
    let choose = match ext.as_slice() {
        [i] if sig.symbol(*i).ty == NSortType::constant(NAT) => Some(sig.symbol(*i).name.clone()),
        _ => {
            rep.violate(5, "exactly one external natural constant is required");
            None
        }
    };

    if !rep.violations.is_empty() {
        return (rep, None);
    }
    rep.parameters = Some(Parameters::Gra { rules: rules.len() });
    let shape = GraShape { alphabet, rules, word: words.remove(0), choose: choose.expect("checked") };
    (rep, Some(shape))
}

pub fn gra_input(shape: &GraShape, word: &str) -> Input {
    Input::new().with_dynamic(shape.word.clone(), Body::element(Value::word(WORD, word)))
}

pub fn gra_word(shape: &GraShape, state: &State) -> Option<String> {
    Some(state.interp_by_name(&shape.word)?.apply(&[])?.as_word()?.to_owned())
}

impl GraShape {
    /// External values for one step that rewrites at `pos`.
    pub fn choice(&self, pos: u64) -> BTreeMap<String, Value> {
        BTreeMap::from([(self.choose.clone(), Value::nat(NAT, pos))])
    }
}

/// Reads the grammar off the substitution symbols, in declaration order.
pub fn ema_to_grammar(ema: &Ema) -> Result<Grammar, TranslateError> {
    let (report, shape) = check(ema);
    let shape = shape.ok_or(TranslateError::Class(report))?;
    Ok(Grammar::new(shape.alphabet, shape.rules)?)
}

/// One functional per rule: `w := subst_i(Choose, w)`.
pub fn grammar_to_ema(g: &Grammar) -> Result<Ema, TranslateError> {
    g.validate()?;
    if g.rules.is_empty() {
        return Err(TranslateError::NoRules);
    }
    let mut b = Signature::builder(3);
    let mut statics = BTreeMap::new();
    for (i, (lhs, rhs)) in g.rules.iter().enumerate() {
        let name = format!("subst{}", i + 1);
        b.push(SymbolKind::Static, Symbol::new(&name, NSortType::function(vec![NAT, WORD], WORD)));
        statics.insert(name, Body::Builtin(Primitive::Subst { lhs: lhs.clone(), rhs: rhs.clone() }));
    }
    b.push(SymbolKind::DynamicInput, Symbol::new("w", NSortType::constant(WORD)));
    b.push(SymbolKind::DynamicInput, Symbol::new(STATUS, NSortType::constant(STATUS_SORT)));
    b.push(SymbolKind::External, Symbol::new("Choose", NSortType::constant(NAT)));
    let w = GroundTerm::constant("w");
    let functionals = (1..=g.rules.len())
        .map(|i| {
            let rewrite = GroundTerm::app(format!("subst{i}"), vec![GroundTerm::constant("Choose"), w.clone()]);
            Presentation {
                guards: vec![],
                tables: vec![
                    BetaTable {
                        symbol: "w".into(),
                        rows: vec![Row::new(Pattern::wildcard(0), vec![UpdateTuple::constant(rewrite)])],
                    },
                    BetaTable::unchanged(STATUS, 0),
                ],
            }
        })
        .collect();
    let domains =
        vec![DomainDescriptor::Naturals(0), DomainDescriptor::Words(g.alphabet.clone()), DomainDescriptor::Status];
    Ok(Ema::new(b.build(), domains, statics, BTreeMap::new(), functionals)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{reachable_words, run, ChoiceSource};
    use crate::machines::derivation_closure;
    use crate::translate::check_class;

    fn anbn() -> Grammar {
        Grammar::new(vec!['S', 'a', 'b'], vec![("S".into(), "aSb".into()), ("S".into(), "ab".into())]).unwrap()
    }

    #[test]
    fn reachable_words_match_derivations() {
        let g = anbn();
        let ema = grammar_to_ema(&g).unwrap();
        let shape = check(&ema).1.unwrap();
        let words = reachable_words(&ema, &gra_input(&shape, "S"), 2).unwrap();
        assert_eq!(words, derivation_closure(&g, "S", 2));
        let listed: Vec<&str> = words.iter().map(String::as_str).collect();
        assert_eq!(listed, ["S", "aSb", "aaSbb", "aabb", "ab"]);
    }

    #[test]
    fn round_trip_and_report() {
        let g = anbn();
        let ema = grammar_to_ema(&g).unwrap();
        assert_eq!(check_class(&ema, ClassId::Gra).to_string(), "ok gra rules=2");
        assert_eq!(ema_to_grammar(&ema).unwrap(), g);
        assert_eq!(grammar_to_ema(&ema_to_grammar(&ema).unwrap()).unwrap(), ema);
    }

    #[test]
    fn scripted_derivation() {
        let ema = grammar_to_ema(&anbn()).unwrap();
        let shape = check(&ema).1.unwrap();
        let choices =
            ChoiceSource::Scripted { branches: vec![0, 1], externals: vec![shape.choice(0), shape.choice(1)] };
        let trace = run(&ema, &gra_input(&shape, "S"), &choices, 2).unwrap();
        let words: Vec<String> = trace.states.iter().map(|s| gra_word(&shape, s).unwrap()).collect();
        assert_eq!(words, ["S", "aSb", "aabb"]);
    }

    #[test]
    fn missing_chooser_is_clause_five() {
        let ema = grammar_to_ema(&anbn()).unwrap();
        let mut b = Signature::builder(3);
        for i in 0..ema.signature().len() {
            if ema.signature().kind(i) != SymbolKind::External {
                b.push(ema.signature().kind(i), ema.signature().symbol(i).clone());
            }
        }
        let mut fs = ema.functionals().to_vec();
        for f in &mut fs {
            f.tables[0].rows[0].updates = vec![UpdateTuple::constant(GroundTerm::constant("w"))];
        }
        let e = Ema::new(b.build(), ema.domains().to_vec(), ema.statics().clone(), BTreeMap::new(), fs).unwrap();
        assert_eq!(check_class(&e, ClassId::Gra).clauses(), vec![5]);
    }
}
