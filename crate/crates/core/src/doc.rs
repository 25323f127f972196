//! JSON documents: a `{kind, version, body}` envelope around EMAs, machines,
//! inputs and choice scripts.
//!
//! Values are written by their carrier: labels and words as strings,
//! integers and naturals as numbers, subsets as arrays, statuses as
//! `"go"`, `"acc"` or `"rej"`. Output objects have sorted keys.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::algebra::{Body, DomainDescriptor, Payload, Primitive, Status, Value};
use crate::engine::{ChoiceSource, Ema, EmaError, Input};
use crate::functional::Presentation;
use crate::machines::{Grammar, Tram, WindowTm};
use crate::signature::{Signature, SortId, Symbol, SymbolKind};
use crate::translate::{gra_input, gra_shape, tram_input, tram_shape, wt_input, wt_shape};

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    Ema,
    Tm,
    Tram,
    Grammar,
    Input,
    Choices,
}

impl DocKind {
    pub fn name(self) -> &'static str {
        match self {
            DocKind::Ema => "ema",
            DocKind::Tm => "tm",
            DocKind::Tram => "tram",
            DocKind::Grammar => "grammar",
            DocKind::Input => "input",
            DocKind::Choices => "choices",
        }
    }
}

impl fmt::Display for DocKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum DocError {
    #[error("invalid document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version `{0}`")]
    Version(String),
    #[error("expected a {expected} document, found {found}")]
    Kind { expected: DocKind, found: DocKind },
    #[error("`{key}`: {message}")]
    Value { key: String, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Ema(#[from] EmaError),
}

fn value_err(key: &str, message: impl Into<String>) -> DocError {
    DocError::Value { key: key.to_owned(), message: message.into() }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: DocKind,
    version: String,
    body: Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Ema(Box<Ema>),
    Tm(WindowTm),
    Tram(Tram),
    Grammar(Grammar),
    Input(InputDoc),
    Choices(ChoicesDoc),
}

impl Document {
    pub fn kind(&self) -> DocKind {
        match self {
            Document::Ema(_) => DocKind::Ema,
            Document::Tm(_) => DocKind::Tm,
            Document::Tram(_) => DocKind::Tram,
            Document::Grammar(_) => DocKind::Grammar,
            Document::Input(_) => DocKind::Input,
            Document::Choices(_) => DocKind::Choices,
        }
    }

    pub fn parse(text: &str) -> Result<Document, DocError> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.version != FORMAT_VERSION {
            return Err(DocError::Version(env.version));
        }
        let body = env.body;
        Ok(match env.kind {
            DocKind::Ema => Document::Ema(Box::new(ema_from_json(body)?)),
            DocKind::Tm => Document::Tm(serde_json::from_value(body)?),
            DocKind::Tram => Document::Tram(serde_json::from_value(body)?),
            DocKind::Grammar => Document::Grammar(serde_json::from_value(body)?),
            DocKind::Input => Document::Input(InputDoc::from_raw(serde_json::from_value(body)?)?),
            DocKind::Choices => Document::Choices(serde_json::from_value(body)?),
        })
    }

    /// Parses and checks the kind.
    pub fn parse_as(text: &str, expected: DocKind) -> Result<Document, DocError> {
        let doc = Document::parse(text)?;
        if doc.kind() != expected {
            return Err(DocError::Kind { expected, found: doc.kind() });
        }
        Ok(doc)
    }

    pub fn body_json(&self) -> Json {
        let plain = |r: Result<Json, serde_json::Error>| r.expect("machine documents serialize");
        match self {
            Document::Ema(e) => ema_to_json(e),
            Document::Tm(m) => plain(serde_json::to_value(m)),
            Document::Tram(t) => plain(serde_json::to_value(t)),
            Document::Grammar(g) => plain(serde_json::to_value(g)),
            Document::Input(i) => plain(serde_json::to_value(i.to_raw())),
            Document::Choices(c) => plain(serde_json::to_value(c)),
        }
    }

    /// Pretty-printed JSON with sorted object keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let env = json!({ "kind": self.kind(), "version": FORMAT_VERSION, "body": self.body_json() });
        let mut s = serde_json::to_string_pretty(&env).expect("json values serialize");
        s.push('\n');
        s
    }
}

pub fn value_to_json(v: &Value, domains: &[DomainDescriptor]) -> Json {
    payload_to_json(&v.payload, &domains[v.sort.index()])
}

fn payload_to_json(p: &Payload, d: &DomainDescriptor) -> Json {
    match (p, d) {
        (Payload::Label(i), DomainDescriptor::FiniteEnum(labels)) => json!(labels[*i as usize]),
        (Payload::Int(i), _) => json!(i),
        (Payload::Nat(n), _) | (Payload::Atom(n), _) => json!(n),
        (Payload::Word(w), _) => json!(w),
        (Payload::Status(s), _) => json!(s.as_str()),
        (Payload::Set(items), DomainDescriptor::FiniteSubsets(base)) => {
            Json::Array(items.iter().map(|i| payload_to_json(i, base)).collect())
        }
        (p, _) => json!(p.to_string()),
    }
}

pub fn value_from_json(j: &Json, sort: SortId, domains: &[DomainDescriptor]) -> Result<Value, String> {
    let d = domains.get(sort.index()).ok_or_else(|| format!("sort {sort} does not exist"))?;
    Ok(Value::new(sort, payload_from_json(j, d)?))
}

fn payload_from_json(j: &Json, d: &DomainDescriptor) -> Result<Payload, String> {
    let bad = || format!("{j} is not an element of {}", domain_name(d));
    let p = match d {
        DomainDescriptor::FiniteEnum(labels) => {
            let s = j.as_str().ok_or_else(bad)?;
            Payload::Label(labels.iter().position(|l| l == s).ok_or_else(bad)? as u32)
        }
        DomainDescriptor::IntLine(_) => Payload::Int(j.as_i64().ok_or_else(bad)?),
        DomainDescriptor::Naturals(_) => Payload::Nat(j.as_u64().ok_or_else(bad)?),
        DomainDescriptor::Words(_) => Payload::Word(j.as_str().ok_or_else(bad)?.to_owned()),
        DomainDescriptor::Atoms => Payload::Atom(j.as_u64().ok_or_else(bad)?),
        DomainDescriptor::Status => Payload::Status(j.as_str().and_then(Status::parse).ok_or_else(bad)?),
        DomainDescriptor::FiniteSubsets(base) => {
            let items = j.as_array().ok_or_else(bad)?;
            Payload::Set(items.iter().map(|i| payload_from_json(i, base)).collect::<Result<BTreeSet<_>, _>>()?)
        }
    };
    if !p.belongs_to(d) {
        return Err(bad());
    }
    Ok(p)
}

fn domain_name(d: &DomainDescriptor) -> &'static str {
    match d {
        DomainDescriptor::FiniteEnum(_) => "a finite sort",
        DomainDescriptor::IntLine(_) => "the integers",
        DomainDescriptor::Naturals(_) => "the naturals",
        DomainDescriptor::Words(_) => "the words",
        DomainDescriptor::FiniteSubsets(_) => "the finite subsets",
        DomainDescriptor::Atoms => "the atoms",
        DomainDescriptor::Status => "the status sort",
    }
}

fn tuple_to_json(args: &[Value], domains: &[DomainDescriptor]) -> Json {
    Json::Array(args.iter().map(|a| value_to_json(a, domains)).collect())
}

fn opt_to_json(v: &Option<Value>, domains: &[DomainDescriptor]) -> Json {
    v.as_ref().map_or(Json::Null, |v| value_to_json(v, domains))
}

/// `{"element": v}`, `{"table": [[args, v]]}`,
/// `{"default": v, "exceptions": [[args, v | null]]}` or `{"builtin": p}`.
pub fn body_to_json(body: &Body, domains: &[DomainDescriptor]) -> Json {
    match body {
        Body::Element(v) => json!({ "element": opt_to_json(v, domains) }),
        Body::Table(map) => {
            let rows: Vec<Json> =
                map.iter().map(|(k, v)| json!([tuple_to_json(k, domains), value_to_json(v, domains)])).collect();
            json!({ "table": rows })
        }
        Body::Defaulted { default, exceptions } => {
            let rows: Vec<Json> =
                exceptions.iter().map(|(k, v)| json!([tuple_to_json(k, domains), opt_to_json(v, domains)])).collect();
            json!({ "default": value_to_json(default, domains), "exceptions": rows })
        }
        Body::Builtin(p) => json!({ "builtin": p }),
    }
}

pub fn body_from_json(j: &Json, symbol: &Symbol, domains: &[DomainDescriptor]) -> Result<Body, DocError> {
    let key = symbol.name.as_str();
    let obj = j.as_object().ok_or_else(|| value_err(key, "an interpretation must be an object"))?;
    let ty = &symbol.ty;
    let result = |j: &Json| match ty.result() {
        Some(s) => value_from_json(j, s, domains).map_err(|m| value_err(key, m)),
        None => Err(value_err(key, "product-valued symbols need a builtin interpretation")),
    };
    let optional = |j: &Json| if j.is_null() { Ok(None) } else { result(j).map(Some) };
    let tuple = |j: &Json| -> Result<Vec<Value>, DocError> {
        let items = j
            .as_array()
            .filter(|a| a.len() == ty.args.len())
            .ok_or_else(|| value_err(key, format!("argument tuples must have {} entries", ty.args.len())))?;
        items
            .iter()
            .zip(&ty.args)
            .map(|(a, s)| value_from_json(a, *s, domains).map_err(|m| value_err(key, m)))
            .collect()
    };
    let pairs = |j: &Json| -> Result<Vec<(Json, Json)>, DocError> {
        let rows = j.as_array().ok_or_else(|| value_err(key, "expected a list of [arguments, value] pairs"))?;
        rows.iter()
            .map(|r| match r.as_array().map(Vec::as_slice) {
                Some([a, v]) => Ok((a.clone(), v.clone())),
                _ => Err(value_err(key, "expected a list of [arguments, value] pairs")),
            })
            .collect()
    };
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    let body = match keys.as_slice() {
        ["element"] => Body::Element(optional(&obj["element"])?),
        ["table"] => Body::Table(
            pairs(&obj["table"])?
                .iter()
                .map(|(a, v)| Ok((tuple(a)?, result(v)?)))
                .collect::<Result<BTreeMap<_, _>, DocError>>()?,
        ),
        ["default", "exceptions"] | ["default"] => Body::Defaulted {
            default: result(&obj["default"])?,
            exceptions: match obj.get("exceptions") {
                Some(e) => pairs(e)?
                    .iter()
                    .map(|(a, v)| Ok((tuple(a)?, optional(v)?)))
                    .collect::<Result<BTreeMap<_, _>, DocError>>()?,
                None => BTreeMap::new(),
            },
        },
        ["builtin"] => Body::Builtin(
            serde_json::from_value::<Primitive>(obj["builtin"].clone()).map_err(|e| value_err(key, e.to_string()))?,
        ),
        _ => return Err(value_err(key, format!("unknown interpretation keys {keys:?}"))),
    };
    Ok(body)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEma {
    signature: Signature,
    domains: Vec<DomainDescriptor>,
    #[serde(default)]
    statics: BTreeMap<String, Json>,
    #[serde(default)]
    initials: BTreeMap<String, Json>,
    functionals: Vec<Presentation>,
}

fn bodies(
    sig: &Signature,
    domains: &[DomainDescriptor],
    raw: &BTreeMap<String, Json>,
) -> Result<BTreeMap<String, Body>, DocError> {
    raw.iter()
        .map(|(name, j)| {
            let (_, sym) = sig.lookup(name).ok_or_else(|| value_err(name, "not a symbol of the signature"))?;
            if domains.len() != sig.sort_count() as usize {
                return Err(EmaError::SortCount { expected: sig.sort_count() as usize, found: domains.len() }.into());
            }
            Ok((name.clone(), body_from_json(j, sym, domains)?))
        })
        .collect()
}

fn ema_from_json(body: Json) -> Result<Ema, DocError> {
    let raw: RawEma = serde_json::from_value(body)?;
    let statics = bodies(&raw.signature, &raw.domains, &raw.statics)?;
    let initials = bodies(&raw.signature, &raw.domains, &raw.initials)?;
    Ok(Ema::new(raw.signature, raw.domains, statics, initials, raw.functionals)?)
}

pub fn ema_to_json(e: &Ema) -> Json {
    let doms = e.domains();
    let map = |m: &BTreeMap<String, Body>| -> serde_json::Map<String, Json> {
        m.iter().map(|(k, b)| (k.clone(), body_to_json(b, doms))).collect()
    };
    json!({
        "signature": e.signature(),
        "domains": doms,
        "statics": map(e.statics()),
        "initials": map(e.initials()),
        "functionals": e.functionals(),
    })
}

/// A tape or word given as one string of single-letter labels, or as a
/// list of labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordInput {
    Text(String),
    Labels(Vec<String>),
}

impl WordInput {
    pub fn labels(&self) -> Vec<String> {
        match self {
            WordInput::Text(s) => s.chars().map(String::from).collect(),
            WordInput::Labels(l) => l.clone(),
        }
    }

    pub fn text(&self) -> String {
        match self {
            WordInput::Text(s) => s.clone(),
            WordInput::Labels(l) => l.concat(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputDoc {
    Word(WordInput),
    Memory(BTreeMap<u64, u64>),
    /// Raw interpretations by symbol name, decoded against an EMA.
    Symbols {
        statics: BTreeMap<String, Json>,
        dynamics: BTreeMap<String, Json>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    word: Option<WordInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    memory: Option<Vec<(u64, u64)>>,
    #[serde(default, rename = "static", skip_serializing_if = "Option::is_none")]
    statics: Option<BTreeMap<String, Json>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dynamic: Option<BTreeMap<String, Json>>,
}

impl InputDoc {
    fn from_raw(raw: RawInput) -> Result<Self, DocError> {
        let symbols = raw.statics.is_some() || raw.dynamic.is_some();
        match (raw.word, raw.memory, symbols) {
            (Some(w), None, false) => Ok(InputDoc::Word(w)),
            (None, Some(m), false) => {
                let mut memory = BTreeMap::new();
                for (a, v) in m {
                    if memory.insert(a, v).is_some() {
                        return Err(DocError::Input(format!("address {a} is listed twice")));
                    }
                }
                Ok(InputDoc::Memory(memory))
            }
            (None, None, _) => Ok(InputDoc::Symbols {
                statics: raw.statics.unwrap_or_default(),
                dynamics: raw.dynamic.unwrap_or_default(),
            }),
            _ => Err(DocError::Input("use exactly one of `word`, `memory` or `static`/`dynamic`".into())),
        }
    }

    fn to_raw(&self) -> RawInput {
        let mut raw = RawInput { word: None, memory: None, statics: None, dynamic: None };
        match self {
            InputDoc::Word(w) => raw.word = Some(w.clone()),
            InputDoc::Memory(m) => raw.memory = Some(m.iter().map(|(a, v)| (*a, *v)).collect()),
            InputDoc::Symbols { statics, dynamics } => {
                raw.statics = Some(statics.clone());
                raw.dynamic = Some(dynamics.clone());
            }
        }
        raw
    }

    /// Letter indices of a word input for `m`.
    pub fn tm_word(&self, m: &WindowTm) -> Result<Vec<usize>, DocError> {
        let InputDoc::Word(w) = self else { return Err(DocError::Input("a machine input must be a word".into())) };
        let labels = w.labels();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        m.word(&refs).map_err(|e| DocError::Input(e.to_string()))
    }

    pub fn grammar_word(&self, g: &Grammar) -> Result<String, DocError> {
        let InputDoc::Word(w) = self else { return Err(DocError::Input("a grammar input must be a word".into())) };
        let text = w.text();
        g.check_word(&text).map_err(|e| DocError::Input(e.to_string()))?;
        Ok(text)
    }

    pub fn memory(&self) -> Result<&BTreeMap<u64, u64>, DocError> {
        match self {
            InputDoc::Memory(m) => Ok(m),
            _ => Err(DocError::Input("a TRAM input must be a memory".into())),
        }
    }

    /// The engine input for `ema`. Words go to window-machine tapes or to
    /// the grammar word, memories to TRAM registers.
    pub fn to_input(&self, ema: &Ema) -> Result<Input, DocError> {
        match self {
            InputDoc::Word(w) => {
                if let Ok(shape) = wt_shape(ema) {
                    let word = w
                        .labels()
                        .iter()
                        .map(|l| {
                            shape
                                .alphabet
                                .iter()
                                .position(|a| a == l)
                                .ok_or_else(|| DocError::Input(format!("`{l}` is not a letter of the machine")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(wt_input(&shape, &word))
                } else if let Ok(shape) = gra_shape(ema) {
                    let text = w.text();
                    if let Some(c) = text.chars().find(|c| !shape.alphabet.contains(c)) {
                        return Err(DocError::Input(format!("`{c}` is not a letter of the grammar")));
                    }
                    Ok(gra_input(&shape, &text))
                } else {
                    Err(DocError::Input("word inputs need a window-machine or grammar EMA".into()))
                }
            }
            InputDoc::Memory(m) => {
                let shape = tram_shape(ema).map_err(|_| DocError::Input("memory inputs need a TRAM EMA".into()))?;
                Ok(tram_input(&shape, m))
            }
            InputDoc::Symbols { statics, dynamics } => {
                let sig = ema.signature();
                let decode = |raw: &BTreeMap<String, Json>, kind: SymbolKind| {
                    raw.iter()
                        .map(|(name, j)| match sig.lookup(name) {
                            Some((k, sym)) if k == kind => Ok((name.clone(), body_from_json(j, sym, ema.domains())?)),
                            _ => Err(value_err(name, format!("not a {kind} symbol"))),
                        })
                        .collect::<Result<BTreeMap<_, _>, DocError>>()
                };
                Ok(Input {
                    statics: decode(statics, SymbolKind::StaticInput)?,
                    dynamics: decode(dynamics, SymbolKind::DynamicInput)?,
                })
            }
        }
    }
}

/// Scripted choices: one branch and one set of external values per step.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoicesDoc {
    #[serde(default)]
    pub branches: Vec<usize>,
    #[serde(default)]
    pub externals: Vec<BTreeMap<String, Json>>,
}

impl ChoicesDoc {
    pub fn to_source(&self, ema: &Ema) -> Result<ChoiceSource, DocError> {
        let sig = ema.signature();
        let externals = self
            .externals
            .iter()
            .map(|step| {
                step.iter()
                    .map(|(name, j)| match sig.lookup(name) {
                        Some((SymbolKind::External, sym)) => {
                            let sort = sym.ty.result().expect("external constant");
                            let v = value_from_json(j, sort, ema.domains()).map_err(|m| value_err(name, m))?;
                            Ok((name.clone(), v))
                        }
                        _ => Err(value_err(name, "not an external symbol")),
                    })
                    .collect::<Result<BTreeMap<_, _>, DocError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChoiceSource::Scripted { branches: self.branches.clone(), externals })
    }

    /// Rule and position pairs for replaying a grammar derivation.
    pub fn moves(&self) -> Result<Vec<(usize, u64)>, DocError> {
        if self.externals.len() != self.branches.len() {
            return Err(DocError::Input("a derivation needs one external value per branch".into()));
        }
        self.branches
            .iter()
            .zip(&self.externals)
            .map(|(&b, ext)| match ext.values().next().and_then(Json::as_u64) {
                Some(p) if ext.len() == 1 => Ok((b, p)),
                _ => Err(DocError::Input("each step needs exactly one natural position".into())),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::translate::{grammar_to_ema, tm_to_ema, tram_to_ema};

    const FLIP: &str = r#"{"kind": "tm", "version": "1", "body": {
        "tapes": 1, "radius": 0, "alphabet": ["_", "a", "b"], "states": ["s", "t"],
        "accept": [{"state": "t", "windows": [["b"]]}], "reject": [],
        "rules": [{"when": {"state": "s", "windows": [["a"]]}, "state": "t", "write": [["b"]], "move": [0]}]}}"#;

    #[test]
    fn envelope_is_strict() {
        assert!(matches!(Document::parse(r#"{"kind": "tm", "body": {}}"#), Err(DocError::Json(_))));
        let extra = r#"{"kind": "input", "version": "1", "body": {"word": "ab"}, "note": 1}"#;
        assert!(Document::parse(extra).unwrap_err().to_string().contains("note"));
        let v2 = r#"{"kind": "input", "version": "2", "body": {"word": "ab"}}"#;
        assert!(matches!(Document::parse(v2), Err(DocError::Version(_))));
        let both = r#"{"kind": "input", "version": "1", "body": {"word": "ab", "memory": [[1, 2]]}}"#;
        assert!(matches!(Document::parse(both), Err(DocError::Input(_))));
        assert!(matches!(Document::parse_as(FLIP, DocKind::Ema), Err(DocError::Kind { .. })));
    }

    #[test]
    fn documents_round_trip() {
        let Document::Tm(m) = Document::parse(FLIP).unwrap() else { panic!() };
        let g = Grammar::new(vec!['S', 'a'], vec![("S".into(), "aS".into())]).unwrap();
        let t: Tram = serde_json::from_str(
            r#"{"registers": 1, "depth": 0, "ops": ["zero"], "states": ["s"], "accept": [], "reject": [], "rules": []}"#,
        )
        .unwrap();
        let docs = vec![
            Document::Ema(Box::new(tm_to_ema(&m).unwrap())),
            Document::Ema(Box::new(grammar_to_ema(&g).unwrap())),
            Document::Ema(Box::new(tram_to_ema(&t).unwrap())),
            Document::Tm(m),
            Document::Tram(t),
            Document::Grammar(g),
            Document::Input(InputDoc::Memory(BTreeMap::from([(1, 4)]))),
            Document::Input(InputDoc::Word(WordInput::Labels(vec!["a".into()]))),
            Document::Choices(ChoicesDoc {
                branches: vec![0],
                externals: vec![BTreeMap::from([("Choose".into(), json!(0))])],
            }),
        ];
        for d in docs {
            let text = d.to_json();
            let back = Document::parse(&text).unwrap();
            assert_eq!(back, d);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn word_input_drives_a_run() {
        let Document::Tm(m) = Document::parse(FLIP).unwrap() else { panic!() };
        let ema = tm_to_ema(&m).unwrap();
        let Document::Input(input) = Document::parse(r#"{"kind":"input","version":"1","body":{"word":"a"}}"#).unwrap()
        else {
            panic!()
        };
        let trace = run(&ema, &input.to_input(&ema).unwrap(), &ChoiceSource::none(), 10).unwrap();
        assert_eq!(
            trace.render(),
            concat!(
                "t=0 status=go c1={0:a,*:_};pos1=0;q=s\n",
                "t=1 status=go c1={0:b,*:_};pos1=0;q=t\n",
                "t=2 status=acc c1={0:b,*:_};pos1=0;q=t\n",
                "outcome=Accepted steps=2\n"
            )
        );
    }

    #[test]
    fn bad_values_name_the_symbol() {
        let g = Grammar::new(vec!['a'], vec![("a".into(), "aa".into())]).unwrap();
        let ema = grammar_to_ema(&g).unwrap();
        let mut j = ema_to_json(&ema);
        j["statics"]["subst1"] = json!({"element": 3});
        let text = json!({"kind": "ema", "version": "1", "body": j}).to_string();
        let err = Document::parse(&text).unwrap_err().to_string();
        assert!(err.contains("subst1"), "{err}");
        let choices = ChoicesDoc { branches: vec![0], externals: vec![BTreeMap::from([("Choose".into(), json!(-1))])] };
        assert!(choices.to_source(&ema).unwrap_err().to_string().contains("Choose"));
    }
}
