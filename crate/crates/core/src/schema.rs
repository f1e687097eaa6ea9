//! Structured-output constraint documents compiled from a vocabulary.
//!
//! Each grounding stage gets a schema whose enumerations are derived
//! entirely from the vocabulary (type names) and the object set (object
//! names per type), so a conforming model output can only mention
//! declared symbols. The only free-form field is the object `name` at
//! the objects stage. Decoding validates strictly — unknown fields are
//! rejected — and hands atoms to [`check_atom`] so an ill-typed value
//! can never leave this module.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::vocab::{
    check_atom, normalize_name, Goal, GroundAtom, LiftedVocabulary, Literal, ObjectInstance,
    ObjectSet, SymbolicState, TypeError,
};

/// Pattern enforced on free-form object names.
pub const NAME_PATTERN: &str = "^[a-z][a-z0-9_-]*$";

/// Which grounding stage a schema constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Objects,
    Predicates,
    Goal,
    Successor,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Objects => "objects",
            Stage::Predicates => "predicates",
            Stage::Goal => "goal",
            Stage::Successor => "successor",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Array bounds guarding against runaway generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemaLimits {
    pub max_objects: usize,
    pub max_atoms: usize,
}

impl Default for SchemaLimits {
    fn default() -> Self {
        SchemaLimits {
            max_objects: 64,
            max_atoms: 512,
        }
    }
}

/// Errors raised while compiling a schema or decoding output against it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaError {
    /// The raw text is not valid JSON.
    Parse { message: String },
    /// The document does not conform to the schema; `path` points at the
    /// first offending node.
    Violation { path: String, message: String },
    /// Two objects share a name.
    DuplicateName { path: String, name: String },
    /// A goal mentions the same atom with both polarities.
    Contradiction { atom: GroundAtom },
    /// Typing failure surfaced from [`check_atom`].
    Typed(TypeError),
    /// Predicate or goal schemas need at least one object.
    EmptyObjectSet,
    /// A decode helper was called on a document of another stage.
    StageMismatch { expected: Stage, found: Stage },
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaError::Parse { message } => write!(f, "parse error: {message}"),
            SchemaError::Violation { path, message } => {
                write!(f, "schema violation at {path}: {message}")
            }
            SchemaError::DuplicateName { path, name } => {
                write!(f, "duplicate name {name:?} at {path}")
            }
            SchemaError::Contradiction { atom } => {
                write!(f, "literal {atom} appears with both polarities")
            }
            SchemaError::Typed(e) => e.fmt(f),
            SchemaError::EmptyObjectSet => write!(f, "object set is empty"),
            SchemaError::StageMismatch { expected, found } => {
                write!(f, "expected a {expected} document, got {found}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SchemaError {}

impl From<TypeError> for SchemaError {
    fn from(e: TypeError) -> Self {
        SchemaError::Typed(e)
    }
}

/// A compiled constraint document for one stage. Carries the vocabulary
/// (and object set, for stages past object extraction) so decoding is
/// self-contained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaDoc {
    stage: Stage,
    body: Value,
    vocab_hash: String,
    limits: SchemaLimits,
    vocab: LiftedVocabulary,
    objects: Option<ObjectSet>,
}

impl SchemaDoc {
    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// The JSON-Schema body, the wire format accepted by
    /// structured-output endpoints.
    pub fn body(&self) -> &Value {
        &self.body
    }

    /// Byte-stable pretty rendering of the body.
    pub fn render(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.body).expect("schema body serializes");
        out.push('\n');
        out
    }

    /// Content hash of the source vocabulary (plus object set for
    /// stages that embed one).
    pub fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    pub fn vocabulary(&self) -> &LiftedVocabulary {
        &self.vocab
    }

    pub fn objects(&self) -> Option<&ObjectSet> {
        self.objects.as_ref()
    }
}

fn content_hash(vocab: &LiftedVocabulary, objs: Option<&ObjectSet>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(vocab.canonical_text().as_bytes());
    if let Some(objs) = objs {
        hasher.update(b"--objects--\n");
        hasher.update(objs.canonical_text().as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// Compiles the object-extraction schema: a list of records with a
/// free-form (pattern-checked) `name` and a `type` drawn from the
/// vocabulary's type enumeration.
pub fn compile_object_schema(vocab: &LiftedVocabulary, limits: &SchemaLimits) -> SchemaDoc {
    let type_enum: Vec<Value> = vocab
        .types()
        .map(|t| Value::String(t.as_str().to_owned()))
        .collect();
    let body = json!({
        "title": "objects",
        "type": "object",
        "properties": {
            "objects": {
                "type": "array",
                "maxItems": limits.max_objects,
                "items": {
                    "type": "object",
                    "properties": {
                        "name": {"type": "string", "pattern": NAME_PATTERN},
                        "type": {"enum": type_enum},
                    },
                    "required": ["name", "type"],
                    "additionalProperties": false,
                },
            },
        },
        "required": ["objects"],
        "additionalProperties": false,
    });
    SchemaDoc {
        stage: Stage::Objects,
        body,
        vocab_hash: content_hash(vocab, None),
        limits: *limits,
        vocab: vocab.clone(),
        objects: None,
    }
}

/// Atom record branch for one predicate: the `predicate` field is
/// pinned to a constant and each argument slot enumerates exactly the
/// objects of the required type. Returns `None` when some slot has no
/// candidates, in which case the predicate is omitted from the schema.
fn atom_branch(
    vocab: &LiftedVocabulary,
    objs: &ObjectSet,
    predicate: &str,
    with_polarity: bool,
) -> Option<Value> {
    let sig = vocab.predicate(predicate)?;
    let slots: Vec<Vec<&str>> = sig.arg_types().iter().map(|t| objs.of_type(t)).collect();
    if slots.iter().any(|s| s.is_empty()) {
        return None;
    }
    let args_schema = if slots.is_empty() {
        json!({"type": "array", "maxItems": 0})
    } else {
        let prefix: Vec<Value> = slots
            .iter()
            .map(|names| json!({"enum": names.iter().map(|n| (*n).to_owned()).collect::<Vec<_>>()}))
            .collect();
        json!({
            "type": "array",
            "prefixItems": prefix,
            "items": false,
            "minItems": slots.len(),
            "maxItems": slots.len(),
        })
    };
    let mut properties = Map::new();
    properties.insert("predicate".to_owned(), json!({"const": predicate}));
    properties.insert("args".to_owned(), args_schema);
    if with_polarity {
        properties.insert("negated".to_owned(), json!({"type": "boolean"}));
    }
    Some(json!({
        "type": "object",
        "properties": Value::Object(properties),
        "required": ["predicate", "args"],
        "additionalProperties": false,
    }))
}

fn atom_list_schema(
    vocab: &LiftedVocabulary,
    objs: &ObjectSet,
    max_items: usize,
    with_polarity: bool,
) -> Value {
    let branches: Vec<Value> = vocab
        .predicates()
        .filter_map(|sig| atom_branch(vocab, objs, sig.name(), with_polarity))
        .collect();
    if branches.is_empty() {
        json!({"type": "array", "maxItems": 0})
    } else {
        json!({
            "type": "array",
            "maxItems": max_items,
            "items": {"oneOf": branches},
        })
    }
}

fn compile_atoms_stage(
    stage: Stage,
    key: &str,
    vocab: &LiftedVocabulary,
    objs: &ObjectSet,
    limits: &SchemaLimits,
    with_polarity: bool,
) -> Result<SchemaDoc, SchemaError> {
    if objs.is_empty() {
        return Err(SchemaError::EmptyObjectSet);
    }
    let list = atom_list_schema(vocab, objs, limits.max_atoms, with_polarity);
    let mut properties = Map::new();
    properties.insert(key.to_owned(), list);
    let body = json!({
        "title": stage.as_str(),
        "type": "object",
        "properties": Value::Object(properties),
        "required": [key],
        "additionalProperties": false,
    });
    Ok(SchemaDoc {
        stage,
        body,
        vocab_hash: content_hash(vocab, Some(objs)),
        limits: *limits,
        vocab: vocab.clone(),
        objects: Some(objs.clone()),
    })
}

/// Compiles the predicate-grounding schema: a list of atom records over
/// the given objects. Predicates with an empty candidate list for any
/// slot are omitted.
pub fn compile_predicate_schema(
    vocab: &LiftedVocabulary,
    objs: &ObjectSet,
    limits: &SchemaLimits,
) -> Result<SchemaDoc, SchemaError> {
    compile_atoms_stage(Stage::Predicates, "atoms", vocab, objs, limits, false)
}

/// Compiles the goal-grounding schema: atom records plus an optional
/// `negated` flag per literal (absent means positive).
pub fn compile_goal_schema(
    vocab: &LiftedVocabulary,
    objs: &ObjectSet,
    limits: &SchemaLimits,
) -> Result<SchemaDoc, SchemaError> {
    compile_atoms_stage(Stage::Goal, "literals", vocab, objs, limits, true)
}

/// Compiles the successor-prediction schema: identical in shape to the
/// predicate schema, over objects derived from the input state.
pub fn compile_successor_schema(
    vocab: &LiftedVocabulary,
    objs: &ObjectSet,
    limits: &SchemaLimits,
) -> Result<SchemaDoc, SchemaError> {
    compile_atoms_stage(Stage::Successor, "atoms", vocab, objs, limits, false)
}

/// A decoded stage output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Objects(ObjectSet),
    State(SymbolicState),
    Goal(Goal),
}

fn violation(path: impl fmt::Display, message: impl fmt::Display) -> SchemaError {
    SchemaError::Violation {
        path: path.to_string(),
        message: message.to_string(),
    }
}

fn as_object<'v>(value: &'v Value, path: &str) -> Result<&'v Map<String, Value>, SchemaError> {
    value
        .as_object()
        .ok_or_else(|| violation(path, "expected an object"))
}

fn single_key_array<'v>(
    root: &'v Value,
    key: &str,
    max_items: usize,
) -> Result<&'v Vec<Value>, SchemaError> {
    let obj = as_object(root, "$")?;
    for k in obj.keys() {
        if k != key {
            return Err(violation(k, "unknown field"));
        }
    }
    let list = obj
        .get(key)
        .ok_or_else(|| violation("$", format!("missing field {key:?}")))?
        .as_array()
        .ok_or_else(|| violation(key, "expected an array"))?;
    if list.len() > max_items {
        return Err(violation(
            key,
            format!("{} items exceed the cap of {max_items}", list.len()),
        ));
    }
    Ok(list)
}

fn field_str<'v>(
    item: &'v Map<String, Value>,
    field: &str,
    path: &str,
) -> Result<&'v str, SchemaError> {
    item.get(field)
        .ok_or_else(|| violation(path, format!("missing field {field:?}")))?
        .as_str()
        .ok_or_else(|| violation(format!("{path}.{field}"), "expected a string"))
}

fn reject_unknown_fields(
    item: &Map<String, Value>,
    allowed: &[&str],
    path: &str,
) -> Result<(), SchemaError> {
    for k in item.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(violation(format!("{path}.{k}"), "unknown field"));
        }
    }
    Ok(())
}

fn decode_objects_doc(doc: &SchemaDoc, root: &Value) -> Result<ObjectSet, SchemaError> {
    let list = single_key_array(root, "objects", doc.limits.max_objects)?;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out: Vec<ObjectInstance> = Vec::new();
    for (i, item) in list.iter().enumerate() {
        let path = format!("objects[{i}]");
        let item = as_object(item, &path)?;
        reject_unknown_fields(item, &["name", "type"], &path)?;
        let raw_name = field_str(item, "name", &path)?;
        let name = normalize_name(raw_name)
            .map_err(|e| violation(format!("{path}.name"), e))?;
        let type_raw = field_str(item, "type", &path)?;
        let ty = doc
            .vocab
            .types()
            .find(|t| t.as_str() == type_raw)
            .ok_or_else(|| {
                violation(
                    format!("{path}.type"),
                    format!("{type_raw:?} is not a declared type"),
                )
            })?
            .clone();
        if !seen.insert(name.clone()) {
            return Err(SchemaError::DuplicateName {
                path: format!("{path}.name"),
                name,
            });
        }
        out.push(ObjectInstance::new(&name, ty).map_err(|e| violation(format!("{path}.name"), e))?);
    }
    ObjectSet::new(&doc.vocab, out)
        .map_err(|e| violation("objects", e))
}

/// Checks one atom record against the per-predicate slot enumerations
/// and returns the decoded atom.
fn decode_atom_record(
    doc: &SchemaDoc,
    item: &Map<String, Value>,
    path: &str,
    with_polarity: bool,
) -> Result<(GroundAtom, bool), SchemaError> {
    let objs = doc.objects.as_ref().expect("atom stages carry objects");
    let allowed: &[&str] = if with_polarity {
        &["predicate", "args", "negated"]
    } else {
        &["predicate", "args"]
    };
    reject_unknown_fields(item, allowed, path)?;
    let pred = field_str(item, "predicate", path)?;
    let sig = doc.vocab.predicate(pred).ok_or_else(|| {
        violation(
            format!("{path}.predicate"),
            format!("{pred:?} is not a declared predicate"),
        )
    })?;
    let slots: Vec<Vec<&str>> = sig.arg_types().iter().map(|t| objs.of_type(t)).collect();
    if slots.iter().any(|s| s.is_empty()) {
        return Err(violation(
            format!("{path}.predicate"),
            format!("{pred:?} is not expressible over this object set"),
        ));
    }
    let args_value = item
        .get("args")
        .ok_or_else(|| violation(path, "missing field \"args\""))?;
    let args = args_value
        .as_array()
        .ok_or_else(|| violation(format!("{path}.args"), "expected an array"))?;
    if args.len() != sig.arity() {
        return Err(violation(
            format!("{path}.args"),
            format!("expected {} arguments, got {}", sig.arity(), args.len()),
        ));
    }
    let mut names: Vec<&str> = Vec::with_capacity(args.len());
    for (i, (arg, slot)) in args.iter().zip(&slots).enumerate() {
        let name = arg
            .as_str()
            .ok_or_else(|| violation(format!("{path}.args[{i}]"), "expected a string"))?;
        if !slot.contains(&name) {
            return Err(violation(
                format!("{path}.args[{i}]"),
                format!("{name:?} is not a permitted object for this slot"),
            ));
        }
        names.push(name);
    }
    let negated = if with_polarity {
        match item.get("negated") {
            None => false,
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                return Err(violation(format!("{path}.negated"), "expected a boolean"))
            }
        }
    } else {
        false
    };
    let atom = GroundAtom::new(pred, &names).map_err(|e| violation(path, e))?;
    check_atom(&doc.vocab, objs, &atom)?;
    Ok((atom, negated))
}

fn decode_state_doc(doc: &SchemaDoc, root: &Value) -> Result<SymbolicState, SchemaError> {
    let list = single_key_array(root, "atoms", doc.limits.max_atoms)?;
    let mut atoms: Vec<GroundAtom> = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let path = format!("atoms[{i}]");
        let item = as_object(item, &path)?;
        let (atom, _) = decode_atom_record(doc, item, &path, false)?;
        atoms.push(atom);
    }
    let objs = doc.objects.as_ref().expect("atom stages carry objects");
    SymbolicState::new(&doc.vocab, objs, atoms).map_err(SchemaError::Typed)
}

fn decode_goal_doc(doc: &SchemaDoc, root: &Value) -> Result<Goal, SchemaError> {
    let list = single_key_array(root, "literals", doc.limits.max_atoms)?;
    let mut literals: Vec<Literal> = Vec::with_capacity(list.len());
    for (i, item) in list.iter().enumerate() {
        let path = format!("literals[{i}]");
        let item = as_object(item, &path)?;
        let (atom, negated) = decode_atom_record(doc, item, &path, true)?;
        literals.push(if negated {
            Literal::negative(atom)
        } else {
            Literal::positive(atom)
        });
    }
    let objs = doc.objects.as_ref().expect("atom stages carry objects");
    Goal::new(&doc.vocab, objs, literals).map_err(|e| match e {
        crate::vocab::GoalError::Typed(t) => SchemaError::Typed(t),
        crate::vocab::GoalError::Contradiction { atom } => SchemaError::Contradiction { atom },
    })
}

/// Validates raw structured output against the compiled schema and
/// decodes it into the stage's domain value. Rejection reports the
/// first violation with a path into the document.
pub fn validate_and_decode(doc: &SchemaDoc, raw: &str) -> Result<Decoded, SchemaError> {
    let root: Value = serde_json::from_str(raw).map_err(|e| SchemaError::Parse {
        message: e.to_string(),
    })?;
    match doc.stage {
        Stage::Objects => decode_objects_doc(doc, &root).map(Decoded::Objects),
        Stage::Predicates | Stage::Successor => decode_state_doc(doc, &root).map(Decoded::State),
        Stage::Goal => decode_goal_doc(doc, &root).map(Decoded::Goal),
    }
}

/// Typed wrapper over [`validate_and_decode`] for the objects stage.
pub fn decode_object_set(doc: &SchemaDoc, raw: &str) -> Result<ObjectSet, SchemaError> {
    match doc.stage {
        Stage::Objects => {}
        found => {
            return Err(SchemaError::StageMismatch {
                expected: Stage::Objects,
                found,
            })
        }
    }
    match validate_and_decode(doc, raw)? {
        Decoded::Objects(o) => Ok(o),
        _ => unreachable!("objects schema decodes to objects"),
    }
}

/// Typed wrapper for the predicates and successor stages.
pub fn decode_state(doc: &SchemaDoc, raw: &str) -> Result<SymbolicState, SchemaError> {
    match doc.stage {
        Stage::Predicates | Stage::Successor => {}
        found => {
            return Err(SchemaError::StageMismatch {
                expected: Stage::Predicates,
                found,
            })
        }
    }
    match validate_and_decode(doc, raw)? {
        Decoded::State(s) => Ok(s),
        _ => unreachable!("atom schema decodes to a state"),
    }
}

/// Typed wrapper for the goal stage.
pub fn decode_goal(doc: &SchemaDoc, raw: &str) -> Result<Goal, SchemaError> {
    match doc.stage {
        Stage::Goal => {}
        found => {
            return Err(SchemaError::StageMismatch {
                expected: Stage::Goal,
                found,
            })
        }
    }
    match validate_and_decode(doc, raw)? {
        Decoded::Goal(g) => Ok(g),
        _ => unreachable!("goal schema decodes to a goal"),
    }
}

/// Renders an object set as a conforming objects-stage document value.
pub fn encode_object_set(objs: &ObjectSet) -> Value {
    let list: Vec<Value> = objs
        .iter()
        .map(|(name, ty)| json!({"name": name, "type": ty.as_str()}))
        .collect();
    json!({"objects": list})
}

/// Renders a state as a conforming predicates/successor-stage document
/// value.
pub fn encode_state(state: &SymbolicState) -> Value {
    let list: Vec<Value> = state
        .atoms()
        .map(|a| json!({"predicate": a.predicate(), "args": a.args()}))
        .collect();
    json!({"atoms": list})
}

/// Renders a goal as a conforming goal-stage document value.
pub fn encode_goal(goal: &Goal) -> Value {
    let list: Vec<Value> = goal
        .literals()
        .map(|lit| {
            if lit.is_negated() {
                json!({
                    "predicate": lit.atom().predicate(),
                    "args": lit.atom().args(),
                    "negated": true,
                })
            } else {
                json!({
                    "predicate": lit.atom().predicate(),
                    "args": lit.atom().args(),
                })
            }
        })
        .collect();
    json!({"literals": list})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{ground_atom_universe, PredicateSignature, TypeName};
    use alloc::vec;

    fn ty(s: &str) -> TypeName {
        TypeName::new(s).unwrap()
    }

    fn block_vocab() -> LiftedVocabulary {
        LiftedVocabulary::new(
            [ty("block"), ty("table")],
            [
                PredicateSignature::new("on", vec![ty("block"), ty("block")], false).unwrap(),
                PredicateSignature::new("clear", vec![ty("block")], false).unwrap(),
            ],
        )
        .unwrap()
    }

    fn two_blocks(vocab: &LiftedVocabulary) -> ObjectSet {
        ObjectSet::new(
            vocab,
            [
                ObjectInstance::new("a", ty("block")).unwrap(),
                ObjectInstance::new("b", ty("block")).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn object_schema_enumerates_types() {
        let vocab = block_vocab();
        let doc = compile_object_schema(&vocab, &SchemaLimits::default());
        let enum_values = &doc.body()["properties"]["objects"]["items"]["properties"]["type"]["enum"];
        assert_eq!(enum_values, &json!(["block", "table"]));
    }

    #[test]
    fn object_schema_single_type_still_requires_field() {
        let vocab = LiftedVocabulary::new(
            [ty("block")],
            [PredicateSignature::new("clear", vec![ty("block")], false).unwrap()],
        )
        .unwrap();
        let doc = compile_object_schema(&vocab, &SchemaLimits::default());
        let enum_values = doc.body()["properties"]["objects"]["items"]["properties"]["type"]["enum"]
            .as_array()
            .unwrap();
        assert_eq!(enum_values.len(), 1);
        let required = doc.body()["properties"]["objects"]["items"]["required"]
            .as_array()
            .unwrap();
        assert!(required.contains(&json!("type")));
        // A record omitting the type field is rejected.
        let err =
            decode_object_set(&doc, r#"{"objects": [{"name": "a"}]}"#).unwrap_err();
        assert!(matches!(err, SchemaError::Violation { .. }));
    }

    #[test]
    fn decode_duplicate_object_name() {
        let vocab = block_vocab();
        let doc = compile_object_schema(&vocab, &SchemaLimits::default());
        let raw = r#"{"objects": [{"name":"a","type":"block"},{"name":"a","type":"block"}]}"#;
        let err = decode_object_set(&doc, raw).unwrap_err();
        assert!(matches!(err, SchemaError::DuplicateName { name, .. } if name == "a"));
    }

    #[test]
    fn predicate_schema_slot_enums_match_universe() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let branches = doc.body()["properties"]["atoms"]["items"]["oneOf"]
            .as_array()
            .unwrap();
        assert_eq!(branches.len(), 2);
        let on_branch = branches
            .iter()
            .find(|b| b["properties"]["predicate"]["const"] == json!("on"))
            .unwrap();
        let slots = on_branch["properties"]["args"]["prefixItems"]
            .as_array()
            .unwrap();
        assert_eq!(slots[0]["enum"], json!(["a", "b"]));
        assert_eq!(slots[1]["enum"], json!(["a", "b"]));
        // 4 expressible `on` atoms plus 2 `clear` atoms.
        assert_eq!(ground_atom_universe(&vocab, &objs).len(), 6);
    }

    #[test]
    fn predicate_with_empty_slot_is_omitted() {
        let vocab = LiftedVocabulary::new(
            [ty("disk"), ty("peg")],
            [
                PredicateSignature::new("on", vec![ty("disk"), ty("peg")], false).unwrap(),
                PredicateSignature::new("clear", vec![ty("disk")], false).unwrap(),
            ],
        )
        .unwrap();
        let objs = ObjectSet::new(
            &vocab,
            [ObjectInstance::new("d1", ty("disk")).unwrap()],
        )
        .unwrap();
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let branches = doc.body()["properties"]["atoms"]["items"]["oneOf"]
            .as_array()
            .unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(
            branches[0]["properties"]["predicate"]["const"],
            json!("clear")
        );
        // Atoms over the omitted predicate are rejected with a path.
        let err = decode_state(
            &doc,
            r#"{"atoms": [{"predicate": "on", "args": ["d1", "d1"]}]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, SchemaError::Violation { path, .. } if path == "atoms[0].predicate"),
            "{err:?}"
        );
    }

    #[test]
    fn empty_object_set_rejected() {
        let vocab = block_vocab();
        let objs = ObjectSet::new(&vocab, []).unwrap();
        assert_eq!(
            compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap_err(),
            SchemaError::EmptyObjectSet
        );
        assert_eq!(
            compile_goal_schema(&vocab, &objs, &SchemaLimits::default()).unwrap_err(),
            SchemaError::EmptyObjectSet
        );
    }

    #[test]
    fn decode_atom_round_trip() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let state = decode_state(
            &doc,
            r#"{"atoms": [{"predicate": "on", "args": ["a", "b"]}]}"#,
        )
        .unwrap();
        assert_eq!(state.canonical_key(), "on(a,b)");
    }

    #[test]
    fn decode_rejects_out_of_enum_object() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let err = decode_state(
            &doc,
            r#"{"atoms": [{"predicate": "on", "args": ["a", "z"]}]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, SchemaError::Violation { path, .. } if path == "atoms[0].args[1]"),
            "{err:?}"
        );
    }

    #[test]
    fn decode_rejects_unknown_fields() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let err = decode_state(
            &doc,
            r#"{"atoms": [{"predicate": "on", "args": ["a", "b"], "score": 0.9}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::Violation { .. }));
    }

    #[test]
    fn decode_goal_polarity() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let doc = compile_goal_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();

        let goal = decode_goal(
            &doc,
            r#"{"literals": [{"predicate": "on", "args": ["a", "b"], "negated": true}]}"#,
        )
        .unwrap();
        let lit = goal.literals().next().unwrap();
        assert!(lit.is_negated());

        let goal = decode_goal(
            &doc,
            r#"{"literals": [
                {"predicate": "on", "args": ["a", "b"]},
                {"predicate": "clear", "args": ["a"]}
            ]}"#,
        )
        .unwrap();
        assert_eq!(goal.len(), 2);

        let err = decode_goal(
            &doc,
            r#"{"literals": [
                {"predicate": "on", "args": ["a", "b"]},
                {"predicate": "on", "args": ["a", "b"], "negated": true}
            ]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::Contradiction { .. }));
    }

    #[test]
    fn parse_error_reported() {
        let vocab = block_vocab();
        let doc = compile_object_schema(&vocab, &SchemaLimits::default());
        assert!(matches!(
            decode_object_set(&doc, "not json").unwrap_err(),
            SchemaError::Parse { .. }
        ));
    }

    #[test]
    fn atom_cap_enforced() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let limits = SchemaLimits {
            max_objects: 64,
            max_atoms: 1,
        };
        let doc = compile_predicate_schema(&vocab, &objs, &limits).unwrap();
        let err = decode_state(
            &doc,
            r#"{"atoms": [
                {"predicate": "clear", "args": ["a"]},
                {"predicate": "clear", "args": ["b"]}
            ]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::Violation { .. }));
    }

    #[test]
    fn determinism_identical_inputs_identical_bytes() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let a = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let b = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        assert_eq!(a.render(), b.render());
        assert_eq!(a.vocab_hash(), b.vocab_hash());
        // Hash differs once the object set differs.
        let bigger = ObjectSet::new(
            &vocab,
            [
                ObjectInstance::new("a", ty("block")).unwrap(),
                ObjectInstance::new("b", ty("block")).unwrap(),
                ObjectInstance::new("c", ty("block")).unwrap(),
            ],
        )
        .unwrap();
        let c = compile_predicate_schema(&vocab, &bigger, &SchemaLimits::default()).unwrap();
        assert_ne!(a.vocab_hash(), c.vocab_hash());
    }

    #[test]
    fn completeness_every_universe_atom_expressible() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        for atom in ground_atom_universe(&vocab, &objs) {
            let raw = serde_json::to_string(&json!({
                "atoms": [{"predicate": atom.predicate(), "args": atom.args()}]
            }))
            .unwrap();
            let state = decode_state(&doc, &raw).unwrap();
            assert!(state.contains(&atom));
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        let vocab = block_vocab();
        let objs = two_blocks(&vocab);
        let doc = compile_predicate_schema(&vocab, &objs, &SchemaLimits::default()).unwrap();
        let state = SymbolicState::new(
            &vocab,
            &objs,
            [
                GroundAtom::new("on", &["a", "b"]).unwrap(),
                GroundAtom::new("clear", &["a"]).unwrap(),
            ],
        )
        .unwrap();
        let raw = serde_json::to_string(&encode_state(&state)).unwrap();
        assert_eq!(decode_state(&doc, &raw).unwrap(), state);

        let objs_doc = compile_object_schema(&vocab, &SchemaLimits::default());
        let raw = serde_json::to_string(&encode_object_set(&objs)).unwrap();
        assert_eq!(decode_object_set(&objs_doc, &raw).unwrap(), objs);
    }
}
