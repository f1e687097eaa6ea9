//! Lifted relational vocabularies and the grounded values built over them.
//!
//! A [`LiftedVocabulary`] declares object types and typed predicate
//! signatures. An [`ObjectSet`] binds concrete named objects to those
//! types. [`GroundAtom`], [`SymbolicState`], and [`Goal`] are only
//! constructible when they type-check against a (vocabulary, object set)
//! pair, so no partially-typed value is representable.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Normalizes a raw name: trims whitespace, lowercases, then checks the
/// identifier charset `[a-z][a-z0-9_-]*`.
pub fn normalize_name(raw: &str) -> Result<String, NameError> {
    let trimmed = raw.trim();
    let lowered: String = trimmed
        .chars()
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let mut chars = lowered.chars();
    let valid = match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {
            chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
        }
        _ => false,
    };
    if valid {
        Ok(lowered)
    } else {
        Err(NameError {
            raw: raw.to_owned(),
        })
    }
}

/// A name that is not a valid identifier even after normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameError {
    pub raw: String,
}

impl fmt::Display for NameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid identifier {:?} (expected [a-z][a-z0-9_-]*)", self.raw)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NameError {}

/// An object type declared by a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeName(String);

impl TypeName {
    pub fn new(raw: &str) -> Result<Self, NameError> {
        normalize_name(raw).map(TypeName)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A typed predicate signature. `static_flag` marks predicates never
/// changed by actions; it is metadata for prompting and reporting, the
/// planner ignores it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSignature {
    name: String,
    arg_types: Vec<TypeName>,
    static_flag: bool,
}

impl PredicateSignature {
    pub fn new(name: &str, arg_types: Vec<TypeName>, static_flag: bool) -> Result<Self, NameError> {
        Ok(PredicateSignature {
            name: normalize_name(name)?,
            arg_types,
            static_flag,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }

    pub fn arg_types(&self) -> &[TypeName] {
        &self.arg_types
    }

    pub fn is_static(&self) -> bool {
        self.static_flag
    }
}

/// Errors raised when assembling a vocabulary or object set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VocabError {
    Name(NameError),
    EmptyTypes,
    EmptyPredicates,
    DuplicatePredicate { predicate: String },
    UndeclaredArgType { predicate: String, type_name: TypeName },
    DuplicateObject { object: String },
    UndeclaredObjectType { object: String, type_name: TypeName },
}

impl fmt::Display for VocabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VocabError::Name(e) => e.fmt(f),
            VocabError::EmptyTypes => write!(f, "vocabulary declares no types"),
            VocabError::EmptyPredicates => write!(f, "vocabulary declares no predicates"),
            VocabError::DuplicatePredicate { predicate } => {
                write!(f, "duplicate predicate {predicate}")
            }
            VocabError::UndeclaredArgType { predicate, type_name } => {
                write!(f, "predicate {predicate} uses undeclared type {type_name}")
            }
            VocabError::DuplicateObject { object } => write!(f, "duplicate object {object}"),
            VocabError::UndeclaredObjectType { object, type_name } => {
                write!(f, "object {object} has undeclared type {type_name}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for VocabError {}

impl From<NameError> for VocabError {
    fn from(e: NameError) -> Self {
        VocabError::Name(e)
    }
}

/// The lifted relational schema of a domain: declared object types plus
/// typed predicate signatures, closed under reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedVocabulary {
    types: BTreeSet<TypeName>,
    predicates: BTreeMap<String, PredicateSignature>,
}

impl LiftedVocabulary {
    pub fn new(
        types: impl IntoIterator<Item = TypeName>,
        predicates: impl IntoIterator<Item = PredicateSignature>,
    ) -> Result<Self, VocabError> {
        let types: BTreeSet<TypeName> = types.into_iter().collect();
        if types.is_empty() {
            return Err(VocabError::EmptyTypes);
        }
        let mut map = BTreeMap::new();
        for sig in predicates {
            for t in sig.arg_types() {
                if !types.contains(t) {
                    return Err(VocabError::UndeclaredArgType {
                        predicate: sig.name().to_owned(),
                        type_name: t.clone(),
                    });
                }
            }
            if map.insert(sig.name().to_owned(), sig.clone()).is_some() {
                return Err(VocabError::DuplicatePredicate {
                    predicate: sig.name().to_owned(),
                });
            }
        }
        if map.is_empty() {
            return Err(VocabError::EmptyPredicates);
        }
        Ok(LiftedVocabulary {
            types,
            predicates: map,
        })
    }

    pub fn types(&self) -> impl Iterator<Item = &TypeName> {
        self.types.iter()
    }

    pub fn has_type(&self, t: &TypeName) -> bool {
        self.types.contains(t)
    }

    /// Signatures in lexicographic name order.
    pub fn predicates(&self) -> impl Iterator<Item = &PredicateSignature> {
        self.predicates.values()
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSignature> {
        self.predicates.get(name)
    }

    /// Canonical text rendering used for content hashing: one line per
    /// type and per predicate, both in sorted order.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for t in &self.types {
            out.push_str("type ");
            out.push_str(t.as_str());
            out.push('\n');
        }
        for sig in self.predicates.values() {
            out.push_str("pred ");
            out.push_str(sig.name());
            out.push('(');
            for (i, t) in sig.arg_types().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(t.as_str());
            }
            out.push(')');
            if sig.is_static() {
                out.push_str(" static");
            }
            out.push('\n');
        }
        out
    }
}

/// A named object bound to a declared type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObjectInstance {
    name: String,
    type_name: TypeName,
}

impl ObjectInstance {
    pub fn new(name: &str, type_name: TypeName) -> Result<Self, NameError> {
        Ok(ObjectInstance {
            name: normalize_name(name)?,
            type_name,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn type_name(&self) -> &TypeName {
        &self.type_name
    }
}

/// The grounded objects of one problem instance, partitioned by type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectSet {
    objects: BTreeMap<String, TypeName>,
}

impl ObjectSet {
    pub fn new(
        vocab: &LiftedVocabulary,
        objects: impl IntoIterator<Item = ObjectInstance>,
    ) -> Result<Self, VocabError> {
        let mut map = BTreeMap::new();
        for obj in objects {
            if !vocab.has_type(obj.type_name()) {
                return Err(VocabError::UndeclaredObjectType {
                    object: obj.name().to_owned(),
                    type_name: obj.type_name().clone(),
                });
            }
            if map.insert(obj.name().to_owned(), obj.type_name().clone()).is_some() {
                return Err(VocabError::DuplicateObject {
                    object: obj.name().to_owned(),
                });
            }
        }
        Ok(ObjectSet { objects: map })
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.objects.contains_key(name)
    }

    pub fn type_of(&self, name: &str) -> Option<&TypeName> {
        self.objects.get(name)
    }

    /// All object names, lexicographic.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TypeName)> {
        self.objects.iter().map(|(n, t)| (n.as_str(), t))
    }

    /// Names of the given type, lexicographic. This is the `by_type`
    /// partition: each object appears under exactly its declared type.
    pub fn of_type(&self, t: &TypeName) -> Vec<&str> {
        self.objects
            .iter()
            .filter(|(_, ty)| *ty == t)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    /// Canonical text rendering used for content hashing.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (name, ty) in &self.objects {
            out.push_str("obj ");
            out.push_str(name);
            out.push(':');
            out.push_str(ty.as_str());
            out.push('\n');
        }
        out
    }

    /// The subset of objects whose names satisfy `keep`. A subset of a
    /// valid set stays valid.
    pub fn filter(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        ObjectSet {
            objects: self
                .objects
                .iter()
                .filter(|(n, _)| keep(n))
                .map(|(n, t)| (n.clone(), t.clone()))
                .collect(),
        }
    }

    /// The union of two object sets over the same vocabulary; a name
    /// bound to two different types is an error.
    pub fn union(&self, other: &ObjectSet) -> Result<Self, VocabError> {
        let mut objects = self.objects.clone();
        for (name, ty) in &other.objects {
            match objects.get(name) {
                None => {
                    objects.insert(name.clone(), ty.clone());
                }
                Some(existing) if existing == ty => {}
                Some(_) => {
                    return Err(VocabError::DuplicateObject {
                        object: name.clone(),
                    })
                }
            }
        }
        Ok(ObjectSet { objects })
    }

    /// Derives the object set implied by a collection of atoms: each
    /// argument position assigns its signature type to the object named
    /// there. Fails if one name is used at positions of two different
    /// types, or under an unknown predicate.
    pub fn infer_from_atoms<'a>(
        vocab: &LiftedVocabulary,
        atoms: impl IntoIterator<Item = &'a GroundAtom>,
    ) -> Result<Self, TypeError> {
        let mut map: BTreeMap<String, TypeName> = BTreeMap::new();
        for atom in atoms {
            let sig = vocab
                .predicate(atom.predicate())
                .ok_or_else(|| TypeError::UnknownPredicate {
                    predicate: atom.predicate().to_owned(),
                })?;
            if sig.arity() != atom.args().len() {
                return Err(TypeError::ArityMismatch {
                    predicate: atom.predicate().to_owned(),
                    expected: sig.arity(),
                    found: atom.args().len(),
                });
            }
            for (i, (arg, ty)) in atom.args().iter().zip(sig.arg_types()).enumerate() {
                match map.get(arg) {
                    None => {
                        map.insert(arg.clone(), ty.clone());
                    }
                    Some(prev) if prev == ty => {}
                    Some(prev) => {
                        return Err(TypeError::TypeMismatch {
                            predicate: atom.predicate().to_owned(),
                            position: i,
                            object: arg.clone(),
                            expected: ty.clone(),
                            found: prev.clone(),
                        });
                    }
                }
            }
        }
        Ok(ObjectSet { objects: map })
    }

    /// [`ObjectSet::infer_from_atoms`] over a state's atoms.
    pub fn infer_from_state(
        vocab: &LiftedVocabulary,
        state: &SymbolicState,
    ) -> Result<Self, TypeError> {
        Self::infer_from_atoms(vocab, state.atoms())
    }
}

/// Why an atom fails to type-check. Each variant names the offending
/// symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    UnknownPredicate {
        predicate: String,
    },
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    UnknownObject {
        object: String,
    },
    TypeMismatch {
        predicate: String,
        position: usize,
        object: String,
        expected: TypeName,
        found: TypeName,
    },
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::UnknownPredicate { predicate } => {
                write!(f, "unknown predicate {predicate}")
            }
            TypeError::ArityMismatch {
                predicate,
                expected,
                found,
            } => write!(
                f,
                "predicate {predicate} expects {expected} arguments, got {found}"
            ),
            TypeError::UnknownObject { object } => write!(f, "unknown object {object}"),
            TypeError::TypeMismatch {
                predicate,
                position,
                object,
                expected,
                found,
            } => write!(
                f,
                "argument {position} of {predicate}: object {object} has type {found}, expected {expected}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TypeError {}

/// A predicate applied to concrete object names, e.g. `on(a,b)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    predicate: String,
    args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: &str, args: &[&str]) -> Result<Self, NameError> {
        Ok(GroundAtom {
            predicate: normalize_name(predicate)?,
            args: args
                .iter()
                .map(|a| normalize_name(a))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    /// Parses the rendered form `pred` or `pred(a,b)`.
    pub fn parse(text: &str) -> Result<Self, NameError> {
        let (pred, args) = split_call(text)?;
        let arg_refs: Vec<&str> = args;
        GroundAtom::new(pred, &arg_refs)
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a)?;
        }
        f.write_str(")")
    }
}

/// Splits `name(a,b)` into the name and argument slices; a bare `name`
/// means zero arguments, as does `name()`.
pub(crate) fn split_call(text: &str) -> Result<(&str, Vec<&str>), NameError> {
    let text = text.trim();
    match text.find('(') {
        None => Ok((text, Vec::new())),
        Some(open) => {
            let Some(rest) = text[open..].strip_prefix('(') else {
                return Err(NameError { raw: text.to_owned() });
            };
            let Some(inner) = rest.strip_suffix(')') else {
                return Err(NameError { raw: text.to_owned() });
            };
            let name = &text[..open];
            if inner.trim().is_empty() {
                Ok((name, Vec::new()))
            } else {
                Ok((name, inner.split(',').map(|s| s.trim()).collect()))
            }
        }
    }
}

/// Checks the three well-typedness clauses of an atom against a
/// vocabulary and object set: known predicate, exact arity, and each
/// argument naming an object of the declared slot type.
pub fn check_atom(
    vocab: &LiftedVocabulary,
    objs: &ObjectSet,
    atom: &GroundAtom,
) -> Result<(), TypeError> {
    let sig = vocab
        .predicate(atom.predicate())
        .ok_or_else(|| TypeError::UnknownPredicate {
            predicate: atom.predicate().to_owned(),
        })?;
    if sig.arity() != atom.args().len() {
        return Err(TypeError::ArityMismatch {
            predicate: atom.predicate().to_owned(),
            expected: sig.arity(),
            found: atom.args().len(),
        });
    }
    for (i, (arg, expected)) in atom.args().iter().zip(sig.arg_types()).enumerate() {
        match objs.type_of(arg) {
            None => {
                return Err(TypeError::UnknownObject {
                    object: arg.clone(),
                })
            }
            Some(found) if found != expected => {
                return Err(TypeError::TypeMismatch {
                    predicate: atom.predicate().to_owned(),
                    position: i,
                    object: arg.clone(),
                    expected: expected.clone(),
                    found: found.clone(),
                });
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Enumerates every well-typed ground atom over the object set:
/// each predicate crossed with all type-compatible argument tuples, in
/// lexicographic (predicate, args) order with no duplicates.
pub fn ground_atom_universe(vocab: &LiftedVocabulary, objs: &ObjectSet) -> Vec<GroundAtom> {
    let mut out = Vec::new();
    for sig in vocab.predicates() {
        let slots: Vec<Vec<&str>> = sig.arg_types().iter().map(|t| objs.of_type(t)).collect();
        if slots.iter().any(|s| s.is_empty()) && sig.arity() > 0 {
            continue;
        }
        let mut tuple: Vec<&str> = Vec::with_capacity(slots.len());
        cartesian(sig.name(), &slots, &mut tuple, &mut out);
    }
    out
}

fn cartesian<'a>(
    predicate: &str,
    slots: &[Vec<&'a str>],
    tuple: &mut Vec<&'a str>,
    out: &mut Vec<GroundAtom>,
) {
    if tuple.len() == slots.len() {
        out.push(GroundAtom {
            predicate: predicate.to_owned(),
            args: tuple.iter().map(|s| (*s).to_owned()).collect(),
        });
        return;
    }
    for candidate in &slots[tuple.len()] {
        tuple.push(candidate);
        cartesian(predicate, slots, tuple, out);
        tuple.pop();
    }
}

/// A finite set of well-typed ground atoms. Equality and ordering follow
/// the atom set, so two states compare equal exactly when their
/// canonical keys do.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolicState {
    atoms: BTreeSet<GroundAtom>,
}

impl SymbolicState {
    /// Checked constructor: every atom must pass [`check_atom`].
    pub fn new(
        vocab: &LiftedVocabulary,
        objs: &ObjectSet,
        atoms: impl IntoIterator<Item = GroundAtom>,
    ) -> Result<Self, TypeError> {
        let mut set = BTreeSet::new();
        for atom in atoms {
            check_atom(vocab, objs, &atom)?;
            set.insert(atom);
        }
        Ok(SymbolicState { atoms: set })
    }

    /// Used where well-typedness is already guaranteed (simulator
    /// transitions, action application over checked atoms).
    pub(crate) fn from_atoms_unchecked(atoms: BTreeSet<GroundAtom>) -> Self {
        SymbolicState { atoms }
    }

    pub fn empty() -> Self {
        SymbolicState {
            atoms: BTreeSet::new(),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.atoms.iter()
    }

    pub fn atom_set(&self) -> &BTreeSet<GroundAtom> {
        &self.atoms
    }

    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Canonical serialization: atoms sorted by (predicate, args),
    /// rendered `pred(a,b)`, joined by newline. Equal keys iff equal
    /// atom sets.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&atom.to_string());
        }
        out
    }
}

/// A goal literal: an atom required present (positive) or absent
/// (negative).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    atom: GroundAtom,
    negated: bool,
}

impl Literal {
    pub fn positive(atom: GroundAtom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn negative(atom: GroundAtom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }

    pub fn atom(&self) -> &GroundAtom {
        &self.atom
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// Parses `pred(a,b)` or `!pred(a,b)`.
    pub fn parse(text: &str) -> Result<Self, NameError> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix('!') {
            Ok(Literal::negative(GroundAtom::parse(rest)?))
        } else {
            Ok(Literal::positive(GroundAtom::parse(text)?))
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        self.atom.fmt(f)
    }
}

/// Errors raised when assembling a goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalError {
    Typed(TypeError),
    /// The same atom appears with both polarities.
    Contradiction { atom: GroundAtom },
}

impl fmt::Display for GoalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalError::Typed(e) => e.fmt(f),
            GoalError::Contradiction { atom } => {
                write!(f, "goal requires {atom} both present and absent")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GoalError {}

impl From<TypeError> for GoalError {
    fn from(e: TypeError) -> Self {
        GoalError::Typed(e)
    }
}

/// A conjunction of (possibly negated) well-typed ground literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Goal {
    literals: BTreeSet<Literal>,
}

impl Goal {
    pub fn new(
        vocab: &LiftedVocabulary,
        objs: &ObjectSet,
        literals: impl IntoIterator<Item = Literal>,
    ) -> Result<Self, GoalError> {
        let mut set: BTreeSet<Literal> = BTreeSet::new();
        for lit in literals {
            check_atom(vocab, objs, lit.atom())?;
            let flipped = Literal {
                atom: lit.atom().clone(),
                negated: !lit.is_negated(),
            };
            if set.contains(&flipped) {
                return Err(GoalError::Contradiction {
                    atom: lit.atom().clone(),
                });
            }
            set.insert(lit);
        }
        Ok(Goal { literals: set })
    }

    pub(crate) fn from_literals_unchecked(literals: BTreeSet<Literal>) -> Self {
        Goal { literals }
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

/// True iff every positive literal is in the state and every negative
/// literal is not.
pub fn goal_satisfied(state: &SymbolicState, goal: &Goal) -> bool {
    goal.literals()
        .all(|lit| state.contains(lit.atom()) != lit.is_negated())
}

/// A raw perceptual input: an image or a natural-language description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    Image { bytes: Vec<u8>, media_type: String },
    Text(String),
}

impl Observation {
    pub fn text(s: &str) -> Self {
        Observation::Text(s.to_owned())
    }
}
