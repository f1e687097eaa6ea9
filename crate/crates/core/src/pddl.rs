//! PDDL domain/problem handling for the model-based protocol: a
//! STRIPS + :typing (+ :negative-preconditions) subset parser, byte-stable
//! problem emission, action grounding, application, and A* planning over
//! the grounded model. Anything outside the subset is rejected loudly
//! with the offending requirement named.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::planner::{astar, PlanResult, SearchBudget};
use crate::sim::ActionLabel;
use crate::vocab::{Goal, GroundAtom, Literal, SymbolicState};

pub const SUPPORTED_REQUIREMENTS: [&str; 3] =
    [":strips", ":typing", ":negative-preconditions"];

/// Root type implicitly present in every hierarchy.
const OBJECT: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PddlError {
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    UnsupportedRequirement {
        requirement: String,
    },
    Validation {
        message: String,
    },
    EmptyGoal,
}

impl fmt::Display for PddlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PddlError::Parse { line, col, message } => {
                write!(f, "parse error at {line}:{col}: {message}")
            }
            PddlError::UnsupportedRequirement { requirement } => {
                write!(f, "unsupported requirement {requirement}")
            }
            PddlError::Validation { message } => write!(f, "{message}"),
            PddlError::EmptyGoal => write!(f, "problems must declare a non-empty goal"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PddlError {}

fn invalid(message: impl fmt::Display) -> PddlError {
    PddlError::Validation {
        message: message.to_string(),
    }
}

// ── S-expression reader ────────────────────────────────────────────────

#[derive(Debug, Clone)]
enum SExpr {
    Sym {
        text: String,
        line: usize,
        col: usize,
    },
    List {
        items: Vec<SExpr>,
        line: usize,
        col: usize,
    },
}

impl SExpr {
    fn pos(&self) -> (usize, usize) {
        match self {
            SExpr::Sym { line, col, .. } | SExpr::List { line, col, .. } => (*line, *col),
        }
    }

    fn sym(&self) -> Result<&str, PddlError> {
        match self {
            SExpr::Sym { text, .. } => Ok(text),
            SExpr::List { line, col, .. } => Err(PddlError::Parse {
                line: *line,
                col: *col,
                message: "expected a symbol, found a list".to_owned(),
            }),
        }
    }

    fn list(&self) -> Result<&[SExpr], PddlError> {
        match self {
            SExpr::List { items, .. } => Ok(items),
            SExpr::Sym { text, line, col } => Err(PddlError::Parse {
                line: *line,
                col: *col,
                message: format!("expected a list, found {text:?}"),
            }),
        }
    }

    fn head_is(&self, tag: &str) -> bool {
        matches!(self, SExpr::List { items, .. }
            if items.first().and_then(|h| match h {
                SExpr::Sym { text, .. } => Some(text == tag),
                _ => None,
            }).unwrap_or(false))
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn error(&self, message: impl fmt::Display) -> PddlError {
        PddlError::Parse {
            line: self.line,
            col: self.col,
            message: message.to_string(),
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn skip_trivia(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b';' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.bump();
                    }
                }
                c if c.is_ascii_whitespace() => {
                    self.bump();
                }
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<SExpr, PddlError> {
        self.skip_trivia();
        if self.pos >= self.src.len() {
            return Err(self.error("unexpected end of input"));
        }
        let (line, col) = (self.line, self.col);
        match self.src[self.pos] {
            b'(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    if self.pos >= self.src.len() {
                        return Err(self.error("unclosed list"));
                    }
                    if self.src[self.pos] == b')' {
                        self.bump();
                        return Ok(SExpr::List { items, line, col });
                    }
                    items.push(self.read()?);
                }
            }
            b')' => Err(self.error("unexpected ')'")),
            _ => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && !self.src[self.pos].is_ascii_whitespace()
                    && self.src[self.pos] != b'('
                    && self.src[self.pos] != b')'
                    && self.src[self.pos] != b';'
                {
                    self.bump();
                }
                let text = core::str::from_utf8(&self.src[start..self.pos])
                    .map_err(|_| self.error("non-utf8 symbol"))?
                    .to_ascii_lowercase();
                Ok(SExpr::Sym { text, line, col })
            }
        }
    }

    fn read_all(mut self) -> Result<SExpr, PddlError> {
        let expr = self.read()?;
        self.skip_trivia();
        if self.pos < self.src.len() {
            return Err(self.error("trailing content after the closing ')'"));
        }
        Ok(expr)
    }
}

// ── Domain structures ─────────────────────────────────────────────────

/// A term in an action schema body: a parameter variable or a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Term {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SchemaAtom {
    predicate: String,
    args: Vec<Term>,
}

/// A lifted action: typed parameters, a conjunction of precondition
/// literals, and add/delete lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    name: String,
    params: Vec<(String, String)>,
    preconditions: Vec<(SchemaAtom, bool)>,
    add: Vec<SchemaAtom>,
    delete: Vec<SchemaAtom>,
}

impl ActionSchema {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// A parsed PDDL domain: name, type hierarchy, typed constants,
/// predicate declarations, and lifted actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PddlDomain {
    name: String,
    /// type -> parent (`object` roots the hierarchy).
    types: BTreeMap<String, Option<String>>,
    constants: BTreeMap<String, String>,
    predicates: BTreeMap<String, Vec<String>>,
    actions: BTreeMap<String, ActionSchema>,
}

impl PddlDomain {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActionSchema> {
        self.actions.values()
    }

    pub fn has_type(&self, t: &str) -> bool {
        t == OBJECT || self.types.contains_key(t)
    }

    /// True when `sub` equals `sup` or reaches it through parents;
    /// every declared type is below `object`.
    fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup || sup == OBJECT {
            return true;
        }
        let mut cur = sub;
        while let Some(Some(parent)) = self.types.get(cur) {
            if parent == sup {
                return true;
            }
            cur = parent;
        }
        false
    }
}

// ── Domain parsing ─────────────────────────────────────────────────────

/// Parses a typed-name list `a b - t c d - u e` into `(name, type)`
/// pairs; names without a type marker get `object`.
fn parse_typed_list(items: &[SExpr]) -> Result<Vec<(String, String)>, PddlError> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let sym = items[i].sym()?;
        if sym == "-" {
            let (line, col) = items[i].pos();
            let ty = items
                .get(i + 1)
                .ok_or(PddlError::Parse {
                    line,
                    col,
                    message: "'-' must be followed by a type".to_owned(),
                })?
                .sym()?;
            for name in pending.drain(..) {
                out.push((name, ty.to_owned()));
            }
            i += 2;
        } else {
            pending.push(sym.to_owned());
            i += 1;
        }
    }
    for name in pending {
        out.push((name, OBJECT.to_owned()));
    }
    Ok(out)
}

fn expect_head<'e>(expr: &'e SExpr, tag: &str) -> Result<&'e [SExpr], PddlError> {
    let items = expr.list()?;
    let (line, col) = expr.pos();
    match items.first() {
        Some(head) if head.sym()? == tag => Ok(&items[1..]),
        Some(head) => {
            let (line, col) = head.pos();
            Err(PddlError::Parse {
                line,
                col,
                message: format!("expected {tag}, found {:?}", head.sym().unwrap_or("...")),
            })
        }
        None => Err(PddlError::Parse {
            line,
            col,
            message: format!("expected {tag} in an empty list"),
        }),
    }
}

/// Parses an atom expression `(pred term*)` within an action schema.
fn parse_schema_atom(
    expr: &SExpr,
    params: &BTreeMap<String, String>,
    domain: &PddlDomain,
) -> Result<SchemaAtom, PddlError> {
    let items = expr.list()?;
    let (line, col) = expr.pos();
    if items.is_empty() {
        return Err(PddlError::Parse {
            line,
            col,
            message: "empty atom".to_owned(),
        });
    }
    let predicate = items[0].sym()?.to_owned();
    let declared = domain
        .predicates
        .get(&predicate)
        .ok_or_else(|| invalid(format!("undeclared predicate {predicate}")))?;
    let args: Vec<Term> = items[1..]
        .iter()
        .map(|t| {
            let sym = t.sym()?;
            Ok(if let Some(var) = sym.strip_prefix('?') {
                if !params.contains_key(var) {
                    return Err(invalid(format!(
                        "undeclared parameter ?{var} in {predicate}"
                    )));
                }
                Term::Var(var.to_owned())
            } else {
                if !domain.constants.contains_key(sym) {
                    return Err(invalid(format!(
                        "unknown constant {sym} in {predicate}"
                    )));
                }
                Term::Const(sym.to_owned())
            })
        })
        .collect::<Result<_, _>>()?;
    if args.len() != declared.len() {
        return Err(invalid(format!(
            "predicate {predicate} expects {} arguments, got {}",
            declared.len(),
            args.len()
        )));
    }
    for (term, slot_ty) in args.iter().zip(declared) {
        let term_ty = match term {
            Term::Var(v) => params.get(v).expect("checked above"),
            Term::Const(c) => domain.constants.get(c).expect("checked above"),
        };
        if !domain.is_subtype(term_ty, slot_ty) {
            return Err(invalid(format!(
                "argument of {predicate} has type {term_ty}, expected {slot_ty}"
            )));
        }
    }
    Ok(SchemaAtom { predicate, args })
}

/// Flattens `expr` (a literal or an `(and ...)` of literals) into
/// (atom, negated) pairs.
fn parse_condition(
    expr: &SExpr,
    params: &BTreeMap<String, String>,
    domain: &PddlDomain,
    out: &mut Vec<(SchemaAtom, bool)>,
) -> Result<(), PddlError> {
    if expr.head_is("and") {
        for item in &expr.list()?[1..] {
            parse_condition(item, params, domain, out)?;
        }
    } else if expr.head_is("not") {
        let items = expr.list()?;
        let (line, col) = expr.pos();
        if items.len() != 2 {
            return Err(PddlError::Parse {
                line,
                col,
                message: "(not ...) takes exactly one literal".to_owned(),
            });
        }
        out.push((parse_schema_atom(&items[1], params, domain)?, true));
    } else {
        out.push((parse_schema_atom(expr, params, domain)?, false));
    }
    Ok(())
}

/// Parses a domain document in the :strips/:typing subset; any other
/// declared requirement is rejected by name.
pub fn parse_domain(text: &str) -> Result<PddlDomain, PddlError> {
    let root = Reader::new(text).read_all()?;
    let sections = expect_head(&root, "define")?;
    if sections.is_empty() {
        let (line, col) = root.pos();
        return Err(PddlError::Parse {
            line,
            col,
            message: "missing (domain ...) declaration".to_owned(),
        });
    }
    let name = expect_head(&sections[0], "domain")?
        .first()
        .ok_or_else(|| invalid("missing domain name"))?
        .sym()?
        .to_owned();
    let mut domain = PddlDomain {
        name,
        types: BTreeMap::new(),
        constants: BTreeMap::new(),
        predicates: BTreeMap::new(),
        actions: BTreeMap::new(),
    };
    let mut action_sections: Vec<&SExpr> = Vec::new();
    for section in &sections[1..] {
        let items = section.list()?;
        let tag = items
            .first()
            .ok_or_else(|| {
                let (line, col) = section.pos();
                PddlError::Parse {
                    line,
                    col,
                    message: "empty section".to_owned(),
                }
            })?
            .sym()?;
        match tag {
            ":requirements" => {
                for req in &items[1..] {
                    let r = req.sym()?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(PddlError::UnsupportedRequirement {
                            requirement: r.to_owned(),
                        });
                    }
                }
            }
            ":types" => {
                for (t, parent) in parse_typed_list(&items[1..])? {
                    let parent = if parent == OBJECT { None } else { Some(parent) };
                    domain.types.insert(t, parent);
                }
            }
            ":constants" => {
                for (c, ty) in parse_typed_list(&items[1..])? {
                    domain.constants.insert(c, ty);
                }
            }
            ":predicates" => {
                for decl in &items[1..] {
                    let decl_items = decl.list()?;
                    let (line, col) = decl.pos();
                    if decl_items.is_empty() {
                        return Err(PddlError::Parse {
                            line,
                            col,
                            message: "empty predicate declaration".to_owned(),
                        });
                    }
                    let pname = decl_items[0].sym()?.to_owned();
                    let arg_types: Vec<String> = parse_typed_list(&decl_items[1..])?
                        .into_iter()
                        .map(|(_, t)| t)
                        .collect();
                    domain.predicates.insert(pname, arg_types);
                }
            }
            ":action" => action_sections.push(section),
            other => {
                return Err(PddlError::UnsupportedRequirement {
                    requirement: other.to_owned(),
                })
            }
        }
    }
    // Parents must themselves be declared (or be `object`).
    for parent in domain.types.values().flatten() {
        if !domain.types.contains_key(parent) {
            return Err(invalid(format!("undeclared parent type {parent}")));
        }
    }
    for (c, ty) in &domain.constants {
        if !domain.has_type(ty) {
            return Err(invalid(format!("constant {c} has undeclared type {ty}")));
        }
    }
    for (p, tys) in &domain.predicates {
        for ty in tys {
            if !domain.has_type(ty) {
                return Err(invalid(format!("predicate {p} uses undeclared type {ty}")));
            }
        }
    }
    for section in action_sections {
        let action = parse_action(section, &domain)?;
        domain.actions.insert(action.name.clone(), action);
    }
    Ok(domain)
}

fn parse_action(section: &SExpr, domain: &PddlDomain) -> Result<ActionSchema, PddlError> {
    let items = expect_head(section, ":action")?;
    let name = items
        .first()
        .ok_or_else(|| invalid("action without a name"))?
        .sym()?
        .to_owned();
    let mut params: Vec<(String, String)> = Vec::new();
    let mut preconditions: Vec<(SchemaAtom, bool)> = Vec::new();
    let mut add: Vec<SchemaAtom> = Vec::new();
    let mut delete: Vec<SchemaAtom> = Vec::new();
    let mut param_types: BTreeMap<String, String> = BTreeMap::new();
    let mut i = 1;
    // :parameters must precede the bodies that reference them.
    while i + 1 < items.len() + 1 && i < items.len() {
        let tag = items[i].sym()?;
        let body = items.get(i + 1).ok_or_else(|| {
            let (line, col) = items[i].pos();
            PddlError::Parse {
                line,
                col,
                message: format!("{tag} without a body"),
            }
        })?;
        match tag {
            ":parameters" => {
                for (v, ty) in parse_typed_list(body.list()?)? {
                    let var = v.strip_prefix('?').ok_or_else(|| {
                        invalid(format!("parameter {v} must start with '?'"))
                    })?;
                    if !domain.has_type(&ty) {
                        return Err(invalid(format!(
                            "parameter ?{var} has undeclared type {ty}"
                        )));
                    }
                    params.push((var.to_owned(), ty.clone()));
                    param_types.insert(var.to_owned(), ty);
                }
            }
            ":precondition" => {
                parse_condition(body, &param_types, domain, &mut preconditions)?
            }
            ":effect" => {
                let mut effects: Vec<(SchemaAtom, bool)> = Vec::new();
                parse_condition(body, &param_types, domain, &mut effects)?;
                for (atom, negated) in effects {
                    if negated {
                        delete.push(atom);
                    } else {
                        add.push(atom);
                    }
                }
            }
            other => {
                return Err(invalid(format!("unknown action field {other}")));
            }
        }
        i += 2;
    }
    Ok(ActionSchema {
        name,
        params,
        preconditions,
        add,
        delete,
    })
}

// ── Problem structures ────────────────────────────────────────────────

/// A parsed PDDL problem: typed objects, initial atoms, goal literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PddlProblem {
    pub name: String,
    pub domain: String,
    pub objects: BTreeMap<String, String>,
    pub init: BTreeSet<GroundAtom>,
    pub goal: BTreeSet<Literal>,
}

fn parse_ground_atom(expr: &SExpr) -> Result<GroundAtom, PddlError> {
    let items = expr.list()?;
    let (line, col) = expr.pos();
    if items.is_empty() {
        return Err(PddlError::Parse {
            line,
            col,
            message: "empty atom".to_owned(),
        });
    }
    let pred = items[0].sym()?;
    let args: Vec<&str> = items[1..]
        .iter()
        .map(|a| a.sym())
        .collect::<Result<_, _>>()?;
    GroundAtom::new(pred, &args).map_err(|e| PddlError::Parse {
        line,
        col,
        message: e.to_string(),
    })
}

fn parse_goal_literals(expr: &SExpr, out: &mut BTreeSet<Literal>) -> Result<(), PddlError> {
    if expr.head_is("and") {
        for item in &expr.list()?[1..] {
            parse_goal_literals(item, out)?;
        }
    } else if expr.head_is("not") {
        let items = expr.list()?;
        let (line, col) = expr.pos();
        if items.len() != 2 {
            return Err(PddlError::Parse {
                line,
                col,
                message: "(not ...) takes exactly one literal".to_owned(),
            });
        }
        out.insert(Literal::negative(parse_ground_atom(&items[1])?));
    } else {
        out.insert(Literal::positive(parse_ground_atom(expr)?));
    }
    Ok(())
}

/// Parses a problem document.
pub fn parse_problem(text: &str) -> Result<PddlProblem, PddlError> {
    let root = Reader::new(text).read_all()?;
    let sections = expect_head(&root, "define")?;
    if sections.is_empty() {
        let (line, col) = root.pos();
        return Err(PddlError::Parse {
            line,
            col,
            message: "missing (problem ...) declaration".to_owned(),
        });
    }
    let name = expect_head(&sections[0], "problem")?
        .first()
        .ok_or_else(|| invalid("missing problem name"))?
        .sym()?
        .to_owned();
    let mut problem = PddlProblem {
        name,
        domain: String::new(),
        objects: BTreeMap::new(),
        init: BTreeSet::new(),
        goal: BTreeSet::new(),
    };
    for section in &sections[1..] {
        let items = section.list()?;
        let tag = items
            .first()
            .ok_or_else(|| {
                let (line, col) = section.pos();
                PddlError::Parse {
                    line,
                    col,
                    message: "empty section".to_owned(),
                }
            })?
            .sym()?;
        match tag {
            ":domain" => {
                problem.domain = items
                    .get(1)
                    .ok_or_else(|| invalid("missing domain reference"))?
                    .sym()?
                    .to_owned();
            }
            ":objects" => {
                for (name, ty) in parse_typed_list(&items[1..])? {
                    problem.objects.insert(name, ty);
                }
            }
            ":init" => {
                for atom in &items[1..] {
                    problem.init.insert(parse_ground_atom(atom)?);
                }
            }
            ":goal" => {
                let body = items
                    .get(1)
                    .ok_or_else(|| invalid("missing goal body"))?;
                parse_goal_literals(body, &mut problem.goal)?;
            }
            other => {
                return Err(PddlError::UnsupportedRequirement {
                    requirement: other.to_owned(),
                })
            }
        }
    }
    Ok(problem)
}

// ── Problem emission ──────────────────────────────────────────────────

fn render_atom(atom: &GroundAtom) -> String {
    if atom.args().is_empty() {
        format!("({})", atom.predicate())
    } else {
        format!("({} {})", atom.predicate(), atom.args().join(" "))
    }
}

/// Emits a problem document with deterministic byte output: objects,
/// init atoms, and goal literals all in sorted order. Parsing the
/// result reproduces the inputs exactly.
pub fn emit_problem(
    name: &str,
    domain_name: &str,
    objects: &crate::vocab::ObjectSet,
    init: &SymbolicState,
    goal: &Goal,
) -> Result<String, PddlError> {
    if goal.is_empty() {
        return Err(PddlError::EmptyGoal);
    }
    let mut out = String::new();
    out.push_str(&format!("(define (problem {name})\n"));
    out.push_str(&format!("  (:domain {domain_name})\n"));
    out.push_str("  (:objects\n");
    for (obj, ty) in objects.iter() {
        out.push_str(&format!("    {obj} - {ty}\n"));
    }
    out.push_str("  )\n  (:init\n");
    for atom in init.atoms() {
        out.push_str(&format!("    {}\n", render_atom(atom)));
    }
    out.push_str("  )\n  (:goal (and\n");
    for lit in goal.literals() {
        if lit.is_negated() {
            out.push_str(&format!("    (not {})\n", render_atom(lit.atom())));
        } else {
            out.push_str(&format!("    {}\n", render_atom(lit.atom())));
        }
    }
    out.push_str("  ))\n)\n");
    Ok(out)
}

// ── Grounding and application ─────────────────────────────────────────

/// A fully instantiated action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    label: ActionLabel,
    preconditions: Vec<(GroundAtom, bool)>,
    add: BTreeSet<GroundAtom>,
    delete: BTreeSet<GroundAtom>,
}

impl GroundAction {
    pub fn label(&self) -> &ActionLabel {
        &self.label
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroundingOptions {
    /// Require all parameters of one action to bind distinct objects.
    /// PDDL semantics permit repeated bindings, so this is off by
    /// default.
    pub distinct_args: bool,
}

fn substitute(atom: &SchemaAtom, binding: &BTreeMap<&str, &str>) -> GroundAtom {
    let args: Vec<&str> = atom
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => *binding.get(v.as_str()).expect("binding covers all params"),
            Term::Const(c) => c.as_str(),
        })
        .collect();
    GroundAtom::new(&atom.predicate, &args).expect("symbols already normalized")
}

/// Instantiates every action with all type-consistent parameter
/// bindings over the problem objects (and domain constants), in
/// deterministic label order. Delete entries also added by the same
/// action are dropped, so add and delete lists never overlap.
pub fn ground_actions(
    domain: &PddlDomain,
    objects: &BTreeMap<String, String>,
    options: &GroundingOptions,
) -> Result<Vec<GroundAction>, PddlError> {
    for (obj, ty) in objects {
        if !domain.has_type(ty) {
            return Err(invalid(format!("object {obj} has undeclared type {ty}")));
        }
    }
    let mut pool: Vec<(&str, &str)> = objects
        .iter()
        .map(|(n, t)| (n.as_str(), t.as_str()))
        .collect();
    pool.extend(
        domain
            .constants
            .iter()
            .map(|(n, t)| (n.as_str(), t.as_str())),
    );
    pool.sort();
    pool.dedup();

    let mut out: Vec<GroundAction> = Vec::new();
    for action in domain.actions.values() {
        let candidates: Vec<Vec<&str>> = action
            .params
            .iter()
            .map(|(_, ty)| {
                pool.iter()
                    .filter(|(_, oty)| domain.is_subtype(oty, ty))
                    .map(|(n, _)| *n)
                    .collect()
            })
            .collect();
        let mut tuple: Vec<&str> = Vec::with_capacity(candidates.len());
        ground_rec(action, &candidates, options, &mut tuple, &mut out);
    }
    out.sort_by(|a, b| a.label.to_string().cmp(&b.label.to_string()));
    Ok(out)
}

fn ground_rec<'p>(
    action: &ActionSchema,
    candidates: &[Vec<&'p str>],
    options: &GroundingOptions,
    tuple: &mut Vec<&'p str>,
    out: &mut Vec<GroundAction>,
) {
    if tuple.len() == candidates.len() {
        let binding: BTreeMap<&str, &str> = action
            .params
            .iter()
            .map(|(v, _)| v.as_str())
            .zip(tuple.iter().copied())
            .collect();
        let add: BTreeSet<GroundAtom> = action
            .add
            .iter()
            .map(|a| substitute(a, &binding))
            .collect();
        let delete: BTreeSet<GroundAtom> = action
            .delete
            .iter()
            .map(|a| substitute(a, &binding))
            .filter(|a| !add.contains(a))
            .collect();
        let preconditions: Vec<(GroundAtom, bool)> = action
            .preconditions
            .iter()
            .map(|(a, neg)| (substitute(a, &binding), *neg))
            .collect();
        out.push(GroundAction {
            label: ActionLabel::new(&action.name, tuple).expect("symbols already normalized"),
            preconditions,
            add,
            delete,
        });
        return;
    }
    for candidate in &candidates[tuple.len()] {
        if options.distinct_args && tuple.contains(candidate) {
            continue;
        }
        tuple.push(candidate);
        ground_rec(action, candidates, options, tuple, out);
        tuple.pop();
    }
}

/// STRIPS application: when every positive precondition holds and no
/// negative one does, the result is `(state \ delete) ∪ add`.
pub fn apply(state: &SymbolicState, action: &GroundAction) -> Option<SymbolicState> {
    for (atom, negated) in &action.preconditions {
        if state.contains(atom) == *negated {
            return None;
        }
    }
    let mut atoms = state.atom_set().clone();
    for d in &action.delete {
        atoms.remove(d);
    }
    for a in &action.add {
        atoms.insert(a.clone());
    }
    Some(SymbolicState::from_atoms_unchecked(atoms))
}

/// The successor function induced by a grounded model: every applicable
/// action paired with its result, in the grounding's label order.
pub fn model_successors(
    state: &SymbolicState,
    grounded: &[GroundAction],
) -> Vec<(ActionLabel, SymbolicState)> {
    grounded
        .iter()
        .filter_map(|ga| apply(state, ga).map(|next| (ga.label.clone(), next)))
        .collect()
}

/// Validates a problem against its domain: declared types, known
/// predicates, exact arities, subtype-compatible arguments, and goal
/// atoms over declared objects only.
pub fn validate_problem(domain: &PddlDomain, problem: &PddlProblem) -> Result<(), PddlError> {
    for (obj, ty) in &problem.objects {
        if !domain.has_type(ty) {
            return Err(invalid(format!("object {obj} has undeclared type {ty}")));
        }
    }
    let type_of = |name: &str| -> Option<&String> {
        problem
            .objects
            .get(name)
            .or_else(|| domain.constants.get(name))
    };
    let check = |atom: &GroundAtom| -> Result<(), PddlError> {
        let declared = domain
            .predicates
            .get(atom.predicate())
            .ok_or_else(|| invalid(format!("undeclared predicate {}", atom.predicate())))?;
        if declared.len() != atom.args().len() {
            return Err(invalid(format!(
                "predicate {} expects {} arguments, got {}",
                atom.predicate(),
                declared.len(),
                atom.args().len()
            )));
        }
        for (arg, slot_ty) in atom.args().iter().zip(declared) {
            let arg_ty = type_of(arg)
                .ok_or_else(|| invalid(format!("undeclared object {arg}")))?;
            if !domain.is_subtype(arg_ty, slot_ty) {
                return Err(invalid(format!(
                    "argument {arg} of {} has type {arg_ty}, expected {slot_ty}",
                    atom.predicate()
                )));
            }
        }
        Ok(())
    };
    for atom in &problem.init {
        check(atom)?;
    }
    for lit in &problem.goal {
        check(lit.atom())?;
    }
    Ok(())
}

/// The model-based protocol: validate, ground, then A* with
/// `f = g + goal_count` over the model-induced successor function.
pub fn plan_with_model(
    domain: &PddlDomain,
    problem: &PddlProblem,
    budget: &SearchBudget,
) -> Result<PlanResult, PddlError> {
    validate_problem(domain, problem)?;
    if problem.goal.is_empty() {
        return Err(PddlError::EmptyGoal);
    }
    let grounded = ground_actions(domain, &problem.objects, &GroundingOptions::default())?;
    let initial = SymbolicState::from_atoms_unchecked(problem.init.clone());
    let goal = Goal::from_literals_unchecked(problem.goal.clone());
    astar(
        &initial,
        &goal,
        |s| Ok(model_successors(s, &grounded)),
        budget,
    )
}
