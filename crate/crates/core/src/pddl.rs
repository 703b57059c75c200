//! PDDL front end: parse and validate domain/problem files into a typed
//! symbolic model. Supported fragment is STRIPS + :typing + negative
//! preconditions; identifiers are case-insensitive and normalized to lower
//! case.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::sexpr::{self, Pos, Sexp};

pub const OBJECT_TYPE: &str = "object";

#[derive(Debug, Clone, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct PddlError {
    pub pos: Pos,
    pub msg: String,
}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError {
        pos,
        msg: msg.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSchema {
    pub name: String,
    /// (variable, type-name) pairs; variables keep their leading `?`.
    pub params: Vec<(String, String)>,
}

/// Predicate applied to schema variables, as it appears in a precondition
/// or effect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaLiteral {
    pub positive: bool,
    pub atom: SchemaAtom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub precondition: Vec<SchemaLiteral>,
    pub add: Vec<SchemaAtom>,
    pub del: Vec<SchemaAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainModel {
    pub name: String,
    /// (type-name, parent-type) pairs; the implicit root `object` is not listed.
    pub types: Vec<(String, String)>,
    pub predicates: Vec<PredicateSchema>,
    pub actions: Vec<ActionSchema>,
}

/// Ground predicate application over object names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundLiteral {
    pub positive: bool,
    pub atom: Atom,
}

pub type AttributeMap = BTreeMap<String, BTreeMap<String, i64>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemModel {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<(String, String)>,
    pub init: Vec<Atom>,
    pub goal: Vec<GroundLiteral>,
    /// Static numeric object attributes (e.g. tile grid coordinates),
    /// from the `;; :attributes` block or a JSON sidecar.
    pub attributes: AttributeMap,
}

impl DomainModel {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// True iff `sub` equals `ancestor` or is a descendant in the type tree.
    pub fn is_subtype(&self, sub: &str, ancestor: &str) -> bool {
        if sub == ancestor {
            return true;
        }
        let mut cur = sub;
        loop {
            let parent = if cur == OBJECT_TYPE {
                return false;
            } else {
                match self.types.iter().find(|(t, _)| t == cur) {
                    Some((_, p)) => p.as_str(),
                    None => return false,
                }
            };
            if parent == ancestor {
                return true;
            }
            cur = parent;
        }
    }

    fn has_type(&self, name: &str) -> bool {
        name == OBJECT_TYPE || self.types.iter().any(|(t, _)| t == name)
    }
}

impl ProblemModel {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects
            .iter()
            .find(|(o, _)| o == name)
            .map(|(_, t)| t.as_str())
    }

    /// Closed-world membership: absent means false.
    pub fn holds_initially(&self, atom: &Atom) -> bool {
        self.init.contains(atom)
    }
}

/// Checks a ground atom or action application against the domain's declared
/// parameter types. Total: unknown names simply fail the check.
pub fn typecheck(
    predicate_or_action: &str,
    args: &[String],
    domain: &DomainModel,
    problem: &ProblemModel,
) -> bool {
    let params: Vec<&str> = if let Some(p) = domain.predicate(predicate_or_action) {
        p.params.iter().map(|(_, t)| t.as_str()).collect()
    } else if let Some(a) = domain.action(predicate_or_action) {
        a.params.iter().map(|(_, t)| t.as_str()).collect()
    } else {
        return false;
    };
    if params.len() != args.len() {
        return false;
    }
    params.iter().zip(args).all(|(want, arg)| {
        problem
            .object_type(arg)
            .is_some_and(|have| domain.is_subtype(have, want))
    })
}

fn norm(s: &str) -> String {
    s.to_ascii_lowercase()
}

fn atom_tok<'a>(s: &'a Sexp, what: &str) -> Result<(String, Pos), PddlError> {
    match s {
        Sexp::Atom(a, p) => Ok((norm(a), *p)),
        Sexp::List(_, p) => err(*p, format!("expected {what}, found a list")),
    }
}

/// Parses a PDDL typed list (`a b - t c - u`) into (name, type) pairs.
/// Untyped trailing names default to `object`.
fn parse_typed_list(items: &[Sexp]) -> Result<Vec<(String, String, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let (tok, pos) = atom_tok(&items[i], "a name")?;
        if tok == "-" {
            i += 1;
            if i >= items.len() {
                return err(pos, "dangling '-' in typed list");
            }
            let (ty, _) = atom_tok(&items[i], "a type name")?;
            if pending.is_empty() {
                return err(pos, "type with no preceding names in typed list");
            }
            for (name, npos) in pending.drain(..) {
                out.push((name, ty.clone(), npos));
            }
        } else {
            pending.push((tok, pos));
        }
        i += 1;
    }
    for (name, npos) in pending {
        out.push((name, OBJECT_TYPE.to_string(), npos));
    }
    Ok(out)
}

fn parse_schema_atom(form: &Sexp) -> Result<(SchemaAtom, Pos), PddlError> {
    let items = form
        .as_list()
        .ok_or_else(|| PddlError {
            pos: form.pos(),
            msg: "expected a predicate application".into(),
        })?;
    if items.is_empty() {
        return err(form.pos(), "empty predicate application");
    }
    let (pred, _) = atom_tok(&items[0], "a predicate name")?;
    let mut args = Vec::new();
    for a in &items[1..] {
        let (tok, _) = atom_tok(a, "an argument")?;
        args.push(tok);
    }
    Ok((
        SchemaAtom {
            predicate: pred,
            args,
        },
        form.pos(),
    ))
}

/// Flattens `(and ...)` / single literal into a literal list. `not` may wrap
/// atoms only.
fn parse_literal_conjunction(form: &Sexp) -> Result<Vec<(SchemaLiteral, Pos)>, PddlError> {
    let items = form.as_list().ok_or_else(|| PddlError {
        pos: form.pos(),
        msg: "expected a condition".into(),
    })?;
    if items.is_empty() {
        // () and (and) are both the empty conjunction
        return Ok(Vec::new());
    }
    let head = items[0].as_atom().map(norm);
    if head.as_deref() == Some("and") {
        let mut out = Vec::new();
        for sub in &items[1..] {
            out.extend(parse_literal_conjunction(sub)?);
        }
        return Ok(out);
    }
    if head.as_deref() == Some("not") {
        if items.len() != 2 {
            return err(form.pos(), "'not' takes exactly one argument");
        }
        let (atom, pos) = parse_schema_atom(&items[1])?;
        return Ok(vec![(
            SchemaLiteral {
                positive: false,
                atom,
            },
            pos,
        )]);
    }
    let (atom, pos) = parse_schema_atom(form)?;
    Ok(vec![(
        SchemaLiteral {
            positive: true,
            atom,
        },
        pos,
    )])
}

struct SectionMap<'a> {
    sections: Vec<(&'a str, &'a Sexp)>,
}

fn split_sections(forms: &[Sexp]) -> Result<SectionMap<'_>, PddlError> {
    let mut sections = Vec::new();
    for f in forms {
        let items = f.as_list().ok_or_else(|| PddlError {
            pos: f.pos(),
            msg: "expected a (:section ...) form".into(),
        })?;
        if items.is_empty() {
            return err(f.pos(), "empty section");
        }
        let key = items[0].as_atom().ok_or_else(|| PddlError {
            pos: items[0].pos(),
            msg: "expected a section keyword".into(),
        })?;
        sections.push((key, f));
    }
    Ok(SectionMap { sections })
}

pub fn parse_domain(text: &str) -> Result<DomainModel, PddlError> {
    let form = sexpr::read_one(text).map_err(|e| PddlError {
        pos: e.pos,
        msg: e.msg,
    })?;
    let items = form.as_list().ok_or_else(|| PddlError {
        pos: form.pos(),
        msg: "expected (define (domain ...) ...)".into(),
    })?;
    if items.is_empty() || items[0].as_atom().map(norm).as_deref() != Some("define") {
        return err(form.pos(), "expected (define (domain ...) ...)");
    }
    let head = items
        .get(1)
        .and_then(|s| s.as_list())
        .filter(|h| h.len() == 2 && h[0].as_atom().map(norm).as_deref() == Some("domain"))
        .ok_or_else(|| PddlError {
            pos: form.pos(),
            msg: "expected (domain <name>) after define".into(),
        })?;
    let (name, _) = atom_tok(&head[1], "a domain name")?;

    let mut types: Vec<(String, String)> = Vec::new();
    let mut predicates: Vec<PredicateSchema> = Vec::new();
    let mut actions: Vec<ActionSchema> = Vec::new();

    for (key, f) in split_sections(&items[2..])?.sections {
        let sub = f.as_list().unwrap();
        match norm(key).as_str() {
            ":requirements" => {
                for r in &sub[1..] {
                    let (req, pos) = atom_tok(r, "a requirement")?;
                    match req.as_str() {
                        ":strips" | ":typing" | ":negative-preconditions" => {}
                        other => {
                            return err(pos, format!("unsupported requirement {other}"));
                        }
                    }
                }
            }
            ":types" => {
                for (ty, parent, pos) in parse_typed_list(&sub[1..])? {
                    if ty == OBJECT_TYPE {
                        return err(pos, "'object' is the implicit root type");
                    }
                    if types.iter().any(|(t, _)| *t == ty) {
                        return err(pos, format!("duplicate type {ty}"));
                    }
                    types.push((ty, parent));
                }
            }
            ":predicates" => {
                for p in &sub[1..] {
                    let decl = p.as_list().ok_or_else(|| PddlError {
                        pos: p.pos(),
                        msg: "expected a predicate declaration".into(),
                    })?;
                    if decl.is_empty() {
                        return err(p.pos(), "empty predicate declaration");
                    }
                    let (pname, ppos) = atom_tok(&decl[0], "a predicate name")?;
                    if predicates.iter().any(|q| q.name == pname) {
                        return err(ppos, format!("duplicate predicate {pname}"));
                    }
                    let mut params = Vec::new();
                    let mut seen = HashSet::new();
                    for (var, ty, vpos) in parse_typed_list(&decl[1..])? {
                        if !var.starts_with('?') {
                            return err(vpos, format!("predicate parameter {var} must start with '?'"));
                        }
                        if !seen.insert(var.clone()) {
                            return err(vpos, format!("duplicate variable {var}"));
                        }
                        params.push((var, ty));
                    }
                    predicates.push(PredicateSchema {
                        name: pname,
                        params,
                    });
                }
            }
            ":action" => {
                actions.push(parse_action(sub, f.pos())?);
            }
            other => {
                return err(f.pos(), format!("unsupported section {other}"));
            }
        }
    }

    let domain = DomainModel {
        name,
        types,
        predicates,
        actions,
    };
    validate_domain(&domain, form.pos())?;
    Ok(domain)
}

fn parse_action(sub: &[Sexp], pos: Pos) -> Result<ActionSchema, PddlError> {
    if sub.len() < 2 {
        return err(pos, "action missing name");
    }
    let (name, _) = atom_tok(&sub[1], "an action name")?;
    let mut params = Vec::new();
    let mut precondition = Vec::new();
    let mut add = Vec::new();
    let mut del = Vec::new();
    let mut i = 2;
    while i < sub.len() {
        let (key, kpos) = atom_tok(&sub[i], "an action keyword")?;
        let value = sub.get(i + 1).ok_or_else(|| PddlError {
            pos: kpos,
            msg: format!("{key} missing its argument"),
        })?;
        match key.as_str() {
            ":parameters" => {
                let list = value.as_list().ok_or_else(|| PddlError {
                    pos: value.pos(),
                    msg: ":parameters expects a list".into(),
                })?;
                let mut seen = HashSet::new();
                for (var, ty, vpos) in parse_typed_list(list)? {
                    if !var.starts_with('?') {
                        return err(vpos, format!("parameter {var} must start with '?'"));
                    }
                    if !seen.insert(var.clone()) {
                        return err(vpos, format!("duplicate parameter {var}"));
                    }
                    params.push((var, ty));
                }
            }
            ":precondition" => {
                for (lit, _) in parse_literal_conjunction(value)? {
                    precondition.push(lit);
                }
            }
            ":effect" => {
                for (lit, lpos) in parse_literal_conjunction(value)? {
                    if lit.positive {
                        add.push(lit.atom);
                    } else {
                        del.push(lit.atom);
                    }
                    let _ = lpos;
                }
            }
            other => return err(kpos, format!("unsupported action keyword {other}")),
        }
        i += 2;
    }
    Ok(ActionSchema {
        name,
        params,
        precondition,
        add,
        del,
    })
}

fn validate_domain(domain: &DomainModel, pos: Pos) -> Result<(), PddlError> {
    // type graph must be a tree rooted at `object`
    for (ty, parent) in &domain.types {
        if !domain.has_type(parent) {
            return err(pos, format!("type {ty} has unknown parent {parent}"));
        }
        let mut cur = parent.as_str();
        while cur != OBJECT_TYPE {
            if cur == ty {
                return err(pos, format!("type cycle through {ty}"));
            }
            cur = match domain.types.iter().find(|(t, _)| t == cur) {
                Some((_, p)) => p,
                None => break,
            };
        }
    }
    for p in &domain.predicates {
        for (var, ty) in &p.params {
            if !domain.has_type(ty) {
                return err(pos, format!("predicate {}: parameter {var} has unknown type {ty}", p.name));
            }
        }
    }
    let mut action_names = HashSet::new();
    for a in &domain.actions {
        if !action_names.insert(&a.name) {
            return err(pos, format!("duplicate action name {}", a.name));
        }
        let bound: HashSet<&str> = a.params.iter().map(|(v, _)| v.as_str()).collect();
        for (var, ty) in &a.params {
            if !domain.has_type(ty) {
                return err(pos, format!("action {}: parameter {var} has unknown type {ty}", a.name));
            }
        }
        let check_atom = |atom: &SchemaAtom, where_: &str| -> Result<(), PddlError> {
            let schema = domain.predicate(&atom.predicate).ok_or_else(|| PddlError {
                pos,
                msg: format!("action {}: unknown predicate {} in {where_}", a.name, atom.predicate),
            })?;
            if schema.params.len() != atom.args.len() {
                return err(
                    pos,
                    format!(
                        "action {}: {} applied to {} arguments, expected {}",
                        a.name,
                        atom.predicate,
                        atom.args.len(),
                        schema.params.len()
                    ),
                );
            }
            for arg in &atom.args {
                if !bound.contains(arg.as_str()) {
                    return err(
                        pos,
                        format!("action {}: variable {arg} not declared in :parameters", a.name),
                    );
                }
            }
            Ok(())
        };
        for lit in &a.precondition {
            check_atom(&lit.atom, "precondition")?;
        }
        for atom in &a.add {
            check_atom(atom, "effect")?;
        }
        for atom in &a.del {
            check_atom(atom, "effect")?;
        }
        for atom in &a.add {
            if a.del.contains(atom) {
                return err(
                    pos,
                    format!("action {}: {} appears in both add and delete effects", a.name, atom.predicate),
                );
            }
        }
    }
    Ok(())
}

fn parse_ground_atom(form: &Sexp) -> Result<(Atom, Pos), PddlError> {
    let (schema, pos) = parse_schema_atom(form)?;
    for a in &schema.args {
        if a.starts_with('?') {
            return err(pos, format!("unexpected variable {a} in ground atom"));
        }
    }
    Ok((
        Atom {
            predicate: schema.predicate,
            args: schema.args,
        },
        pos,
    ))
}

pub fn parse_problem(text: &str, domain: &DomainModel) -> Result<ProblemModel, PddlError> {
    let form = sexpr::read_one(text).map_err(|e| PddlError {
        pos: e.pos,
        msg: e.msg,
    })?;
    let items = form.as_list().ok_or_else(|| PddlError {
        pos: form.pos(),
        msg: "expected (define (problem ...) ...)".into(),
    })?;
    if items.len() < 2 || items[0].as_atom().map(norm).as_deref() != Some("define") {
        return err(form.pos(), "expected (define (problem ...) ...)");
    }
    let head = items
        .get(1)
        .and_then(|s| s.as_list())
        .filter(|h| h.len() == 2 && h[0].as_atom().map(norm).as_deref() == Some("problem"))
        .ok_or_else(|| PddlError {
            pos: form.pos(),
            msg: "expected (problem <name>) after define".into(),
        })?;
    let (name, _) = atom_tok(&head[1], "a problem name")?;

    let mut domain_name = String::new();
    let mut objects: Vec<(String, String)> = Vec::new();
    let mut init: Vec<Atom> = Vec::new();
    let mut goal: Vec<GroundLiteral> = Vec::new();

    for (key, f) in split_sections(&items[2..])?.sections {
        let sub = f.as_list().unwrap();
        match norm(key).as_str() {
            ":domain" => {
                let (d, _) = atom_tok(&sub[1], "a domain name")?;
                domain_name = d;
            }
            ":objects" => {
                for (obj, ty, pos) in parse_typed_list(&sub[1..])? {
                    if !domain.has_type(&ty) {
                        return err(pos, format!("object {obj} has unknown type {ty}"));
                    }
                    if objects.iter().any(|(o, _)| *o == obj) {
                        return err(pos, format!("duplicate object {obj}"));
                    }
                    objects.push((obj, ty));
                }
            }
            ":init" => {
                for a in &sub[1..] {
                    let (atom, _) = parse_ground_atom(a)?;
                    if !init.contains(&atom) {
                        init.push(atom);
                    }
                }
            }
            ":goal" => {
                if sub.len() != 2 {
                    return err(f.pos(), ":goal expects exactly one formula");
                }
                for (lit, lpos) in parse_literal_conjunction(&sub[1])? {
                    for a in &lit.atom.args {
                        if a.starts_with('?') {
                            return err(lpos, format!("unexpected variable {a} in goal"));
                        }
                    }
                    goal.push(GroundLiteral {
                        positive: lit.positive,
                        atom: Atom {
                            predicate: lit.atom.predicate,
                            args: lit.atom.args,
                        },
                    });
                }
            }
            other => return err(f.pos(), format!("unsupported section {other}")),
        }
    }

    let attributes = parse_attribute_block(text)?;
    let problem = ProblemModel {
        name,
        domain_name,
        objects,
        init,
        goal,
        attributes,
    };
    validate_problem(&problem, domain, form.pos())?;
    Ok(problem)
}

fn validate_problem(
    problem: &ProblemModel,
    domain: &DomainModel,
    pos: Pos,
) -> Result<(), PddlError> {
    if !problem.domain_name.is_empty() && problem.domain_name != domain.name {
        return err(
            pos,
            format!(
                "problem targets domain {}, parsed against {}",
                problem.domain_name, domain.name
            ),
        );
    }
    let check_atom = |atom: &Atom, where_: &str| -> Result<(), PddlError> {
        let schema = domain.predicate(&atom.predicate).ok_or_else(|| PddlError {
            pos,
            msg: format!("unknown predicate {} in {where_}", atom.predicate),
        })?;
        if schema.params.len() != atom.args.len() {
            return err(
                pos,
                format!(
                    "{where_} atom {atom}: {} takes {} arguments",
                    atom.predicate,
                    schema.params.len()
                ),
            );
        }
        for (arg, (_, want)) in atom.args.iter().zip(&schema.params) {
            let have = problem.object_type(arg).ok_or_else(|| PddlError {
                pos,
                msg: format!("{where_} atom {atom}: unknown object {arg}"),
            })?;
            if !domain.is_subtype(have, want) {
                return err(
                    pos,
                    format!("{where_} atom {atom}: {arg} has type {have}, expected {want}"),
                );
            }
        }
        Ok(())
    };
    for a in &problem.init {
        check_atom(a, "init")?;
    }
    for l in &problem.goal {
        check_atom(&l.atom, "goal")?;
    }
    for name in problem.attributes.keys() {
        if problem.object_type(name).is_none() {
            return err(pos, format!("attribute block references unknown object {name}"));
        }
    }
    Ok(())
}

/// Extracts the `;; :attributes` comment block: each following line of the
/// form `;; <object> <attribute> <integer>` adds one entry. The block ends at
/// the first comment line that does not fit the shape, or at `;; :end`.
fn parse_attribute_block(text: &str) -> Result<AttributeMap, PddlError> {
    let mut attrs = AttributeMap::new();
    let mut in_block = false;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        let Some(body) = trimmed.strip_prefix(";;") else {
            if in_block && !trimmed.starts_with(';') && !trimmed.is_empty() {
                in_block = false;
            }
            continue;
        };
        let body = body.trim();
        if body == ":attributes" {
            in_block = true;
            continue;
        }
        if body == ":end" {
            in_block = false;
            continue;
        }
        if in_block {
            let parts: Vec<&str> = body.split_whitespace().collect();
            if parts.len() != 3 {
                return err(
                    Pos {
                        line: lineno + 1,
                        col: 1,
                    },
                    format!("attribute line must be 'object attribute value': {body}"),
                );
            }
            let value: i64 = parts[2].parse().map_err(|_| PddlError {
                pos: Pos {
                    line: lineno + 1,
                    col: 1,
                },
                msg: format!("attribute value must be an integer: {}", parts[2]),
            })?;
            attrs
                .entry(norm(parts[0]))
                .or_default()
                .insert(norm(parts[1]), value);
        }
    }
    Ok(attrs)
}

/// Merges a JSON sidecar (`{"object": {"attr": value}}`) into the problem's
/// attribute map. Sidecar entries win on conflict.
pub fn apply_attribute_sidecar(
    problem: &mut ProblemModel,
    json: &str,
) -> Result<(), serde_json::Error> {
    let side: HashMap<String, HashMap<String, i64>> = serde_json::from_str(json)?;
    for (obj, m) in side {
        let slot = problem.attributes.entry(norm(&obj)).or_default();
        for (k, v) in m {
            slot.insert(norm(&k), v);
        }
    }
    Ok(())
}

pub fn print_domain(d: &DomainModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (domain {})", d.name);
    let _ = writeln!(s, "  (:requirements :strips :typing :negative-preconditions)");
    if !d.types.is_empty() {
        let _ = write!(s, "  (:types");
        for (t, p) in &d.types {
            let _ = write!(s, " {t} - {p}");
        }
        let _ = writeln!(s, ")");
    }
    if !d.predicates.is_empty() {
        let _ = writeln!(s, "  (:predicates");
        for p in &d.predicates {
            let _ = write!(s, "    ({}", p.name);
            for (v, t) in &p.params {
                let _ = write!(s, " {v} - {t}");
            }
            let _ = writeln!(s, ")");
        }
        let _ = writeln!(s, "  )");
    }
    for a in &d.actions {
        let _ = writeln!(s, "  (:action {}", a.name);
        let _ = write!(s, "    :parameters (");
        for (i, (v, t)) in a.params.iter().enumerate() {
            if i > 0 {
                let _ = write!(s, " ");
            }
            let _ = write!(s, "{v} - {t}");
        }
        let _ = writeln!(s, ")");
        let _ = write!(s, "    :precondition (and");
        for lit in &a.precondition {
            let _ = write!(s, " {}", print_schema_literal(lit));
        }
        let _ = writeln!(s, ")");
        let _ = write!(s, "    :effect (and");
        for atom in &a.add {
            let _ = write!(s, " {}", print_schema_atom(atom));
        }
        for atom in &a.del {
            let _ = write!(s, " (not {})", print_schema_atom(atom));
        }
        let _ = writeln!(s, ")");
        let _ = writeln!(s, "  )");
    }
    let _ = writeln!(s, ")");
    s
}

fn print_schema_atom(a: &SchemaAtom) -> String {
    let mut s = format!("({}", a.predicate);
    for arg in &a.args {
        s.push(' ');
        s.push_str(arg);
    }
    s.push(')');
    s
}

fn print_schema_literal(l: &SchemaLiteral) -> String {
    if l.positive {
        print_schema_atom(&l.atom)
    } else {
        format!("(not {})", print_schema_atom(&l.atom))
    }
}

pub fn print_problem(p: &ProblemModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {})", p.name);
    let _ = writeln!(s, "  (:domain {})", p.domain_name);
    let _ = write!(s, "  (:objects");
    for (o, t) in &p.objects {
        let _ = write!(s, " {o} - {t}");
    }
    let _ = writeln!(s, ")");
    let _ = writeln!(s, "  (:init");
    for a in &p.init {
        let _ = writeln!(s, "    {a}");
    }
    let _ = writeln!(s, "  )");
    let _ = write!(s, "  (:goal (and");
    for l in &p.goal {
        if l.positive {
            let _ = write!(s, " {}", l.atom);
        } else {
            let _ = write!(s, " (not {})", l.atom);
        }
    }
    let _ = writeln!(s, "))");
    let _ = writeln!(s, ")");
    if !p.attributes.is_empty() {
        let _ = writeln!(s, ";; :attributes");
        for (obj, m) in &p.attributes {
            for (k, v) in m {
                let _ = writeln!(s, ";; {obj} {k} {v}");
            }
        }
        let _ = writeln!(s, ";; :end");
    }
    s
}
