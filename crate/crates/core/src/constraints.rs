//! Declarative constraint rules that prune the task-level search space.
//!
//! A rule forbids instantiations of one action schema whenever an
//! existentially quantified conjunction of state literals holds, subject to
//! arithmetic guards over static object attributes. Rules are data, parsed
//! from s-expressions, and compile to plain clauses over the step-indexed
//! planning variables:
//!
//! ```text
//! (forbid (pick ?b ?t)
//!   :when (exists (?b2 ?t2) (and (at ?b2 ?t2)))
//!   :guard (and (= (attr col ?t2) (attr col ?t))
//!               (> (attr row ?t2) (attr row ?t))))
//! ```
//!
//! Quantified variables may carry an explicit type (`(exists ((?l lid)) ...)`);
//! otherwise the type is inferred from the predicate positions the variable
//! occurs in.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::grounding::GroundTask;
use crate::pddl::{Atom, DomainModel};
use crate::refine::RefinementReport;
use crate::sat::Lit;
use crate::satplan::CnfEncoding;
use crate::sexpr::{self, Pos, Sexp};

#[derive(Debug, Clone, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct RuleError {
    pub pos: Pos,
    pub msg: String,
}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, RuleError> {
    Err(RuleError {
        pos,
        msg: msg.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn parse(s: &str) -> Option<CmpOp> {
        Some(match s {
            "=" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    fn print(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardOperand {
    /// `(attr <name> <var>)` — static attribute of the bound object.
    Attr { attr: String, var: String },
    Const(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub op: CmpOp,
    pub lhs: GuardOperand,
    pub rhs: GuardOperand,
}

/// State literal in a rule condition; args are pattern/quantified variables
/// or object constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionLiteral {
    pub positive: bool,
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintRule {
    pub name: String,
    pub action: String,
    pub params: Vec<String>,
    /// Quantified variables with optional explicit type.
    pub exists: Vec<(String, Option<String>)>,
    pub condition: Vec<ConditionLiteral>,
    pub guards: Vec<Guard>,
}

/// Constraint generalized from one refinement failure: forbid the ground
/// action whenever every culprit atom holds with its recorded polarity.
/// Identified by names rather than indices so it survives across problem
/// instances; groundings that do not exist in a task are skipped there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnedConstraint {
    pub action_schema: String,
    pub action_args: Vec<String>,
    /// (predicate, args, polarity); polarity true means the atom must hold.
    pub culprit: Vec<(String, Vec<String>, bool)>,
    /// Weakest-sound fallback for an empty culprit set: block only this step.
    pub only_at_step: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub rules: Vec<ConstraintRule>,
    pub learned: Vec<LearnedConstraint>,
}

impl RuleSet {
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.learned.is_empty()
    }
}

/// Parses and validates a rule file against the domain and the known static
/// attribute names.
pub fn parse_rules(
    text: &str,
    domain: &DomainModel,
    known_attrs: &BTreeSet<String>,
) -> Result<RuleSet, RuleError> {
    let forms = sexpr::read_all(text).map_err(|e| RuleError {
        pos: e.pos,
        msg: e.msg,
    })?;
    let mut rules = Vec::new();
    for form in &forms {
        rules.push(parse_rule(form, rules.len(), domain, known_attrs)?);
    }
    Ok(RuleSet {
        rules,
        learned: Vec::new(),
    })
}

fn parse_rule(
    form: &Sexp,
    ordinal: usize,
    domain: &DomainModel,
    known_attrs: &BTreeSet<String>,
) -> Result<ConstraintRule, RuleError> {
    let items = form.as_list().ok_or_else(|| RuleError {
        pos: form.pos(),
        msg: "expected a (forbid ...) form".into(),
    })?;
    if items.is_empty() || items[0].as_atom() != Some("forbid") {
        return err(form.pos(), "expected (forbid (action ?vars...) ...)");
    }
    let pattern = items
        .get(1)
        .and_then(|s| s.as_list())
        .ok_or_else(|| RuleError {
            pos: form.pos(),
            msg: "forbid expects an action pattern list".into(),
        })?;
    if pattern.is_empty() {
        return err(items[1].pos(), "empty action pattern");
    }
    let action = pattern[0]
        .as_atom()
        .ok_or_else(|| RuleError {
            pos: pattern[0].pos(),
            msg: "expected an action name".into(),
        })?
        .to_ascii_lowercase();
    let schema = domain.action(&action).ok_or_else(|| RuleError {
        pos: pattern[0].pos(),
        msg: format!("unknown action {action}"),
    })?;
    let mut params = Vec::new();
    for p in &pattern[1..] {
        let v = p.as_atom().ok_or_else(|| RuleError {
            pos: p.pos(),
            msg: "expected a pattern variable".into(),
        })?;
        if !v.starts_with('?') {
            return err(p.pos(), format!("pattern argument {v} must be a variable"));
        }
        params.push(v.to_ascii_lowercase());
    }
    if params.len() != schema.params.len() {
        return err(
            items[1].pos(),
            format!(
                "action {action} takes {} parameters, pattern has {}",
                schema.params.len(),
                params.len()
            ),
        );
    }

    let mut name = format!("forbid-{action}-{}", ordinal + 1);
    let mut exists: Vec<(String, Option<String>)> = Vec::new();
    let mut condition: Vec<ConditionLiteral> = Vec::new();
    let mut guards: Vec<Guard> = Vec::new();

    let mut i = 2;
    while i < items.len() {
        let key = items[i].as_atom().ok_or_else(|| RuleError {
            pos: items[i].pos(),
            msg: "expected :name, :when or :guard".into(),
        })?;
        let value = items.get(i + 1).ok_or_else(|| RuleError {
            pos: items[i].pos(),
            msg: format!("{key} missing its argument"),
        })?;
        match key {
            ":name" => {
                name = value
                    .as_atom()
                    .ok_or_else(|| RuleError {
                        pos: value.pos(),
                        msg: ":name expects an identifier".into(),
                    })?
                    .to_ascii_lowercase();
            }
            ":when" => {
                let (e, c) = parse_when(value, domain)?;
                exists = e;
                condition = c;
            }
            ":guard" => {
                guards = parse_guards(value, known_attrs)?;
            }
            other => return err(items[i].pos(), format!("unknown rule keyword {other}")),
        }
        i += 2;
    }

    let rule = ConstraintRule {
        name,
        action,
        params,
        exists,
        condition,
        guards,
    };
    validate_rule(&rule, form.pos(), domain)?;
    Ok(rule)
}

/// `:when` body: `(exists (binders...) (and lits...))` or bare `(and lits...)`.
fn parse_when(
    form: &Sexp,
    domain: &DomainModel,
) -> Result<(Vec<(String, Option<String>)>, Vec<ConditionLiteral>), RuleError> {
    let items = form.as_list().ok_or_else(|| RuleError {
        pos: form.pos(),
        msg: ":when expects a condition".into(),
    })?;
    if items.first().and_then(|s| s.as_atom()) == Some("exists") {
        if items.len() != 3 {
            return err(form.pos(), "exists expects (exists (vars) (and ...))");
        }
        let binders = items[1].as_list().ok_or_else(|| RuleError {
            pos: items[1].pos(),
            msg: "exists expects a binder list".into(),
        })?;
        let mut exists = Vec::new();
        for b in binders {
            match b {
                Sexp::Atom(v, pos) => {
                    if !v.starts_with('?') {
                        return err(*pos, format!("binder {v} must be a variable"));
                    }
                    exists.push((v.to_ascii_lowercase(), None));
                }
                Sexp::List(pair, pos) => {
                    // typed binder: (?var type)
                    if pair.len() != 2 {
                        return err(*pos, "typed binder must be (?var type)");
                    }
                    let v = pair[0].as_atom().unwrap_or_default();
                    let ty = pair[1].as_atom().unwrap_or_default().to_ascii_lowercase();
                    if !v.starts_with('?') {
                        return err(*pos, format!("binder {v} must be a variable"));
                    }
                    if ty != crate::pddl::OBJECT_TYPE
                        && !domain.types.iter().any(|(t, _)| *t == ty)
                    {
                        return err(*pos, format!("unknown type {ty} in binder"));
                    }
                    exists.push((v.to_ascii_lowercase(), Some(ty)));
                }
            }
        }
        let condition = parse_condition_conjunction(&items[2])?;
        Ok((exists, condition))
    } else {
        Ok((Vec::new(), parse_condition_conjunction(form)?))
    }
}

fn parse_condition_conjunction(form: &Sexp) -> Result<Vec<ConditionLiteral>, RuleError> {
    let items = form.as_list().ok_or_else(|| RuleError {
        pos: form.pos(),
        msg: "expected a conjunction of literals".into(),
    })?;
    let body: &[Sexp] = if items.first().and_then(|s| s.as_atom()) == Some("and") {
        &items[1..]
    } else {
        std::slice::from_ref(form)
    };
    let mut out = Vec::new();
    for lit_form in body {
        out.push(parse_condition_literal(lit_form)?);
    }
    Ok(out)
}

fn parse_condition_literal(form: &Sexp) -> Result<ConditionLiteral, RuleError> {
    let items = form.as_list().ok_or_else(|| RuleError {
        pos: form.pos(),
        msg: "expected a literal".into(),
    })?;
    if items.is_empty() {
        return err(form.pos(), "empty literal");
    }
    if items[0].as_atom() == Some("not") {
        if items.len() != 2 {
            return err(form.pos(), "'not' takes exactly one argument");
        }
        let mut inner = parse_condition_literal(&items[1])?;
        if !inner.positive {
            return err(form.pos(), "double negation not supported");
        }
        inner.positive = false;
        return Ok(inner);
    }
    let predicate = items[0]
        .as_atom()
        .ok_or_else(|| RuleError {
            pos: items[0].pos(),
            msg: "expected a predicate name".into(),
        })?
        .to_ascii_lowercase();
    let mut args = Vec::new();
    for a in &items[1..] {
        let tok = a.as_atom().ok_or_else(|| RuleError {
            pos: a.pos(),
            msg: "expected a variable or object name".into(),
        })?;
        args.push(tok.to_ascii_lowercase());
    }
    Ok(ConditionLiteral {
        positive: true,
        predicate,
        args,
    })
}

fn parse_guards(form: &Sexp, known_attrs: &BTreeSet<String>) -> Result<Vec<Guard>, RuleError> {
    let items = form.as_list().ok_or_else(|| RuleError {
        pos: form.pos(),
        msg: ":guard expects comparisons".into(),
    })?;
    let body: &[Sexp] = if items.first().and_then(|s| s.as_atom()) == Some("and") {
        &items[1..]
    } else {
        std::slice::from_ref(form)
    };
    let mut guards = Vec::new();
    for g in body {
        let cmp = g.as_list().ok_or_else(|| RuleError {
            pos: g.pos(),
            msg: "expected a comparison".into(),
        })?;
        if cmp.len() != 3 {
            return err(g.pos(), "comparison must be (op lhs rhs)");
        }
        let op_tok = cmp[0].as_atom().ok_or_else(|| RuleError {
            pos: cmp[0].pos(),
            msg: "expected a comparison operator".into(),
        })?;
        let op = CmpOp::parse(op_tok)
            .ok_or_else(|| RuleError {
                pos: cmp[0].pos(),
                msg: format!("malformed comparison: unknown operator {op_tok}"),
            })?;
        let lhs = parse_operand(&cmp[1], known_attrs)?;
        let rhs = parse_operand(&cmp[2], known_attrs)?;
        guards.push(Guard { op, lhs, rhs });
    }
    Ok(guards)
}

fn parse_operand(form: &Sexp, known_attrs: &BTreeSet<String>) -> Result<GuardOperand, RuleError> {
    match form {
        Sexp::Atom(tok, pos) => tok
            .parse::<i64>()
            .map(GuardOperand::Const)
            .map_err(|_| RuleError {
                pos: *pos,
                msg: format!("guard operand must be (attr name ?var) or an integer: {tok}"),
            }),
        Sexp::List(items, pos) => {
            if items.len() != 3 || items[0].as_atom() != Some("attr") {
                return err(*pos, "guard operand must be (attr name ?var)");
            }
            let attr = items[1]
                .as_atom()
                .ok_or_else(|| RuleError {
                    pos: items[1].pos(),
                    msg: "expected an attribute name".into(),
                })?
                .to_ascii_lowercase();
            if !known_attrs.contains(&attr) {
                return err(items[1].pos(), format!("unknown attribute {attr}"));
            }
            let var = items[2]
                .as_atom()
                .ok_or_else(|| RuleError {
                    pos: items[2].pos(),
                    msg: "expected a variable".into(),
                })?
                .to_ascii_lowercase();
            if !var.starts_with('?') {
                return err(items[2].pos(), format!("attr expects a variable, got {var}"));
            }
            Ok(GuardOperand::Attr { attr, var })
        }
    }
}

fn validate_rule(rule: &ConstraintRule, pos: Pos, domain: &DomainModel) -> Result<(), RuleError> {
    let mut bound: BTreeSet<&str> = rule.params.iter().map(|s| s.as_str()).collect();
    for (v, _) in &rule.exists {
        bound.insert(v);
    }
    for lit in &rule.condition {
        let schema = domain.predicate(&lit.predicate).ok_or_else(|| RuleError {
            pos,
            msg: format!("unknown predicate {}", lit.predicate),
        })?;
        if schema.params.len() != lit.args.len() {
            return err(
                pos,
                format!(
                    "predicate {} takes {} arguments, got {}",
                    lit.predicate,
                    schema.params.len(),
                    lit.args.len()
                ),
            );
        }
        for a in &lit.args {
            if a.starts_with('?') && !bound.contains(a.as_str()) {
                return err(pos, format!("unbound variable {a} in condition"));
            }
        }
    }
    for g in &rule.guards {
        for operand in [&g.lhs, &g.rhs] {
            if let GuardOperand::Attr { var, .. } = operand {
                if !bound.contains(var.as_str()) {
                    return err(pos, format!("unbound variable {var} in guard"));
                }
            }
        }
    }
    Ok(())
}

/// Serializes the declarative rules back to the rule-file grammar.
/// Deterministic; reparses to an equal RuleSet.
pub fn print_rules(rules: &RuleSet) -> String {
    let mut s = String::new();
    for r in &rules.rules {
        let _ = write!(s, "(forbid ({}", r.action);
        for p in &r.params {
            let _ = write!(s, " {p}");
        }
        let _ = write!(s, ")");
        if !r.condition.is_empty() {
            let _ = write!(s, "\n  :when ");
            if r.exists.is_empty() {
                let _ = write!(s, "{}", print_conjunction(&r.condition));
            } else {
                let _ = write!(s, "(exists (");
                for (i, (v, ty)) in r.exists.iter().enumerate() {
                    if i > 0 {
                        let _ = write!(s, " ");
                    }
                    match ty {
                        None => {
                            let _ = write!(s, "{v}");
                        }
                        Some(ty) => {
                            let _ = write!(s, "({v} {ty})");
                        }
                    }
                }
                let _ = write!(s, ") {})", print_conjunction(&r.condition));
            }
        }
        if !r.guards.is_empty() {
            let _ = write!(s, "\n  :guard (and");
            for g in &r.guards {
                let _ = write!(
                    s,
                    " ({} {} {})",
                    g.op.print(),
                    print_operand(&g.lhs),
                    print_operand(&g.rhs)
                );
            }
            let _ = write!(s, ")");
        }
        let _ = writeln!(s, ")");
    }
    s
}

fn print_conjunction(lits: &[ConditionLiteral]) -> String {
    let mut s = "(and".to_string();
    for l in lits {
        s.push(' ');
        if !l.positive {
            s.push_str("(not ");
        }
        let _ = write!(s, "({}", l.predicate);
        for a in &l.args {
            let _ = write!(s, " {a}");
        }
        s.push(')');
        if !l.positive {
            s.push(')');
        }
    }
    s.push(')');
    s
}

fn print_operand(op: &GuardOperand) -> String {
    match op {
        GuardOperand::Attr { attr, var } => format!("(attr {attr} {var})"),
        GuardOperand::Const(c) => c.to_string(),
    }
}

fn eval_operand(
    op: &GuardOperand,
    binding: &HashMap<&str, &str>,
    task: &GroundTask,
) -> Option<i64> {
    match op {
        GuardOperand::Const(c) => Some(*c),
        GuardOperand::Attr { attr, var } => {
            let obj = binding.get(var.as_str())?;
            task.attributes.get(*obj)?.get(attr).copied()
        }
    }
}

/// Inferred candidate objects for one quantified variable: every object
/// whose type fits the explicit binder type and every predicate position
/// the variable occurs in.
fn candidates<'t>(
    var: &str,
    explicit: &Option<String>,
    rule: &ConstraintRule,
    task: &'t GroundTask,
) -> Vec<&'t str> {
    let mut required: Vec<&str> = Vec::new();
    if let Some(ty) = explicit {
        required.push(ty);
    }
    for lit in &rule.condition {
        if let Some(schema) = task.domain.predicate(&lit.predicate) {
            for (arg, (_, ty)) in lit.args.iter().zip(&schema.params) {
                if arg == var {
                    required.push(ty);
                }
            }
        }
    }
    task.objects
        .iter()
        .filter(|(_, oty)| required.iter().all(|req| task.domain.is_subtype(oty, req)))
        .map(|(o, _)| o.as_str())
        .collect()
}

/// Compiles every rule and learned constraint into clauses over the given
/// encoding: one clause per rule, timestep, matching action grounding, and
/// guard-satisfying condition grounding. Pure and deterministic.
pub fn compile(rules: &RuleSet, task: &GroundTask, encoding: &CnfEncoding) -> Vec<Vec<Lit>> {
    let mut clauses = Vec::new();
    for rule in &rules.rules {
        compile_rule(rule, task, encoding, &mut clauses);
    }
    for learned in &rules.learned {
        compile_learned(learned, task, encoding, &mut clauses);
    }
    clauses
}

fn compile_rule(
    rule: &ConstraintRule,
    task: &GroundTask,
    encoding: &CnfEncoding,
    out: &mut Vec<Vec<Lit>>,
) {
    let quantified: Vec<(&str, Vec<&str>)> = rule
        .exists
        .iter()
        .map(|(v, ty)| (v.as_str(), candidates(v, ty, rule, task)))
        .collect();

    for action in &task.actions {
        if action.schema != rule.action {
            continue;
        }
        let mut binding: HashMap<&str, &str> = rule
            .params
            .iter()
            .map(|v| v.as_str())
            .zip(action.args.iter().map(|a| a.as_str()))
            .collect();

        // enumerate quantified-variable bindings
        let mut stack: Vec<usize> = vec![0; quantified.len()];
        'tuples: loop {
            for (k, (var, cands)) in quantified.iter().enumerate() {
                binding.insert(var, cands[stack[k]]);
            }
            emit_if_guarded(rule, task, encoding, action.index, &binding, out);

            // next tuple (odometer); empty quantifier list means one tuple
            if quantified.is_empty() {
                break 'tuples;
            }
            let mut k = quantified.len();
            loop {
                if k == 0 {
                    break 'tuples;
                }
                k -= 1;
                stack[k] += 1;
                if stack[k] < quantified[k].1.len() {
                    break;
                }
                stack[k] = 0;
            }
        }
    }
}

fn emit_if_guarded(
    rule: &ConstraintRule,
    task: &GroundTask,
    encoding: &CnfEncoding,
    action_index: usize,
    binding: &HashMap<&str, &str>,
    out: &mut Vec<Vec<Lit>>,
) {
    for g in &rule.guards {
        let (Some(lhs), Some(rhs)) = (
            eval_operand(&g.lhs, binding, task),
            eval_operand(&g.rhs, binding, task),
        ) else {
            return; // missing attribute: guard cannot hold
        };
        if !g.op.eval(lhs, rhs) {
            return;
        }
    }

    // condition literals, negated into the clause
    let mut condition_lits = Vec::with_capacity(rule.condition.len());
    for lit in &rule.condition {
        let atom = Atom {
            predicate: lit.predicate.clone(),
            args: lit
                .args
                .iter()
                .map(|a| {
                    if a.starts_with('?') {
                        binding[a.as_str()].to_string()
                    } else {
                        a.clone()
                    }
                })
                .collect(),
        };
        match task.atom_index(&atom) {
            Some(idx) => condition_lits.push((idx, lit.positive)),
            None if lit.positive => return, // atom never true: condition cannot hold
            None => {}                      // negative literal over absent atom: always true
        }
    }

    for t in 0..encoding.horizon {
        let mut clause = Vec::with_capacity(1 + condition_lits.len());
        clause.push(Lit::new(encoding.action_var(action_index, t), false));
        for &(atom_idx, positive) in &condition_lits {
            clause.push(Lit::new(encoding.atom_var(atom_idx, t), !positive));
        }
        out.push(clause);
    }
}

fn compile_learned(
    learned: &LearnedConstraint,
    task: &GroundTask,
    encoding: &CnfEncoding,
    out: &mut Vec<Vec<Lit>>,
) {
    let Some(action_index) = task.action_index(&learned.action_schema, &learned.action_args)
    else {
        return; // grounding absent in this instance
    };
    let mut condition_lits = Vec::new();
    for (pred, args, polarity) in &learned.culprit {
        let atom = Atom {
            predicate: pred.clone(),
            args: args.clone(),
        };
        match task.atom_index(&atom) {
            Some(idx) => condition_lits.push((idx, *polarity)),
            None if *polarity => return,
            None => {}
        }
    }
    let steps: Vec<usize> = match learned.only_at_step {
        Some(t) if t < encoding.horizon => vec![t],
        Some(_) => vec![],
        None => (0..encoding.horizon).collect(),
    };
    for t in steps {
        let mut clause = Vec::with_capacity(1 + condition_lits.len());
        clause.push(Lit::new(encoding.action_var(action_index, t), false));
        for &(atom_idx, positive) in &condition_lits {
            clause.push(Lit::new(encoding.atom_var(atom_idx, t), !positive));
        }
        out.push(clause);
    }
}

/// Generalizes a refinement failure into a learned constraint. An empty
/// culprit set falls back to blocking the exact action at the exact step.
pub fn learn_from_failure(report: &RefinementReport, task: &GroundTask) -> LearnedConstraint {
    let action_index = report
        .failing_action
        .expect("learn_from_failure requires an infeasible report");
    let action = &task.actions[action_index];
    let culprit: Vec<(String, Vec<String>, bool)> = report
        .culprit
        .iter()
        .map(|&(atom_idx, polarity)| {
            let a = &task.atoms[atom_idx];
            (a.predicate.clone(), a.args.clone(), polarity)
        })
        .collect();
    let only_at_step = if culprit.is_empty() {
        Some(report.failing_step.expect("infeasible report carries a step"))
    } else {
        None
    };
    LearnedConstraint {
        action_schema: action.schema.clone(),
        action_args: action.args.clone(),
        culprit,
        only_at_step,
    }
}

/// Persists learned constraints to a `.learned` sidecar (JSON lines would do
/// as well; a single JSON array keeps it diffable).
pub fn save_learned(learned: &[LearnedConstraint]) -> String {
    serde_json::to_string_pretty(learned).expect("learned constraints serialize")
}

pub fn load_learned(text: &str) -> Result<Vec<LearnedConstraint>, serde_json::Error> {
    serde_json::from_str(text)
}
