//! Instantiates a lifted domain over a problem's objects into dense-indexed
//! ground atoms and actions. Everything downstream speaks indices.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::pddl::{Atom, DomainModel, ProblemModel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
    pub index: usize,
}

impl GroundAtom {
    pub fn name(&self) -> String {
        let mut s = format!("({}", self.predicate);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }

    pub fn as_atom(&self) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self.args.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<usize>,
    pub pre_neg: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub index: usize,
}

impl GroundAction {
    pub fn name(&self) -> String {
        let mut s = self.schema.clone();
        s.push('(');
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(a);
        }
        s.push(')');
        s
    }
}

/// Fixed-width bitset over atom indices; the state representation used by
/// the validator and search.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitState {
    words: Vec<u64>,
    len: usize,
}

impl BitState {
    pub fn new(len: usize) -> Self {
        BitState {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn holds(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn iter_true(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.holds(i))
    }
}

#[derive(Debug, Clone)]
pub struct GroundTask {
    /// Lifted model the task was grounded from; kept for name resolution in
    /// constraint compilation and debug dumps.
    pub domain: DomainModel,
    pub objects: Vec<(String, String)>,
    pub atoms: Vec<GroundAtom>,
    pub actions: Vec<GroundAction>,
    pub init: BitState,
    pub goal_pos: Vec<usize>,
    pub goal_neg: Vec<usize>,
    pub attributes: crate::pddl::AttributeMap,
    atom_lookup: HashMap<Atom, usize>,
}

impl GroundTask {
    pub fn atom_index(&self, atom: &Atom) -> Option<usize> {
        self.atom_lookup.get(atom).copied()
    }

    pub fn action_index(&self, schema: &str, args: &[String]) -> Option<usize> {
        self.actions
            .iter()
            .find(|a| a.schema == schema && a.args == args)
            .map(|a| a.index)
    }

    /// Objects whose declared type is `ty` or a descendant, in declaration order.
    pub fn objects_of_type(&self, ty: &str) -> Vec<&str> {
        self.objects
            .iter()
            .filter(|(_, t)| self.domain.is_subtype(t, ty))
            .map(|(o, _)| o.as_str())
            .collect()
    }

    pub fn initial_state(&self) -> BitState {
        self.init.clone()
    }

    pub fn applicable(&self, state: &BitState, action: &GroundAction) -> bool {
        action.pre_pos.iter().all(|&i| state.holds(i))
            && action.pre_neg.iter().all(|&i| !state.holds(i))
    }

    /// Applies add/delete semantics; caller is responsible for checking
    /// applicability first.
    pub fn apply(&self, state: &BitState, action: &GroundAction) -> BitState {
        let mut next = state.clone();
        for &i in &action.del {
            next.set(i, false);
        }
        for &i in &action.add {
            next.set(i, true);
        }
        next
    }

    pub fn goal_satisfied(&self, state: &BitState) -> bool {
        self.goal_pos.iter().all(|&i| state.holds(i))
            && self.goal_neg.iter().all(|&i| !state.holds(i))
    }
}

/// Enumerates the cartesian product of typed candidate lists in declaration
/// order, yielding each tuple to `f`.
fn for_each_tuple(candidates: &[Vec<&str>], f: &mut impl FnMut(&[&str])) {
    fn rec<'a>(
        candidates: &[Vec<&'a str>],
        tuple: &mut Vec<&'a str>,
        f: &mut impl FnMut(&[&'a str]),
    ) {
        if tuple.len() == candidates.len() {
            f(tuple);
            return;
        }
        for &obj in &candidates[tuple.len()] {
            tuple.push(obj);
            rec(candidates, tuple, f);
            tuple.pop();
        }
    }
    rec(candidates, &mut Vec::new(), f);
}

pub fn ground(domain: &DomainModel, problem: &ProblemModel) -> GroundTask {
    let objects_of = |ty: &str| -> Vec<&str> {
        problem
            .objects
            .iter()
            .filter(|(_, t)| domain.is_subtype(t, ty))
            .map(|(o, _)| o.as_str())
            .collect()
    };

    // Atom universe: every type-consistent instantiation of every predicate,
    // in declaration order.
    let mut atoms = Vec::new();
    let mut atom_lookup = HashMap::new();
    for pred in &domain.predicates {
        let candidates: Vec<Vec<&str>> =
            pred.params.iter().map(|(_, t)| objects_of(t)).collect();
        for_each_tuple(&candidates, &mut |tuple| {
            let index = atoms.len();
            let ga = GroundAtom {
                predicate: pred.name.clone(),
                args: tuple.iter().map(|s| s.to_string()).collect(),
                index,
            };
            atom_lookup.insert(ga.as_atom(), index);
            atoms.push(ga);
        });
    }

    let mut actions = Vec::new();
    for schema in &domain.actions {
        let candidates: Vec<Vec<&str>> =
            schema.params.iter().map(|(_, t)| objects_of(t)).collect();
        for_each_tuple(&candidates, &mut |tuple| {
            let binding: HashMap<&str, &str> = schema
                .params
                .iter()
                .map(|(v, _)| v.as_str())
                .zip(tuple.iter().copied())
                .collect();
            let resolve = |sa: &crate::pddl::SchemaAtom| -> usize {
                let atom = Atom {
                    predicate: sa.predicate.clone(),
                    args: sa.args.iter().map(|v| binding[v.as_str()].to_string()).collect(),
                };
                *atom_lookup
                    .get(&atom)
                    .unwrap_or_else(|| panic!("grounding produced unknown atom {atom}"))
            };
            let mut pre_pos = Vec::new();
            let mut pre_neg = Vec::new();
            for lit in &schema.precondition {
                let idx = resolve(&lit.atom);
                if lit.positive {
                    pre_pos.push(idx);
                } else {
                    pre_neg.push(idx);
                }
            }
            let add: Vec<usize> = schema.add.iter().map(&resolve).collect();
            let del: Vec<usize> = schema.del.iter().map(&resolve).collect();
            let index = actions.len();
            actions.push(GroundAction {
                schema: schema.name.clone(),
                args: tuple.iter().map(|s| s.to_string()).collect(),
                pre_pos,
                pre_neg,
                add,
                del,
                index,
            });
        });
    }

    let mut init = BitState::new(atoms.len());
    for atom in &problem.init {
        if let Some(&i) = atom_lookup.get(atom) {
            init.set(i, true);
        }
    }

    let mut goal_pos = Vec::new();
    let mut goal_neg = Vec::new();
    for lit in &problem.goal {
        let i = *atom_lookup
            .get(&lit.atom)
            .unwrap_or_else(|| panic!("goal references unknown atom {}", lit.atom));
        if lit.positive {
            goal_pos.push(i);
        } else {
            goal_neg.push(i);
        }
    }

    GroundTask {
        domain: domain.clone(),
        objects: problem.objects.clone(),
        atoms,
        actions,
        init,
        goal_pos,
        goal_neg,
        attributes: problem.attributes.clone(),
        atom_lookup,
    }
}

/// Delete-relaxed reachability pruning. Atoms outside the relaxed reachable
/// set can never become true, so actions positively requiring them are
/// dropped; negative literals over pruned atoms are vacuously satisfied.
/// Unreachable goal atoms are kept so the encoder still reports
/// unsatisfiability rather than losing the goal reference.
pub fn reachable_prune(task: &GroundTask) -> GroundTask {
    let n = task.atoms.len();
    let mut reached: Vec<bool> = (0..n).map(|i| task.init.holds(i)).collect();
    let mut action_done = vec![false; task.actions.len()];
    loop {
        let mut changed = false;
        for action in &task.actions {
            if action_done[action.index] {
                continue;
            }
            if action.pre_pos.iter().all(|&i| reached[i]) {
                action_done[action.index] = true;
                for &i in &action.add {
                    reached[i] = true;
                }
                // a newly applicable action is progress even without new atoms
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut keep = reached.clone();
    for &i in task.goal_pos.iter().chain(&task.goal_neg) {
        keep[i] = true;
    }

    let mut remap = vec![usize::MAX; n];
    let mut atoms = Vec::new();
    let mut atom_lookup = HashMap::new();
    for old in &task.atoms {
        if keep[old.index] {
            let index = atoms.len();
            remap[old.index] = index;
            let ga = GroundAtom {
                predicate: old.predicate.clone(),
                args: old.args.clone(),
                index,
            };
            atom_lookup.insert(ga.as_atom(), index);
            atoms.push(ga);
        }
    }

    let mut actions = Vec::new();
    for old in &task.actions {
        if !action_done[old.index] {
            continue;
        }
        let index = actions.len();
        actions.push(GroundAction {
            schema: old.schema.clone(),
            args: old.args.clone(),
            pre_pos: old.pre_pos.iter().map(|&i| remap[i]).collect(),
            // pruned atoms are always false: negative literal vacuously true
            pre_neg: old
                .pre_neg
                .iter()
                .filter(|&&i| keep[i])
                .map(|&i| remap[i])
                .collect(),
            add: old.add.iter().map(|&i| remap[i]).collect(),
            del: old.del.iter().filter(|&&i| keep[i]).map(|&i| remap[i]).collect(),
            index,
        });
    }

    let mut init = BitState::new(atoms.len());
    for i in 0..n {
        if task.init.holds(i) && keep[i] {
            init.set(remap[i], true);
        }
    }

    GroundTask {
        domain: task.domain.clone(),
        objects: task.objects.clone(),
        atoms,
        actions,
        init,
        goal_pos: task.goal_pos.iter().map(|&i| remap[i]).collect(),
        goal_neg: task.goal_neg.iter().map(|&i| remap[i]).collect(),
        attributes: task.attributes.clone(),
        atom_lookup,
    }
}

/// Text listing of the grounding for `--dump-ground` diffing.
pub fn dump(task: &GroundTask) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "atoms: {}", task.atoms.len());
    for a in &task.atoms {
        let init = if task.init.holds(a.index) { " [init]" } else { "" };
        let _ = writeln!(s, "{}: {}{}", a.index, a.name(), init);
    }
    let _ = writeln!(s, "actions: {}", task.actions.len());
    for o in &task.actions {
        let fmt_lits = |pos: &[usize], neg: &[usize]| {
            let mut parts: Vec<String> = pos.iter().map(|&i| task.atoms[i].name()).collect();
            parts.extend(neg.iter().map(|&i| format!("(not {})", task.atoms[i].name())));
            parts.join(" ")
        };
        let _ = writeln!(
            s,
            "{}: {} (pre {} | add {} | del {})",
            o.index,
            o.name(),
            fmt_lits(&o.pre_pos, &o.pre_neg),
            fmt_lits(&o.add, &[]),
            fmt_lits(&o.del, &[]),
        );
    }
    let _ = writeln!(s, "goal: {}", {
        let mut parts: Vec<String> = task.goal_pos.iter().map(|&i| task.atoms[i].name()).collect();
        parts.extend(task.goal_neg.iter().map(|&i| format!("(not {})", task.atoms[i].name())));
        parts.join(" ")
    });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_problem};

    fn blocks_1() -> (DomainModel, ProblemModel) {
        let d = parse_domain(crate::fixtures::BLOCKS_DOMAIN).unwrap();
        let p = parse_problem(crate::fixtures::BLOCKS_PROBLEM_1, &d).unwrap();
        (d, p)
    }

    #[test]
    fn blocks_pick_count() {
        let (d, p) = blocks_1();
        let task = ground(&d, &p);
        let picks = task.actions.iter().filter(|a| a.schema == "pick").count();
        // 1 block x 9 tiles
        assert_eq!(picks, 9);
    }

    #[test]
    fn zero_action_domain() {
        let d = parse_domain("(define (domain d) (:predicates (p)))").unwrap();
        let p = parse_problem("(define (problem q) (:domain d) (:init) (:goal (and)))", &d).unwrap();
        let task = ground(&d, &p);
        assert!(task.actions.is_empty());
        assert_eq!(task.atoms.len(), 1);
    }

    #[test]
    fn grounding_deterministic() {
        let (d, p) = blocks_1();
        let a = ground(&d, &p);
        let b = ground(&d, &p);
        assert_eq!(a.atoms, b.atoms);
        assert_eq!(a.actions, b.actions);
    }

    #[test]
    fn prune_fixpoint_on_reachable_task() {
        let (d, p) = blocks_1();
        let task = ground(&d, &p);
        let pruned = reachable_prune(&task);
        // every atom in the 1-block task is relaxed-reachable
        assert_eq!(pruned.atoms.len(), task.atoms.len());
        assert_eq!(pruned.actions.len(), task.actions.len());
        assert_eq!(pruned.atoms, task.atoms);
    }

    #[test]
    fn prune_keeps_unreachable_goal_atom() {
        let d = parse_domain(
            r#"
(define (domain d)
  (:predicates (p) (q))
  (:action a :parameters () :precondition (q) :effect (p)))
"#,
        )
        .unwrap();
        let p = parse_problem(
            "(define (problem x) (:domain d) (:init) (:goal (p)))",
            &d,
        )
        .unwrap();
        let task = ground(&d, &p);
        let pruned = reachable_prune(&task);
        // action requires unreachable q; goal atom p must survive pruning
        assert!(pruned.actions.is_empty());
        assert_eq!(pruned.goal_pos.len(), 1);
        assert_eq!(pruned.atoms[pruned.goal_pos[0]].predicate, "p");
    }

    #[test]
    fn bitstate_roundtrip() {
        let mut s = BitState::new(130);
        s.set(0, true);
        s.set(64, true);
        s.set(129, true);
        assert!(s.holds(0) && s.holds(64) && s.holds(129));
        assert!(!s.holds(63));
        s.set(64, false);
        assert!(!s.holds(64));
        assert_eq!(s.iter_true().collect::<Vec<_>>(), vec![0, 129]);
    }
}
