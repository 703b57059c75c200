//! Incremental propositional SAT backend: add clauses, solve under
//! assumptions, read back a model. Ships an embedded CDCL solver (two
//! watched literals, first-UIP learning, Luby restarts, phase saving)
//! behind the add/assume/solve seam so an external incremental solver can
//! be slotted in later. Solving is deterministic: no randomized branching,
//! no portfolio.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

/// Propositional literal over a positive variable id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    code: u32,
}

impl Lit {
    pub fn new(var: u32, positive: bool) -> Lit {
        assert!(var >= 1, "variables are numbered from 1");
        Lit {
            code: (var - 1) * 2 + u32::from(!positive),
        }
    }

    pub fn pos(var: u32) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: u32) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> u32 {
        self.code / 2 + 1
    }

    pub fn is_positive(self) -> bool {
        self.code & 1 == 0
    }

    pub fn negated(self) -> Lit {
        Lit {
            code: self.code ^ 1,
        }
    }

    fn index(self) -> usize {
        self.code as usize
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl std::fmt::Display for Lit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    BudgetExceeded,
}

/// Total assignment over variables 1..=n, present iff the solve returned sat.
#[derive(Debug, Clone)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn value(&self, var: u32) -> bool {
        self.values[(var - 1) as usize]
    }

    pub fn satisfies(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    pub model: Option<Model>,
}

#[derive(Debug, Clone, Copy)]
pub enum Budget {
    Unlimited,
    Conflicts(u64),
    WallTime(Duration),
}

const UNDEF: u8 = 0;
const TRUE: u8 = 1;
const FALSE: u8 = 2;

type ClauseRef = usize;

struct Clause {
    lits: Vec<Lit>,
}

#[derive(Clone, Copy)]
struct Watch {
    clause: ClauseRef,
    blocker: Lit,
}

/// Max-heap over variable activities with stable, deterministic tie-breaking
/// (lower variable id wins ties).
struct VarOrder {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarOrder {
    fn new() -> Self {
        VarOrder {
            heap: Vec::new(),
            pos: Vec::new(),
        }
    }

    fn grow(&mut self, n_vars: usize) {
        self.pos.resize(n_vars, -1);
    }

    fn better(activity: &[f64], a: u32, b: u32) -> bool {
        let (aa, ab) = (activity[a as usize], activity[b as usize]);
        aa > ab || (aa == ab && a < b)
    }

    fn sift_up(&mut self, activity: &[f64], mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::better(activity, self.heap[i], self.heap[parent]) {
                self.heap.swap(i, parent);
                self.pos[self.heap[i] as usize] = i as i32;
                self.pos[self.heap[parent] as usize] = parent as i32;
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, activity: &[f64], mut i: usize) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && Self::better(activity, self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && Self::better(activity, self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.heap.swap(i, best);
            self.pos[self.heap[i] as usize] = i as i32;
            self.pos[self.heap[best] as usize] = best as i32;
            i = best;
        }
    }

    fn insert(&mut self, activity: &[f64], v: u32) {
        if self.pos[v as usize] >= 0 {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i as i32;
        self.sift_up(activity, i);
    }

    fn pop(&mut self, activity: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        self.pos[top as usize] = -1;
        let last = self.heap.pop().unwrap();
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(activity, 0);
        }
        Some(top)
    }

    fn bumped(&mut self, activity: &[f64], v: u32) {
        let p = self.pos[v as usize];
        if p >= 0 {
            self.sift_up(activity, p as usize);
        }
    }
}

pub struct Solver {
    n_vars: u32,
    clauses: Vec<Clause>,
    /// Clauses exactly as the caller added them; used for DIMACS export and
    /// the pre-return model check.
    added: Vec<Vec<Lit>>,
    watches: Vec<Vec<Watch>>,
    assign: Vec<u8>,
    phase: Vec<bool>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    prop_head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    seen: Vec<bool>,
    /// Set once an empty clause (or a root-level conflict) makes the formula
    /// permanently unsatisfiable.
    unsat: bool,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            n_vars: 0,
            clauses: Vec::new(),
            added: Vec::new(),
            watches: Vec::new(),
            assign: Vec::new(),
            phase: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            prop_head: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            order: VarOrder::new(),
            seen: Vec::new(),
            unsat: false,
            conflicts: 0,
            decisions: 0,
            propagations: 0,
        }
    }

    /// Allocates and returns the next variable id (1, 2, 3, ...).
    pub fn new_var(&mut self) -> u32 {
        self.n_vars += 1;
        self.assign.push(UNDEF);
        self.phase.push(false);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.grow(self.n_vars as usize);
        self.order.insert(&self.activity, self.n_vars - 1);
        self.n_vars
    }

    /// Allocates variables until `var` exists.
    pub fn ensure_var(&mut self, var: u32) {
        while self.n_vars < var {
            self.new_var();
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.added.len()
    }

    fn value(&self, lit: Lit) -> u8 {
        let v = self.assign[(lit.var() - 1) as usize];
        if v == UNDEF {
            UNDEF
        } else if (v == TRUE) == lit.is_positive() {
            TRUE
        } else {
            FALSE
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Conjoins a clause to the formula permanently. Adding the empty clause
    /// flags the formula unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        assert_eq!(self.decision_level(), 0, "clauses are added at the root level");
        for l in lits {
            assert!(l.var() <= self.n_vars, "literal over unallocated variable");
        }
        self.added.push(lits.to_vec());
        if self.unsat {
            return;
        }

        // dedup; drop tautologies; drop root-falsified literals (permanent)
        let mut simplified: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            if self.value(l) == TRUE {
                return; // satisfied at root, nothing to attach
            }
            if self.value(l) == FALSE {
                continue;
            }
            if simplified.contains(&l.negated()) {
                return; // tautology
            }
            if !simplified.contains(&l) {
                simplified.push(l);
            }
        }

        match simplified.len() {
            0 => self.unsat = true,
            1 => {
                self.enqueue(simplified[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
            }
            _ => {
                let cref = self.clauses.len();
                let w0 = simplified[0];
                let w1 = simplified[1];
                self.clauses.push(Clause { lits: simplified });
                self.watches[w0.negated().index()].push(Watch {
                    clause: cref,
                    blocker: w1,
                });
                self.watches[w1.negated().index()].push(Watch {
                    clause: cref,
                    blocker: w0,
                });
            }
        }
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        debug_assert_eq!(self.value(lit), UNDEF);
        let v = (lit.var() - 1) as usize;
        self.assign[v] = if lit.is_positive() { TRUE } else { FALSE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.prop_head < self.trail.len() {
            let lit = self.trail[self.prop_head];
            self.prop_head += 1;
            self.propagations += 1;

            let mut i = 0;
            let widx = lit.index();
            'watches: while i < self.watches[widx].len() {
                let watch = self.watches[widx][i];
                if self.value(watch.blocker) == TRUE {
                    i += 1;
                    continue;
                }
                let cref = watch.clause;
                let false_lit = lit.negated();
                {
                    let clause = &mut self.clauses[cref];
                    if clause.lits[0] == false_lit {
                        clause.lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != watch.blocker && self.value(first) == TRUE {
                    self.watches[widx][i].blocker = first;
                    i += 1;
                    continue;
                }
                // look for a new literal to watch
                for k in 2..self.clauses[cref].lits.len() {
                    let cand = self.clauses[cref].lits[k];
                    if self.value(cand) != FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[widx].swap_remove(i);
                        self.watches[cand.negated().index()].push(Watch {
                            clause: cref,
                            blocker: first,
                        });
                        continue 'watches;
                    }
                }
                // unit or conflicting
                if self.value(first) == FALSE {
                    self.prop_head = self.trail.len();
                    return Some(cref);
                }
                self.enqueue(first, Some(cref));
                i += 1;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(&self.activity, v as u32);
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, conflict: ClauseRef) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = Vec::new();
        let mut counter = 0usize;
        let mut trail_at = self.trail.len();
        let mut cref = conflict;
        let mut asserting: Option<Lit> = None;
        let mut first = true;
        let current = self.decision_level();

        loop {
            // for reason clauses, position 0 holds the implied literal itself
            let start = usize::from(!first);
            first = false;
            let lits: Vec<Lit> = self.clauses[cref].lits[start..].to_vec();
            for q in lits {
                let v = (q.var() - 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // walk the trail back to the next marked literal
            loop {
                trail_at -= 1;
                let p = self.trail[trail_at];
                let v = (p.var() - 1) as usize;
                if self.seen[v] {
                    self.seen[v] = false;
                    counter -= 1;
                    if counter == 0 {
                        asserting = Some(p.negated());
                    } else {
                        cref = self.reason[v].expect("non-decision marked literal has a reason");
                    }
                    break;
                }
            }
            if counter == 0 {
                break;
            }
        }

        let asserting = asserting.unwrap();
        let mut clause = vec![asserting];
        clause.extend(learnt.iter().copied());
        for l in &learnt {
            self.seen[(l.var() - 1) as usize] = false;
        }

        let bt_level = clause[1..]
            .iter()
            .map(|l| self.level[(l.var() - 1) as usize])
            .max()
            .unwrap_or(0);
        // move a literal of bt_level into the second watch position
        if clause.len() > 1 {
            let k = clause[1..]
                .iter()
                .position(|l| self.level[(l.var() - 1) as usize] == bt_level)
                .unwrap()
                + 1;
            clause.swap(1, k);
        }
        (clause, bt_level)
    }

    fn cancel_until(&mut self, target: u32) {
        while self.decision_level() > target {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let p = self.trail.pop().unwrap();
                let v = (p.var() - 1) as usize;
                self.phase[v] = self.assign[v] == TRUE;
                self.assign[v] = UNDEF;
                self.reason[v] = None;
                self.order.insert(&self.activity, v as u32);
            }
        }
        self.prop_head = self.trail.len();
    }

    fn attach_learnt(&mut self, clause: Vec<Lit>) -> Option<ClauseRef> {
        if clause.len() == 1 {
            return None;
        }
        let cref = self.clauses.len();
        let w0 = clause[0];
        let w1 = clause[1];
        self.clauses.push(Clause { lits: clause });
        self.watches[w0.negated().index()].push(Watch {
            clause: cref,
            blocker: w1,
        });
        self.watches[w1.negated().index()].push(Watch {
            clause: cref,
            blocker: w0,
        });
        Some(cref)
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assign[v as usize] == UNDEF {
                return Some(Lit::new(v + 1, self.phase[v as usize]));
            }
        }
        None
    }

    /// Solves the current formula under `assumptions` within `budget`.
    /// The formula is unchanged afterward (learnt clauses are implied).
    pub fn solve(&mut self, assumptions: &[Lit], budget: Budget) -> SolveResult {
        let started = Instant::now();
        let conflict_limit = match budget {
            Budget::Conflicts(c) => Some(self.conflicts + c),
            _ => None,
        };
        if self.unsat {
            return SolveResult {
                status: Status::Unsat,
                model: None,
            };
        }
        for a in assumptions {
            assert!(a.var() <= self.n_vars, "assumption over unallocated variable");
        }
        self.seen.resize(self.n_vars as usize, false);

        if self.propagate().is_some() {
            self.unsat = true;
            return SolveResult {
                status: Status::Unsat,
                model: None,
            };
        }

        let mut restart_count = 0u64;
        let mut restart_budget = 100 * luby(restart_count);
        let mut conflicts_since_restart = 0u64;

        let result = 'search: loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    break 'search Status::Unsat;
                }
                let (clause, bt) = self.analyze(conflict);
                self.cancel_until(bt);
                let asserting = clause[0];
                if clause.len() == 1 {
                    self.cancel_until(0);
                    if self.value(asserting) == FALSE {
                        self.unsat = true;
                        break 'search Status::Unsat;
                    }
                    if self.value(asserting) == UNDEF {
                        self.enqueue(asserting, None);
                    }
                } else {
                    let cref = self.attach_learnt(clause).unwrap();
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= 0.95;

                if let Some(limit) = conflict_limit {
                    if self.conflicts >= limit {
                        break 'search Status::BudgetExceeded;
                    }
                }
                if let Budget::WallTime(limit) = budget {
                    if started.elapsed() > limit {
                        break 'search Status::BudgetExceeded;
                    }
                }
                if conflicts_since_restart >= restart_budget {
                    restart_count += 1;
                    restart_budget = 100 * luby(restart_count);
                    conflicts_since_restart = 0;
                    let keep = (assumptions.len() as u32).min(self.decision_level());
                    self.cancel_until(keep);
                }
            } else {
                // place pending assumptions first
                if (self.decision_level() as usize) < assumptions.len() {
                    let a = assumptions[self.decision_level() as usize];
                    match self.value(a) {
                        TRUE => {
                            self.trail_lim.push(self.trail.len());
                            continue;
                        }
                        FALSE => break 'search Status::Unsat,
                        _ => {
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(a, None);
                            continue;
                        }
                    }
                }
                match self.pick_branch() {
                    None => break 'search Status::Sat,
                    Some(lit) => {
                        self.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(lit, None);
                    }
                }
            }
        };

        let model = if result == Status::Sat {
            let values: Vec<bool> = self.assign.iter().map(|&v| v == TRUE).collect();
            let model = Model { values };
            assert!(
                self.check_model(&model),
                "internal defect: sat model violates an added clause"
            );
            Some(model)
        } else {
            None
        };
        self.cancel_until(0);
        SolveResult {
            status: result,
            model,
        }
    }

    /// True iff `model` satisfies every clause ever added.
    pub fn check_model(&self, model: &Model) -> bool {
        self.added
            .iter()
            .all(|c| c.iter().any(|&l| model.satisfies(l)))
    }

    /// DIMACS CNF export of the formula exactly as added.
    pub fn to_dimacs(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "p cnf {} {}", self.n_vars, self.added.len());
        for clause in &self.added {
            for l in clause {
                let _ = write!(s, "{} ", l.to_dimacs());
            }
            let _ = writeln!(s, "0");
        }
        s
    }
}

fn luby(i0: u64) -> u64 {
    // sequence 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    let mut i = i0 + 1;
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}
