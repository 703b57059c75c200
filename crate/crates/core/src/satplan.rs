//! Sequential SAT encoding of a ground planning task: one propositional
//! variable per atom per timepoint and per action per step, solved at
//! increasing horizons so the first satisfiable horizon yields a shortest
//! plan under the active constraints.

use std::time::{Duration, Instant};

use crate::constraints::{self, RuleSet};
use crate::grounding::{BitState, GroundAction, GroundTask};
use crate::sat::{Budget, Lit, Model, Solver, Status};

/// Schema name of the internal idle action injected before encoding so that
/// satisfiability is monotone in the horizon. Double dashes keep it out of
/// the identifier space the PDDL parser produces.
pub const NOOP_SCHEMA: &str = "--noop";

/// Variable numbering for a task at a fixed horizon. Variables are grouped
/// by timepoint: timepoint `t` holds the `n_atoms` atom variables followed
/// by the `n_actions` action variables of step `t` (the final timepoint has
/// no action block).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnfEncoding {
    pub horizon: usize,
    pub n_atoms: usize,
    pub n_actions: usize,
}

impl CnfEncoding {
    pub fn new(task: &GroundTask, horizon: usize) -> Self {
        CnfEncoding {
            horizon,
            n_atoms: task.atoms.len(),
            n_actions: task.actions.len(),
        }
    }

    pub fn atom_var(&self, atom: usize, t: usize) -> u32 {
        debug_assert!(atom < self.n_atoms && t <= self.horizon);
        (t * (self.n_atoms + self.n_actions) + atom + 1) as u32
    }

    pub fn action_var(&self, action: usize, t: usize) -> u32 {
        debug_assert!(action < self.n_actions && t < self.horizon);
        (t * (self.n_atoms + self.n_actions) + self.n_atoms + action + 1) as u32
    }

    pub fn num_vars(&self) -> usize {
        (self.horizon + 1) * self.n_atoms + self.horizon * self.n_actions
    }
}

/// Builds the full formula for `task` at `encoding.horizon`: initial-state
/// units (closed world), goal units, precondition and effect implications,
/// explanatory frame axioms, exactly-one-action-per-step, plus the
/// pre-compiled constraint clauses in `extra`.
pub fn encode(task: &GroundTask, encoding: &CnfEncoding, extra: &[Vec<Lit>]) -> Solver {
    let h = encoding.horizon;
    let mut solver = Solver::new();
    solver.ensure_var(encoding.num_vars() as u32);

    for a in 0..encoding.n_atoms {
        solver.add_clause(&[Lit::new(encoding.atom_var(a, 0), task.init.holds(a))]);
    }
    for &g in &task.goal_pos {
        solver.add_clause(&[Lit::new(encoding.atom_var(g, h), true)]);
    }
    for &g in &task.goal_neg {
        solver.add_clause(&[Lit::new(encoding.atom_var(g, h), false)]);
    }

    // adders/deleters per atom, for the frame axioms
    let mut adders: Vec<Vec<usize>> = vec![Vec::new(); encoding.n_atoms];
    let mut deleters: Vec<Vec<usize>> = vec![Vec::new(); encoding.n_atoms];
    for action in &task.actions {
        for &a in &action.add {
            adders[a].push(action.index);
        }
        for &d in &action.del {
            deleters[d].push(action.index);
        }
    }

    for t in 0..h {
        for action in &task.actions {
            let act = Lit::new(encoding.action_var(action.index, t), false);
            for &p in &action.pre_pos {
                solver.add_clause(&[act, Lit::new(encoding.atom_var(p, t), true)]);
            }
            for &p in &action.pre_neg {
                solver.add_clause(&[act, Lit::new(encoding.atom_var(p, t), false)]);
            }
            for &a in &action.add {
                solver.add_clause(&[act, Lit::new(encoding.atom_var(a, t + 1), true)]);
            }
            for &d in &action.del {
                solver.add_clause(&[act, Lit::new(encoding.atom_var(d, t + 1), false)]);
            }
        }

        for a in 0..encoding.n_atoms {
            // a false at t and true at t+1 demands an adder; dually for deleters
            let mut became_true = vec![
                Lit::new(encoding.atom_var(a, t), true),
                Lit::new(encoding.atom_var(a, t + 1), false),
            ];
            for &o in &adders[a] {
                became_true.push(Lit::new(encoding.action_var(o, t), true));
            }
            solver.add_clause(&became_true);

            let mut became_false = vec![
                Lit::new(encoding.atom_var(a, t), false),
                Lit::new(encoding.atom_var(a, t + 1), true),
            ];
            for &o in &deleters[a] {
                became_false.push(Lit::new(encoding.action_var(o, t), true));
            }
            solver.add_clause(&became_false);
        }

        // exactly one action per step
        let all: Vec<Lit> = (0..encoding.n_actions)
            .map(|o| Lit::new(encoding.action_var(o, t), true))
            .collect();
        solver.add_clause(&all);
        for i in 0..encoding.n_actions {
            for j in i + 1..encoding.n_actions {
                solver.add_clause(&[all[i].negated(), all[j].negated()]);
            }
        }
    }

    for clause in extra {
        solver.add_clause(clause);
    }
    solver
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    /// Action indices into `GroundTask::actions`, one per step.
    pub steps: Vec<usize>,
}

impl Plan {
    pub fn names(&self, task: &GroundTask) -> Vec<String> {
        self.steps.iter().map(|&i| task.actions[i].name()).collect()
    }
}

/// A model that does not select exactly one action at some step. The
/// exactly-one clauses make this unreachable; hitting it means the encoder
/// and solver disagree and is reported as an internal defect, never repaired.
#[derive(Debug, Clone, thiserror::Error)]
#[error("internal defect: model selects {count} actions at step {step}")]
pub struct DecodeDefect {
    pub step: usize,
    pub count: usize,
}

pub fn decode(
    model: &Model,
    encoding: &CnfEncoding,
    _task: &GroundTask,
) -> Result<Plan, DecodeDefect> {
    let mut steps = Vec::with_capacity(encoding.horizon);
    for t in 0..encoding.horizon {
        let selected: Vec<usize> = (0..encoding.n_actions)
            .filter(|&o| model.value(encoding.action_var(o, t)))
            .collect();
        match selected.as_slice() {
            [one] => steps.push(*one),
            _ => {
                return Err(DecodeDefect {
                    step: t,
                    count: selected.len(),
                })
            }
        }
    }
    Ok(Plan { steps })
}

/// Why a plan fails STRIPS validation.
#[derive(Debug, Clone, thiserror::Error)]
#[error("step {step}: {reason}")]
pub struct Reject {
    pub step: usize,
    pub reason: String,
}

/// Simulates the plan under STRIPS semantics from the initial state and
/// checks every precondition and the final goal. The goal check reports as
/// the step one past the last action.
pub fn validate(plan: &Plan, task: &GroundTask) -> Result<(), Reject> {
    let mut state: BitState = task.initial_state();
    for (step, &idx) in plan.steps.iter().enumerate() {
        let action: &GroundAction = &task.actions[idx];
        if !task.applicable(&state, action) {
            return Err(Reject {
                step,
                reason: format!("precondition of {} does not hold", action.name()),
            });
        }
        state = task.apply(&state, action);
    }
    if !task.goal_satisfied(&state) {
        return Err(Reject {
            step: plan.steps.len(),
            reason: "goal not satisfied in final state".into(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanOutcome {
    Solved(Plan),
    /// Unsatisfiable at every horizon up to and including the bound.
    UnsolvableWithin(usize),
    /// The per-horizon solve budget ran out before a verdict.
    BudgetExceeded { horizon: usize },
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub outcome: PlanOutcome,
    /// Horizon of the returned plan, when solved.
    pub horizon: Option<usize>,
    pub solve_time: Duration,
    pub conflicts: u64,
}

/// Returns a clone of `task` with the idle action appended.
fn with_noop(task: &GroundTask) -> GroundTask {
    let mut augmented = task.clone();
    assert!(
        augmented.actions.iter().all(|a| a.schema != NOOP_SCHEMA),
        "task already contains the internal idle action"
    );
    augmented.actions.push(GroundAction {
        schema: NOOP_SCHEMA.to_string(),
        args: Vec::new(),
        pre_pos: Vec::new(),
        pre_neg: Vec::new(),
        add: Vec::new(),
        del: Vec::new(),
        index: augmented.actions.len(),
    });
    augmented
}

/// Plans by solving horizons 0, 1, 2, ... up to `max_horizon` with a fresh
/// solver per horizon. The idle action is injected before encoding and
/// stripped from the result, so a returned plan's length is the smallest
/// number of real actions reachable under the active constraints.
pub fn plan(
    task: &GroundTask,
    rules: &RuleSet,
    max_horizon: usize,
    step_budget: Budget,
) -> PlanResult {
    let started = Instant::now();
    let augmented = with_noop(task);
    let noop_index = augmented.actions.len() - 1;
    let mut conflicts = 0;

    for h in 0..=max_horizon {
        let encoding = CnfEncoding::new(&augmented, h);
        let extra = constraints::compile(rules, &augmented, &encoding);
        let mut solver = encode(&augmented, &encoding, &extra);
        let result = solver.solve(&[], step_budget);
        conflicts += solver.conflicts;
        match result.status {
            Status::Sat => {
                let model = result.model.expect("sat result carries a model");
                let full = decode(&model, &encoding, &augmented)
                    .expect("exactly-one clauses guarantee a well-formed plan");
                let plan = Plan {
                    steps: full.steps.into_iter().filter(|&s| s != noop_index).collect(),
                };
                validate(&plan, task).expect("decoded plan must validate");
                return PlanResult {
                    outcome: PlanOutcome::Solved(plan),
                    horizon: Some(h),
                    solve_time: started.elapsed(),
                    conflicts,
                };
            }
            Status::Unsat => continue,
            Status::BudgetExceeded => {
                return PlanResult {
                    outcome: PlanOutcome::BudgetExceeded { horizon: h },
                    horizon: None,
                    solve_time: started.elapsed(),
                    conflicts,
                }
            }
        }
    }
    PlanResult {
        outcome: PlanOutcome::UnsolvableWithin(max_horizon),
        horizon: None,
        solve_time: started.elapsed(),
        conflicts,
    }
}

/// DIMACS export of the exact formula `plan` would solve at horizon `h`,
/// including the injected idle action and constraint clauses.
pub fn dump_cnf(task: &GroundTask, rules: &RuleSet, h: usize) -> String {
    let augmented = with_noop(task);
    let encoding = CnfEncoding::new(&augmented, h);
    let extra = constraints::compile(rules, &augmented, &encoding);
    let solver = encode(&augmented, &encoding, &extra);
    solver.to_dimacs()
}
