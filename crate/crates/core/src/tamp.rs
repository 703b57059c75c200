//! The plan-first loop: task-plan under the active constraints, refine the
//! plan geometrically, and on failure either give up (a-priori mode) or
//! learn a constraint from the failure and replan.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use crate::constraints::{self, RuleSet};
use crate::grounding::GroundTask;
use crate::refine;
use crate::sat::Budget;
use crate::satplan::{self, Plan, PlanOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Authored declarative rules only; no learning. A refinement failure
    /// fails the instance, since replanning would reproduce the same plan.
    Apriori,
    /// No authored rules; constraints are learned from refinement failures.
    FailureDriven,
    /// Authored rules plus learning for whatever they miss.
    Combined,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Apriori => "apriori",
            Mode::FailureDriven => "failure-driven",
            Mode::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Some(match s {
            "apriori" => Mode::Apriori,
            "failure-driven" => Mode::FailureDriven,
            "combined" => Mode::Combined,
            _ => return None,
        })
    }

    pub fn learns(self) -> bool {
        !matches!(self, Mode::Apriori)
    }
}

#[derive(Debug, Clone)]
pub struct TampConfig {
    pub mode: Mode,
    pub max_horizon: usize,
    pub max_refinement_failures: usize,
    pub wall_clock_limit: Duration,
    pub step_budget: Budget,
}

impl TampConfig {
    pub fn new(mode: Mode) -> Self {
        TampConfig {
            mode,
            max_horizon: 30,
            max_refinement_failures: 40,
            wall_clock_limit: Duration::from_secs(3600),
            step_budget: Budget::Unlimited,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrialOutcome {
    Success(Plan),
    UnsolvableWithinHorizon,
    RefinementFailureCap,
    BudgetExceeded,
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct TrialMetrics {
    pub instance_id: String,
    pub n_objects: usize,
    pub n_goals: usize,
    pub mode: Mode,
    /// Cumulative SAT planning time across all replans; refinement and
    /// learning time are excluded by construction.
    pub task_planning_time: Duration,
    pub refinement_failures: usize,
    pub success: bool,
    pub plan_length: Option<usize>,
    pub horizon: Option<usize>,
}

/// Identity and size columns for reporting; the caller decides what counts
/// as an "object" for its domain (blocks on the grid, goals in a request).
#[derive(Debug, Clone)]
pub struct InstanceMeta {
    pub id: String,
    pub n_objects: usize,
    pub n_goals: usize,
}

/// Runs the loop on one instance. `rules` carries the active constraints in
/// and any newly learned constraints out, so a suite can thread experience
/// across instances.
pub fn solve_instance(
    task: &GroundTask,
    meta: &InstanceMeta,
    rules: &mut RuleSet,
    config: &TampConfig,
) -> (TrialOutcome, TrialMetrics) {
    let started = Instant::now();
    let mut planning_time = Duration::ZERO;
    let mut failures = 0usize;
    let mut seen_plans: HashSet<Vec<usize>> = HashSet::new();
    let mut solved_horizon: Option<usize> = None;

    let outcome = loop {
        let result = satplan::plan(task, rules, config.max_horizon, config.step_budget);
        planning_time += result.solve_time;
        if result.horizon.is_some() {
            solved_horizon = result.horizon;
        }
        let plan = match result.outcome {
            PlanOutcome::Solved(p) => p,
            PlanOutcome::UnsolvableWithin(_) => break TrialOutcome::UnsolvableWithinHorizon,
            PlanOutcome::BudgetExceeded { .. } => break TrialOutcome::BudgetExceeded,
        };
        assert!(
            seen_plans.insert(plan.steps.clone()),
            "learned constraint failed to rule out the rejected plan"
        );

        let report = refine::refine_plan(task, &plan.steps)
            .expect("benchmark domains have geometric models");
        if report.feasible {
            break TrialOutcome::Success(plan);
        }
        failures += 1;
        if !config.mode.learns() {
            break TrialOutcome::RefinementFailureCap;
        }
        if failures >= config.max_refinement_failures {
            break TrialOutcome::RefinementFailureCap;
        }
        if started.elapsed() >= config.wall_clock_limit {
            break TrialOutcome::TimedOut;
        }
        rules
            .learned
            .push(constraints::learn_from_failure(&report, task));
    };

    let (success, plan_length, horizon) = match &outcome {
        TrialOutcome::Success(p) => (true, Some(p.steps.len()), solved_horizon),
        _ => (false, None, None),
    };
    let metrics = TrialMetrics {
        instance_id: meta.id.clone(),
        n_objects: meta.n_objects,
        n_goals: meta.n_goals,
        mode: config.mode,
        task_planning_time: planning_time,
        refinement_failures: failures,
        success,
        plan_length,
        horizon,
    };
    (outcome, metrics)
}

/// Runs a suite sequentially in the given order, threading the rule set
/// (and thus learned constraints) from one instance to the next.
pub fn run_suite(
    instances: &[(InstanceMeta, GroundTask)],
    rules: &mut RuleSet,
    config: &TampConfig,
) -> Vec<TrialMetrics> {
    instances
        .iter()
        .map(|(meta, task)| solve_instance(task, meta, rules, config).1)
        .collect()
}

/// Serializes trial metrics as CSV, one row per trial.
pub fn metrics_to_csv(metrics: &[TrialMetrics]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance-id",
        "n-objects",
        "n-goals",
        "mode",
        "task-planning-time-s",
        "refinement-failures",
        "success",
        "plan-length",
        "horizon",
    ])
    .expect("csv header");
    for m in metrics {
        w.write_record([
            m.instance_id.clone(),
            m.n_objects.to_string(),
            m.n_goals.to_string(),
            m.mode.as_str().to_string(),
            format!("{:.6}", m.task_planning_time.as_secs_f64()),
            m.refinement_failures.to_string(),
            m.success.to_string(),
            m.plan_length.map_or(String::new(), |l| l.to_string()),
            m.horizon.map_or(String::new(), |h| h.to_string()),
        ])
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv is utf-8")
}

/// Parses metrics back from the CSV produced by [`metrics_to_csv`].
pub fn metrics_from_csv(text: &str) -> Result<Vec<TrialMetrics>, csv::Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in r.records() {
        let rec = record?;
        let parse_opt = |s: &str| -> Option<usize> { s.parse().ok() };
        out.push(TrialMetrics {
            instance_id: rec[0].to_string(),
            n_objects: rec[1].parse().unwrap_or(0),
            n_goals: rec[2].parse().unwrap_or(0),
            mode: Mode::parse(&rec[3]).unwrap_or(Mode::Apriori),
            task_planning_time: Duration::from_secs_f64(rec[4].parse().unwrap_or(0.0)),
            refinement_failures: rec[5].parse().unwrap_or(0),
            success: &rec[6] == "true",
            plan_length: parse_opt(&rec[7]),
            horizon: parse_opt(&rec[8]),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::ground;
    use crate::pddl::{parse_domain, parse_problem};

    fn blocks_2() -> GroundTask {
        let d = parse_domain(crate::fixtures::BLOCKS_DOMAIN).unwrap();
        let p = parse_problem(crate::fixtures::BLOCKS_PROBLEM_2, &d).unwrap();
        ground(&d, &p)
    }

    fn meta(id: &str) -> InstanceMeta {
        InstanceMeta {
            id: id.into(),
            n_objects: 2,
            n_goals: 1,
        }
    }

    fn corridor_rules(task: &GroundTask) -> RuleSet {
        let attrs = ["row".to_string(), "col".to_string()].into_iter().collect();
        constraints::parse_rules(
            crate::fixtures::BLOCKS_CORRIDOR_RULES,
            &task.domain,
            &attrs,
        )
        .unwrap()
    }

    #[test]
    fn apriori_solves_blocks_2_without_failures() {
        let task = blocks_2();
        let mut rules = corridor_rules(&task);
        let config = TampConfig::new(Mode::Apriori);
        let (outcome, m) = solve_instance(&task, &meta("blocks-2"), &mut rules, &config);
        assert!(matches!(outcome, TrialOutcome::Success(_)));
        assert_eq!(m.refinement_failures, 0);
        assert!(rules.learned.is_empty());
    }

    #[test]
    fn failure_driven_learns_and_then_solves() {
        let task = blocks_2();
        let mut rules = RuleSet::default();
        let config = TampConfig::new(Mode::FailureDriven);
        let (outcome, m) = solve_instance(&task, &meta("blocks-2"), &mut rules, &config);
        let TrialOutcome::Success(plan) = outcome else {
            panic!("failure-driven must eventually succeed");
        };
        assert!(
            refine::refine_plan(&task, &plan.steps).unwrap().feasible,
            "returned plan must be geometrically feasible"
        );
        // learned exactly as many constraints as failures observed
        assert_eq!(rules.learned.len(), m.refinement_failures);
    }

    #[test]
    fn apriori_without_rules_fails_on_infeasible_plan() {
        // containers: inserting without rules always tries through the lid
        let d = parse_domain(crate::fixtures::CONTAINERS_DOMAIN).unwrap();
        let p = parse_problem(crate::fixtures::CONTAINERS_PROBLEM_GOAL1, &d).unwrap();
        let task = ground(&d, &p);
        let mut rules = RuleSet::default();
        let config = TampConfig::new(Mode::Apriori);
        let (outcome, m) = solve_instance(&task, &meta("containers-goal1"), &mut rules, &config);
        assert_eq!(outcome, TrialOutcome::RefinementFailureCap);
        assert_eq!(m.refinement_failures, 1);
        assert!(!m.success);
    }

    #[test]
    fn suite_threads_learning_across_instances() {
        let task = blocks_2();
        let instances = vec![
            (meta("first"), task.clone()),
            (meta("second"), task.clone()),
        ];
        let mut rules = RuleSet::default();
        let config = TampConfig::new(Mode::FailureDriven);
        let metrics = run_suite(&instances, &mut rules, &config);
        assert!(metrics.iter().all(|m| m.success));
        // the second pass over the identical instance reuses what the first
        // pass learned
        assert!(metrics[1].refinement_failures <= metrics[0].refinement_failures);
    }

    #[test]
    fn csv_roundtrip() {
        let task = blocks_2();
        let mut rules = corridor_rules(&task);
        let config = TampConfig::new(Mode::Apriori);
        let metrics = vec![solve_instance(&task, &meta("blocks-2"), &mut rules, &config).1];
        let csv = metrics_to_csv(&metrics);
        let back = metrics_from_csv(&csv).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].instance_id, "blocks-2");
        assert_eq!(back[0].plan_length, metrics[0].plan_length);
        assert!(back[0].success);
    }
}
