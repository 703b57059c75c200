//! Semantic properties of compiled constraint rules, checked against
//! exhaustive plan enumeration on small instances:
//!
//! * soundness — every plan the planner returns under the corridor rules is
//!   geometrically feasible per the independent simulator;
//! * completeness — no geometrically feasible valid plan is excluded by the
//!   compiled clauses.

mod util;

use tampkit::constraints::{parse_rules, RuleSet};
use tampkit::sat::Budget;
use tampkit::satplan::{plan, PlanOutcome};

fn corridor_rules(task: &tampkit::grounding::GroundTask) -> RuleSet {
    parse_rules(
        tampkit::fixtures::BLOCKS_CORRIDOR_RULES,
        &task.domain,
        &util::rowcol_attrs(),
    )
    .unwrap()
}

#[test]
fn compiled_rules_never_exclude_a_feasible_plan() {
    let task = util::ground_fixture(
        tampkit::fixtures::BLOCKS_DOMAIN,
        tampkit::fixtures::BLOCKS_PROBLEM_2,
    );
    let rules = corridor_rules(&task);
    let mut total = 0;
    let mut feasible = 0;
    util::for_each_valid_plan(&task, 5, &mut |steps| {
        total += 1;
        if util::simulate_with_geometry(&task, steps).is_ok() {
            feasible += 1;
            assert!(
                util::plan_satisfies_rules(&task, &rules, steps),
                "feasible plan excluded: {:?}",
                steps
                    .iter()
                    .map(|&i| task.actions[i].name())
                    .collect::<Vec<_>>()
            );
        }
    });
    assert!(total > feasible, "enumeration must cover infeasible plans too");
    assert!(feasible > 0, "enumeration must cover feasible plans");
}

#[test]
fn plans_admitted_by_rules_are_geometrically_feasible() {
    // the converse direction on the same instance: a valid plan accepted by
    // the compiled clauses passes the independent simulator
    let task = util::ground_fixture(
        tampkit::fixtures::BLOCKS_DOMAIN,
        tampkit::fixtures::BLOCKS_PROBLEM_2,
    );
    let rules = corridor_rules(&task);
    let mut admitted = 0;
    util::for_each_valid_plan(&task, 5, &mut |steps| {
        if util::plan_satisfies_rules(&task, &rules, steps) {
            admitted += 1;
            assert!(
                util::simulate_with_geometry(&task, steps).is_ok(),
                "rules admitted an infeasible plan: {:?}",
                steps
                    .iter()
                    .map(|&i| task.actions[i].name())
                    .collect::<Vec<_>>()
            );
        }
    });
    assert!(admitted > 0);
}

#[test]
fn lid_rule_is_sound_and_complete_on_single_goal_instance() {
    let task = util::ground_fixture(
        tampkit::fixtures::CONTAINERS_DOMAIN,
        tampkit::fixtures::CONTAINERS_PROBLEM_GOAL1,
    );
    let rules = parse_rules(
        tampkit::fixtures::CONTAINERS_LID_RULES,
        &task.domain,
        &Default::default(),
    )
    .unwrap();
    let mut agree = 0;
    util::for_each_valid_plan(&task, 4, &mut |steps| {
        let admitted = util::plan_satisfies_rules(&task, &rules, steps);
        let feasible = util::simulate_with_geometry(&task, steps).is_ok();
        assert_eq!(
            admitted,
            feasible,
            "divergence on {:?}",
            steps
                .iter()
                .map(|&i| task.actions[i].name())
                .collect::<Vec<_>>()
        );
        agree += 1;
    });
    assert!(agree > 0);
}

#[test]
fn learned_constraints_converge_to_feasible_optimum() {
    // failure-driven learning on blocks: the final plan is feasible and no
    // longer than the feasibility-filtered BFS optimum
    for seed in [3u64, 14, 42] {
        let text = tampkit::bench::gen_blocks(seed, 4);
        let task = {
            let d = tampkit::pddl::parse_domain(tampkit::fixtures::BLOCKS_DOMAIN).unwrap();
            let p = tampkit::pddl::parse_problem(&text, &d).unwrap();
            tampkit::grounding::ground(&d, &p)
        };
        let mut rules = RuleSet::default();
        let config = tampkit::tamp::TampConfig::new(tampkit::tamp::Mode::FailureDriven);
        let meta = tampkit::tamp::InstanceMeta {
            id: format!("s{seed}"),
            n_objects: 4,
            n_goals: 1,
        };
        let (outcome, _) = tampkit::tamp::solve_instance(&task, &meta, &mut rules, &config);
        let tampkit::tamp::TrialOutcome::Success(p) = outcome else {
            panic!("seed {seed}: learning must converge");
        };
        assert!(util::simulate_with_geometry(&task, &p.steps).is_ok());
        let optimum = util::bfs_optimal(
            &task,
            |state, action| util::geometrically_feasible(&task, state, action),
            12,
        )
        .unwrap();
        // learned constraints over-approximate at worst; never below optimum
        assert!(p.steps.len() >= optimum, "seed {seed}");
    }
}

#[test]
fn learned_constraint_blocks_repeat_of_failure() {
    let task = util::ground_fixture(
        tampkit::fixtures::BLOCKS_DOMAIN,
        tampkit::fixtures::BLOCKS_PROBLEM_2,
    );
    // the unconstrained optimum picks red through blue's obstruction
    let result = plan(&task, &RuleSet::default(), 10, Budget::Unlimited);
    let PlanOutcome::Solved(first) = result.outcome else {
        panic!("solvable");
    };
    let report = tampkit::refine::refine_plan(&task, &first.steps).unwrap();
    if report.feasible {
        return; // planner happened to find the feasible optimum directly
    }
    let learned = tampkit::constraints::learn_from_failure(&report, &task);
    let rules = RuleSet {
        rules: vec![],
        learned: vec![learned],
    };
    assert!(
        !util::plan_satisfies_rules(&task, &rules, &first.steps),
        "the learned constraint must rule out the rejected plan"
    );
}
