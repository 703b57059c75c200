//! Cross-checks the SAT planner against the independent breadth-first
//! search oracle over the ground transition system.

mod util;

use tampkit::bench;
use tampkit::constraints::{parse_rules, RuleSet};
use tampkit::grounding::reachable_prune;
use tampkit::pddl::{parse_domain, parse_problem};
use tampkit::sat::Budget;
use tampkit::satplan::{plan, validate, PlanOutcome};

fn solved_length(task: &tampkit::grounding::GroundTask, rules: &RuleSet) -> Option<usize> {
    match plan(task, rules, 20, Budget::Unlimited).outcome {
        PlanOutcome::Solved(p) => Some(p.steps.len()),
        PlanOutcome::UnsolvableWithin(_) => None,
        PlanOutcome::BudgetExceeded { .. } => panic!("unlimited budget exceeded"),
    }
}

#[test]
fn fixture_instances_match_bfs_optimum() {
    let cases = [
        (tampkit::fixtures::BLOCKS_DOMAIN, tampkit::fixtures::BLOCKS_PROBLEM_1),
        (tampkit::fixtures::BLOCKS_DOMAIN, tampkit::fixtures::BLOCKS_PROBLEM_2),
        (
            tampkit::fixtures::CONTAINERS_DOMAIN,
            tampkit::fixtures::CONTAINERS_PROBLEM_GOAL1,
        ),
    ];
    for (domain, problem) in cases {
        let task = util::ground_fixture(domain, problem);
        let expected = util::bfs_optimal_plain(&task, 12).expect("fixture is solvable");
        assert_eq!(solved_length(&task, &RuleSet::default()), Some(expected));
    }
}

#[test]
fn generated_blocks_instances_match_bfs_optimum() {
    let d = parse_domain(tampkit::fixtures::BLOCKS_DOMAIN).unwrap();
    for seed in 0..5 {
        for n in 1..=5 {
            let text = bench::gen_blocks(seed * 1000 + n as u64, n);
            let p = parse_problem(&text, &d).unwrap();
            let task = tampkit::grounding::ground(&d, &p);
            let expected = util::bfs_optimal_plain(&task, 10).expect("blocks always solvable");
            assert_eq!(
                solved_length(&task, &RuleSet::default()),
                Some(expected),
                "seed {seed} n {n}"
            );
        }
    }
}

#[test]
fn pruned_task_preserves_optimum() {
    let task = util::ground_fixture(
        tampkit::fixtures::BLOCKS_DOMAIN,
        tampkit::fixtures::BLOCKS_PROBLEM_2,
    );
    let pruned = reachable_prune(&task);
    assert_eq!(
        solved_length(&task, &RuleSet::default()),
        solved_length(&pruned, &RuleSet::default())
    );
}

#[test]
fn constrained_optimum_matches_feasibility_filtered_bfs() {
    // under the corridor rules the planner's optimum equals BFS restricted
    // to geometrically feasible transitions
    let d = parse_domain(tampkit::fixtures::BLOCKS_DOMAIN).unwrap();
    let rules_src = tampkit::fixtures::BLOCKS_CORRIDOR_RULES;
    for seed in 0..5 {
        for n in 2..=4 {
            let text = bench::gen_blocks(seed * 77 + n as u64, n);
            let p = parse_problem(&text, &d).unwrap();
            let task = tampkit::grounding::ground(&d, &p);
            let rules = parse_rules(rules_src, &d, &util::rowcol_attrs()).unwrap();
            let expected = util::bfs_optimal(
                &task,
                |state, action| util::geometrically_feasible(&task, state, action),
                12,
            )
            .expect("corridor-feasible plan exists");
            assert_eq!(
                solved_length(&task, &rules),
                Some(expected),
                "seed {seed} n {n}"
            );
        }
    }
}

#[test]
fn containers_with_lid_rule_removes_lid_before_insertion() {
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
    let result = plan(&task, &rules, 20, Budget::Unlimited);
    let PlanOutcome::Solved(p) = result.outcome else {
        panic!("solvable with the lid rule");
    };
    validate(&p, &task).unwrap();
    let names = p.names(&task);
    let insert_at = names
        .iter()
        .position(|n| n == "place-in(item-1, container-1)")
        .expect("goal requires the insertion");
    let lid_off_at = names
        .iter()
        .position(|n| n.starts_with("pick(lid-1"))
        .expect("lid must come off first");
    assert!(lid_off_at < insert_at, "plan order: {names:?}");
    // matches the feasibility-filtered optimum: lid off (2) + insertion (2)
    assert_eq!(p.steps.len(), 4);
}

#[test]
fn unconstrained_containers_plan_is_shorter_but_infeasible() {
    let task = util::ground_fixture(
        tampkit::fixtures::CONTAINERS_DOMAIN,
        tampkit::fixtures::CONTAINERS_PROBLEM_GOAL1,
    );
    let result = plan(&task, &RuleSet::default(), 20, Budget::Unlimited);
    let PlanOutcome::Solved(p) = result.outcome else {
        panic!("symbolically solvable");
    };
    assert_eq!(p.steps.len(), 2);
    assert!(util::simulate_with_geometry(&task, &p.steps).is_err());
}
