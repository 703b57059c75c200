//! Shared helpers for the integration suites: an independent breadth-first
//! search oracle over the ground transition system, an independent geometric
//! simulator, and builders for the rule-authoring replay fixtures.
//!
//! Everything here deliberately re-derives semantics from the ground task's
//! data (preconditions, effects, attributes) rather than calling the
//! library's search, encoding, or refinement code, so it can serve as an
//! oracle for them.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use tampkit::grounding::{GroundAction, GroundTask};
use tampkit::pddl::{parse_domain, parse_problem, DomainModel};

pub type State = BTreeSet<usize>;

pub fn initial_state(task: &GroundTask) -> State {
    task.init.iter_true().collect()
}

pub fn applicable(state: &State, action: &GroundAction) -> bool {
    action.pre_pos.iter().all(|i| state.contains(i))
        && action.pre_neg.iter().all(|i| !state.contains(i))
}

pub fn apply(state: &State, action: &GroundAction) -> State {
    let mut next = state.clone();
    for i in &action.del {
        next.remove(i);
    }
    for i in &action.add {
        next.insert(*i);
    }
    next
}

pub fn goal_satisfied(task: &GroundTask, state: &State) -> bool {
    task.goal_pos.iter().all(|i| state.contains(i))
        && task.goal_neg.iter().all(|i| !state.contains(i))
}

/// Length of a shortest plan by breadth-first search, restricted to actions
/// accepted by `feasible` in the state they would be applied in. `None` if
/// no plan exists within `depth_limit`.
pub fn bfs_optimal(
    task: &GroundTask,
    feasible: impl Fn(&State, &GroundAction) -> bool,
    depth_limit: usize,
) -> Option<usize> {
    let start = initial_state(task);
    if goal_satisfied(task, &start) {
        return Some(0);
    }
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(start.clone());
    let mut frontier = VecDeque::new();
    frontier.push_back((start, 0usize));
    while let Some((state, depth)) = frontier.pop_front() {
        if depth == depth_limit {
            continue;
        }
        for action in &task.actions {
            if !applicable(&state, action) || !feasible(&state, action) {
                continue;
            }
            let next = apply(&state, action);
            if goal_satisfied(task, &next) {
                return Some(depth + 1);
            }
            if seen.insert(next.clone()) {
                frontier.push_back((next, depth + 1));
            }
        }
    }
    None
}

/// Unrestricted shortest-plan length.
pub fn bfs_optimal_plain(task: &GroundTask, depth_limit: usize) -> Option<usize> {
    bfs_optimal(task, |_, _| true, depth_limit)
}

/// Independent geometric feasibility check for the benchmark domains,
/// computed from the symbolic state alone: block positions are read off the
/// true `at` atoms and lid placements off the true `on` atoms, then the
/// approach-corridor and lid-obstruction conditions are applied directly.
pub fn geometrically_feasible(task: &GroundTask, state: &State, action: &GroundAction) -> bool {
    match task.domain.name.as_str() {
        "blocks" => {
            if action.schema != "pick" && action.schema != "place" {
                return true;
            }
            let coords = |tile: &str| -> (i64, i64) {
                let a = &task.attributes[tile];
                (a["row"], a["col"])
            };
            let (row, col) = coords(&action.args[1]);
            let moved = action.args[0].as_str();
            !state.iter().any(|&i| {
                let atom = &task.atoms[i];
                if atom.predicate != "at" || atom.args[0] == moved {
                    return false;
                }
                let (r, c) = coords(&atom.args[1]);
                c == col && r > row
            })
        }
        "containers" => {
            if action.schema != "place-in" && action.schema != "unstow" {
                return true;
            }
            let container = action.args[1].as_str();
            !state.iter().any(|&i| {
                let atom = &task.atoms[i];
                atom.predicate == "on"
                    && atom.args[1] == container
                    && task
                        .objects
                        .iter()
                        .any(|(o, ty)| *o == atom.args[0] && task.domain.is_subtype(ty, "lid"))
            })
        }
        _ => true,
    }
}

/// Simulates a plan symbolically while checking each step with the
/// independent geometric test; returns the first infeasible step.
pub fn simulate_with_geometry(task: &GroundTask, steps: &[usize]) -> Result<(), usize> {
    let mut state = initial_state(task);
    for (i, &idx) in steps.iter().enumerate() {
        let action = &task.actions[idx];
        assert!(applicable(&state, action), "plan must be symbolically valid");
        if !geometrically_feasible(task, &state, action) {
            return Err(i);
        }
        state = apply(&state, action);
    }
    Ok(())
}

/// Enumerates every symbolically valid plan of length at most `max_len`
/// (depth-first over action sequences), yielding each to `f`.
pub fn for_each_valid_plan(
    task: &GroundTask,
    max_len: usize,
    f: &mut impl FnMut(&[usize]),
) {
    fn rec(
        task: &GroundTask,
        state: &State,
        prefix: &mut Vec<usize>,
        max_len: usize,
        f: &mut impl FnMut(&[usize]),
    ) {
        if goal_satisfied(task, state) {
            f(prefix);
        }
        if prefix.len() == max_len {
            return;
        }
        for action in &task.actions {
            if applicable(state, action) {
                prefix.push(action.index);
                let next = apply(state, action);
                rec(task, &next, prefix, max_len, f);
                prefix.pop();
            }
        }
    }
    rec(task, &initial_state(task), &mut Vec::new(), max_len, f);
}

pub fn ground_fixture(domain: &str, problem: &str) -> GroundTask {
    let d = parse_domain(domain).unwrap();
    let p = parse_problem(problem, &d).unwrap();
    tampkit::grounding::ground(&d, &p)
}

pub fn rowcol_attrs() -> BTreeSet<String> {
    ["row".to_string(), "col".to_string()].into_iter().collect()
}

/// Path to a committed replay-fixture directory.
pub fn replay_dir(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/vrm")
        .join(name)
}

/// The pieces of the rule-authoring request for the Blocks benchmark scene
/// (the two-block instance), shared by the replay fixtures and their tests.
pub struct VrmParts {
    pub domain_text: &'static str,
    pub domain: DomainModel,
    pub scene_json: String,
    pub image_png: Vec<u8>,
    pub attributes: BTreeSet<String>,
}

pub fn blocks_vrm_parts() -> VrmParts {
    let task = ground_fixture(
        tampkit::fixtures::BLOCKS_DOMAIN,
        tampkit::fixtures::BLOCKS_PROBLEM_2,
    );
    let scene = tampkit::refine::init_scene(&task).unwrap();
    VrmParts {
        domain_text: tampkit::fixtures::BLOCKS_DOMAIN,
        domain: task.domain.clone(),
        scene_json: serde_json::to_string(&scene).unwrap(),
        image_png: tampkit::bench::render_scene(&scene),
        attributes: rowcol_attrs(),
    }
}

pub fn containers_vrm_parts() -> VrmParts {
    let task = ground_fixture(
        tampkit::fixtures::CONTAINERS_DOMAIN,
        tampkit::fixtures::CONTAINERS_PROBLEM_GOAL1,
    );
    let scene = tampkit::refine::init_scene(&task).unwrap();
    VrmParts {
        domain_text: tampkit::fixtures::CONTAINERS_DOMAIN,
        domain: task.domain.clone(),
        scene_json: serde_json::to_string(&scene).unwrap(),
        image_png: tampkit::bench::render_scene(&scene),
        attributes: BTreeSet::new(),
    }
}

impl VrmParts {
    pub fn request(&self) -> tampkit::vrm::VrmRequest<'_> {
        tampkit::vrm::VrmRequest::new(
            self.domain_text,
            &self.domain,
            &self.scene_json,
            Some(&self.image_png),
            self.attributes.clone(),
        )
    }
}

/// Parsed blocks tile coordinates for quick assertions.
pub fn tile_coords(task: &GroundTask) -> BTreeMap<String, (i64, i64)> {
    task.objects
        .iter()
        .filter(|(_, ty)| ty == "tile")
        .map(|(o, _)| {
            let a = &task.attributes[o];
            (o.clone(), (a["row"], a["col"]))
        })
        .collect()
}

/// Independent culprit derivation mirroring the geometric conditions: the
/// positive state atoms responsible for infeasibility.
pub fn independent_culprit(
    task: &GroundTask,
    state: &State,
    action: &GroundAction,
) -> BTreeSet<(usize, bool)> {
    let mut out = BTreeSet::new();
    match task.domain.name.as_str() {
        "blocks" => {
            let coords = |tile: &str| -> (i64, i64) {
                let a = &task.attributes[tile];
                (a["row"], a["col"])
            };
            let (row, col) = coords(&action.args[1]);
            for &i in state {
                let atom = &task.atoms[i];
                if atom.predicate != "at" || atom.args[0] == action.args[0] {
                    continue;
                }
                let (r, c) = coords(&atom.args[1]);
                if c == col && r > row {
                    out.insert((i, true));
                }
            }
        }
        "containers" => {
            for &i in state {
                let atom = &task.atoms[i];
                if atom.predicate == "on"
                    && atom.args[1] == action.args[1]
                    && task
                        .objects
                        .iter()
                        .any(|(o, ty)| *o == atom.args[0] && task.domain.is_subtype(ty, "lid"))
                {
                    out.insert((i, true));
                }
            }
        }
        _ => {}
    }
    out
}

/// Walks every symbolically applicable action sequence up to `max_len`,
/// comparing the refinement oracle's verdict (and culprit set, when
/// infeasible) against the independent geometric test at every step.
/// Returns the number of action checks performed; panics on the first
/// disagreement.
pub fn check_oracles_agree(task: &GroundTask, max_len: usize) -> usize {
    use tampkit::refine::{apply_action, check_action, init_scene, Feasibility, GeometricScene};

    fn rec(
        task: &GroundTask,
        scene: &GeometricScene,
        state: &State,
        depth_left: usize,
        count: &mut usize,
    ) {
        for action in &task.actions {
            if !applicable(state, action) {
                continue;
            }
            *count += 1;
            let verdict = check_action(scene, action, task);
            let independent = geometrically_feasible(task, state, action);
            match (&verdict, independent) {
                (Feasibility::Feasible, true) => {
                    if depth_left > 1 {
                        let mut next_scene = scene.clone();
                        apply_action(&mut next_scene, action);
                        rec(task, &next_scene, &apply(state, action), depth_left - 1, count);
                    }
                }
                (Feasibility::Infeasible { culprit }, false) => {
                    let got: BTreeSet<(usize, bool)> = culprit.iter().copied().collect();
                    assert_eq!(
                        got,
                        independent_culprit(task, state, action),
                        "culprit mismatch on {}",
                        action.name()
                    );
                }
                _ => panic!(
                    "oracle disagreement on {} (refinement oracle: {verdict:?}, independent: {independent})",
                    action.name()
                ),
            }
        }
    }

    let scene = init_scene(task).expect("benchmark task has a scene");
    let mut count = 0;
    rec(task, &scene, &initial_state(task), max_len, &mut count);
    count
}

/// True when the plan's induced assignment satisfies every clause the rule
/// set compiles to at the plan's own horizon: the semantic meaning of "the
/// plan passes rule replay over its state trace".
pub fn plan_satisfies_rules(
    task: &GroundTask,
    rules: &tampkit::constraints::RuleSet,
    steps: &[usize],
) -> bool {
    use tampkit::satplan::CnfEncoding;

    let h = steps.len();
    let encoding = CnfEncoding::new(task, h);
    let clauses = tampkit::constraints::compile(rules, task, &encoding);

    // truth assignment from the simulated trace
    let mut truth = vec![false; encoding.num_vars() + 1];
    let mut state = initial_state(task);
    for t in 0..=h {
        for &i in &state {
            truth[encoding.atom_var(i, t) as usize] = true;
        }
        if t < h {
            truth[encoding.action_var(steps[t], t) as usize] = true;
            state = apply(&state, &task.actions[steps[t]]);
        }
    }
    clauses.iter().all(|clause| {
        clause
            .iter()
            .any(|lit| truth[lit.var() as usize] == lit.is_positive())
    })
}
