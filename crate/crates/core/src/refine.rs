//! Deterministic geometric refinement oracles. Task plans are checked
//! stepwise against a concrete scene; the first geometrically infeasible
//! step is reported together with the state atoms responsible, which is
//! what failure-driven constraint learning generalizes from.
//!
//! Two scene families are modeled:
//!
//! * a tabletop grid of blocks, where the gripper approaches every cell
//!   from the larger-row side, so a pick or place at `(r, c)` is feasible
//!   exactly when no block occupies the approach corridor
//!   `{(r', c) : r' > r}`;
//! * containers with lids, where inserting into or retrieving from a
//!   container is feasible exactly when no lid rests on it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grounding::{GroundAction, GroundTask};
use crate::pddl::Atom;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SceneError {
    #[error("domain {0} has no geometric model")]
    UnknownDomain(String),
    #[error("block {a} and block {b} both occupy ({row}, {col})")]
    DuplicateOccupancy {
        a: String,
        b: String,
        row: i64,
        col: i64,
    },
    #[error("object {0} is missing attribute {1}")]
    MissingAttribute(String, String),
}

/// Concrete geometric state, advanced action by action during refinement.
/// Serializable because the rule-authoring pipeline receives the initial
/// scene as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GeometricScene {
    Blocks {
        rows: i64,
        cols: i64,
        /// block -> (row, col) for blocks resting on the table
        positions: BTreeMap<String, (i64, i64)>,
        holding: Option<String>,
        /// tile name -> (row, col), fixed for the scene's lifetime
        tiles: BTreeMap<String, (i64, i64)>,
    },
    Containers {
        /// movable -> surface it rests on
        on: BTreeMap<String, String>,
        /// item -> container it is stowed in
        stowed: BTreeMap<String, String>,
        holding: Option<String>,
    },
}

/// Builds the initial scene from a ground task's initial state and static
/// attributes. The domain name selects the geometric model.
pub fn init_scene(task: &GroundTask) -> Result<GeometricScene, SceneError> {
    match task.domain.name.as_str() {
        "blocks" => init_blocks_scene(task),
        "containers" => init_containers_scene(task),
        other => Err(SceneError::UnknownDomain(other.to_string())),
    }
}

fn tile_coords(task: &GroundTask, tile: &str) -> Result<(i64, i64), SceneError> {
    let attrs = task
        .attributes
        .get(tile)
        .ok_or_else(|| SceneError::MissingAttribute(tile.to_string(), "row".into()))?;
    let row = *attrs
        .get("row")
        .ok_or_else(|| SceneError::MissingAttribute(tile.to_string(), "row".into()))?;
    let col = *attrs
        .get("col")
        .ok_or_else(|| SceneError::MissingAttribute(tile.to_string(), "col".into()))?;
    Ok((row, col))
}

fn init_blocks_scene(task: &GroundTask) -> Result<GeometricScene, SceneError> {
    let mut tiles = BTreeMap::new();
    let (mut rows, mut cols) = (0, 0);
    for tile in task.objects_of_type("tile") {
        let (r, c) = tile_coords(task, tile)?;
        rows = rows.max(r + 1);
        cols = cols.max(c + 1);
        tiles.insert(tile.to_string(), (r, c));
    }

    let mut positions: BTreeMap<String, (i64, i64)> = BTreeMap::new();
    let mut holding = None;
    for atom in task.init.iter_true().map(|i| &task.atoms[i]) {
        match atom.predicate.as_str() {
            "at" => {
                let block = atom.args[0].clone();
                let (r, c) = tiles[&atom.args[1]];
                if let Some((other, _)) = positions.iter().find(|(_, &p)| p == (r, c)) {
                    return Err(SceneError::DuplicateOccupancy {
                        a: other.clone(),
                        b: block,
                        row: r,
                        col: c,
                    });
                }
                positions.insert(block, (r, c));
            }
            "holding" => holding = Some(atom.args[0].clone()),
            _ => {}
        }
    }
    Ok(GeometricScene::Blocks {
        rows,
        cols,
        positions,
        holding,
        tiles,
    })
}

fn init_containers_scene(task: &GroundTask) -> Result<GeometricScene, SceneError> {
    let mut on = BTreeMap::new();
    let mut stowed = BTreeMap::new();
    let mut holding = None;
    for atom in task.init.iter_true().map(|i| &task.atoms[i]) {
        match atom.predicate.as_str() {
            "on" => {
                on.insert(atom.args[0].clone(), atom.args[1].clone());
            }
            "in" => {
                stowed.insert(atom.args[0].clone(), atom.args[1].clone());
            }
            "holding" => holding = Some(atom.args[0].clone()),
            _ => {}
        }
    }
    Ok(GeometricScene::Containers {
        on,
        stowed,
        holding,
    })
}

/// Geometric verdict on one action in one scene. The culprit lists the
/// state atoms (task indices, with polarity) that make the step infeasible;
/// it is minimal in the sense that flipping any single culprit atom removes
/// at least one obstruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible { culprit: Vec<(usize, bool)> },
}

/// Corridor occupancy check shared by pick and place: blocks other than
/// `moved` standing at `(r', col)` with `r' > row`.
fn corridor_blockers<'s>(
    positions: &'s BTreeMap<String, (i64, i64)>,
    moved: &str,
    row: i64,
    col: i64,
) -> Vec<(&'s str, i64, i64)> {
    positions
        .iter()
        .filter(|(b, &(r, c))| b.as_str() != moved && c == col && r > row)
        .map(|(b, &(r, c))| (b.as_str(), r, c))
        .collect()
}

fn atom_idx(task: &GroundTask, predicate: &str, args: &[&str]) -> usize {
    let atom = Atom {
        predicate: predicate.to_string(),
        args: args.iter().map(|s| s.to_string()).collect(),
    };
    task.atom_index(&atom)
        .unwrap_or_else(|| panic!("scene produced unknown atom {atom}"))
}

/// Checks one action against the current scene without advancing it.
pub fn check_action(
    scene: &GeometricScene,
    action: &GroundAction,
    task: &GroundTask,
) -> Feasibility {
    match scene {
        GeometricScene::Blocks {
            positions, tiles, ..
        } => {
            if action.schema != "pick" && action.schema != "place" {
                return Feasibility::Feasible;
            }
            let block = action.args[0].as_str();
            let (row, col) = tiles[&action.args[1]];
            let blockers = corridor_blockers(positions, block, row, col);
            if blockers.is_empty() {
                return Feasibility::Feasible;
            }
            // each blocker's position atom, with positive polarity
            let culprit = blockers
                .iter()
                .map(|&(b, r, c)| {
                    let tile = tiles
                        .iter()
                        .find(|(_, &p)| p == (r, c))
                        .map(|(t, _)| t.as_str())
                        .expect("blocker stands on a known tile");
                    (atom_idx(task, "at", &[b, tile]), true)
                })
                .collect();
            Feasibility::Infeasible { culprit }
        }
        GeometricScene::Containers { on, .. } => {
            if action.schema != "place-in" && action.schema != "unstow" {
                return Feasibility::Feasible;
            }
            let container = action.args[1].as_str();
            let lids: Vec<&str> = on
                .iter()
                .filter(|(m, s)| {
                    s.as_str() == container
                        && task
                            .objects
                            .iter()
                            .any(|(o, ty)| o == *m && task.domain.is_subtype(ty, "lid"))
                })
                .map(|(m, _)| m.as_str())
                .collect();
            if lids.is_empty() {
                return Feasibility::Feasible;
            }
            let culprit = lids
                .iter()
                .map(|&l| (atom_idx(task, "on", &[l, container]), true))
                .collect();
            Feasibility::Infeasible { culprit }
        }
    }
}

/// Advances the scene by one action. Callers check feasibility first; the
/// update itself only mirrors the action's symbolic effects geometrically.
pub fn apply_action(scene: &mut GeometricScene, action: &GroundAction) {
    match scene {
        GeometricScene::Blocks {
            positions,
            holding,
            tiles,
            ..
        } => match action.schema.as_str() {
            "pick" => {
                positions.remove(&action.args[0]);
                *holding = Some(action.args[0].clone());
            }
            "place" => {
                positions.insert(action.args[0].clone(), tiles[&action.args[1]]);
                *holding = None;
            }
            _ => {}
        },
        GeometricScene::Containers {
            on,
            stowed,
            holding,
        } => match action.schema.as_str() {
            "pick" => {
                on.remove(&action.args[0]);
                *holding = Some(action.args[0].clone());
            }
            "unstow" => {
                stowed.remove(&action.args[0]);
                *holding = Some(action.args[0].clone());
            }
            "place-on" => {
                on.insert(action.args[0].clone(), action.args[1].clone());
                *holding = None;
            }
            "place-in" => {
                stowed.insert(action.args[0].clone(), action.args[1].clone());
                *holding = None;
            }
            _ => {}
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementReport {
    pub feasible: bool,
    pub failing_step: Option<usize>,
    /// Index into `GroundTask::actions` of the infeasible step.
    pub failing_action: Option<usize>,
    /// Responsible atoms as (atom index, polarity).
    pub culprit: Vec<(usize, bool)>,
}

impl RefinementReport {
    fn feasible() -> Self {
        RefinementReport {
            feasible: true,
            failing_step: None,
            failing_action: None,
            culprit: Vec::new(),
        }
    }
}

/// Refines a validated plan stepwise from the initial scene, stopping at
/// the first geometrically infeasible step.
pub fn refine_plan(
    task: &GroundTask,
    steps: &[usize],
) -> Result<RefinementReport, SceneError> {
    let mut scene = init_scene(task)?;
    for (step, &idx) in steps.iter().enumerate() {
        let action = &task.actions[idx];
        match check_action(&scene, action, task) {
            Feasibility::Feasible => apply_action(&mut scene, action),
            Feasibility::Infeasible { culprit } => {
                return Ok(RefinementReport {
                    feasible: false,
                    failing_step: Some(step),
                    failing_action: Some(idx),
                    culprit,
                })
            }
        }
    }
    Ok(RefinementReport::feasible())
}
