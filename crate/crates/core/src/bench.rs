//! Benchmark instance generators, scene rendering, and report tables.
//!
//! Generators are pure functions of their seed so a benchmark suite can be
//! regenerated byte-for-byte anywhere. Two families:
//!
//! * Blocks: `n` colored blocks on the 3x3 grid, the red block never
//!   starting on the center tile; the goal is always red on the center.
//! * Containers: the fixed lids-on, items-on-plate initial state with a
//!   random multi-goal request over distinct objects.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::refine::GeometricScene;
use crate::tamp::TrialMetrics;

/// Block names in palette order; index 0 is the goal block.
pub const BLOCK_NAMES: [&str; 7] = [
    "red", "blue", "green", "yellow", "purple", "orange", "cyan",
];

pub const GRID: i64 = 3;
pub const CENTER_TILE: &str = "tile-1-1";

fn tile_name(r: i64, c: i64) -> String {
    format!("tile-{r}-{c}")
}

/// Depth bound within which every generated Blocks instance is guaranteed
/// corridor-solvable; also an upper bound on the planning horizon needed.
pub const BLOCKS_SOLVABLE_DEPTH: usize = 14;

/// Breadth-first search over concrete block placements under the
/// approach-corridor rule: a block can be picked from or placed at `(r, c)`
/// only while no other block stands at `(r', c)` with `r' > r`. Used by the
/// generator to reject dense layouts that the rule renders unsolvable.
fn corridor_solvable(placement: &[(&str, (i64, i64))], depth_limit: usize) -> bool {
    type SceneState = (BTreeMap<&'static str, (i64, i64)>, Option<&'static str>);
    let corridor_free = |positions: &BTreeMap<&str, (i64, i64)>, skip: &str, r: i64, c: i64| {
        positions
            .iter()
            .all(|(b, &(br, bc))| *b == skip || bc != c || br <= r)
    };
    let start: BTreeMap<&'static str, (i64, i64)> = placement
        .iter()
        .map(|&(name, pos)| {
            let name = BLOCK_NAMES
                .iter()
                .copied()
                .find(|n| *n == name)
                .expect("placement uses palette names");
            (name, pos)
        })
        .collect();
    let done = |positions: &BTreeMap<&str, (i64, i64)>| positions.get("red") == Some(&(1, 1));
    if done(&start) {
        return true;
    }
    let mut seen: std::collections::HashSet<SceneState> = std::collections::HashSet::new();
    let mut frontier: std::collections::VecDeque<(SceneState, usize)> =
        std::collections::VecDeque::new();
    seen.insert((start.clone(), None));
    frontier.push_back(((start, None), 0));
    while let Some(((positions, holding), depth)) = frontier.pop_front() {
        if depth == depth_limit {
            continue;
        }
        let mut successors: Vec<SceneState> = Vec::new();
        match holding {
            None => {
                for (&b, &(r, c)) in &positions {
                    if corridor_free(&positions, b, r, c) {
                        let mut next = positions.clone();
                        next.remove(b);
                        successors.push((next, Some(b)));
                    }
                }
            }
            Some(b) => {
                for r in 0..GRID {
                    for c in 0..GRID {
                        if positions.values().any(|&p| p == (r, c)) {
                            continue;
                        }
                        if corridor_free(&positions, b, r, c) {
                            let mut next = positions.clone();
                            next.insert(b, (r, c));
                            successors.push((next, None));
                        }
                    }
                }
            }
        }
        for state in successors {
            if done(&state.0) && state.1.is_none() {
                return true;
            }
            if seen.insert(state.clone()) {
                frontier.push_back((state, depth + 1));
            }
        }
    }
    false
}

/// Generates a Blocks problem with `n_blocks` in `1..=7`. Placement is a
/// seeded shuffle of the nine tiles, re-drawn until the layout is
/// corridor-solvable; red skips the center tile because the goal
/// `(at red tile-1-1)` must not hold initially.
pub fn gen_blocks(seed: u64, n_blocks: usize) -> String {
    assert!((1..=BLOCK_NAMES.len()).contains(&n_blocks));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let placement: Vec<(&str, String)> = loop {
        let mut tiles: Vec<String> = (0..GRID)
            .flat_map(|r| (0..GRID).map(move |c| tile_name(r, c)))
            .collect();
        tiles.shuffle(&mut rng);

        let red_at = tiles
            .iter()
            .position(|t| t != CENTER_TILE)
            .expect("a 3x3 grid has non-center tiles");
        let red_tile = tiles.remove(red_at);
        let mut placement: Vec<(&str, String)> = vec![(BLOCK_NAMES[0], red_tile)];
        for name in &BLOCK_NAMES[1..n_blocks] {
            placement.push((name, tiles.remove(0)));
        }

        let coords: Vec<(&str, (i64, i64))> = placement
            .iter()
            .map(|(name, tile)| {
                let mut parts = tile.splitn(3, '-').skip(1);
                let r: i64 = parts.next().unwrap().parse().unwrap();
                let c: i64 = parts.next().unwrap().parse().unwrap();
                (*name, (r, c))
            })
            .collect();
        if corridor_solvable(&coords, BLOCKS_SOLVABLE_DEPTH) {
            break placement;
        }
    };

    let mut s = String::new();
    let _ = writeln!(s, "(define (problem blocks-n{n_blocks}-s{seed})");
    let _ = writeln!(s, "  (:domain blocks)");
    let _ = write!(s, "  (:objects");
    for (name, _) in &placement {
        let _ = write!(s, " {name}");
    }
    let _ = writeln!(s, " - block");
    let _ = write!(s, "           ");
    for r in 0..GRID {
        for c in 0..GRID {
            let _ = write!(s, " {}", tile_name(r, c));
        }
    }
    let _ = writeln!(s, " - tile)");
    let _ = write!(s, "  (:init (handempty)");
    for (name, tile) in &placement {
        let _ = write!(s, " (at {name} {tile})");
    }
    for r in 0..GRID {
        for c in 0..GRID {
            let t = tile_name(r, c);
            if placement.iter().all(|(_, occupied)| *occupied != t) {
                let _ = write!(s, " (clear {t})");
            }
        }
    }
    let _ = writeln!(s, ")");
    let _ = writeln!(s, "  (:goal (and (at red {CENTER_TILE}))))");
    let _ = writeln!(s);
    let _ = writeln!(s, ";; :attributes");
    for r in 0..GRID {
        for c in 0..GRID {
            let _ = writeln!(s, ";; {} row {r}", tile_name(r, c));
            let _ = writeln!(s, ";; {} col {c}", tile_name(r, c));
        }
    }
    let _ = writeln!(s, ";; :end");
    s
}

pub const CONTAINERS_ITEMS: usize = 6;
pub const CONTAINERS_LIDS: usize = 3;

/// Generates a Containers problem with `n_goals` in `1..=6` over the fixed
/// initial state. Goal objects are drawn without replacement from the six
/// items and three lids; an item's goal stows it in a random container, a
/// lid's goal parks it on the plate.
pub fn gen_containers(seed: u64, n_goals: usize) -> String {
    assert!((1..=CONTAINERS_ITEMS).contains(&n_goals));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<String> = (1..=CONTAINERS_ITEMS)
        .map(|i| format!("item-{i}"))
        .chain((1..=CONTAINERS_LIDS).map(|l| format!("lid-{l}")))
        .collect();
    candidates.shuffle(&mut rng);
    let mut goals: Vec<String> = candidates
        .into_iter()
        .take(n_goals)
        .map(|obj| {
            if obj.starts_with("item-") {
                let k = rng.gen_range(1..=CONTAINERS_LIDS);
                format!("(in {obj} container-{k})")
            } else {
                format!("(on {obj} plate)")
            }
        })
        .collect();
    goals.sort();

    let mut s = String::new();
    let _ = writeln!(s, "(define (problem containers-g{n_goals}-s{seed})");
    let _ = writeln!(s, "  (:domain containers)");
    let _ = writeln!(
        s,
        "  (:objects item-1 item-2 item-3 item-4 item-5 item-6 - item"
    );
    let _ = writeln!(s, "            lid-1 lid-2 lid-3 - lid");
    let _ = writeln!(
        s,
        "            container-1 container-2 container-3 - container"
    );
    let _ = writeln!(s, "            plate - plate)");
    let _ = writeln!(
        s,
        "  (:init (on lid-1 container-1) (on lid-2 container-2) (on lid-3 container-3)"
    );
    let _ = writeln!(
        s,
        "         (on item-1 plate) (on item-2 plate) (on item-3 plate)"
    );
    let _ = writeln!(
        s,
        "         (on item-4 plate) (on item-5 plate) (on item-6 plate)"
    );
    let _ = writeln!(s, "         (handempty))");
    let _ = writeln!(s, "  (:goal (and {})))", goals.join(" "));
    s
}

const CELL: u32 = 32;

fn palette(name: &str) -> [u8; 3] {
    match name {
        "red" => [200, 40, 40],
        "blue" => [40, 70, 200],
        "green" => [40, 160, 60],
        "yellow" => [210, 190, 40],
        "purple" => [140, 60, 180],
        "orange" => [220, 130, 30],
        "cyan" => [40, 180, 190],
        _ => [120, 120, 120],
    }
}

struct Canvas {
    width: u32,
    height: u32,
    pixels: Vec<u8>, // rgb
}

impl Canvas {
    fn new(width: u32, height: u32, bg: [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            pixels.extend_from_slice(&bg);
        }
        Canvas {
            width,
            height,
            pixels,
        }
    }

    fn rect(&mut self, x: u32, y: u32, w: u32, h: u32, color: [u8; 3]) {
        for py in y..(y + h).min(self.height) {
            for px in x..(x + w).min(self.width) {
                let i = ((py * self.width + px) * 3) as usize;
                self.pixels[i..i + 3].copy_from_slice(&color);
            }
        }
    }

    fn encode_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().expect("png header");
            writer
                .write_image_data(&self.pixels)
                .expect("png image data");
        }
        out
    }
}

/// Renders a scene to PNG bytes. Purely a function of the scene, so
/// identical scenes produce identical bytes.
pub fn render_scene(scene: &GeometricScene) -> Vec<u8> {
    match scene {
        GeometricScene::Blocks {
            rows,
            cols,
            positions,
            holding,
            ..
        } => {
            let width = *cols as u32 * CELL;
            let height = *rows as u32 * CELL;
            let mut canvas = Canvas::new(width, height, [240, 240, 240]);
            // grid lines
            for r in 0..*rows {
                canvas.rect(0, r as u32 * CELL, width, 1, [180, 180, 180]);
            }
            for c in 0..*cols {
                canvas.rect(c as u32 * CELL, 0, 1, height, [180, 180, 180]);
            }
            for (block, &(r, c)) in positions {
                canvas.rect(
                    c as u32 * CELL + 4,
                    r as u32 * CELL + 4,
                    CELL - 8,
                    CELL - 8,
                    palette(block),
                );
            }
            if let Some(held) = holding {
                // held block floats in the top-left corner
                canvas.rect(1, 1, 10, 10, palette(held));
            }
            canvas.encode_png()
        }
        GeometricScene::Containers {
            on,
            stowed,
            holding,
        } => {
            let width = 10 * CELL;
            let height = 5 * CELL;
            let mut canvas = Canvas::new(width, height, [240, 240, 240]);
            // plate along the bottom
            canvas.rect(0, 4 * CELL, width, CELL, [200, 200, 200]);
            let container_x = |k: u32| k * 3 * CELL + CELL / 2;
            for k in 0..3u32 {
                canvas.rect(container_x(k), 2 * CELL, 2 * CELL, 2 * CELL, [150, 120, 90]);
            }
            let container_slot = |name: &str| -> Option<u32> {
                name.strip_prefix("container-")
                    .and_then(|n| n.parse::<u32>().ok())
                    .map(|n| n - 1)
            };
            let mut plate_cursor: u32 = 4;
            let mut stow_depth: BTreeMap<u32, u32> = BTreeMap::new();
            for (movable, surface) in on {
                let color = if movable.starts_with("lid-") {
                    [60, 60, 60]
                } else {
                    palette(movable.split('-').next().unwrap_or(movable))
                };
                if let Some(k) = container_slot(surface) {
                    // resting on top of a container (lids, typically)
                    canvas.rect(container_x(k) - 4, 2 * CELL - 8, 2 * CELL + 8, 8, color);
                } else {
                    let color = if movable.starts_with("item-") {
                        let idx: usize = movable[5..].parse().unwrap_or(0);
                        palette(BLOCK_NAMES[idx % BLOCK_NAMES.len()])
                    } else {
                        color
                    };
                    canvas.rect(plate_cursor, 4 * CELL + 6, 14, 14, color);
                    plate_cursor += 20;
                }
            }
            for (item, container) in stowed {
                if let Some(k) = container_slot(container) {
                    let depth = stow_depth.entry(k).or_insert(0);
                    let idx: usize = item
                        .strip_prefix("item-")
                        .and_then(|n| n.parse().ok())
                        .unwrap_or(0);
                    canvas.rect(
                        container_x(k) + 6 + *depth * 18,
                        3 * CELL,
                        14,
                        14,
                        palette(BLOCK_NAMES[idx % BLOCK_NAMES.len()]),
                    );
                    *depth += 1;
                }
            }
            if let Some(held) = holding {
                canvas.rect(1, 1, 10, 10, palette(held.split('-').next().unwrap_or(held)));
            }
            canvas.encode_png()
        }
    }
}

/// Aggregated row of the benchmark report: one line per (size, mode).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n_objects: usize,
    pub mode: String,
    pub trials: usize,
    pub success_rate: f64,
    pub median_planning_time_s: f64,
    pub mean_refinement_failures: f64,
    pub mean_plan_length: f64,
}

pub fn aggregate(metrics: &[TrialMetrics]) -> Vec<ReportRow> {
    let mut groups: BTreeMap<(usize, String), Vec<&TrialMetrics>> = BTreeMap::new();
    for m in metrics {
        groups
            .entry((m.n_objects, m.mode.as_str().to_string()))
            .or_default()
            .push(m);
    }
    groups
        .into_iter()
        .map(|((n_objects, mode), ms)| {
            let trials = ms.len();
            let successes = ms.iter().filter(|m| m.success).count();
            let mut times: Vec<f64> = ms
                .iter()
                .map(|m| m.task_planning_time.as_secs_f64())
                .collect();
            times.sort_by(|a, b| a.total_cmp(b));
            let median = if times.is_empty() {
                0.0
            } else if times.len() % 2 == 1 {
                times[times.len() / 2]
            } else {
                (times[times.len() / 2 - 1] + times[times.len() / 2]) / 2.0
            };
            let mean_failures = ms
                .iter()
                .map(|m| m.refinement_failures as f64)
                .sum::<f64>()
                / trials as f64;
            let lengths: Vec<f64> = ms
                .iter()
                .filter_map(|m| m.plan_length.map(|l| l as f64))
                .collect();
            let mean_length = if lengths.is_empty() {
                0.0
            } else {
                lengths.iter().sum::<f64>() / lengths.len() as f64
            };
            ReportRow {
                n_objects,
                mode,
                trials,
                success_rate: successes as f64 / trials as f64,
                median_planning_time_s: median,
                mean_refinement_failures: mean_failures,
                mean_plan_length: mean_length,
            }
        })
        .collect()
}

/// Fixed-width text table over the aggregate rows.
pub fn report_table(metrics: &[TrialMetrics]) -> String {
    let rows = aggregate(metrics);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>7}  {:<14}  {:>6}  {:>8}  {:>12}  {:>9}  {:>8}",
        "objects", "mode", "trials", "success", "median-t(s)", "failures", "length"
    );
    for r in &rows {
        let _ = writeln!(
            s,
            "{:>7}  {:<14}  {:>6}  {:>7.0}%  {:>12.4}  {:>9.2}  {:>8.2}",
            r.n_objects,
            r.mode,
            r.trials,
            r.success_rate * 100.0,
            r.median_planning_time_s,
            r.mean_refinement_failures,
            r.mean_plan_length,
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::ground;
    use crate::pddl::{parse_domain, parse_problem};
    use crate::refine::init_scene;

    #[test]
    fn blocks_generation_is_deterministic_and_parses() {
        let a = gen_blocks(11, 4);
        let b = gen_blocks(11, 4);
        assert_eq!(a, b);
        let d = parse_domain(crate::fixtures::BLOCKS_DOMAIN).unwrap();
        let p = parse_problem(&a, &d).unwrap();
        assert!(!p.holds_initially(&crate::pddl::Atom {
            predicate: "at".into(),
            args: vec!["red".into(), CENTER_TILE.into()],
        }));
        let task = ground(&d, &p);
        init_scene(&task).unwrap();
    }

    #[test]
    fn blocks_red_never_starts_on_center() {
        let d = parse_domain(crate::fixtures::BLOCKS_DOMAIN).unwrap();
        for seed in 0..50 {
            for n in 1..=7 {
                let p = parse_problem(&gen_blocks(seed, n), &d).unwrap();
                assert!(!p.holds_initially(&crate::pddl::Atom {
                    predicate: "at".into(),
                    args: vec!["red".into(), CENTER_TILE.into()],
                }));
            }
        }
    }

    #[test]
    fn blocks_different_seeds_differ() {
        assert_ne!(gen_blocks(1, 3), gen_blocks(2, 3));
    }

    #[test]
    fn containers_generation_parses_with_distinct_goal_objects() {
        let d = parse_domain(crate::fixtures::CONTAINERS_DOMAIN).unwrap();
        for seed in 0..30 {
            for n in 1..=6 {
                let text = gen_containers(seed, n);
                let p = parse_problem(&text, &d).unwrap();
                assert_eq!(p.goal.len(), n);
                let mut objs: Vec<&str> =
                    p.goal.iter().map(|g| g.atom.args[0].as_str()).collect();
                objs.sort_unstable();
                objs.dedup();
                assert_eq!(objs.len(), n, "goal objects must be distinct");
            }
        }
    }

    #[test]
    fn render_is_deterministic_and_valid_png() {
        let d = parse_domain(crate::fixtures::BLOCKS_DOMAIN).unwrap();
        let p = parse_problem(&gen_blocks(3, 5), &d).unwrap();
        let task = ground(&d, &p);
        let scene = init_scene(&task).unwrap();
        let a = render_scene(&scene);
        let b = render_scene(&scene);
        assert_eq!(a, b);
        assert_eq!(&a[..8], b"\x89PNG\r\n\x1a\n");
    }

    #[test]
    fn different_scenes_render_differently() {
        let d = parse_domain(crate::fixtures::BLOCKS_DOMAIN).unwrap();
        let p1 = parse_problem(&gen_blocks(3, 5), &d).unwrap();
        let p2 = parse_problem(&gen_blocks(4, 5), &d).unwrap();
        let s1 = init_scene(&ground(&d, &p1)).unwrap();
        let s2 = init_scene(&ground(&d, &p2)).unwrap();
        assert_ne!(render_scene(&s1), render_scene(&s2));
    }

    #[test]
    fn containers_scene_renders() {
        let d = parse_domain(crate::fixtures::CONTAINERS_DOMAIN).unwrap();
        let p = parse_problem(crate::fixtures::CONTAINERS_PROBLEM_GOAL1, &d).unwrap();
        let task = ground(&d, &p);
        let scene = init_scene(&task).unwrap();
        let bytes = render_scene(&scene);
        assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");
    }

    #[test]
    fn report_table_groups_by_size_and_mode() {
        use crate::tamp::Mode;
        use std::time::Duration;
        let metrics: Vec<TrialMetrics> = (0..4)
            .map(|i| TrialMetrics {
                instance_id: format!("x{i}"),
                n_objects: 2 + i % 2,
                n_goals: 1,
                mode: Mode::Apriori,
                task_planning_time: Duration::from_millis(10 * (i as u64 + 1)),
                refinement_failures: i,
                success: i != 3,
                plan_length: Some(4),
                horizon: Some(4),
            })
            .collect();
        let rows = aggregate(&metrics);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n_objects, 2);
        assert_eq!(rows[0].trials, 2);
        let table = report_table(&metrics);
        assert!(table.contains("apriori"));
        assert_eq!(table.lines().count(), 3);
    }
}
