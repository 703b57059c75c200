//! Committed benchmark fixtures, embedded so library consumers and the
//! instance generators share one authoritative copy. Conventions are
//! documented in `fixtures/README.md`.

pub const BLOCKS_DOMAIN: &str = include_str!("../fixtures/domains/blocks.pddl");
pub const CONTAINERS_DOMAIN: &str = include_str!("../fixtures/domains/containers.pddl");

pub const BLOCKS_PROBLEM_1: &str = include_str!("../fixtures/problems/blocks-1.pddl");
pub const BLOCKS_PROBLEM_2: &str = include_str!("../fixtures/problems/blocks-2.pddl");
pub const CONTAINERS_PROBLEM_GOAL1: &str =
    include_str!("../fixtures/problems/containers-goal1.pddl");

pub const BLOCKS_CORRIDOR_RULES: &str = include_str!("../fixtures/rules/blocks-corridor.sexp");
pub const CONTAINERS_LID_RULES: &str = include_str!("../fixtures/rules/containers-lid.sexp");
