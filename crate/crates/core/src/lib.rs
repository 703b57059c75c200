//! Plan-first task-and-motion planning: a PDDL front end, SAT-encoded task
//! planning with declarative feasibility constraints, deterministic
//! geometric refinement oracles, and the benchmark harness around them.

pub mod bench;
pub mod constraints;
pub mod fixtures;
pub mod grounding;
pub mod pddl;
pub mod refine;
pub mod sat;
pub mod satplan;
pub mod sexpr;
pub mod tamp;
pub mod vrm;
