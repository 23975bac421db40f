//! Core library for planq: turns PDDL planning tasks into natural-language
//! reasoning questions with machine-checked gold answers, and scores language
//! models on them.
//!
//! The pipeline is layered bottom-up:
//!
//! * [`pddl`] parses a STRIPS (+ `:typing`) fragment of PDDL into lifted tasks.
//! * [`ground`] instantiates lifted tasks into dense-id ground tasks.
//! * [`transition`] implements exact STRIPS semantics over bit-set states.
//! * [`analysis`] derives certified facts: delete-relaxed reachability,
//!   pairwise mutexes, fact landmarks, plan justification, and a brute-force
//!   breadth-first oracle used for auditing.
//! * [`sample`] finds plans and samples states along them.
//! * [`render`] maps states, facts, and actions to natural language through
//!   per-domain template files, and parses action names back.
//! * [`taskgen`] builds the seven question families with certified gold labels.
//! * [`dataset`] reads and writes JSON Lines datasets.
//! * [`eval`] builds prompts, queries model endpoints, extracts answers, and
//!   aggregates accuracy reports.
//! * [`verify`] replays every emitted gold label against the oracle.

pub mod analysis;
pub mod bitset;
pub mod dataset;
pub mod eval;
pub mod ground;
pub mod pddl;
pub mod render;
pub mod sample;
pub mod seed;
pub mod taskgen;
pub mod transition;
pub mod verify;

/// Version stamp written into dataset headers; bumped when record semantics change.
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");
