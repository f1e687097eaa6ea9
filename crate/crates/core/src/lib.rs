//! Core building blocks for grounding-and-search task planning.
//!
//! The crate is split along the pipeline:
//!
//! * [`vocab`] — lifted relational vocabularies (types, predicate
//!   signatures), grounded objects, atoms, states, and goals, with
//!   well-typedness enforced at construction.
//! * [`schema`] — compiles a vocabulary (plus an object set) into
//!   JSON-Schema constraint documents for structured model output, and
//!   validates/decodes constrained output back into domain values.
//! * [`sim`] — symbolic environments (Blocksworld, Hanoi, Hanoi-Color)
//!   exposed to the planner only as black-box successor generators.
//! * [`planner`] — domain-independent forward search: greedy best-first
//!   with goal-count heuristic and novelty tie-breaking, a BFS oracle,
//!   and A* for model-based planning.
//! * [`pddl`] — a STRIPS+typing subset parser, problem emission, action
//!   grounding, and application.
//!
//! `no_std` compatible with `alloc`; the `std` feature (default) adds
//! wall-clock search budgets and `std::error::Error` impls.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod pddl;
pub mod planner;
pub mod schema;
pub mod sim;
pub mod vocab;
