//! Harness around `symbolizer-core`: the VLM grounding client with its
//! deterministic mock, dataset and report formats, evaluation sweeps,
//! and the command-line interface.

pub mod cli;
pub mod config;
pub mod eval;
pub mod formats;
pub mod grounder;
pub mod vlm;

pub use symbolizer_core as core;
