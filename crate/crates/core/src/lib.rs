//! Sequences that are nonrepetitive on arithmetic progressions.
//!
//! A sequence is nonrepetitive with respect to a difference set `K` when no
//! progression `s_i, s_{i+d}, s_{i+2d}, ...` with `d` in `K` contains a block
//! `XX`. This crate provides:
//!
//! * [`checker`]: repetition detection, the generator's canonical choice of
//!   repetition, and a brute-force reference;
//! * [`generator`]: the randomized erase-and-retry construction over
//!   per-position symbol lists, with full execution traces;
//! * [`logcodec`]: the lossless run log (route, differences, orientations,
//!   ranks, final snapshot), its decoder, and the log-counting bounds;
//! * [`search`]: exhaustive DFS for the longest nonrepetitive word over a
//!   small alphabet;
//! * [`geometry`]: the same construction for point-line configurations.

pub mod checker;
pub mod error;
pub mod generator;
pub mod geometry;
pub mod logcodec;
pub mod model;
pub mod search;

pub use checker::{
    find_canonical_repetition, is_nonrepetitive, oracle_all_repetitions, repetitions_through,
    CheckMode, CheckReport,
};
pub use error::{Error, Result};
pub use generator::{
    available_symbols, generate, generate_observed, replay, ExecutionTrace, GeneratorConfig, Half,
    TraceEvent,
};
pub use logcodec::{count_logs_upper_bound, decode, encode, Log, Route};
pub use model::{
    ap_positions, theorem_list_size, DifferenceSet, ListAssignment, PartialSequence, Relabeling,
    Repetition, Symbol,
};
pub use search::{longest_sequence, SearchOutcome};
