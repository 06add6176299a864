//! Depth-first search for the longest sequence over `q` symbols that is
//! nonrepetitive on every progression with difference in `K`.
//!
//! The DFS state is just the current prefix: the next node in preorder is
//! found by extending with symbol 1 or bumping the last symbol. That makes
//! checkpoints trivial to write and resume.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::checker::has_repetition_ending_at_end;
use crate::error::{Error, Result};
use crate::model::{DifferenceSet, Symbol};

pub const DEFAULT_BUDGET: u64 = 100_000_000;
pub const CHECKPOINT_EVERY: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub max_length: usize,
    /// Lexicographically least sequence of length `max_length`.
    pub witness: Vec<Symbol>,
    /// The answer is final: the tree was exhausted or the cap was reached.
    pub exhausted: bool,
    pub nodes: u64,
}

/// Resumable DFS state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub q: usize,
    pub diffs: DifferenceSet,
    pub length_cap: usize,
    pub prefix: Vec<Symbol>,
    pub best: Vec<Symbol>,
    pub nodes: u64,
    pub done: bool,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("checkpoint serializes");
        // write-then-rename so an interrupted save leaves the old checkpoint
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text)
            .and_then(|_| fs::rename(&tmp, path))
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

pub struct Search {
    state: Checkpoint,
    budget: u64,
    checkpoint_path: Option<std::path::PathBuf>,
    checkpoint_every: u64,
}

impl Search {
    pub fn new(q: usize, diffs: DifferenceSet, length_cap: usize) -> Self {
        Search {
            state: Checkpoint {
                q,
                diffs,
                length_cap,
                prefix: Vec::new(),
                best: Vec::new(),
                nodes: 0,
                done: false,
            },
            budget: DEFAULT_BUDGET,
            checkpoint_path: None,
            checkpoint_every: CHECKPOINT_EVERY,
        }
    }

    pub fn resume(state: Checkpoint) -> Self {
        Search {
            state,
            budget: DEFAULT_BUDGET,
            checkpoint_path: None,
            checkpoint_every: CHECKPOINT_EVERY,
        }
    }

    /// Node budget counted over the whole search, including resumed work.
    pub fn budget(mut self, nodes: u64) -> Self {
        self.budget = nodes;
        self
    }

    pub fn checkpoint_to(mut self, path: &Path, every: u64) -> Self {
        self.checkpoint_path = Some(path.to_path_buf());
        self.checkpoint_every = every.max(1);
        self
    }

    pub fn state(&self) -> &Checkpoint {
        &self.state
    }

    fn is_valid(&self) -> bool {
        !has_repetition_ending_at_end(&self.state.prefix, &self.state.diffs)
    }

    /// Moves the last symbol to its next value, popping exhausted levels.
    /// The first symbol is pinned to 1. Returns false when the tree is done.
    fn bump(&mut self) -> bool {
        let q = self.state.q as Symbol;
        loop {
            let len = self.state.prefix.len();
            if len <= 1 {
                self.state.prefix.clear();
                return false;
            }
            let last = self.state.prefix.last_mut().expect("non-empty");
            if *last < q {
                *last += 1;
                return true;
            }
            self.state.prefix.pop();
        }
    }

    pub fn run(mut self) -> Result<SearchOutcome> {
        let st = &mut self.state;
        if st.length_cap == 0 || st.q == 0 {
            st.done = true;
        } else if st.prefix.is_empty() && !st.done && st.nodes == 0 {
            st.prefix.push(1);
            st.nodes = 1;
            st.best = st.prefix.clone();
        }
        let mut since_checkpoint = 0u64;

        while !self.state.done {
            if self.state.best.len() >= self.state.length_cap {
                self.state.done = true;
                break;
            }
            if self.state.nodes >= self.budget {
                break;
            }
            // advance to the next valid node in preorder
            let mut alive = if self.state.prefix.len() < self.state.length_cap {
                self.state.prefix.push(1);
                true
            } else {
                self.bump()
            };
            while alive {
                self.state.nodes += 1;
                since_checkpoint += 1;
                if self.is_valid() {
                    break;
                }
                alive = self.bump();
            }
            if !alive {
                self.state.done = true;
                break;
            }
            if self.state.prefix.len() > self.state.best.len() {
                self.state.best = self.state.prefix.clone();
            }
            if since_checkpoint >= self.checkpoint_every {
                since_checkpoint = 0;
                if let Some(path) = &self.checkpoint_path {
                    self.state.save(path)?;
                }
            }
        }
        if let Some(path) = &self.checkpoint_path {
            self.state.save(path)?;
        }
        Ok(SearchOutcome {
            max_length: self.state.best.len(),
            witness: self.state.best.clone(),
            exhausted: self.state.done,
            nodes: self.state.nodes,
        })
    }
}

/// Longest nonrepetitive sequence over `{1..q}` up to `length_cap`.
pub fn longest_sequence(
    q: usize,
    diffs: &DifferenceSet,
    length_cap: usize,
    budget: u64,
) -> SearchOutcome {
    Search::new(q, diffs.clone(), length_cap)
        .budget(budget)
        .run()
        .expect("no checkpoint file involved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::oracle_all_repetitions;
    use crate::model::PartialSequence;

    fn k(v: &[usize]) -> DifferenceSet {
        DifferenceSet::new(v.to_vec()).unwrap()
    }

    fn brute_force_exists(len: usize, q: u32, diffs: &DifferenceSet) -> bool {
        let total = (q as u64).pow(len as u32);
        (0..total).any(|mut code| {
            let w: Vec<Symbol> = (0..len)
                .map(|_| {
                    let s = (code % q as u64) as Symbol + 1;
                    code /= q as u64;
                    s
                })
                .collect();
            oracle_all_repetitions(&PartialSequence::from_snapshot(&w), diffs).is_empty()
        })
    }

    #[test]
    fn binary_alphabet_has_length_three() {
        let out = longest_sequence(2, &k(&[1]), 10, 1_000_000);
        assert_eq!(out.max_length, 3);
        assert_eq!(out.witness, vec![1, 2, 1]);
        assert!(out.exhausted);
    }

    #[test]
    fn three_symbols_reach_cap() {
        let out = longest_sequence(3, &k(&[1]), 100, 10_000_000);
        assert_eq!(out.max_length, 100);
        assert!(out.exhausted);
        let seq = PartialSequence::from_symbols(&out.witness).unwrap();
        assert!(oracle_all_repetitions(&seq, &k(&[1])).is_empty());
    }

    #[test]
    fn k_plus_one_symbols_dead_end() {
        // q = k + 1 forces a periodic word, which squares quickly
        let out = longest_sequence(3, &k(&[1, 2]), 50, 1_000_000);
        assert!(out.exhausted);
        assert_eq!(out.max_length, 5);
        assert!(!brute_force_exists(6, 3, &k(&[1, 2])));
        assert!(brute_force_exists(5, 3, &k(&[1, 2])));

        let out = longest_sequence(4, &k(&[1, 2, 3]), 50, 1_000_000);
        assert!(out.exhausted);
        assert_eq!(out.max_length, 6);
        assert!(!brute_force_exists(7, 4, &k(&[1, 2, 3])));
    }

    #[test]
    fn monotone_in_alphabet() {
        let diffs = k(&[1, 2]);
        let lens: Vec<usize> = (1..=4)
            .map(|q| longest_sequence(q, &diffs, 40, 5_000_000).max_length)
            .collect();
        assert!(lens.windows(2).all(|w| w[0] <= w[1]), "{lens:?}");
        assert_eq!(lens[0], 1);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let out = longest_sequence(3, &k(&[1]), 1000, 50);
        assert!(!out.exhausted);
        // the node that crosses the budget finishes its sibling scan
        assert!(out.nodes >= 50 && out.nodes < 60, "{}", out.nodes);
    }

    #[test]
    fn degenerate_inputs() {
        let out = longest_sequence(1, &k(&[1]), 10, 100);
        assert_eq!((out.max_length, out.exhausted), (1, true));
        let out = longest_sequence(3, &k(&[1]), 0, 100);
        assert_eq!((out.max_length, out.exhausted), (0, true));
    }

    #[test]
    fn resume_matches_uninterrupted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let diffs = k(&[1]);
        let whole = longest_sequence(3, &diffs, 300, 10_000_000);

        let first = Search::new(3, diffs.clone(), 300)
            .budget(150)
            .checkpoint_to(&path, 100)
            .run()
            .unwrap();
        assert!(!first.exhausted);
        let ck = Checkpoint::load(&path).unwrap();
        assert!(ck.nodes >= 150);
        let resumed = Search::resume(ck).budget(10_000_000).run().unwrap();
        assert_eq!(resumed, whole);
    }
}
