//! Repetition detection along arithmetic progressions.
//!
//! A repetition only counts when all `2h` of its cells are assigned. The
//! fast routines work on runs of "matching" cells: for a fixed difference
//! `d` and half-length `h`, position `p` matches when `s[p] == s[p + hd]`,
//! and a repetition starts at `first` exactly when `first, first + d, ...,
//! first + (h - 1)d` all match.

use serde::{Deserialize, Serialize};

use crate::model::{DifferenceSet, PartialSequence, Repetition, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// Stop at the first repetition found.
    Fast,
    /// List every repetition, sorted by `(first, d, h)`.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub nonrepetitive: bool,
    pub witnesses: Vec<Repetition>,
}

impl CheckReport {
    fn from_witnesses(witnesses: Vec<Repetition>) -> Self {
        CheckReport {
            nonrepetitive: witnesses.is_empty(),
            witnesses,
        }
    }
}

#[inline]
fn matches(seq: &PartialSequence, p: usize, q: usize) -> bool {
    match (seq.get(p), seq.get(q)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Checks every progression with difference in `diffs`.
pub fn is_nonrepetitive(
    seq: &PartialSequence,
    diffs: &DifferenceSet,
    mode: CheckMode,
) -> CheckReport {
    let mut found = Vec::new();
    let n = seq.len();
    'outer: for d in diffs.iter() {
        for h in 1.. {
            let span = h * d;
            if 2 * span > n + d - 1 {
                // first + (2h-1)d <= n has no solution with first >= 1
                break;
            }
            for residue in 1..=d.min(n) {
                let mut run = 0usize;
                let mut p = residue;
                while p + span <= n {
                    if matches(seq, p, p + span) {
                        run += 1;
                        if run >= h {
                            found.push(Repetition::new(p - (h - 1) * d, d, h));
                            if mode == CheckMode::Fast {
                                break 'outer;
                            }
                        }
                    } else {
                        run = 0;
                    }
                    p += d;
                }
            }
        }
    }
    found.sort_unstable();
    CheckReport::from_witnesses(found)
}

/// Every repetition whose `2h` positions include `pos`.
pub fn repetitions_through(
    seq: &PartialSequence,
    diffs: &DifferenceSet,
    pos: usize,
) -> Vec<Repetition> {
    let mut out = Vec::new();
    if seq.get(pos).is_none() {
        return out;
    }
    let n = seq.len();
    for d in diffs.iter() {
        for h in 1.. {
            let span = h * d;
            if span >= n {
                break;
            }
            // pos sits in the first half (anchor = pos, partner pos + hd) or in
            // the second half (anchor = pos - hd, partner pos).
            if pos + span <= n && matches(seq, pos, pos + span) {
                collect_windows(seq, d, h, pos, &mut out);
            }
            if pos > span && matches(seq, pos - span, pos) {
                collect_windows(seq, d, h, pos - span, &mut out);
            }
        }
    }
    out
}

/// Pushes each repetition `(first, d, h)` with `anchor` among its first-half
/// positions, given that `anchor` itself matches.
fn collect_windows(
    seq: &PartialSequence,
    d: usize,
    h: usize,
    anchor: usize,
    out: &mut Vec<Repetition>,
) {
    let span = h * d;
    let n = seq.len();
    // walk left and right over matching positions, at most h - 1 steps each way
    let mut left = 0;
    while left + 1 < h {
        let Some(p) = anchor.checked_sub((left + 1) * d) else {
            break;
        };
        if p == 0 || !matches(seq, p, p + span) {
            break;
        }
        left += 1;
    }
    let mut right = 0;
    while right + 1 < h {
        let p = anchor + (right + 1) * d;
        if p + span > n || !matches(seq, p, p + span) {
            break;
        }
        right += 1;
    }
    if left + right + 1 < h {
        return;
    }
    // windows of h consecutive matching positions containing the anchor
    for start_offset in (h - 1 - right)..=left {
        out.push(Repetition::new(anchor - start_offset * d, d, h));
    }
}

/// The repetition the generator erases: largest `h`, then largest first
/// index, then smallest `d`.
///
/// The caller guarantees the sequence was repetition-free before `just_set`
/// was assigned, so every repetition passes through `just_set`.
pub fn find_canonical_repetition(
    seq: &PartialSequence,
    diffs: &DifferenceSet,
    just_set: usize,
) -> Option<Repetition> {
    repetitions_through(seq, diffs, just_set)
        .into_iter()
        .max_by_key(canonical_key)
}

/// Sort key realizing the canonical order; larger is preferred.
pub fn canonical_key(r: &Repetition) -> (usize, usize, std::cmp::Reverse<usize>) {
    (r.h, r.first, std::cmp::Reverse(r.d))
}

/// True when the fully assigned word `word` has a repetition whose last cell
/// is its final position.
pub fn has_repetition_ending_at_end(word: &[Symbol], diffs: &DifferenceSet) -> bool {
    let Some(last) = word.len().checked_sub(1) else {
        return false;
    };
    for d in diffs.iter() {
        let mut h = 1;
        while (2 * h - 1) * d <= last {
            let span = h * d;
            if (0..h).all(|t| word[last - t * d] == word[last - t * d - span]) {
                return true;
            }
            h += 1;
        }
    }
    false
}

/// Independent reference: a plain triple loop over `(first, d, h)`.
///
/// Returns every repetition with all cells assigned, in lexicographic
/// `(first, d, h)` order.
pub fn oracle_all_repetitions(seq: &PartialSequence, diffs: &DifferenceSet) -> Vec<Repetition> {
    let n = seq.len();
    let mut out = Vec::new();
    for first in 1..=n {
        for d in diffs.iter() {
            let mut h = 1;
            while first + (2 * h - 1) * d <= n {
                let mut equal = true;
                for t in 0..h {
                    let a = seq.get(first + t * d);
                    let b = seq.get(first + (h + t) * d);
                    if a.is_none() || b.is_none() || a != b {
                        equal = false;
                        break;
                    }
                }
                if equal {
                    out.push(Repetition { first, d, h });
                }
                h += 1;
            }
        }
    }
    out
}
