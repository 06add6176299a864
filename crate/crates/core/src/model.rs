//! Sequence and list data model shared by every other module.
//!
//! Positions are 1-based throughout the public API. Internally cells are
//! stored in a zero-based vector.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A canonical symbol. Values start at 1; 0 only ever appears in serialized
/// snapshots, where it marks an unassigned cell.
pub type Symbol = u32;

/// Positions `first, first + d, ..., first + (count - 1)d`, all of which must
/// lie in `1..=n`.
pub fn ap_positions(first: usize, d: usize, count: usize, n: usize) -> Result<Vec<usize>> {
    if first == 0 || d == 0 {
        return Err(Error::Range(format!(
            "progression needs first >= 1 and d >= 1, got first={first} d={d}"
        )));
    }
    if count > 0 && first + (count - 1) * d > n {
        return Err(Error::Range(format!(
            "progression {first} + {}*{d} leaves 1..={n}",
            count - 1
        )));
    }
    Ok((0..count).map(|t| first + t * d).collect())
}

/// A repeated block `XX` read along the progression with difference `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Repetition {
    pub first: usize,
    pub d: usize,
    pub h: usize,
}

impl Repetition {
    pub fn new(first: usize, d: usize, h: usize) -> Self {
        debug_assert!(first >= 1 && d >= 1 && h >= 1);
        Repetition { first, d, h }
    }

    /// Last position of the second half, `first + (2h - 1)d`.
    pub fn last(&self) -> usize {
        self.first + (2 * self.h - 1) * self.d
    }

    /// Last position of the first half, `first + (h - 1)d`.
    pub fn first_half_end(&self) -> usize {
        self.first + (self.h - 1) * self.d
    }

    pub fn second_half_start(&self) -> usize {
        self.first + self.h * self.d
    }

    pub fn first_half(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.h).map(move |t| self.first + t * self.d)
    }

    pub fn second_half(&self) -> impl Iterator<Item = usize> + '_ {
        let start = self.second_half_start();
        (0..self.h).map(move |t| start + t * self.d)
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..2 * self.h).map(move |t| self.first + t * self.d)
    }

    pub fn contains(&self, pos: usize) -> bool {
        pos >= self.first && pos <= self.last() && (pos - self.first).is_multiple_of(self.d)
    }

    /// True when every cell of both halves is assigned and the halves agree
    /// position by position.
    pub fn holds_in(&self, seq: &PartialSequence) -> bool {
        if self.last() > seq.len() {
            return false;
        }
        self.first_half()
            .zip(self.second_half())
            .all(|(a, b)| matches!((seq.get(a), seq.get(b)), (Some(x), Some(y)) if x == y))
    }
}

impl fmt::Display for Repetition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.first, self.d, self.h)
    }
}

/// Positions `1..=n`, each unassigned or holding a symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialSequence {
    cells: Vec<Option<Symbol>>,
}

impl PartialSequence {
    /// All `n` cells unassigned.
    pub fn empty(n: usize) -> Self {
        PartialSequence {
            cells: vec![None; n],
        }
    }

    /// A fully assigned sequence. Symbols must be nonzero.
    pub fn from_symbols(symbols: &[Symbol]) -> Result<Self> {
        if symbols.contains(&0) {
            return Err(Error::Parse(
                "symbol 0 is reserved for unassigned cells".into(),
            ));
        }
        Ok(PartialSequence {
            cells: symbols.iter().copied().map(Some).collect(),
        })
    }

    /// Reads a snapshot where 0 marks an unassigned cell.
    pub fn from_snapshot(values: &[Symbol]) -> Self {
        PartialSequence {
            cells: values.iter().map(|&v| (v != 0).then_some(v)).collect(),
        }
    }

    pub fn snapshot(&self) -> Vec<Symbol> {
        self.cells.iter().map(|c| c.unwrap_or(0)).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Symbol at 1-based position `pos`; `None` if unassigned or out of range.
    #[inline]
    pub fn get(&self, pos: usize) -> Option<Symbol> {
        if pos == 0 {
            return None;
        }
        self.cells.get(pos - 1).copied().flatten()
    }

    #[inline]
    pub fn is_assigned(&self, pos: usize) -> bool {
        self.get(pos).is_some()
    }

    pub fn assign(&mut self, pos: usize, symbol: Symbol) {
        assert!(symbol != 0, "symbol 0 is reserved");
        assert!(pos >= 1 && pos <= self.len(), "position {pos} out of range");
        self.cells[pos - 1] = Some(symbol);
    }

    pub fn clear(&mut self, pos: usize) {
        assert!(pos >= 1 && pos <= self.len(), "position {pos} out of range");
        self.cells[pos - 1] = None;
    }

    pub fn assigned_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    /// Smallest unassigned position, or `None` when the sequence is complete.
    pub fn first_unassigned(&self) -> Option<usize> {
        self.first_unassigned_from(1)
    }

    /// Smallest unassigned position that is `>= from`.
    pub fn first_unassigned_from(&self, from: usize) -> Option<usize> {
        let start = from.max(1) - 1;
        self.cells
            .get(start..)?
            .iter()
            .position(Option::is_none)
            .map(|p| p + start + 1)
    }

    /// The symbols, if every cell is assigned.
    pub fn symbols(&self) -> Option<Vec<Symbol>> {
        self.cells.iter().copied().collect()
    }

    /// Parses the one-line text format: space-separated non-negative integers,
    /// 0 for an unassigned cell.
    pub fn parse_text(text: &str) -> Result<Self> {
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<Symbol>()
                    .map_err(|_| Error::Parse(format!("not a non-negative integer: {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_snapshot(&values))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * 3);
        for (idx, v) in self.snapshot().iter().enumerate() {
            if idx > 0 {
                out.push(' ');
            }
            out.push_str(&v.to_string());
        }
        out
    }
}

impl fmt::Display for PartialSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The set `K` of allowed common differences, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DifferenceSet(Vec<usize>);

impl DifferenceSet {
    pub fn new(mut differences: Vec<usize>) -> Result<Self> {
        if differences.is_empty() {
            return Err(Error::Config("difference set is empty".into()));
        }
        if differences.contains(&0) {
            return Err(Error::Config("differences must be positive".into()));
        }
        differences.sort_unstable();
        let before = differences.len();
        differences.dedup();
        if differences.len() != before {
            return Err(Error::Config("duplicate difference".into()));
        }
        Ok(DifferenceSet(differences))
    }

    /// `{1, ..., k}`.
    pub fn up_to(k: usize) -> Result<Self> {
        Self::new((1..=k).collect())
    }

    /// Comma-separated list, e.g. `2,5,9`.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let diffs = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad difference {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(diffs)
    }

    /// `k = |K|`.
    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, d: usize) -> bool {
        self.0.binary_search(&d).is_ok()
    }

    /// Smallest list size covered by the theorem, `ceil(2k + 10 sqrt(k))`.
    pub fn theorem_list_size(&self) -> usize {
        theorem_list_size(self.k())
    }
}

impl TryFrom<Vec<usize>> for DifferenceSet {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        DifferenceSet::new(v)
    }
}

impl From<DifferenceSet> for Vec<usize> {
    fn from(k: DifferenceSet) -> Self {
        k.0
    }
}

impl fmt::Display for DifferenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `ceil(2k + 10 sqrt(k))`.
pub fn theorem_list_size(k: usize) -> usize {
    let k = k as f64;
    // 2k + 10 sqrt(k) is an integer exactly when k is a perfect square;
    // round first so float noise cannot push it up by one.
    let exact = 2.0 * k + 10.0 * k.sqrt();
    let rounded = exact.round();
    if (exact - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        exact.ceil() as usize
    }
}

/// One finite symbol list per position, each sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Symbol>>", into = "Vec<Vec<Symbol>>")]
pub struct ListAssignment(Vec<Vec<Symbol>>);

impl ListAssignment {
    pub fn new(mut lists: Vec<Vec<Symbol>>) -> Result<Self> {
        for (idx, list) in lists.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(Error::Config(format!("list L_{} is empty", idx + 1)));
            }
            if list.contains(&0) {
                return Err(Error::Config(format!(
                    "list L_{} contains symbol 0",
                    idx + 1
                )));
            }
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return Err(Error::Config(format!("list L_{} has duplicates", idx + 1)));
            }
        }
        Ok(ListAssignment(lists))
    }

    /// Every position gets `{1, ..., q}`.
    pub fn uniform(n: usize, q: usize) -> Self {
        assert!(q >= 1, "lists must be non-empty");
        let list: Vec<Symbol> = (1..=q as Symbol).collect();
        ListAssignment(vec![list; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `L_pos`, 1-based.
    pub fn list(&self, pos: usize) -> &[Symbol] {
        &self.0[pos - 1]
    }

    pub fn min_size(&self) -> usize {
        self.0.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("lists serialize")
    }
}

impl TryFrom<Vec<Vec<Symbol>>> for ListAssignment {
    type Error = Error;
    fn try_from(v: Vec<Vec<Symbol>>) -> Result<Self> {
        ListAssignment::new(v)
    }
}

impl From<ListAssignment> for Vec<Vec<Symbol>> {
    fn from(l: ListAssignment) -> Self {
        l.0
    }
}

/// Bijection between arbitrary labels and canonical symbols `1..=q`, in
/// order of first appearance.
#[derive(Clone, Debug, Default)]
pub struct Relabeling {
    to_symbol: HashMap<String, Symbol>,
    labels: Vec<String>,
}

impl Relabeling {
    pub fn new() -> Self {
        Self::default()
    }

    /// Symbol for `label`, allocating the next one on first sight.
    pub fn symbol(&mut self, label: &str) -> Symbol {
        if let Some(&s) = self.to_symbol.get(label) {
            return s;
        }
        self.labels.push(label.to_owned());
        let s = self.labels.len() as Symbol;
        self.to_symbol.insert(label.to_owned(), s);
        s
    }

    pub fn label(&self, symbol: Symbol) -> Option<&str> {
        let idx = (symbol as usize).checked_sub(1)?;
        self.labels.get(idx).map(String::as_str)
    }

    pub fn alphabet_size(&self) -> usize {
        self.labels.len()
    }

    /// Relabels a whitespace-separated word of arbitrary tokens.
    pub fn encode_word(&mut self, text: &str) -> PartialSequence {
        let symbols: Vec<Symbol> = text.split_whitespace().map(|t| self.symbol(t)).collect();
        PartialSequence::from_symbols(&symbols).expect("relabeled symbols are nonzero")
    }
}
