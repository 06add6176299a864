//! Nonrepetitive colorings of point-line configurations.
//!
//! Lines are ordered lists of point indices; only the incidence structure
//! matters. Coloring runs the same erase-and-retry loop as the generator,
//! with each line playing the role of a progression.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checker::{canonical_key, find_canonical_repetition, is_nonrepetitive, CheckMode};
use crate::error::{Error, Result};
use crate::model::{theorem_list_size, DifferenceSet, PartialSequence, Repetition, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    /// Points are `1..=points`.
    pub points: usize,
    /// Each line lists its points in order along the line.
    pub lines: Vec<Vec<usize>>,
    /// Processing order; defaults to `1..=points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

impl Configuration {
    pub fn new(points: usize, lines: Vec<Vec<usize>>) -> Result<Self> {
        let cfg = Configuration {
            points,
            lines,
            order: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Result<Self> {
        self.order = Some(order);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (li, line) in self.lines.iter().enumerate() {
            let mut seen = vec![false; self.points + 1];
            for &p in line {
                if p == 0 || p > self.points {
                    return Err(Error::Config(format!(
                        "line {} has point {p} outside 1..={}",
                        li + 1,
                        self.points
                    )));
                }
                if seen[p] {
                    return Err(Error::Config(format!("line {} repeats point {p}", li + 1)));
                }
                seen[p] = true;
            }
        }
        if let Some(order) = &self.order {
            let mut seen = vec![false; self.points + 1];
            if order.len() != self.points {
                return Err(Error::Config("order must list every point once".into()));
            }
            for &p in order {
                if p == 0 || p > self.points || seen[p] {
                    return Err(Error::Config("order must list every point once".into()));
                }
                seen[p] = true;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Configuration =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }

    /// A `rows x cols` grid, points numbered row-major, with every row and
    /// every column as a line.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let at = |r: usize, c: usize| r * cols + c + 1;
        let mut lines: Vec<Vec<usize>> = (0..rows)
            .map(|r| (0..cols).map(|c| at(r, c)).collect())
            .collect();
        lines.extend((0..cols).map(|c| (0..rows).map(|r| at(r, c)).collect()));
        Configuration {
            points: rows * cols,
            lines,
            order: None,
        }
    }

    /// A single line through points `1..=n` in order.
    pub fn single_line(n: usize) -> Self {
        Configuration {
            points: n,
            lines: if n == 0 {
                vec![]
            } else {
                vec![(1..=n).collect()]
            },
            order: None,
        }
    }

    fn processing_order(&self) -> Vec<usize> {
        self.order
            .clone()
            .unwrap_or_else(|| (1..=self.points).collect())
    }

    /// For every point, the `(line, 1-based position on line)` pairs through it.
    fn incidences(&self) -> Vec<Vec<(usize, usize)>> {
        let mut inc = vec![Vec::new(); self.points + 1];
        for (li, line) in self.lines.iter().enumerate() {
            for (pos, &p) in line.iter().enumerate() {
                inc[p].push((li, pos + 1));
            }
        }
        inc
    }
}

/// Number of lines through the busiest point.
pub fn max_incidence(cfg: &Configuration) -> usize {
    let mut count = vec![0usize; cfg.points + 1];
    for line in &cfg.lines {
        for &p in line {
            count[p] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

/// Color count the guarantee asks for, `ceil(2I + 10 sqrt(I))`.
pub fn required_colors(incidence: usize) -> usize {
    theorem_list_size(incidence)
}

/// A repetition on one line, in that line's own coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineWitness {
    /// 1-based line index.
    pub line: usize,
    pub rep: Repetition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub nonrepetitive: bool,
    pub witnesses: Vec<LineWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringRun {
    /// Color of point `p` at index `p - 1`.
    pub colors: Vec<Symbol>,
    pub choices: usize,
    pub erasures: usize,
}

fn line_word(line: &[usize], colors: &[Option<Symbol>]) -> PartialSequence {
    let snapshot: Vec<Symbol> = line.iter().map(|&p| colors[p].unwrap_or(0)).collect();
    PartialSequence::from_snapshot(&snapshot)
}

/// Colors every point from `{1..colors}` so that no line carries a
/// repetition. Each step colors the earliest uncolored point in the
/// processing order, avoiding the colors of its immediate neighbors on every
/// line through it.
pub fn color_configuration(
    cfg: &Configuration,
    colors: usize,
    seed: u64,
    max_choices: usize,
) -> Result<ColoringRun> {
    cfg.validate()?;
    let incidence = cfg.incidences();
    let order = cfg.processing_order();
    let i_max = max_incidence(cfg);
    if colors < 2 * i_max + 1 {
        return Err(Error::Config(format!(
            "{colors} colors leave none free at a point on {i_max} lines"
        )));
    }
    let unit = DifferenceSet::up_to(1).expect("{1}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state: Vec<Option<Symbol>> = vec![None; cfg.points + 1];
    let mut choices = 0usize;
    let mut erasures = 0usize;
    let mut cursor = 0usize; // everything before order[cursor] is colored

    while cursor < order.len() {
        let p = order[cursor];
        if state[p].is_some() {
            cursor += 1;
            continue;
        }
        if choices >= max_choices {
            return Err(Error::BudgetExceeded { cap: max_choices });
        }
        let mut forbidden: Vec<Symbol> = Vec::new();
        for &(li, pos) in &incidence[p] {
            let line = &cfg.lines[li];
            if pos > 1 {
                forbidden.extend(state[line[pos - 2]]);
            }
            if pos < line.len() {
                forbidden.extend(state[line[pos]]);
            }
        }
        let available: Vec<Symbol> = (1..=colors as Symbol)
            .filter(|c| !forbidden.contains(c))
            .collect();
        let color = available[rng.gen_range(0..available.len())];
        state[p] = Some(color);
        choices += 1;

        // longest repetition over all lines through p; ties by first index,
        // then lowest line index
        let mut best: Option<(usize, usize, Repetition)> = None;
        for &(li, pos) in &incidence[p] {
            let word = line_word(&cfg.lines[li], &state);
            if let Some(rep) = find_canonical_repetition(&word, &unit, pos) {
                let better = match &best {
                    None => true,
                    Some((_, _, cur)) => canonical_key(&rep) > canonical_key(cur),
                };
                if better {
                    best = Some((li, pos, rep));
                }
            }
        }
        if let Some((li, pos, rep)) = best {
            let line = &cfg.lines[li];
            let start = if pos <= rep.first_half_end() {
                rep.first
            } else {
                rep.second_half_start()
            };
            for t in 0..rep.h {
                let point = line[start + t * rep.d - 1];
                state[point] = None;
            }
            erasures += 1;
            cursor = 0;
        } else {
            cursor += 1;
        }
    }

    Ok(ColoringRun {
        colors: state[1..].iter().map(|c| c.expect("all colored")).collect(),
        choices,
        erasures,
    })
}

/// Checks every line's color word for repetitions.
pub fn verify_coloring(cfg: &Configuration, colors: &[Symbol]) -> Result<GeometryReport> {
    if colors.len() != cfg.points {
        return Err(Error::Parse(format!(
            "{} colors for {} points",
            colors.len(),
            cfg.points
        )));
    }
    if let Some(p) = colors.iter().position(|&c| c == 0) {
        return Err(Error::Parse(format!("point {} is uncolored", p + 1)));
    }
    let unit = DifferenceSet::up_to(1).expect("{1}");
    let mut witnesses = Vec::new();
    for (li, line) in cfg.lines.iter().enumerate() {
        let word: Vec<Symbol> = line.iter().map(|&p| colors[p - 1]).collect();
        let report = is_nonrepetitive(
            &PartialSequence::from_snapshot(&word),
            &unit,
            CheckMode::Exhaustive,
        );
        witnesses.extend(
            report
                .witnesses
                .into_iter()
                .map(|rep| LineWitness { line: li + 1, rep }),
        );
    }
    Ok(GeometryReport {
        nonrepetitive: witnesses.is_empty(),
        witnesses,
    })
}
