//! Lossless record of a generator run and its inverse.
//!
//! A run is encoded as a [`Log`]: a Dyck route with one up-step per choice
//! and one down-step per cleared cell (plus one per cell still assigned at
//! the end), and per erasure its difference, which half went, and where the
//! just-set cell sat in that half. [`decode`] recovers every random rank from
//! the log and the configuration alone.

mod bound;

pub use bound::{
    block_product_base, catalan, compression_margin, count_logs_upper_bound, crossing_m,
    log2_catalan, log2_catalan_exact, log2_catalan_stirling, BLOCK_BOUND, STIRLING_SWITCHOVER,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{available_symbols, ExecutionTrace, GeneratorConfig, Half, TraceEvent};
use crate::model::{PartialSequence, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Up,
    Down,
}

/// A lattice path of up and down steps.
///
/// Serialized run-length encoded: positive entries are runs of up-steps,
/// negative entries runs of down-steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Route {
    steps: Vec<Step>,
}

/// A maximal run of down-steps that starts right after an up-step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Peak {
    /// Index of the first down-step of the run.
    pub at: usize,
    pub downs: usize,
}

impl Route {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: Step, count: usize) {
        self.steps.extend(std::iter::repeat_n(step, count));
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn ups(&self) -> usize {
        self.steps.iter().filter(|s| **s == Step::Up).count()
    }

    /// Lowest height reached, and the final height.
    pub fn heights(&self) -> (i64, i64) {
        let mut h = 0i64;
        let mut min = 0i64;
        for s in &self.steps {
            h += if *s == Step::Up { 1 } else { -1 };
            min = min.min(h);
        }
        (min, h)
    }

    /// Never below zero and back to zero at the end.
    pub fn is_dyck(&self) -> bool {
        self.heights() == (0, 0)
    }

    /// Peaks among the first `prefix` steps.
    pub fn peaks_in_prefix(&self, prefix: usize) -> Vec<Peak> {
        let steps = &self.steps[..prefix.min(self.steps.len())];
        let mut out = Vec::new();
        let mut i = 0;
        while i < steps.len() {
            if steps[i] == Step::Down && i > 0 && steps[i - 1] == Step::Up {
                let start = i;
                while i < steps.len() && steps[i] == Step::Down {
                    i += 1;
                }
                out.push(Peak {
                    at: start,
                    downs: i - start,
                });
            } else {
                i += 1;
            }
        }
        out
    }

    pub fn peaks(&self) -> Vec<Peak> {
        self.peaks_in_prefix(self.steps.len())
    }

    pub fn run_lengths(&self) -> Vec<i64> {
        let mut out: Vec<i64> = Vec::new();
        for s in &self.steps {
            let unit = if *s == Step::Up { 1 } else { -1 };
            match out.last_mut() {
                Some(last) if last.signum() == unit => *last += unit,
                _ => out.push(unit),
            }
        }
        out
    }
}

impl TryFrom<Vec<i64>> for Route {
    type Error = Error;
    fn try_from(runs: Vec<i64>) -> Result<Self> {
        let mut r = Route::new();
        for run in runs {
            if run == 0 {
                return Err(Error::Parse("route run of length 0".into()));
            }
            let step = if run > 0 { Step::Up } else { Step::Down };
            r.push(step, run.unsigned_abs() as usize);
        }
        Ok(r)
    }
}

impl From<Route> for Vec<i64> {
    fn from(r: Route) -> Self {
        r.run_lengths()
    }
}

/// The pentad recording a run: route, per-erasure difference, orientation
/// and rank, and the final snapshot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Log {
    #[serde(rename = "R")]
    pub route: Route,
    /// Difference of each erased repetition.
    #[serde(rename = "D")]
    pub diffs: Vec<usize>,
    /// `+1` when the first half was erased, `-1` for the second.
    #[serde(rename = "O")]
    pub orientations: Vec<i8>,
    /// 1-based rank of the just-set cell inside the erased half.
    #[serde(rename = "P")]
    pub ranks: Vec<usize>,
    /// Final sequence, 0 for unassigned.
    #[serde(rename = "S")]
    pub snapshot: Vec<Symbol>,
}

impl Log {
    /// Choices recorded, `M`.
    pub fn choices(&self) -> usize {
        self.route.ups()
    }

    /// Number of down-steps appended after the run, one per assigned cell.
    pub fn trailing_downs(&self) -> usize {
        self.snapshot.iter().filter(|&&v| v != 0).count()
    }

    /// Peaks produced by erasures, i.e. excluding the trailing down-steps.
    pub fn erasure_peaks(&self) -> Vec<Peak> {
        let body = self.route.len().saturating_sub(self.trailing_downs());
        self.route.peaks_in_prefix(body)
    }

    /// Checks the structural invariants of an encoded run. Returns a
    /// description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if !self.route.is_dyck() {
            return Err(format!("route heights {:?}", self.route.heights()));
        }
        let m = self.choices();
        if self.route.len() != 2 * m {
            return Err(format!("route has {} steps for M = {m}", self.route.len()));
        }
        let peaks = self.erasure_peaks();
        if peaks.len() != self.diffs.len()
            || peaks.len() != self.orientations.len()
            || peaks.len() != self.ranks.len()
        {
            return Err(format!(
                "{} peaks but |D|={} |O|={} |P|={}",
                peaks.len(),
                self.diffs.len(),
                self.orientations.len(),
                self.ranks.len()
            ));
        }
        if 2 * peaks.len() > m {
            return Err(format!("{} peaks exceeds M/2 = {}", peaks.len(), m / 2));
        }
        if let Some(p) = peaks.iter().find(|p| p.downs < 2) {
            return Err(format!("peak at step {} erases {} cell", p.at, p.downs));
        }
        let erased: usize = peaks.iter().map(|p| p.downs).sum();
        if erased > m {
            return Err(format!("{erased} cells erased but only {m} written"));
        }
        for (p, peak) in self.ranks.iter().zip(&peaks) {
            if *p == 0 || *p > peak.downs {
                return Err(format!("rank {p} outside 1..={}", peak.downs));
            }
        }
        if self.orientations.iter().any(|o| *o != 1 && *o != -1) {
            return Err("orientation other than +1/-1".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("log serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Encodes a recorded run into its log.
pub fn encode(trace: &ExecutionTrace) -> Result<Log> {
    let mut route = Route::new();
    let mut diffs = Vec::new();
    let mut orientations = Vec::new();
    let mut ranks = Vec::new();
    let mut after_choice = false;

    for (idx, ev) in trace.events.iter().enumerate() {
        match ev {
            TraceEvent::Choice { .. } => {
                route.push(Step::Up, 1);
                after_choice = true;
            }
            TraceEvent::Erasure {
                rep,
                erased_half,
                rank_of_just_set,
            } => {
                if !after_choice {
                    return Err(Error::Corruption(format!(
                        "event {idx}: erasure not preceded by a choice"
                    )));
                }
                if *rank_of_just_set == 0 || *rank_of_just_set > rep.h {
                    return Err(Error::Corruption(format!(
                        "event {idx}: rank {rank_of_just_set} outside 1..={}",
                        rep.h
                    )));
                }
                route.push(Step::Down, rep.h);
                diffs.push(rep.d);
                orientations.push(match erased_half {
                    Half::First => 1,
                    Half::Second => -1,
                });
                ranks.push(*rank_of_just_set);
                after_choice = false;
            }
        }
    }
    let snapshot = trace.final_seq.snapshot();
    let assigned = trace.final_seq.assigned_count();
    route.push(Step::Down, assigned);

    let log = Log {
        route,
        diffs,
        orientations,
        ranks,
        snapshot,
    };
    if log.choices() != trace.choices || !log.route.is_dyck() {
        return Err(Error::Corruption(
            "trace events do not account for the final sequence".into(),
        ));
    }
    Ok(log)
}

/// What the forward pass learns about one erasure.
#[derive(Clone, Copy, Debug)]
struct ErasureInfo {
    start: usize,
    d: usize,
    len: usize,
    orientation: i8,
}

enum Replayed {
    Choice(usize),
    Erasure(ErasureInfo),
}

/// Recovers the zero-based ranks `r_1..r_M` chosen during the run that
/// produced `log`.
///
/// The forward pass walks the route with `D` and `P` to learn where every
/// choice landed and which cells each erasure cleared. The backward pass
/// starts from `S`, undoes erasures by copying the surviving half back over
/// the erased one, and reads each choice's symbol before clearing it, looking
/// its rank up in the available list of that moment.
pub fn decode(log: &Log, cfg: &GeneratorConfig) -> Result<Vec<usize>> {
    let n = cfg.n;
    if log.snapshot.len() != n {
        return Err(Error::Decode(format!(
            "snapshot has {} cells, config says {n}",
            log.snapshot.len()
        )));
    }
    let trailing = log.trailing_downs();
    let steps = log.route.steps();
    if trailing > steps.len()
        || steps[steps.len() - trailing..]
            .iter()
            .any(|s| *s != Step::Down)
    {
        return Err(Error::Decode(
            "route does not end with one down-step per assigned cell".into(),
        ));
    }
    let body = &steps[..steps.len() - trailing];

    // forward pass
    let mut assigned = vec![false; n + 1];
    let mut smallest_hole = 1usize;
    let mut history: Vec<Replayed> = Vec::new();
    let mut last_set: Option<usize> = None;
    let mut peak = 0usize;
    let mut i = 0usize;
    while i < body.len() {
        match body[i] {
            Step::Up => {
                while smallest_hole <= n && assigned[smallest_hole] {
                    smallest_hole += 1;
                }
                if smallest_hole > n {
                    return Err(Error::Decode(format!(
                        "up-step {i} with no unassigned cell"
                    )));
                }
                assigned[smallest_hole] = true;
                last_set = Some(smallest_hole);
                history.push(Replayed::Choice(smallest_hole));
                i += 1;
            }
            Step::Down => {
                let just_set = last_set.take().ok_or_else(|| {
                    Error::Decode(format!("down-run at step {i} does not follow an up-step"))
                })?;
                let mut len = 0;
                while i < body.len() && body[i] == Step::Down {
                    len += 1;
                    i += 1;
                }
                let (&d, &orientation, &rank) = match (
                    log.diffs.get(peak),
                    log.orientations.get(peak),
                    log.ranks.get(peak),
                ) {
                    (Some(d), Some(o), Some(p)) => (d, o, p),
                    _ => {
                        return Err(Error::Decode(format!(
                            "no D/O/P entry for peak {}",
                            peak + 1
                        )))
                    }
                };
                if !cfg.diffs.contains(d) {
                    return Err(Error::Decode(format!("difference {d} not in K")));
                }
                if orientation != 1 && orientation != -1 {
                    return Err(Error::Decode(format!("orientation {orientation}")));
                }
                if rank == 0 || rank > len || just_set <= (rank - 1) * d {
                    return Err(Error::Decode(format!(
                        "rank {rank} impossible for peak {}",
                        peak + 1
                    )));
                }
                let start = just_set - (rank - 1) * d;
                let end = start + (len - 1) * d;
                if end > n {
                    return Err(Error::Decode(format!(
                        "peak {} erases beyond {n}",
                        peak + 1
                    )));
                }
                for p in (start..=end).step_by(d) {
                    if !assigned[p] {
                        return Err(Error::Decode(format!(
                            "peak {} erases unassigned {p}",
                            peak + 1
                        )));
                    }
                    assigned[p] = false;
                }
                smallest_hole = smallest_hole.min(start);
                history.push(Replayed::Erasure(ErasureInfo {
                    start,
                    d,
                    len,
                    orientation,
                }));
                peak += 1;
            }
        }
    }
    if peak != log.diffs.len() || peak != log.orientations.len() || peak != log.ranks.len() {
        return Err(Error::Decode(format!(
            "{peak} peaks but D/O/P lengths differ"
        )));
    }
    for (p, &sym) in (1..=n).zip(&log.snapshot) {
        if assigned[p] != (sym != 0) {
            return Err(Error::Decode(format!(
                "assigned cells disagree with S at {p}"
            )));
        }
    }

    // backward pass
    let mut seq = PartialSequence::from_snapshot(&log.snapshot);
    let mut ranks = Vec::with_capacity(log.choices());
    for item in history.iter().rev() {
        match *item {
            Replayed::Erasure(e) => {
                // the surviving half sits o * len * d away from the erased one
                let shift = (e.len * e.d) as isize * e.orientation as isize;
                for t in 0..e.len {
                    let p = e.start + t * e.d;
                    let src = p as isize + shift;
                    let sym = usize::try_from(src)
                        .ok()
                        .and_then(|s| seq.get(s))
                        .ok_or_else(|| Error::Decode(format!("no surviving symbol for {p}")))?;
                    seq.assign(p, sym);
                }
            }
            Replayed::Choice(pos) => {
                let sym = seq
                    .get(pos)
                    .ok_or_else(|| Error::Decode(format!("choice at {pos} has no symbol")))?;
                seq.clear(pos);
                let available = available_symbols(&seq, &cfg.lists, &cfg.diffs, pos)
                    .map_err(|e| Error::Decode(e.to_string()))?;
                let rank = available
                    .binary_search(&sym)
                    .map_err(|_| Error::Decode(format!("symbol {sym} not available at {pos}")))?;
                ranks.push(rank);
            }
        }
    }
    ranks.reverse();
    Ok(ranks)
}
