//! Randomized erase-and-retry construction.
//!
//! The smallest unassigned position receives a uniformly random symbol from
//! its list, minus the symbols sitting at distance `d` for each `d` in `K`.
//! If that creates a repetition, the longest one (see
//! [`find_canonical_repetition`]) loses the half containing the new symbol,
//! and the loop resumes from the smallest hole.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checker::find_canonical_repetition;
use crate::error::{Error, Result};
use crate::model::{DifferenceSet, ListAssignment, PartialSequence, Repetition, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub diffs: DifferenceSet,
    pub lists: ListAssignment,
    pub seed: u64,
    /// Maximum number of random choices before giving up.
    pub max_choices: usize,
    #[serde(default = "default_true")]
    pub record_trace: bool,
}

fn default_true() -> bool {
    true
}

impl GeneratorConfig {
    /// Uniform lists `{1, ..., ceil(2k + 10 sqrt(k))}` and the default cap
    /// `200 * n * k`.
    pub fn new(n: usize, diffs: DifferenceSet, seed: u64) -> Self {
        let q = diffs.theorem_list_size();
        Self::with_list_size(n, diffs, q, seed)
    }

    pub fn with_list_size(n: usize, diffs: DifferenceSet, q: usize, seed: u64) -> Self {
        let max_choices = default_cap(n, &diffs);
        GeneratorConfig {
            n,
            lists: ListAssignment::uniform(n, q),
            diffs,
            seed,
            max_choices,
            record_trace: true,
        }
    }

    pub fn with_lists(n: usize, diffs: DifferenceSet, lists: ListAssignment, seed: u64) -> Self {
        let max_choices = default_cap(n, &diffs);
        GeneratorConfig {
            n,
            diffs,
            lists,
            seed,
            max_choices,
            record_trace: true,
        }
    }

    pub fn max_choices(mut self, cap: usize) -> Self {
        self.max_choices = cap;
        self
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lists.len() != self.n {
            return Err(Error::Config(format!(
                "{} lists for a sequence of length {}",
                self.lists.len(),
                self.n
            )));
        }
        let need = 2 * self.diffs.k() + 1;
        if self.n > 0 && self.lists.min_size() < need {
            return Err(Error::Config(format!(
                "lists need at least 2|K| + 1 = {need} symbols, smallest has {}",
                self.lists.min_size()
            )));
        }
        if self.max_choices == 0 {
            return Err(Error::Config("choice cap must be positive".into()));
        }
        Ok(())
    }
}

fn default_cap(n: usize, diffs: &DifferenceSet) -> usize {
    (200 * n * diffs.k()).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Half {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum TraceEvent {
    /// `available[chosen_rank]` (zero-based rank) was written at `position`.
    Choice {
        position: usize,
        available: Vec<Symbol>,
        chosen_rank: usize,
    },
    /// One half of `rep` was cleared. `rank_of_just_set` is the 1-based place
    /// of the just-assigned cell within the erased half.
    Erasure {
        rep: Repetition,
        erased_half: Half,
        rank_of_just_set: usize,
    },
}

impl TraceEvent {
    /// Positions cleared by an erasure, in increasing order.
    pub fn erased_positions(&self) -> Vec<usize> {
        match self {
            TraceEvent::Choice { .. } => Vec::new(),
            TraceEvent::Erasure {
                rep, erased_half, ..
            } => match erased_half {
                Half::First => rep.first_half().collect(),
                Half::Second => rep.second_half().collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub n: usize,
    pub events: Vec<TraceEvent>,
    pub final_seq: PartialSequence,
    /// Number of choice events, `M`.
    pub choices: usize,
}

impl ExecutionTrace {
    /// Zero-based ranks of every choice, in order.
    pub fn ranks(&self) -> Vec<usize> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Choice { chosen_rank, .. } => Some(*chosen_rank),
                _ => None,
            })
            .collect()
    }

    pub fn erasure_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Erasure { .. }))
            .count()
    }

    /// Rebuilds the final sequence from the events alone, checking only the
    /// internal consistency of each event.
    pub fn apply_events(n: usize, events: &[TraceEvent]) -> Result<PartialSequence> {
        let mut seq = PartialSequence::empty(n);
        for (idx, ev) in events.iter().enumerate() {
            match ev {
                TraceEvent::Choice {
                    position,
                    available,
                    chosen_rank,
                } => {
                    let sym = available.get(*chosen_rank).ok_or_else(|| {
                        Error::Corruption(format!("event {idx}: rank {chosen_rank} out of range"))
                    })?;
                    if *position == 0 || *position > n || seq.is_assigned(*position) {
                        return Err(Error::Corruption(format!(
                            "event {idx}: cannot assign position {position}"
                        )));
                    }
                    seq.assign(*position, *sym);
                }
                TraceEvent::Erasure { rep, .. } => {
                    if rep.last() > n {
                        return Err(Error::Corruption(format!(
                            "event {idx}: repetition leaves 1..={n}"
                        )));
                    }
                    for p in ev.erased_positions() {
                        if !seq.is_assigned(p) {
                            return Err(Error::Corruption(format!(
                                "event {idx}: erasing unassigned position {p}"
                            )));
                        }
                        seq.clear(p);
                    }
                }
            }
        }
        Ok(seq)
    }

    /// Trace as JSON lines: a header line, then one event per line.
    pub fn to_json_lines(&self) -> String {
        let header = TraceHeader {
            n: self.n,
            choices: self.choices,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for ev in &self.events {
            out.push_str(&serde_json::to_string(ev).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`to_json_lines`](Self::to_json_lines). The final sequence
    /// is rebuilt from the events.
    pub fn from_json_lines(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: TraceHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Parse("empty trace file".into()))?,
        )
        .map_err(|e| Error::Parse(format!("trace header: {e}")))?;
        let events = lines
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l)
                    .map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 2)))
            })
            .collect::<Result<Vec<TraceEvent>>>()?;
        let choices = events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Choice { .. }))
            .count();
        if choices != header.choices {
            return Err(Error::Corruption(format!(
                "header announces {} choices, found {choices}",
                header.choices
            )));
        }
        let final_seq = Self::apply_events(header.n, &events)?;
        Ok(ExecutionTrace {
            n: header.n,
            events,
            final_seq,
            choices,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct TraceHeader {
    n: usize,
    choices: usize,
}

/// `L_i` minus the symbols at positions `i - d` and `i + d` for `d` in `K`
/// that lie in `1..=n`; unassigned neighbors forbid nothing.
pub fn available_symbols(
    seq: &PartialSequence,
    lists: &ListAssignment,
    diffs: &DifferenceSet,
    i: usize,
) -> Result<Vec<Symbol>> {
    if i == 0 || i > seq.len() {
        return Err(Error::Range(format!(
            "position {i} outside 1..={}",
            seq.len()
        )));
    }
    let mut forbidden: Vec<Symbol> = Vec::with_capacity(2 * diffs.k());
    for d in diffs.iter() {
        if i > d {
            forbidden.extend(seq.get(i - d));
        }
        forbidden.extend(seq.get(i + d));
    }
    let out: Vec<Symbol> = lists
        .list(i)
        .iter()
        .copied()
        .filter(|s| !forbidden.contains(s))
        .collect();
    if out.is_empty() {
        return Err(Error::Config(format!(
            "no symbol available at position {i}"
        )));
    }
    Ok(out)
}

/// What an observer sees after each event: the event and the sequence state
/// right after it.
pub struct Step<'a> {
    pub event: &'a TraceEvent,
    pub seq: &'a PartialSequence,
}

/// Outcome of a run that hit its choice cap, with the partial trace.
#[derive(Debug)]
pub struct Exhausted {
    pub trace: ExecutionTrace,
}

pub fn generate(cfg: &GeneratorConfig) -> Result<(PartialSequence, ExecutionTrace)> {
    generate_observed(cfg, |_| {})
}

/// Like [`generate`], calling `observer` after every choice and erasure.
pub fn generate_observed<F>(
    cfg: &GeneratorConfig,
    observer: F,
) -> Result<(PartialSequence, ExecutionTrace)>
where
    F: FnMut(Step<'_>),
{
    match run(cfg, observer)? {
        Ok(trace) => Ok((trace.final_seq.clone(), trace)),
        Err(_) => Err(Error::BudgetExceeded {
            cap: cfg.max_choices,
        }),
    }
}

/// Runs to completion or to the cap; on the cap the partial trace is kept.
pub fn run<F>(
    cfg: &GeneratorConfig,
    mut observer: F,
) -> Result<std::result::Result<ExecutionTrace, Exhausted>>
where
    F: FnMut(Step<'_>),
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seq = PartialSequence::empty(cfg.n);
    let mut events = Vec::new();
    let mut choices = 0usize;
    let mut next = seq.first_unassigned();

    while let Some(i) = next {
        if choices >= cfg.max_choices {
            let trace = ExecutionTrace {
                n: cfg.n,
                events,
                final_seq: seq,
                choices,
            };
            return Ok(Err(Exhausted { trace }));
        }
        let available = available_symbols(&seq, &cfg.lists, &cfg.diffs, i)?;
        let rank = rng.gen_range(0..available.len());
        seq.assign(i, available[rank]);
        choices += 1;
        let choice = TraceEvent::Choice {
            position: i,
            available,
            chosen_rank: rank,
        };
        observer(Step {
            event: &choice,
            seq: &seq,
        });
        if cfg.record_trace {
            events.push(choice);
        }

        match find_canonical_repetition(&seq, &cfg.diffs, i) {
            None => {
                next = seq.first_unassigned_from(i + 1);
            }
            Some(rep) => {
                let erasure = erase(&mut seq, rep, i);
                observer(Step {
                    event: &erasure,
                    seq: &seq,
                });
                if cfg.record_trace {
                    events.push(erasure);
                }
                // everything below i was assigned, and the lowest erased cell is <= i
                next = seq.first_unassigned();
            }
        }
    }

    Ok(Ok(ExecutionTrace {
        n: cfg.n,
        events,
        final_seq: seq,
        choices,
    }))
}

/// Clears the half of `rep` containing `just_set` and describes the erasure.
fn erase(seq: &mut PartialSequence, rep: Repetition, just_set: usize) -> TraceEvent {
    // the last cell of the first half is j - hd, with j the repetition's last cell
    let (half, start) = if just_set <= rep.first_half_end() {
        (Half::First, rep.first)
    } else {
        (Half::Second, rep.second_half_start())
    };
    let rank_of_just_set = (just_set - start) / rep.d + 1;
    let mut m = start;
    for _ in 0..rep.h {
        seq.clear(m);
        m += rep.d;
    }
    TraceEvent::Erasure {
        rep,
        erased_half: half,
        rank_of_just_set,
    }
}

/// Re-executes `trace` under `cfg`, checking each event against the state
/// it would have been produced from.
pub fn replay(trace: &ExecutionTrace, cfg: &GeneratorConfig) -> Result<PartialSequence> {
    if trace.n != cfg.n {
        return Err(Error::Corruption(format!(
            "trace length {} vs config {}",
            trace.n, cfg.n
        )));
    }
    let mut seq = PartialSequence::empty(cfg.n);
    let mut last_choice: Option<usize> = None;
    for (idx, ev) in trace.events.iter().enumerate() {
        match ev {
            TraceEvent::Choice {
                position,
                available,
                chosen_rank,
            } => {
                if seq.first_unassigned() != Some(*position) {
                    return Err(Error::Corruption(format!(
                        "event {idx}: choice at {position} is not the smallest hole"
                    )));
                }
                let expected = available_symbols(&seq, &cfg.lists, &cfg.diffs, *position)?;
                if &expected != available {
                    return Err(Error::Corruption(format!(
                        "event {idx}: available set differs at {position}"
                    )));
                }
                let sym = *available.get(*chosen_rank).ok_or_else(|| {
                    Error::Corruption(format!("event {idx}: rank {chosen_rank} out of range"))
                })?;
                seq.assign(*position, sym);
                last_choice = Some(*position);
            }
            TraceEvent::Erasure { rep, .. } => {
                let just_set = last_choice.take().ok_or_else(|| {
                    Error::Corruption(format!("event {idx}: erasure not preceded by a choice"))
                })?;
                let canonical = find_canonical_repetition(&seq, &cfg.diffs, just_set);
                if canonical != Some(*rep) {
                    return Err(Error::Corruption(format!(
                        "event {idx}: recorded {rep:?}, state gives {canonical:?}"
                    )));
                }
                let redone = erase(&mut seq, *rep, just_set);
                if &redone != ev {
                    return Err(Error::Corruption(format!(
                        "event {idx}: erasure details differ"
                    )));
                }
            }
        }
    }
    if seq != trace.final_seq {
        return Err(Error::Corruption(
            "replayed state differs from recorded final".into(),
        ));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{is_nonrepetitive, oracle_all_repetitions, CheckMode};

    fn k(v: &[usize]) -> DifferenceSet {
        DifferenceSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn available_excludes_assigned_neighbors() {
        // a b _ _ e with a..f = 1..6
        let seq = PartialSequence::from_snapshot(&[1, 2, 0, 0, 5]);
        let lists = ListAssignment::uniform(5, 6);
        let av = available_symbols(&seq, &lists, &k(&[1, 2]), 3).unwrap();
        assert_eq!(av, vec![3, 4, 6]);
    }

    #[test]
    fn available_at_left_boundary() {
        let seq = PartialSequence::empty(4);
        let lists = ListAssignment::uniform(4, 3);
        assert_eq!(
            available_symbols(&seq, &lists, &k(&[1]), 1).unwrap(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn available_window_for_one_to_k() {
        let n = 20;
        let seq = PartialSequence::from_symbols(&(1..=n as Symbol).collect::<Vec<_>>()).unwrap();
        let lists = ListAssignment::uniform(n, 40);
        for i in 1..=n {
            let av = available_symbols(&seq, &lists, &k(&[1, 2, 3]), i).unwrap();
            let forbidden: Vec<Symbol> = (1..=40).filter(|s| !av.contains(s)).collect();
            let window: Vec<Symbol> = (i.saturating_sub(3).max(1)..=(i + 3).min(n))
                .filter(|&p| p != i)
                .map(|p| p as Symbol)
                .collect();
            assert_eq!(forbidden, window);
        }
    }

    #[test]
    fn empty_available_is_an_error() {
        let seq = PartialSequence::from_snapshot(&[1, 0, 2]);
        let lists = ListAssignment::uniform(3, 2);
        assert!(matches!(
            available_symbols(&seq, &lists, &k(&[1]), 2),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn lists_too_small_rejected() {
        let cfg = GeneratorConfig::with_list_size(3, k(&[1]), 2, 0);
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
        let cfg = GeneratorConfig::with_lists(3, k(&[1]), ListAssignment::uniform(2, 5), 0);
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn theorem_size_run_is_nonrepetitive() {
        let cfg = GeneratorConfig::new(1000, k(&[1]), 42);
        assert_eq!(cfg.lists.min_size(), 12);
        let (seq, trace) = generate(&cfg).unwrap();
        assert!(seq.is_complete());
        assert!(is_nonrepetitive(&seq, &cfg.diffs, CheckMode::Exhaustive).nonrepetitive);
        assert!(oracle_all_repetitions(&seq, &cfg.diffs).is_empty());
        assert!(trace.choices >= 1000);
        for i in 1..=1000 {
            assert!(cfg.lists.list(i).contains(&seq.get(i).unwrap()));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = GeneratorConfig::with_list_size(300, k(&[1, 2]), 6, 7);
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let other = generate(&GeneratorConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.1.events, other.1.events);
    }

    #[test]
    fn budget_exceeded_reported() {
        let cfg = GeneratorConfig::new(50, k(&[1]), 1).max_choices(10);
        assert!(matches!(
            generate(&cfg),
            Err(Error::BudgetExceeded { cap: 10 })
        ));
        let partial = run(&cfg, |_| {}).unwrap().unwrap_err();
        assert_eq!(partial.trace.choices, 10);
    }

    #[test]
    fn replay_reproduces_runs() {
        for seed in 0..20 {
            let cfg = GeneratorConfig::with_list_size(120, k(&[1, 2]), 5, seed);
            let (seq, trace) = generate(&cfg).unwrap();
            assert_eq!(replay(&trace, &cfg).unwrap(), seq);
            assert_eq!(
                ExecutionTrace::apply_events(cfg.n, &trace.events).unwrap(),
                seq
            );
        }
    }

    #[test]
    fn replay_trivial_traces() {
        let cfg = GeneratorConfig::new(5, k(&[1]), 0);
        let empty = ExecutionTrace {
            n: 5,
            events: vec![],
            final_seq: PartialSequence::empty(5),
            choices: 0,
        };
        assert_eq!(replay(&empty, &cfg).unwrap(), PartialSequence::empty(5));

        let mut one = PartialSequence::empty(5);
        one.assign(1, 3);
        let single = ExecutionTrace {
            n: 5,
            events: vec![TraceEvent::Choice {
                position: 1,
                available: (1..=12).collect(),
                chosen_rank: 2,
            }],
            final_seq: one.clone(),
            choices: 1,
        };
        let out = replay(&single, &cfg).unwrap();
        assert_eq!(out, one);
        assert_eq!(out.assigned_count(), 1);
    }

    #[test]
    fn replay_detects_divergence() {
        let cfg = GeneratorConfig::with_list_size(80, k(&[1]), 3, 3);
        let (_, mut trace) = generate(&cfg).unwrap();
        if let Some(TraceEvent::Choice {
            chosen_rank,
            available,
            ..
        }) = trace.events.get_mut(5)
        {
            *chosen_rank = (*chosen_rank + 1) % available.len();
        }
        assert!(matches!(replay(&trace, &cfg), Err(Error::Corruption(_))));
    }

    #[test]
    fn trace_json_lines_round_trip() {
        let cfg = GeneratorConfig::with_list_size(60, k(&[1, 2]), 6, 11);
        let (_, trace) = generate(&cfg).unwrap();
        let text = trace.to_json_lines();
        assert_eq!(text.lines().count(), trace.events.len() + 1);
        let back = ExecutionTrace::from_json_lines(&text).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn step_invariants_hold_under_observation() {
        for seed in 0..10 {
            let diffs = k(&[1, 3]);
            let cfg = GeneratorConfig::with_list_size(60, diffs.clone(), 5, seed);
            let mut last_choice = 0;
            let mut violations = 0;
            generate_observed(&cfg, |step| match step.event {
                TraceEvent::Choice {
                    position,
                    available,
                    ..
                } => {
                    assert!((1..*position).all(|p| step.seq.is_assigned(p)));
                    assert!(available.len() >= 5 - 2 * diffs.k());
                    last_choice = *position;
                    for r in oracle_all_repetitions(step.seq, &diffs) {
                        if !r.contains(last_choice) {
                            violations += 1;
                        }
                    }
                }
                TraceEvent::Erasure {
                    rep,
                    rank_of_just_set,
                    ..
                } => {
                    assert!(rep.h >= 2);
                    assert!(rep.contains(last_choice));
                    assert!(*rank_of_just_set >= 1 && *rank_of_just_set <= rep.h);
                    assert!(!step.seq.is_assigned(last_choice));
                    if !oracle_all_repetitions(step.seq, &diffs).is_empty() {
                        violations += 1;
                    }
                }
            })
            .unwrap();
            assert_eq!(violations, 0);
        }
    }

    #[test]
    fn uniform_choice_frequencies() {
        // n = 1: one choice from the full list of m symbols per seed
        let m = 10usize;
        let draws = 100_000u64;
        let mut counts = vec![0usize; m];
        for seed in 0..draws {
            let cfg = GeneratorConfig::with_list_size(1, k(&[1]), m, seed);
            let (seq, _) = generate(&cfg).unwrap();
            counts[seq.get(1).unwrap() as usize - 1] += 1;
        }
        let p = 1.0 / m as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() < 5.0 * sd, "{c}");
        }
    }
}
