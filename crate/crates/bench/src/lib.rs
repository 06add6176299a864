//! Termination statistics for the erase-and-retry generator.
//!
//! Each trial runs the generator with its own seed derived from the master
//! seed and the trial index, so any row of the CSV can be rerun alone.

use std::fs;
use std::io;
use std::path::Path;

use nonrep_core::generator::{run, GeneratorConfig, TraceEvent};
use nonrep_core::{DifferenceSet, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-trial choice cap is `CAP_PER_CELL * n`.
pub const CAP_PER_CELL: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    /// Number of random choices made, `M`.
    pub choices: usize,
    pub erasures: usize,
    pub success: bool,
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub trials: usize,
    pub mean_M: f64,
    pub max_M: usize,
    pub std_M: f64,
    pub success_rate: f64,
}

/// SplitMix64 finalizer over `master + index`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    let mut z = master.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_trial(
    n: usize,
    diffs: &DifferenceSet,
    q: usize,
    seed: u64,
    trial: usize,
) -> Result<TrialRow, Error> {
    let cfg = GeneratorConfig::with_list_size(n, diffs.clone(), q, seed)
        .max_choices((CAP_PER_CELL * n).max(1))
        .record_trace(false);
    let mut erasures = 0;
    let outcome = run(&cfg, |step| {
        if matches!(step.event, TraceEvent::Erasure { .. }) {
            erasures += 1;
        }
    })?;
    let (choices, success) = match outcome {
        Ok(trace) => (trace.choices, true),
        Err(partial) => (partial.trace.choices, false),
    };
    Ok(TrialRow {
        trial,
        seed,
        choices,
        erasures,
        success,
    })
}

/// Runs `trials` independent generator runs in parallel and summarizes the
/// number of choices each needed. Rows come back in trial order.
pub fn run_trials(
    n: usize,
    diffs: &DifferenceSet,
    q: usize,
    trials: usize,
    seed: u64,
) -> Result<(Vec<TrialRow>, TrialStats), Error> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(n, diffs, q, trial_seed(seed, t), t))
        .collect::<Result<Vec<_>, _>>()?;
    let stats = summarize(n, diffs.k(), q, &rows);
    Ok((rows, stats))
}

pub fn summarize(n: usize, k: usize, q: usize, rows: &[TrialRow]) -> TrialStats {
    let count = rows.len().max(1) as f64;
    let mean = rows.iter().map(|r| r.choices as f64).sum::<f64>() / count;
    let var = rows
        .iter()
        .map(|r| (r.choices as f64 - mean).powi(2))
        .sum::<f64>()
        / count;
    TrialStats {
        n,
        k,
        q,
        trials: rows.len(),
        mean_M: mean,
        max_M: rows.iter().map(|r| r.choices).max().unwrap_or(0),
        std_M: var.sqrt(),
        success_rate: rows.iter().filter(|r| r.success).count() as f64 / count,
    }
}

/// Writes `trials.csv` and `summary.json` into `dir`.
pub fn write_report(dir: &Path, rows: &[TrialRow], stats: &TrialStats) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("trials.csv"))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let summary = serde_json::to_string_pretty(stats).map_err(io::Error::other)?;
    fs::write(dir.join("summary.json"), summary + "\n")
}
