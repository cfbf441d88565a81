//! Black-box tuning of receiver rate constants and species counts against
//! the reduced weighted error score, with exact trajectory-cost accounting.
//!
//! Three engines share one staged Monte-Carlo evaluator: a Gaussian-process
//! Bayesian optimizer ([`bo::bo_run`]) and two benchmark samplers, simulated
//! annealing ([`sa::sa_run`]) and Metropolis-Hastings ([`mcmc::mcmc_run`]).
//! Candidates are evaluated in successive rungs with increasing trajectory
//! budgets; weak candidates stop early, promising or uncertain ones are
//! re-measured with more trajectories, and earlier trajectories are reused
//! (never re-simulated) because per-candidate outcome streams are indexed
//! deterministically.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod bo;
pub mod chem;
pub mod gp;
pub mod mcmc;
pub mod sa;

pub use bo::{bo_run, BoOptions, InitDesign};
pub use chem::ChemScorer;
pub use mcmc::{mcmc_acceptance_probability, mcmc_run, McmcOptions};
pub use sa::{sa_run, SaOptions};

// ---------------------------------------------------------------------------
// Parameter space.

/// One search dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dim {
    /// A rate constant, searched in log10 units within `[lo, hi]`
    /// (decoded value is `10^x`).
    Rate { name: String, lo: f64, hi: f64 },
    /// An integer species count, searched as a continuous value and rounded
    /// at decode time.
    Count { name: String, lo: f64, hi: f64 },
    /// Pinned to a constant; occupies no search coordinate.
    Fixed { name: String, value: f64 },
}

impl Dim {
    /// Log10-rate dimension over the standard physical bounds.
    #[must_use]
    pub fn rate(name: &str) -> Self {
        Dim::Rate {
            name: name.to_owned(),
            lo: RATE_LOG10_MIN,
            hi: RATE_LOG10_MAX,
        }
    }

    #[must_use]
    pub fn name(&self) -> &str {
        match self {
            Dim::Rate { name, .. } | Dim::Count { name, .. } | Dim::Fixed { name, .. } => name,
        }
    }
}

/// Default log10 bounds for rate dimensions.
pub const RATE_LOG10_MIN: f64 = -3.0;
pub const RATE_LOG10_MAX: f64 = 0.0;

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("search vector has {got} coordinates, space has {expected} free dimensions")]
    Arity { expected: usize, got: usize },
    #[error("coordinate {index} = {value} outside [{lo}, {hi}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("coordinate {index} is not finite")]
    NotFinite { index: usize },
    #[error("a parameter space needs at least one free dimension")]
    NoFreeDims,
    #[error("dimension {index} has lo {lo} > hi {hi}")]
    EmptyRange { index: usize, lo: f64, hi: f64 },
}

/// Search space: an ordered list of dimensions, some pinned.
///
/// Search vectors cover the free (non-fixed) dimensions in declaration
/// order; decoding produces the full named parameter list with rates
/// exponentiated, counts rounded to integers, and pinned values inserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    dims: Vec<Dim>,
}

impl ParamSpace {
    pub fn new(dims: Vec<Dim>) -> Result<Self, SpaceError> {
        let space = ParamSpace { dims };
        if space.n_free() == 0 {
            return Err(SpaceError::NoFreeDims);
        }
        for (index, (lo, hi)) in space.free_bounds().enumerate() {
            if lo > hi {
                return Err(SpaceError::EmptyRange { index, lo, hi });
            }
        }
        Ok(space)
    }

    #[must_use]
    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    /// Number of free (searchable) coordinates.
    #[must_use]
    pub fn n_free(&self) -> usize {
        self.dims
            .iter()
            .filter(|d| !matches!(d, Dim::Fixed { .. }))
            .count()
    }

    fn free_bounds(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.dims.iter().filter_map(|d| match *d {
            Dim::Rate { lo, hi, .. } | Dim::Count { lo, hi, .. } => Some((lo, hi)),
            Dim::Fixed { .. } => None,
        })
    }

    /// Decodes a search vector into named parameter values.
    pub fn decode(&self, x: &[f64]) -> Result<Decoded, SpaceError> {
        if x.len() != self.n_free() {
            return Err(SpaceError::Arity {
                expected: self.n_free(),
                got: x.len(),
            });
        }
        for (index, (&value, (lo, hi))) in x.iter().zip(self.free_bounds()).enumerate() {
            if !value.is_finite() {
                return Err(SpaceError::NotFinite { index });
            }
            if value < lo || value > hi {
                return Err(SpaceError::OutOfBounds {
                    index,
                    value,
                    lo,
                    hi,
                });
            }
        }
        let mut values = Vec::with_capacity(self.dims.len());
        let mut fingerprint = Vec::with_capacity(self.dims.len());
        let mut it = x.iter();
        for dim in &self.dims {
            let (name, value) = match dim {
                Dim::Rate { name, .. } => (name, 10f64.powf(*it.next().expect("arity checked"))),
                // Rounding happens before the fingerprint so two vectors
                // that decode to the same integer count collide as
                // duplicates.
                Dim::Count { name, .. } => (name, it.next().expect("arity checked").round()),
                Dim::Fixed { name, value } => (name, *value),
            };
            values.push((name.clone(), value));
            fingerprint.push(value.to_bits());
        }
        Ok(Decoded {
            x: x.to_vec(),
            values,
            fingerprint,
        })
    }

    /// Maps a free-coordinate vector onto the unit cube (for kernels and
    /// step-size bookkeeping). Zero-width dimensions map to 0.
    #[must_use]
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.free_bounds())
            .map(|(&v, (lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    /// Inverse of [`ParamSpace::to_unit`], clamped to bounds.
    #[must_use]
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.free_bounds())
            .map(|(&t, (lo, hi))| lo + t.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    }

    /// Clamps a vector into bounds in place.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.free_bounds()) {
            *v = v.clamp(lo, hi);
        }
    }

    /// Uniform sample of the free coordinates.
    pub fn sample_uniform<R: rand::Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.free_bounds()
            .map(|(lo, hi)| {
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect()
    }

    /// Stratified space-filling design: each coordinate is a shuffled
    /// Latin-hypercube stratum sample, so every 1-D projection covers the
    /// range evenly.
    pub fn stratified_design<R: rand::Rng>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        use rand::seq::SliceRandom;
        let d = self.n_free();
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);
        for (lo, hi) in self.free_bounds() {
            let mut col: Vec<f64> = (0..n)
                .map(|i| {
                    let t = (i as f64 + rng.random_range(0.0..1.0)) / n as f64;
                    lo + t * (hi - lo)
                })
                .collect();
            col.shuffle(rng);
            columns.push(col);
        }
        (0..n)
            .map(|i| (0..d).map(|j| columns[j][i]).collect())
            .collect()
    }
}

/// A decoded candidate: the search vector, the named parameter values, and
/// a duplicate-detection fingerprint over the decoded (post-rounding)
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub x: Vec<f64>,
    pub values: Vec<(String, f64)>,
    pub fingerprint: Vec<u64>,
}

impl Decoded {
    /// Value of a named parameter.
    #[must_use]
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

// ---------------------------------------------------------------------------
// Staged (rung) evaluation.

/// Rung schedule: trajectory totals per input and promotion thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungSchedule {
    /// Per-input trajectory totals at each rung, strictly increasing.
    pub rungs: Vec<usize>,
    /// Score thresholds gating promotion out of each non-final rung;
    /// exactly one fewer than rungs, strictly increasing.
    pub thresholds: Vec<f64>,
    /// A CI half-width above this promotes regardless of score, so a
    /// strong-but-noisy candidate is not discarded on a cheap estimate.
    pub ci_promote: f64,
}

impl Default for RungSchedule {
    fn default() -> Self {
        RungSchedule {
            rungs: vec![20, 60, 100, 500],
            thresholds: vec![0.90, 0.95, 0.99],
            ci_promote: 0.1,
        }
    }
}

impl RungSchedule {
    fn validate(&self) -> Result<(), EvaluateError> {
        let increasing = self.rungs.windows(2).all(|w| w[0] < w[1]);
        let thresholds_increasing = self.thresholds.windows(2).all(|w| w[0] < w[1]);
        if self.rungs.is_empty()
            || !increasing
            || !thresholds_increasing
            || self.thresholds.len() + 1 != self.rungs.len()
        {
            return Err(EvaluateError::BadSchedule);
        }
        Ok(())
    }
}

/// A candidate's correctness stream: deterministic per-index Bernoulli
/// outcomes, weighted per input.
///
/// Implementations must make outcome `j` of a given `(candidate, input,
/// seed)` independent of the range it is requested in, so a larger budget's
/// outcome set is a strict superset of a smaller one's and rung promotion
/// reuses (never re-simulates) earlier trajectories.
pub trait CandidateScorer: Sync {
    /// Outcomes `j ∈ range` for one input.
    fn outcomes(
        &self,
        candidate: &Decoded,
        input: u32,
        range: Range<usize>,
        seed: u64,
    ) -> Result<Vec<bool>, ScoreFailure>;

    /// The evaluation input set.
    fn inputs(&self) -> &[u32];

    /// Normalized input weight (weights over [`CandidateScorer::inputs`]
    /// sum to 1).
    fn weight(&self, input: u32) -> f64;
}

/// A scoring failure: the candidate is reported with score 0 and the flag
/// set, never silently dropped.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("candidate evaluation failed: {reason}")]
pub struct ScoreFailure {
    pub reason: String,
}

impl ScoreFailure {
    #[must_use]
    pub fn new(reason: impl Into<String>) -> Self {
        ScoreFailure {
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvaluateError {
    #[error("rungs must be strictly increasing with exactly one fewer strictly increasing thresholds")]
    BadSchedule,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Outcome of one staged evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    /// Weighted score `1 − P_e` from the last rung reached (0 on failure).
    pub score: f64,
    /// Weight-combined CI half-width at the final rung.
    pub ci_halfwidth: f64,
    /// Trajectories actually simulated by this evaluation, exactly.
    pub cost: u64,
    /// Index of the last rung whose estimate completed.
    pub rung_reached: usize,
    /// Simulation failure: score forced to 0.
    pub failed: bool,
}

/// Runs the rung ladder on one candidate.
///
/// Rung `k` extends every input's outcome stream to `rungs[k]` trajectories
/// (reusing all earlier ones), scores the weighted estimate, and promotes
/// iff the score reaches `thresholds[k]` or the CI half-width still exceeds
/// `ci_promote`. The reported cost counts each simulated trajectory exactly
/// once.
pub fn evaluate_adaptive<S: CandidateScorer>(
    candidate: &Decoded,
    scorer: &S,
    schedule: &RungSchedule,
    seed: u64,
) -> Result<EvalOutcome, EvaluateError> {
    schedule.validate()?;
    let inputs: Vec<u32> = scorer.inputs().to_vec();
    let mut successes = vec![0usize; inputs.len()];
    let mut drawn = vec![0usize; inputs.len()];
    let mut cost = 0u64;

    let mut last = (0.0, 0.0);
    for (k, &target) in schedule.rungs.iter().enumerate() {
        for (i, &input) in inputs.iter().enumerate() {
            if drawn[i] >= target {
                continue;
            }
            match scorer.outcomes(candidate, input, drawn[i]..target, seed) {
                Ok(outcomes) => {
                    debug_assert_eq!(outcomes.len(), target - drawn[i]);
                    cost += outcomes.len() as u64;
                    successes[i] += outcomes.iter().filter(|&&c| c).count();
                    drawn[i] = target;
                }
                Err(_) => {
                    return Ok(EvalOutcome {
                        score: 0.0,
                        ci_halfwidth: 0.0,
                        cost,
                        rung_reached: k,
                        failed: true,
                    });
                }
            }
        }

        let mut score = 0.0;
        let mut var = 0.0;
        for (i, &input) in inputs.iter().enumerate() {
            let w = scorer.weight(input);
            let p = successes[i] as f64 / drawn[i] as f64;
            score += w * p;
            let half = 1.96 * (p * (1.0 - p) / drawn[i] as f64).sqrt();
            var += (w * half) * (w * half);
        }
        last = (score, var.sqrt());

        if k + 1 < schedule.rungs.len() {
            let promote = last.0 >= schedule.thresholds[k] || last.1 > schedule.ci_promote;
            if !promote {
                return Ok(EvalOutcome {
                    score: last.0,
                    ci_halfwidth: last.1,
                    cost,
                    rung_reached: k,
                    failed: false,
                });
            }
        }
    }
    Ok(EvalOutcome {
        score: last.0,
        ci_halfwidth: last.1,
        cost,
        rung_reached: schedule.rungs.len() - 1,
        failed: false,
    })
}

// ---------------------------------------------------------------------------
// History.

/// One evaluated candidate in an optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// Search vector (free coordinates).
    pub x: Vec<f64>,
    /// Decoded named parameter values.
    pub values: Vec<(String, f64)>,
    pub score: f64,
    pub ci_halfwidth: f64,
    pub rung_reached: usize,
    pub failed: bool,
    /// Global cumulative trajectory count after this evaluation.
    pub cumulative_cost: u64,
}

/// Ordered evaluation log of one optimizer run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizerHistory {
    pub records: Vec<EvalRecord>,
}

impl OptimizerHistory {
    /// Appends an evaluation, accumulating global cost.
    fn push(&mut self, x: Vec<f64>, decoded: &Decoded, outcome: &EvalOutcome) {
        let before = self.total_cost();
        self.records.push(EvalRecord {
            x,
            values: decoded.values.clone(),
            score: outcome.score,
            ci_halfwidth: outcome.ci_halfwidth,
            rung_reached: outcome.rung_reached,
            failed: outcome.failed,
            cumulative_cost: before + outcome.cost,
        });
    }

    #[must_use]
    pub fn total_cost(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cumulative_cost)
    }

    /// Best score seen so far at each record (non-decreasing).
    #[must_use]
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.max(r.score);
                best
            })
            .collect()
    }

    /// The best record, if any evaluation completed.
    #[must_use]
    pub fn best_record(&self) -> Option<&EvalRecord> {
        self.records
            .iter()
            .max_by(|a, b| a.score.total_cmp(&b.score))
    }

    /// Merges chain histories into one globally cost-ordered history.
    ///
    /// Per-chain cumulative costs are re-accumulated into one global
    /// counter in interleaved cost order, so the merged curve reflects the
    /// true total simulation spend.
    #[must_use]
    pub fn merge(histories: &[OptimizerHistory]) -> OptimizerHistory {
        let mut tagged: Vec<(&EvalRecord, u64)> = Vec::new();
        for h in histories {
            let mut prev = 0;
            for r in &h.records {
                tagged.push((r, r.cumulative_cost - prev));
                prev = r.cumulative_cost;
            }
        }
        // Stable order: by the chain-local cumulative cost at completion.
        tagged.sort_by_key(|(r, _)| r.cumulative_cost);
        let mut merged = OptimizerHistory::default();
        let mut total = 0;
        for (r, incr) in tagged {
            total += incr;
            let mut rec = r.clone();
            rec.cumulative_cost = total;
            merged.records.push(rec);
        }
        merged
    }
}

/// Step curve of (cumulative cost, best score so far); non-decreasing in
/// score.
#[must_use]
pub fn cost_curve(history: &OptimizerHistory) -> Vec<(u64, f64)> {
    let best = history.best_so_far();
    history
        .records
        .iter()
        .zip(best)
        .map(|(r, b)| (r.cumulative_cost, b))
        .collect()
}

impl fmt::Display for EvalRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "score {:.4} ±{:.4} (rung {}, cost {}{})",
            self.score,
            self.ci_halfwidth,
            self.rung_reached,
            self.cumulative_cost,
            if self.failed { ", failed" } else { "" }
        )
    }
}
