//! Simulated annealing baseline: multi-chain, Gaussian proposals in the
//! search coordinates, geometric cooling with a self-calibrated starting
//! temperature.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{
    evaluate_adaptive, CandidateScorer, EvaluateError, OptimizerHistory, ParamSpace, RungSchedule,
};
use crate::seeds::child_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SaOptions {
    /// Total evaluations pooled across all chains.
    pub budget: usize,
    pub chains: usize,
    /// Initial proposal scale as a fraction of each dimension's range.
    pub step0: f64,
    /// Proposal-scale adaptation rate (0 disables adaptation).
    pub adapt_gamma: f64,
    /// Target acceptance rate the step size adapts toward.
    pub target_acceptance: f64,
    /// Overrides the self-calibrated starting temperature (mainly for
    /// fixed-temperature diagnostics; `None` calibrates from observed
    /// worsenings).
    pub fixed_temperature: Option<f64>,
}

impl Default for SaOptions {
    fn default() -> Self {
        SaOptions {
            budget: 60,
            chains: 2,
            step0: 0.15,
            adapt_gamma: 0.05,
            target_acceptance: 0.3,
            fixed_temperature: None,
        }
    }
}

/// Final temperature: a 1% score worsening survives with probability 1e-3.
pub const T_END: f64 = 0.01 / 6.907_755_278_982_137; // 0.01 / ln(1000)

/// Probability of accepting a move with score change `delta` (maximizing)
/// at temperature `t`: improvements always, worsenings with `exp(Δ/T)`.
#[must_use]
pub fn acceptance_probability(delta: f64, t: f64) -> f64 {
    if delta >= 0.0 {
        1.0
    } else if t <= 0.0 {
        0.0
    } else {
        (delta / t).exp()
    }
}

/// Per-chain telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStats {
    pub proposals: usize,
    pub accepted: usize,
    pub final_step: f64,
    pub initial_temperature: f64,
}

impl ChainStats {
    #[must_use]
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaRun {
    /// All chains merged into one globally cost-ordered history.
    pub history: OptimizerHistory,
    pub chains: Vec<ChainStats>,
}

/// Runs multi-chain simulated annealing over a pooled evaluation budget.
///
/// Each chain starts from a uniform random point, calibrates its starting
/// temperature so the median early worsening is accepted half the time
/// (`T₀ = median|Δ⁻| / ln 2`), then cools geometrically to [`T_END`].
/// Proposal scale adapts multiplicatively toward the target acceptance
/// rate.
pub fn sa_run<S: CandidateScorer>(
    space: &ParamSpace,
    scorer: &S,
    schedule: &RungSchedule,
    options: &SaOptions,
    seed: u64,
) -> Result<SaRun, EvaluateError> {
    let chains = options.chains.max(1);
    let mut histories = Vec::with_capacity(chains);
    let mut stats = Vec::with_capacity(chains);
    for chain in 0..chains {
        // Pooled budget split as evenly as possible.
        let share = options.budget / chains + usize::from(chain < options.budget % chains);
        let (h, s) = run_chain(
            space,
            scorer,
            schedule,
            options,
            share,
            child_seed(seed, 0x5A00 + chain as u64),
        )?;
        histories.push(h);
        stats.push(s);
    }
    Ok(SaRun {
        history: OptimizerHistory::merge(&histories),
        chains: stats,
    })
}

fn run_chain<S: CandidateScorer>(
    space: &ParamSpace,
    scorer: &S,
    schedule: &RungSchedule,
    options: &SaOptions,
    budget: usize,
    seed: u64,
) -> Result<(OptimizerHistory, ChainStats), EvaluateError> {
    let mut history = OptimizerHistory::default();
    let mut stats = ChainStats {
        proposals: 0,
        accepted: 0,
        final_step: options.step0,
        initial_temperature: options.fixed_temperature.unwrap_or(f64::NAN),
    };
    if budget == 0 {
        return Ok((history, stats));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges: Vec<f64> = {
        let unit_lo = space.from_unit(&vec![0.0; space.n_free()]);
        let unit_hi = space.from_unit(&vec![1.0; space.n_free()]);
        unit_lo
            .iter()
            .zip(&unit_hi)
            .map(|(lo, hi)| (hi - lo).abs().max(1e-12))
            .collect()
    };

    let mut x = space.sample_uniform(&mut rng);
    let mut current = eval_at(space, scorer, schedule, seed, &mut history, &x)?;

    // Calibration prefix: accept everything, collect worsenings to set T0.
    let calibration = if options.fixed_temperature.is_some() {
        0
    } else {
        ((budget - 1) / 8).clamp(0, 6)
    };
    let mut worsenings: Vec<f64> = Vec::new();
    let mut step = options.step0;
    let mut t0 = options.fixed_temperature.unwrap_or(f64::NAN);
    let anneal_len = (budget - 1).saturating_sub(calibration).max(1);

    for i in 1..budget {
        let proposal = propose_gaussian(space, &x, step, &ranges, &mut rng);
        let cand = eval_at(space, scorer, schedule, seed, &mut history, &proposal)?;
        let delta = cand - current;
        stats.proposals += 1;

        let accept = if i <= calibration {
            if delta < 0.0 {
                worsenings.push(-delta);
            }
            true
        } else {
            if t0.is_nan() {
                t0 = calibrated_t0(&worsenings);
                stats.initial_temperature = t0;
            }
            let frac = (i - calibration - 1) as f64 / anneal_len as f64;
            let t = t0 * (T_END / t0).powf(frac.clamp(0.0, 1.0));
            let p = acceptance_probability(delta, t);
            p >= 1.0 || rng.random_range(0.0..1.0) < p
        };
        if accept {
            stats.accepted += 1;
            x = proposal;
            current = cand;
        }
        if options.adapt_gamma > 0.0 {
            let observed = if accept { 1.0 } else { 0.0 };
            step *= (options.adapt_gamma * (observed - options.target_acceptance)).exp();
            step = step.clamp(1e-4, 2.0);
        }
    }
    stats.final_step = step;
    if stats.initial_temperature.is_nan() {
        stats.initial_temperature = calibrated_t0(&worsenings);
    }
    Ok((history, stats))
}

/// `T₀ = median|Δ⁻| / ln 2`: the median observed worsening is accepted
/// with probability one half at the starting temperature.
fn calibrated_t0(worsenings: &[f64]) -> f64 {
    if worsenings.is_empty() {
        return 0.05 / std::f64::consts::LN_2;
    }
    let mut sorted = worsenings.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    (median / std::f64::consts::LN_2).max(T_END)
}

fn propose_gaussian(
    space: &ParamSpace,
    x: &[f64],
    step: f64,
    ranges: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut proposal: Vec<f64> = x
        .iter()
        .zip(ranges)
        .map(|(&v, &range)| {
            let z: f64 = StandardNormal.sample(rng);
            v + step * range * z
        })
        .collect();
    space.clamp(&mut proposal);
    proposal
}

fn eval_at<S: CandidateScorer>(
    space: &ParamSpace,
    scorer: &S,
    schedule: &RungSchedule,
    seed: u64,
    history: &mut OptimizerHistory,
    x: &[f64],
) -> Result<f64, EvaluateError> {
    let decoded = space.decode(x)?;
    let eval_seed = child_seed(seed, history.records.len() as u64);
    let outcome = evaluate_adaptive(&decoded, scorer, schedule, eval_seed)?;
    let score = outcome.score;
    history.push(x.to_vec(), &decoded, &outcome);
    Ok(score)
}
