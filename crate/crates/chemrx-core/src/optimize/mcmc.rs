//! Metropolis-Hastings baseline: random-scan single-coordinate proposals
//! with a score-drop acceptance rule calibrated so a 0.01 score loss is
//! kept a quarter of the time.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{
    evaluate_adaptive, CandidateScorer, EvaluateError, OptimizerHistory, ParamSpace, RungSchedule,
};
use crate::seeds::child_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct McmcOptions {
    /// Total evaluations pooled across all chains.
    pub budget: usize,
    pub chains: usize,
    /// Initial per-coordinate proposal scale (fraction of the dimension's
    /// range).
    pub step0: f64,
    /// Step adaptation rate toward [`McmcOptions::target_acceptance`].
    pub adapt_gamma: f64,
    pub target_acceptance: f64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions {
            budget: 60,
            chains: 2,
            step0: 0.1,
            adapt_gamma: 0.05,
            target_acceptance: 0.25,
        }
    }
}

/// Probability of accepting a proposal whose score drops by `delta ≥ 0`:
/// `0.25^(δ/0.01)`, so improvements (δ=0 boundary included) always pass, a
/// 0.01 drop passes a quarter of the time and a 0.02 drop a sixteenth.
#[must_use]
pub fn mcmc_acceptance_probability(delta_drop: f64) -> f64 {
    if delta_drop <= 0.0 {
        1.0
    } else {
        0.25f64.powf(delta_drop / 0.01)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcChainStats {
    pub proposals: usize,
    pub accepted: usize,
    pub final_steps: Vec<f64>,
}

impl McmcChainStats {
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
pub struct McmcRun {
    pub history: OptimizerHistory,
    pub chains: Vec<McmcChainStats>,
}

/// Runs multi-chain random-scan Metropolis over a pooled evaluation budget.
///
/// Each proposal perturbs one uniformly chosen coordinate with a Gaussian
/// step; per-coordinate step sizes adapt multiplicatively toward the target
/// acceptance rate.
pub fn mcmc_run<S: CandidateScorer>(
    space: &ParamSpace,
    scorer: &S,
    schedule: &RungSchedule,
    options: &McmcOptions,
    seed: u64,
) -> Result<McmcRun, EvaluateError> {
    let chains = options.chains.max(1);
    let mut histories = Vec::with_capacity(chains);
    let mut stats = Vec::with_capacity(chains);
    for chain in 0..chains {
        let share = options.budget / chains + usize::from(chain < options.budget % chains);
        let (h, s) = run_chain(
            space,
            scorer,
            schedule,
            options,
            share,
            child_seed(seed, 0x3C00 + chain as u64),
        )?;
        histories.push(h);
        stats.push(s);
    }
    Ok(McmcRun {
        history: OptimizerHistory::merge(&histories),
        chains: stats,
    })
}

fn run_chain<S: CandidateScorer>(
    space: &ParamSpace,
    scorer: &S,
    schedule: &RungSchedule,
    options: &McmcOptions,
    budget: usize,
    seed: u64,
) -> Result<(OptimizerHistory, McmcChainStats), EvaluateError> {
    let d = space.n_free();
    let mut history = OptimizerHistory::default();
    let mut stats = McmcChainStats {
        proposals: 0,
        accepted: 0,
        final_steps: vec![options.step0; d],
    };
    if budget == 0 {
        return Ok((history, stats));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges: Vec<f64> = {
        let lo = space.from_unit(&vec![0.0; d]);
        let hi = space.from_unit(&vec![1.0; d]);
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a).abs().max(1e-12))
            .collect()
    };

    let mut x = space.sample_uniform(&mut rng);
    let mut current = eval_at(space, scorer, schedule, seed, &mut history, &x)?;
    let mut steps = vec![options.step0; d];

    for _ in 1..budget {
        let dim = rng.random_range(0..d);
        let mut proposal = x.clone();
        let z: f64 = StandardNormal.sample(&mut rng);
        proposal[dim] += steps[dim] * ranges[dim] * z;
        space.clamp(&mut proposal);

        let cand = eval_at(space, scorer, schedule, seed, &mut history, &proposal)?;
        let drop = current - cand;
        let p = mcmc_acceptance_probability(drop);
        let accept = p >= 1.0 || rng.random_range(0.0..1.0) < p;
        stats.proposals += 1;
        if accept {
            stats.accepted += 1;
            x = proposal;
            current = cand;
        }
        if options.adapt_gamma > 0.0 {
            let observed = if accept { 1.0 } else { 0.0 };
            steps[dim] *= (options.adapt_gamma * (observed - options.target_acceptance)).exp();
            steps[dim] = steps[dim].clamp(1e-4, 2.0);
        }
    }
    stats.final_steps = steps;
    Ok((history, stats))
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
