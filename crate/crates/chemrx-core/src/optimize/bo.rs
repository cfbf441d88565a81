//! Bayesian optimization: Gaussian-process surrogate plus expected
//! improvement, proposing batches diversified by local penalization.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashSet;

use super::gp::Gp;
use super::{
    evaluate_adaptive, CandidateScorer, EvaluateError, OptimizerHistory, ParamSpace, RungSchedule,
};
use crate::seeds::child_seed;

/// Initial design for the first evaluations.
#[derive(Debug, Clone, PartialEq)]
pub enum InitDesign {
    /// Stratified space-filling sample of `2 × dim` points.
    Stratified,
    /// Caller-supplied start set (e.g. a known-good configuration to warm
    /// start from, or a deliberately poor one to measure optimizer lift).
    Points(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoOptions {
    /// Total candidate evaluations (including the initial design).
    pub budget: usize,
    /// Candidates proposed and evaluated per surrogate refit.
    pub batch: usize,
    pub init: InitDesign,
    /// Exploration margin in the improvement criterion.
    pub xi: f64,
}

impl Default for BoOptions {
    fn default() -> Self {
        BoOptions {
            budget: 40,
            batch: 4,
            init: InitDesign::Stratified,
            xi: 0.01,
        }
    }
}

/// Runs Bayesian optimization and returns the evaluation history.
///
/// Proposals are scored in parallel but recorded in proposal order, and all
/// randomness derives from `seed`, so a run is reproducible bit-for-bit.
/// Candidates already evaluated (by decoded fingerprint, i.e. after count
/// rounding) are never proposed again. If the surrogate cannot be fit the
/// batch falls back to uniform random proposals and says so on stderr.
pub fn bo_run<S: CandidateScorer>(
    space: &ParamSpace,
    scorer: &S,
    schedule: &RungSchedule,
    options: &BoOptions,
    seed: u64,
) -> Result<OptimizerHistory, EvaluateError> {
    let mut history = OptimizerHistory::default();
    if options.budget == 0 {
        return Ok(history);
    }
    let batch = options.batch.max(1).min(options.budget);
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0x80));
    let mut seen: HashSet<Vec<u64>> = HashSet::new();

    // Initial design.
    let mut init: Vec<Vec<f64>> = match &options.init {
        InitDesign::Stratified => space.stratified_design(2 * space.n_free(), &mut rng),
        InitDesign::Points(points) => points.clone(),
    };
    init.truncate(options.budget);
    if init.is_empty() {
        init = vec![space.sample_uniform(&mut rng)];
    }
    run_batch(space, scorer, schedule, seed, &init, &mut history, &mut seen)?;

    while history.records.len() < options.budget {
        let want = batch.min(options.budget - history.records.len());
        let proposals = propose(space, &history, want, options.xi, &mut rng, &seen);
        run_batch(
            space,
            scorer,
            schedule,
            seed,
            &proposals,
            &mut history,
            &mut seen,
        )?;
    }
    Ok(history)
}

/// Evaluates a set of candidates (parallel), then records them in order.
fn run_batch<S: CandidateScorer>(
    space: &ParamSpace,
    scorer: &S,
    schedule: &RungSchedule,
    seed: u64,
    xs: &[Vec<f64>],
    history: &mut OptimizerHistory,
    seen: &mut HashSet<Vec<u64>>,
) -> Result<(), EvaluateError> {
    let base_index = history.records.len();
    let decoded: Vec<_> = xs
        .iter()
        .map(|x| space.decode(x))
        .collect::<Result<_, _>>()?;
    let outcomes: Vec<_> = decoded
        .par_iter()
        .enumerate()
        .map(|(i, cand)| {
            // Every evaluation slot gets its own deterministic seed stream;
            // re-running with the same run seed replays identical
            // trajectories.
            let eval_seed = child_seed(seed, (base_index + i) as u64);
            evaluate_adaptive(cand, scorer, schedule, eval_seed)
        })
        .collect::<Result<_, _>>()?;
    for (x, (cand, outcome)) in xs.iter().zip(decoded.iter().zip(&outcomes)) {
        seen.insert(cand.fingerprint.clone());
        history.push(x.clone(), cand, outcome);
    }
    Ok(())
}

/// Proposes `want` new points by penalized expected improvement, falling
/// back to uniform random draws when the surrogate cannot be trusted.
fn propose(
    space: &ParamSpace,
    history: &OptimizerHistory,
    want: usize,
    xi: f64,
    rng: &mut ChaCha8Rng,
    seen: &HashSet<Vec<u64>>,
) -> Vec<Vec<f64>> {
    let xs_unit: Vec<Vec<f64>> = history.records.iter().map(|r| space.to_unit(&r.x)).collect();
    let ys: Vec<f64> = history.records.iter().map(|r| r.score).collect();
    let noise: Vec<f64> = history
        .records
        .iter()
        .map(|r| {
            let sigma = r.ci_halfwidth / 1.96;
            sigma * sigma
        })
        .collect();

    let gp = match Gp::fit(&xs_unit, &ys, &noise) {
        Ok(gp) => gp,
        Err(err) => {
            eprintln!("surrogate fit failed ({err}); proposing uniform random batch");
            return random_batch(space, want, rng, seen);
        }
    };
    let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let incumbent = history
        .best_record()
        .map(|r| space.to_unit(&r.x))
        .unwrap_or_else(|| vec![0.5; space.n_free()]);

    // Candidate pool: global uniform + local perturbations of the incumbent.
    let d = space.n_free();
    let n_pool = (192 * d).clamp(256, 1536);
    let mut pool: Vec<Vec<f64>> = (0..n_pool)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    for _ in 0..(n_pool / 4) {
        let jittered: Vec<f64> = incumbent
            .iter()
            .map(|&c| (c + 0.15 * (rng.random_range(0.0..1.0) - 0.5)).clamp(0.0, 1.0))
            .collect();
        pool.push(jittered);
    }

    // Greedy batch selection with local penalization: after picking a
    // point, damp acquisition near it so the batch spreads out.
    let radius = (gp.length_scale() * 0.5).max(0.05);
    let mut picked_unit: Vec<Vec<f64>> = Vec::with_capacity(want);
    let mut picked: Vec<Vec<f64>> = Vec::with_capacity(want);
    let mut seen_now: HashSet<Vec<u64>> = HashSet::new();

    while picked.len() < want {
        let choice = pool
            .iter()
            .map(|u| {
                let mut a = gp.expected_improvement(u, best, xi);
                for p in &picked_unit {
                    let dist = u
                        .iter()
                        .zip(p)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt();
                    a *= (dist / radius).min(1.0);
                }
                a
            })
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let candidate_unit = match choice {
            Some((idx, acq)) if acq > 0.0 => pool[idx].clone(),
            // Acquisition surface exhausted: explore.
            _ => (0..d).map(|_| rng.random_range(0.0..1.0)).collect(),
        };
        let x = space.from_unit(&candidate_unit);
        let fp = match space.decode(&x) {
            Ok(dec) => dec.fingerprint,
            Err(_) => continue,
        };
        if seen.contains(&fp) || seen_now.contains(&fp) {
            // Duplicate after rounding; spend the slot on exploration
            // instead of re-measuring a known point.
            let fresh = random_batch(space, 1, rng, seen);
            if let Some(xr) = fresh.into_iter().next() {
                if let Ok(dec) = space.decode(&xr) {
                    if !seen_now.contains(&dec.fingerprint) {
                        seen_now.insert(dec.fingerprint);
                        picked_unit.push(space.to_unit(&xr));
                        picked.push(xr);
                    }
                }
            }
            continue;
        }
        seen_now.insert(fp);
        picked_unit.push(candidate_unit);
        picked.push(x);
    }
    picked
}

fn random_batch(
    space: &ParamSpace,
    want: usize,
    rng: &mut ChaCha8Rng,
    seen: &HashSet<Vec<u64>>,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(want);
    let mut guard = 0;
    while out.len() < want && guard < 1000 {
        guard += 1;
        let x = space.sample_uniform(rng);
        match space.decode(&x) {
            Ok(dec) if !seen.contains(&dec.fingerprint) => out.push(x),
            _ => {}
        }
    }
    while out.len() < want {
        out.push(space.sample_uniform(rng));
    }
    out
}
