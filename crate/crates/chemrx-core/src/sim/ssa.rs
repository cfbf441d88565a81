//! Exact stochastic simulation (Gillespie direct method).
//!
//! Propensities are cached per reaction and recomputed only for reactions
//! whose rate inputs changed in the last firing, via a species-to-reaction
//! dependency table built once per run. The total propensity is re-summed
//! from the cache every step; with the reaction counts used here that costs
//! less than guarding against drift in an incrementally updated total.
//!
//! Recording follows the piecewise-constant convention: the state written at
//! grid time `g` is the state after the last event at or before `g`. When
//! the total propensity reaches zero the state is frozen and every remaining
//! grid point records it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::crn::{CrnModel, SpeciesId};
use crate::seeds::child_seed;

use super::{check_grid, SimError, Trajectory};

/// Per-run statistics.
#[derive(Debug, Clone, Copy, Default)]
pub struct SsaStats {
    /// Number of reaction firings.
    pub n_events: u64,
    /// Time at which the total propensity hit zero, if it did.
    pub frozen_at: Option<f64>,
}

/// Runs one stochastic trajectory from the model's declared initial counts.
pub fn simulate_ssa(
    model: &CrnModel,
    grid: &[f64],
    seed: u64,
) -> Result<(Trajectory, SsaStats), SimError> {
    simulate_ssa_from(model, model.initial(), grid, seed)
}

/// Runs one stochastic trajectory from an explicit integer state.
pub fn simulate_ssa_from(
    model: &CrnModel,
    y0: &[f64],
    grid: &[f64],
    seed: u64,
) -> Result<(Trajectory, SsaStats), SimError> {
    check_grid(grid)?;
    let n = model.n_species();
    if y0.len() != n {
        return Err(SimError::StateLength {
            expected: n,
            got: y0.len(),
        });
    }
    for (i, &x) in y0.iter().enumerate() {
        if x < 0.0 || x.fract() != 0.0 {
            return Err(SimError::NonIntegerCount(i, x));
        }
    }

    let reactions = model.reactions();

    // Net stoichiometry per reaction and the reactions whose propensity each
    // species' count feeds into.
    let net: Vec<Vec<(SpeciesId, i64)>> = reactions.iter().map(|r| r.net_changes()).collect();
    let mut affects: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (ri, r) in reactions.iter().enumerate() {
        for sp in r.rate_inputs() {
            affects[sp.index()].push(ri as u32);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = y0.to_vec();
    let mut a: Vec<f64> = reactions.iter().map(|r| r.propensity(&state)).collect();

    let names = model.species().iter().map(|s| s.name.clone()).collect();
    let mut traj = Trajectory::with_capacity(names, grid.len(), Some(seed));
    let mut stats = SsaStats::default();

    let t_end = *grid.last().expect("grid checked non-empty");
    let mut t = grid[0];
    let mut gi = 0;

    loop {
        let a0: f64 = a.iter().sum();
        if a0 <= 0.0 {
            // Legal freeze: nothing can fire anymore.
            stats.frozen_at = Some(t);
            while gi < grid.len() {
                traj.push_row(grid[gi], &state);
                gi += 1;
            }
            break;
        }

        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / a0;
        let t_next = t + dt;

        // The state is constant on [t, t_next); record every grid point in it.
        while gi < grid.len() && grid[gi] < t_next {
            traj.push_row(grid[gi], &state);
            gi += 1;
        }
        if t_next > t_end {
            break;
        }

        // Select the firing reaction by cumulative propensity.
        let threshold = rng.random::<f64>() * a0;
        let mut acc = 0.0;
        let mut chosen = usize::MAX;
        for (ri, &ai) in a.iter().enumerate() {
            acc += ai;
            if threshold < acc {
                chosen = ri;
                break;
            }
        }
        if chosen == usize::MAX {
            // Floating-point roundoff pushed the threshold past the sum; take
            // the last reaction that can actually fire.
            chosen = a
                .iter()
                .rposition(|&ai| ai > 0.0)
                .expect("a0 > 0 implies a positive propensity exists");
        }

        for &(sp, delta) in &net[chosen] {
            state[sp.index()] += delta as f64;
            debug_assert!(state[sp.index()] >= 0.0, "propensity combinatorics must prevent negative counts");
        }
        t = t_next;
        stats.n_events += 1;

        for &(sp, _) in &net[chosen] {
            for &ri in &affects[sp.index()] {
                a[ri as usize] = reactions[ri as usize].propensity(&state);
            }
        }
    }

    Ok((traj, stats))
}

/// Runs `n_traj` independent trajectories in parallel. Trajectory `i` uses
/// the `i`-th child of `master_seed`, so results are independent of worker
/// count and scheduling, and a larger batch extends a smaller one without
/// changing its members.
pub fn run_ssa_batch(
    model: &CrnModel,
    grid: &[f64],
    master_seed: u64,
    n_traj: usize,
) -> Result<Vec<(Trajectory, SsaStats)>, SimError> {
    (0..n_traj)
        .into_par_iter()
        .map(|i| simulate_ssa(model, grid, child_seed(master_seed, i as u64)))
        .collect()
}
