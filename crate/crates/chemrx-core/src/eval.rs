//! Decision readout and Monte-Carlo performance estimation.
//!
//! A receiver run ends in a state vector; this module turns that state into
//! a joint binary decision, labels it against the ideal detector, estimates
//! per-input detection probability over independent stochastic trajectories,
//! and folds the per-input curve into an input-weighted error probability
//! with a propagated confidence interval.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{
    build, build_reset_phase, BuildError, BuiltReceiver, ChemSicalConfig, ReceiverLayout,
    ResetLayout, ResetPhase, Variant,
};
use crate::channel::InputPmf;
use crate::crn::CrnModel;
use crate::seeds::{child_seed, labeled_seed};
use crate::sic::{sic_detect, ThresholdTree};
use crate::sim::{
    simulate_ode, simulate_ssa, simulate_ssa_from, time_grid, OdeOptions, SimError,
};

/// Reduced two-transmitter input set used for optimization-loop scoring.
pub const REDUCED_INPUTS_2TX: [u32; 6] = [140, 167, 216, 308, 400, 475];

/// Default fractional tolerance for restored pools after a reset window.
pub const DEFAULT_RESET_TOLERANCE: f64 = 0.20;

/// Evaluation failures.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Sim(#[from] SimError),
    /// The state vector does not cover the detection species of a stage.
    #[error("state vector is missing detection species for stage {stage}")]
    ModelMismatch { stage: usize },
    /// Weighted error was requested over an empty input set.
    #[error("the input set for the weighted error is empty")]
    EmptySupport,
    /// The input set carries no probability mass under the supplied pmf.
    #[error("the input set has zero probability mass; weights are undefined")]
    ZeroMassSupport,
    /// A requested input has no detection-probability estimate.
    #[error("input {0} has no detection-probability estimate")]
    MissingInput(u32),
    #[error("n_traj must be at least 1")]
    NoBudget,
}

/// Reads the joint binary decision off a final state.
///
/// Stage `i` compares effective positive evidence `E_i^1 = N(D_i^1) + N(P_i)`
/// (spent evidence still counts: it was positive evidence that has already
/// been consumed to adapt the next threshold) against `E_i^0 = N(D_i^0)` and
/// decides 1 iff `E_i^1 >= E_i^0`. The tie rule makes an all-zero detection
/// state decide all-ones.
pub fn chem_decide(layout: &ReceiverLayout, state: &[f64]) -> Result<Vec<u8>, EvalError> {
    let mut decision = Vec::with_capacity(layout.stages.len());
    for (i, st) in layout.stages.iter().enumerate() {
        let hi = st
            .d1
            .index()
            .max(st.d0.index())
            .max(st.spent.map_or(0, |p| p.index()));
        if hi >= state.len() {
            return Err(EvalError::ModelMismatch { stage: i + 1 });
        }
        let e_one = state[st.d1.index()] + st.spent.map_or(0.0, |p| state[p.index()]);
        let e_zero = state[st.d0.index()];
        decision.push(u8::from(e_one >= e_zero));
    }
    Ok(decision)
}

/// Outcome of checking a reset-phase final state against its targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResetAudit {
    /// Every clear-only target (detection, spent, blank) is exactly zero.
    pub clears_ok: bool,
    /// Every restored pool is within the fractional tolerance of its target.
    pub restores_ok: bool,
    /// Largest relative deviation over the restore targets.
    pub max_restore_rel_dev: f64,
}

impl ResetAudit {
    /// A run is reusable when both halves of the audit hold.
    #[must_use]
    pub fn reusable(&self) -> bool {
        self.clears_ok && self.restores_ok
    }
}

/// Audits a reset-phase final state.
///
/// Clear verification applies to clear targets that are not also restore
/// targets: the indicator pools are cleared and then refilled from the
/// reservoirs, so they are judged against the restore tolerance instead of
/// the exact-zero rule (a species cannot be both empty and full).
pub fn audit_reset(reset: &ResetLayout, state: &[f64], tolerance: f64) -> ResetAudit {
    let clears_ok = reset
        .cleared
        .iter()
        .filter(|id| reset.restores.iter().all(|r| r.species != **id))
        .all(|id| state[id.index()] == 0.0);
    let mut max_dev = 0.0_f64;
    for r in &reset.restores {
        let dev = (state[r.species.index()] - f64::from(r.target)).abs() / f64::from(r.target);
        max_dev = max_dev.max(dev);
    }
    ResetAudit {
        clears_ok,
        restores_ok: max_dev <= tolerance,
        max_restore_rel_dev: max_dev,
    }
}

/// Labels one trajectory: correct decision, and reusable when reset is on.
///
/// Shrinking the tolerance can only turn a pass into a fail, so correctness
/// is monotone non-increasing as the tolerance tightens.
#[must_use]
pub fn label_correct(decision: &[u8], truth: &[u8], reset: Option<&ResetAudit>) -> bool {
    decision == truth && reset.is_none_or(ResetAudit::reusable)
}

/// A detection-probability estimate with its normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdEstimate {
    pub p_d: f64,
    /// `1.96 * sqrt(p(1-p)/n)`.
    pub ci_halfwidth: f64,
    pub n_traj: usize,
}

impl PdEstimate {
    /// Empirical proportion over a batch of correctness outcomes. Only the
    /// multiset of outcomes matters, so any permutation gives the same
    /// estimate.
    #[must_use]
    pub fn from_outcomes(outcomes: &[bool]) -> Self {
        let n = outcomes.len();
        assert!(n > 0, "an estimate needs at least one outcome");
        let p = outcomes.iter().filter(|&&c| c).count() as f64 / n as f64;
        PdEstimate {
            p_d: p,
            ci_halfwidth: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
            n_traj: n,
        }
    }
}

/// Reusable evaluation context for one receiver configuration.
///
/// The receiver is built once; per-input evaluation only swaps the input
/// count. Trajectory seeds are derived as `child_seed(labeled_seed(master,
/// "input-{n}"), j)`, which makes every estimate deterministic in
/// `(config, input, n_traj, master_seed)`, gives inputs disjoint seed
/// streams, and nests smaller budgets inside larger ones.
pub struct Evaluator {
    built: BuiltReceiver,
    phase: Option<ResetPhase>,
    tree: ThresholdTree,
    grid: Vec<f64>,
    reset_grid: Vec<f64>,
    tolerance: f64,
}

impl Evaluator {
    pub fn new(config: &ChemSicalConfig, reset_tolerance: f64) -> Result<Self, EvalError> {
        let built = build(config, 0)?;
        let phase = match config.reset {
            Some(_) => Some(build_reset_phase(&built)?),
            None => None,
        };
        let tree = match config.num_tx {
            3 => ThresholdTree::three_tx_reference(),
            _ => ThresholdTree::two_tx_reference(),
        };
        let grid = time_grid(0.0, config.t_dec, 2);
        let reset_grid = match &phase {
            Some(p) => time_grid(0.0, p.window, 2),
            None => Vec::new(),
        };
        Ok(Evaluator {
            built,
            phase,
            tree,
            grid,
            reset_grid,
            tolerance: reset_tolerance,
        })
    }

    #[must_use]
    pub fn layout(&self) -> &ReceiverLayout {
        &self.built.layout
    }

    #[must_use]
    pub fn config(&self) -> &ChemSicalConfig {
        &self.built.config
    }

    /// The ideal detector's joint label for an input count.
    #[must_use]
    pub fn ground_truth(&self, input: u32) -> Vec<u8> {
        sic_detect(f64::from(input), &self.tree)
    }

    fn model_for(&self, input: u32) -> CrnModel {
        let mut model = self.built.model.clone();
        model.set_initial(self.built.layout.input, f64::from(input));
        model
    }

    fn run_one(&self, model: &CrnModel, truth: &[u8], seed: u64) -> Result<bool, EvalError> {
        let (traj, _) = simulate_ssa(model, &self.grid, seed)?;
        let final_state = traj.state_at(self.grid.len() - 1);
        let decision = chem_decide(&self.built.layout, final_state)?;
        if decision != truth {
            return Ok(false);
        }
        if let Some(phase) = &self.phase {
            let entry = phase.entry_state(final_state);
            let (rt, _) =
                simulate_ssa_from(&phase.model, &entry, &self.reset_grid, child_seed(seed, 1))?;
            let audit = audit_reset(
                &phase.reset,
                rt.state_at(self.reset_grid.len() - 1),
                self.tolerance,
            );
            return Ok(audit.reusable());
        }
        Ok(true)
    }

    /// Per-trajectory correctness outcomes for an input, in seed order.
    ///
    /// The first `k` outcomes of an `n_traj`-budget run are exactly the
    /// outcomes of a `k`-budget run at the same master seed.
    pub fn trajectory_outcomes(
        &self,
        input: u32,
        n_traj: usize,
        master_seed: u64,
    ) -> Result<Vec<bool>, EvalError> {
        if n_traj == 0 {
            return Err(EvalError::NoBudget);
        }
        self.trajectory_outcomes_range(input, 0..n_traj, master_seed)
    }

    /// Outcomes for trajectory indices `range` only.
    ///
    /// Outcome `j` depends on `(input, j, master_seed)` alone, so a staged
    /// evaluation can extend an earlier batch without re-simulating it:
    /// `0..k` followed by `k..n` reproduces `0..n` exactly.
    pub fn trajectory_outcomes_range(
        &self,
        input: u32,
        range: std::ops::Range<usize>,
        master_seed: u64,
    ) -> Result<Vec<bool>, EvalError> {
        let model = self.model_for(input);
        let truth = self.ground_truth(input);
        let stream = labeled_seed(master_seed, &format!("input-{input}"));
        range
            .into_par_iter()
            .map(|j| self.run_one(&model, &truth, child_seed(stream, j as u64)))
            .collect()
    }

    /// Monte-Carlo detection probability for one input count.
    pub fn estimate_pd(
        &self,
        input: u32,
        n_traj: usize,
        master_seed: u64,
    ) -> Result<PdEstimate, EvalError> {
        let outcomes = self.trajectory_outcomes(input, n_traj, master_seed)?;
        Ok(PdEstimate::from_outcomes(&outcomes))
    }
}

/// How the weighted error folds the detection curve against the input pmf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportMode<'a> {
    /// Sum over the full pmf support; unevaluated inputs contribute
    /// `P_d = 0`, a conservative upper bound on the error.
    FullConservative,
    /// Sum over the full pmf support with piecewise-linear interpolation of
    /// the detection curve (and its half-widths) between evaluated inputs;
    /// ends are held flat. Reported separately from the conservative bound.
    FullInterpolated,
    /// Restrict to an input subset and renormalize the pmf over it.
    Reduced(&'a [u32]),
}

impl SupportMode<'_> {
    #[must_use]
    pub fn label(&self) -> &'static str {
        match self {
            SupportMode::FullConservative => "full-conservative",
            SupportMode::FullInterpolated => "full-interpolated",
            SupportMode::Reduced(_) => "reduced",
        }
    }
}

/// An input-weighted error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeEstimate {
    pub p_e: f64,
    /// Pmf-weighted root-sum-square of the per-input half-widths
    /// (independent per-input streams).
    pub ci_halfwidth: f64,
}

/// Renormalized weights over a reduced input set; they sum to 1 exactly.
pub fn reduced_weights(pmf: &InputPmf, set: &[u32]) -> Result<Vec<(u32, f64)>, EvalError> {
    if set.is_empty() {
        return Err(EvalError::EmptySupport);
    }
    let raw: Vec<f64> = set.iter().map(|&n| pmf.prob(n as usize)).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(EvalError::ZeroMassSupport);
    }
    let mut weights: Vec<f64> = raw.iter().map(|p| p / total).collect();
    // Float renormalization can miss 1 by an ulp; push the residue onto the
    // heaviest weight so the weights sum to one exactly.
    let sum: f64 = weights.iter().sum();
    let top = raw
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    weights[top] += 1.0 - sum;
    Ok(set.iter().copied().zip(weights).collect())
}

/// Input-weighted error probability `P_e = 1 - Σ_n p[n]·P_d[n]`.
pub fn weighted_pe(
    pd: &BTreeMap<u32, PdEstimate>,
    pmf: &InputPmf,
    mode: SupportMode,
) -> Result<PeEstimate, EvalError> {
    match mode {
        SupportMode::FullConservative => {
            let mut detect = 0.0;
            let mut var = 0.0;
            for (&n, est) in pd {
                let w = pmf.prob(n as usize);
                detect += w * est.p_d;
                var += (w * est.ci_halfwidth).powi(2);
            }
            Ok(PeEstimate {
                p_e: 1.0 - detect,
                ci_halfwidth: var.sqrt(),
            })
        }
        SupportMode::FullInterpolated => {
            if pd.is_empty() {
                return Err(EvalError::EmptySupport);
            }
            let knots: Vec<(f64, f64, f64)> = pd
                .iter()
                .map(|(&n, est)| (f64::from(n), est.p_d, est.ci_halfwidth))
                .collect();
            let lerp = |x: f64| -> (f64, f64) {
                match knots.iter().position(|k| k.0 >= x) {
                    Some(0) => (knots[0].1, knots[0].2),
                    None => {
                        let last = knots.last().unwrap();
                        (last.1, last.2)
                    }
                    Some(j) => {
                        let (x0, p0, h0) = knots[j - 1];
                        let (x1, p1, h1) = knots[j];
                        let f = (x - x0) / (x1 - x0);
                        (p0 + f * (p1 - p0), h0 + f * (h1 - h0))
                    }
                }
            };
            let mut detect = 0.0;
            let mut var = 0.0;
            for n in 0..=pmf.max_count() {
                let w = pmf.prob(n);
                let (p, h) = lerp(n as f64);
                detect += w * p;
                var += (w * h).powi(2);
            }
            Ok(PeEstimate {
                p_e: 1.0 - detect,
                ci_halfwidth: var.sqrt(),
            })
        }
        SupportMode::Reduced(set) => {
            let weights = reduced_weights(pmf, set)?;
            let mut detect = 0.0;
            let mut var = 0.0;
            for (n, w) in weights {
                let est = pd.get(&n).ok_or(EvalError::MissingInput(n))?;
                detect += w * est.p_d;
                var += (w * est.ci_halfwidth).powi(2);
            }
            Ok(PeEstimate {
                p_e: 1.0 - detect,
                ci_halfwidth: var.sqrt(),
            })
        }
    }
}

/// Hex SHA-256 of the configuration's canonical JSON encoding; pins a report
/// to the exact receiver it measured.
#[must_use]
pub fn config_fingerprint(config: &ChemSicalConfig) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        write!(out, "{b:02x}").unwrap();
    }
    out
}

/// One row of the per-input detection curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub input: u32,
    pub p_d: f64,
    pub ci_halfwidth: f64,
    pub n_traj: usize,
}

/// A complete evaluation result, reproducible from its fingerprint and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: Variant,
    pub config_fingerprint: String,
    pub master_seed: u64,
    pub t_dec: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reset_tolerance: Option<f64>,
    pub per_input: Vec<InputRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pe_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_e_ci: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-input detection curve as CSV.
    #[must_use]
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input,p_d,ci_halfwidth,n_traj\n");
        for r in &self.per_input {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.input, r.p_d, r.ci_halfwidth, r.n_traj
            ));
        }
        out
    }
}

/// Evaluates a configuration over a set of inputs and optionally folds the
/// curve into a weighted error.
pub fn evaluate(
    config: &ChemSicalConfig,
    inputs: &[u32],
    n_traj: usize,
    master_seed: u64,
    reset_tolerance: f64,
    pe: Option<(&InputPmf, SupportMode)>,
) -> Result<EvalReport, EvalError> {
    let ev = Evaluator::new(config, reset_tolerance)?;
    let mut per_input = Vec::with_capacity(inputs.len());
    let mut pd = BTreeMap::new();
    for &n in inputs {
        let est = ev.estimate_pd(n, n_traj, master_seed)?;
        per_input.push(InputRecord {
            input: n,
            p_d: est.p_d,
            ci_halfwidth: est.ci_halfwidth,
            n_traj: est.n_traj,
        });
        pd.insert(n, est);
    }
    let (pe_mode, p_e, p_e_ci) = match pe {
        Some((pmf, mode)) => {
            let est = weighted_pe(&pd, pmf, mode)?;
            (
                Some(mode.label().to_string()),
                Some(est.p_e),
                Some(est.ci_halfwidth),
            )
        }
        None => (None, None, None),
    };
    Ok(EvalReport {
        variant: config.variant,
        config_fingerprint: config_fingerprint(config),
        master_seed,
        t_dec: config.t_dec,
        reset_tolerance: config.reset.map(|_| reset_tolerance),
        per_input,
        pe_mode,
        p_e,
        p_e_ci,
    })
}

/// Deterministic screening outcome over an input range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenReport {
    pub variant: Variant,
    pub lo: u32,
    pub hi: u32,
    /// Inputs whose deterministic decision disagrees with the ideal detector.
    pub wrong_inputs: Vec<u32>,
}

impl ScreenReport {
    #[must_use]
    pub fn n_inputs(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    #[must_use]
    pub fn error_fraction(&self) -> f64 {
        self.wrong_inputs.len() as f64 / self.n_inputs() as f64
    }
}

/// Screens a configuration deterministically over every input in
/// `lo..=hi`: integrates the rate equations to the decision time and
/// compares the readout against the ideal detector.
pub fn ode_screen(config: &ChemSicalConfig, lo: u32, hi: u32) -> Result<ScreenReport, EvalError> {
    let built = build(config, 0)?;
    let tree = match config.num_tx {
        3 => ThresholdTree::three_tx_reference(),
        _ => ThresholdTree::two_tx_reference(),
    };
    let grid = time_grid(0.0, config.t_dec, 2);
    let options = OdeOptions::default();
    let verdicts: Result<Vec<Option<u32>>, EvalError> = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let mut model = built.model.clone();
            model.set_initial(built.layout.input, f64::from(n));
            let (traj, _) = simulate_ode(&model, &grid, &options)?;
            let decision = chem_decide(&built.layout, traj.state_at(grid.len() - 1))?;
            let truth = sic_detect(f64::from(n), &tree);
            Ok((decision != truth).then_some(n))
        })
        .collect();
    let wrong_inputs: Vec<u32> = verdicts?.into_iter().flatten().collect();
    Ok(ScreenReport {
        variant: config.variant,
        lo,
        hi,
        wrong_inputs,
    })
}
