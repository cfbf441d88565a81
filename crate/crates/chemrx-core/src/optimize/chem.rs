//! Adapter scoring receiver configurations: decoded candidates override
//! named rate and count parameters on a base configuration, and outcome
//! streams come from the Monte-Carlo evaluator (index-deterministic, so
//! rung promotion extends earlier trajectory batches exactly).

use std::collections::BTreeMap;
use std::ops::Range;

use super::{CandidateScorer, Decoded, ParamSpace, ScoreFailure};
use crate::blocks::ChemSicalConfig;
use crate::channel::InputPmf;
use crate::eval::{reduced_weights, EvalError, Evaluator};

/// Scores receiver candidates by weighted detection probability over a
/// reduced input set.
pub struct ChemScorer {
    base: ChemSicalConfig,
    reset_tolerance: f64,
    inputs: Vec<u32>,
    weights: BTreeMap<u32, f64>,
}

impl ChemScorer {
    /// `inputs` is the reduced evaluation set; its weights renormalize the
    /// pmf over exactly that set.
    pub fn new(
        base: ChemSicalConfig,
        pmf: &InputPmf,
        inputs: &[u32],
        reset_tolerance: f64,
    ) -> Result<Self, EvalError> {
        let weights = reduced_weights(pmf, inputs)?.into_iter().collect();
        // Surface configuration problems (stage counts, bounds) up front
        // rather than as per-candidate failures.
        Evaluator::new(&base, reset_tolerance)?;
        Ok(ChemScorer {
            base,
            reset_tolerance,
            inputs: inputs.to_vec(),
            weights,
        })
    }

    /// Verifies every searchable dimension names a parameter this scorer
    /// can apply, so a misspelled dimension fails at setup rather than
    /// zeroing every candidate.
    pub fn check_space(&self, space: &ParamSpace) -> Result<(), ScoreFailure> {
        let mut cfg = self.base.clone();
        for dim in space.dims() {
            apply(&mut cfg, dim.name(), 0.5)?;
        }
        Ok(())
    }

    /// The candidate's full configuration: base plus named overrides.
    pub fn config_for(&self, candidate: &Decoded) -> Result<ChemSicalConfig, ScoreFailure> {
        let mut cfg = self.base.clone();
        for (name, value) in &candidate.values {
            apply(&mut cfg, name, *value)?;
        }
        Ok(cfg)
    }
}

/// Applies one named override. Names follow the stage layout:
/// `kappa-{c,tr,am,ta}{stage}` for rates, `threshold-{stage}`,
/// `indicator-on-{stage}`, `indicator-off-{stage}` for counts (1-based
/// stage numbers).
fn apply(cfg: &mut ChemSicalConfig, name: &str, value: f64) -> Result<(), ScoreFailure> {
    let bad = || ScoreFailure::new(format!("unknown parameter dimension `{name}`"));
    let stage_of = |prefix: &str| -> Result<usize, ScoreFailure> {
        let idx: usize = name[prefix.len()..].parse().map_err(|_| bad())?;
        if idx == 0 || idx > cfg.stages.len() {
            return Err(ScoreFailure::new(format!(
                "dimension `{name}` addresses stage {idx}, config has {}",
                cfg.stages.len()
            )));
        }
        Ok(idx - 1)
    };
    if let Some(rest) = name.strip_prefix("kappa-") {
        let (kind, _) = rest.split_at(rest.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
        let stage = stage_of(&format!("kappa-{kind}"))?;
        match kind {
            "c" => cfg.stages[stage].comparison = value,
            "tr" => cfg.stages[stage].translation = value,
            "am" => cfg.stages[stage].majority = value,
            "ta" => cfg.stages[stage].adaptation = Some(value),
            _ => return Err(bad()),
        }
        return Ok(());
    }
    let as_count = |v: f64| -> Result<u32, ScoreFailure> {
        if v < 0.0 || v > u32::MAX as f64 {
            return Err(ScoreFailure::new(format!(
                "count dimension `{name}` decoded to {v}"
            )));
        }
        Ok(v.round() as u32)
    };
    if name.starts_with("threshold-") {
        let stage = stage_of("threshold-")?;
        cfg.counts[stage].threshold = as_count(value)?;
        return Ok(());
    }
    if name.starts_with("indicator-on-") {
        let stage = stage_of("indicator-on-")?;
        cfg.counts[stage].indicator_on = as_count(value)?;
        return Ok(());
    }
    if name.starts_with("indicator-off-") {
        let stage = stage_of("indicator-off-")?;
        cfg.counts[stage].indicator_off = as_count(value)?;
        return Ok(());
    }
    if name == "t-dec" {
        cfg.t_dec = value;
        return Ok(());
    }
    Err(bad())
}

impl CandidateScorer for ChemScorer {
    fn outcomes(
        &self,
        candidate: &Decoded,
        input: u32,
        range: Range<usize>,
        seed: u64,
    ) -> Result<Vec<bool>, ScoreFailure> {
        let cfg = self.config_for(candidate)?;
        let evaluator = Evaluator::new(&cfg, self.reset_tolerance)
            .map_err(|e| ScoreFailure::new(format!("configuration rejected: {e}")))?;
        evaluator
            .trajectory_outcomes_range(input, range, seed)
            .map_err(|e| ScoreFailure::new(format!("simulation failed: {e}")))
    }

    fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    fn weight(&self, input: u32) -> f64 {
        self.weights.get(&input).copied().unwrap_or(0.0)
    }
}
