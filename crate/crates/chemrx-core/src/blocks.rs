//! Receiver assembly from four reaction-block primitives.
//!
//! A receiver for `M` concurrently transmitting sources is built from one
//! *stage* per source, decoded strongest-first. Each stage contains:
//!
//! * **Comparison** — catalytic interconversion of an indicator pair whose
//!   on/off ratio tracks the ratio of the input count to the stage threshold.
//! * **Translation** — consuming conversion of indicators into a pair of
//!   detection species, so the detection pool inherits the indicator pool's
//!   molecule count exactly.
//! * **Approximate majority** — the blank-mediated four-reaction consensus
//!   motif that amplifies whichever detection species leads.
//! * **Threshold adaptation** (all but the last stage) — a catalytic adder
//!   with first-order decay that steers the next stage's working threshold
//!   toward its base count plus the upstream positive evidence, which is how
//!   an accepted stronger signal raises the detection threshold for every
//!   weaker one. Because production and decay share one rate constant, the
//!   steady state is an exact sum and never drains the evidence it reads.
//!
//! That is `4M − 1` logical blocks. In the *timed* variant a tuned
//! phosphorylation clock is merged into the network, rescaled so one period
//! spans the configured window structure, and every stage-2 (and stage-3)
//! reaction is multiplied by a Hill activation gate on a clock species, so
//! later stages only run once earlier decisions have settled. The *always-on*
//! variant has no clock and no gates; every stage runs from t = 0.
//!
//! An optional reset extension adds trigger-catalyzed clearing of all
//! decision products and reservoir-backed restoration of the indicator
//! pools, so the receiver can be returned to its reference state after a
//! decision without re-synthesizing the network.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crn::{CrnModel, CrnModelBuilder, HillGate, ModelError, SpeciesId, SpeciesRole};
use crate::oscillators::{
    build_unchecked, phase_snapshot, tuned, OscillatorError, OscillatorFamily, OscillatorSpec,
};

/// Smallest admissible reaction rate constant for receiver blocks.
pub const KAPPA_MIN: f64 = 1e-3;
/// Largest admissible reaction rate constant for receiver blocks.
pub const KAPPA_MAX: f64 = 1.0;
/// Reference decision horizon.
pub const T_REF: f64 = 73.0;

/// Scheduling variant of the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Every stage active from t = 0; no clock species.
    AlwaysOn,
    /// Stages 2 and 3 gated by a merged chemical clock.
    Timed,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::AlwaysOn => "always-on",
            Variant::Timed => "timed",
        })
    }
}

/// Rate constants for one stage's blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRates {
    /// κ of both comparison reactions.
    pub comparison: f64,
    /// κ of both translation reactions.
    pub translation: f64,
    /// κ of the four approximate-majority reactions.
    pub majority: f64,
    /// κ of every threshold-adaptation reaction (adder productions and
    /// decay). Present on every stage that has a later stage to adapt; the
    /// last stage must leave it unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptation: Option<f64>,
}

/// Initial molecule counts for one stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    /// Initial on-indicator pool.
    pub indicator_on: u32,
    /// Initial off-indicator pool.
    pub indicator_off: u32,
    /// Initial threshold count; stages past the first also carry an inert
    /// base-threshold reference species frozen at this value.
    pub threshold: u32,
}

impl StageCounts {
    /// Total indicator pool, which is also the ceiling on how much evidence
    /// this stage can emit downstream.
    #[must_use]
    pub fn indicator_pool(&self) -> u32 {
        self.indicator_on + self.indicator_off
    }
}

/// Hill-gate parameters for the clock-controlled stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    /// Half-activation count of the stage-2 gate (on the clock's S0).
    pub s0_half: f64,
    /// Hill coefficient of the stage-2 gate.
    pub s0_exponent: f64,
    /// Half-activation count of the stage-3 gate (on the clock's K).
    pub k_half: f64,
    /// Hill coefficient of the stage-3 gate.
    pub k_exponent: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        Self {
            s0_half: 600.0,
            s0_exponent: 1.0,
            k_half: 600.0,
            k_exponent: 1.0,
        }
    }
}

/// Parameters of the reset extension.
///
/// Reset is driven by a trigger pulse `R` injected at reset start. `R`
/// catalyzes the clearing reactions and passes through a first-order decay
/// cascade `R → R_2 → … → R_k`; the terminal cascade species catalyzes the
/// restoration reactions, then decays away. The cascade delays restoration
/// until clearing has exhausted itself: a catalyst restoring while the
/// trigger is still active would see its freshly released indicator
/// molecules cleared straight back to waste (with x e-foldings of remaining
/// clear exposure, only e⁻ˣ of early restores survive), leaving the pools
/// near zero instead of near their targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetConfig {
    /// κ of every trigger-catalyzed clearing reaction.
    pub clear: f64,
    /// κ of every restore reaction (catalyzed by the cascade terminus).
    pub copy: f64,
    /// First-order rate of every cascade step; sets the reset window
    /// implicitly.
    pub trigger_decay: f64,
    /// Size of the injected trigger pulse.
    pub trigger_count: u32,
    /// Number of cascade species including the trigger itself; the
    /// clear-to-restore separation is `cascade / trigger_decay` on average.
    pub cascade: u32,
    /// Nominal duration simulated for the reset phase.
    pub window: f64,
}

impl Default for ResetConfig {
    fn default() -> Self {
        Self {
            clear: KAPPA_MAX,
            copy: KAPPA_MAX,
            trigger_decay: 1.0,
            trigger_count: 20,
            cascade: 10,
            window: 20.0,
        }
    }
}

fn default_t_dec() -> f64 {
    T_REF
}

/// Full receiver configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChemSicalConfig {
    pub variant: Variant,
    /// Number of concurrent transmitters M ∈ {2, 3}, one stage each.
    pub num_tx: usize,
    /// Per-stage rate constants, strongest stage first.
    pub stages: Vec<StageRates>,
    /// Per-stage initial counts, strongest stage first.
    pub counts: Vec<StageCounts>,
    /// Decision horizon.
    #[serde(default = "default_t_dec")]
    pub t_dec: f64,
    #[serde(default)]
    pub gates: GateParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset: Option<ResetConfig>,
}

/// Configuration rejection reasons.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unsupported transmitter count {0}; the receiver supports 2 or 3 stages")]
    UnsupportedTxCount(usize),
    #[error("expected {expected} stage rate entries, got {got}")]
    RateLenMismatch { expected: usize, got: usize },
    #[error("expected {expected} stage count entries, got {got}")]
    CountLenMismatch { expected: usize, got: usize },
    #[error("stage {stage} {name} rate {value} outside [{KAPPA_MIN}, {KAPPA_MAX}]")]
    RateOutOfBounds {
        stage: usize,
        name: &'static str,
        value: f64,
    },
    #[error("stage {0} needs a threshold-adaptation rate: a later stage exists")]
    MissingAdaptation(usize),
    #[error("stage {0} is the last stage and must not carry threshold adaptation")]
    UnexpectedAdaptation(usize),
    #[error("decision horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("gate half-activations and exponents must be positive and finite")]
    BadGate,
    #[error("reset {name} = {value} is unusable")]
    BadReset { name: &'static str, value: f64 },
    #[error("stage windows are only defined for the timed variant")]
    NotTimed,
    #[error("stage {got} out of range 1..={max}")]
    StageOutOfRange { got: usize, max: usize },
}

impl ChemSicalConfig {
    /// Reference configuration: table counts, rate set 1 (all rates at
    /// κ_max), horizon `T_REF`, default gates, no reset.
    #[must_use]
    pub fn reference(variant: Variant, num_tx: usize) -> Self {
        let counts = reference_counts(num_tx);
        let stages = uniform_rates(num_tx, 1.0);
        Self {
            variant,
            num_tx,
            stages,
            counts,
            t_dec: T_REF,
            gates: GateParams::default(),
            reset: None,
        }
    }

    /// Clock period implied by the variant and horizon: one full period per
    /// decision for two stages; for three stages the decision horizon spans
    /// three half-cycles, i.e. T_osc = (2/3)·T_dec, so each stage window is
    /// one half-cycle of length T_dec/3.
    #[must_use]
    pub fn t_osc(&self) -> Option<f64> {
        match self.variant {
            Variant::AlwaysOn => None,
            Variant::Timed => Some(match self.num_tx {
                2 => self.t_dec,
                _ => self.t_dec * 2.0 / 3.0,
            }),
        }
    }

    /// Nominal activation interval of a 1-based stage, for diagnostics and
    /// plotting. The actual gating is chemical: stage 1 is ungated and spans
    /// the whole horizon; stage 2 opens in the clock's second half-cycle;
    /// stage 3 in the third.
    pub fn stage_window(&self, stage: usize) -> Result<(f64, f64), ConfigError> {
        if self.variant != Variant::Timed {
            return Err(ConfigError::NotTimed);
        }
        if stage == 0 || stage > self.num_tx {
            return Err(ConfigError::StageOutOfRange {
                got: stage,
                max: self.num_tx,
            });
        }
        let t_osc = self.t_osc().expect("timed variant has a period");
        Ok(match stage {
            1 => (0.0, self.t_dec),
            2 => (0.5 * t_osc, t_osc),
            _ => (t_osc, 1.5 * t_osc),
        })
    }

    /// Replaces the per-stage rates, e.g. with one of the screening presets.
    #[must_use]
    pub fn with_rates(mut self, stages: Vec<StageRates>) -> Self {
        self.stages = stages;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=3).contains(&self.num_tx) {
            return Err(ConfigError::UnsupportedTxCount(self.num_tx));
        }
        if self.stages.len() != self.num_tx {
            return Err(ConfigError::RateLenMismatch {
                expected: self.num_tx,
                got: self.stages.len(),
            });
        }
        if self.counts.len() != self.num_tx {
            return Err(ConfigError::CountLenMismatch {
                expected: self.num_tx,
                got: self.counts.len(),
            });
        }
        let in_bounds = |v: f64| (KAPPA_MIN..=KAPPA_MAX).contains(&v);
        for (idx, r) in self.stages.iter().enumerate() {
            let stage = idx + 1;
            for (name, value) in [
                ("comparison", r.comparison),
                ("translation", r.translation),
                ("majority", r.majority),
            ] {
                if !in_bounds(value) {
                    return Err(ConfigError::RateOutOfBounds { stage, name, value });
                }
            }
            let last = stage == self.num_tx;
            match r.adaptation {
                Some(value) if last => {
                    let _ = value;
                    return Err(ConfigError::UnexpectedAdaptation(stage));
                }
                Some(value) if !in_bounds(value) => {
                    return Err(ConfigError::RateOutOfBounds {
                        stage,
                        name: "adaptation",
                        value,
                    });
                }
                None if !last => return Err(ConfigError::MissingAdaptation(stage)),
                _ => {}
            }
        }
        if !self.t_dec.is_finite() || self.t_dec <= 0.0 {
            return Err(ConfigError::BadHorizon(self.t_dec));
        }
        let g = &self.gates;
        for v in [g.s0_half, g.s0_exponent, g.k_half, g.k_exponent] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ConfigError::BadGate);
            }
        }
        if let Some(rc) = &self.reset {
            for (name, value) in [("clear", rc.clear), ("copy", rc.copy)] {
                if !in_bounds(value) {
                    return Err(ConfigError::BadReset { name, value });
                }
            }
            if !rc.trigger_decay.is_finite() || rc.trigger_decay <= 0.0 {
                return Err(ConfigError::BadReset {
                    name: "trigger_decay",
                    value: rc.trigger_decay,
                });
            }
            if rc.trigger_count == 0 {
                return Err(ConfigError::BadReset {
                    name: "trigger_count",
                    value: 0.0,
                });
            }
            if rc.cascade == 0 {
                return Err(ConfigError::BadReset {
                    name: "cascade",
                    value: 0.0,
                });
            }
            if !rc.window.is_finite() || rc.window <= 0.0 {
                return Err(ConfigError::BadReset {
                    name: "window",
                    value: rc.window,
                });
            }
        }
        Ok(())
    }
}

/// Table initial counts: indicator pools sized to the expected arrival
/// amplitudes, thresholds to the detection boundaries.
#[must_use]
pub fn reference_counts(num_tx: usize) -> Vec<StageCounts> {
    let all = [
        StageCounts {
            indicator_on: 154,
            indicator_off: 154,
            threshold: 231,
        },
        StageCounts {
            indicator_on: 83,
            indicator_off: 84,
            threshold: 78,
        },
        StageCounts {
            indicator_on: 35,
            indicator_off: 36,
            threshold: 35,
        },
    ];
    all[..num_tx.min(all.len())].to_vec()
}

fn uniform_rates(num_tx: usize, kappa: f64) -> Vec<StageRates> {
    (1..=num_tx)
        .map(|stage| StageRates {
            comparison: kappa,
            translation: kappa,
            majority: kappa,
            adaptation: (stage < num_tx).then_some(kappa),
        })
        .collect()
}

/// The five two-stage rate presets used by the deterministic screening
/// study, numbered 1..=5. Returns `None` outside that range.
#[must_use]
pub fn rate_set(k: usize) -> Option<Vec<StageRates>> {
    // Columns: comparison-1, translation-1, majority-1, adaptation-1,
    // comparison-2, translation-2, majority-2.
    let rows: [[f64; 7]; 5] = [
        [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0, 0.1, 0.1, 0.1],
        [1.0, 1.0, 0.1, 1.0, 0.1, 0.1, 0.01],
        [1.0, 1.0, 0.1, 1.0, 0.1, 0.01, 0.001],
        [1.0, 1.0, 0.1, 1.0, 0.1, 0.1, 0.001],
    ];
    let r = rows.get(k.checked_sub(1)?)?;
    Some(vec![
        StageRates {
            comparison: r[0],
            translation: r[1],
            majority: r[2],
            adaptation: Some(r[3]),
        },
        StageRates {
            comparison: r[4],
            translation: r[5],
            majority: r[6],
            adaptation: None,
        },
    ])
}

/// Species handles for one stage of the built receiver.
#[derive(Debug, Clone, Copy)]
pub struct StageLayout {
    pub x_on: SpeciesId,
    pub x_off: SpeciesId,
    pub d1: SpeciesId,
    pub d0: SpeciesId,
    pub blank: SpeciesId,
    /// Spent positive evidence. This adder-based construction keeps all
    /// evidence live, so the handle is always `None`; readouts treat it as
    /// an optional extra evidence slot.
    pub spent: Option<SpeciesId>,
    pub threshold: SpeciesId,
    /// Base-threshold reference catalyst driving the adder; absent on
    /// stage 1, whose threshold is fixed.
    pub base_threshold: Option<SpeciesId>,
}

/// Clock species handles in a timed build.
#[derive(Debug, Clone, Copy)]
pub struct ClockLayout {
    /// Gates stage 2; rises at the half-period.
    pub s0: SpeciesId,
    /// Gates stage 3; high in the complementary phase.
    pub k: SpeciesId,
}

/// One reservoir-backed restoration target.
#[derive(Debug, Clone, Copy)]
pub struct Restore {
    pub species: SpeciesId,
    pub reservoir: SpeciesId,
    pub target: u32,
}

/// Species handles of the reset extension.
#[derive(Debug, Clone)]
pub struct ResetLayout {
    pub trigger: SpeciesId,
    pub relay: SpeciesId,
    pub waste: SpeciesId,
    pub reservoir_used: SpeciesId,
    /// Everything the trigger clears: detection, blank, and residual
    /// indicator species.
    pub cleared: Vec<SpeciesId>,
    pub restores: Vec<Restore>,
}

/// Species handles of a built receiver.
#[derive(Debug, Clone)]
pub struct ReceiverLayout {
    pub input: SpeciesId,
    pub stages: Vec<StageLayout>,
    pub clock: Option<ClockLayout>,
    pub reset: Option<ResetLayout>,
}

/// A built receiver model plus the handles needed to read it out.
#[derive(Debug, Clone)]
pub struct BuiltReceiver {
    pub model: CrnModel,
    pub layout: ReceiverLayout,
    pub config: ChemSicalConfig,
}

impl BuiltReceiver {
    /// Logical block count of the construction: four blocks per stage except
    /// the last, which has no threshold adaptation.
    #[must_use]
    pub fn n_logical_blocks(&self) -> usize {
        4 * self.config.num_tx - 1
    }
}

/// Build failures.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("clock embedding failed: {0}")]
    Clock(#[from] OscillatorError),
    #[error("model already contains the reset trigger; the extension can only be applied once")]
    DuplicateReset,
    #[error("receiver configuration has no reset section")]
    ResetNotConfigured,
}

/// Initial state of the embedded clock at the receiver's t = 0, phased so
/// the stage-2 gate species starts rising exactly at the half-period.
/// Snapshots are cached per period: the clock is always the same tuned
/// model, rescaled deterministically.
fn phased_clock_state(
    spec: &OscillatorSpec,
    period: f64,
) -> Result<Vec<(String, f64)>, OscillatorError> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<(String, f64)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("snapshot cache lock").get(&period.to_bits()) {
        return Ok(hit.clone());
    }
    let (model, pair) = build_unchecked(spec)?;
    let state = phase_snapshot(&model, &pair.a, period, 3.0 * period)?;
    let named: Vec<(String, f64)> = model
        .species()
        .iter()
        .zip(state)
        .map(|(s, v)| (s.name.clone(), v))
        .collect();
    cache
        .lock()
        .expect("snapshot cache lock")
        .insert(period.to_bits(), named.clone());
    Ok(named)
}

/// Builds the receiver for a given input count.
///
/// The input species is a pure catalyst: its count is the measurement and is
/// never consumed. Timed builds merge the tuned phosphorylation clock,
/// rescaled so its period matches `config.t_osc()`, with initial counts
/// snapshotted so the stage-2 gate opens at the half-period.
pub fn build(config: &ChemSicalConfig, input: u32) -> Result<BuiltReceiver, BuildError> {
    config.validate()?;
    let m = config.num_tx;
    let mut b = CrnModel::builder();
    let input_id = b.species("Y_on", SpeciesRole::Input, f64::from(input));

    // Clock first, so stage gates can reference its species.
    let clock_parts = if config.variant == Variant::Timed {
        let t_osc = config.t_osc().expect("timed variant has a period");
        let clock = tuned(OscillatorFamily::Phospho);
        // time_scaled multiplies the fundamental frequency by its factor, so
        // this lands the period exactly on t_osc given the recorded
        // deterministic frequency of the tuned set.
        let scaled = clock.spec.time_scaled(1.0 / (t_osc * clock.f1_ode));
        let snapshot = phased_clock_state(&scaled, t_osc)?;
        let pair = scaled.build_into(&mut b);
        let s0 = b.species(&pair.a, SpeciesRole::Oscillator, 0.0);
        let k = b.species(&pair.b, SpeciesRole::Oscillator, 0.0);
        Some((ClockLayout { s0, k }, snapshot))
    } else {
        None
    };

    // Species pass: declare every stage's species so threshold adaptation
    // can emit into later stages.
    let mut stages = Vec::with_capacity(m);
    for (idx, counts) in config.counts.iter().enumerate() {
        let i = idx + 1;
        let x_on = b.species(
            &format!("X_on_{i}"),
            SpeciesRole::Indicator,
            f64::from(counts.indicator_on),
        );
        let x_off = b.species(
            &format!("X_off_{i}"),
            SpeciesRole::Indicator,
            f64::from(counts.indicator_off),
        );
        let d1 = b.species(&format!("D{i}_1"), SpeciesRole::Detection, 0.0);
        let d0 = b.species(&format!("D{i}_0"), SpeciesRole::Detection, 0.0);
        let blank = b.species(&format!("B{i}"), SpeciesRole::Blank, 0.0);
        let threshold = b.species(
            &format!("W{i}"),
            SpeciesRole::Threshold,
            f64::from(counts.threshold),
        );
        let base_threshold = (i > 1).then(|| {
            b.species(
                &format!("W{i}B"),
                SpeciesRole::BaseThreshold,
                f64::from(counts.threshold),
            )
        });
        stages.push(StageLayout {
            x_on,
            x_off,
            d1,
            d0,
            blank,
            spent: None,
            threshold,
            base_threshold,
        });
    }

    // Reaction pass.
    for (idx, (st, rates)) in stages.iter().zip(&config.stages).enumerate() {
        let i = idx + 1;
        let gate = clock_parts.as_ref().and_then(|(cl, _)| match i {
            2 => Some(HillGate {
                species: cl.s0,
                half: config.gates.s0_half,
                exponent: config.gates.s0_exponent,
            }),
            3 => Some(HillGate {
                species: cl.k,
                half: config.gates.k_half,
                exponent: config.gates.k_exponent,
            }),
            _ => None,
        });
        let (y, w) = (input_id, st.threshold);
        b.gated_reaction(&[y, st.x_off], &[y, st.x_on], rates.comparison, gate.clone());
        b.gated_reaction(&[w, st.x_on], &[w, st.x_off], rates.comparison, gate.clone());
        b.gated_reaction(&[st.x_on], &[st.d1], rates.translation, gate.clone());
        b.gated_reaction(&[st.x_off], &[st.d0], rates.translation, gate.clone());
        b.gated_reaction(&[st.d1, st.d0], &[st.d1, st.blank], rates.majority, gate.clone());
        b.gated_reaction(&[st.d0, st.d1], &[st.d0, st.blank], rates.majority, gate.clone());
        b.gated_reaction(&[st.blank, st.d1], &[st.d1, st.d1], rates.majority, gate.clone());
        b.gated_reaction(&[st.blank, st.d0], &[st.d0, st.d0], rates.majority, gate.clone());
        if let Some(kappa) = rates.adaptation {
            // Adder onto the next stage's working threshold: catalytic
            // production from the base reference and from every upstream
            // stage's positive evidence, balanced by first-order decay at
            // the same rate, so the steady state is the exact sum
            //   N(W) = N(W_B) + Σ_upstream (N(D¹) + N(B)/2).
            // A blank holds one annihilated molecule from each side, hence
            // the half weight; once the upstream pool is fully translated
            // this reads base + pool/2 + margin/2, i.e. the base for a lost
            // stage, base + pool for a won one, and — critically for inputs
            // that land exactly on a boundary — strictly above the input
            // count for an unresolved tie.
            let next = &stages[i];
            let w = next.threshold;
            let wb = next
                .base_threshold
                .expect("stages past the first carry a base reference");
            b.gated_reaction(&[wb], &[wb, w], kappa, gate.clone());
            for upstream in &stages[..i] {
                b.gated_reaction(&[upstream.d1], &[upstream.d1, w], kappa, gate.clone());
                b.gated_reaction(
                    &[upstream.blank],
                    &[upstream.blank, w],
                    0.5 * kappa,
                    gate.clone(),
                );
            }
            b.gated_reaction(&[w], &[], kappa, gate);
        }
    }

    let mut model = b.build()?;
    let clock = clock_parts.map(|(cl, snapshot)| {
        for (name, value) in snapshot {
            let id = model
                .species_id(&name)
                .expect("snapshot species exist in the merged model");
            model.set_initial(id, value);
        }
        cl
    });

    Ok(BuiltReceiver {
        model,
        layout: ReceiverLayout {
            input: input_id,
            stages,
            clock,
            reset: None,
        },
        config: config.clone(),
    })
}

/// Adds the reset species and reactions to a builder. The caller guarantees
/// the stage ids are valid in the builder's species table.
fn add_reset(
    b: &mut CrnModelBuilder,
    stages: &[StageLayout],
    counts: &[StageCounts],
    rc: &ResetConfig,
) -> ResetLayout {
    let trigger = b.species("R", SpeciesRole::Generic, f64::from(rc.trigger_count));
    let waste = b.species("Waste", SpeciesRole::Waste, 0.0);
    let reservoir_used = b.species("Res_used", SpeciesRole::Waste, 0.0);

    // Decay cascade from the trigger to the restore catalyst, all at the
    // same rate: the terminus activity peaks `cascade / trigger_decay`
    // after injection, once clearing is effectively over.
    let mut relay = trigger;
    for step in 2..=rc.cascade {
        let next = b.species(&format!("R_{step}"), SpeciesRole::Generic, 0.0);
        b.reaction(&[relay], &[next], rc.trigger_decay);
        relay = next;
    }
    b.reaction(&[relay], &[], rc.trigger_decay);

    let mut cleared = Vec::new();
    for st in stages {
        for z in [st.d1, st.d0, st.blank, st.x_on, st.x_off] {
            cleared.push(z);
            b.reaction(&[trigger, z], &[trigger, waste], rc.clear);
        }
    }

    let mut restores = Vec::new();
    for (idx, (st, c)) in stages.iter().zip(counts).enumerate() {
        let i = idx + 1;
        for (species, name, target) in [
            (st.x_on, format!("Res_X_on_{i}"), c.indicator_on),
            (st.x_off, format!("Res_X_off_{i}"), c.indicator_off),
        ] {
            let reservoir = b.species(&name, SpeciesRole::Reservoir, f64::from(target));
            b.reaction(&[relay, reservoir], &[relay, species, reservoir_used], rc.copy);
            restores.push(Restore {
                species,
                reservoir,
                target,
            });
        }
    }

    ResetLayout {
        trigger,
        relay,
        waste,
        reservoir_used,
        cleared,
        restores,
    }
}

/// The combined decision-plus-reset model, for inspection and export: the
/// full receiver with the trigger pulse, clearing, and restoration reactions
/// appended. Its initial state represents reset start, with the trigger
/// already injected.
pub fn build_reset_extension(built: &BuiltReceiver) -> Result<BuiltReceiver, BuildError> {
    let rc = built.config.reset.ok_or(BuildError::ResetNotConfigured)?;
    if built.model.species_id("R").is_some() {
        return Err(BuildError::DuplicateReset);
    }
    let mut b = built.model.clone().into_builder();
    let reset = add_reset(&mut b, &built.layout.stages, &built.config.counts, &rc);
    let model = b.build()?;
    let mut layout = built.layout.clone();
    layout.reset = Some(reset);
    Ok(BuiltReceiver {
        model,
        layout,
        config: built.config.clone(),
    })
}

/// The quiesced reset phase: reset reactions plus the threshold adders, over
/// the receiver's species set. Running the comparison/translation blocks
/// during reset would immediately re-translate restored indicator molecules
/// into detection species, so the evaluation protocol decides first, then
/// switches to this model with the final decision state as the entry state.
/// The adders stay on so each working threshold relaxes back to its base
/// count as the evidence feeding it is cleared.
#[derive(Debug, Clone)]
pub struct ResetPhase {
    pub model: CrnModel,
    pub reset: ResetLayout,
    /// Nominal duration of the phase.
    pub window: f64,
    base_len: usize,
}

impl ResetPhase {
    /// Maps the final state of a decision run into this model's state
    /// vector: receiver species carry over by position, reset species start
    /// from their injected/reservoir initials.
    #[must_use]
    pub fn entry_state(&self, decision_final: &[f64]) -> Vec<f64> {
        assert_eq!(
            decision_final.len(),
            self.base_len,
            "decision state length must match the receiver model"
        );
        let mut state = self.model.initial().to_vec();
        state[..self.base_len].copy_from_slice(decision_final);
        state
    }

    /// The phase model with a decision final state installed as its initial
    /// condition, ready to simulate.
    #[must_use]
    pub fn model_at(&self, decision_final: &[f64]) -> CrnModel {
        let state = self.entry_state(decision_final);
        let mut model = self.model.clone();
        for (i, v) in state.into_iter().enumerate() {
            model.set_initial(SpeciesId(i), v);
        }
        model
    }
}

/// Builds the quiesced reset phase for a receiver.
pub fn build_reset_phase(built: &BuiltReceiver) -> Result<ResetPhase, BuildError> {
    let rc = built.config.reset.ok_or(BuildError::ResetNotConfigured)?;
    if built.model.species_id("R").is_some() {
        return Err(BuildError::DuplicateReset);
    }
    let mut b = CrnModel::builder();
    // Re-declare the receiver's species in order so ids and state vectors
    // stay position-compatible; counts are installed per run via entry_state.
    for s in built.model.species() {
        b.species(&s.name, s.role, 0.0);
    }
    let reset = add_reset(&mut b, &built.layout.stages, &built.config.counts, &rc);
    // Threshold adders carry over (ungated: the clock is frozen in this
    // phase), so W species track their shrinking evidence back to base.
    for (idx, rates) in built.config.stages.iter().enumerate() {
        if let Some(kappa) = rates.adaptation {
            let stages = &built.layout.stages;
            let next = &stages[idx + 1];
            let w = next.threshold;
            let wb = next
                .base_threshold
                .expect("stages past the first carry a base reference");
            b.reaction(&[wb], &[wb, w], kappa);
            for upstream in &stages[..=idx] {
                b.reaction(&[upstream.d1], &[upstream.d1, w], kappa);
                b.reaction(&[upstream.blank], &[upstream.blank, w], 0.5 * kappa);
            }
            b.reaction(&[w], &[], kappa);
        }
    }
    let model = b.build()?;
    Ok(ResetPhase {
        model,
        reset,
        window: rc.window,
        base_len: built.model.n_species(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_ode, simulate_ssa, time_grid, OdeOptions};
    use proptest::prelude::*;

    fn reference(variant: Variant) -> ChemSicalConfig {
        ChemSicalConfig::reference(variant, 2)
    }

    #[test]
    fn reference_config_matches_the_published_tables() {
        let cfg = ChemSicalConfig::reference(Variant::AlwaysOn, 3);
        cfg.validate().expect("reference config is valid");
        assert_eq!(cfg.t_dec, 73.0, "reference horizon");
        let pools: Vec<u32> = cfg.counts.iter().map(StageCounts::indicator_pool).collect();
        assert_eq!(pools, [308, 167, 71], "indicator pools");
        let thresholds: Vec<u32> = cfg.counts.iter().map(|c| c.threshold).collect();
        assert_eq!(thresholds, [231, 78, 35], "base thresholds");
        assert_eq!(cfg.gates.s0_half, 600.0);
        assert_eq!(cfg.gates.k_exponent, 1.0);
    }

    #[test]
    fn rate_presets_match_the_screening_table() {
        let s1 = rate_set(1).expect("set 1 exists");
        assert!(
            s1.iter().all(|r| r.comparison == 1.0
                && r.translation == 1.0
                && r.majority == 1.0
                && r.adaptation.unwrap_or(1.0) == 1.0),
            "set 1 is all-ones"
        );
        let s4 = rate_set(4).expect("set 4 exists");
        assert_eq!(s4[0].majority, 0.1);
        assert_eq!(s4[1].translation, 0.01);
        assert_eq!(s4[1].majority, 0.001);
        let s5 = rate_set(5).expect("set 5 exists");
        assert_eq!(s5[1].translation, 0.1);
        assert_eq!(s5[1].majority, 0.001);
        assert!(rate_set(0).is_none() && rate_set(6).is_none(), "presets are 1..=5");
        for k in 1..=5 {
            let cfg = reference(Variant::AlwaysOn).with_rates(rate_set(k).unwrap());
            cfg.validate().unwrap_or_else(|e| panic!("set {k} validates: {e}"));
        }
    }

    #[test]
    fn validation_rejects_malformed_configurations() {
        let base = reference(Variant::AlwaysOn);

        let mut cfg = base.clone();
        cfg.num_tx = 4;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::UnsupportedTxCount(4))
        ));

        let mut cfg = base.clone();
        cfg.stages[0].comparison = 1.5;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::RateOutOfBounds { stage: 1, .. })
        ));

        let mut cfg = base.clone();
        cfg.stages[1].translation = 5e-4;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::RateOutOfBounds { stage: 2, .. })
        ));

        let mut cfg = base.clone();
        cfg.stages[1].adaptation = Some(1.0);
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::UnexpectedAdaptation(2))
        ));

        let mut cfg = base.clone();
        cfg.stages[0].adaptation = None;
        assert!(matches!(cfg.validate(), Err(ConfigError::MissingAdaptation(1))));

        let mut cfg = base.clone();
        cfg.counts.pop();
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::CountLenMismatch { expected: 2, got: 1 })
        ));

        let mut cfg = base.clone();
        cfg.reset = Some(ResetConfig {
            clear: 2.0,
            ..ResetConfig::default()
        });
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::BadReset { name: "clear", .. })
        ));

        let mut cfg = base;
        cfg.t_dec = 0.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::BadHorizon(_))));
    }

    /// Closed-form tallies of the construction. Species: input + 5 per stage
    /// + threshold per stage + base threshold per stage past the first.
    /// Reactions: 8 per stage, plus an adder per stage past the first whose
    /// working threshold W_j takes one production from its base reference,
    /// one from each upstream D¹ and each upstream blank, and one decay —
    /// 2j reactions for stage j. The timed variant adds the 9-species,
    /// 10-reaction clock.
    fn expected_tallies(m: usize, timed: bool) -> (usize, usize) {
        let species = 1 + 6 * m + (m - 1) + if timed { 9 } else { 0 };
        let adders: usize = (2..=m).map(|j| 2 * j).sum();
        let reactions = 8 * m + adders + if timed { 10 } else { 0 };
        (species, reactions)
    }

    #[test]
    fn always_on_builds_match_closed_form_tallies() {
        for m in [2, 3] {
            let cfg = ChemSicalConfig::reference(Variant::AlwaysOn, m);
            let built = build(&cfg, 300).expect("reference builds");
            let (species, reactions) = expected_tallies(m, false);
            assert_eq!(built.model.n_species(), species, "species tally for M={m}");
            assert_eq!(built.model.n_reactions(), reactions, "reaction tally for M={m}");
            assert_eq!(built.n_logical_blocks(), 4 * m - 1, "logical blocks for M={m}");
            assert!(built.layout.clock.is_none(), "always-on has no clock");
        }
    }

    #[test]
    fn timed_builds_merge_the_clock_and_phase_it() {
        for m in [2, 3] {
            let cfg = ChemSicalConfig::reference(Variant::Timed, m);
            let built = build(&cfg, 300).expect("timed reference builds");
            let (species, reactions) = expected_tallies(m, true);
            assert_eq!(built.model.n_species(), species, "species tally for M={m}");
            assert_eq!(built.model.n_reactions(), reactions, "reaction tally for M={m}");
            let clock = built.layout.clock.expect("timed build has a clock");
            // The phase snapshot replaces the raw tuned initials: at the
            // receiver's t = 0 the stage-2 gate species sits in its low
            // phase, far below both its pool total and the gate half-count.
            let s0_initial = built.model.initial()[clock.s0.index()];
            assert!(
                s0_initial < 600.0,
                "S0 starts low (gate shut), got {s0_initial}"
            );
        }
    }

    #[test]
    fn builds_are_deterministic() {
        let cfg = reference(Variant::Timed);
        let a = build(&cfg, 318).expect("builds");
        let b = build(&cfg, 318).expect("builds");
        assert_eq!(a.model.initial(), b.model.initial(), "identical initials");
        assert_eq!(
            format!("{:?}", a.model),
            format!("{:?}", b.model),
            "identical models"
        );
    }

    #[test]
    fn input_is_a_pure_catalyst_in_stochastic_runs() {
        let cfg = reference(Variant::AlwaysOn);
        let built = build(&cfg, 318).expect("builds");
        let grid = time_grid(0.0, 73.0, 101);
        let (traj, _) = simulate_ssa(&built.model, &grid, 07_31_2024).expect("ssa runs");
        let y = traj.series(built.layout.input.index());
        assert!(
            y.iter().all(|&v| v == 318.0),
            "input count is untouched along the trajectory"
        );
    }

    #[test]
    fn stage_material_is_conserved_and_thresholds_stay_bounded() {
        let cfg = reference(Variant::AlwaysOn);
        let built = build(&cfg, 318).expect("builds");
        let grid = time_grid(0.0, 73.0, 74);
        let (traj, _) = simulate_ssa(&built.model, &grid, 9_021).expect("ssa runs");
        for (idx, st) in built.layout.stages.iter().enumerate() {
            let pool = f64::from(cfg.counts[idx].indicator_pool());
            let mut material: Vec<SpeciesId> = vec![st.x_on, st.x_off, st.d1, st.d0, st.blank];
            material.extend(st.spent);
            for (k, _) in grid.iter().enumerate() {
                let state = traj.state_at(k);
                let sum: f64 = material.iter().map(|id| state[id.index()]).sum();
                assert_eq!(
                    sum,
                    pool,
                    "stage {} material is exactly conserved at every sample",
                    idx + 1
                );
            }
        }
        let w1 = traj.series(built.layout.stages[0].threshold.index());
        assert!(
            w1.iter().all(|&v| v == 231.0),
            "stage-1 threshold is a pure catalyst"
        );
        // The working threshold is a birth-death species whose production
        // can never exceed κ·(base + pool), so it stays near or below
        // base + pool with only Poisson-scale excursions above.
        let w2 = traj.series(built.layout.stages[1].threshold.index());
        let ceiling: f64 = 78.0 + 308.0;
        let slack = 5.0 * ceiling.sqrt();
        assert!(
            w2.iter().all(|&v| v <= ceiling + slack),
            "adapted threshold stays within base + upstream evidence plus noise"
        );
        // Input 318 resolves stage 1 positive, so by the horizon the
        // threshold has adapted to the vicinity of base + pool.
        let w2_final = *w2.last().unwrap();
        assert!(
            (w2_final - ceiling).abs() <= slack,
            "threshold adapted to ~{ceiling} for a stage-1 win, got {w2_final}"
        );
    }

    #[test]
    fn majority_block_absorbs_the_minority_side() {
        let cfg = reference(Variant::AlwaysOn);
        let built = build(&cfg, 0).expect("builds");
        let st = built.layout.stages[0];
        let mut model = built.model.clone();
        // Park the indicator pools and preload a 60/40 detection imbalance
        // so only the majority (and adaptation) reactions act.
        model.set_initial(st.x_on, 0.0);
        model.set_initial(st.x_off, 0.0);
        model.set_initial(st.d1, 60.0);
        model.set_initial(st.d0, 40.0);
        let grid = time_grid(0.0, 73.0, 200);

        let (ode, _) = simulate_ode(&model, &grid, &OdeOptions::default()).expect("ode runs");
        let d0_final = ode.series(st.d0.index()).last().copied().unwrap();
        assert!(
            d0_final < 1e-3,
            "deterministic minority is driven to zero, got {d0_final}"
        );

        let (ssa, _) = simulate_ssa(&model, &grid, 42).expect("ssa runs");
        let final_state = ssa.state_at(grid.len() - 1);
        let minority = final_state[st.d0.index()].min(final_state[st.d1.index()]);
        assert_eq!(minority, 0.0, "stochastic consensus reaches an absorbing side");
        let d1 = final_state[st.d1.index()];
        let blank = final_state[st.blank.index()];
        assert_eq!(
            d1 + blank + final_state[st.d0.index()],
            100.0,
            "detection material is conserved through consensus"
        );
    }

    #[test]
    fn threshold_adapter_tracks_resolved_evidence() {
        let cfg = reference(Variant::AlwaysOn);
        // A clear win drives all stage-1 evidence positive, so the stage-2
        // working threshold settles at base + pool; a clear loss leaves no
        // positive evidence and the threshold relaxes back to its base.
        for (input, want) in [(500u32, 386.0f64), (100, 78.0)] {
            let built = build(&cfg, input).expect("builds");
            let grid = time_grid(0.0, 73.0, 293);
            let (traj, _) =
                simulate_ode(&built.model, &grid, &OdeOptions::default()).expect("ode runs");
            let w2 = traj.series(built.layout.stages[1].threshold.index());
            let got = *w2.last().unwrap();
            assert!(
                (got - want).abs() < 0.01,
                "input {input}: W2 settles at {want}, got {got}"
            );
            let peak = w2.iter().copied().fold(0.0, f64::max);
            assert!(
                peak <= 386.0 + 1e-4,
                "W2 tracks from below, overshooting base + pool by at most the \
                 integration tolerance, got {peak}"
            );
        }
    }

    #[test]
    fn stage_two_gate_integral_is_small_before_the_window() {
        let cfg = reference(Variant::Timed);
        let built = build(&cfg, 318).expect("builds");
        let clock = built.layout.clock.expect("timed build has a clock");
        let grid = time_grid(0.0, cfg.t_dec, 2001);
        let (traj, _) =
            simulate_ode(&built.model, &grid, &OdeOptions::default()).expect("ode runs");
        let s0 = traj.series(clock.s0.index());
        let gate = |v: f64| {
            let half = cfg.gates.s0_half;
            v.max(0.0).powf(cfg.gates.s0_exponent)
                / (v.max(0.0).powf(cfg.gates.s0_exponent) + half.powf(cfg.gates.s0_exponent))
        };
        let dt = grid[1] - grid[0];
        let mid = grid.len() / 2;
        let first: f64 = s0[..mid].iter().map(|&v| gate(v) * dt).sum();
        let second: f64 = s0[mid..].iter().map(|&v| gate(v) * dt).sum();
        assert!(
            first < 0.25 * second,
            "stage-2 gate weight before the window ({first:.3}) must be under a quarter of the \
             in-window weight ({second:.3})"
        );
    }

    #[test]
    fn stage_windows_tile_the_horizon() {
        let two = reference(Variant::Timed);
        assert_eq!(two.stage_window(1).unwrap(), (0.0, 73.0));
        assert_eq!(two.stage_window(2).unwrap(), (36.5, 73.0));

        let three = ChemSicalConfig::reference(Variant::Timed, 3);
        let t_osc = three.t_osc().expect("timed period");
        assert!((t_osc - 73.0 * 2.0 / 3.0).abs() < 1e-12, "three half-cycles per horizon");
        let (s2a, s2b) = three.stage_window(2).unwrap();
        let (s3a, s3b) = three.stage_window(3).unwrap();
        assert!((s2b - s2a - 73.0 / 3.0).abs() < 1e-12, "stage-2 window is a third");
        assert!((s3a - s2b).abs() < 1e-12, "windows abut");
        assert!((s3b - 73.0).abs() < 1e-12, "last window ends at the horizon");

        assert!(matches!(
            reference(Variant::AlwaysOn).stage_window(2),
            Err(ConfigError::NotTimed)
        ));
        assert!(matches!(
            two.stage_window(3),
            Err(ConfigError::StageOutOfRange { got: 3, max: 2 })
        ));
    }

    #[test]
    fn reset_extension_tallies_and_rejects_double_application() {
        let mut cfg = reference(Variant::AlwaysOn);
        cfg.reset = Some(ResetConfig::default());
        let built = build(&cfg, 318).expect("builds");
        let extended = build_reset_extension(&built).expect("extends");
        // Adds the decay cascade, waste, used-reservoir marker, and one
        // reservoir per indicator species; reactions: one per cascade step,
        // one clear per detection/blank/indicator species, one copy per
        // reservoir.
        let m = cfg.num_tx;
        let cascade = cfg.reset.unwrap().cascade as usize;
        assert_eq!(
            extended.model.n_species(),
            built.model.n_species() + cascade + 2 + 2 * m,
            "reset species tally"
        );
        assert_eq!(
            extended.model.n_reactions(),
            built.model.n_reactions() + cascade + 5 * m + 2 * m,
            "reset reaction tally"
        );
        assert!(
            matches!(build_reset_extension(&extended), Err(BuildError::DuplicateReset)),
            "the extension can only be applied once"
        );
        assert!(
            matches!(
                build_reset_extension(&build(&reference(Variant::AlwaysOn), 1).unwrap()),
                Err(BuildError::ResetNotConfigured)
            ),
            "reset requires a configured section"
        );
    }

    #[test]
    fn quiesced_reset_clears_evidence_and_restores_the_pools() {
        let mut cfg = reference(Variant::AlwaysOn);
        cfg.reset = Some(ResetConfig::default());
        // Input far above every boundary so the stage-1 win (and hence an
        // adapted threshold) is not in stochastic doubt at this seed.
        let built = build(&cfg, 500).expect("builds");

        let grid = time_grid(0.0, cfg.t_dec, 74);
        let (decision, _) = simulate_ssa(&built.model, &grid, 5_150).expect("decision runs");
        let final_state = decision.state_at(grid.len() - 1);
        let w2_before = final_state[built.layout.stages[1].threshold.index()];

        let phase = build_reset_phase(&built).expect("phase builds");
        let model = phase.model_at(&final_state);
        let reset_grid = time_grid(0.0, phase.window, 61);
        let (reset_traj, _) = simulate_ssa(&model, &reset_grid, 77).expect("reset runs");
        let end = reset_traj.state_at(reset_grid.len() - 1);

        for st in &built.layout.stages {
            for (name, id) in [("D1", st.d1), ("D0", st.d0), ("B", st.blank)] {
                assert_eq!(end[id.index()], 0.0, "{name} cleared to exactly zero");
            }
        }
        for r in &phase.reset.restores {
            let got = end[r.species.index()];
            let target = f64::from(r.target);
            assert!(
                (got - target).abs() <= 0.2 * target,
                "indicator restored within 20% of target: got {got}, want {target}"
            );
        }
        assert_eq!(
            end[built.layout.input.index()],
            500.0,
            "input is untouched by reset"
        );
        // With its evidence gone the working threshold relaxes back toward
        // base, making the receiver ready for a fresh decision.
        let w2_after = end[built.layout.stages[1].threshold.index()];
        assert!(
            w2_before > 200.0,
            "decision on a strong input adapted the threshold, got {w2_before}"
        );
        assert!(
            (w2_after - 78.0).abs() <= 5.0 * 78.0f64.sqrt(),
            "working threshold returns to its base count, got {w2_after}"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// Any in-bounds rate assignment builds, keeps the input catalytic,
        /// and conserves per-stage material in a short stochastic run.
        #[test]
        fn random_rate_sets_build_and_conserve(
            exps in proptest::collection::vec(-2.9f64..-0.05, 7),
            input in 0u32..=600,
            seed in 0u64..u64::MAX,
        ) {
            let k = |i: usize| 10f64.powf(exps[i]);
            let stages = vec![
                StageRates { comparison: k(0), translation: k(1), majority: k(2), adaptation: Some(k(3)) },
                StageRates { comparison: k(4), translation: k(5), majority: k(6), adaptation: None },
            ];
            let cfg = reference(Variant::AlwaysOn).with_rates(stages);
            cfg.validate().expect("sampled rates are in bounds");
            let built = build(&cfg, input).expect("builds");
            let grid = time_grid(0.0, 3.0, 16);
            let (traj, _) = simulate_ssa(&built.model, &grid, seed).expect("ssa runs");
            let y = traj.series(built.layout.input.index());
            prop_assert!(y.iter().all(|&v| v == f64::from(input)), "catalytic input");
            for (idx, st) in built.layout.stages.iter().enumerate() {
                let pool = f64::from(cfg.counts[idx].indicator_pool());
                let mut ids = vec![st.x_on, st.x_off, st.d1, st.d0, st.blank];
                ids.extend(st.spent);
                let final_state = traj.state_at(grid.len() - 1);
                let sum: f64 = ids.iter().map(|id| final_state[id.index()]).sum();
                prop_assert_eq!(sum, pool, "stage material conserved");
            }
        }
    }
}
