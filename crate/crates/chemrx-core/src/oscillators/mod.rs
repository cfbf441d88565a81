//! Candidate chemical clocks, spectral stability analysis, and selection.
//!
//! Three oscillator families are supported: a coupled pair of
//! approximate-majority switches, a five-gene repression ring, and a
//! mixed-mechanism dual-site phosphorylation network. Building an oscillator
//! runs a deterministic screen that rejects non-oscillating parameter sets;
//! ensembles of stochastic trajectories are scored by the stability of the
//! FFT fundamental, and [`rank_oscillators`] orders families from most to
//! least stable. Default parameter sets live in `data/oscillators.toml`,
//! produced by the committed tuning program
//! (`cargo run -p chemrx-core --release --example tune_oscillators`).

pub mod families;
mod screen;
pub mod spectral;

pub use families::{Am2Params, ClockPair, PentilatorParams, PhosphoParams};
pub use screen::{oscillation_screen, ScreenOptions, ScreenReport};
pub use spectral::{fundamental, spectral_stats, Fundamental, SpectralError, SpectralStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crn::{CrnModel, CrnModelBuilder};
use crate::seeds::labeled_seed;
use crate::sim::{run_ssa_batch, simulate_ode, time_grid, OdeOptions, SimError};
use crate::stats::median;

/// Oscillator family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscillatorFamily {
    Am2,
    Pentilator,
    Phospho,
}

impl std::fmt::Display for OscillatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Am2 => "am2",
            Self::Pentilator => "pentilator",
            Self::Phospho => "phospho",
        })
    }
}

/// Family-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum OscillatorParams {
    Am2(Am2Params),
    Pentilator(PentilatorParams),
    Phospho(PhosphoParams),
}

/// A complete oscillator specification: family parameters plus the tuning
/// targets the parameters were chosen for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    #[serde(flatten)]
    pub params: OscillatorParams,
    /// Target fundamental frequency (default 0.1).
    pub target_f1: f64,
    /// Target peak molecule count of the clock species (default 2000).
    pub target_peak: f64,
}

/// Oscillator construction failure.
#[derive(Debug, Error)]
pub enum OscillatorError {
    #[error("{family} parameters do not produce sustained oscillation: {}", .report.reasons.join("; "))]
    NotOscillating {
        family: OscillatorFamily,
        report: Box<ScreenReport>,
    },
    #[error("could not locate an oscillation phase reference for {species}")]
    PhaseNotFound { species: String },
    #[error("simulation failed during oscillator screening: {0}")]
    Sim(#[from] SimError),
    #[error("oscillator model invalid: {0}")]
    Model(#[from] crate::crn::ModelError),
}

/// A built and screened oscillator.
#[derive(Debug, Clone)]
pub struct BuiltOscillator {
    pub model: CrnModel,
    pub clock: ClockPair,
    pub report: ScreenReport,
}

impl OscillatorSpec {
    #[must_use]
    pub fn family(&self) -> OscillatorFamily {
        match self.params {
            OscillatorParams::Am2(_) => OscillatorFamily::Am2,
            OscillatorParams::Pentilator(_) => OscillatorFamily::Pentilator,
            OscillatorParams::Phospho(_) => OscillatorFamily::Phospho,
        }
    }

    /// Tuned default for a family, loaded from the committed data file.
    #[must_use]
    pub fn tuned(family: OscillatorFamily) -> Self {
        tuned(family).spec
    }

    /// Adds this oscillator's species and reactions to a builder (used to
    /// embed a clock inside a larger network).
    pub fn build_into(&self, b: &mut CrnModelBuilder) -> ClockPair {
        match &self.params {
            OscillatorParams::Am2(p) => p.build_into(b),
            OscillatorParams::Pentilator(p) => p.build_into(b),
            OscillatorParams::Phospho(p) => p.build_into(b),
        }
    }

    /// Uniform time rescale: multiplies every rate constant (including the
    /// transcription scale where applicable) by `c`, multiplying the
    /// fundamental frequency by exactly `c`.
    #[must_use]
    pub fn time_scaled(&self, c: f64) -> Self {
        let params = match &self.params {
            OscillatorParams::Am2(p) => OscillatorParams::Am2(p.time_scaled(c)),
            OscillatorParams::Phospho(p) => OscillatorParams::Phospho(p.time_scaled(c)),
            OscillatorParams::Pentilator(p) => OscillatorParams::Pentilator(PentilatorParams {
                alpha: p.alpha * c,
                beta: p.beta * c,
                mrna_decay: p.mrna_decay * c,
                protein_decay: p.protein_decay * c,
                ..p.clone()
            }),
        };
        Self {
            params,
            target_f1: self.target_f1 * c,
            ..self.clone()
        }
    }
}

/// Builds the model and screens it for sustained oscillation; a
/// non-oscillating parameterization is an error carrying the screen
/// diagnostics.
pub fn build_oscillator(spec: &OscillatorSpec) -> Result<BuiltOscillator, OscillatorError> {
    let (model, clock) = build_unchecked(spec)?;
    let options = ScreenOptions::for_target_frequency(spec.target_f1);
    let report = oscillation_screen(&model, &clock, &options)?;
    if !report.sustained {
        return Err(OscillatorError::NotOscillating {
            family: spec.family(),
            report: Box::new(report),
        });
    }
    Ok(BuiltOscillator {
        model,
        clock,
        report,
    })
}

/// Builds the model without the oscillation screen (tuning loops evaluate
/// the screen themselves).
pub fn build_unchecked(spec: &OscillatorSpec) -> Result<(CrnModel, ClockPair), OscillatorError> {
    let mut b = CrnModel::builder();
    let clock = spec.build_into(&mut b);
    let model = b.build()?;
    Ok((model, clock))
}

/// One family's entry in a stability ranking.
#[derive(Debug, Clone, Serialize)]
pub struct RankEntry {
    pub family: OscillatorFamily,
    pub f1_median: f64,
    pub h1_median: f64,
    /// Median absolute relative deviation of the fundamental frequency; the
    /// primary stability key (smaller is more stable).
    pub f1_dev_median: f64,
    /// Median absolute relative deviation of the fundamental amplitude; the
    /// tie-breaking stability key.
    pub h1_dev_median: f64,
    pub stats: SpectralStats,
}

/// Stability ranking over oscillator families, most stable first.
#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub entries: Vec<RankEntry>,
    pub n_traj: usize,
    pub seed: u64,
}

/// Runs `n_traj` stochastic trajectories per spec on the ensemble grid
/// (2000 time units, 4001 samples), extracts fundamentals of the primary
/// clock species, and orders families by median absolute relative frequency
/// deviation (ties broken by the amplitude deviation). Each family draws
/// from an independent, label-derived seed stream.
pub fn rank_oscillators(
    specs: &[OscillatorSpec],
    n_traj: usize,
    seed: u64,
) -> Result<RankReport, OscillatorError> {
    let grid = time_grid(0.0, 2000.0, 4001);
    let mut entries = Vec::with_capacity(specs.len());
    for spec in specs {
        let built = build_oscillator(spec)?;
        let family_seed = labeled_seed(seed, &built_label(spec));
        let batch = run_ssa_batch(&built.model, &grid, family_seed, n_traj)?;
        let idx = built
            .model
            .species_id(&built.clock.a)
            .expect("clock species exists")
            .index();
        let signals: Vec<Vec<f64>> = batch.iter().map(|(t, _)| t.series(idx)).collect();
        let stats = spectral_stats(&signals, &grid).expect("ensemble grid is uniform");
        entries.push(RankEntry {
            family: spec.family(),
            f1_median: stats.f1_median,
            h1_median: stats.h1_median,
            f1_dev_median: median(&stats.f1_abs_rel_dev),
            h1_dev_median: median(&stats.h1_abs_rel_dev),
            stats,
        });
    }
    entries.sort_by(|a, b| {
        (a.f1_dev_median, a.h1_dev_median)
            .partial_cmp(&(b.f1_dev_median, b.h1_dev_median))
            .expect("deviation medians are finite")
    });
    Ok(RankReport {
        entries,
        n_traj,
        seed,
    })
}

fn built_label(spec: &OscillatorSpec) -> String {
    format!("oscillator-{}", spec.family())
}

/// Integer state of a settled oscillator at a chosen phase: the returned
/// state, used as initial counts, puts the rising half-peak crossing of
/// `clock_a` at time `period / 2`. `settle` is integrated first to leave the
/// initial transient.
pub fn phase_snapshot(
    model: &CrnModel,
    clock_a: &str,
    period: f64,
    settle: f64,
) -> Result<Vec<f64>, OscillatorError> {
    let t_end = settle + 2.0 * period;
    let n = ((t_end / period) * 512.0).ceil() as usize + 1;
    let grid = time_grid(0.0, t_end, n);
    let (traj, _) = simulate_ode(model, &grid, &OdeOptions::default())?;
    let idx = model
        .species_id(clock_a)
        .ok_or_else(|| OscillatorError::PhaseNotFound {
            species: clock_a.to_owned(),
        })?
        .index();
    let series = traj.series(idx);

    let start = traj.index_at_time(settle);
    let window = &series[start..];
    let peak = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trough = window.iter().copied().fold(f64::INFINITY, f64::min);
    let midline = 0.5 * (peak + trough);

    // Last rising crossing far enough in that the half-period lookback stays
    // inside the settled window.
    let mut crossing: Option<usize> = None;
    for i in (start + 1)..series.len() {
        if series[i - 1] < midline && series[i] >= midline && grid[i] - 0.5 * period >= settle {
            crossing = Some(i);
        }
    }
    let rise = crossing.ok_or_else(|| OscillatorError::PhaseNotFound {
        species: clock_a.to_owned(),
    })?;
    let t_snap = grid[rise] - 0.5 * period;
    let state = traj.state_at(traj.index_at_time(t_snap));
    Ok(state.iter().map(|&x| x.round().max(0.0)).collect())
}

// ---------------------------------------------------------------------------
// Tuned defaults.

/// Tuned spec plus the deterministic measurements recorded at tuning time.
#[derive(Debug, Clone, Deserialize)]
pub struct TunedOscillator {
    #[serde(flatten)]
    pub spec: OscillatorSpec,
    /// Deterministic fundamental frequency measured when the set was tuned.
    pub f1_ode: f64,
    /// Deterministic clock-species peak measured when the set was tuned.
    pub peak_ode: f64,
}

#[derive(Debug, Deserialize)]
struct TunedFile {
    version: u32,
    am2: TunedOscillator,
    pentilator: TunedOscillator,
    phospho: TunedOscillator,
}

fn tuned_file() -> &'static TunedFile {
    static FILE: std::sync::OnceLock<TunedFile> = std::sync::OnceLock::new();
    FILE.get_or_init(|| {
        let raw = include_str!("../../data/oscillators.toml");
        let parsed: TunedFile = toml::from_str(raw).expect("committed tuning data parses");
        assert_eq!(parsed.version, 1, "unknown tuning data version");
        parsed
    })
}

/// Tuned default parameters for one family, with tuning-time measurements.
#[must_use]
pub fn tuned(family: OscillatorFamily) -> TunedOscillator {
    let file = tuned_file();
    match family {
        OscillatorFamily::Am2 => file.am2.clone(),
        OscillatorFamily::Pentilator => file.pentilator.clone(),
        OscillatorFamily::Phospho => file.phospho.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuned_data_file_parses_and_targets_are_defaults() {
        for family in [
            OscillatorFamily::Am2,
            OscillatorFamily::Pentilator,
            OscillatorFamily::Phospho,
        ] {
            let t = tuned(family);
            assert_eq!(t.spec.family(), family);
            assert_eq!(t.spec.target_f1, 0.1);
            assert_eq!(t.spec.target_peak, 2000.0);
        }
        if let OscillatorParams::Am2(p) = &OscillatorSpec::tuned(OscillatorFamily::Am2).params {
            assert!((p.kappa_e / p.kappa_i - 0.2).abs() < 1e-12, "default coupling ratio");
        } else {
            panic!("am2 spec has am2 params");
        }
        if let OscillatorParams::Pentilator(p) =
            &OscillatorSpec::tuned(OscillatorFamily::Pentilator).params
        {
            assert_eq!(p.alpha, 1000.0);
            assert_eq!(p.hill, 2.0);
        } else {
            panic!("pentilator spec has pentilator params");
        }
    }

    #[test]
    fn tuned_oscillators_pass_the_build_screen() {
        for family in [
            OscillatorFamily::Am2,
            OscillatorFamily::Pentilator,
            OscillatorFamily::Phospho,
        ] {
            let spec = OscillatorSpec::tuned(family);
            let built = build_oscillator(&spec)
                .unwrap_or_else(|e| panic!("{family} must pass its own screen: {e}"));
            assert!(built.report.sustained);
        }
    }

    #[test]
    fn strong_coupling_kills_the_switch_ring_oscillation() {
        let mut spec = OscillatorSpec::tuned(OscillatorFamily::Am2);
        if let OscillatorParams::Am2(p) = &mut spec.params {
            p.kappa_e = 10.0 * p.kappa_i;
        }
        let err = build_oscillator(&spec).unwrap_err();
        assert!(
            matches!(err, OscillatorError::NotOscillating { family: OscillatorFamily::Am2, .. }),
            "expected a non-oscillation diagnosis, got {err}"
        );
    }

    #[test]
    fn phospho_meets_frequency_and_peak_targets() {
        let spec = OscillatorSpec::tuned(OscillatorFamily::Phospho);
        let built = build_oscillator(&spec).unwrap();
        assert!(
            (built.report.f1 - 0.1).abs() / 0.1 <= 0.05,
            "deterministic fundamental {} not within 5% of 0.1",
            built.report.f1
        );
        assert!(
            (built.report.peak - 2000.0).abs() / 2000.0 <= 0.20,
            "clock peak {} not within 20% of 2000",
            built.report.peak
        );
    }

    #[test]
    fn phospho_clock_pair_has_low_overlap() {
        let spec = OscillatorSpec::tuned(OscillatorFamily::Phospho);
        let built = build_oscillator(&spec).unwrap();
        assert!(
            built.report.overlap_fraction < 0.15,
            "clock pair overlap {} too high",
            built.report.overlap_fraction
        );
    }

    #[test]
    fn uniform_rate_scaling_scales_the_fundamental() {
        let spec = OscillatorSpec::tuned(OscillatorFamily::Phospho);
        let base = build_oscillator(&spec).unwrap().report.f1;
        let scaled_spec = spec.time_scaled(0.5);
        let scaled = build_oscillator(&scaled_spec).unwrap().report.f1;
        assert!(
            (scaled - 0.5 * base).abs() / (0.5 * base) < 0.02,
            "scaled fundamental {scaled} vs expected {}",
            0.5 * base
        );
    }

    #[test]
    fn phospho_conserves_enzyme_and_substrate_totals_in_ssa() {
        let spec = OscillatorSpec::tuned(OscillatorFamily::Phospho);
        let (model, _) = build_unchecked(&spec).unwrap();
        let grid = time_grid(0.0, 30.0, 31);
        let (traj, _) = crate::sim::simulate_ssa(&model, &grid, 5).unwrap();
        let id = |name: &str| model.species_id(name).unwrap().index();
        let (k, f) = (id("K"), id("F"));
        let (s0, s1, s2) = (id("S0"), id("S1"), id("S2"));
        let (ks0, ks1, fs2, fs1) = (id("KS0"), id("KS1"), id("FS2"), id("FS1"));
        let init = model.initial();
        let k_tot = init[k] + init[ks0] + init[ks1];
        let f_tot = init[f] + init[fs2] + init[fs1];
        let s_tot = init[s0] + init[s1] + init[s2] + init[ks0] + init[ks1] + init[fs2] + init[fs1];
        for i in 0..traj.n_points() {
            let st = traj.state_at(i);
            assert_eq!(st[k] + st[ks0] + st[ks1], k_tot, "kinase conserved");
            assert_eq!(st[f] + st[fs2] + st[fs1], f_tot, "phosphatase conserved");
            assert_eq!(
                st[s0] + st[s1] + st[s2] + st[ks0] + st[ks1] + st[fs2] + st[fs1],
                s_tot,
                "substrate conserved"
            );
        }
    }

    #[test]
    fn phase_snapshot_puts_the_rising_edge_at_half_period() {
        let t = tuned(OscillatorFamily::Phospho);
        let (model, clock) = build_unchecked(&t.spec).unwrap();
        let period = 1.0 / t.f1_ode;
        let snap = phase_snapshot(&model, &clock.a, period, 8.0 * period).unwrap();
        assert!(snap.iter().all(|&x| x >= 0.0 && x.fract() == 0.0));

        // Replay from the snapshot: the clock species should cross its
        // midline upward near period/2.
        let mut replay = model.clone();
        for (i, &x) in snap.iter().enumerate() {
            replay.set_initial(crate::crn::SpeciesId(i), x);
        }
        let grid = time_grid(0.0, period, 513);
        let (traj, _) = simulate_ode(&replay, &grid, &OdeOptions::default()).unwrap();
        let series = traj.series(replay.species_id(&clock.a).unwrap().index());
        let peak = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let trough = series.iter().copied().fold(f64::INFINITY, f64::min);
        let midline = 0.5 * (peak + trough);
        let mut rise_time = None;
        for i in 1..series.len() {
            if series[i - 1] < midline && series[i] >= midline {
                rise_time = Some(grid[i]);
                break;
            }
        }
        let rise = rise_time.expect("snapshot run must oscillate");
        assert!(
            (rise - 0.5 * period).abs() < 0.15 * period,
            "rising edge at {rise}, expected near {}",
            0.5 * period
        );
    }
}
