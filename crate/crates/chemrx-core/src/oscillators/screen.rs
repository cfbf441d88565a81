//! Deterministic oscillation screening.
//!
//! Integrates a clock network's mean-field dynamics, discards an initial
//! transient, and decides whether the designated species keeps oscillating:
//! enough midline crossings, no peak-to-peak decay between the two halves of
//! the analysis window, and an amplitude that stays a real fraction of the
//! peak. The screen also extracts the quantities tuning cares about
//! (fundamental frequency, peak, trough, inter-species overlap).

use serde::Serialize;

use crate::crn::CrnModel;
use crate::oscillators::families::ClockPair;
use crate::oscillators::spectral::fundamental;
use crate::sim::{simulate_ode, time_grid, OdeOptions, SimError};

/// Screening window configuration.
#[derive(Debug, Clone, Copy)]
pub struct ScreenOptions {
    /// Total integration time; choose at least 30 expected periods.
    pub t_max: f64,
    /// Number of recording points.
    pub n_points: usize,
    /// Fraction of the window discarded as transient.
    pub transient_fraction: f64,
    /// Minimum full cycles required inside the analysis window.
    pub min_cycles: usize,
}

impl ScreenOptions {
    /// Screen sized for a target fundamental frequency: 30 target periods,
    /// which leaves at least 20 cycles after the transient cut.
    #[must_use]
    pub fn for_target_frequency(f1: f64) -> Self {
        Self {
            t_max: 30.0 / f1,
            n_points: 4096,
            transient_fraction: 0.3,
            min_cycles: 20,
        }
    }
}

/// Outcome of one deterministic screen.
#[derive(Debug, Clone, Serialize)]
pub struct ScreenReport {
    /// Overall verdict: sustained oscillation of the primary clock species.
    pub sustained: bool,
    /// Rising midline crossings inside the analysis window.
    pub n_cycles: usize,
    /// Peak-to-peak amplitude in the first half of the window.
    pub first_half_p2p: f64,
    /// Peak-to-peak amplitude in the second half of the window.
    pub second_half_p2p: f64,
    /// Maximum of the primary clock species in the window.
    pub peak: f64,
    /// Minimum of the primary clock species in the window.
    pub trough: f64,
    /// FFT fundamental frequency over the window.
    pub f1: f64,
    /// FFT fundamental amplitude over the window.
    pub h1: f64,
    /// Fraction of window time where both clock species exceed half their
    /// own peaks simultaneously.
    pub overlap_fraction: f64,
    /// Human-readable explanations when `sustained` is false.
    pub reasons: Vec<String>,
}

fn peak_to_peak(xs: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Runs the deterministic screen on a built clock model.
pub fn oscillation_screen(
    model: &CrnModel,
    clock: &ClockPair,
    options: &ScreenOptions,
) -> Result<ScreenReport, SimError> {
    let grid = time_grid(0.0, options.t_max, options.n_points);
    let (traj, _) = simulate_ode(model, &grid, &OdeOptions::default())?;

    let ia = model
        .species_id(&clock.a)
        .expect("clock species exists in its own model")
        .index();
    let ib = model
        .species_id(&clock.b)
        .expect("clock species exists in its own model")
        .index();
    let series_a = traj.series(ia);
    let series_b = traj.series(ib);

    let start = ((options.n_points as f64) * options.transient_fraction).ceil() as usize;
    let a = &series_a[start..];
    let b = &series_b[start..];
    let times = &grid[start..];

    let peak = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trough = a.iter().copied().fold(f64::INFINITY, f64::min);
    let midline = 0.5 * (peak + trough);

    let mut n_cycles = 0usize;
    for i in 1..a.len() {
        if a[i - 1] < midline && a[i] >= midline {
            n_cycles += 1;
        }
    }

    let half = a.len() / 2;
    let first_half_p2p = peak_to_peak(&a[..half]);
    let second_half_p2p = peak_to_peak(&a[half..]);

    let fund = fundamental(a, times).expect("screen grid is uniform by construction");

    let peak_b = b.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let overlap_count = a
        .iter()
        .zip(b)
        .filter(|&(&xa, &xb)| xa > 0.5 * peak && xb > 0.5 * peak_b)
        .count();
    let overlap_fraction = overlap_count as f64 / a.len() as f64;

    let mut reasons = Vec::new();
    if n_cycles < options.min_cycles {
        reasons.push(format!(
            "only {n_cycles} cycles in the analysis window, need {}",
            options.min_cycles
        ));
    }
    if second_half_p2p < 0.5 * first_half_p2p {
        reasons.push(format!(
            "peak-to-peak decays from {first_half_p2p:.3} to {second_half_p2p:.3}"
        ));
    }
    if !(second_half_p2p > 0.05 * peak.max(0.0)) {
        reasons.push(format!(
            "amplitude collapsed: residual swing {second_half_p2p:.3e} vs peak {peak:.3e}"
        ));
    }

    Ok(ScreenReport {
        sustained: reasons.is_empty(),
        n_cycles,
        first_half_p2p,
        second_half_p2p,
        peak,
        trough,
        f1: fund.frequency,
        h1: fund.amplitude,
        overlap_fraction,
        reasons,
    })
}
