//! Fundamental-frequency extraction and ensemble stability statistics.
//!
//! Each trajectory's clock signal is mean-subtracted and transformed with a
//! plain (rectangular-window) FFT; the fundamental is the largest non-DC
//! magnitude bin, reported as frequency `k / (N dt)` and single-sided
//! amplitude `2 |X_k| / N`. Ensemble statistics are medians plus empirical
//! CDFs of the absolute relative deviations from those medians.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use thiserror::Error;

use crate::stats::{cdf_at_sorted, median, quantile_sorted};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("spectral analysis needs at least one trajectory")]
    NoTrajectories,
    #[error("signal has {got} samples, grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid must be uniform for FFT analysis (sample {0} deviates); resample first")]
    NonUniformGrid(usize),
    #[error("grid needs at least 8 samples, got {0}")]
    TooShort(usize),
}

/// One signal's fundamental: frequency of the largest non-DC bin and its
/// single-sided amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fundamental {
    pub frequency: f64,
    pub amplitude: f64,
}

/// Ensemble spectral-stability report.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralStats {
    /// Per-trajectory fundamental frequencies.
    pub f1: Vec<f64>,
    /// Per-trajectory fundamental amplitudes.
    pub h1: Vec<f64>,
    pub f1_median: f64,
    pub h1_median: f64,
    /// Sorted |(f1 - median)/median| per trajectory: the frequency-stability
    /// CDF support.
    pub f1_abs_rel_dev: Vec<f64>,
    /// Sorted |(H1 - median)/median| per trajectory.
    pub h1_abs_rel_dev: Vec<f64>,
    /// Frequency resolution of the analysis, 1/(N dt).
    pub delta_f: f64,
}

impl SpectralStats {
    /// Empirical CDF of the absolute relative frequency deviation.
    #[must_use]
    pub fn f1_cdf_at(&self, x: f64) -> f64 {
        cdf_at_sorted(&self.f1_abs_rel_dev, x)
    }

    /// Empirical CDF of the absolute relative amplitude deviation.
    #[must_use]
    pub fn h1_cdf_at(&self, x: f64) -> f64 {
        cdf_at_sorted(&self.h1_abs_rel_dev, x)
    }

    /// Quantile of the absolute relative frequency deviation.
    #[must_use]
    pub fn f1_quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.f1_abs_rel_dev, p)
    }

    /// Quantile of the absolute relative amplitude deviation.
    #[must_use]
    pub fn h1_quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.h1_abs_rel_dev, p)
    }
}

fn check_uniform(times: &[f64]) -> Result<f64, SpectralError> {
    if times.len() < 8 {
        return Err(SpectralError::TooShort(times.len()));
    }
    let dt = times[1] - times[0];
    for i in 2..times.len() {
        let step = times[i] - times[i - 1];
        if (step - dt).abs() > 1e-9 * dt.max(1e-300) {
            return Err(SpectralError::NonUniformGrid(i));
        }
    }
    Ok(dt)
}

/// Fundamental frequency and amplitude of one uniformly sampled signal.
pub fn fundamental(signal: &[f64], times: &[f64]) -> Result<Fundamental, SpectralError> {
    let dt = check_uniform(times)?;
    if signal.len() != times.len() {
        return Err(SpectralError::LengthMismatch {
            expected: times.len(),
            got: signal.len(),
        });
    }
    let mut planner = FftPlanner::new();
    Ok(fundamental_with(signal, dt, &mut planner))
}

fn fundamental_with(signal: &[f64], dt: f64, planner: &mut FftPlanner<f64>) -> Fundamental {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = signal
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);

    let mut best_k = 1;
    let mut best_mag = 0.0;
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        let mag = c.norm();
        if mag > best_mag {
            best_mag = mag;
            best_k = k;
        }
    }
    Fundamental {
        frequency: best_k as f64 / (n as f64 * dt),
        amplitude: 2.0 * best_mag / n as f64,
    }
}

/// Ensemble statistics over many clock signals sampled on one shared uniform
/// grid.
pub fn spectral_stats(signals: &[Vec<f64>], times: &[f64]) -> Result<SpectralStats, SpectralError> {
    if signals.is_empty() {
        return Err(SpectralError::NoTrajectories);
    }
    let dt = check_uniform(times)?;
    let n = times.len();
    for s in signals {
        if s.len() != n {
            return Err(SpectralError::LengthMismatch {
                expected: n,
                got: s.len(),
            });
        }
    }

    let mut planner = FftPlanner::new();
    let fundamentals: Vec<Fundamental> = signals
        .iter()
        .map(|s| fundamental_with(s, dt, &mut planner))
        .collect();

    let f1: Vec<f64> = fundamentals.iter().map(|f| f.frequency).collect();
    let h1: Vec<f64> = fundamentals.iter().map(|f| f.amplitude).collect();
    let f1_median = median(&f1);
    let h1_median = median(&h1);
    let rel = |v: &[f64], m: f64| -> Vec<f64> {
        let mut devs: Vec<f64> = v
            .iter()
            .map(|&x| if m == 0.0 { 0.0 } else { ((x - m) / m).abs() })
            .collect();
        devs.sort_by(|a, b| a.partial_cmp(b).expect("deviations are finite"));
        devs
    };
    Ok(SpectralStats {
        f1_abs_rel_dev: rel(&f1, f1_median),
        h1_abs_rel_dev: rel(&h1, h1_median),
        f1,
        h1,
        f1_median,
        h1_median,
        delta_f: 1.0 / (n as f64 * dt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::time_grid;
    use approx::assert_relative_eq;

    /// The ensemble analysis grid: 4001 samples spanning 2000 time units.
    fn analysis_grid() -> Vec<f64> {
        time_grid(0.0, 2000.0, 4001)
    }

    #[test]
    fn pure_tone_is_recovered_on_the_analysis_grid() {
        let times = analysis_grid();
        let signal: Vec<f64> = times
            .iter()
            .map(|&t| 1000.0 * (2.0 * std::f64::consts::PI * 0.1 * t).sin() + 500.0)
            .collect();
        let f = fundamental(&signal, &times).unwrap();
        let delta_f = 1.0 / (4001.0 * 0.5);
        assert!(
            (f.frequency - 0.1).abs() <= delta_f / 2.0,
            "frequency {} not within half a bin of 0.1",
            f.frequency
        );
        assert_relative_eq!(f.amplitude, 1000.0, max_relative = 0.01);
    }

    #[test]
    fn dominant_tone_wins_over_weaker_harmonic() {
        let times = analysis_grid();
        let signal: Vec<f64> = times
            .iter()
            .map(|&t| {
                let w = 2.0 * std::f64::consts::PI * t;
                800.0 * (0.1 * w).sin() + 200.0 * (0.3 * w).sin()
            })
            .collect();
        let f = fundamental(&signal, &times).unwrap();
        assert!((f.frequency - 0.1).abs() < 1e-3, "got {}", f.frequency);
    }

    #[test]
    fn delta_f_matches_the_observation_window() {
        let times = analysis_grid();
        let signals = vec![times.iter().map(|&t| (0.1 * t).sin()).collect()];
        let stats = spectral_stats(&signals, &times).unwrap();
        assert_relative_eq!(stats.delta_f, 1.0 / 2000.5, max_relative = 1e-12);
        assert!((stats.delta_f - 5e-4).abs() < 1e-6);
    }

    #[test]
    fn stats_are_permutation_invariant() {
        let times = time_grid(0.0, 200.0, 801);
        let make = |freq: f64, amp: f64| -> Vec<f64> {
            times
                .iter()
                .map(|&t| amp * (2.0 * std::f64::consts::PI * freq * t).sin())
                .collect()
        };
        let a = make(0.10, 900.0);
        let b = make(0.11, 1000.0);
        let c = make(0.09, 1100.0);
        let s1 = spectral_stats(&[a.clone(), b.clone(), c.clone()], &times).unwrap();
        let s2 = spectral_stats(&[c, a, b], &times).unwrap();
        assert_eq!(s1.f1_median, s2.f1_median);
        assert_eq!(s1.h1_median, s2.h1_median);
        assert_eq!(s1.f1_abs_rel_dev, s2.f1_abs_rel_dev);
    }

    #[test]
    fn cdfs_are_nondecreasing_and_reach_one() {
        let times = time_grid(0.0, 200.0, 801);
        let signals: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let freq = 0.1 + 0.002 * i as f64;
                times
                    .iter()
                    .map(|&t| 1000.0 * (2.0 * std::f64::consts::PI * freq * t).sin())
                    .collect()
            })
            .collect();
        let stats = spectral_stats(&signals, &times).unwrap();
        let xs = [0.0, 0.001, 0.01, 0.05, 0.2, 1.0];
        let mut prev = 0.0;
        for &x in &xs {
            let v = stats.f1_cdf_at(x);
            assert!(v >= prev, "CDF must be non-decreasing");
            prev = v;
        }
        assert_eq!(stats.f1_cdf_at(10.0), 1.0);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        let mut times = analysis_grid();
        let signal = vec![0.0; times.len()];
        times[17] += 0.05;
        assert!(matches!(
            fundamental(&signal, &times),
            Err(SpectralError::NonUniformGrid(_))
        ));
        assert!(matches!(
            spectral_stats(&[], &analysis_grid()),
            Err(SpectralError::NoTrajectories)
        ));
        assert!(matches!(
            spectral_stats(&[vec![0.0; 5]], &analysis_grid()),
            Err(SpectralError::LengthMismatch { .. })
        ));
    }
}
