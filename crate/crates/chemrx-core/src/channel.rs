//! Diffusive point-source channel: expected received amplitudes at the
//! sampling time, the Poisson-mixture distribution of received counts, and
//! random observation sampling.
//!
//! Each transmitter releases an impulse of `n_molecules` at `t = 0`; the
//! expected count inside the receiver volume follows the free-diffusion
//! Green's function scaled by that volume. All transmitters share a single
//! sampling time, chosen to maximize the composite (all-transmitters-on)
//! mean signal. With symbols drawn independently and uniformly, the received
//! count is a uniform mixture of `2^M` Poisson components, one per symbol
//! vector.

use rand::Rng;
use thiserror::Error;

/// Geometry and release parameters of the diffusion scenario.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelConfig {
    /// Transmitter distances from the receiver center, meters, sorted
    /// ascending.
    pub distances: Vec<f64>,
    /// Receiver radius, meters.
    pub receiver_radius: f64,
    /// Diffusion coefficient, square meters per second.
    pub diffusion: f64,
    /// Molecules released per bit value 1.
    pub n_molecules: f64,
}

/// Non-fatal modeling concerns surfaced by [`ChannelConfig::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelWarning {
    /// The uniform-concentration assumption inside the receiver needs
    /// `r < 0.15 * d_1`.
    UniformityAssumption { radius: f64, nearest: f64 },
    /// Two transmitters at identical distances produce identical amplitudes,
    /// which the successive-cancellation detector cannot separate.
    DegenerateDistances { index: usize },
}

/// Hard configuration or domain error.
#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel needs at least one transmitter distance")]
    NoTransmitters,
    #[error("distance {0} must be positive, got {1}")]
    NonPositiveDistance(usize, f64),
    #[error("distances must be sorted ascending (violated at index {0})")]
    UnsortedDistances(usize),
    #[error("{name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("impulse response is defined for t > 0, got {0}")]
    NonPositiveTime(f64),
    #[error("transmitter index {got} out of range for {m} transmitters")]
    TxIndex { got: usize, m: usize },
}

impl ChannelConfig {
    /// Reference two-transmitter scenario: 10 and 12 micrometers, 1
    /// micrometer receiver, D = 1e-9 m^2/s, 1e6 molecules per release.
    #[must_use]
    pub fn two_tx_reference() -> Self {
        Self {
            distances: vec![10e-6, 12e-6],
            receiver_radius: 1e-6,
            diffusion: 1e-9,
            n_molecules: 1e6,
        }
    }

    /// Reference three-transmitter scenario: 10, 12 and 14 micrometers.
    #[must_use]
    pub fn three_tx_reference() -> Self {
        Self {
            distances: vec![10e-6, 12e-6, 14e-6],
            receiver_radius: 1e-6,
            diffusion: 1e-9,
            n_molecules: 1e6,
        }
    }

    /// Number of transmitters.
    #[must_use]
    pub fn n_tx(&self) -> usize {
        self.distances.len()
    }

    /// Receiver volume, cubic meters.
    #[must_use]
    pub fn receiver_volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.receiver_radius.powi(3)
    }

    /// Checks hard invariants and returns modeling warnings.
    pub fn validate(&self) -> Result<Vec<ChannelWarning>, ChannelError> {
        if self.distances.is_empty() {
            return Err(ChannelError::NoTransmitters);
        }
        for (i, &d) in self.distances.iter().enumerate() {
            if d <= 0.0 {
                return Err(ChannelError::NonPositiveDistance(i, d));
            }
            if i > 0 && d < self.distances[i - 1] {
                return Err(ChannelError::UnsortedDistances(i));
            }
        }
        for (name, value) in [
            ("receiver radius", self.receiver_radius),
            ("diffusion coefficient", self.diffusion),
            ("molecules per release", self.n_molecules),
        ] {
            if value <= 0.0 {
                return Err(ChannelError::NonPositiveParameter { name, value });
            }
        }
        let mut warnings = Vec::new();
        if self.receiver_radius >= 0.15 * self.distances[0] {
            warnings.push(ChannelWarning::UniformityAssumption {
                radius: self.receiver_radius,
                nearest: self.distances[0],
            });
        }
        for i in 1..self.distances.len() {
            if self.distances[i] == self.distances[i - 1] {
                warnings.push(ChannelWarning::DegenerateDistances { index: i });
            }
        }
        Ok(warnings)
    }

    /// Expected molecule count inside the receiver from transmitter `tx`
    /// (zero-based) at time `t` after its release.
    pub fn impulse_mean(&self, tx: usize, t: f64) -> Result<f64, ChannelError> {
        if tx >= self.distances.len() {
            return Err(ChannelError::TxIndex {
                got: tx,
                m: self.distances.len(),
            });
        }
        if t <= 0.0 {
            return Err(ChannelError::NonPositiveTime(t));
        }
        let d = self.distances[tx];
        let denom = (4.0 * std::f64::consts::PI * self.diffusion * t).powf(1.5);
        Ok(self.n_molecules * self.receiver_volume() / denom
            * (-d * d / (4.0 * self.diffusion * t)).exp())
    }

    /// Composite mean signal with every transmitter active.
    fn composite_mean(&self, t: f64) -> f64 {
        (0..self.n_tx())
            .map(|i| self.impulse_mean(i, t).expect("t > 0 checked by caller"))
            .sum()
    }

    /// Shared sampling time: the maximizer of the composite mean signal,
    /// found by golden-section search. For one transmitter this matches the
    /// closed form `d^2 / (6 D)`.
    pub fn peak_time(&self) -> Result<f64, ChannelError> {
        self.validate()?;
        let d_min = self.distances[0];
        let d_max = *self.distances.last().expect("validated non-empty");
        // Single-transmitter peaks bound the composite peak; widen the
        // bracket so boundary effects cannot bias the search.
        let mut a = 0.5 * d_min * d_min / (6.0 * self.diffusion);
        let mut b = 2.0 * d_max * d_max / (6.0 * self.diffusion);

        let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = self.composite_mean(c);
        let mut fd = self.composite_mean(d);
        for _ in 0..120 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = self.composite_mean(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = self.composite_mean(d);
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Expected amplitude per transmitter at the shared sampling time.
    pub fn amplitudes(&self) -> Result<Vec<f64>, ChannelError> {
        let t_p = self.peak_time()?;
        (0..self.n_tx())
            .map(|i| self.impulse_mean(i, t_p))
            .collect()
    }
}

/// Distribution of the received molecule count under independent uniform
/// binary symbols: a uniform mixture of `2^M` Poisson components with means
/// `s . lambda` over all symbol vectors `s`.
#[derive(Debug, Clone)]
pub struct InputPmf {
    lambda: Vec<f64>,
    probs: Vec<f64>,
}

impl InputPmf {
    /// Per-transmitter amplitudes underlying the mixture.
    #[must_use]
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Probability of receiving exactly `n` molecules; counts beyond the
    /// support have their mass folded into the last bin.
    #[must_use]
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    /// Full probability vector indexed by count.
    #[must_use]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Largest supported count (inclusive).
    #[must_use]
    pub fn max_count(&self) -> usize {
        self.probs.len() - 1
    }

    /// Every mixture component as (symbol vector, Poisson mean), in
    /// ascending binary order with the first transmitter as most significant
    /// bit.
    #[must_use]
    pub fn components(&self) -> Vec<(Vec<u8>, f64)> {
        let m = self.lambda.len();
        (0..1usize << m)
            .map(|code| {
                let s: Vec<u8> = (0..m)
                    .map(|i| ((code >> (m - 1 - i)) & 1) as u8)
                    .collect();
                let mean = symbol_mean(&self.lambda, &s);
                (s, mean)
            })
            .collect()
    }
}

/// Builds the received-count distribution for the given amplitudes. The
/// support is `0..=limit`; when `limit` is `None` it extends far enough past
/// the all-ones mean (twelve standard deviations) that the folded tail mass
/// is below 1e-8.
#[must_use]
pub fn input_pmf(lambda: &[f64], limit: Option<usize>) -> InputPmf {
    assert!(
        lambda.iter().all(|&l| l >= 0.0),
        "amplitudes must be non-negative"
    );
    let m = lambda.len();
    let lambda_sum: f64 = lambda.iter().sum();
    let n_max =
        limit.unwrap_or_else(|| (lambda_sum + 12.0 * (lambda_sum + 1.0).sqrt()).ceil() as usize);

    // log(n!) table, built once; exact cumulative sum.
    let mut ln_fact = vec![0.0_f64; n_max + 1];
    for n in 1..=n_max {
        ln_fact[n] = ln_fact[n - 1] + (n as f64).ln();
    }

    let weight = 0.5_f64.powi(m as i32);
    let mut probs = vec![0.0_f64; n_max + 1];
    for code in 0..1usize << m {
        let mean: f64 = (0..m)
            .filter(|i| (code >> (m - 1 - i)) & 1 == 1)
            .map(|i| lambda[i])
            .sum();
        if mean == 0.0 {
            probs[0] += weight;
            continue;
        }
        let ln_mean = mean.ln();
        for (n, p) in probs.iter_mut().enumerate() {
            let ln_p = n as f64 * ln_mean - mean - ln_fact[n];
            *p += weight * ln_p.exp();
        }
    }

    // Fold the truncated tail into the last bin so the vector sums to one
    // exactly; the tail is tiny by construction of the default support.
    let total: f64 = probs.iter().sum();
    let last = probs.len() - 1;
    probs[last] = (probs[last] + (1.0 - total)).max(0.0);

    InputPmf {
        lambda: lambda.to_vec(),
        probs,
    }
}

/// Mean received count for a symbol vector: the dot product with the
/// amplitudes.
#[must_use]
pub fn symbol_mean(lambda: &[f64], symbols: &[u8]) -> f64 {
    assert_eq!(symbols.len(), lambda.len(), "one bit per transmitter");
    symbols
        .iter()
        .zip(lambda)
        .map(|(&s, &l)| {
            debug_assert!(s <= 1, "symbols are binary");
            f64::from(s) * l
        })
        .sum()
}

/// Draws one received count for the given symbol vector: a Poisson sample
/// with mean `s . lambda`. An all-zeros symbol always yields zero.
#[must_use]
pub fn sample_observation(lambda: &[f64], symbols: &[u8], rng: &mut impl Rng) -> u64 {
    poisson_sample(rng, symbol_mean(lambda, symbols))
}

/// Exact Poisson sampling for any mean; zero mean returns zero. Small means
/// use inversion, large means an exact rejection sampler.
#[must_use]
pub fn poisson_sample(rng: &mut impl Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = rand_distr::Poisson::new(mean).expect("positive finite mean");
    rng.sample(dist) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_config_passes_validation_without_warnings() {
        assert!(ChannelConfig::two_tx_reference().validate().unwrap().is_empty());
        assert!(ChannelConfig::three_tx_reference().validate().unwrap().is_empty());
    }

    #[test]
    fn impulse_mean_matches_reference_values_at_single_tx_peak() {
        let cfg = ChannelConfig::two_tx_reference();
        // Closed-form single-transmitter peak of the nearest transmitter.
        let t = 1e-5_f64.powi(2) / (6.0 * 1e-9);
        assert_relative_eq!(t, 1.0 / 60.0, max_relative = 1e-12);
        let lam1 = cfg.impulse_mean(0, t).unwrap();
        assert!(
            (307.0..310.0).contains(&lam1),
            "nearest transmitter peak amplitude {lam1} outside expected band"
        );
        let lam2 = cfg.impulse_mean(1, t).unwrap();
        assert!(
            (150.0..180.0).contains(&lam2),
            "second transmitter amplitude {lam2} outside expected band"
        );
    }

    #[test]
    fn impulse_mean_vanishes_at_both_time_extremes() {
        let cfg = ChannelConfig::two_tx_reference();
        assert!(cfg.impulse_mean(0, 1e-9).unwrap() < 1e-30);
        assert!(cfg.impulse_mean(0, 1e9).unwrap() < 1e-3);
        assert!(matches!(
            cfg.impulse_mean(0, 0.0),
            Err(ChannelError::NonPositiveTime(_))
        ));
        assert!(matches!(
            cfg.impulse_mean(0, -1.0),
            Err(ChannelError::NonPositiveTime(_))
        ));
    }

    #[test]
    fn impulse_mean_is_unimodal_in_time() {
        let cfg = ChannelConfig::two_tx_reference();
        // Scan a log-time grid and count direction changes.
        let values: Vec<f64> = (0..2000)
            .map(|k| {
                let t = 10f64.powf(-4.0 + 5.0 * k as f64 / 1999.0);
                cfg.impulse_mean(0, t).unwrap()
            })
            .collect();
        let mut changes = 0;
        let mut rising = true;
        for w in values.windows(2) {
            let now_rising = w[1] >= w[0];
            if now_rising != rising {
                changes += 1;
                rising = now_rising;
            }
        }
        assert_eq!(changes, 1, "expected exactly one interior maximum");
    }

    #[test]
    fn single_tx_peak_time_matches_closed_form() {
        let cfg = ChannelConfig {
            distances: vec![10e-6],
            ..ChannelConfig::two_tx_reference()
        };
        let t_p = cfg.peak_time().unwrap();
        let closed = 1e-5_f64.powi(2) / (6.0 * 1e-9);
        assert_relative_eq!(t_p, closed, max_relative = 1e-6);
    }

    #[test]
    fn peak_time_scales_inversely_with_diffusion() {
        let mut cfg = ChannelConfig {
            distances: vec![10e-6],
            ..ChannelConfig::two_tx_reference()
        };
        let t1 = cfg.peak_time().unwrap();
        cfg.diffusion *= 2.0;
        let t2 = cfg.peak_time().unwrap();
        assert_relative_eq!(t1, 2.0 * t2, max_relative = 1e-6);
    }

    #[test]
    fn composite_peak_lies_between_single_tx_peaks_and_matches_grid_oracle() {
        let cfg = ChannelConfig::two_tx_reference();
        let t_p = cfg.peak_time().unwrap();
        let lo = 1e-5_f64.powi(2) / (6.0 * 1e-9);
        let hi = 12e-6_f64.powi(2) / (6.0 * 1e-9);
        assert!(t_p > lo && t_p < hi, "composite peak {t_p} outside ({lo}, {hi})");

        // Brute-force oracle: dense scan of the composite mean.
        let (mut best_t, mut best_v) = (lo, 0.0_f64);
        for k in 0..200_000 {
            let t = lo + (hi - lo) * k as f64 / 199_999.0;
            let v = cfg.impulse_mean(0, t).unwrap() + cfg.impulse_mean(1, t).unwrap();
            if v > best_v {
                best_v = v;
                best_t = t;
            }
        }
        assert_relative_eq!(t_p, best_t, max_relative = 1e-4);
    }

    #[test]
    fn reference_amplitudes_bracket_the_indicator_pool_sizes() {
        let lam = ChannelConfig::two_tx_reference().amplitudes().unwrap();
        assert_eq!(lam.len(), 2);
        // The receiver's comparison pools are built for amplitudes near 308
        // and 167; the shared sampling time lands within five percent.
        assert!((lam[0] - 308.0).abs() / 308.0 < 0.05, "lambda_1 = {}", lam[0]);
        assert!((lam[1] - 167.0).abs() / 167.0 < 0.05, "lambda_2 = {}", lam[1]);
        assert!(lam[0] > lam[1], "amplitudes must decrease with distance");

        let lam3 = ChannelConfig::three_tx_reference().amplitudes().unwrap();
        assert!(lam3[0] > lam3[1] && lam3[1] > lam3[2]);
    }

    #[test]
    fn equal_distances_give_equal_amplitudes_and_a_warning() {
        let cfg = ChannelConfig {
            distances: vec![10e-6, 10e-6],
            ..ChannelConfig::two_tx_reference()
        };
        let warnings = cfg.validate().unwrap();
        assert!(warnings
            .iter()
            .any(|w| matches!(w, ChannelWarning::DegenerateDistances { index: 1 })));
        let lam = cfg.amplitudes().unwrap();
        assert_relative_eq!(lam[0], lam[1]);
    }

    #[test]
    fn uniformity_warning_fires_for_oversized_receiver() {
        let cfg = ChannelConfig {
            receiver_radius: 2e-6,
            ..ChannelConfig::two_tx_reference()
        };
        let warnings = cfg.validate().unwrap();
        assert!(warnings
            .iter()
            .any(|w| matches!(w, ChannelWarning::UniformityAssumption { .. })));
    }

    #[test]
    fn pmf_is_normalized_with_point_mass_at_zero() {
        let pmf = input_pmf(&[308.0, 167.0], None);
        let total: f64 = pmf.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12, "pmf sums to {total}");
        assert!(pmf.prob(0) >= 0.25, "all-zeros component is a point mass at 0");
        let needed = (475.0 + 6.0 * 475.0_f64.sqrt()).ceil() as usize;
        assert!(pmf.max_count() >= needed, "support must cover the mixture bulk");
    }

    #[test]
    fn pmf_has_local_maxima_at_component_means() {
        let pmf = input_pmf(&[308.0, 167.0], None);
        let p = pmf.probs();
        let mut maxima = Vec::new();
        for n in 1..p.len() - 1 {
            if p[n] > p[n - 1] && p[n] >= p[n + 1] {
                maxima.push(n);
            }
        }
        for target in [167.0_f64, 308.0, 475.0] {
            assert!(
                maxima.iter().any(|&n| (n as f64 - target).abs() <= 2.0),
                "no local maximum near {target}, maxima at {maxima:?}"
            );
        }
        assert_eq!(maxima.len(), 3, "exactly three interior modes expected");
    }

    #[test]
    fn zero_amplitude_component_degenerates_to_single_tx_mixture() {
        let two = input_pmf(&[308.0, 0.0], None);
        let one = input_pmf(&[308.0], Some(two.max_count()));
        for n in 0..=two.max_count() {
            assert_relative_eq!(two.prob(n), one.prob(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn all_zero_amplitudes_put_all_mass_at_zero() {
        let pmf = input_pmf(&[0.0], None);
        assert_relative_eq!(pmf.prob(0), 1.0);
    }

    #[test]
    fn components_enumerate_symbol_vectors_in_binary_order() {
        let pmf = input_pmf(&[308.0, 167.0], None);
        let comps = pmf.components();
        assert_eq!(comps.len(), 4);
        assert_eq!(comps[0], (vec![0, 0], 0.0));
        assert_eq!(comps[1], (vec![0, 1], 167.0));
        assert_eq!(comps[2], (vec![1, 0], 308.0));
        assert_eq!(comps[3], (vec![1, 1], 475.0));
    }

    #[test]
    fn observation_sampling_matches_component_means() {
        let lambda = [308.0, 167.0];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            assert_eq!(sample_observation(&lambda, &[0, 0], &mut rng), 0);
        }
        for (symbols, mean) in [(vec![1u8, 0], 308.0), (vec![1, 1], 475.0)] {
            let n = 10_000;
            let total: u64 = (0..n)
                .map(|_| sample_observation(&lambda, &symbols, &mut rng))
                .sum();
            let sample_mean = total as f64 / n as f64;
            let se = (mean / n as f64).sqrt();
            assert!(
                (sample_mean - mean).abs() < 3.0 * se,
                "mean {sample_mean} too far from {mean} for symbols {symbols:?}"
            );
        }
    }

    #[test]
    fn poisson_sampler_handles_edge_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(poisson_sample(&mut rng, 0.0), 0);
        let n = 4000;
        let mean = 308.3;
        let total: u64 = (0..n).map(|_| poisson_sample(&mut rng, mean)).sum();
        let sample_mean = total as f64 / n as f64;
        let se = (mean / n as f64).sqrt();
        assert!(
            (sample_mean - mean).abs() < 4.0 * se,
            "poisson mean {sample_mean} too far from {mean}"
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// The amplitude is linear in the released molecule count and in
            /// the receiver volume.
            #[test]
            fn impulse_mean_scales_linearly(
                scale in 0.1_f64..10.0,
                t in 1e-4_f64..1.0,
            ) {
                let base = ChannelConfig::two_tx_reference();
                let mut more_molecules = base.clone();
                more_molecules.n_molecules *= scale;
                let v0 = base.impulse_mean(0, t).unwrap();
                let v1 = more_molecules.impulse_mean(0, t).unwrap();
                prop_assert!((v1 - scale * v0).abs() <= 1e-9 * v1.abs().max(1e-30));

                // Doubling the radius scales the volume (and amplitude) by 8.
                let mut bigger = base.clone();
                bigger.receiver_radius *= 2.0;
                let v2 = bigger.impulse_mean(0, t).unwrap();
                prop_assert!((v2 - 8.0 * v0).abs() <= 1e-9 * v2.abs().max(1e-30));
            }

            /// Sampling with zero mean is exactly zero regardless of seed.
            #[test]
            fn zero_mean_always_samples_zero(seed in 0u64..10_000) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                prop_assert_eq!(poisson_sample(&mut rng, 0.0), 0);
            }
        }
    }
}
