//! Gaussian-process surrogate over the unit-scaled search cube.
//!
//! Matérn 5/2 kernel with isotropic length scale, per-observation noise
//! derived from each score's CI half-width plus a small floor, fit by
//! Cholesky factorization with hyperparameters chosen by log-marginal
//! likelihood over a coarse grid. Numerical trouble escalates jitter; if
//! the factorization still fails the caller falls back to random proposals
//! (and logs that it did).

use nalgebra::{Cholesky, DMatrix, DVector};

/// Observation noise floor added to every diagonal entry, keeping the
/// factorization stable even for repeated near-identical points.
pub const NOISE_FLOOR: f64 = 1e-4;

/// Matérn 5/2 correlation as a function of scaled distance `r = d / ℓ`.
fn matern52(r: f64) -> f64 {
    let s = 5f64.sqrt() * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A fitted Gaussian process.
pub struct Gp {
    x: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
    length_scale: f64,
    signal_var: f64,
    mean: f64,
}

/// Why a fit failed; the optimizer treats any failure as "fall back to
/// random proposals for this batch".
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GpError {
    #[error("need at least 2 observations, got {0}")]
    TooFewPoints(usize),
    #[error("input arity mismatch")]
    Arity,
    #[error("covariance factorization failed even at jitter {max_jitter:e}")]
    Singular { max_jitter: f64 },
}

impl Gp {
    /// Fits hyperparameters by grid-searched log-marginal likelihood.
    ///
    /// `noise` carries one variance per observation (CI-derived); the
    /// global floor is added on top.
    pub fn fit(x: &[Vec<f64>], y: &[f64], noise: &[f64]) -> Result<Gp, GpError> {
        if x.len() < 2 {
            return Err(GpError::TooFewPoints(x.len()));
        }
        if x.len() != y.len() || x.len() != noise.len() {
            return Err(GpError::Arity);
        }
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let emp_var = centered.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        let signal_grid = [
            (emp_var * 0.25).max(1e-6),
            emp_var.max(1e-6),
            (emp_var * 4.0).max(1e-6),
        ];
        let length_grid = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6];

        let mut best: Option<(f64, Gp)> = None;
        for &ell in &length_grid {
            for &sv in &signal_grid {
                if let Ok((gp, lml)) = Gp::fit_at(x, &centered, noise, ell, sv, mean) {
                    if best.as_ref().is_none_or(|(b, _)| lml > *b) {
                        best = Some((lml, gp));
                    }
                }
            }
        }
        best.map(|(_, gp)| gp).ok_or(GpError::Singular {
            max_jitter: MAX_JITTER,
        })
    }

    fn fit_at(
        x: &[Vec<f64>],
        centered_y: &[f64],
        noise: &[f64],
        length_scale: f64,
        signal_var: f64,
        mean: f64,
    ) -> Result<(Gp, f64), GpError> {
        let n = x.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = signal_var * matern52(sq_dist(&x[i], &x[j]).sqrt() / length_scale);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
            k[(i, i)] += NOISE_FLOOR + noise[i];
        }

        let y = DVector::from_column_slice(centered_y);
        let mut jitter = 0.0;
        loop {
            let mut kj = k.clone();
            for i in 0..n {
                kj[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(kj) {
                let alpha = chol.solve(&y);
                let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                let lml = -0.5 * y.dot(&alpha)
                    - 0.5 * log_det
                    - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
                return Ok((
                    Gp {
                        x: x.to_vec(),
                        alpha,
                        chol,
                        length_scale,
                        signal_var,
                        mean,
                    },
                    lml,
                ));
            }
            jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
            if jitter > MAX_JITTER {
                return Err(GpError::Singular {
                    max_jitter: MAX_JITTER,
                });
            }
        }
    }

    /// Posterior mean and variance at a point.
    #[must_use]
    pub fn predict(&self, x_star: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let k_star = DVector::from_iterator(
            n,
            self.x.iter().map(|xi| {
                self.signal_var * matern52(sq_dist(xi, x_star).sqrt() / self.length_scale)
            }),
        );
        let mean = self.mean + k_star.dot(&self.alpha);
        let v = self.chol.solve(&k_star);
        let var = (self.signal_var - k_star.dot(&v)).max(0.0);
        (mean, var)
    }

    /// Expected improvement over `best`, with exploration margin `xi`.
    #[must_use]
    pub fn expected_improvement(&self, x_star: &[f64], best: f64, xi: f64) -> f64 {
        let (mu, var) = self.predict(x_star);
        let sigma = var.sqrt();
        if sigma < 1e-12 {
            return (mu - best - xi).max(0.0);
        }
        let z = (mu - best - xi) / sigma;
        (mu - best - xi) * normal_cdf(z) + sigma * normal_pdf(z)
    }

    #[must_use]
    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }
}

const MAX_JITTER: f64 = 1e-2;

/// Standard normal density.
#[must_use]
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via the Abramowitz-Stegun 7.1.26 erf polynomial
/// (|error| < 1.5e-7, plenty below the Monte-Carlo noise it is compared
/// against).
#[must_use]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_matches_reference_implementation() {
        for z in [-4.0, -2.5, -1.0, -0.3, 0.0, 0.7, 1.5, 3.0] {
            let reference = statrs::function::erf::erf(z / std::f64::consts::SQRT_2);
            let expected = 0.5 * (1.0 + reference);
            assert!(
                (normal_cdf(z) - expected).abs() < 2e-7,
                "normal cdf at {z} drifted from the reference: {} vs {expected}",
                normal_cdf(z)
            );
        }
    }

    #[test]
    fn gp_interpolates_smooth_function_between_samples() {
        let f = |x: f64| (3.0 * x).sin();
        let xs: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 / 8.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| f(x[0])).collect();
        let noise = vec![0.0; xs.len()];
        let gp = Gp::fit(&xs, &ys, &noise).expect("fit should succeed on clean data");
        for x in [0.1, 0.33, 0.61, 0.9] {
            let (mu, _) = gp.predict(&[x]);
            assert!(
                (mu - f(x)).abs() < 0.05,
                "posterior mean at {x} should track the generating function: {mu} vs {}",
                f(x)
            );
        }
    }

    #[test]
    fn gp_predictive_variance_grows_away_from_data() {
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![0.1 + 0.05 * i as f64]).collect();
        let ys = vec![0.2, 0.3, 0.25, 0.28, 0.31];
        let gp = Gp::fit(&xs, &ys, &[0.0; 5]).expect("fit");
        let (_, var_near) = gp.predict(&[0.2]);
        let (_, var_far) = gp.predict(&[0.95]);
        assert!(
            var_far > var_near,
            "variance far from observations ({var_far}) should exceed variance near them ({var_near})"
        );
    }

    #[test]
    fn expected_improvement_is_zero_when_posterior_is_certain_and_worse() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
        let ys = vec![0.0, 0.1, 0.2, 0.1, 0.0, 0.05];
        let gp = Gp::fit(&xs, &ys, &[0.0; 6]).expect("fit");
        let ei = gp.expected_improvement(&[0.0], 5.0, 0.01);
        assert!(
            ei.abs() < 1e-6,
            "EI against an unreachable incumbent should vanish, got {ei}"
        );
    }

    #[test]
    fn duplicated_points_with_noise_still_factorize() {
        let xs = vec![vec![0.5], vec![0.5], vec![0.5], vec![0.6]];
        let ys = vec![0.4, 0.42, 0.38, 0.5];
        let gp = Gp::fit(&xs, &ys, &[1e-3; 4]);
        assert!(
            gp.is_ok(),
            "repeated observation sites must not break the factorization"
        );
    }
}
