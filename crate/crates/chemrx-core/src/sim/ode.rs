//! Mean-field integration with an adaptive embedded Runge-Kutta pair
//! (Dormand-Prince 5(4), FSAL).
//!
//! The right-hand side is assembled from the model's reactions: each
//! reaction contributes its mean-field rate times its net stoichiometry.
//! Steps are controlled by a mixed absolute/relative error norm and clipped
//! so the solution lands exactly on every recording grid time. Counts that
//! dip below zero after an accepted step are clipped to zero and counted in
//! the run statistics; a non-zero clip count flags a model whose continuous
//! limit is reaching unphysical territory faster than the tolerance resolves.

use crate::crn::{CrnModel, SpeciesId};

use super::{check_grid, SimError, Trajectory};

/// Tolerances and step bounds for the integrator.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Absolute error tolerance per component.
    pub atol: f64,
    /// Relative error tolerance per component.
    pub rtol: f64,
    /// Hard upper bound on the step size (defaults to the grid span).
    pub max_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: 1e-8,
            rtol: 1e-6,
            max_step: None,
        }
    }
}

/// Integration statistics.
#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    /// Number of component clips from negative values after accepted steps.
    pub negative_clips: u64,
    pub rhs_evaluations: u64,
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order weights (also the last stage row, giving the FSAL property).
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FACTOR_MIN: f64 = 0.2;
const FACTOR_MAX: f64 = 5.0;

struct Rhs<'m> {
    model: &'m CrnModel,
    net: Vec<Vec<(SpeciesId, i64)>>,
}

impl<'m> Rhs<'m> {
    fn new(model: &'m CrnModel) -> Self {
        let net = model.reactions().iter().map(|r| r.net_changes()).collect();
        Self { model, net }
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        dy.fill(0.0);
        for (r, net) in self.model.reactions().iter().zip(&self.net) {
            let rate = r.mean_field_rate(y);
            if rate == 0.0 {
                continue;
            }
            for &(sp, delta) in net {
                dy[sp.index()] += rate * delta as f64;
            }
        }
    }
}

/// Integrates the model from its declared initial counts.
pub fn simulate_ode(
    model: &CrnModel,
    grid: &[f64],
    options: &OdeOptions,
) -> Result<(Trajectory, OdeStats), SimError> {
    simulate_ode_from(model, model.initial(), grid, options)
}

/// Integrates the model from an explicit initial state.
pub fn simulate_ode_from(
    model: &CrnModel,
    y0: &[f64],
    grid: &[f64],
    options: &OdeOptions,
) -> Result<(Trajectory, OdeStats), SimError> {
    check_grid(grid)?;
    let n = model.n_species();
    if y0.len() != n {
        return Err(SimError::StateLength {
            expected: n,
            got: y0.len(),
        });
    }

    let rhs = Rhs::new(model);
    let mut stats = OdeStats::default();
    let names = model.species().iter().map(|s| s.name.clone()).collect();
    let mut traj = Trajectory::with_capacity(names, grid.len(), None);

    let mut t = grid[0];
    let mut y = y0.to_vec();
    traj.push_row(t, &y);
    if grid.len() == 1 {
        return Ok((traj, stats));
    }

    let t_end = *grid.last().expect("grid checked non-empty");
    let span = t_end - t;
    let max_step = options.max_step.unwrap_or(span).min(span);

    let mut k = vec![vec![0.0_f64; n]; 7];
    let mut y_stage = vec![0.0_f64; n];
    let mut y_new = vec![0.0_f64; n];

    rhs.eval(&y, &mut k[0]);
    stats.rhs_evaluations += 1;
    let mut h = initial_step(&y, &k[0], options, max_step);
    let mut k1_fresh = true;

    let mut gi = 1;
    while gi < grid.len() {
        let target = grid[gi];
        // The FSAL stage carries over only when the previous step was
        // accepted and the state was not modified by clipping.
        if !k1_fresh {
            rhs.eval(&y, &mut k[0]);
            stats.rhs_evaluations += 1;
            k1_fresh = true;
        }
        let h_step = h.min(target - t);
        if h_step <= f64::EPSILON * t.abs().max(1.0) {
            return Err(SimError::StepUnderflow { t });
        }

        // Stages 2..6.
        let stage_coeffs: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
        for (s, coeffs) in stage_coeffs.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &a) in coeffs.iter().enumerate() {
                    acc += a * k[j][i];
                }
                y_stage[i] = y[i] + h_step * acc;
            }
            rhs.eval(&y_stage, &mut k[s + 1]);
            stats.rhs_evaluations += 1;
        }

        // Fifth-order solution, then its derivative as stage 7 (FSAL).
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += B[j] * k[j][i];
            }
            y_new[i] = y[i] + h_step * acc;
        }
        rhs.eval(&y_new, &mut k[6]);
        stats.rhs_evaluations += 1;

        // Mixed error norm of the embedded difference.
        let mut err_sq = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            e *= h_step;
            let scale = options.atol + options.rtol * y[i].abs().max(y_new[i].abs());
            let r = e / scale;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            stats.steps_accepted += 1;
            t += h_step;
            let mut clipped = false;
            for (dst, &src) in y.iter_mut().zip(y_new.iter()) {
                if src < 0.0 {
                    *dst = 0.0;
                    stats.negative_clips += 1;
                    clipped = true;
                } else {
                    *dst = src;
                }
            }
            if clipped {
                k1_fresh = false;
            } else {
                k.swap(0, 6);
                k1_fresh = true;
            }
            if t == target || (target - t).abs() <= f64::EPSILON * target.abs().max(1.0) {
                t = target;
                traj.push_row(t, &y);
                gi += 1;
            }
            let factor = if err == 0.0 {
                FACTOR_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FACTOR_MIN, FACTOR_MAX)
            };
            h = (h_step * factor).min(max_step);
        } else {
            stats.steps_rejected += 1;
            let factor = (SAFETY * err.powf(-0.2)).clamp(FACTOR_MIN, 1.0);
            h = h_step * factor;
            if h <= f64::EPSILON * t.abs().max(1.0) {
                return Err(SimError::StepUnderflow { t });
            }
            // k1 still matches the unchanged state.
        }
    }

    Ok((traj, stats))
}

/// Conservative first step from the scale of the initial derivative.
fn initial_step(y: &[f64], dy: &[f64], options: &OdeOptions, max_step: f64) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for (yi, dyi) in y.iter().zip(dy) {
        let scale = options.atol + options.rtol * yi.abs();
        d0 = d0.max((yi / scale).abs());
        d1 = d1.max((dyi / scale).abs());
    }
    let h = if d1 <= 1e-12 {
        1e-6
    } else {
        0.01 * d0.max(1.0) / d1
    };
    h.clamp(1e-10, max_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crn::SpeciesRole;
    use crate::sim::time_grid;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let mut b = CrnModel::builder();
        let a = b.species("A", SpeciesRole::Generic, 100.0);
        let w = b.species("W", SpeciesRole::Waste, 0.0);
        b.reaction(&[a], &[w], 0.3);
        let m = b.build().unwrap();
        let grid = time_grid(0.0, 10.0, 21);
        let (traj, stats) = simulate_ode(&m, &grid, &OdeOptions::default()).unwrap();
        assert_eq!(traj.times(), &grid[..], "must land exactly on grid times");
        for (i, &t) in grid.iter().enumerate() {
            let expected = 100.0 * (-0.3 * t).exp();
            assert_relative_eq!(traj.state_at(i)[0], expected, max_relative = 1e-6);
        }
        assert_eq!(stats.negative_clips, 0);
    }

    #[test]
    fn two_step_chain_matches_closed_form() {
        // A -> B -> C with distinct rates has the textbook double-exponential
        // intermediate.
        let (ka, kb) = (1.0, 0.25);
        let mut b = CrnModel::builder();
        let a = b.species("A", SpeciesRole::Generic, 50.0);
        let bb = b.species("B", SpeciesRole::Generic, 0.0);
        let c = b.species("C", SpeciesRole::Generic, 0.0);
        b.reaction(&[a], &[bb], ka);
        b.reaction(&[bb], &[c], kb);
        let m = b.build().unwrap();
        let grid = time_grid(0.0, 8.0, 9);
        let (traj, _) = simulate_ode(&m, &grid, &OdeOptions::default()).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let expected_b = 50.0 * ka / (kb - ka) * ((-ka * t).exp() - (-kb * t).exp());
            assert_relative_eq!(
                traj.state_at(i)[1],
                expected_b,
                max_relative = 1e-5,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn self_pair_mean_field_matches_closed_form() {
        // 2A -> W at rate kappa gives dx/dt = -kappa x^2 (two molecules lost
        // per firing at mean-field rate kappa x^2 / 2), so x(t) = x0/(1 + kappa x0 t).
        let kappa = 0.01;
        let mut b = CrnModel::builder();
        let a = b.species("A", SpeciesRole::Generic, 200.0);
        let w = b.species("W", SpeciesRole::Waste, 0.0);
        b.reaction(&[a, a], &[w], kappa);
        let m = b.build().unwrap();
        let grid = time_grid(0.0, 5.0, 11);
        let (traj, _) = simulate_ode(&m, &grid, &OdeOptions::default()).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let expected = 200.0 / (1.0 + kappa * 200.0 * t);
            assert_relative_eq!(traj.state_at(i)[0], expected, max_relative = 1e-5);
        }
    }

    #[test]
    fn hill_production_with_empty_repressor_grows_linearly() {
        let mut b = CrnModel::builder();
        let p = b.species("P", SpeciesRole::Generic, 0.0);
        let m_rna = b.species("M", SpeciesRole::Generic, 0.0);
        b.hill_production(m_rna, 12.0, p, 2.0);
        let m = b.build().unwrap();
        let grid = time_grid(0.0, 3.0, 4);
        let (traj, _) = simulate_ode(&m, &grid, &OdeOptions::default()).unwrap();
        assert_relative_eq!(traj.final_state()[1], 36.0, max_relative = 1e-7);
    }

    #[test]
    fn gated_reaction_integrates_with_gate_factor() {
        // A -> W gated at half-activation on a constant G pool: effective
        // rate is kappa/2.
        let mut b = CrnModel::builder();
        let a = b.species("A", SpeciesRole::Generic, 100.0);
        let g = b.species("G", SpeciesRole::Oscillator, 600.0);
        let w = b.species("W", SpeciesRole::Waste, 0.0);
        b.gated_reaction(
            &[a],
            &[w],
            0.4,
            Some(crate::crn::HillGate {
                species: g,
                half: 600.0,
                exponent: 1.0,
            }),
        );
        let m = b.build().unwrap();
        let grid = time_grid(0.0, 5.0, 6);
        let (traj, _) = simulate_ode(&m, &grid, &OdeOptions::default()).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let expected = 100.0 * (-0.2 * t).exp();
            assert_relative_eq!(traj.state_at(i)[0], expected, max_relative = 1e-6);
        }
    }

    #[test]
    fn tight_and_loose_tolerances_bracket_accuracy() {
        let mut b = CrnModel::builder();
        let a = b.species("A", SpeciesRole::Generic, 1000.0);
        let w = b.species("W", SpeciesRole::Waste, 0.0);
        b.reaction(&[a], &[w], 2.0);
        let m = b.build().unwrap();
        let grid = vec![0.0, 4.0];
        let exact = 1000.0 * (-8.0_f64).exp();

        let tight = OdeOptions {
            atol: 1e-12,
            rtol: 1e-10,
            max_step: None,
        };
        let loose = OdeOptions {
            atol: 1e-4,
            rtol: 1e-3,
            max_step: None,
        };
        let (tr_tight, st_tight) = simulate_ode(&m, &grid, &tight).unwrap();
        let (tr_loose, st_loose) = simulate_ode(&m, &grid, &loose).unwrap();
        let err_tight = (tr_tight.final_state()[0] - exact).abs();
        let err_loose = (tr_loose.final_state()[0] - exact).abs();
        assert!(
            err_tight < err_loose,
            "tighter tolerances must not be less accurate: {err_tight} vs {err_loose}"
        );
        assert!(
            st_tight.steps_accepted > st_loose.steps_accepted,
            "tighter tolerances must take more steps"
        );
    }
}
