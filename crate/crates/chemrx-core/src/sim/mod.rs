//! Deterministic and stochastic simulation of a [`CrnModel`](crate::CrnModel)
//! onto a shared recording grid.
//!
//! Both simulators produce a [`Trajectory`]: states sampled at caller-chosen
//! grid times. The deterministic integrator lands on grid times exactly; the
//! stochastic simulator records the state that held at each grid time (the
//! state after the last event at or before it). Keeping the recording
//! contract identical makes downstream consumers (spectral scoring, decision
//! readout, CSV export) agnostic to which kernel produced the data.

mod ode;
mod ssa;

pub use ode::{simulate_ode, simulate_ode_from, OdeOptions, OdeStats};
pub use ssa::{run_ssa_batch, simulate_ssa, simulate_ssa_from, SsaStats};

use std::io::Write as IoWrite;

use thiserror::Error;

/// Simulation-level failure (model structure errors surface separately).
#[derive(Debug, Error)]
pub enum SimError {
    #[error("recording grid is empty")]
    EmptyGrid,
    #[error("recording grid must be strictly increasing (violated at index {0})")]
    NonIncreasingGrid(usize),
    #[error("recording grid starts at {0}, must be >= 0")]
    NegativeStart(f64),
    #[error("initial state has {got} entries, model has {expected} species")]
    StateLength { expected: usize, got: usize },
    #[error("stochastic initial state must have non-negative integer counts, species index {0} has {1}")]
    NonIntegerCount(usize, f64),
    #[error("deterministic integrator stalled at t = {t}: step size underflow")]
    StepUnderflow { t: f64 },
}

/// Evenly spaced recording grid from `t0` to `t_end` inclusive with `n`
/// points (`n >= 2`). Endpoints are exact.
#[must_use]
pub fn time_grid(t0: f64, t_end: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let dt = (t_end - t0) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| t0 + dt * i as f64).collect();
    g[n - 1] = t_end;
    g
}

fn check_grid(grid: &[f64]) -> Result<(), SimError> {
    if grid.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    if grid[0] < 0.0 {
        return Err(SimError::NegativeStart(grid[0]));
    }
    for i in 1..grid.len() {
        if grid[i] <= grid[i - 1] {
            return Err(SimError::NonIncreasingGrid(i));
        }
    }
    Ok(())
}

/// Time series of full state vectors on a recording grid.
///
/// Storage is one flat row-major buffer (`point * n_species + species`),
/// which keeps per-point access contiguous and makes batch runs cheap to
/// collect.
#[derive(Debug, Clone)]
pub struct Trajectory {
    species_names: Vec<String>,
    times: Vec<f64>,
    data: Vec<f64>,
    seed: Option<u64>,
}

impl Trajectory {
    pub(crate) fn with_capacity(
        species_names: Vec<String>,
        n_points: usize,
        seed: Option<u64>,
    ) -> Self {
        let n_species = species_names.len();
        Self {
            species_names,
            times: Vec::with_capacity(n_points),
            data: Vec::with_capacity(n_points * n_species),
            seed,
        }
    }

    pub(crate) fn push_row(&mut self, t: f64, state: &[f64]) {
        debug_assert_eq!(state.len(), self.species_names.len());
        self.times.push(t);
        self.data.extend_from_slice(state);
    }

    #[must_use]
    pub fn n_points(&self) -> usize {
        self.times.len()
    }

    #[must_use]
    pub fn n_species(&self) -> usize {
        self.species_names.len()
    }

    #[must_use]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[must_use]
    pub fn species_names(&self) -> &[String] {
        &self.species_names
    }

    /// Seed used to generate this trajectory; `None` for deterministic runs.
    #[must_use]
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Full state at grid point `i`.
    #[must_use]
    pub fn state_at(&self, i: usize) -> &[f64] {
        let n = self.species_names.len();
        &self.data[i * n..(i + 1) * n]
    }

    /// State at the last grid point.
    #[must_use]
    pub fn final_state(&self) -> &[f64] {
        self.state_at(self.times.len() - 1)
    }

    /// Index of the last grid point at or before `t` (first point if `t`
    /// precedes the grid).
    #[must_use]
    pub fn index_at_time(&self, t: f64) -> usize {
        match self.times.partition_point(|&g| g <= t) {
            0 => 0,
            k => k - 1,
        }
    }

    /// Copy of one species' series across all grid points.
    #[must_use]
    pub fn series(&self, species: usize) -> Vec<f64> {
        let n = self.species_names.len();
        self.times
            .iter()
            .enumerate()
            .map(|(i, _)| self.data[i * n + species])
            .collect()
    }

    /// Writes the trajectory as CSV: an optional `# seed:` comment, a header
    /// of `time` plus species names, then one row per grid point. Numbers use
    /// shortest round-trip formatting so a replay produces identical bytes.
    pub fn write_csv(&self, mut w: impl IoWrite) -> std::io::Result<()> {
        if let Some(seed) = self.seed {
            writeln!(w, "# seed: {seed}")?;
        }
        write!(w, "time")?;
        for name in &self.species_names {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for (i, t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for x in self.state_at(i) {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_hits_endpoints_exactly() {
        let g = time_grid(0.0, 2000.0, 4001);
        assert_eq!(g.len(), 4001);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[4000], 2000.0);
        assert!((g[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_validation_rejects_malformed_grids() {
        assert!(matches!(check_grid(&[]), Err(SimError::EmptyGrid)));
        assert!(matches!(
            check_grid(&[0.0, 1.0, 1.0]),
            Err(SimError::NonIncreasingGrid(2))
        ));
        assert!(matches!(
            check_grid(&[-1.0, 1.0]),
            Err(SimError::NegativeStart(_))
        ));
        assert!(check_grid(&[0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn trajectory_accessors_and_csv_round_trip() {
        let mut tr = Trajectory::with_capacity(vec!["A".into(), "B".into()], 2, Some(7));
        tr.push_row(0.0, &[3.0, 0.0]);
        tr.push_row(1.0, &[2.0, 1.0]);
        assert_eq!(tr.n_points(), 2);
        assert_eq!(tr.state_at(1), &[2.0, 1.0]);
        assert_eq!(tr.final_state(), &[2.0, 1.0]);
        assert_eq!(tr.series(0), vec![3.0, 2.0]);
        assert_eq!(tr.index_at_time(0.5), 0);
        assert_eq!(tr.index_at_time(1.0), 1);
        assert_eq!(tr.index_at_time(-1.0), 0);

        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# seed: 7\ntime,A,B\n0,3,0\n1,2,1\n");
    }
}
