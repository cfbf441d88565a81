//! Simulation and optimization core for a clocked chemical-reaction-network
//! receiver.
//!
//! The crate models a molecular multiple-access link: several transmitters
//! release molecule pulses into a shared diffusive medium, a receiver counts
//! arrivals in a sampling volume, and an embedded reaction network decodes
//! which transmitters were active by successive interference cancellation.
//! Everything needed to reproduce that pipeline lives here:
//!
//! * [`crn`]: reaction-network representation shared by both simulators.
//! * [`sim`]: deterministic (adaptive Runge-Kutta) and stochastic (Gillespie
//!   direct method) simulation with reproducible seeding and grid recording.
//! * [`channel`]: diffusive point-source channel, input distribution, and
//!   observation sampling.
//! * [`sic`]: ideal successive-interference-cancellation detector used as
//!   ground truth.
//! * [`oscillators`]: candidate chemical clocks, spectral scoring, and
//!   ranking.
//! * [`blocks`]: construction of the full receiver network from per-stage
//!   rate and count parameters.
//! * [`eval`]: Monte-Carlo error-rate estimation with confidence intervals.
//! * [`optimize`]: budgeted parameter search (Bayesian optimization,
//!   annealing, MCMC) over receiver rate sets.
//! * [`seeds`]: deterministic seed derivation for nested experiment batches.

pub mod blocks;
pub mod channel;
pub mod crn;
pub mod eval;
pub mod optimize;
pub mod oscillators;
pub mod seeds;
pub mod sic;
pub mod sim;
pub mod stats;

pub use crn::{
    CrnModel, CrnModelBuilder, Diagnostic, HillGate, ModelError, RateLaw, Reaction, Species,
    SpeciesId, SpeciesRole,
};
