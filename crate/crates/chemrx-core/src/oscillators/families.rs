//! The three candidate clock networks.
//!
//! Each family exposes its parameters as a plain struct and a `build_into`
//! that adds species and reactions to an existing model builder, so the
//! receiver assembly can embed an oscillator next to its own blocks. Every
//! oscillator species carries the `Oscillator` role, which downstream passes
//! use to exempt the clock from reset clearing.

use serde::{Deserialize, Serialize};

use crate::crn::{CrnModelBuilder, SpeciesId, SpeciesRole};

/// Names of the designated complementary clock pair within a built model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockPair {
    pub a: String,
    pub b: String,
}

/// Two approximate-majority switches in a two-link ring with one inverting
/// link: switch 2 follows switch 1, switch 1 follows the inverse of switch 2,
/// giving a net negative feedback loop. All reactions are bimolecular, so
/// counts scale exactly with `pool` when rates scale inversely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Am2Params {
    /// Rate of the internal majority reactions of each switch.
    pub kappa_i: f64,
    /// Rate of the cross-coupling drive (small relative to `kappa_i` for
    /// oscillation).
    pub kappa_e: f64,
    /// Conserved molecule pool per switch.
    pub pool: f64,
}

impl Am2Params {
    /// Adds one approximate-majority triplet (x, y, blank) plus the four
    /// internal reactions.
    fn add_switch(
        b: &mut CrnModelBuilder,
        names: [&str; 3],
        init: [f64; 3],
        kappa: f64,
    ) -> [SpeciesId; 3] {
        let x = b.species(names[0], SpeciesRole::Oscillator, init[0]);
        let y = b.species(names[1], SpeciesRole::Oscillator, init[1]);
        let blank = b.species(names[2], SpeciesRole::Oscillator, init[2]);
        b.reaction(&[x, y], &[x, blank], kappa);
        b.reaction(&[x, y], &[y, blank], kappa);
        b.reaction(&[blank, x], &[x, x], kappa);
        b.reaction(&[blank, y], &[y, y], kappa);
        [x, y, blank]
    }

    /// Catalytic drive of a target switch toward its `x` (or `y`) consensus.
    fn add_drive(
        b: &mut CrnModelBuilder,
        catalyst: SpeciesId,
        target: [SpeciesId; 3],
        toward_x: bool,
        kappa: f64,
    ) {
        let [x, y, blank] = target;
        let (win, lose) = if toward_x { (x, y) } else { (y, x) };
        b.reaction(&[catalyst, lose], &[catalyst, blank], kappa);
        b.reaction(&[catalyst, blank], &[catalyst, win], kappa);
    }

    pub fn build_into(&self, b: &mut CrnModelBuilder) -> ClockPair {
        let p = self.pool;
        // Asymmetric start: switch 1 at one consensus, switch 2 at the other,
        // so the deterministic flow leaves the symmetric saddle immediately.
        let sw1 = Self::add_switch(b, ["X1", "Y1", "B1"], [p, 0.0, 0.0], self.kappa_i);
        let sw2 = Self::add_switch(b, ["X2", "Y2", "B2"], [0.0, p, 0.0], self.kappa_i);
        // Non-inverting link: switch 1 drives switch 2 toward the same side.
        Self::add_drive(b, sw1[0], sw2, true, self.kappa_e);
        Self::add_drive(b, sw1[1], sw2, false, self.kappa_e);
        // Inverting link: switch 2 drives switch 1 toward the opposite side.
        Self::add_drive(b, sw2[0], sw1, false, self.kappa_e);
        Self::add_drive(b, sw2[1], sw1, true, self.kappa_e);
        ClockPair {
            a: "X1".into(),
            b: "Y1".into(),
        }
    }
}

/// Five-gene repression ring: each gene's transcript is produced under Hill
/// repression by the previous gene's protein, translated at `beta`, and both
/// transcript and protein decay first order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PentilatorParams {
    /// Maximal transcription rate.
    pub alpha: f64,
    /// Hill coefficient of the repression.
    pub hill: f64,
    /// Translation rate per transcript.
    pub beta: f64,
    /// Transcript decay rate.
    pub mrna_decay: f64,
    /// Protein decay rate.
    pub protein_decay: f64,
    /// Initial count of the first protein (breaks the ring symmetry).
    pub seed_protein: f64,
    /// Designated minimal-overlap protein pair, chosen at tuning time.
    pub clock_pair: [String; 2],
}

impl PentilatorParams {
    pub const N_GENES: usize = 5;

    pub fn build_into(&self, b: &mut CrnModelBuilder) -> ClockPair {
        let mut mrna = Vec::with_capacity(Self::N_GENES);
        let mut protein = Vec::with_capacity(Self::N_GENES);
        for i in 0..Self::N_GENES {
            let init_p = if i == 0 { self.seed_protein } else { 0.0 };
            mrna.push(b.species(&format!("M{}", i + 1), SpeciesRole::Oscillator, 0.0));
            protein.push(b.species(&format!("P{}", i + 1), SpeciesRole::Oscillator, init_p));
        }
        for i in 0..Self::N_GENES {
            let repressor = protein[(i + Self::N_GENES - 1) % Self::N_GENES];
            b.hill_production(mrna[i], self.alpha, repressor, self.hill);
            b.reaction(&[mrna[i]], &[mrna[i], protein[i]], self.beta);
            b.reaction(&[mrna[i]], &[], self.mrna_decay);
            b.reaction(&[protein[i]], &[], self.protein_decay);
        }
        ClockPair {
            a: self.clock_pair[0].clone(),
            b: self.clock_pair[1].clone(),
        }
    }
}

/// Mixed-mechanism dual-site phosphorylation: a kinase phosphorylates
/// processively (substrate stays bound through both additions) while a
/// phosphatase removes groups distributively (release after each removal).
/// Ten reactions, ten rate constants:
///
/// ```text
///  1: K + S0 -> KS0      2: KS0 -> K + S0   (unbinding)
///  3: KS0 -> KS1         4: KS1 -> K + S2
///  5: F + S2 -> FS2      6: FS2 -> F + S2   (unbinding)
///  7: FS2 -> F + S1
///  8: F + S1 -> FS1      9: FS1 -> F + S1   (unbinding)
/// 10: FS1 -> F + S0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhosphoParams {
    /// Rate constants in the reaction order listed above.
    pub kappa: [f64; 10],
    /// Total substrate, initially all unphosphorylated.
    pub s_total: f64,
    /// Total kinase, initially free.
    pub k_total: f64,
    /// Total phosphatase, initially free.
    pub f_total: f64,
}

impl PhosphoParams {
    pub fn build_into(&self, b: &mut CrnModelBuilder) -> ClockPair {
        let k = b.species("K", SpeciesRole::Oscillator, self.k_total);
        let f = b.species("F", SpeciesRole::Oscillator, self.f_total);
        let s0 = b.species("S0", SpeciesRole::Oscillator, self.s_total);
        let s1 = b.species("S1", SpeciesRole::Oscillator, 0.0);
        let s2 = b.species("S2", SpeciesRole::Oscillator, 0.0);
        let ks0 = b.species("KS0", SpeciesRole::Oscillator, 0.0);
        let ks1 = b.species("KS1", SpeciesRole::Oscillator, 0.0);
        let fs2 = b.species("FS2", SpeciesRole::Oscillator, 0.0);
        let fs1 = b.species("FS1", SpeciesRole::Oscillator, 0.0);

        let kp = &self.kappa;
        b.reaction(&[k, s0], &[ks0], kp[0]);
        b.reaction(&[ks0], &[k, s0], kp[1]);
        b.reaction(&[ks0], &[ks1], kp[2]);
        b.reaction(&[ks1], &[k, s2], kp[3]);
        b.reaction(&[f, s2], &[fs2], kp[4]);
        b.reaction(&[fs2], &[f, s2], kp[5]);
        b.reaction(&[fs2], &[f, s1], kp[6]);
        b.reaction(&[f, s1], &[fs1], kp[7]);
        b.reaction(&[fs1], &[f, s1], kp[8]);
        b.reaction(&[fs1], &[f, s0], kp[9]);

        ClockPair {
            a: "S0".into(),
            b: "K".into(),
        }
    }

    /// Scales every rate constant by `c`, which rescales time exactly: the
    /// trajectory shape is unchanged and the fundamental frequency scales
    /// by `c`.
    #[must_use]
    pub fn time_scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for k in &mut out.kappa {
            *k *= c;
        }
        out
    }

    /// Scales all counts by `c` and bimolecular rates by `1/c`, which
    /// rescales amplitude exactly (every mean-field flux scales by `c`).
    /// Reactions 1, 5 and 8 are the bimolecular ones.
    #[must_use]
    pub fn amplitude_scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.s_total *= c;
        out.k_total *= c;
        out.f_total *= c;
        for i in [0, 4, 7] {
            out.kappa[i] /= c;
        }
        out
    }
}

impl Am2Params {
    /// Uniform time rescale (all reactions are mass action).
    #[must_use]
    pub fn time_scaled(&self, c: f64) -> Self {
        Self {
            kappa_i: self.kappa_i * c,
            kappa_e: self.kappa_e * c,
            ..*self
        }
    }

    /// Exact amplitude rescale: every reaction is bimolecular, so scaling
    /// the pool by `c` and both rates by `1/c` preserves the time course.
    #[must_use]
    pub fn amplitude_scaled(&self, c: f64) -> Self {
        Self {
            kappa_i: self.kappa_i / c,
            kappa_e: self.kappa_e / c,
            pool: self.pool * c,
        }
    }
}
