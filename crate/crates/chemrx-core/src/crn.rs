//! Core chemical-reaction-network representation.
//!
//! A model is a list of named species with integer initial counts and a list
//! of reactions. Reactions are mass-action (order at most two) or
//! Hill-repressed production, optionally multiplied by a Hill activation gate
//! that reads the live count of some species. Counts are plain molecule
//! numbers in a normalized unit volume, so bimolecular rate constants carry
//! units of 1/(molecules * time) and no volume conversion appears anywhere.
//!
//! The same reaction data drives both simulators: [`Reaction::propensity`]
//! uses exact combinatorics (`N*(N-1)/2` for a self-pair) for the stochastic
//! kernel, while [`Reaction::mean_field_rate`] uses the continuous limit
//! (`x^2/2`) for the deterministic integrator.

use thiserror::Error;

/// Index of a species inside one [`CrnModel`]. Only meaningful for the model
/// that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpeciesId(pub(crate) usize);

impl SpeciesId {
    /// Position of the species in the model's species table and in every
    /// state vector.
    #[must_use]
    pub const fn index(self) -> usize {
        self.0
    }
}

/// Functional role of a species. Roles let downstream passes (decision
/// readout, reset wiring, reporting) find species structurally instead of by
/// name matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeciesRole {
    /// Held input whose count encodes the received sample.
    Input,
    /// Adaptive threshold species compared against the input.
    Threshold,
    /// Protected copy of a threshold's base value.
    BaseThreshold,
    /// Intermediate comparison indicator (on/off pair).
    Indicator,
    /// Decision evidence species.
    Detection,
    /// Evidence already spent on threshold adaptation, still counted at readout.
    SpentEvidence,
    /// Undecided carrier inside an approximate-majority block.
    Blank,
    /// Clock species of an embedded oscillator.
    Oscillator,
    /// Reservoir holding material released during reset.
    Reservoir,
    /// Inert sink.
    Waste,
    /// Anything else.
    Generic,
}

/// A named species plus its role tag.
#[derive(Debug, Clone)]
pub struct Species {
    pub name: String,
    pub role: SpeciesRole,
}

/// Kinetic law of a reaction.
#[derive(Debug, Clone, PartialEq)]
pub enum RateLaw {
    /// Mass action with rate constant `kappa`; propensity is `kappa` times
    /// the number of distinct reactant combinations.
    MassAction { kappa: f64 },
    /// Repressed zeroth-order production at rate `alpha / (1 + N(repressor)^n)`.
    /// Reactant list must be empty.
    HillProduction {
        alpha: f64,
        repressor: SpeciesId,
        exponent: f64,
    },
}

/// Multiplicative Hill activation gate `N^n / (N^n + half^n)` on the live
/// count of `species`. Exactly 0.5 when the count equals `half`, 0 at 0, and
/// strictly increasing in the count.
#[derive(Debug, Clone, PartialEq)]
pub struct HillGate {
    pub species: SpeciesId,
    pub half: f64,
    pub exponent: f64,
}

impl HillGate {
    /// Gate factor for the given state; clamps negative counts (transient
    /// integrator excursions) to zero.
    #[must_use]
    pub fn factor(&self, state: &[f64]) -> f64 {
        let x = state[self.species.0].max(0.0);
        if x == 0.0 {
            return 0.0;
        }
        let xn = pow_checked(x, self.exponent);
        let hn = pow_checked(self.half, self.exponent);
        xn / (xn + hn)
    }
}

/// `x^n` with a fast path for the integer exponents that dominate in practice.
#[inline]
fn pow_checked(x: f64, n: f64) -> f64 {
    if n == 1.0 {
        x
    } else if n == 2.0 {
        x * x
    } else if n.fract() == 0.0 && (0.0..=16.0).contains(&n) {
        x.powi(n as i32)
    } else {
        x.powf(n)
    }
}

/// One reaction: reactant multiset, product multiset, rate law, optional gate.
#[derive(Debug, Clone)]
pub struct Reaction {
    /// Consolidated reactant multiset; stoichiometries are positive.
    pub reactants: Vec<(SpeciesId, u32)>,
    /// Consolidated product multiset.
    pub products: Vec<(SpeciesId, u32)>,
    pub rate: RateLaw,
    pub gate: Option<HillGate>,
}

impl Reaction {
    /// Total molecularity of the reactant side.
    #[must_use]
    pub fn order(&self) -> u32 {
        self.reactants.iter().map(|&(_, nu)| nu).sum()
    }

    /// Stochastic propensity: rate-law factor times exact combination count,
    /// times the gate factor when present. State entries are molecule counts.
    #[must_use]
    pub fn propensity(&self, state: &[f64]) -> f64 {
        let base = match self.rate {
            RateLaw::MassAction { kappa } => {
                let mut a = kappa;
                for &(sp, nu) in &self.reactants {
                    let n = state[sp.0];
                    a *= match nu {
                        1 => n,
                        2 => n * (n - 1.0) * 0.5,
                        _ => unreachable!("validated: order <= 2"),
                    };
                }
                a
            }
            RateLaw::HillProduction {
                alpha,
                repressor,
                exponent,
            } => alpha / (1.0 + pow_checked(state[repressor.0].max(0.0), exponent)),
        };
        let gated = match &self.gate {
            Some(g) => base * g.factor(state),
            None => base,
        };
        gated.max(0.0)
    }

    /// Mean-field reaction rate for the deterministic integrator: identical
    /// to [`Self::propensity`] except that a self-pair contributes `x^2/2`
    /// and negative state entries are clamped to zero.
    #[must_use]
    pub fn mean_field_rate(&self, state: &[f64]) -> f64 {
        let base = match self.rate {
            RateLaw::MassAction { kappa } => {
                let mut a = kappa;
                for &(sp, nu) in &self.reactants {
                    let x = state[sp.0].max(0.0);
                    a *= match nu {
                        1 => x,
                        2 => x * x * 0.5,
                        _ => unreachable!("validated: order <= 2"),
                    };
                }
                a
            }
            RateLaw::HillProduction {
                alpha,
                repressor,
                exponent,
            } => alpha / (1.0 + pow_checked(state[repressor.0].max(0.0), exponent)),
        };
        match &self.gate {
            Some(g) => base * g.factor(state),
            None => base,
        }
    }

    /// Net count change per firing, consolidated and with zero entries
    /// dropped (catalysts disappear here, which is what keeps them out of
    /// simulator dependency updates).
    #[must_use]
    pub fn net_changes(&self) -> Vec<(SpeciesId, i64)> {
        let mut delta: Vec<(SpeciesId, i64)> = Vec::new();
        let mut add = |sp: SpeciesId, d: i64| {
            if let Some(e) = delta.iter_mut().find(|(s, _)| *s == sp) {
                e.1 += d;
            } else {
                delta.push((sp, d));
            }
        };
        for &(sp, nu) in &self.reactants {
            add(sp, -i64::from(nu));
        }
        for &(sp, nu) in &self.products {
            add(sp, i64::from(nu));
        }
        delta.retain(|&(_, d)| d != 0);
        delta
    }

    /// Species whose count changes can alter this reaction's propensity:
    /// reactants, the gate species, and the Hill repressor.
    #[must_use]
    pub fn rate_inputs(&self) -> Vec<SpeciesId> {
        let mut deps: Vec<SpeciesId> = self.reactants.iter().map(|&(sp, _)| sp).collect();
        if let RateLaw::HillProduction { repressor, .. } = self.rate {
            deps.push(repressor);
        }
        if let Some(g) = &self.gate {
            deps.push(g.species);
        }
        deps.sort_unstable();
        deps.dedup();
        deps
    }
}

/// Structural problem found by [`CrnModel::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    DuplicateSpeciesName { name: String },
    DanglingSpecies { reaction: usize },
    NegativeRate { reaction: usize },
    OrderTooHigh { reaction: usize, order: u32 },
    BadHillExponent { reaction: usize, exponent: f64 },
    BadGateHalf { reaction: usize, half: f64 },
    NegativeInitial { species: String },
    NonIntegerInitial { species: String },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::DuplicateSpeciesName { name } => write!(f, "duplicate species name {name:?}"),
            Self::DanglingSpecies { reaction } => {
                write!(f, "reaction {reaction} references a species outside the model")
            }
            Self::NegativeRate { reaction } => {
                write!(f, "reaction {reaction} has a negative rate constant")
            }
            Self::OrderTooHigh { reaction, order } => {
                write!(f, "reaction {reaction} has order {order}, maximum is 2")
            }
            Self::BadHillExponent { reaction, exponent } => {
                write!(f, "reaction {reaction} has Hill exponent {exponent}, must be >= 1")
            }
            Self::BadGateHalf { reaction, half } => {
                write!(f, "reaction {reaction} has gate half-activation {half}, must be > 0")
            }
            Self::NegativeInitial { species } => {
                write!(f, "species {species} has a negative initial count")
            }
            Self::NonIntegerInitial { species } => {
                write!(f, "species {species} has a non-integer initial count")
            }
        }
    }
}

/// Model construction or use error.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model is structurally invalid: {}", format_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("state has {got} entries, model has {expected} species")]
    StateLength { expected: usize, got: usize },
    #[error("reaction index {0} out of range")]
    NoSuchReaction(usize),
    #[error("reaction {reaction} cannot fire: insufficient {species}")]
    InsufficientReactants { reaction: usize, species: String },
    #[error("unknown species {0:?}")]
    UnknownSpecies(String),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A complete reaction network with initial molecule counts.
#[derive(Debug, Clone)]
pub struct CrnModel {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    initial: Vec<f64>,
}

impl CrnModel {
    #[must_use]
    pub fn builder() -> CrnModelBuilder {
        CrnModelBuilder::default()
    }

    /// Reopens a finished model as a builder so further species and
    /// reactions can be appended. Existing species keep their ids, so
    /// `SpeciesId`s taken from this model remain valid in the extension.
    #[must_use]
    pub fn into_builder(self) -> CrnModelBuilder {
        CrnModelBuilder {
            species: self.species,
            reactions: self.reactions,
            initial: self.initial,
        }
    }

    #[must_use]
    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    #[must_use]
    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    #[must_use]
    pub fn species(&self) -> &[Species] {
        &self.species
    }

    #[must_use]
    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    #[must_use]
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Looks a species up by name.
    #[must_use]
    pub fn species_id(&self, name: &str) -> Option<SpeciesId> {
        self.species
            .iter()
            .position(|s| s.name == name)
            .map(SpeciesId)
    }

    /// Like [`Self::species_id`] but returns a typed error naming the species.
    pub fn require_species(&self, name: &str) -> Result<SpeciesId, ModelError> {
        self.species_id(name)
            .ok_or_else(|| ModelError::UnknownSpecies(name.to_owned()))
    }

    #[must_use]
    pub fn species_name(&self, id: SpeciesId) -> &str {
        &self.species[id.0].name
    }

    /// All species carrying the given role, in declaration order.
    #[must_use]
    pub fn species_with_role(&self, role: SpeciesRole) -> Vec<SpeciesId> {
        self.species
            .iter()
            .enumerate()
            .filter(|(_, s)| s.role == role)
            .map(|(i, _)| SpeciesId(i))
            .collect()
    }

    /// Overwrites one initial count (used to inject the held input).
    pub fn set_initial(&mut self, id: SpeciesId, count: f64) {
        self.initial[id.0] = count;
    }

    /// Checked propensity evaluation (hot paths call the reaction directly).
    pub fn propensity(&self, reaction: usize, state: &[f64]) -> Result<f64, ModelError> {
        let r = self
            .reactions
            .get(reaction)
            .ok_or(ModelError::NoSuchReaction(reaction))?;
        if state.len() != self.species.len() {
            return Err(ModelError::StateLength {
                expected: self.species.len(),
                got: state.len(),
            });
        }
        Ok(r.propensity(state))
    }

    /// Fires one reaction in place: subtracts reactants, adds products.
    /// Integer counts stay integers exactly.
    pub fn apply_reaction(&self, reaction: usize, state: &mut [f64]) -> Result<(), ModelError> {
        let r = self
            .reactions
            .get(reaction)
            .ok_or(ModelError::NoSuchReaction(reaction))?;
        if state.len() != self.species.len() {
            return Err(ModelError::StateLength {
                expected: self.species.len(),
                got: state.len(),
            });
        }
        for &(sp, nu) in &r.reactants {
            if state[sp.0] < f64::from(nu) {
                return Err(ModelError::InsufficientReactants {
                    reaction,
                    species: self.species[sp.0].name.clone(),
                });
            }
        }
        for &(sp, nu) in &r.reactants {
            state[sp.0] -= f64::from(nu);
        }
        for &(sp, nu) in &r.products {
            state[sp.0] += f64::from(nu);
        }
        Ok(())
    }

    /// Structural validation; an empty list means the model is well formed.
    #[must_use]
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let n = self.species.len();
        for (i, s) in self.species.iter().enumerate() {
            if self.species[..i].iter().any(|t| t.name == s.name) {
                diags.push(Diagnostic::DuplicateSpeciesName {
                    name: s.name.clone(),
                });
            }
        }
        for (name, &x) in self.species.iter().map(|s| &s.name).zip(&self.initial) {
            if x < 0.0 {
                diags.push(Diagnostic::NegativeInitial {
                    species: name.clone(),
                });
            } else if x.fract() != 0.0 {
                diags.push(Diagnostic::NonIntegerInitial {
                    species: name.clone(),
                });
            }
        }
        for (ri, r) in self.reactions.iter().enumerate() {
            let ids = r
                .reactants
                .iter()
                .chain(&r.products)
                .map(|&(sp, _)| sp)
                .chain(r.gate.iter().map(|g| g.species))
                .chain(match r.rate {
                    RateLaw::HillProduction { repressor, .. } => Some(repressor),
                    RateLaw::MassAction { .. } => None,
                });
            if ids.clone().any(|sp| sp.0 >= n) {
                diags.push(Diagnostic::DanglingSpecies { reaction: ri });
                continue;
            }
            match r.rate {
                RateLaw::MassAction { kappa } => {
                    if kappa < 0.0 {
                        diags.push(Diagnostic::NegativeRate { reaction: ri });
                    }
                    let order = r.order();
                    if order > 2 {
                        diags.push(Diagnostic::OrderTooHigh {
                            reaction: ri,
                            order,
                        });
                    }
                }
                RateLaw::HillProduction {
                    alpha, exponent, ..
                } => {
                    if alpha < 0.0 {
                        diags.push(Diagnostic::NegativeRate { reaction: ri });
                    }
                    if exponent < 1.0 {
                        diags.push(Diagnostic::BadHillExponent {
                            reaction: ri,
                            exponent,
                        });
                    }
                    if !r.reactants.is_empty() {
                        diags.push(Diagnostic::OrderTooHigh {
                            reaction: ri,
                            order: r.order(),
                        });
                    }
                }
            }
            if let Some(g) = &r.gate {
                if g.half <= 0.0 {
                    diags.push(Diagnostic::BadGateHalf {
                        reaction: ri,
                        half: g.half,
                    });
                }
                if g.exponent < 1.0 {
                    diags.push(Diagnostic::BadHillExponent {
                        reaction: ri,
                        exponent: g.exponent,
                    });
                }
            }
        }
        diags
    }
}

/// Incremental model builder. Species are interned by name; reactions refer
/// to previously declared species by id.
#[derive(Debug, Default)]
pub struct CrnModelBuilder {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    initial: Vec<f64>,
}

impl CrnModelBuilder {
    /// Declares a species with an initial count, returning its id. Redeclaring
    /// an existing name returns the existing id and leaves count and role
    /// untouched.
    pub fn species(&mut self, name: &str, role: SpeciesRole, initial: f64) -> SpeciesId {
        if let Some(i) = self.species.iter().position(|s| s.name == name) {
            return SpeciesId(i);
        }
        self.species.push(Species {
            name: name.to_owned(),
            role,
        });
        self.initial.push(initial);
        SpeciesId(self.species.len() - 1)
    }

    /// Adds a mass-action reaction from reactant and product lists (repeat a
    /// species for stoichiometry 2).
    pub fn reaction(&mut self, reactants: &[SpeciesId], products: &[SpeciesId], kappa: f64) {
        self.gated_reaction(reactants, products, kappa, None);
    }

    /// Adds a mass-action reaction with an optional Hill gate.
    pub fn gated_reaction(
        &mut self,
        reactants: &[SpeciesId],
        products: &[SpeciesId],
        kappa: f64,
        gate: Option<HillGate>,
    ) {
        self.reactions.push(Reaction {
            reactants: consolidate(reactants),
            products: consolidate(products),
            rate: RateLaw::MassAction { kappa },
            gate,
        });
    }

    /// Adds a Hill-repressed production reaction for one product molecule.
    pub fn hill_production(
        &mut self,
        product: SpeciesId,
        alpha: f64,
        repressor: SpeciesId,
        exponent: f64,
    ) {
        self.reactions.push(Reaction {
            reactants: Vec::new(),
            products: vec![(product, 1)],
            rate: RateLaw::HillProduction {
                alpha,
                repressor,
                exponent,
            },
            gate: None,
        });
    }

    /// Finalizes the model, rejecting structurally invalid networks.
    pub fn build(self) -> Result<CrnModel, ModelError> {
        let model = CrnModel {
            species: self.species,
            reactions: self.reactions,
            initial: self.initial,
        };
        let diags = model.validate();
        if diags.is_empty() {
            Ok(model)
        } else {
            Err(ModelError::Invalid(diags))
        }
    }
}

fn consolidate(ids: &[SpeciesId]) -> Vec<(SpeciesId, u32)> {
    let mut out: Vec<(SpeciesId, u32)> = Vec::with_capacity(ids.len());
    for &sp in ids {
        if let Some(e) = out.iter_mut().find(|(s, _)| *s == sp) {
            e.1 += 1;
        } else {
            out.push((sp, 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_species() -> (CrnModelBuilder, SpeciesId, SpeciesId) {
        let mut b = CrnModel::builder();
        let a = b.species("A", SpeciesRole::Generic, 10.0);
        let c = b.species("C", SpeciesRole::Generic, 0.0);
        (b, a, c)
    }

    #[test]
    fn unimolecular_propensity_is_kappa_times_count() {
        let (mut b, a, c) = two_species();
        b.reaction(&[a], &[c], 0.8);
        let m = b.build().unwrap();
        assert_relative_eq!(m.propensity(0, &[10.0, 0.0]).unwrap(), 8.0);
    }

    #[test]
    fn self_pair_uses_exact_combinatorics() {
        let (mut b, a, c) = two_species();
        b.reaction(&[a, a], &[c], 1.0);
        let m = b.build().unwrap();
        // 10 molecules form 45 unordered pairs.
        assert_relative_eq!(m.propensity(0, &[10.0, 0.0]).unwrap(), 45.0);
        // Mean-field limit uses x^2/2 instead.
        assert_relative_eq!(m.reactions()[0].mean_field_rate(&[10.0, 0.0]), 50.0);
    }

    #[test]
    fn bimolecular_propensity_is_product_of_counts() {
        let mut b = CrnModel::builder();
        let a = b.species("A", SpeciesRole::Generic, 3.0);
        let c = b.species("C", SpeciesRole::Generic, 7.0);
        let w = b.species("W", SpeciesRole::Waste, 0.0);
        b.reaction(&[a, c], &[w], 2.0);
        let m = b.build().unwrap();
        assert_relative_eq!(m.propensity(0, &[3.0, 7.0, 0.0]).unwrap(), 42.0);
    }

    #[test]
    fn hill_production_matches_repression_formula() {
        let mut b = CrnModel::builder();
        let p = b.species("P", SpeciesRole::Generic, 0.0);
        let m_rna = b.species("M", SpeciesRole::Generic, 0.0);
        b.hill_production(m_rna, 1000.0, p, 2.0);
        let m = b.build().unwrap();
        assert_relative_eq!(m.propensity(0, &[0.0, 0.0]).unwrap(), 1000.0);
        assert_relative_eq!(m.propensity(0, &[3.0, 0.0]).unwrap(), 100.0);
    }

    #[test]
    fn gate_factor_is_half_at_half_activation() {
        let g = HillGate {
            species: SpeciesId(0),
            half: 600.0,
            exponent: 1.0,
        };
        assert_relative_eq!(g.factor(&[600.0]), 0.5);
        assert_relative_eq!(g.factor(&[0.0]), 0.0);
        let g2 = HillGate {
            species: SpeciesId(0),
            half: 600.0,
            exponent: 4.0,
        };
        assert_relative_eq!(g2.factor(&[600.0]), 0.5);
    }

    #[test]
    fn apply_reaction_moves_counts_and_rejects_infeasible_firing() {
        let (mut b, a, c) = two_species();
        b.reaction(&[a], &[c, c], 1.0);
        let m = b.build().unwrap();
        let mut state = vec![2.0, 0.0];
        m.apply_reaction(0, &mut state).unwrap();
        assert_eq!(state, vec![1.0, 2.0]);
        m.apply_reaction(0, &mut state).unwrap();
        assert_eq!(state, vec![0.0, 4.0]);
        let err = m.apply_reaction(0, &mut state).unwrap_err();
        assert!(
            matches!(err, ModelError::InsufficientReactants { .. }),
            "firing with an empty reactant pool must be rejected, got {err:?}"
        );
        assert_eq!(state, vec![0.0, 4.0], "failed firing must not alter state");
    }

    #[test]
    fn catalysts_do_not_appear_in_net_changes() {
        let mut b = CrnModel::builder();
        let y = b.species("Y", SpeciesRole::Input, 5.0);
        let x0 = b.species("X_off", SpeciesRole::Indicator, 3.0);
        let x1 = b.species("X_on", SpeciesRole::Indicator, 0.0);
        b.reaction(&[y, x0], &[y, x1], 1.0);
        let m = b.build().unwrap();
        let net = m.reactions()[0].net_changes();
        assert_eq!(net.len(), 2);
        assert!(net.contains(&(x0, -1)));
        assert!(net.contains(&(x1, 1)));
        assert!(!net.iter().any(|&(sp, _)| sp == y));
    }

    #[test]
    fn validate_flags_structural_problems() {
        // Hand-assemble a broken model to exercise each diagnostic.
        let broken = CrnModel {
            species: vec![
                Species {
                    name: "A".into(),
                    role: SpeciesRole::Generic,
                },
                Species {
                    name: "A".into(),
                    role: SpeciesRole::Generic,
                },
            ],
            reactions: vec![
                Reaction {
                    reactants: vec![(SpeciesId(5), 1)],
                    products: vec![],
                    rate: RateLaw::MassAction { kappa: 1.0 },
                    gate: None,
                },
                Reaction {
                    reactants: vec![(SpeciesId(0), 3)],
                    products: vec![],
                    rate: RateLaw::MassAction { kappa: -1.0 },
                    gate: None,
                },
            ],
            initial: vec![-1.0, 0.5],
        };
        let diags = broken.validate();
        assert!(diags.contains(&Diagnostic::DuplicateSpeciesName { name: "A".into() }));
        assert!(diags.contains(&Diagnostic::DanglingSpecies { reaction: 0 }));
        assert!(diags.contains(&Diagnostic::NegativeRate { reaction: 1 }));
        assert!(diags.contains(&Diagnostic::OrderTooHigh {
            reaction: 1,
            order: 3
        }));
        assert!(diags.contains(&Diagnostic::NegativeInitial {
            species: "A".into()
        }));
        assert!(diags.contains(&Diagnostic::NonIntegerInitial {
            species: "A".into()
        }));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Mass-action propensity is linear in the rate constant.
            #[test]
            fn propensity_homogeneous_in_kappa(
                kappa in 1e-6_f64..1e3,
                scale in 1e-3_f64..1e3,
                n_a in 0u32..500,
                n_b in 0u32..500,
            ) {
                let mut b = CrnModel::builder();
                let a = b.species("A", SpeciesRole::Generic, f64::from(n_a));
                let c = b.species("B", SpeciesRole::Generic, f64::from(n_b));
                b.reaction(&[a, c], &[a], kappa);
                b.reaction(&[a, c], &[a], kappa * scale);
                let m = b.build().unwrap();
                let state = [f64::from(n_a), f64::from(n_b)];
                let p1 = m.reactions()[0].propensity(&state);
                let p2 = m.reactions()[1].propensity(&state);
                prop_assert!((p2 - p1 * scale).abs() <= 1e-9 * p2.abs().max(1.0));
            }

            /// Gate factors stay in [0, 1] and never decrease in the count.
            #[test]
            fn gate_bounded_and_monotone(
                half in 1e-3_f64..1e4,
                exponent in 1.0_f64..8.0,
                x in 0.0_f64..1e5,
                dx in 0.0_f64..1e4,
            ) {
                let g = HillGate { species: SpeciesId(0), half, exponent };
                let lo = g.factor(&[x]);
                let hi = g.factor(&[x + dx]);
                prop_assert!((0.0..=1.0).contains(&lo));
                prop_assert!((0.0..=1.0).contains(&hi));
                prop_assert!(hi >= lo - 1e-12);
            }

            /// Firing conserves the total count implied by the stoichiometry.
            #[test]
            fn apply_reaction_matches_net_changes(
                n_a in 2u32..100,
                n_b in 1u32..100,
            ) {
                let mut b = CrnModel::builder();
                let a = b.species("A", SpeciesRole::Generic, f64::from(n_a));
                let c = b.species("B", SpeciesRole::Generic, f64::from(n_b));
                let d = b.species("D", SpeciesRole::Generic, 0.0);
                b.reaction(&[a, c], &[a, d], 1.0);
                let m = b.build().unwrap();
                let mut state = vec![f64::from(n_a), f64::from(n_b), 0.0];
                let before = state.clone();
                m.apply_reaction(0, &mut state).unwrap();
                for (sp, delta) in m.reactions()[0].net_changes() {
                    prop_assert_eq!(state[sp.index()] - before[sp.index()], delta as f64);
                }
            }
        }
    }
}
