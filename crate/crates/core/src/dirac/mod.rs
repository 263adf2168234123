//! Free Dirac operators on a periodic lattice and the weighted-resolvent
//! estimates built on them.
//!
//! `H₀₀` is assembled from its symbol `A(ξ) = Σ α_jξ_j + mass·α₀` on the
//! discrete momentum grid, so its spectrum is exactly the symbol spectrum on
//! that grid. The mass is called `mass` and resolvent powers `mpow`
//! throughout. The space dimension `d` enters every threshold: the Schatten
//! index bound is `p > d/min{r, k}` and the potential decay needs `ρ > d`.

mod commutator;
mod lattice;
mod matrices;
mod potential;
mod schatten;

use thiserror::Error;

use crate::spectral::SpectralError;

pub use commutator::{
    commutator_decay_refinement, commutator_decay_report, commutator_identity_residual,
    weight_commutator, CommutatorDecayReport, CommutatorIdentityCheck, CommutatorRefinement,
    ProfilePoint, COMMUTATOR_TOL,
};
pub use lattice::{
    build_h00, free_resolvent_power, scale_cols, scale_rows, weight_operator, LatticeModel,
    LatticeSummary, Refinement,
};
pub use matrices::{
    diagonalize_symbol, free_symbol, symbol_energy, CliffordDefect, DiracMatrices,
    SymbolDiagonalization,
};
pub use potential::{DecayBound, DecayCheck, MatrixPotential, PotentialSpec};
pub use schatten::{
    default_fit_window, factorization_terms, fit_decay_exponent, holder_budget,
    resolvent_power_difference, schatten_refinement, threshold_p, trace_norm_refinement,
    weighted_resolvent_schatten, weighted_singular_values, FactorizationReport, HolderBudget,
    RefinementLevel, RefinementPlan, RefinementTrend, ResolventDifferenceReport, SchattenNorm,
    SchattenRefinement, TraceNormRefinement, WeightedSchattenReport, DECAY_FIT_TOL,
    EXPANSION_TOL, FACTORIZATION_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiracError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("dimension d = {d} is not one of 1, 2, 3")]
    InvalidDimension { d: usize },
    #[error("momentum has {got} components, expected {expected}")]
    MomentumDimension { expected: usize, got: usize },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("weight exponent r = {r} must be finite and non-negative")]
    InvalidWeight { r: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("resolvent power mpow = {mpow} must be odd")]
    InvalidPower { mpow: u32 },
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("the perturbation has no declared decay bound")]
    UndeclaredDecay,
    #[error("resolvent inversion failed")]
    Singular,
}
