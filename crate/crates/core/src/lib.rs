//! Certified brackets for the generalized and joint spectral radius of
//! finite sets of non-negative matrices, the Hadamard (Schur) algebra on
//! matrices, sets and sampled kernels, and a falsification suite for the
//! Hadamard geometric-mean spectral-radius inequalities.

pub mod error;
pub mod inequality;
pub mod kernel;
pub mod matrix;
pub mod sampling;
pub mod set_radius;
pub mod spectral;

pub use error::{Error, Result};
pub use inequality::{
    chain_by_id, chain_catalog, evaluate_chain, randomized_campaign, CampaignConfig, ChainInputs, ChainParams,
    ChainReport, ChainSpec, Domain, EvalOptions, Verdict,
};
pub use kernel::{discretize, kernel_hadamard_mean, to_matrix, KernelModel, KernelSpec};
pub use matrix::{
    hadamard_geometric_mean, hadamard_power, hadamard_product, mat_product, operator_norm, NonNegMatrix,
    WeightMode, WeightVector,
};
pub use spectral::{spectral_radius, spectral_radius_bracket, spectral_radius_exact_small, RadiusBracket};
pub use set_radius::{
    gsr_lower, hadamard_mean_of_sets, jsr_upper, radius_bracket, radius_bracket_detailed, set_power, set_product,
    EnumerationBudget, EnumerationStats, MatrixSet, Pruning, SetRadius,
};
