//! Attack-cost estimates for sparse-blinded RLWE secret keys, lattice
//! basis constructors, and parameter search.
//!
//! All bit counts are base-2 logarithms of operation or candidate counts.

pub mod attacks;
pub mod lattice;
pub mod search;

pub use attacks::{
    alpha_balance, beta_from_delta, bkz_log_ops, bkz_poly, brute_force_bits, composite_enum_bits,
    delta_from_beta, expected_blind_norm, expected_secret_norm, gaussian_heuristic_delta,
    log2_binomial, mitm_bits, target_ratio_c, zf_attack_bits, zf_guess_prob, zf_success_prob,
    BetaChoice, GuessModel, ZfEstimate, BETA_MIN,
};
pub use lattice::{build_lattice_basis, build_zf_basis, BasisKind, LatticeBasis, NtruInstance};
pub use search::{
    find_params, min_second_weight, min_weight, setup, setup_for_ring, AttackReport, EnumGate,
    ParamChoice, SearchPolicy,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("no block size up to {dim} reaches root Hermite factor {required_delta}")]
    NoFeasibleBeta { required_delta: f64, dim: usize },

    #[error("no parameters meet the target: {0}")]
    InfeasibleParams(String),

    #[error("lattice dimension d={d} above cap {max}")]
    DimensionCap { d: usize, max: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] otsdec_core::Error),
}

pub type Result<T> = std::result::Result<T, EstimatorError>;
