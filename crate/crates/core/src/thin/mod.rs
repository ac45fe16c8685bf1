//! Thin-strip limit: a mollified family `Θ_ε` of a twist with unbounded rate,
//! the one-dimensional operators bounding `λ_j(−Δ_ε) − (π/2ε)²` from above
//! (`M_ε`) and below (the effective operator `−d²/ds² + |Θ_ε′|²/2`), and the
//! number of eigenvalues below the essential threshold.

mod effective;
mod family;
mod perturbation;
mod sandwich;
mod sl;
mod upper;

pub use effective::{effective_spectrum, EffectiveOperator, EffectiveSpectrum, DEFAULT_STEP};
pub use family::{
    default_sample_grid, validate_family, ConditionCheck, EpsConditions, FamilyBase, FamilyReport, MollifiedFamily,
    REGISTERED_K,
};
pub use perturbation::{
    delta_coefficient, log_slope, perturbation_coeffs, perturbation_coeffs_with, sigma, sigma_matrix,
    PerturbationCoeffs, DEFAULT_SIGMA_NODES,
};
pub use sandwich::{
    count_below_threshold, discrete_box_value, sandwich_check, thin_study, ConstantFit, CountResult, SandwichReport,
    SandwichRow, ThinStudy, THRESHOLD_CAVEAT,
};
pub use sl::{DOUBLING_TOL, MAX_HALF_LENGTH};
pub use upper::{
    chi1, chi1_prime, upper_operator_m, upper_spectrum, upper_spectrum_with, w_deviation, w_potential,
    UpperCoefficients, UpperSpectrum, T_QUAD_ORDER,
};
