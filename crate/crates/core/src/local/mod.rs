//! Local densities: singular series and its Euler factors, singular
//! integrals, solubility over `R` and `Q_p`, and the assembled constants.

mod density;
mod integral;
mod series;
mod solubility;

pub use density::{
    assemble_density, assemble_density_cached, euler_factor_cached, form_hash, n0,
    predicted_constant, predicted_constant_cached, ConstantReport, DensityCache, DensityReport,
    NoCache, TruncationParams,
};
pub use integral::{
    integral_table, singular_integral_cutoffs, singular_integral_positive,
    singular_integral_with_table, SingularIntegral,
};
pub use series::{
    congruence_count, euler_factor, t_term, truncated_singular_series, EulerFactor, SeriesEstimate,
    EULER_MODULUS_CAP,
};
pub use solubility::{p_adic_verdict, solubility_report, SolubilityConfig, SolubilityReport, Verdict};
