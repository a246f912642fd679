//! Hyperbolic sums `Σ_{u_1⋯u_k ≤ N} h(u)` of nonnegative arithmetic
//! functions, their predicted main terms, and the identities behind them.

mod fit;
mod identities;
mod oracle;
mod sums;

pub use fit::{asymptotic_fit, log_grid, AsymptoticModel};
pub use identities::{geometric_identity_check, p_k_eval, v_kj, v_kj_numeric, weighted_mean_target};
pub use oracle::{BoxSumOracle, FamilyParams, FnOracle, Ones, Permuted};
pub use sums::{
    pinned_decomposition, sandwich_bounds, spike_free_prediction, upsilon, upsilon_constrained,
    weighted_mean_sum, weighted_mean_sum_direct, CoordRange, HyperbolicSum, Sandwich,
    SpikeFreePrediction, WeightedMean,
};
