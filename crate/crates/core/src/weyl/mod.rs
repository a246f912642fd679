//! Weyl sums over products, complete sums, the oscillatory integrals `V_k`,
//! the major/minor arc dissection and diagnostic bound evaluators.

mod arcs;
mod bounds;
mod oscillatory;
pub mod quadrature;
mod sums;

pub use arcs::{classify_arc, major_arc_residual, ArcLabel, ArcTag, MajorArcResidual, RationalApprox};
pub use bounds::{weyl_bound_envelope, BoundParams, Envelope};
pub use oscillatory::{oscillatory_v, v1_linear, v_k, v_k_nested, OscillatoryTable};
pub use sums::{
    box_error_term, complete_sum, complete_sum_naive, complete_sum_spectrum, moment_integral,
    moment_quadrature, normalized_complete_sum, phase_fraction, power_residues, product_residues,
    product_residues_direct, reduce_fraction, units, weyl_sum, weyl_sum_direct, weyl_sums,
};

/// Complex values of exponential sums and integrals.
pub type ComplexValue = num_complex::Complex64;
