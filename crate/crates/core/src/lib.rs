//! Weighted best-packing constants, minimal point-set diameters and their
//! asymptotics.

// `!(x > y)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod configuration;
pub mod diameter;
pub mod error;
pub mod interp;
pub mod packing;
pub mod roots;
mod search;
pub mod tau;
pub mod weights;

pub use asymptotics::{
    asymptotic_ratio, check_cor3_conditions, fpq_asymptote, gaussian_2d_asymptote,
    AsymptoticDiagnostic, ConditionReport, ProbeGrid, Trend,
};
pub use configuration::{config_ratio, Configuration};
pub use diameter::{
    asymptotic_diameter_2d, diameter_bounds, estimate_diameter, exact_diameter, DensityTable,
    DiameterEstimate,
};
pub use error::{Error, Result};
pub use packing::{
    delta_1d, delta_via_theorem1, optimize_packing_config, verify_optimality, DSource,
    OptimizedPacking, PackingResult, VerificationReport,
};
pub use tau::{lemma3_bounds, solve_tau, solve_tau_with, Lemma3Bounds, TauOptions, TauResult};
pub use weights::{
    critical_params, parse_weight_json, validate_class_a, ClassAParams, ValidationReport,
    WeightFunction,
};
