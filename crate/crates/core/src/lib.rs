//! Line-of-sight MIMO channels between uniform linear arrays, with an optional
//! dielectric medium that adds per-path phase shifts.
//!
//! The crate builds path-length and in-medium length matrices, forms the
//! channel, and measures its conditioning through `1/kappa`, the ratio of the
//! smallest to the largest Gram eigenvalue. On top of that it provides the
//! closed-form spacing design rules and searches over medium profiles.

pub mod channel;
pub mod conditioning;
pub mod design;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod matrix;
pub mod medium;
pub mod optimize;

pub use channel::{
    approx_phase_step, closed_form_inner_product_magnitude, column_inner_product, h_fs,
    h_los_combined, h_ps, ChannelMatrix, Provenance,
};
pub use conditioning::{gram, hermitian_eigenvalues, inv_kappa, ConditioningReport};
pub use design::{medium_optimal_spacing, optimal_spacing, solve_thickness, SpacingSolution};
pub use error::{ConfigError, Error, Result};
pub use geometry::{
    approx_distance, exact_distance, path_matrix, spacing_from_factor, ArrayConfig, PathMatrix,
    PathModel,
};
pub use matrix::Matrix;
pub use medium::{
    check_span_constraint, rectangular_lengths, shape_lengths, toeplitz_lengths, LengthMatrix,
    MediumGeometry, MediumSpec, ShapeKind,
};
pub use optimize::{
    optimize_first_row, optimize_l_delta, sweep_l12, sweep_l12_l13, FirstRowBounds,
    FirstRowOptions, LDeltaOptions, LinearGrid, LinkEvaluator, Optimum, SweepResult,
};
