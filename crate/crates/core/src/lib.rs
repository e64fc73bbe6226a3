//! Decoupled geometric parameterization of planar homographies.
//!
//! A homography on a reference square is written as eight parameters:
//! four for a similarity (equivalent to the positional offsets of two
//! diagonal corners) and four for a kernel transformation (equivalent to
//! the cotangent offsets of four angles of the warped square). Building
//! the matrix from the parameters is a fixed chain of 3×3 products.
//!
//! ```
//! use sks_core::{compose_sks, decompose_sks, HomographyParams8, KernelParams,
//!                SimilarityParams, SquareConfig};
//!
//! let cfg = SquareConfig::for_image(128.0).unwrap();
//! let p = HomographyParams8::new(
//!     SimilarityParams::new(0.05, -0.02, 3.0, 1.5),
//!     KernelParams::new(0.1, 0.02, -0.05, 0.01),
//! );
//! let h = compose_sks(&p, &cfg).unwrap();
//! let back = decompose_sks(&h, &cfg).unwrap();
//! assert!((back.ker.b - 0.02).abs() < 1e-9);
//! ```

pub mod affine;
pub mod bench;
pub mod datagen;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod metrics;
pub mod similarity;
pub mod sks;

pub use affine::{
    affine_kernel_to_matrix, affine_params_to_three_offsets, affine_to_matrix, classify,
    compose_affine_sks, three_offsets_to_affine_params, AffineKernelParams, AffineParams,
    TransformClass,
};
pub use error::{Error, Result};
pub use geometry::{
    apply, compose, invert, projective_distance, CorrespondenceSet, Homography3, Point2,
    SquareConfig, EPS_COMPARE, EPS_SINGULAR,
};
pub use kernel::{
    angular_offsets_to_kernel, cot_theta, kernel_canonical_images, kernel_to_angular_offsets,
    kernel_to_matrix, matrix_to_kernel, AngularOffsets, KernelParams,
};
pub use metrics::{ace_ao, ace_po, quartile_summary, EvalRecord, FiveNumberSummary};
pub use similarity::{
    lift_similarity, matrix_to_similarity, offsets_to_params, params_to_offsets,
    similarity_to_matrix, solve_similarity_two_points, translation_normalizer,
    PositionalOffsets2, SimilarityParams,
};
pub use sks::{
    canonical_normalizer, compose_sks, decompose_sks, dlt_four_point, pq_offsets_closed_form,
    ransac_homography, sks_four_point, HomographyParams8, PositionalOffsets4, RansacResult,
};
