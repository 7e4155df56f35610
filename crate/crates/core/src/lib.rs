//! Addresses and uniqueness in overlapping self-similar attractors.
//!
//! The systems studied here are `f_j(x) = λx + (1-λ)p_j`, `j = 0..m`, with
//! one contraction ratio `λ ∈ (0,1)` and anchor points `p_j` whose convex
//! hull `Ω` is `d`-dimensional. Most routines run over `f64` and over exact
//! rationals through the [`Scalar`] trait.
//!
//! ```
//! use overlap_ifs::{classify_point, certify_no_holes, FeasibilityMode, IfsSystem, SearchOptions, Verdict};
//!
//! let sys = IfsSystem::new(0.7, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
//! let mode = FeasibilityMode::ExactNoHoles(certify_no_holes(&sys).unwrap());
//! let report = classify_point(&sys, &[0.3, 0.3], 40, &mode, &SearchOptions::default()).unwrap();
//! assert_eq!(report.verdict, Verdict::MultipleCertified);
//! ```

pub mod address;
pub mod cli;
pub mod conditions;
pub mod deleted_digits;
pub mod error;
pub mod geometry;
pub mod ifs;
pub mod measure;
pub mod montecarlo;
pub mod render;
pub mod scalar;
pub mod triangle;

pub use address::{
    classify_point, enumerate_prefixes, feasible_children, first_bifurcation, is_single_chain,
    ClassificationReport, CycleCertificate, FeasibilityMode, NoHolesCertificate, NoHolesReason,
    PrefixNode, PrefixTree, SearchOptions, Verdict,
};
pub use conditions::{
    certify_no_holes, covering_deficiency, no_holes_sufficient, osc_failure_sufficient,
    pedicini_holds, vertex_overlap_witness, wn_coverage_estimate, wn_coverage_series,
    wn_membership, BlockFamily, OverlapWitness,
};
pub use deleted_digits::{certify_pedicini, count_expansions, DigitSet};
pub use error::{Error, Result};
pub use geometry::{Membership, Polytope};
pub use ifs::{AddressPrefix, IfsFile, IfsSystem};
pub use measure::{box_dim_estimate, mesh_count, uniqueness_grid, MeasureSampler};
pub use montecarlo::Estimate;
pub use render::{render_attractor, PgmImage};
pub use scalar::Scalar;
pub use triangle::{digit_forcing, lambda0, BarycentricTriple, ForcingOutcome};
