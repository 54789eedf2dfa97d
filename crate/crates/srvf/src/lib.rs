//! Elastic alignment of one-dimensional functional data.
//!
//! Collections of real-valued functions that differ in both timing
//! (phase) and height (amplitude) are registered by time warping under
//! the square-root velocity representation, where warping acts by
//! isometries and the alignment objective is a proper distance on the
//! quotient of function space by the warping group. The crate provides:
//!
//! - the SRVF transform, warping actions and L2/elastic distances
//!   ([`function`], [`dp`]),
//! - the geometry of the warping group on the unit Hilbert sphere,
//!   including Karcher means of warps ([`sphere`]),
//! - Karcher-mean templates, orbit centering and full-collection
//!   alignment ([`align`]),
//! - consistent signal estimation under random warping, scaling and
//!   translation ([`estimate`]),
//! - alignment-quality criteria ([`metrics`]), synthetic dataset
//!   generators ([`datasets`]) and CSV/JSON I/O ([`io`]).

#![allow(clippy::needless_range_loop)]

pub mod align;
pub mod datasets;
pub mod dp;
pub mod error;
pub mod estimate;
pub mod function;
pub mod io;
pub mod metrics;
pub mod numerics;
pub mod sphere;

pub use align::{
    align_all, align_all_with, center_of_orbit, karcher_mean_orbits, karcher_mean_orbits_with,
    AlignOptions, AlignmentResult,
};
pub use dp::{elastic_distance, optimal_warp, DpConfig};
pub use error::{Error, Result};
pub use function::{
    from_srvf, l2_distance, q_map, to_srvf, warp_function, warp_srvf, SampledFunction, Srvf,
    Warping,
};
pub use metrics::{metric_report, MetricReport};
pub use sphere::{
    exp_map, fr_warp_distance, invert_warp, karcher_mean_warps, log_map,
    random_warps_identity_mean, sphere_to_warp, warp_to_sphere, SpherePoint, TangentVector,
};
