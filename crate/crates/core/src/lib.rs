//! Randomly shifted Steinhaus grids for the Buffon discrepancy problem.
//!
//! A Steinhaus grid in a convex body `Ω` is the union of `n` families of
//! parallel lines with spacing `eps`, one family per direction `πk/n`,
//! clipped to `Ω`. Shifting each family by an independent uniform phase
//! makes the per-family rounding errors at the ends of a chord independent
//! and centered, so that their sum grows like `√n` instead of `n`.
//!
//! Modules:
//! - [`geometry`]: bodies, lines, chords, slice lengths.
//! - [`steinhaus`]: grid construction, length, parameter choice, padding.
//! - [`counting`]: exact crossing counts and an independent segment oracle.
//! - [`discrepancy`]: Crofton target, local discrepancy, sup estimator.
//! - [`harness`]: sweeps, tail and length studies, slope fits, CSV output.
//! - [`cli`]: the `buffon` command line.

pub mod cli;
pub mod counting;
pub mod discrepancy;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod steinhaus;
mod sum;

pub use counting::{
    count_in_interval, count_line, endpoint_error, oracle_count, CountBreakdown, GridOracle,
};
pub use discrepancy::{
    angular_sum, crofton_target, estimate_sup, local_discrepancy, DiscConfig, DiscrepancyReport,
};
pub use geometry::{Chord, ConvexBody, Line, Vec2};
pub use steinhaus::{build_to_length, plan_build, BuildPlan, SteinhausSet};
