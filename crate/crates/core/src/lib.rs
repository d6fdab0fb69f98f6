//! Geometry of finite intersections of Euclidean balls: maximum distance from a
//! point, point-in-hull classification, shrinking/growing ball sequences, Monte
//! Carlo estimators of the farthest distance and a subset-sum encoding.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`, which is what reporting code uses.

pub mod classifier;
pub mod dc_solver;
pub mod estimator;
pub mod geometry;
pub mod io;
mod linalg;
mod maxquad;
pub mod oracle2d;
pub mod random;
pub mod sampler;
pub mod scalar;
pub mod sequence;
pub mod ssp;

pub use dc_solver::{feasible_start, minimize_dc, minimize_dc_from, minimize_h, DcSolution, SolveError, SolverOpts};
pub use estimator::{
    fk_profile, lemma23_factor, lemma23_ratio, procedure_b, volume_bisect, EstimateError, EstimateMethod, EstimateReport,
    FkReport, Lemma23Report, ProcedureBParams, VolumeParams,
};
pub use geometry::{
    dc_objective, dc_objective_pieces, dc_pieces, g_value, h_value, hull_contains, min_norm_point, qset_at, qset_radii_sq,
    Ball, BallSet, DcPiece, GeometryError, HullPosition, Instance, Point,
};
pub use classifier::{certify_interval, classify, Case, Classification};
pub use io::{instance_to_json, parse_instance, read_instance, write_instance, InstanceFile, IoError};
pub use oracle2d::{arc_fraction_2d, area_2d, farthest_2d, OracleError, OracleResult};
pub use sampler::{sphere_sample, surface_ratio, volume_ratio, wilson_interval, HitStats, RngSeed, SampleError};
pub use scalar::Scalar;
pub use ssp::{brute_force_ssp, corner_enumeration_r0, decide_by_distance, encode, BruteForce, Decision, Encoding, SspError, SspInstance};
pub use sequence::{
    backward_centers, backward_radii_sq, element_at, forward_centers, forward_radii_sq, procedure_a, ElementView,
    SequenceElement, SequenceError,
};

pub type Point64 = Point<f64>;
pub type Ball64 = Ball<f64>;
pub type BallSet64 = BallSet<f64>;
pub type Instance64 = Instance<f64>;
pub type Point32 = Point<f32>;
pub type Ball32 = Ball<f32>;
pub type BallSet32 = BallSet<f32>;
pub type Instance32 = Instance<f32>;
