//! Ground truth in the plane: the exact farthest point of a disk intersection from
//! `C0`, exact arc fractions of circles about `C0`, and grid areas.
//!
//! The boundary of an intersection of disks is a union of circular arcs. On an arc
//! the distance to `C0` peaks either at an endpoint (an intersection point of two
//! circles) or at the arc's antipode `C_k + r_k·(C_k − C0)/‖C_k − C0‖`, so a finite
//! candidate list is exhaustive.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{BallSet, Instance, Point};
use crate::sampler::{element_bounding_ball, RngSeed, SampleError};
use crate::sequence::{ElementView, SequenceError};

/// Relative floor on the discriminant of a circle pair; below it the circles are
/// treated as tangent and contribute one point.
pub const DISCRIMINANT_FLOOR: f64 = 1e-10;
/// Membership and tightness tolerance for candidates.
pub const CANDIDATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("the intersection is empty")]
    EmptyIntersection,
    #[error("dimension {0} is not supported (the exact oracle is planar)")]
    DimensionUnsupported(usize),
    #[error("invalid oracle argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

impl From<SequenceError> for OracleError {
    fn from(e: SequenceError) -> Self {
        OracleError::Sample(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub r0: f64,
    pub maximizers: Vec<Point>,
    /// For each maximizer, the balls whose boundary it lies on.
    pub certificate: Vec<Vec<usize>>,
}

fn circle_pair(c1: &[f64], r1: f64, c2: &[f64], r2: f64) -> Vec<[f64; 2]> {
    let (dx, dy) = (c2[0] - c1[0], c2[1] - c1[1]);
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return Vec::new();
    }
    let d = d2.sqrt();
    let a = (r1 * r1 - r2 * r2 + d2) / (2.0 * d);
    let h2 = r1 * r1 - a * a;
    let floor = DISCRIMINANT_FLOOR * r1.max(r2).powi(2);
    let (ux, uy) = (dx / d, dy / d);
    let (px, py) = (c1[0] + a * ux, c1[1] + a * uy);
    if h2 < -floor {
        Vec::new()
    } else if h2 <= floor {
        vec![[px, py]]
    } else {
        let h = h2.sqrt();
        vec![[px - h * uy, py + h * ux], [px + h * uy, py - h * ux]]
    }
}

fn tight_balls(q: &BallSet, x: &[f64], scale: f64) -> Vec<usize> {
    q.balls()
        .iter()
        .enumerate()
        .filter(|(_, b)| (crate::scalar::dist_sq(x, &b.center.coords).sqrt() - b.radius).abs() <= CANDIDATE_TOL * scale)
        .map(|(k, _)| k)
        .collect()
}

fn finish(q: &BallSet, c0: &Point, candidates: Vec<Vec<f64>>, scale: f64) -> Result<OracleResult, OracleError> {
    let feasible: Vec<(Vec<f64>, f64)> = candidates
        .into_iter()
        .filter(|x| q.balls().iter().all(|b| b.excess(x) <= CANDIDATE_TOL * scale * scale))
        .map(|x| {
            let d = crate::scalar::dist_sq(&x, &c0.coords).sqrt();
            (x, d)
        })
        .collect();
    let r0 = feasible.iter().map(|(_, d)| *d).fold(f64::NEG_INFINITY, f64::max);
    if !r0.is_finite() {
        return Err(OracleError::EmptyIntersection);
    }
    let mut maximizers: Vec<Point> = Vec::new();
    for (x, d) in feasible {
        if r0 - d <= CANDIDATE_TOL * scale && maximizers.iter().all(|m| m.dist(&Point::new(x.clone())) > CANDIDATE_TOL * scale) {
            maximizers.push(Point::new(x));
        }
    }
    let certificate = maximizers.iter().map(|m| tight_balls(q, &m.coords, scale)).collect();
    Ok(OracleResult { r0, maximizers, certificate })
}

fn instance_scale(inst: &Instance) -> f64 {
    inst.q.balls().iter().map(|b| b.radius + b.center.dist(&inst.c0)).fold(1.0, f64::max)
}

/// Exact maximum distance from `C0` over a planar intersection of disks.
pub fn farthest_2d(inst: &Instance) -> Result<OracleResult, OracleError> {
    if inst.dim() != 2 {
        return Err(OracleError::DimensionUnsupported(inst.dim()));
    }
    let balls = inst.q.balls();
    let c0 = &inst.c0.coords;
    let mut candidates = Vec::new();
    for (k, b) in balls.iter().enumerate() {
        let c = &b.center.coords;
        for other in &balls[k + 1..] {
            candidates.extend(circle_pair(c, b.radius, &other.center.coords, other.radius).into_iter().map(|p| p.to_vec()));
        }
        let d = b.center.dist(&inst.c0);
        if d > 0.0 {
            candidates.push(vec![c[0] + b.radius * (c[0] - c0[0]) / d, c[1] + b.radius * (c[1] - c0[1]) / d]);
        } else {
            // Concentric with C0: every point of the circle is equally far.
            candidates.push(vec![c[0] + b.radius, c[1]]);
        }
    }
    finish(&inst.q, &inst.c0, candidates, instance_scale(inst))
}

/// Validation-grade maximum distance in any dimension: dense uniform samples on
/// every sphere plus the antipodes, filtered for membership. Exact only in the limit.
pub fn farthest_by_sampling(inst: &Instance, samples_per_ball: usize, seed: RngSeed) -> Result<OracleResult, OracleError> {
    if samples_per_ball == 0 {
        return Err(OracleError::InvalidArgument("samples_per_ball must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let dim = inst.dim();
    let mut candidates = Vec::new();
    for b in inst.q.balls() {
        let d = b.center.dist(&inst.c0);
        if d > 0.0 {
            candidates.push(b.center.combine(1.0 + b.radius / d, &inst.c0, -b.radius / d).coords);
        }
        for _ in 0..samples_per_ball {
            let z: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            candidates.push(b.center.coords.iter().zip(&z).map(|(c, v)| c + b.radius * v / n).collect());
        }
    }
    finish(&inst.q, &inst.c0, candidates, instance_scale(inst))
}

/// Sorted, disjoint sub-intervals of `[0, 2π)`.
type ArcSet = Vec<(f64, f64)>;

fn arc_of(center_angle: f64, half_width: f64) -> ArcSet {
    let lo = (center_angle - half_width).rem_euclid(2.0 * PI);
    let hi = lo + 2.0 * half_width;
    if hi <= 2.0 * PI {
        vec![(lo, hi)]
    } else {
        vec![(0.0, hi - 2.0 * PI), (lo, 2.0 * PI)]
    }
}

fn intersect(a: &ArcSet, b: &ArcSet) -> ArcSet {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Exact fraction of the circle `‖x − C0‖ = r` lying in `Q^i_{r²}`.
///
/// On that circle the excess of element `i` is `(1 − λ)^{−i}` times the excess of
/// `Q`, so the per-disk angular ranges are those of the original disks; an empty
/// element contributes 0.
pub fn arc_fraction_2d(inst: &Instance, i: i64, r: f64) -> Result<f64, OracleError> {
    if inst.dim() != 2 {
        return Err(OracleError::DimensionUnsupported(inst.dim()));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(OracleError::InvalidArgument("r must be finite and positive"));
    }
    if ElementView::new(inst, i, r * r)?.is_empty() {
        return Ok(0.0);
    }
    let mut arcs: ArcSet = vec![(0.0, 2.0 * PI)];
    for b in inst.q.balls() {
        let (dx, dy) = (b.center.coords[0] - inst.c0.coords[0], b.center.coords[1] - inst.c0.coords[1]);
        let d = (dx * dx + dy * dy).sqrt();
        let this = if d == 0.0 {
            if r <= b.radius {
                vec![(0.0, 2.0 * PI)]
            } else {
                Vec::new()
            }
        } else {
            // |C0 + r·u(θ) − C|² ≤ ρ²  ⇔  cos(θ − φ) ≥ (r² + d² − ρ²)/(2rd).
            let c = (r * r + d * d - b.radius * b.radius) / (2.0 * r * d);
            if c <= -1.0 {
                vec![(0.0, 2.0 * PI)]
            } else if c > 1.0 {
                Vec::new()
            } else {
                arc_of(dy.atan2(dx), c.acos())
            }
        };
        arcs = intersect(&arcs, &this);
        if arcs.is_empty() {
            return Ok(0.0);
        }
    }
    Ok(arcs.iter().map(|(a, b)| b - a).sum::<f64>() / (2.0 * PI))
}

/// Area of `Q^i_{r²}` by counting grid-cell centers; error is about perimeter × step.
pub fn area_2d(inst: &Instance, i: i64, r_sq_probe: f64, grid_step: f64) -> Result<f64, OracleError> {
    if inst.dim() != 2 {
        return Err(OracleError::DimensionUnsupported(inst.dim()));
    }
    if !(grid_step > 0.0) || !(r_sq_probe >= 0.0) {
        return Err(OracleError::InvalidArgument("grid_step must be positive and r_sq_probe non-negative"));
    }
    let Some((center, radius)) = element_bounding_ball(inst, i, r_sq_probe)? else {
        return Ok(0.0);
    };
    let view = ElementView::new(inst, i, r_sq_probe)?;
    let cells = (radius / grid_step).ceil() as i64 + 1;
    let mut count = 0u64;
    for a in -cells..=cells {
        let x = center[0] + (a as f64 + 0.5) * grid_step;
        for b in -cells..=cells {
            let y = center[1] + (b as f64 + 0.5) * grid_step;
            count += u64::from(view.contains(&[x, y]));
        }
    }
    Ok(count as f64 * grid_step * grid_step)
}
