//! Subset-sum reduction: `(S, T)` becomes a farthest-point instance over an
//! intersection of balls.
//!
//! The polytope `{x ∈ [0,1]^n : S·x ≤ T}` is inscribed in the sphere
//! `∂B(½·1, √n/2)`, which passes through every cube corner. Each facet
//! hyperplane is replaced by an imprint ball whose boundary meets that sphere on
//! the same circle, so on the sphere ball membership equals halfspace membership.
//! With `C0 = (1 − β·S)/2`, a corner `x ∈ {0,1}^n` has
//! `‖x − C0‖² = ‖C0‖² + β·S·x`, so the largest corner distance reaches
//! `‖C0‖² + β·T` exactly when some subset of `S` sums to `T`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Ball, BallSet, GeometryError, Instance, Point};

/// Largest `n` accepted by the exhaustive routines.
pub const MAX_BRUTE_FORCE_N: usize = 24;
/// Membership tolerance for cube corners, which lie on every kept ball's boundary
/// when the corresponding facet is tight.
pub const CORNER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SspInstance {
    pub s: Vec<f64>,
    pub t: f64,
    /// Scale of the `S` shift in `C0`; `None` selects `1/(2·ΣS)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl SspInstance {
    pub fn new(s: Vec<f64>, t: f64) -> Self {
        Self { s, t, beta: None }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn resolved_beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| 1.0 / (2.0 * self.s.iter().sum::<f64>()))
    }

    /// Half the minimum spacing of corner objectives for integer `S`.
    pub fn gap(&self) -> f64 {
        self.resolved_beta() / 2.0
    }

    /// `‖C0‖² + β·T`, the squared distance reached exactly when the instance is solvable.
    pub fn threshold(&self) -> f64 {
        norm_sq(&c0_coords(self)) + self.resolved_beta() * self.t
    }

    pub fn validate(&self) -> Result<(), SspError> {
        if self.s.is_empty() {
            return Err(SspError::InvalidInstance("S must have at least one entry"));
        }
        if self.s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(SspError::InvalidInstance("entries of S must be finite and positive"));
        }
        if !self.t.is_finite() {
            return Err(SspError::InvalidInstance("T must be finite"));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0) || !b.is_finite() {
                return Err(SspError::InvalidInstance("beta must be finite and positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SspError {
    #[error("invalid subset-sum instance: {0}")]
    InvalidInstance(&'static str),
    #[error("the halfspace S·x <= T misses the circumscribed sphere (delta = {delta}, sphere radius {radius}); no cube corner is feasible")]
    FacetMissesSphere { delta: f64, radius: f64 },
    #[error("offset_param {offset} must exceed the facet depth {delta} of every kept facet")]
    OffsetTooSmall { offset: f64, delta: f64 },
    #[error("n = {0} exceeds the enumeration limit of {MAX_BRUTE_FORCE_N}")]
    TooLarge(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FacetKind {
    /// `x_j ≥ 0`.
    Lower(usize),
    /// `x_j ≤ 1`.
    Upper(usize),
    /// `S·x ≤ T`.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DroppedFacet {
    pub facet: FacetKind,
    /// Signed distance from the sphere center to the facet hyperplane.
    pub delta: f64,
    pub reason: DropReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DropReason {
    /// The hyperplane does not cut the open sphere, so it removes no corner.
    TangentOrOutside,
    /// `T ≥ ΣS`: every corner satisfies the sum constraint.
    Redundant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprintBall {
    pub facet: FacetKind,
    /// Unit outward normal of the facet.
    pub normal: Vec<f64>,
    /// Right-hand side of `normal·x ≤ b`.
    pub b: f64,
    pub delta: f64,
    pub ball: Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Encoding {
    pub c0: Point,
    pub sphere_center: Point,
    pub sphere_radius: f64,
    pub beta: f64,
    pub offset_param: f64,
    pub imprints: Vec<ImprintBall>,
    pub dropped: Vec<DroppedFacet>,
    /// Kept imprint balls, or the circumscribed ball alone when every facet was dropped.
    pub balls: BallSet,
    pub threshold: f64,
    pub gap: f64,
}

impl Encoding {
    /// Farthest-point instance over the encoded ball set.
    pub fn instance(&self, lambda: f64) -> Result<Instance, SspError> {
        Ok(Instance::new(self.balls.clone(), self.c0.clone(), lambda)?)
    }

    /// `max_k (‖x − C_k‖² − r_k²)` over the encoded balls.
    pub fn h(&self, x: &[f64]) -> f64 {
        self.balls.balls().iter().map(|b| b.excess(x)).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn c0_coords(ssp: &SspInstance) -> Vec<f64> {
    let beta = ssp.resolved_beta();
    ssp.s.iter().map(|&s| (1.0 - beta * s) / 2.0).collect()
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Default imprint depth: the circumscribed sphere's radius `√n/2`.
pub fn default_offset(n: usize) -> f64 {
    (n as f64).sqrt() / 2.0
}

/// Builds the encoding. `offset_param = None` selects [`default_offset`].
pub fn encode(ssp: &SspInstance, offset_param: Option<f64>) -> Result<Encoding, SspError> {
    ssp.validate()?;
    let n = ssp.n();
    let rho = default_offset(n);
    let offset = offset_param.unwrap_or(rho);
    if !(offset > 0.0) || !offset.is_finite() {
        return Err(SspError::InvalidInstance("offset_param must be finite and positive"));
    }
    let center = vec![0.5; n];
    let sum_s: f64 = ssp.s.iter().sum();
    let s_norm = norm_sq(&ssp.s).sqrt();

    let mut facets: Vec<(FacetKind, Vec<f64>, f64)> = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        facets.push((FacetKind::Lower(j), e.clone(), 0.0));
        e[j] = 1.0;
        facets.push((FacetKind::Upper(j), e, 1.0));
    }
    facets.push((FacetKind::Sum, ssp.s.iter().map(|v| v / s_norm).collect(), ssp.t / s_norm));

    let mut imprints = Vec::new();
    let mut dropped = Vec::new();
    for (facet, normal, b) in facets {
        let delta = b - normal.iter().zip(&center).map(|(a, c)| a * c).sum::<f64>();
        if facet == FacetKind::Sum {
            if ssp.t >= sum_s {
                dropped.push(DroppedFacet { facet, delta, reason: DropReason::Redundant });
                continue;
            }
            if delta <= -rho {
                return Err(SspError::FacetMissesSphere { delta, radius: rho });
            }
        }
        if delta >= rho {
            dropped.push(DroppedFacet { facet, delta, reason: DropReason::TangentOrOutside });
            continue;
        }
        if offset <= delta {
            return Err(SspError::OffsetTooSmall { offset, delta });
        }
        // C = p − offset·â with p = c_s + δ·â; then ‖x − C‖² − r² − (‖x − c_s‖² − ρ²)
        // = 2(offset − δ)(â·x − b), which vanishes exactly on the imprint circle.
        let ball_center: Vec<f64> = center.iter().zip(&normal).map(|(c, a)| c + (delta - offset) * a).collect();
        let r_sq = offset * offset + rho * rho - delta * delta;
        let ball = Ball::new(Point::new(ball_center), r_sq.sqrt())?;
        imprints.push(ImprintBall { facet, normal, b, delta, ball });
    }
    let balls = if imprints.is_empty() {
        BallSet::new(n, vec![Ball::new(Point::new(center.clone()), rho)?])?
    } else {
        BallSet::new(n, imprints.iter().map(|ib| ib.ball.clone()).collect())?
    };
    Ok(Encoding {
        c0: Point::new(c0_coords(ssp)),
        sphere_center: Point::new(center),
        sphere_radius: rho,
        beta: ssp.resolved_beta(),
        offset_param: offset,
        imprints,
        dropped,
        balls,
        threshold: ssp.threshold(),
        gap: ssp.gap(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Solvable,
    Unsolvable,
    Inconclusive,
}

/// Reads the subset-sum answer off an estimate of the farthest distance.
pub fn decide_by_distance(ssp: &SspInstance, r0_estimate: f64, tol: f64) -> Decision {
    let r_sq = r0_estimate * r0_estimate;
    let threshold = ssp.threshold();
    if r_sq >= threshold - tol {
        Decision::Solvable
    } else if r_sq <= threshold - ssp.gap() + tol {
        Decision::Unsolvable
    } else {
        Decision::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BruteForce {
    Solvable(Vec<u8>),
    Unsolvable,
}

fn check_size(n: usize) -> Result<(), SspError> {
    if n > MAX_BRUTE_FORCE_N {
        Err(SspError::TooLarge(n))
    } else {
        Ok(())
    }
}

fn corner(mask: u32, n: usize) -> impl Iterator<Item = u8> {
    (0..n).map(move |j| ((mask >> j) & 1) as u8)
}

/// Exhaustive search over all `2^n` subsets; the witness is the first subset in
/// binary order whose sum equals `T`.
pub fn brute_force_ssp(ssp: &SspInstance) -> Result<BruteForce, SspError> {
    ssp.validate()?;
    let n = ssp.n();
    check_size(n)?;
    let scale = ssp.s.iter().sum::<f64>().max(ssp.t.abs()).max(1.0);
    for mask in 0..(1u32 << n) {
        let sum: f64 = corner(mask, n).zip(&ssp.s).filter(|(b, _)| *b == 1).map(|(_, s)| s).sum();
        if (sum - ssp.t).abs() <= 1e-12 * scale {
            return Ok(BruteForce::Solvable(corner(mask, n).collect()));
        }
    }
    Ok(BruteForce::Unsolvable)
}

/// Largest distance from `C0` to a cube corner inside the encoded ball set
/// (`h ≤ CORNER_TOL`), with the maximizing corner. `None` if no corner is inside.
pub fn corner_enumeration_r0(enc: &Encoding) -> Result<Option<(f64, Vec<u8>)>, SspError> {
    let n = enc.c0.dim();
    check_size(n)?;
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut x = vec![0.0; n];
    for mask in 0..(1u32 << n) {
        for (v, bit) in x.iter_mut().zip(corner(mask, n)) {
            *v = f64::from(bit);
        }
        if enc.h(&x) > CORNER_TOL {
            continue;
        }
        let d = x.iter().zip(&enc.c0.coords).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        if best.as_ref().map_or(true, |(b, _)| d > *b) {
            best = Some((d, corner(mask, n).collect()));
        }
    }
    Ok(best)
}
