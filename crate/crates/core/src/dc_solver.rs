//! The convex subproblem `y* = argmin { h(x) − g(x) : h(x) ≤ 1 }`.
//!
//! `h − g` is a maximum of quadratics sharing the curvature `1 − λ`, so it is
//! `(1 − λ)`-strongly convex and has a unique minimizer. The unconstrained
//! minimizer is computed exactly by the active-set routine in [`crate::maxquad`].
//! When it violates `h ≤ 1`, the constraint is dualized with a scalar multiplier
//! `ν`: `h − g + ν(h − 1)` is again a maximum of isotropic quadratics (one per
//! pair of pieces) and `h(x(ν))` is non-increasing in `ν`, so `ν` is located by
//! bracketing and bisection.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{dc_pieces, BallSet, GeometryError, Instance, Point};
use crate::maxquad::{minimize_max_quadratics, IsoQuad, MaxQuadSolution};
use crate::scalar::{dist_sq, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOpts<T: Scalar = f64> {
    /// Target accuracy of `y*` in argument norm.
    pub tol: T,
    /// Allowed violation of `h(y*) ≤ 1`.
    pub feas_tol: T,
    /// Budget of active-set iterations, summed over all inner solves.
    pub max_iter: usize,
}

impl<T: Scalar> Default for SolverOpts<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-8), feas_tol: T::lit(1e-9), max_iter: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcSolution<T: Scalar = f64> {
    pub y_star: Point<T>,
    /// `h(y*) − g(y*)`.
    pub value: T,
    /// `√(−value)` when `value ≤ 0`, else 0.
    pub r_lower: T,
    pub h_at_y: T,
    pub iterations: usize,
    /// Stationarity norm of the final KKT combination plus the duality gap.
    pub residual: T,
    /// Multiplier of the constraint `h ≤ 1` (zero when inactive).
    pub multiplier: T,
    /// Indices of the DC pieces carrying weight at `y*`.
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError<T: Scalar = f64> {
    #[error("iteration budget exhausted (best residual {:?})", .best.residual)]
    MaxIterExceeded { best: Box<DcSolution<T>> },
    #[error("no point with h <= 1 exists (min h = {min_h:?}); the intersection is empty")]
    NoFeasibleStart { min_h: T },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn h_pieces<T: Scalar>(q: &BallSet<T>) -> Vec<IsoQuad<T>> {
    q.balls().iter().map(|b| IsoQuad { center: b.center.coords.clone(), offset: -b.radius * b.radius }).collect()
}

/// Exact minimizer of `h` and the minimum value. `−min h` is the squared radius of
/// the smallest "averaged" ball `B(x, √(−min h))` known to enclose the set.
pub fn minimize_h<T: Scalar>(q: &BallSet<T>) -> (Point<T>, T) {
    let sol = minimize_max_quadratics(T::one(), &h_pieces(q), None, 10_000);
    (Point::new(sol.x), sol.value)
}

/// A point with `h ≤ 1`: a ball center, the centroid of the centers, `C0`, or the
/// minimizer of `h`, whichever is found first.
pub fn feasible_start<T: Scalar>(inst: &Instance<T>) -> Result<Point<T>, SolveError<T>> {
    let q = &inst.q;
    let mut candidates: Vec<Point<T>> = q.centers();
    let m = T::from_usize_lossy(q.len());
    let mut centroid = vec![T::zero(); q.dim()];
    for c in q.balls() {
        for (a, &v) in centroid.iter_mut().zip(&c.center.coords) {
            *a += v / m;
        }
    }
    candidates.push(Point::new(centroid));
    candidates.push(inst.c0.clone());
    if let Some(p) = candidates.into_iter().find(|p| q.h_unchecked(&p.coords) <= T::one()) {
        return Ok(p);
    }
    let (x, min_h) = minimize_h(q);
    if min_h <= T::one() {
        Ok(x)
    } else {
        Err(SolveError::NoFeasibleStart { min_h })
    }
}

/// Solves the DC subproblem starting from [`feasible_start`].
pub fn minimize_dc<T: Scalar>(inst: &Instance<T>, opts: &SolverOpts<T>) -> Result<DcSolution<T>, SolveError<T>> {
    let start = feasible_start(inst)?;
    minimize_dc_from(inst, opts, &start)
}

struct Lagrangian<T: Scalar> {
    curv: T,
    pieces: Vec<IsoQuad<T>>,
    /// `(dc piece, h piece)` for each pairwise piece.
    origin: Vec<(usize, usize)>,
}

fn lagrangian_pieces<T: Scalar>(inst: &Instance<T>, dc: &[IsoQuad<T>], nu: T) -> Lagrangian<T> {
    let kappa = T::one() - inst.lambda;
    let curv = kappa + nu;
    let mut pieces = Vec::with_capacity(dc.len() * inst.q.len());
    let mut origin = Vec::with_capacity(pieces.capacity());
    for (k, p) in dc.iter().enumerate() {
        for (j, b) in inst.q.balls().iter().enumerate() {
            let c = &b.center.coords;
            let center = p.center.iter().zip(c).map(|(&d, &cj)| (kappa * d + nu * cj) / curv).collect();
            let offset = p.offset - nu * (b.radius * b.radius + T::one()) + kappa * nu / curv * dist_sq(&p.center, c);
            pieces.push(IsoQuad { center, offset });
            origin.push((k, j));
        }
    }
    Lagrangian { curv, pieces, origin }
}

/// Solves the DC subproblem with the initial active piece chosen at `start`.
pub fn minimize_dc_from<T: Scalar>(
    inst: &Instance<T>,
    opts: &SolverOpts<T>,
    start: &Point<T>,
) -> Result<DcSolution<T>, SolveError<T>> {
    start.check_dim(inst.dim())?;
    if !(opts.tol > T::zero()) || opts.max_iter == 0 {
        return Err(GeometryError::InvalidArgument("solver options need tol > 0 and max_iter >= 1").into());
    }
    let kappa = T::one() - inst.lambda;
    let dc: Vec<IsoQuad<T>> =
        dc_pieces(inst).into_iter().map(|p| IsoQuad { center: p.center.coords, offset: p.offset }).collect();

    let mut budget = opts.max_iter;
    let unconstrained = minimize_max_quadratics(kappa, &dc, Some(&start.coords), budget);
    budget = budget.saturating_sub(unconstrained.iterations);
    let h_unc = inst.q.h_unchecked(&unconstrained.x);
    if h_unc <= T::one() + opts.feas_tol {
        let active = unconstrained.support.clone();
        return finish(inst, opts, &unconstrained, &dc, kappa, T::zero(), active, opts.max_iter - budget);
    }

    // Constraint active: locate ν with h(x(ν)) = 1.
    let feasible = feasible_start(inst)?;
    let solve_at = |nu: T, warm: &[T], budget: &mut usize| -> (MaxQuadSolution<T>, Lagrangian<T>) {
        let lag = lagrangian_pieces(inst, &dc, nu);
        let sol = minimize_max_quadratics(lag.curv, &lag.pieces, Some(warm), (*budget).max(1));
        *budget = budget.saturating_sub(sol.iterations);
        (sol, lag)
    };
    let mut nu_lo = T::zero();
    let mut nu_hi = T::one();
    let mut warm = unconstrained.x.clone();
    let (mut best, mut best_lag) = solve_at(nu_hi, &warm, &mut budget);
    let mut doublings = 0;
    while inst.q.h_unchecked(&best.x) > T::one() {
        nu_lo = nu_hi;
        nu_hi = nu_hi * T::lit(4.0);
        doublings += 1;
        warm = best.x.clone();
        let r = solve_at(nu_hi, &feasible.coords, &mut budget);
        best = r.0;
        best_lag = r.1;
        if doublings > 80 || budget == 0 {
            let (_, min_h) = minimize_h(&inst.q);
            if min_h > T::one() {
                return Err(SolveError::NoFeasibleStart { min_h });
            }
            break;
        }
    }
    for _ in 0..200 {
        let h_hi = inst.q.h_unchecked(&best.x);
        if h_hi >= T::one() - opts.feas_tol || nu_hi - nu_lo <= T::epsilon() * nu_hi || budget == 0 {
            break;
        }
        let mid = (nu_lo + nu_hi) / T::lit(2.0);
        let (sol, lag) = solve_at(mid, &warm, &mut budget);
        if inst.q.h_unchecked(&sol.x) > T::one() {
            nu_lo = mid;
        } else {
            warm = sol.x.clone();
            nu_hi = mid;
            best = sol;
            best_lag = lag;
        }
    }
    let mut active: Vec<usize> = best.support.iter().map(|&s| best_lag.origin[s].0).collect();
    active.sort_unstable();
    active.dedup();
    finish(inst, opts, &best, &best_lag.pieces, best_lag.curv, nu_hi, active, opts.max_iter - budget)
}

fn finish<T: Scalar>(
    inst: &Instance<T>,
    opts: &SolverOpts<T>,
    sol: &MaxQuadSolution<T>,
    pieces: &[IsoQuad<T>],
    curv: T,
    multiplier: T,
    mut active: Vec<usize>,
    iterations: usize,
) -> Result<DcSolution<T>, SolveError<T>> {
    let y = Point::new(sol.x.clone());
    let h = inst.q.h_unchecked(&y.coords);
    let value = h - inst.lambda * y.dist_sq(&inst.c0);
    let r_lower = if value <= T::zero() { (-value).sqrt() } else { T::zero() };
    // Gradient of the weighted active pieces; zero up to rounding at the optimum.
    let mut grad = vec![T::zero(); y.dim()];
    for (&k, &w) in sol.support.iter().zip(&sol.weights) {
        for (g, (&yv, &cv)) in grad.iter_mut().zip(y.coords.iter().zip(&pieces[k].center)) {
            *g += w * T::lit(2.0) * curv * (yv - cv);
        }
    }
    let stationarity = grad.iter().map(|&g| g * g).sum::<T>().sqrt();
    let residual = stationarity + sol.gap();
    active.sort_unstable();
    let out = DcSolution { y_star: y, value, r_lower, h_at_y: h, iterations, residual, multiplier, active };
    if !sol.converged || residual > opts.tol || h > T::one() + opts.feas_tol {
        return Err(SolveError::MaxIterExceeded { best: Box::new(out) });
    }
    Ok(out)
}
