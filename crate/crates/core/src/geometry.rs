//! Ball-intersection primitives.
//!
//! An intersection of closed balls `Q = ∩ B̄(C_k, r_k)` is the zero sub-level set
//! of `h(x) = max_k ‖x − C_k‖² − r_k²`. Together with `g(x) = λ‖x − C0‖²` this
//! gives the difference-of-convex objective `h − g`, which is itself a maximum
//! of isotropic quadratics sharing the curvature `1 − λ` (see [`DcPiece`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::scalar::{dist_sq, dot, norm_sq, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate or parameter")]
    NonFinite,
    #[error("ball {index} has non-positive radius")]
    NonPositiveRadius { index: usize },
    #[error("a ball set needs at least one ball")]
    NoBalls,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("lambda must lie in the open interval (0, 1), got {0}")]
    LambdaOutOfRange(f64),
    #[error("squared radius of ball {index} is non-positive: the set is empty")]
    EmptySet { index: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// A point of `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point<T: Scalar = f64> {
    pub coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![T::zero(); dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn dist_sq(&self, other: &Point<T>) -> T {
        dist_sq(&self.coords, &other.coords)
    }

    pub fn dist(&self, other: &Point<T>) -> T {
        self.dist_sq(other).sqrt()
    }

    pub fn norm(&self) -> T {
        norm_sq(&self.coords).sqrt()
    }

    /// `self + t * (other - self)`.
    pub fn lerp(&self, other: &Point<T>, t: T) -> Point<T> {
        Point::new(self.coords.iter().zip(&other.coords).map(|(&a, &b)| a + t * (b - a)).collect())
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: T, other: &Point<T>, beta: T) -> Point<T> {
        Point::new(self.coords.iter().zip(&other.coords).map(|(&a, &b)| alpha * a + beta * b).collect())
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: self.dim() });
        }
        Ok(())
    }
}

impl<T: Scalar> From<Vec<T>> for Point<T> {
    fn from(v: Vec<T>) -> Self {
        Point::new(v)
    }
}

/// A closed ball `B̄(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball<T: Scalar = f64> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: Point<T>, radius: T) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if radius <= T::zero() {
            return Err(GeometryError::NonPositiveRadius { index: 0 });
        }
        Ok(Self { center, radius })
    }

    /// `‖x − C‖² − r²`, non-positive exactly on the ball.
    #[inline]
    pub fn excess(&self, x: &[T]) -> T {
        dist_sq(x, &self.center.coords) - self.radius * self.radius
    }

    #[inline]
    pub fn contains(&self, x: &[T]) -> bool {
        self.excess(x) <= T::zero()
    }
}

/// An ordered, non-empty list of balls in a common dimension. The index of a ball
/// in the list is its identity throughout the toolkit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallSet<T: Scalar = f64> {
    dim: usize,
    balls: Vec<Ball<T>>,
}

impl<T: Scalar> BallSet<T> {
    pub fn new(dim: usize, balls: Vec<Ball<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if balls.is_empty() {
            return Err(GeometryError::NoBalls);
        }
        for (index, b) in balls.iter().enumerate() {
            b.center.check_dim(dim)?;
            if !b.center.is_finite() || !b.radius.is_finite() {
                return Err(GeometryError::NonFinite);
            }
            if b.radius <= T::zero() {
                return Err(GeometryError::NonPositiveRadius { index });
            }
        }
        Ok(Self { dim, balls })
    }

    /// Builds a set from centers and squared radii. A non-positive squared radius
    /// is reported as [`GeometryError::EmptySet`].
    pub fn from_squared(dim: usize, centers: Vec<Point<T>>, radii_sq: &[T]) -> Result<Self> {
        if let Some(index) = radii_sq.iter().position(|&r| !(r > T::zero())) {
            return Err(GeometryError::EmptySet { index });
        }
        let balls = centers
            .into_iter()
            .zip(radii_sq)
            .map(|(center, &r2)| Ball { center, radius: r2.sqrt() })
            .collect();
        Self::new(dim, balls)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn balls(&self) -> &[Ball<T>] {
        &self.balls
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn centers(&self) -> Vec<Point<T>> {
        self.balls.iter().map(|b| b.center.clone()).collect()
    }

    /// `h(x)` without the dimension check.
    #[inline]
    pub(crate) fn h_unchecked(&self, x: &[T]) -> T {
        self.balls.iter().map(|b| b.excess(x)).fold(T::neg_infinity(), T::max)
    }

    /// Exact per-ball membership test.
    pub fn contains(&self, x: &[T]) -> bool {
        self.balls.iter().all(|b| b.contains(x))
    }
}

/// A max-distance problem: the ball set `Q`, the query point `C0` and the DC
/// parameter `λ ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance<T: Scalar = f64> {
    pub q: BallSet<T>,
    pub c0: Point<T>,
    pub lambda: T,
}

impl<T: Scalar> Instance<T> {
    pub fn new(q: BallSet<T>, c0: Point<T>, lambda: T) -> Result<Self> {
        c0.check_dim(q.dim())?;
        if !c0.is_finite() || !lambda.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(lambda > T::zero() && lambda < T::one()) {
            return Err(GeometryError::LambdaOutOfRange(lambda.to_f64_lossy()));
        }
        Ok(Self { q, c0, lambda })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(self.q.clone(), self.c0.clone(), lambda)
    }
}

/// One piece of the DC objective in isotropic form:
/// `scale·‖x − center‖² + offset = ‖x − C_k‖² − r_k² − λ‖x − C0‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcPiece<T: Scalar = f64> {
    pub index: usize,
    pub center: Point<T>,
    pub offset: T,
    pub scale: T,
}

impl<T: Scalar> DcPiece<T> {
    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        self.scale * dist_sq(x, &self.center.coords) + self.offset
    }
}

/// The pieces `(1−λ)‖x − (C_k − λC0)/(1−λ)‖² − λ/(1−λ)‖C0 − C_k‖² − r_k²`.
pub fn dc_pieces<T: Scalar>(inst: &Instance<T>) -> Vec<DcPiece<T>> {
    let lam = inst.lambda;
    let scale = T::one() - lam;
    inst.q
        .balls()
        .iter()
        .enumerate()
        .map(|(index, b)| {
            let center = b.center.combine(T::one() / scale, &inst.c0, -lam / scale);
            let offset = -lam / scale * inst.c0.dist_sq(&b.center) - b.radius * b.radius;
            DcPiece { index, center, offset, scale }
        })
        .collect()
}

/// `h(x) = max_k ‖x − C_k‖² − r_k²`.
pub fn h_value<T: Scalar>(q: &BallSet<T>, x: &Point<T>) -> Result<T> {
    x.check_dim(q.dim())?;
    Ok(q.h_unchecked(&x.coords))
}

/// `g(x) = λ‖x − C0‖²`.
pub fn g_value<T: Scalar>(inst: &Instance<T>, x: &Point<T>) -> Result<T> {
    x.check_dim(inst.dim())?;
    Ok(inst.lambda * x.dist_sq(&inst.c0))
}

/// `h(x) − g(x)`, evaluated directly.
pub fn dc_objective<T: Scalar>(inst: &Instance<T>, x: &Point<T>) -> Result<T> {
    Ok(h_value(&inst.q, x)? - g_value(inst, x)?)
}

/// `h(x) − g(x)` evaluated as the maximum over [`dc_pieces`].
pub fn dc_objective_pieces<T: Scalar>(inst: &Instance<T>, x: &Point<T>) -> Result<T> {
    x.check_dim(inst.dim())?;
    Ok(dc_pieces(inst).iter().map(|p| p.eval(&x.coords)).fold(T::neg_infinity(), T::max))
}

/// Squared radii of the level set `Q_{R²} = {x : h(x) − g(x) ≤ −λR²}` written as an
/// intersection of balls centred at `(C_k − λC0)/(1−λ)`. Values may be non-positive.
pub fn qset_radii_sq<T: Scalar>(inst: &Instance<T>, r_sq: T) -> Vec<T> {
    let lam = inst.lambda;
    let a = T::one() - lam;
    inst.q
        .balls()
        .iter()
        .map(|b| (-lam * r_sq + lam / a * inst.c0.dist_sq(&b.center) + b.radius * b.radius) / a)
        .collect()
}

/// The level set `Q_{R²}` as a [`BallSet`]; a non-positive squared radius yields
/// [`GeometryError::EmptySet`], meaning `R` is too large for the set to exist.
pub fn qset_at<T: Scalar>(inst: &Instance<T>, r_sq: T) -> Result<BallSet<T>> {
    if !(r_sq >= T::zero()) || !r_sq.is_finite() {
        return Err(GeometryError::InvalidArgument("r_sq must be finite and non-negative"));
    }
    let centers = dc_pieces(inst).into_iter().map(|p| p.center).collect();
    BallSet::from_squared(inst.dim(), centers, &qset_radii_sq(inst, r_sq))
}

/// Position of a point relative to the convex hull of a finite point set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum HullPosition<T: Scalar = f64> {
    Inside,
    /// Separating hyperplane `{x : normal·x + offset = 0}` with unit `normal`,
    /// `normal·c0 + offset < 0` and `normal·C_k + offset > 0` for every point.
    Outside { normal: Point<T>, offset: T },
}

impl<T: Scalar> HullPosition<T> {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullPosition::Inside)
    }
}

/// Minimum-norm point of `conv{points}` by Wolfe's active-set algorithm.
///
/// Returns the point and its convex weights (indexed like `points`).
pub fn min_norm_point<T: Scalar>(points: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    assert!(!points.is_empty());
    let dim = points[0].len();
    let m = points.len();
    let eps = T::epsilon();
    let scale = points.iter().map(|p| norm_sq(p)).fold(T::zero(), T::max).max(T::min_positive_value());

    let start = (0..m).min_by(|&a, &b| norm_sq(&points[a]).partial_cmp(&norm_sq(&points[b])).unwrap()).unwrap();
    let mut support = vec![start];
    let mut weights = vec![T::one()];
    let mut x = points[start].clone();

    let combine = |support: &[usize], w: &[T]| -> Vec<T> {
        let mut out = vec![T::zero(); dim];
        for (&k, &wk) in support.iter().zip(w) {
            for (o, &p) in out.iter_mut().zip(&points[k]) {
                *o += wk * p;
            }
        }
        out
    };

    for _major in 0..(50 * m + 50) {
        let (j, best) = (0..m)
            .map(|k| (k, dot(&x, &points[k])))
            .fold((0, T::infinity()), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        let xx = norm_sq(&x);
        if xx - best <= T::lit(1e-12) * scale || support.contains(&j) {
            break;
        }
        support.push(j);
        weights.push(T::zero());

        loop {
            // Affine minimizer over the current support.
            let s = support.len();
            let base = support[0];
            let deltas: Vec<Vec<T>> =
                support[1..].iter().map(|&k| points[k].iter().zip(&points[base]).map(|(&a, &b)| a - b).collect()).collect();
            let mut gram = vec![T::zero(); (s - 1) * (s - 1)];
            let mut rhs = vec![T::zero(); s - 1];
            for i in 0..s - 1 {
                for jj in 0..s - 1 {
                    gram[i * (s - 1) + jj] = dot(&deltas[i], &deltas[jj]);
                }
                rhs[i] = -dot(&deltas[i], &points[base]);
            }
            let v = match linalg::solve(gram, rhs, T::lit(1e-13)) {
                Some(v) => v,
                None => {
                    // Affinely dependent corral: drop the newest point.
                    support.pop();
                    weights.pop();
                    break;
                }
            };
            let mut alpha = Vec::with_capacity(s);
            alpha.push(T::one() - v.iter().copied().sum::<T>());
            alpha.extend(v);
            if alpha.iter().all(|&a| a > eps) {
                weights = alpha;
                x = combine(&support, &weights);
                break;
            }
            let mut theta = T::one();
            for (&w, &a) in weights.iter().zip(&alpha) {
                if a <= eps && w - a > T::zero() {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, &a) in weights.iter_mut().zip(&alpha) {
                *w = *w + theta * (a - *w);
            }
            let mut keep_s = Vec::with_capacity(s);
            let mut keep_w = Vec::with_capacity(s);
            for (&k, &w) in support.iter().zip(&weights) {
                if w > eps {
                    keep_s.push(k);
                    keep_w.push(w);
                }
            }
            let total: T = keep_w.iter().copied().sum();
            for w in &mut keep_w {
                *w /= total;
            }
            support = keep_s;
            weights = keep_w;
            x = combine(&support, &weights);
        }
    }

    let mut full = vec![T::zero(); m];
    for (&k, &w) in support.iter().zip(&weights) {
        full[k] += w;
    }
    (x, full)
}

/// Decides whether `c0` lies in `conv{centers}` (within `tol`).
///
/// On `Outside` a strictly separating hyperplane is returned, built from the
/// nearest hull point `p`: the normal points from `c0` to `p` and the plane
/// passes through their midpoint.
pub fn hull_contains<T: Scalar>(centers: &[Point<T>], c0: &Point<T>, tol: T) -> Result<HullPosition<T>> {
    if centers.is_empty() {
        return Err(GeometryError::NoBalls);
    }
    if !(tol > T::zero()) {
        return Err(GeometryError::InvalidArgument("tol must be positive"));
    }
    for c in centers {
        c.check_dim(c0.dim())?;
    }
    let shifted: Vec<Vec<T>> =
        centers.iter().map(|c| c.coords.iter().zip(&c0.coords).map(|(&a, &b)| a - b).collect()).collect();
    let (near, _) = min_norm_point(&shifted);
    let dist = norm_sq(&near).sqrt();
    if dist <= tol {
        return Ok(HullPosition::Inside);
    }
    let normal: Vec<T> = near.iter().map(|&v| v / dist).collect();
    let mid: Vec<T> = c0.coords.iter().zip(&near).map(|(&c, &v)| c + v / T::lit(2.0)).collect();
    let offset = -dot(&normal, &mid);
    // Numerical guard: a witness must separate strictly.
    let separates = dot(&normal, &c0.coords) + offset < T::zero()
        && centers.iter().all(|c| dot(&normal, &c.coords) + offset > T::zero());
    if !separates {
        return Ok(HullPosition::Inside);
    }
    Ok(HullPosition::Outside { normal: Point::new(normal), offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec())
    }

    fn ball(c: &[f64], r: f64) -> Ball {
        Ball::new(p(c), r).unwrap()
    }

    fn unit_disk() -> BallSet {
        BallSet::new(2, vec![ball(&[0.0, 0.0], 1.0)]).unwrap()
    }

    #[test]
    fn h_value_examples() {
        let q = unit_disk();
        assert_eq!(h_value(&q, &p(&[0.0, 0.0])).unwrap(), -1.0);
        assert_eq!(h_value(&q, &p(&[1.0, 0.0])).unwrap(), 0.0);
        let lens = BallSet::new(2, vec![ball(&[-0.5, 0.0], 1.0), ball(&[0.5, 0.0], 1.0)]).unwrap();
        assert!((h_value(&lens, &p(&[0.0, 0.0])).unwrap() + 0.75).abs() < 1e-15);
        assert!(matches!(h_value(&q, &p(&[0.0])), Err(GeometryError::DimensionMismatch { .. })));
    }

    #[test]
    fn g_value_examples() {
        let inst = Instance::new(unit_disk(), p(&[0.0, 0.0]), 0.5).unwrap();
        assert_eq!(g_value(&inst, &p(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(g_value(&inst, &p(&[2.0, 0.0])).unwrap(), 2.0);
        let inst = Instance::new(unit_disk(), p(&[1.0, 1.0]), 0.25).unwrap();
        assert_eq!(g_value(&inst, &p(&[1.0, 2.0])).unwrap(), 0.25);
    }

    #[test]
    fn dc_objective_examples() {
        let q = BallSet::new(2, vec![ball(&[2.0, 0.0], 1.0)]).unwrap();
        let inst = Instance::new(q, p(&[0.0, 0.0]), 0.5).unwrap();
        let x = p(&[0.0, 0.0]);
        assert!((dc_objective(&inst, &x).unwrap() - 3.0).abs() < 1e-12);
        assert!((dc_objective_pieces(&inst, &x).unwrap() - 3.0).abs() < 1e-12);

        let inst = Instance::new(unit_disk(), p(&[0.0, 0.0]), 0.5).unwrap();
        assert_eq!(dc_objective(&inst, &x).unwrap(), -1.0);
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(Instance::new(unit_disk(), p(&[0.0, 0.0]), 1.0), Err(GeometryError::LambdaOutOfRange(_))));
        assert!(matches!(Instance::new(unit_disk(), p(&[0.0, 0.0]), 0.0), Err(GeometryError::LambdaOutOfRange(_))));
        assert!(Instance::new(unit_disk(), p(&[0.0]), 0.5).is_err());
        assert!(Ball::new(p(&[0.0]), 0.0).is_err());
        assert!(Ball::new(p(&[f64::NAN]), 1.0).is_err());
        assert!(matches!(BallSet::<f64>::new(2, vec![]), Err(GeometryError::NoBalls)));
    }

    #[test]
    fn qset_examples() {
        let q = BallSet::new(2, vec![ball(&[1.0, 0.0], 1.0)]).unwrap();
        let inst = Instance::new(q, p(&[0.0, 0.0]), 0.5).unwrap();
        let qs = qset_at(&inst, 0.0).unwrap();
        assert_eq!(qs.balls()[0].center, p(&[2.0, 0.0]));
        assert!((qs.balls()[0].radius * qs.balls()[0].radius - 4.0).abs() < 1e-12);
        // Membership agrees with the level-set definition.
        let x = p(&[0.0, 0.0]);
        assert_eq!(qs.contains(&x.coords), dc_objective(&inst, &x).unwrap() <= 0.0);
        assert_eq!(qset_at(&inst, 10.0), Err(GeometryError::EmptySet { index: 0 }));
        assert!(qset_at(&inst, -1.0).is_err());
    }

    #[test]
    fn hull_examples() {
        let centers = vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[0.0, 1.0]), p(&[0.0, -1.0])];
        assert_eq!(hull_contains(&centers, &p(&[0.0, 0.0]), 1e-9).unwrap(), HullPosition::Inside);
        match hull_contains(&centers, &p(&[2.0, 0.0]), 1e-9).unwrap() {
            HullPosition::Outside { normal, offset } => {
                assert!((normal.coords[0] + 1.0).abs() < 1e-9 || (normal.coords[0] - 1.0).abs() < 1e-9);
                assert!(normal.coords[1].abs() < 1e-9);
                assert!(dot(&normal.coords, &[2.0, 0.0]) + offset < 0.0);
            }
            HullPosition::Inside => panic!("expected outside"),
        }
        assert_eq!(hull_contains(&[p(&[1.0, 1.0])], &p(&[1.0, 1.0]), 1e-9).unwrap(), HullPosition::Inside);
        // All centers equal and distinct from c0.
        let same = vec![p(&[1.0, 1.0]), p(&[1.0, 1.0])];
        assert!(!hull_contains(&same, &p(&[0.0, 0.0]), 1e-9).unwrap().is_inside());
        // Boundary point counts as inside.
        assert!(hull_contains(&centers, &p(&[0.5, 0.5]), 1e-9).unwrap().is_inside());
    }

    #[test]
    fn min_norm_point_segment() {
        let (x, w) = min_norm_point::<f64>(&[vec![1.0, -1.0], vec![1.0, 1.0]]);
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14);
        assert!((w[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn f32_instantiation() {
        let q = BallSet::<f32>::new(2, vec![Ball::new(Point::new(vec![2.0f32, 0.0]), 1.0).unwrap()]).unwrap();
        let inst = Instance::new(q, Point::new(vec![0.0f32, 0.0]), 0.5).unwrap();
        let x = Point::new(vec![0.0f32, 0.0]);
        assert!((dc_objective(&inst, &x).unwrap() - 3.0).abs() < 1e-5);
        assert!((dc_objective_pieces(&inst, &x).unwrap() - 3.0).abs() < 1e-5);
    }

    fn arb_instance() -> impl Strategy<Value = (Instance, Vec<Vec<f64>>)> {
        (1usize..5, 1usize..8, 0.05f64..0.95).prop_flat_map(|(dim, m, lam)| {
            (
                proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, dim), m),
                proptest::collection::vec(0.1f64..3.0, m),
                proptest::collection::vec(-3.0f64..3.0, dim),
                proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, dim), 8),
            )
                .prop_map(move |(cs, rs, c0, xs)| {
                    let balls = cs.into_iter().zip(rs).map(|(c, r)| Ball::new(Point::new(c), r).unwrap()).collect();
                    let q = BallSet::new(dim, balls).unwrap();
                    (Instance::new(q, Point::new(c0), lam).unwrap(), xs)
                })
        })
    }

    proptest! {
        #[test]
        fn piece_form_matches_direct((inst, xs) in arb_instance()) {
            for x in xs {
                let x = Point::new(x);
                let direct = dc_objective(&inst, &x).unwrap();
                let pieces = dc_objective_pieces(&inst, &x).unwrap();
                prop_assert!((direct - pieces).abs() <= 1e-9 * (1.0 + direct.abs()));
            }
        }

        #[test]
        fn each_piece_matches_its_ball((inst, xs) in arb_instance()) {
            let pieces = dc_pieces(&inst);
            for x in xs {
                for (piece, b) in pieces.iter().zip(inst.q.balls()) {
                    let direct = b.excess(&x) - inst.lambda * dist_sq(&x, &inst.c0.coords);
                    prop_assert!((piece.eval(&x) - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
                }
            }
        }

        #[test]
        fn qset_nesting((inst, _xs) in arb_instance(), a in 0.0f64..4.0, b in 0.0f64..4.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let r_lo = qset_radii_sq(&inst, lo);
            let r_hi = qset_radii_sq(&inst, hi);
            for (x, y) in r_lo.iter().zip(&r_hi) {
                prop_assert!(y <= x);
            }
        }

        #[test]
        fn hull_witness_separates(pts in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 3), 1..7),
                                  c0 in proptest::collection::vec(-3.0f64..3.0, 3)) {
            let centers: Vec<Point> = pts.into_iter().map(Point::new).collect();
            let c0 = Point::new(c0);
            if let HullPosition::Outside { normal, offset } = hull_contains(&centers, &c0, 1e-9).unwrap() {
                prop_assert!(dot(&normal.coords, &c0.coords) + offset < 0.0);
                for c in &centers {
                    prop_assert!(dot(&normal.coords, &c.coords) + offset > 0.0);
                }
            }
        }
    }
}
