//! The two-sided sequence of ball intersections `Q^i_{R²}`, `i ∈ ℤ`.
//!
//! With `a = 1 − λ` and `s = a^{−i}`, element `i` has centers and squared radii
//!
//! ```text
//! C_{k,i}  = C0 + s·(C_k − C0)
//! r²_{k,i} = R² + s·(r_k² − R² − (1 − s)·‖C_k − C0‖²)
//! ```
//!
//! Positive `i` is the forward direction (centers pushed away from `C0`), negative
//! `i` the backward direction (centers contracted onto `C0`, radii driven to `R`).
//! Expanding the per-ball excess gives
//! `‖x − C_{k,i}‖² − r²_{k,i} = (1 − s)(‖x − C0‖² − R²) + s(‖x − C_k‖² − r_k²)`,
//! which is what [`ElementView`] evaluates: it is exact and avoids the cancellation
//! of the direct form when `s` is tiny.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{hull_contains, BallSet, GeometryError, HullPosition, Instance, Point};
use crate::scalar::{dist_sq, Scalar};

/// Forward indices whose center scale `(1 − λ)^{−i}` exceeds this are rejected.
pub const OVERFLOW_LIMIT: f64 = 1e12;
/// Hull-test tolerance at scale 1; scaled with the element for backward indices.
pub const HULL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("index {index} overflows: center scale (1 - lambda)^-i = {scale:e} exceeds 1e12")]
    Overflow { index: i64, scale: f64 },
    #[error("radius and center lists differ in length ({radii} vs {centers})")]
    LengthMismatch { radii: usize, centers: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Center scale `s = (1 − λ)^{−i}` of element `i`.
pub fn center_scale<T: Scalar>(lambda: T, i: i64) -> T {
    (T::one() - lambda).powi(-(i as i32))
}

fn check_forward<T: Scalar>(lambda: T, i: i64) -> Result<(), SequenceError> {
    let scale = center_scale(lambda, i.max(0));
    if !(scale.to_f64_lossy() <= OVERFLOW_LIMIT) {
        return Err(SequenceError::Overflow { index: i, scale: scale.to_f64_lossy() });
    }
    Ok(())
}

/// `C ↦ (C − λC0)/(1 − λ)` applied `i` times.
pub fn forward_centers<T: Scalar>(inst: &Instance<T>, i: u32) -> Result<Vec<Point<T>>, SequenceError> {
    check_forward(inst.lambda, i64::from(i))?;
    let a = T::one() - inst.lambda;
    let mut centers = inst.q.centers();
    for _ in 0..i {
        for c in &mut centers {
            *c = c.combine(T::one() / a, &inst.c0, -inst.lambda / a);
        }
    }
    Ok(centers)
}

/// `C_{k,−i} = (1 − λ)^i·C_k + (1 − (1 − λ)^i)·C0`.
pub fn backward_centers<T: Scalar>(inst: &Instance<T>, i: u32) -> Vec<Point<T>> {
    let s = (T::one() - inst.lambda).powi(i as i32);
    inst.q.centers().iter().map(|c| inst.c0.combine(T::one() - s, c, s)).collect()
}

/// `r²_{k,−i} = R² + (1 − λ)^i·(r_k² − R² − (1 − (1 − λ)^i)·‖C0 − C_k‖²)`.
/// Entries `≤ 0` denote empty balls.
pub fn backward_radii_sq<T: Scalar>(inst: &Instance<T>, i: u32, r0_sq: T) -> Vec<T> {
    let s = (T::one() - inst.lambda).powi(i as i32);
    radii_closed_form(inst, s, r0_sq)
}

fn radii_closed_form<T: Scalar>(inst: &Instance<T>, s: T, r0_sq: T) -> Vec<T> {
    inst.q
        .balls()
        .iter()
        .map(|b| {
            let d2 = inst.c0.dist_sq(&b.center);
            r0_sq + s * (b.radius * b.radius - r0_sq - (T::one() - s) * d2)
        })
        .collect()
}

/// One forward radius step: `r'² = (−λR² + λ/(1−λ)·‖C0 − C‖² + r²)/(1 − λ)`, where
/// `C` and `r²` belong to the previous element.
pub fn forward_radii_sq<T: Scalar>(
    inst: &Instance<T>,
    prev_radii_sq: &[T],
    prev_centers: &[Point<T>],
    r0_sq: T,
) -> Result<Vec<T>, SequenceError> {
    check_lengths(prev_radii_sq, prev_centers)?;
    let lam = inst.lambda;
    let a = T::one() - lam;
    Ok(prev_radii_sq
        .iter()
        .zip(prev_centers)
        .map(|(&r2, c)| (-lam * r0_sq + lam / a * inst.c0.dist_sq(c) + r2) / a)
        .collect())
}

/// One backward radius step, the inverse of [`forward_radii_sq`]:
/// `r²_{prev} = (1 − λ)·r² + λR² − λ(1 − λ)·‖C0 − C‖²`, where `C` and `r²` belong
/// to the current element.
pub fn backward_step_radii_sq<T: Scalar>(
    inst: &Instance<T>,
    radii_sq: &[T],
    centers: &[Point<T>],
    r0_sq: T,
) -> Result<Vec<T>, SequenceError> {
    check_lengths(radii_sq, centers)?;
    let lam = inst.lambda;
    let a = T::one() - lam;
    Ok(radii_sq.iter().zip(centers).map(|(&r2, c)| a * r2 + lam * r0_sq - lam * a * inst.c0.dist_sq(c)).collect())
}

fn check_lengths<T: Scalar>(radii: &[T], centers: &[Point<T>]) -> Result<(), SequenceError> {
    if radii.len() != centers.len() {
        return Err(SequenceError::LengthMismatch { radii: radii.len(), centers: centers.len() });
    }
    Ok(())
}

/// One element `Q^i_{R²}` of the sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceElement<T: Scalar = f64> {
    pub index: i64,
    /// The probe `R²` the radii were computed for.
    pub r_sq: T,
    pub centers: Vec<Point<T>>,
    pub radii_sq: Vec<T>,
    /// `radii_sq[k] ≤ 0`; any empty ball makes the element empty.
    pub empty: Vec<bool>,
    pub hull_status: HullPosition<T>,
}

impl<T: Scalar> SequenceElement<T> {
    pub fn is_empty(&self) -> bool {
        self.empty.iter().any(|&e| e)
    }

    /// Direct membership test against the stored centers and radii.
    pub fn contains(&self, x: &[T]) -> bool {
        !self.is_empty() && self.centers.iter().zip(&self.radii_sq).all(|(c, &r2)| dist_sq(x, &c.coords) <= r2)
    }

    /// The element as a [`BallSet`]; `EmptySet` when a ball is empty.
    pub fn ball_set(&self) -> Result<BallSet<T>, GeometryError> {
        let dim = self.centers.first().map_or(0, Point::dim);
        BallSet::from_squared(dim, self.centers.clone(), &self.radii_sq)
    }
}

/// Element `i` at probe `r0_sq`. `i = 0` is `Q` itself, `i > 0` is built by iterating
/// the forward maps, `i < 0` from the backward closed forms.
pub fn element_at<T: Scalar>(inst: &Instance<T>, i: i64, r0_sq: T) -> Result<SequenceElement<T>, SequenceError> {
    if !r0_sq.is_finite() || r0_sq < T::zero() {
        return Err(GeometryError::InvalidArgument("r0_sq must be finite and non-negative").into());
    }
    let (centers, radii_sq) = if i == 0 {
        (inst.q.centers(), inst.q.balls().iter().map(|b| b.radius * b.radius).collect())
    } else if i > 0 {
        let steps = u32::try_from(i).map_err(|_| SequenceError::Overflow { index: i, scale: f64::INFINITY })?;
        check_forward(inst.lambda, i)?;
        let mut centers = inst.q.centers();
        let mut radii: Vec<T> = inst.q.balls().iter().map(|b| b.radius * b.radius).collect();
        let a = T::one() - inst.lambda;
        for _ in 0..steps {
            radii = forward_radii_sq(inst, &radii, &centers, r0_sq)?;
            for c in &mut centers {
                *c = c.combine(T::one() / a, &inst.c0, -inst.lambda / a);
            }
        }
        (centers, radii)
    } else {
        let steps = u32::try_from(-i).unwrap_or(u32::MAX);
        (backward_centers(inst, steps), backward_radii_sq(inst, steps, r0_sq))
    };
    let empty = radii_sq.iter().map(|&r| !(r > T::zero())).collect();
    // Backward elements are homothetic copies shrunk by s, so the tolerance shrinks too.
    let tol = T::lit(HULL_TOL) * center_scale(inst.lambda, i).min(T::one());
    let hull_status = hull_contains(&centers, &inst.c0, tol)?;
    Ok(SequenceElement { index: i, r_sq: r0_sq, centers, radii_sq, empty, hull_status })
}

/// Cheap membership evaluator for `Q^i_{R²}` based on the excess identity in the
/// module docs; used by the samplers.
#[derive(Debug, Clone)]
pub struct ElementView<'a, T: Scalar> {
    inst: &'a Instance<T>,
    s: T,
    r_sq: T,
    empty: bool,
}

impl<'a, T: Scalar> ElementView<'a, T> {
    pub fn new(inst: &'a Instance<T>, i: i64, r_sq: T) -> Result<Self, SequenceError> {
        if i > 0 {
            check_forward(inst.lambda, i)?;
        }
        let s = center_scale(inst.lambda, i);
        let empty = radii_closed_form(inst, s, r_sq).iter().any(|&r| !(r > T::zero()));
        Ok(Self { inst, s, r_sq, empty })
    }

    /// Some ball of the element has a non-positive squared radius.
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    /// `max_k ‖x − C_{k,i}‖² − r²_{k,i}`, evaluated stably.
    #[inline]
    pub fn excess(&self, x: &[T]) -> T {
        let u = dist_sq(x, &self.inst.c0.coords) - self.r_sq;
        (T::one() - self.s) * u + self.s * self.inst.q.h_unchecked(x)
    }

    #[inline]
    pub fn contains(&self, x: &[T]) -> bool {
        !self.empty && self.excess(x) <= T::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcedureAResult<T: Scalar = f64> {
    /// The hull test returned Outside at the last recorded element.
    pub terminated: bool,
    /// Index of the last element examined.
    pub iterations: u32,
    /// The loop stopped early because the next index would overflow.
    pub overflow_stop: bool,
    pub trace: Vec<SequenceElement<T>>,
}

/// Iterates the forward center map while `C0` stays in the hull of the centers.
/// The radii in the trace are computed at the probe `r_sq`.
pub fn procedure_a<T: Scalar>(inst: &Instance<T>, max_iter: u32, r_sq: T) -> Result<ProcedureAResult<T>, SequenceError> {
    if max_iter == 0 {
        return Err(GeometryError::InvalidArgument("max_iter must be at least 1").into());
    }
    let mut trace = Vec::new();
    let mut i = 0u32;
    loop {
        let el = element_at(inst, i64::from(i), r_sq)?;
        let outside = !el.hull_status.is_inside();
        trace.push(el);
        if outside {
            return Ok(ProcedureAResult { terminated: true, iterations: i, overflow_stop: false, trace });
        }
        if i >= max_iter {
            return Ok(ProcedureAResult { terminated: false, iterations: i, overflow_stop: false, trace });
        }
        if check_forward(inst.lambda, i64::from(i) + 1).is_err() {
            return Ok(ProcedureAResult { terminated: false, iterations: i, overflow_stop: true, trace });
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{qset_radii_sq, Ball};
    use proptest::prelude::*;

    fn inst(balls: &[(&[f64], f64)], c0: &[f64], lam: f64) -> Instance {
        let bs = balls.iter().map(|(c, r)| Ball::new(Point::new(c.to_vec()), *r).unwrap()).collect();
        Instance::new(BallSet::new(c0.len(), bs).unwrap(), Point::new(c0.to_vec()), lam).unwrap()
    }

    #[test]
    fn forward_center_examples() {
        let i = inst(&[(&[1.0, 0.0], 1.0)], &[0.0, 0.0], 0.5);
        assert_eq!(forward_centers(&i, 1).unwrap()[0].coords, vec![2.0, 0.0]);
        assert_eq!(forward_centers(&i, 3).unwrap()[0].coords, vec![8.0, 0.0]);
        let fixed = inst(&[(&[1.0, 1.0], 1.0)], &[1.0, 1.0], 0.5);
        assert_eq!(forward_centers(&fixed, 7).unwrap()[0].coords, vec![1.0, 1.0]);
        assert!(matches!(forward_centers(&i, 41), Err(SequenceError::Overflow { .. })));
        assert!(forward_centers(&i, 39).is_ok());
    }

    #[test]
    fn backward_center_examples() {
        let i = inst(&[(&[1.0, 0.0], 1.0)], &[0.0, 0.0], 0.5);
        assert_eq!(backward_centers(&i, 1)[0].coords, vec![0.5, 0.0]);
        assert_eq!(backward_centers(&i, 10)[0].coords, vec![1.0 / 1024.0, 0.0]);
    }

    #[test]
    fn backward_radius_example_and_inverse() {
        // R0 = 1, r = 2, ‖C0 − C‖ = 1, λ = 0.5, one backward step gives 2.25.
        let i = inst(&[(&[1.0, 0.0], 2.0)], &[0.0, 0.0], 0.5);
        let r = backward_radii_sq(&i, 1, 1.0);
        assert!((r[0] - 2.25).abs() < 1e-15);
        let c = backward_centers(&i, 1);
        assert!((c[0].dist(&i.c0) - 0.5).abs() < 1e-15);
        let back = forward_radii_sq(&i, &r, &c, 1.0).unwrap();
        assert!((back[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_ball() {
        let i = inst(&[(&[0.5, 0.5], 1.5)], &[0.5, 0.5], 0.3);
        for n in 0..30 {
            assert!((backward_radii_sq(&i, n, 2.25)[0] - 2.25).abs() < 1e-14);
        }
        let f = forward_radii_sq(&i, &[2.25], &i.q.centers(), 2.25).unwrap();
        assert!((f[0] - 2.25).abs() < 1e-14);
    }

    #[test]
    fn forward_at_zero_matches_qset() {
        let i = inst(&[(&[1.0, 0.0], 1.0), (&[-0.3, 0.4], 0.8)], &[0.1, 0.0], 0.4);
        let radii: Vec<f64> = i.q.balls().iter().map(|b| b.radius * b.radius).collect();
        let f = forward_radii_sq(&i, &radii, &i.q.centers(), 0.0).unwrap();
        let q = qset_radii_sq(&i, 0.0);
        for (a, b) in f.iter().zip(&q) {
            assert!((a - b).abs() < 1e-14);
        }
        // And at a non-zero probe.
        let f = forward_radii_sq(&i, &radii, &i.q.centers(), 0.7).unwrap();
        let q = qset_radii_sq(&i, 0.7);
        for (a, b) in f.iter().zip(&q) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn element_zero_is_input() {
        let i = inst(&[(&[1.0, 0.0], 1.0), (&[-1.0, 0.0], 1.5)], &[0.0, 0.0], 0.5);
        let el = element_at(&i, 0, 0.3).unwrap();
        assert_eq!(el.ball_set().unwrap(), i.q);
        assert!(el.hull_status.is_inside());
        assert!(element_at(&i, 3, -1.0).is_err());
    }

    #[test]
    fn element_minus_one_then_forward() {
        let i = inst(&[(&[1.0, 0.0], 1.0), (&[-1.0, 0.2], 1.5)], &[0.0, 0.0], 0.5);
        let el = element_at(&i, -1, 1.2).unwrap();
        let r = forward_radii_sq(&i, &el.radii_sq, &el.centers, 1.2).unwrap();
        for (got, b) in r.iter().zip(i.q.balls()) {
            assert!((got - b.radius * b.radius).abs() < 1e-12);
        }
        for (c, b) in el.centers.iter().zip(i.q.balls()) {
            let f = c.combine(2.0, &i.c0, -1.0);
            assert!(f.dist(&b.center) < 1e-15);
        }
    }

    #[test]
    fn procedure_a_cases() {
        let outside = inst(&[(&[1.0, 0.0], 1.0), (&[2.0, 1.0], 1.0)], &[-1.0, 0.0], 0.5);
        let r = procedure_a(&outside, 10, 0.0).unwrap();
        assert!(r.terminated);
        assert_eq!(r.iterations, 0);

        let cross = inst(&[(&[1.0, 0.0], 1.2), (&[-1.0, 0.0], 1.2), (&[0.0, 1.0], 1.2), (&[0.0, -1.0], 1.2)], &[0.0, 0.0], 0.1);
        let r = procedure_a(&cross, 50, 0.0).unwrap();
        assert!(!r.terminated);
        assert_eq!(r.iterations, 50);
        assert_eq!(r.trace.len(), 51);
        assert!(r.trace.iter().all(|e| e.hull_status.is_inside()));

        let fixed = inst(&[(&[0.3, 0.3], 1.0)], &[0.3, 0.3], 0.5);
        let r = procedure_a(&fixed, 5, 0.0).unwrap();
        assert!(!r.terminated);
        assert_eq!(r.iterations, 5);

        // λ = 0.5 hits the overflow guard before 60 iterations.
        let r = procedure_a(&cross.with_lambda(0.5).unwrap(), 60, 0.0).unwrap();
        assert!(!r.terminated && r.overflow_stop);
        assert_eq!(r.iterations, 39);
    }

    #[test]
    fn view_matches_direct_membership() {
        let i = inst(&[(&[1.0, 0.0], 1.3), (&[-0.6, 0.5], 1.1), (&[0.0, -0.8], 1.4)], &[0.1, 0.0], 0.5);
        for idx in [-5i64, -1, 0, 1, 3] {
            let el = element_at(&i, idx, 0.4).unwrap();
            let view = ElementView::new(&i, idx, 0.4).unwrap();
            assert_eq!(view.is_empty(), el.is_empty());
            for a in 0..40 {
                for b in 0..40 {
                    let x = [-2.0 + 0.1 * a as f64, -2.0 + 0.1 * b as f64];
                    let direct = el.centers.iter().zip(&el.radii_sq).map(|(c, r)| dist_sq(&x, &c.coords) - r).fold(f64::MIN, f64::max);
                    assert!((view.excess(&x) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
                }
            }
        }
    }

    #[test]
    fn hull_status_is_scale_invariant() {
        let outside = inst(&[(&[1.0, 0.0], 1.0), (&[2.0, 1.0], 1.0)], &[0.9, 0.0], 0.5);
        for idx in [-40i64, -20, -1, 0, 1, 10] {
            assert!(!element_at(&outside, idx, 0.0).unwrap().hull_status.is_inside(), "index {idx}");
        }
    }

    #[test]
    fn f32_sequence() {
        let b = Ball::new(Point::new(vec![1.0f32, 0.0]), 1.0).unwrap();
        let i = Instance::new(BallSet::new(2, vec![b]).unwrap(), Point::new(vec![0.0f32, 0.0]), 0.5).unwrap();
        assert_eq!(forward_centers(&i, 2).unwrap()[0].coords, vec![4.0f32, 0.0]);
        assert_eq!(backward_centers(&i, 2)[0].coords, vec![0.25f32, 0.0]);
    }

    fn arb_inst() -> impl Strategy<Value = Instance> {
        arb_inst_lambda(0.05, 0.95)
    }

    fn arb_inst_lambda(lo: f64, hi: f64) -> impl Strategy<Value = Instance> {
        (1usize..5, 1usize..7, lo..hi).prop_flat_map(|(dim, m, lam)| {
            (
                proptest::collection::vec((proptest::collection::vec(-2.0f64..2.0, dim), 0.2f64..3.0), m),
                proptest::collection::vec(-1.0f64..1.0, dim),
            )
                .prop_map(move |(bs, c0)| {
                    let balls = bs.into_iter().map(|(c, r)| Ball::new(Point::new(c), r).unwrap()).collect();
                    Instance::new(BallSet::new(dim, balls).unwrap(), Point::new(c0), lam).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn backward_then_forward_is_identity(i in arb_inst_lambda(0.05, 0.5), n in 1u32..20, r0_sq in 0.0f64..4.0) {
            let scale = 1.0 + r0_sq + i.q.balls().iter().map(|b| b.radius * b.radius + i.c0.dist_sq(&b.center)).fold(0.0, f64::max);
            let mut centers = backward_centers(&i, n);
            let mut radii = backward_radii_sq(&i, n, r0_sq);
            let a = 1.0 - i.lambda;
            for _ in 0..n {
                radii = forward_radii_sq(&i, &radii, &centers, r0_sq).unwrap();
                for c in &mut centers {
                    *c = c.combine(1.0 / a, &i.c0, -i.lambda / a);
                }
            }
            for ((c, r), b) in centers.iter().zip(&radii).zip(i.q.balls()) {
                prop_assert!(c.dist(&b.center) <= 1e-9 * scale.sqrt());
                prop_assert!((r - b.radius * b.radius).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn distance_decay(i in arb_inst(), n in 0u32..30) {
            let s = (1.0 - i.lambda).powi(n as i32);
            for (c, b) in backward_centers(&i, n).iter().zip(i.q.balls()) {
                let d0 = i.c0.dist(&b.center);
                prop_assert!((c.dist(&i.c0) - s * d0).abs() <= 1e-12 * (1.0 + d0));
            }
        }

        #[test]
        fn radius_decay_law(i in arb_inst(), n in 0u32..30, r0_sq in 0.0f64..4.0) {
            let s = (1.0 - i.lambda).powi(n as i32);
            for (r, b) in backward_radii_sq(&i, n, r0_sq).iter().zip(i.q.balls()) {
                let d2 = i.c0.dist_sq(&b.center);
                let expect = s * (b.radius * b.radius - r0_sq - (1.0 - s) * d2).abs();
                prop_assert!(((r - r0_sq).abs() - expect).abs() <= 1e-12 * (1.0 + r0_sq + d2 + b.radius * b.radius));
            }
        }

        #[test]
        fn closed_form_matches_stepwise(i in arb_inst(), n in 1u32..20, r0_sq in 0.0f64..4.0) {
            let mut radii: Vec<f64> = i.q.balls().iter().map(|b| b.radius * b.radius).collect();
            for step in 0..n {
                radii = backward_step_radii_sq(&i, &radii, &backward_centers(&i, step), r0_sq).unwrap();
            }
            let closed = backward_radii_sq(&i, n, r0_sq);
            for (a, b) in radii.iter().zip(&closed) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn centers_do_not_depend_on_probe(i in arb_inst(), idx in -10i64..5, a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let ea = element_at(&i, idx, a).unwrap();
            let eb = element_at(&i, idx, b).unwrap();
            prop_assert_eq!(ea.centers, eb.centers);
        }

        #[test]
        fn forward_iteration_matches_closed_form(i in arb_inst(), n in 1u32..8) {
            let it = forward_centers(&i, n).unwrap();
            let s = (1.0 - i.lambda).powi(-(n as i32));
            for (c, b) in it.iter().zip(i.q.balls()) {
                let closed = i.c0.combine(1.0 - s, &b.center, s);
                prop_assert!(c.dist(&closed) <= 1e-9 * (1.0 + closed.norm()));
            }
        }
    }
}
