//! Which of the three alternatives for `R0` an instance falls into, decided from
//! the sign of `h(y*)`.
//!
//! * `h(y*) < 0`: `R0 = min{R ≥ 0 : Q_{R²} ⊆ Q}` (interior case).
//! * `h(y*) > 0`: `R0 = max{R ≥ 0 : Q_{R²} ∩ Q ≠ ∅}` (exterior case).
//! * `h(y*) = 0`: `‖y* − C0‖ ≤ R0 ≤ ‖y* − C0‖/√λ` (boundary case, certified).
//!
//! Only the boundary case yields a two-sided interval; the other two cases only
//! report the lower bound `r_lower` and defer to the estimators.

use serde::Serialize;

use crate::dc_solver::DcSolution;
use crate::geometry::{Instance, Point};
use crate::scalar::Scalar;

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    InteriorCase,
    ExteriorCase,
    BoundaryCase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification<T: Scalar = f64> {
    pub case: Case,
    pub r_lower: T,
    pub r_upper: Option<T>,
    pub y_star: Point<T>,
    pub h_at_y: T,
}

/// Classifies from a converged solution. `boundary_tol` is an absolute band on `h(y*)`.
pub fn classify<T: Scalar>(inst: &Instance<T>, sol: &DcSolution<T>, boundary_tol: T) -> Classification<T> {
    let h = sol.h_at_y;
    let (case, r_lower, r_upper) = if h < -boundary_tol {
        (Case::InteriorCase, sol.r_lower, None)
    } else if h > boundary_tol {
        (Case::ExteriorCase, sol.r_lower, None)
    } else {
        let d = sol.y_star.dist(&inst.c0);
        (Case::BoundaryCase, d, Some(d / inst.lambda.sqrt()))
    };
    Classification { case, r_lower, r_upper, y_star: sol.y_star.clone(), h_at_y: h }
}

/// The certified information about `R0`: a closed interval in the boundary case,
/// otherwise the lower bound alone.
pub fn certify_interval<T: Scalar>(c: &Classification<T>, inst: &Instance<T>) -> (T, Option<T>) {
    match c.case {
        Case::BoundaryCase => {
            let d = c.y_star.dist(&inst.c0);
            (d, Some(d / inst.lambda.sqrt()))
        }
        Case::InteriorCase | Case::ExteriorCase => (c.r_lower, None),
    }
}
