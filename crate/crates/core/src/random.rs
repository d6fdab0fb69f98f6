//! Random instance families used by the experiments and tests.

use rand::Rng;

use crate::dc_solver::{minimize_dc, SolverOpts};
use crate::geometry::{hull_contains, Ball, BallSet, Instance, Point};

/// Centers uniform in `[−1, 1]^dim`, radii uniform in `[0.5, 2]`, `C0` uniform in
/// `[−1, 1]^dim`. The intersection may be empty.
pub fn random_instance<R: Rng>(rng: &mut R, dim: usize, m: usize, lambda: f64) -> Instance {
    let balls = (0..m)
        .map(|_| {
            let c = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            Ball::new(Point::new(c), rng.gen_range(0.5..2.0)).expect("valid ball")
        })
        .collect();
    let c0 = Point::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
    Instance::new(BallSet::new(dim, balls).expect("valid set"), c0, lambda).expect("valid instance")
}

/// Planar instance with `C0` at the origin, inside the hull of the centers and
/// inside every disk: center distance `d ~ U(0.2, 1)`, radius `d + U(0.3, 1)`.
pub fn random_2d_inside<R: Rng>(rng: &mut R, m: usize, lambda: f64) -> Instance {
    assert!(m >= 3, "C0 strictly inside the hull needs at least three disks");
    loop {
        let balls: Vec<Ball> = (0..m)
            .map(|_| {
                let d = rng.gen_range(0.2..1.0);
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                Ball::new(Point::new(vec![d * t.cos(), d * t.sin()]), d + rng.gen_range(0.3..1.0)).expect("valid ball")
            })
            .collect();
        let q = BallSet::new(2, balls).expect("valid set");
        let c0 = Point::origin(2);
        if hull_contains(&q.centers(), &c0, 1e-9).expect("valid hull input").is_inside() {
            return Instance::new(q, c0, lambda).expect("valid instance");
        }
    }
}

/// Planar instance with a non-empty intersection: centers in `[−1, 1]²`, radii in
/// `[0.8, 2]`, `C0` in `[−1.5, 1.5]²`.
pub fn random_2d_nonempty<R: Rng>(rng: &mut R, m: usize, lambda: f64) -> Instance {
    loop {
        let balls: Vec<Ball> = (0..m)
            .map(|_| {
                let c = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                Ball::new(Point::new(c), rng.gen_range(0.8..2.0)).expect("valid ball")
            })
            .collect();
        let q = BallSet::new(2, balls).expect("valid set");
        let (_, min_h) = crate::dc_solver::minimize_h(&q);
        if min_h < -1e-3 {
            let c0 = Point::new(vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]);
            return Instance::new(q, c0, lambda).expect("valid instance");
        }
    }
}

/// Planar instance whose DC minimizer lies on the boundary of `Q`.
///
/// Draws [`random_2d_inside`] instances and shifts every squared radius by `h(y*)`.
/// This lowers `h` by a constant, so `h − g` keeps its minimizer while the
/// constraint `h ≤ 1` stays inactive; afterwards `h(y*) = 0` up to rounding.
pub fn boundary_case_2d<R: Rng>(rng: &mut R, m: usize, lambda: f64) -> Instance {
    let opts = SolverOpts::default();
    loop {
        let base = random_2d_inside(rng, m, lambda);
        let Ok(sol) = minimize_dc(&base, &opts) else { continue };
        if sol.multiplier != 0.0 {
            continue;
        }
        let shift = sol.h_at_y;
        let radii_sq: Vec<f64> = base.q.balls().iter().map(|b| b.radius * b.radius + shift).collect();
        if radii_sq.iter().any(|&r| r <= 0.05) {
            continue;
        }
        let Ok(q) = BallSet::from_squared(2, base.q.centers(), &radii_sq) else { continue };
        let inst = Instance::new(q, base.c0.clone(), lambda).expect("valid instance");
        match minimize_dc(&inst, &opts) {
            Ok(s) if s.multiplier == 0.0 && s.h_at_y.abs() <= 1e-9 => return inst,
            _ => continue,
        }
    }
}
