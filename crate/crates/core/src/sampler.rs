//! Seeded Monte Carlo primitives: uniform points on spheres and in balls, and
//! hit-ratio estimates for sequence elements.
//!
//! Randomness comes from ChaCha8 seeded with the user seed; worker `w` of a
//! parallel run draws from stream `w` of that generator, and work is split into
//! fixed contiguous shares, so results depend only on `(seed, workers)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Instance, Point};
use crate::maxquad::{minimize_max_quadratics, IsoQuad};
use crate::scalar::Scalar;
use crate::sequence::{center_scale, ElementView, SequenceError};

/// 97.5% standard normal quantile.
pub const WILSON_Z: f64 = 1.959964;
/// Minimum number of denominator hits for a volume ratio.
pub const MIN_DENOMINATOR_HITS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// A child seed for an independent sub-experiment, derived by SplitMix64.
    pub fn derive(self, tag: u64) -> RngSeed {
        let mut z = self.0 ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }

    fn stream(self, worker: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(worker as u64);
        rng
    }
}

/// Binomial hit counts with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitStats {
    pub samples: u64,
    pub hits: u64,
    pub ratio: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl HitStats {
    pub fn new(hits: u64, samples: u64) -> Self {
        assert!(hits <= samples, "hits exceed samples");
        let (wilson_low, wilson_high) = wilson_interval(hits, samples, WILSON_Z);
        let ratio = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        Self { samples, hits, ratio, wilson_low, wilson_high }
    }
}

/// Wilson score interval for `hits` successes in `n` trials; `(0, 1)` when `n = 0`.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if hits == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if hits == n { 1.0 } else { (center + half).clamp(p, 1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("sequence element {index} is empty at this radius")]
    EmptyElement { index: i64 },
    #[error("only {hits} denominator hits (need {MIN_DENOMINATOR_HITS}); the set is too thin or empty")]
    DegenerateDenominator { hits: u64 },
    #[error("invalid sampler argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

impl From<GeometryError> for SampleError {
    fn from(e: GeometryError) -> Self {
        SampleError::Sequence(e.into())
    }
}

fn unit_direction<R: Rng>(rng: &mut R, dim: usize, out: &mut [f64]) {
    loop {
        let mut norm_sq = 0.0;
        for v in out.iter_mut().take(dim) {
            let z: f64 = rng.sample(StandardNormal);
            *v = z;
            norm_sq += z * z;
        }
        if norm_sq > 1e-300 {
            let inv = 1.0 / norm_sq.sqrt();
            out.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

fn sphere_point<T: Scalar, R: Rng>(rng: &mut R, c0: &[T], r: T, dir: &mut [f64], out: &mut [T]) {
    unit_direction(rng, c0.len(), dir);
    for ((o, &c), &d) in out.iter_mut().zip(c0).zip(dir.iter()) {
        *o = c + r * T::lit(d);
    }
}

fn ball_point<T: Scalar, R: Rng>(rng: &mut R, center: &[T], radius: T, dir: &mut [f64], out: &mut [T]) {
    unit_direction(rng, center.len(), dir);
    let u: f64 = rng.gen();
    let rho = radius * T::lit(u.powf(1.0 / center.len() as f64));
    for ((o, &c), &d) in out.iter_mut().zip(center).zip(dir.iter()) {
        *o = c + rho * T::lit(d);
    }
}

/// `n_samples` points uniform on `∂B(c0, r)`, drawn from stream 0 of `seed`.
pub fn sphere_sample<T: Scalar>(c0: &Point<T>, r: T, n_samples: usize, seed: RngSeed) -> Result<Vec<Point<T>>, SampleError> {
    if !(r > T::zero()) || n_samples == 0 || c0.dim() == 0 {
        return Err(SampleError::InvalidArgument("sphere_sample needs r > 0, n_samples >= 1 and dim >= 1"));
    }
    let mut rng = seed.stream(0);
    let mut dir = vec![0.0; c0.dim()];
    Ok((0..n_samples)
        .map(|_| {
            let mut p = vec![T::zero(); c0.dim()];
            sphere_point(&mut rng, &c0.coords, r, &mut dir, &mut p);
            Point::new(p)
        })
        .collect())
}

/// Splits `n` draws over `workers` streams and sums the per-worker counts.
fn parallel_counts<F>(n: u64, workers: usize, seed: RngSeed, work: F) -> (u64, u64)
where
    F: Fn(&mut ChaCha8Rng, u64) -> (u64, u64) + Sync,
{
    let workers = workers.max(1);
    let share = |w: usize| n / workers as u64 + u64::from((w as u64) < n % workers as u64);
    if workers == 1 {
        return work(&mut seed.stream(0), n);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let work = &work;
                scope.spawn(move || work(&mut seed.stream(w), share(w)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampler worker panicked")).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    })
}

/// Fraction of `∂B(C0, r)` inside `Q^i_{r²}`.
pub fn surface_ratio<T: Scalar>(
    inst: &Instance<T>,
    i: i64,
    r: T,
    n_samples: u64,
    seed: RngSeed,
    workers: usize,
) -> Result<HitStats, SampleError> {
    if !(r > T::zero()) || !r.is_finite() || n_samples == 0 {
        return Err(SampleError::InvalidArgument("surface_ratio needs finite r > 0 and n_samples >= 1"));
    }
    let view = ElementView::new(inst, i, r * r)?;
    if view.is_empty() {
        return Err(SampleError::EmptyElement { index: i });
    }
    let dim = inst.dim();
    let (hits, _) = parallel_counts(n_samples, workers, seed, |rng, n| {
        let mut dir = vec![0.0; dim];
        let mut x = vec![T::zero(); dim];
        let mut hits = 0;
        for _ in 0..n {
            sphere_point(rng, &inst.c0.coords, r, &mut dir, &mut x);
            hits += u64::from(view.contains(&x));
        }
        (hits, 0)
    });
    Ok(HitStats::new(hits, n_samples))
}

/// Ball `B(x, √(−min H))` enclosing `Q^i_{r²}`, obtained by averaging the ball
/// inequalities with the optimal weights, where `H` is the element's max-excess
/// function. It is never larger than the smallest single ball. `None` when the
/// element is empty or a single point.
pub fn element_bounding_ball<T: Scalar>(inst: &Instance<T>, i: i64, r_sq: T) -> Result<Option<(Vec<T>, T)>, SampleError> {
    let view = ElementView::new(inst, i, r_sq)?;
    if view.is_empty() {
        return Ok(None);
    }
    let s = center_scale(inst.lambda, i);
    let pieces: Vec<IsoQuad<T>> = inst
        .q
        .balls()
        .iter()
        .map(|b| {
            let center = inst.c0.combine(T::one() - s, &b.center, s).coords;
            let d2 = inst.c0.dist_sq(&b.center);
            let r2 = r_sq + s * (b.radius * b.radius - r_sq - (T::one() - s) * d2);
            IsoQuad { center, offset: -r2 }
        })
        .collect();
    // For simplex weights w and x̄ = Σ w_k C_k, Σ w_k(‖x − C_k‖² − r_k²) = ‖x − x̄‖² + ψ(w),
    // so the element lies in B(x̄, √(−ψ(w))) whether or not w is optimal.
    let sol = minimize_max_quadratics(T::one(), &pieces, None, 10_000);
    if !(sol.dual < T::zero()) {
        return Ok(None);
    }
    Ok(Some((sol.x, (-sol.dual).sqrt())))
}

/// Hit-or-miss estimate of `Vol(Q^{i+p} ∩ Q^i)/Vol(Q^{i+p})` at probe `r`: uniform
/// draws in a bounding ball of `Q^{i+p}`; draws landing in `Q^{i+p}` are the
/// denominator, those also in `Q^i` the numerator.
#[allow(clippy::too_many_arguments)]
pub fn volume_ratio<T: Scalar>(
    inst: &Instance<T>,
    i: i64,
    p: u32,
    r: T,
    n_samples: u64,
    seed: RngSeed,
    workers: usize,
) -> Result<HitStats, SampleError> {
    if !(r > T::zero()) || !r.is_finite() || n_samples == 0 || p == 0 {
        return Err(SampleError::InvalidArgument("volume_ratio needs finite r > 0, p >= 1 and n_samples >= 1"));
    }
    let r_sq = r * r;
    let j = i + i64::from(p);
    let inner = ElementView::new(inst, j, r_sq)?;
    let outer = ElementView::new(inst, i, r_sq)?;
    let Some((center, radius)) = element_bounding_ball(inst, j, r_sq)? else {
        return Err(SampleError::DegenerateDenominator { hits: 0 });
    };
    let dim = inst.dim();
    let (den, num) = parallel_counts(n_samples, workers, seed, |rng, n| {
        let mut dir = vec![0.0; dim];
        let mut x = vec![T::zero(); dim];
        let (mut den, mut num) = (0, 0);
        for _ in 0..n {
            ball_point(rng, &center, radius, &mut dir, &mut x);
            if inner.contains(&x) {
                den += 1;
                num += u64::from(outer.contains(&x));
            }
        }
        (den, num)
    });
    if den < MIN_DENOMINATOR_HITS {
        return Err(SampleError::DegenerateDenominator { hits: den });
    }
    Ok(HitStats::new(num, den))
}
