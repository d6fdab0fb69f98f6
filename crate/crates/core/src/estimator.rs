//! Monte Carlo estimators of `R0`.
//!
//! * [`procedure_b`] grows a sphere about `C0` in fixed steps while it still meets
//!   the element `Q^i_{R²}`, then bisects the first hit/miss bracket.
//! * [`volume_bisect`] bisects on the volume ratio
//!   `V(R) = Vol(Q^{i+p} ∩ Q^i)/Vol(Q^{i+p})`, which equals 1 exactly for `R ≥ R0`.
//! * [`lemma23_ratio`] and [`fk_profile`] are diagnostics for the growth of the
//!   surface ratio below `R0` and for the backward-sequence shape quantity.
//!
//! Every probe draws from its own child seed, so each report is a deterministic
//! function of `(inputs, seed, workers)`.

use serde::Serialize;
use thiserror::Error;

use crate::classifier::Classification;
use crate::geometry::Instance;
use crate::sampler::{surface_ratio, volume_ratio, HitStats, RngSeed, SampleError};
use crate::scalar::Scalar;
use crate::sequence::SequenceError;

pub const DEFAULT_BACKWARD_INDEX: i64 = -20;
pub const DEFAULT_BISECT_ITERS: u32 = 20;
pub const DEFAULT_VOLUME_ROUNDS: u32 = 12;
pub const DEFAULT_THRESHOLD: f64 = 0.995;
/// Upper bound on growth steps before Procedure B gives up.
pub const MAX_GROWTH_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimateMethod {
    ProcedureB,
    VolumeBisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint<T: Scalar = f64> {
    pub r: T,
    pub stats: HitStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport<T: Scalar = f64> {
    pub r_hat: T,
    pub bracket: (T, T),
    pub method: EstimateMethod,
    pub i_used: i64,
    pub p_used: Option<u32>,
    /// Procedure B: the growth phase (strictly increasing radii, all hits except the
    /// last). Volume bisection: the two initial end probes.
    pub stats_trace: Vec<TracePoint<T>>,
    /// Bisection probes in evaluation order.
    pub refinement_trace: Vec<TracePoint<T>>,
    pub seed: RngSeed,
    pub workers: usize,
    pub n_samples: u64,
    pub classification: Option<Classification<T>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("the starting sphere already misses the element (hits 0 of {samples}); lower r_init or raise the sample count")]
    NoInitialHit { samples: u64 },
    #[error("the sphere still meets the element after {steps} growth steps")]
    NoMissFound { steps: u64 },
    #[error("both bracket ends classify as {}", if *.both_one { "ratio = 1" } else { "ratio < 1" })]
    InconsistentBracket { both_one: bool },
    #[error("bracket ends are reversed: the low end reads ratio = 1 and the high end ratio < 1")]
    ReversedBracket,
    #[error("zero hits on the reference sphere; the ratio is undefined")]
    ZeroDenominator,
    #[error("invalid estimator argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

impl From<SequenceError> for EstimateError {
    fn from(e: SequenceError) -> Self {
        EstimateError::Sample(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcedureBParams<T: Scalar = f64> {
    /// Sequence index, normally negative.
    pub i: i64,
    pub r_init: T,
    pub n_samples: u64,
    /// Growth step; `None` selects `max(0.01, 0.01·r_init)`.
    pub step: Option<T>,
    pub bisect_iters: u32,
    pub seed: RngSeed,
    pub workers: usize,
}

impl<T: Scalar> ProcedureBParams<T> {
    pub fn new(r_init: T, n_samples: u64, seed: RngSeed) -> Self {
        Self {
            i: DEFAULT_BACKWARD_INDEX,
            r_init,
            n_samples,
            step: None,
            bisect_iters: DEFAULT_BISECT_ITERS,
            seed,
            workers: 1,
        }
    }

    pub fn resolved_step(&self) -> T {
        self.step.unwrap_or_else(|| T::lit(0.01).max(T::lit(0.01) * self.r_init))
    }
}

/// Sphere probe where an empty element counts as a miss.
fn sphere_probe<T: Scalar>(inst: &Instance<T>, i: i64, r: T, n: u64, seed: RngSeed, workers: usize) -> Result<HitStats, EstimateError> {
    match surface_ratio(inst, i, r, n, seed, workers) {
        Ok(s) => Ok(s),
        Err(SampleError::EmptyElement { .. }) => Ok(HitStats::new(0, n)),
        Err(e) => Err(e.into()),
    }
}

/// Procedure B: grow `r` by `step` while the sphere `∂B(C0, r)` meets `Q^i_{r²}`,
/// then bisect `[last hit, first miss]` with fresh seeds. `r_hat` is the midpoint.
pub fn procedure_b<T: Scalar>(inst: &Instance<T>, params: &ProcedureBParams<T>) -> Result<EstimateReport<T>, EstimateError> {
    let step = params.resolved_step();
    if !(params.r_init > T::zero()) || !params.r_init.is_finite() || !(step > T::zero()) || params.n_samples == 0 {
        return Err(EstimateError::InvalidArgument("procedure_b needs r_init > 0, step > 0 and n_samples >= 1"));
    }
    let mut probe = 0u64;
    let mut next_seed = || {
        probe += 1;
        params.seed.derive(probe)
    };
    let (n, w, i) = (params.n_samples, params.workers, params.i);
    let first = surface_ratio(inst, i, params.r_init, n, next_seed(), w).map_err(|e| match e {
        SampleError::EmptyElement { index } => EstimateError::Sample(SampleError::EmptyElement { index }),
        other => other.into(),
    })?;
    if first.hits == 0 {
        return Err(EstimateError::NoInitialHit { samples: n });
    }
    let mut trace = vec![TracePoint { r: params.r_init, stats: first }];
    let mut lo = params.r_init;
    let mut steps = 0u64;
    let hi = loop {
        steps += 1;
        if steps > MAX_GROWTH_STEPS {
            return Err(EstimateError::NoMissFound { steps: MAX_GROWTH_STEPS });
        }
        let r = params.r_init + step * T::from_usize_lossy(steps as usize);
        let stats = sphere_probe(inst, i, r, n, next_seed(), w)?;
        trace.push(TracePoint { r, stats });
        if stats.hits == 0 {
            break r;
        }
        lo = r;
    };
    let mut hi = hi;
    let mut refinement = Vec::with_capacity(params.bisect_iters as usize);
    for _ in 0..params.bisect_iters {
        let mid = (lo + hi) / T::lit(2.0);
        let stats = sphere_probe(inst, i, mid, n, next_seed(), w)?;
        refinement.push(TracePoint { r: mid, stats });
        if stats.hits > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EstimateReport {
        r_hat: (lo + hi) / T::lit(2.0),
        bracket: (lo, hi),
        method: EstimateMethod::ProcedureB,
        i_used: i,
        p_used: None,
        stats_trace: trace,
        refinement_trace: refinement,
        seed: params.seed,
        workers: w,
        n_samples: n,
        classification: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeParams<T: Scalar = f64> {
    pub i: i64,
    pub p: u32,
    pub bracket: (T, T),
    pub n_samples: u64,
    /// A probe reads "ratio = 1" when its Wilson lower bound reaches this value.
    pub threshold: f64,
    pub rounds: u32,
    pub seed: RngSeed,
    pub workers: usize,
}

/// Default offset between the two volume elements.
pub const DEFAULT_VOLUME_P: u32 = 2;
/// Default index `i = −p`. With `i + p ≤ 0`, `R ≥ R0` forces `Q^{i+p} ⊆ Q^i`, so the
/// ratio is exactly 1 there; with `i + p > 0` the inclusion can fail above `R0`.
pub const DEFAULT_VOLUME_INDEX: i64 = -(DEFAULT_VOLUME_P as i64);

impl<T: Scalar> VolumeParams<T> {
    pub fn new(bracket: (T, T), n_samples: u64, seed: RngSeed) -> Self {
        Self {
            i: DEFAULT_VOLUME_INDEX,
            p: DEFAULT_VOLUME_P,
            bracket,
            n_samples,
            threshold: DEFAULT_THRESHOLD,
            rounds: DEFAULT_VOLUME_ROUNDS,
            seed,
            workers: 1,
        }
    }
}

/// `Some(stats)` with the decision "ratio = 1", or `None` stats when the
/// denominator degenerates (then `R` is too large and the probe reads "= 1").
fn volume_probe<T: Scalar>(inst: &Instance<T>, params: &VolumeParams<T>, r: T, seed: RngSeed) -> Result<(bool, HitStats), EstimateError> {
    match volume_ratio(inst, params.i, params.p, r, params.n_samples, seed, params.workers) {
        Ok(s) => Ok((s.wilson_low >= params.threshold, s)),
        Err(SampleError::DegenerateDenominator { hits }) => Ok((true, HitStats::new(hits, hits))),
        Err(e) => Err(e.into()),
    }
}

/// Bisection on the volume ratio: a probe reading "= 1" lowers the high end,
/// otherwise the low end moves up.
pub fn volume_bisect<T: Scalar>(inst: &Instance<T>, params: &VolumeParams<T>) -> Result<EstimateReport<T>, EstimateError> {
    let (mut lo, mut hi) = params.bracket;
    if !(lo > T::zero()) || !(hi > lo) || !hi.is_finite() || params.p == 0 || params.n_samples == 0 {
        return Err(EstimateError::InvalidArgument("volume_bisect needs 0 < lo < hi, p >= 1 and n_samples >= 1"));
    }
    if !(params.threshold > 0.0 && params.threshold < 1.0) {
        return Err(EstimateError::InvalidArgument("threshold must lie in (0, 1)"));
    }
    let (lo_one, lo_stats) = volume_probe(inst, params, lo, params.seed.derive(1))?;
    let (hi_one, hi_stats) = volume_probe(inst, params, hi, params.seed.derive(2))?;
    let ends = vec![TracePoint { r: lo, stats: lo_stats }, TracePoint { r: hi, stats: hi_stats }];
    match (lo_one, hi_one) {
        (false, true) => {}
        (true, false) => return Err(EstimateError::ReversedBracket),
        (both, _) => return Err(EstimateError::InconsistentBracket { both_one: both }),
    }
    let mut refinement = Vec::with_capacity(params.rounds as usize);
    for round in 0..params.rounds {
        let mid = (lo + hi) / T::lit(2.0);
        let (one, stats) = volume_probe(inst, params, mid, params.seed.derive(3 + u64::from(round)))?;
        refinement.push(TracePoint { r: mid, stats });
        if one {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(EstimateReport {
        r_hat: (lo + hi) / T::lit(2.0),
        bracket: (lo, hi),
        method: EstimateMethod::VolumeBisection,
        i_used: params.i,
        p_used: Some(params.p),
        stats_trace: ends,
        refinement_trace: refinement,
        seed: params.seed,
        workers: params.workers,
        n_samples: params.n_samples,
        classification: None,
    })
}

/// `(1/(1 − x/n))^{n−1}` with `x = α/R`, computed as `exp(−(n−1)·ln(1 − x/n))`.
/// Tends to `e^x` as `n → ∞`.
pub fn lemma23_factor(alpha_over_r: f64, n: f64) -> f64 {
    (-(n - 1.0) * (-alpha_over_r / n).ln_1p()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma23Report {
    /// `R_i(r − α/n) / R_i(r)` from sphere samples.
    pub empirical: f64,
    /// `(1/(1 − α/(r·n)))^{n−1}` with `n` the dimension.
    pub bound: f64,
    pub at_r: HitStats,
    pub at_shifted: HitStats,
}

/// Empirical surface-ratio growth between `r` and `r − α/n` against the finite-`n`
/// factor. Both radii share one seed (common random numbers), so when `C0 ∈ Q` a
/// sample direction that hits at `r` also hits at the smaller radius.
pub fn lemma23_ratio<T: Scalar>(
    inst: &Instance<T>,
    i: i64,
    r: T,
    alpha: T,
    n_samples: u64,
    seed: RngSeed,
    workers: usize,
) -> Result<Lemma23Report, EstimateError> {
    if !(alpha >= T::zero()) {
        return Err(EstimateError::InvalidArgument("alpha must be non-negative"));
    }
    let n = T::from_usize_lossy(inst.dim());
    let shifted = r - alpha / n;
    if !(shifted > T::zero()) {
        return Err(EstimateError::InvalidArgument("r - alpha/n must stay positive"));
    }
    let at_r = surface_ratio(inst, i, r, n_samples, seed, workers)?;
    if at_r.hits == 0 {
        return Err(EstimateError::ZeroDenominator);
    }
    let at_shifted = surface_ratio(inst, i, shifted, n_samples, seed, workers)?;
    let empirical = at_shifted.ratio / at_r.ratio;
    let bound = lemma23_factor((alpha / r).to_f64_lossy(), n.to_f64_lossy());
    Ok(Lemma23Report { empirical, bound, at_r, at_shifted })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkProfile<T: Scalar = f64> {
    pub k: usize,
    pub i: i64,
    /// `(r²_{k,i} − R²)/‖C_{k,i} − C0‖`.
    pub value: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkBall<T: Scalar = f64> {
    pub k: usize,
    /// `b_k = (r_k² − R² − ‖C_k − C0‖²)/‖C_k − C0‖`, the limit of the profile.
    pub b: T,
    /// `b_k ≤ 0`: the regime in which the magnitude of the profile grows with `|i|`.
    pub proof_regime: bool,
    /// `C_k = C0`: the profile is undefined and the ball is skipped.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkReport<T: Scalar = f64> {
    pub r: T,
    pub profiles: Vec<FkProfile<T>>,
    pub balls: Vec<FkBall<T>>,
}

/// Shape quantity of the sequence for each ball and index. With `s = (1 − λ)^{−i}`
/// the value equals `b_k + s·‖C_k − C0‖`; it is evaluated in the cancellation-free
/// form `(r_k² − R² − (1 − s)‖C_k − C0‖²)/‖C_k − C0‖`.
pub fn fk_profile<T: Scalar>(inst: &Instance<T>, r: T, i_list: &[i64]) -> Result<FkReport<T>, EstimateError> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(EstimateError::InvalidArgument("r must be finite and non-negative"));
    }
    let r_sq = r * r;
    let mut profiles = Vec::new();
    let mut balls = Vec::new();
    for (k, b) in inst.q.balls().iter().enumerate() {
        let d = b.center.dist(&inst.c0);
        if d == T::zero() {
            balls.push(FkBall { k, b: T::nan(), proof_regime: false, skipped: true });
            continue;
        }
        let excess = b.radius * b.radius - r_sq;
        let bk = (excess - d * d) / d;
        balls.push(FkBall { k, b: bk, proof_regime: bk <= T::zero(), skipped: false });
        for &i in i_list {
            let s = crate::sequence::center_scale(inst.lambda, i);
            profiles.push(FkProfile { k, i, value: (excess - (T::one() - s) * d * d) / d });
        }
    }
    Ok(FkReport { r, profiles, balls })
}
