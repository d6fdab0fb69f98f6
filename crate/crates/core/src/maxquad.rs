//! Minimization of a pointwise maximum of isotropic quadratics with a common
//! curvature, `Φ(x) = max_k κ‖x − D_k‖² + e_k`.
//!
//! Every function the toolkit minimizes has this form: `h` (κ = 1), `h − g`
//! (κ = 1 − λ) and the Lagrangian `h − g + ν(h − 1)` (pairwise pieces, κ = 1 − λ + ν).
//! The dual is `max_{w ∈ Δ} Σ_k w_k (κ‖D_k − x(w)‖² + e_k)` with `x(w) = Σ_k w_k D_k`,
//! solved exactly by a Wolfe-type active-set iteration: add the most violated
//! piece, maximize over the affine hull of the support, step back to the simplex
//! when a weight turns negative.

use crate::linalg;
use crate::scalar::{dist_sq, dot, Scalar};

#[derive(Debug, Clone)]
pub(crate) struct IsoQuad<T: Scalar> {
    pub center: Vec<T>,
    pub offset: T,
}

#[derive(Debug, Clone)]
pub(crate) struct MaxQuadSolution<T: Scalar> {
    pub x: Vec<T>,
    /// `Φ(x)`.
    pub value: T,
    /// Dual value `ψ(w) ≤ Φ(x*) ≤ Φ(x)`.
    pub dual: T,
    pub support: Vec<usize>,
    pub weights: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> MaxQuadSolution<T> {
    pub fn gap(&self) -> T {
        (self.value - self.dual).max(T::zero())
    }
}

fn eval_all<T: Scalar>(curv: T, pieces: &[IsoQuad<T>], x: &[T]) -> Vec<T> {
    pieces.iter().map(|p| curv * dist_sq(x, &p.center) + p.offset).collect()
}

fn combine<T: Scalar>(pieces: &[IsoQuad<T>], support: &[usize], w: &[T]) -> Vec<T> {
    let dim = pieces[support[0]].center.len();
    let mut out = vec![T::zero(); dim];
    for (&k, &wk) in support.iter().zip(w) {
        for (o, &c) in out.iter_mut().zip(&pieces[k].center) {
            *o += wk * c;
        }
    }
    out
}

/// Maximizer of the dual over the affine hull of `support`, as barycentric weights.
fn affine_step<T: Scalar>(curv: T, pieces: &[IsoQuad<T>], support: &[usize]) -> Option<Vec<T>> {
    let s = support.len();
    let base = &pieces[support[0]];
    let deltas: Vec<Vec<T>> = support[1..]
        .iter()
        .map(|&k| pieces[k].center.iter().zip(&base.center).map(|(&a, &b)| a - b).collect())
        .collect();
    let n = s - 1;
    let two = T::lit(2.0);
    let mut gram = vec![T::zero(); n * n];
    let mut rhs = vec![T::zero(); n];
    for i in 0..n {
        for j in 0..=i {
            let g = two * curv * dot(&deltas[i], &deltas[j]);
            gram[i * n + j] = g;
            gram[j * n + i] = g;
        }
        rhs[i] = curv * dot(&deltas[i], &deltas[i]) + pieces[support[i + 1]].offset - base.offset;
    }
    let v = match linalg::solve(gram.clone(), rhs.clone(), T::lit(1e-13)) {
        Some(v) => v,
        None => {
            // Degenerate corral; a small ridge pushes weight off the redundant piece.
            let trace = (0..n).map(|i| gram[i * n + i]).fold(T::zero(), |a, b| a + b);
            let ridge = trace.max(T::one()) * T::lit(1e-10);
            for i in 0..n {
                gram[i * n + i] += ridge;
            }
            linalg::solve(gram, rhs, T::lit(1e-15))?
        }
    };
    let mut alpha = Vec::with_capacity(s);
    alpha.push(T::one() - v.iter().copied().sum::<T>());
    alpha.extend(v);
    Some(alpha)
}

/// Barycentric coordinates of `pieces[k].center` w.r.t. the (affinely independent)
/// support centers, when it lies in their affine hull.
fn affine_coords<T: Scalar>(pieces: &[IsoQuad<T>], support: &[usize], k: usize) -> Option<Vec<T>> {
    let base = &pieces[support[0]].center;
    let target: Vec<T> = pieces[k].center.iter().zip(base).map(|(&a, &b)| a - b).collect();
    let deltas: Vec<Vec<T>> = support[1..]
        .iter()
        .map(|&j| pieces[j].center.iter().zip(base).map(|(&a, &b)| a - b).collect())
        .collect();
    let n = deltas.len();
    let scale = deltas.iter().chain(std::iter::once(&target)).map(|d| dot(d, d)).fold(T::zero(), T::max);
    let v = if n == 0 {
        Vec::new()
    } else {
        let mut gram = vec![T::zero(); n * n];
        let mut rhs = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = dot(&deltas[i], &deltas[j]);
            }
            rhs[i] = dot(&deltas[i], &target);
        }
        linalg::solve(gram, rhs, T::lit(1e-13))?
    };
    let mut resid = target;
    for (d, &c) in deltas.iter().zip(&v) {
        for (r, &dv) in resid.iter_mut().zip(d) {
            *r -= c * dv;
        }
    }
    if dot(&resid, &resid) > T::lit(1e-20) * scale.max(T::min_positive_value()) {
        return None;
    }
    let mut beta = Vec::with_capacity(n + 1);
    beta.push(T::one() - v.iter().copied().sum::<T>());
    beta.extend(v);
    Some(beta)
}

/// Minimizes `max_k curv·‖x − D_k‖² + e_k`. `start` selects the initial support
/// (the piece attaining the max there).
pub(crate) fn minimize_max_quadratics<T: Scalar>(
    curv: T,
    pieces: &[IsoQuad<T>],
    start: Option<&[T]>,
    max_iter: usize,
) -> MaxQuadSolution<T> {
    assert!(!pieces.is_empty());
    assert!(curv > T::zero());
    let first = match start {
        Some(s) => {
            let vals = eval_all(curv, pieces, s);
            argmax(&vals).0
        }
        None => {
            let (i, _) = pieces
                .iter()
                .enumerate()
                .fold((0, T::infinity()), |acc, (i, p)| if p.offset < acc.1 { (i, p.offset) } else { acc });
            i
        }
    };
    let eps = T::lit(1e-14);
    let mut support = vec![first];
    let mut weights = vec![T::one()];
    let mut x = pieces[first].center.clone();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut vals = eval_all(curv, pieces, &x);

    while iterations < max_iter {
        iterations += 1;
        let (kmax, vmax) = argmax(&vals);
        let dual: T = support.iter().zip(&weights).map(|(&k, &w)| w * vals[k]).sum();
        let scale = vals.iter().fold(T::one(), |m, v| m.max(v.abs()));
        if vmax - dual <= T::lit(1e-13) * scale {
            converged = true;
            break;
        }
        if support.contains(&kmax) {
            // Numerically stalled at the precision floor.
            converged = vmax - dual <= T::lit(1e-9) * scale;
            break;
        }
        if let Some(beta) = affine_coords(pieces, &support, kmax) {
            // The new center is an affine combination of the support: the dual is
            // linear along `e_new − β` (x stays fixed), so move until a weight vanishes.
            let mut t = T::infinity();
            for (&w, &b) in weights.iter().zip(&beta) {
                if b > T::zero() {
                    t = t.min(w / b);
                }
            }
            let mut ks = Vec::with_capacity(support.len() + 1);
            let mut ws = Vec::with_capacity(support.len() + 1);
            for ((&k, &w), &b) in support.iter().zip(&weights).zip(&beta) {
                let nw = w - t * b;
                if nw > eps {
                    ks.push(k);
                    ws.push(nw);
                }
            }
            ks.push(kmax);
            ws.push(t);
            let total: T = ws.iter().copied().sum();
            ws.iter_mut().for_each(|w| *w /= total);
            support = ks;
            weights = ws;
        } else {
            support.push(kmax);
            weights.push(T::zero());
        }

        loop {
            iterations += 1;
            let alpha = match affine_step(curv, pieces, &support) {
                Some(a) => a,
                None => {
                    support.pop();
                    weights.pop();
                    break;
                }
            };
            if alpha.iter().all(|&a| a > eps) {
                weights = alpha;
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
            let mut ks = Vec::with_capacity(support.len());
            let mut ws = Vec::with_capacity(support.len());
            for (&k, &w) in support.iter().zip(&weights) {
                if w > eps {
                    ks.push(k);
                    ws.push(w);
                }
            }
            if ks.is_empty() {
                ks.push(kmax);
                ws.push(T::one());
            }
            let total: T = ws.iter().copied().sum();
            ws.iter_mut().for_each(|w| *w /= total);
            support = ks;
            weights = ws;
            if support.len() == 1 || iterations >= max_iter {
                break;
            }
        }
        x = combine(pieces, &support, &weights);
        vals = eval_all(curv, pieces, &x);
    }

    let (_, value) = argmax(&vals);
    let dual: T = support.iter().zip(&weights).map(|(&k, &w)| w * vals[k]).sum();
    MaxQuadSolution { x, value, dual, support, weights, iterations, converged }
}

fn argmax<T: Scalar>(vals: &[T]) -> (usize, T) {
    vals.iter()
        .copied()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc })
}
