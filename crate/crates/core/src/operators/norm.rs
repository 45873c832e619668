//! Operator-norm estimators.
//!
//! Every iterative estimate is `||A v|| / ||v||` for a concrete vector `v`, so
//! it never exceeds the true norm (up to rounding in the final product). Upper
//! enclosures come from [`norm_upper_bound`], never from an estimator.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::matrix::{GradedMatrix, DENSE_LIMIT};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;
const DEFAULT_RESTARTS: usize = 4;
const RESTART_SEED: u64 = 0x005E_ED0F_D1AC;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    /// Attained value `||A v|| / ||v||`; a lower bound for `||A||`.
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Relative eigen-residual of `A*A` at the returned vector.
    pub residual: f64,
}

impl NormEstimate {
    fn exact(value: f64) -> Self {
        NormEstimate {
            value,
            converged: true,
            iterations: 0,
            residual: 0.0,
        }
    }
}

/// A strategy for estimating the largest singular value of a graded matrix.
pub trait NormEstimator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn estimate(&self, a: &GradedMatrix) -> NormEstimate;
}

type Constructor = fn(f64, usize) -> Arc<dyn NormEstimator>;

struct Registration {
    name: &'static str,
    summary: &'static str,
    construct: Constructor,
}

static ESTIMATORS: &[Registration] = &[
    Registration {
        name: "power",
        summary: "power iteration on A*A from e plus 4 seeded restarts",
        construct: |tol, max_iter| Arc::new(PowerIteration::new(tol, max_iter)),
    },
    Registration {
        name: "lanczos",
        summary: "restarted Lanczos on A*A with full reorthogonalization",
        construct: |tol, max_iter| Arc::new(Lanczos::new(tol, max_iter)),
    },
    Registration {
        name: "dense",
        summary: "full singular value decomposition",
        construct: |_, _| Arc::new(DenseSvd),
    },
];

/// Looks up a registered estimator by name.
pub fn estimator_by_name(name: &str, tol: f64, max_iter: usize) -> Result<Arc<dyn NormEstimator>> {
    ESTIMATORS
        .iter()
        .find(|r| r.name == name)
        .map(|r| (r.construct)(tol, max_iter))
        .ok_or_else(|| {
            Error::usage(format!(
                "unknown norm estimator {name:?}; expected one of {}",
                estimator_names().join(", ")
            ))
        })
}

pub fn estimator_names() -> Vec<&'static str> {
    ESTIMATORS.iter().map(|r| r.name).collect()
}

pub fn estimator_summaries() -> Vec<(&'static str, &'static str)> {
    ESTIMATORS.iter().map(|r| (r.name, r.summary)).collect()
}

pub fn default_estimator() -> Arc<dyn NormEstimator> {
    Arc::new(PowerIteration::default())
}

/// Power-iteration norm estimate with the given relative tolerance.
pub fn operator_norm(a: &GradedMatrix, tol: f64, max_iter: usize) -> NormEstimate {
    PowerIteration::new(tol, max_iter).estimate(a)
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|c| *c /= n);
    }
    n
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    normalize(&mut v);
    v
}

fn basis(dim: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[i] = Complex64::new(1.0, 0.0);
    v
}

/// `||A*A v - s^2 v|| / s^2` for a unit vector `v` with `s = ||A v||`.
fn relative_residual(a: &GradedMatrix, v: &[Complex64]) -> f64 {
    let n = a.dim();
    let mut w = vec![ZERO; n];
    let mut u = vec![ZERO; n];
    a.apply(v, &mut w);
    let s2 = norm(&w).powi(2);
    if s2 == 0.0 {
        return 0.0;
    }
    a.apply_adjoint(&w, &mut u);
    u.iter()
        .zip(v)
        .map(|(x, y)| (x - y * s2).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / s2
}

#[derive(Clone, Debug)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self::new(DEFAULT_TOL, DEFAULT_MAX_ITER)
    }
}

struct PowerRun {
    value: f64,
    vector: Vec<Complex64>,
    converged: bool,
    iterations: usize,
}

impl PowerIteration {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        PowerIteration {
            tol,
            max_iter,
            restarts: DEFAULT_RESTARTS,
            seed: RESTART_SEED,
        }
    }

    fn run(&self, a: &GradedMatrix, mut v: Vec<Complex64>) -> PowerRun {
        let n = a.dim();
        let mut w = vec![ZERO; n];
        a.apply(&v, &mut w);
        let mut value = norm(&w);
        let mut best = PowerRun {
            value,
            vector: v.clone(),
            converged: false,
            iterations: 0,
        };
        for it in 1..=self.max_iter {
            a.apply_adjoint(&w, &mut v);
            if normalize(&mut v) == 0.0 {
                best.converged = true;
                best.iterations = it;
                return best;
            }
            a.apply(&v, &mut w);
            let next = norm(&w);
            if next > best.value {
                best.value = next;
                best.vector.copy_from_slice(&v);
            }
            best.iterations = it;
            if (next - value).abs() <= self.tol * next {
                best.converged = true;
                return best;
            }
            value = next;
        }
        best
    }
}

impl NormEstimator for PowerIteration {
    fn name(&self) -> &'static str {
        "power"
    }

    fn estimate(&self, a: &GradedMatrix) -> NormEstimate {
        let n = a.dim();
        if n == 0 || a.nnz() == 0 {
            return NormEstimate::exact(0.0);
        }
        let mut best = self.run(a, basis(n, 0));
        let mut iterations = best.iterations;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.restarts {
            let run = self.run(a, random_unit(n, &mut rng));
            iterations += run.iterations;
            if run.value > best.value {
                best = run;
            }
        }
        NormEstimate {
            value: best.value,
            converged: best.converged,
            iterations,
            residual: relative_residual(a, &best.vector),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extreme {
    Largest,
    Smallest,
}

/// An eigenpair estimate of a Hermitian operator; `value` is the Rayleigh
/// quotient actually attained by the unit vector `vector`.
#[derive(Clone, Debug)]
pub struct RayleighPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Restarted Lanczos with full reorthogonalization for an extreme eigenpair
/// of the Hermitian operator `op` (applied as `op(x, y)` meaning `y = op x`).
/// Each cycle restarts from the current Ritz vector; the start vector is the
/// first Krylov vector, so the result is never worse than its Rayleigh quotient.
pub fn lanczos_extreme<F>(
    op: F,
    start: &[Complex64],
    which: Extreme,
    krylov_dim: usize,
    max_matvecs: usize,
    tol: f64,
) -> RayleighPair
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = start.len();
    let mut y = start.to_vec();
    normalize(&mut y);
    let mut tmp = vec![ZERO; n];
    op(&y, &mut tmp);
    let rayleigh = |v: &[Complex64], w: &[Complex64]| dot(v, w).re;
    let mut best = RayleighPair {
        value: rayleigh(&y, &tmp),
        vector: y.clone(),
        converged: false,
        iterations: 1,
        residual: f64::INFINITY,
    };
    let better = |a: f64, b: f64| match which {
        Extreme::Largest => a > b,
        Extreme::Smallest => a < b,
    };
    let m = krylov_dim.clamp(1, n.max(1));
    let mut matvecs = 1;
    while matvecs < max_matvecs {
        let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        q.push(y.clone());
        let mut exhausted = false;
        for j in 0..m {
            let mut w = vec![ZERO; n];
            op(&q[j], &mut w);
            matvecs += 1;
            let a = rayleigh(&q[j], &w);
            alpha.push(a);
            // full reorthogonalization, applied twice
            for _ in 0..2 {
                for qi in &q {
                    let c = dot(qi, &w);
                    w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            let scale = alpha.iter().fold(0.0f64, |s, a| s.max(a.abs())).max(1e-300);
            if b <= 1e-13 * scale || j + 1 == m || matvecs >= max_matvecs {
                beta.push(b);
                exhausted = b <= 1e-13 * scale;
                break;
            }
            w.iter_mut().for_each(|c| *c /= b);
            beta.push(b);
            q.push(w);
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let pick = (0..k)
            .reduce(|i, j| {
                if better(eig.eigenvalues[j], eig.eigenvalues[i]) {
                    j
                } else {
                    i
                }
            })
            .expect("nonempty tridiagonal");
        let s = eig.eigenvectors.column(pick);
        let mut ritz = vec![ZERO; n];
        for (qi, si) in q.iter().zip(s.iter()) {
            ritz.iter_mut().zip(qi).for_each(|(r, x)| *r += x * *si);
        }
        normalize(&mut ritz);
        op(&ritz, &mut tmp);
        matvecs += 1;
        let value = rayleigh(&ritz, &tmp);
        let residual = tmp
            .iter()
            .zip(&ritz)
            .map(|(w, v)| (w - v * value).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / value.abs().max(1e-300);
        if !better(best.value, value) {
            best.value = value;
            best.vector = ritz.clone();
            best.residual = residual;
        }
        best.iterations = matvecs;
        if residual <= tol || exhausted {
            best.converged = true;
            break;
        }
        y = ritz;
    }
    best
}

#[derive(Clone, Debug)]
pub struct Lanczos {
    pub tol: f64,
    pub max_matvecs: usize,
    pub krylov_dim: usize,
}

impl Lanczos {
    pub fn new(tol: f64, max_matvecs: usize) -> Self {
        Lanczos {
            tol,
            max_matvecs,
            krylov_dim: 80,
        }
    }
}

impl NormEstimator for Lanczos {
    fn name(&self) -> &'static str {
        "lanczos"
    }

    fn estimate(&self, a: &GradedMatrix) -> NormEstimate {
        let n = a.dim();
        if n == 0 || a.nnz() == 0 {
            return NormEstimate::exact(0.0);
        }
        let op = |x: &[Complex64], y: &mut [Complex64]| {
            let mut w = vec![ZERO; n];
            a.apply(x, &mut w);
            a.apply_adjoint(&w, y);
        };
        // from e, then from a seeded random vector in case e spans an
        // invariant subspace that misses the top singular vector
        let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
        let mut best: Option<(f64, RayleighPair)> = None;
        let mut iterations = 0;
        for start in [basis(n, 0), random_unit(n, &mut rng)] {
            let pair = lanczos_extreme(
                op,
                &start,
                Extreme::Largest,
                self.krylov_dim,
                self.max_matvecs,
                self.tol,
            );
            iterations += pair.iterations;
            let mut w = vec![ZERO; n];
            a.apply(&pair.vector, &mut w);
            let value = norm(&w);
            if best.as_ref().is_none_or(|(v, _)| value > *v) {
                best = Some((value, pair));
            }
        }
        let (value, pair) = best.expect("two runs");
        NormEstimate {
            value,
            converged: pair.converged,
            iterations,
            residual: relative_residual(a, &pair.vector),
        }
    }
}

/// Largest singular value from a full SVD. Exact up to rounding rather than
/// an attained lower bound; intended as an oracle at small dimension.
#[derive(Clone, Copy, Debug, Default)]
pub struct DenseSvd;

impl NormEstimator for DenseSvd {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn estimate(&self, a: &GradedMatrix) -> NormEstimate {
        if a.dim() == 0 {
            return NormEstimate::exact(0.0);
        }
        NormEstimate::exact(largest_singular_value(&a.to_dense()))
    }
}

pub fn largest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// A certified upper bound for `||A||`: the minimum of the Schur test
/// `sqrt(max row sum * max column sum)`, the Frobenius norm, and, at small
/// dimension, the SVD value inflated by a rounding margin.
pub fn norm_upper_bound(a: &GradedMatrix) -> f64 {
    let (r, c) = a.row_col_sums();
    let mut bound = (r * c).sqrt().min(a.frobenius_norm());
    if a.dim() > 0 && a.dim() <= DENSE_LIMIT {
        let s = largest_singular_value(&a.to_dense());
        let margin = 64.0 * f64::EPSILON * a.dim() as f64 * a.frobenius_norm();
        bound = bound.min(s + margin);
    }
    bound * (1.0 + 4.0 * f64::EPSILON)
}

/// Smallest and largest Rayleigh quotients of a Hermitian graded matrix,
/// each attained by its returned unit vector.
pub fn hermitian_extremes(
    a: &GradedMatrix,
    tol: f64,
    max_matvecs: usize,
) -> (RayleighPair, RayleighPair) {
    let n = a.dim();
    let op = |x: &[Complex64], y: &mut [Complex64]| a.apply(x, y);
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let start = random_unit(n, &mut rng);
    let lo = lanczos_extreme(op, &start, Extreme::Smallest, 80, max_matvecs, tol);
    let hi = lanczos_extreme(op, &start, Extreme::Largest, 80, max_matvecs, tol);
    (lo, hi)
}
