//! Certified lower bounds for the metric `d_{k,l}` by explicit witnesses:
//! every reported value is `|(phi - psi)(x)|` for a concrete `x` with
//! `sum |x(g)| l(g)^k = 1`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::state::{check_evaluable, StateFunctional};
use super::SeminormSpec;
use crate::error::{Error, Result};
use crate::operators::{convolution_matrix, hermitian_extremes, GradedMatrix, GroupAlgebraElement};
use crate::sampling::{complex_gaussian, random_self_adjoint, trial_rng};
use crate::words::{sphere, BallIndex, GroupElement, GroupSpec, DEFAULT_BALL_CAP};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Random restarts.
    pub restarts: usize,
    /// Coordinate-ascent sweeps per restart.
    pub sweeps: usize,
    pub seed: u64,
    /// Alternating improvement rounds in the diameter search.
    pub refinements: usize,
    /// Eigen-residual target for extreme Rayleigh quotients.
    pub eigen_tol: f64,
    pub max_matvecs: usize,
    pub ball_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 8,
            sweeps: 50,
            seed: 0,
            refinements: 6,
            eigen_tol: 1e-8,
            max_matvecs: 4000,
            ball_cap: DEFAULT_BALL_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceSearch {
    /// `|(phi - psi)(x)|` for the witness.
    pub value: f64,
    /// The witness, scaled so that `sum |x(g)| l(g)^k = 1`.
    pub witness: GroupAlgebraElement,
}

fn punctured_ball(spec: GroupSpec, radius: u32) -> Vec<GroupElement> {
    (1..=radius).flat_map(|m| sphere(spec, m)).collect()
}

struct Ascent<'a> {
    c: &'a [Complex64],
    w: &'a [f64],
    z: Vec<Complex64>,
    sum: Complex64,
    weight: f64,
}

impl<'a> Ascent<'a> {
    fn new(c: &'a [Complex64], w: &'a [f64], z: Vec<Complex64>) -> Self {
        let sum = z.iter().zip(c).map(|(z, c)| z * c).sum();
        let weight = z.iter().zip(w).map(|(z, w)| z.norm() * w).sum();
        Ascent { c, w, z, sum, weight }
    }

    fn value(&self) -> f64 {
        ratio(self.sum, self.weight)
    }

    fn trial(&self, i: usize, zi: Complex64) -> f64 {
        let sum = self.sum + (zi - self.z[i]) * self.c[i];
        let weight = self.weight + (zi.norm() - self.z[i].norm()) * self.w[i];
        ratio(sum, weight)
    }

    fn set(&mut self, i: usize, zi: Complex64) {
        self.sum += (zi - self.z[i]) * self.c[i];
        self.weight += (zi.norm() - self.z[i].norm()) * self.w[i];
        self.z[i] = zi;
    }

    /// Coordinate ascent over real and imaginary parts with adaptive steps.
    #[allow(clippy::needless_range_loop)]
    fn run(&mut self, sweeps: usize) {
        let n = self.z.len();
        let scale = self.z.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-12);
        let mut steps = vec![[0.5 * scale; 2]; n];
        for _ in 0..sweeps {
            let mut improved = false;
            for i in 0..n {
                for part in 0..2 {
                    let unit = if part == 0 { Complex64::new(1.0, 0.0) } else { Complex64::i() };
                    let h = steps[i][part];
                    let current = self.z[i];
                    let zeroed = if part == 0 {
                        Complex64::new(0.0, current.im)
                    } else {
                        Complex64::new(current.re, 0.0)
                    };
                    let mut best = (self.value(), current);
                    for cand in [current + unit * h, current - unit * h, zeroed] {
                        let v = self.trial(i, cand);
                        if v > best.0 {
                            best = (v, cand);
                        }
                    }
                    if best.1 != current {
                        self.set(i, best.1);
                        steps[i][part] = h * 2.0;
                        improved = true;
                    } else {
                        steps[i][part] = h * 0.5;
                    }
                }
            }
            if !improved && steps.iter().flatten().all(|h| *h < 1e-14 * scale) {
                break;
            }
        }
        // recompute to shed accumulated drift in the running sums
        *self = Ascent::new(self.c, self.w, std::mem::take(&mut self.z));
    }
}

fn ratio(sum: Complex64, weight: f64) -> f64 {
    if weight > 0.0 {
        sum.norm() / weight
    } else {
        0.0
    }
}

/// Searches `x` supported in the punctured ball of radius `radius` for the
/// largest `|(phi - psi)(x)|` with `sum |x(g)| l(g)^k = 1`. The best single
/// element is always a candidate; coordinate ascent runs from seeded random
/// restarts, and the first maximum found wins ties.
pub fn distance_lower_bound(
    phi: &StateFunctional,
    psi: &StateFunctional,
    spec: SeminormSpec,
    radius: u32,
    opts: &SearchOptions,
) -> Result<DistanceSearch> {
    let (a, b) = (phi.as_vector()?, psi.as_vector()?);
    check_evaluable(a, spec.group, radius)?;
    check_evaluable(b, spec.group, radius)?;
    let cands = punctured_ball(spec.group, radius);
    let c: Vec<Complex64> = cands
        .iter()
        .map(|g| a.evaluate_group_element(g) - b.evaluate_group_element(g))
        .collect();
    let w: Vec<f64> = cands.iter().map(|g| (g.length() as f64).powi(spec.k as i32)).collect();

    let mut starts: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(opts.restarts + 1);
    if let Some(i) = (0..cands.len()).reduce(|i, j| if c[j].norm() / w[j] > c[i].norm() / w[i] { j } else { i }) {
        let mut z = vec![ZERO; cands.len()];
        z[i] = Complex64::new(1.0, 0.0);
        let asc = Ascent::new(&c, &w, z);
        starts.push((asc.value(), asc.z));
    }
    let restarts: Vec<(f64, Vec<Complex64>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = trial_rng(opts.seed, r);
            let z = (0..cands.len()).map(|_| complex_gaussian(&mut rng)).collect();
            let mut asc = Ascent::new(&c, &w, z);
            asc.run(opts.sweeps);
            (asc.value(), asc.z)
        })
        .collect();
    starts.extend(restarts);

    let best = starts.into_iter().fold(None, |best: Option<(f64, Vec<Complex64>)>, cur| match best {
        Some(b) if b.0 >= cur.0 => Some(b),
        _ => Some(cur),
    });
    let Some((_, z)) = best else {
        return Ok(DistanceSearch {
            value: 0.0,
            witness: GroupAlgebraElement::zero(spec.group),
        });
    };
    let weight: f64 = z.iter().zip(&w).map(|(z, w)| z.norm() * w).sum();
    if weight == 0.0 {
        return Ok(DistanceSearch {
            value: 0.0,
            witness: GroupAlgebraElement::zero(spec.group),
        });
    }
    let witness = GroupAlgebraElement::from_terms(
        spec.group,
        cands.iter().zip(&z).map(|(g, z)| (g.clone(), z / weight)),
    )?;
    let value = witness
        .terms()
        .map(|(g, x)| x * (a.evaluate_group_element(g) - b.evaluate_group_element(g)))
        .sum::<Complex64>()
        .norm();
    Ok(DistanceSearch { value, witness })
}

/// Extreme vector states of a compressed self-adjoint `lambda(x)`.
#[derive(Clone, Debug)]
pub struct Spread {
    /// `upper - lower`.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_vector: Vec<Complex64>,
    pub upper_vector: Vec<Complex64>,
    pub converged: bool,
}

fn rayleigh(a: &GradedMatrix, v: &[Complex64]) -> f64 {
    let mut w = vec![ZERO; v.len()];
    a.apply(v, &mut w);
    let num: Complex64 = v.iter().zip(&w).map(|(v, w)| v.conj() * w).sum();
    let den: f64 = v.iter().map(|v| v.norm_sqr()).sum();
    num.re / den
}

fn spread_on(x: &GroupAlgebraElement, ball: &BallIndex, opts: &SearchOptions) -> Result<Spread> {
    if !x.is_self_adjoint(1e-12) {
        return Err(Error::usage("spectral spread needs a self-adjoint element"));
    }
    let a = convolution_matrix(x, ball)?;
    let (lo, hi) = hermitian_extremes(&a, opts.eigen_tol, opts.max_matvecs);
    let (lower, upper) = (rayleigh(&a, &lo.vector), rayleigh(&a, &hi.vector));
    Ok(Spread {
        value: (upper - lower).max(0.0),
        lower,
        upper,
        converged: lo.converged && hi.converged,
        lower_vector: lo.vector,
        upper_vector: hi.vector,
    })
}

/// `phi_xi(x) - phi_eta(x)` for the extreme Rayleigh vectors of the
/// compression of a self-adjoint `x` to the ball of radius `radius`.
pub fn spectral_spread(x: &GroupAlgebraElement, radius: u32, opts: &SearchOptions) -> Result<Spread> {
    let ball = BallIndex::with_cap(x.spec(), radius.max(x.support_radius()), opts.ball_cap)?;
    spread_on(x, &ball, opts)
}

#[derive(Clone, Debug)]
pub struct DiameterSearch {
    /// The best spread found; a lower bound for the state-space diameter.
    pub value: f64,
    /// The element attaining it, with `sum |x(g)| l(g)^k = 1`.
    pub witness: GroupAlgebraElement,
    pub converged: bool,
    pub candidates: usize,
}

/// `<lambda_g v, v>` for `v` indexed by the ball.
fn vector_moment(ball: &BallIndex, v: &[Complex64], g: &GroupElement) -> Complex64 {
    ball.elements()
        .iter()
        .enumerate()
        .filter_map(|(t, elem)| ball.position(&(g * elem)).map(|s| v[t] * v[s].conj()))
        .sum()
}

/// `(conj(c) lambda_g + c lambda_g^-1) / (2 w |c|)`; with `w = l(g)^k` its
/// seminorm upper bound is 1.
fn pair_element(g: &GroupElement, c: Complex64, w: f64) -> Result<GroupAlgebraElement> {
    let unit = if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) };
    GroupAlgebraElement::from_terms(
        g.spec(),
        [(g.clone(), unit.conj() / (2.0 * w)), (g.inverse(), unit / (2.0 * w))],
    )
}

/// Maximizes the spectral spread of compressions of self-adjoint `x` with
/// `sum |x(g)| l(g)^k = 1` supported in the ball of radius `support_radius`.
///
/// Candidates: every `(lambda_g + lambda_g^-1) / (2 l(g)^k)`, then random
/// self-adjoint elements, then alternating rounds that fix the two extreme
/// vectors and move to the best single-pair element for them.
pub fn diameter_lower_bound(
    spec: SeminormSpec,
    support_radius: u32,
    ball_radius: u32,
    opts: &SearchOptions,
) -> Result<DiameterSearch> {
    if support_radius == 0 {
        return Err(Error::usage("support radius must be at least 1"));
    }
    if ball_radius < support_radius {
        return Err(Error::usage("ball radius must be at least the support radius"));
    }
    let ball = BallIndex::with_cap(spec.group, ball_radius, opts.ball_cap)?;
    let cands = punctured_ball(spec.group, support_radius);
    let weight = |g: &GroupElement| (g.length() as f64).powi(spec.k as i32);

    let mut pool: Vec<GroupAlgebraElement> = Vec::new();
    for g in cands.iter().filter(|g| **g < g.inverse()) {
        pool.push(pair_element(g, Complex64::new(1.0, 0.0), weight(g))?);
    }
    for r in 0..opts.restarts {
        let mut rng = trial_rng(opts.seed, r);
        let y = random_self_adjoint(&mut rng, spec.group, support_radius);
        let up = spec.upper(&y);
        if up > 0.0 {
            pool.push(y.scale(Complex64::new(1.0 / up, 0.0)));
        }
    }
    let spreads = pool
        .iter()
        .map(|x| spread_on(x, &ball, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluated = pool.len();
    let (mut best_x, mut best) = pool
        .into_iter()
        .zip(spreads)
        .fold(None, |acc: Option<(GroupAlgebraElement, Spread)>, cur| match acc {
            Some(a) if a.1.value >= cur.1.value => Some(a),
            _ => Some(cur),
        })
        .expect("the punctured ball is nonempty");

    for _ in 0..opts.refinements {
        let pick = cands
            .iter()
            .map(|g| {
                let c = vector_moment(&ball, &best.upper_vector, g) - vector_moment(&ball, &best.lower_vector, g);
                (g, c, c.norm() / weight(g))
            })
            .fold(None, |acc: Option<(&GroupElement, Complex64, f64)>, cur| match acc {
                Some(a) if a.2 >= cur.2 => Some(a),
                _ => Some(cur),
            });
        let Some((g, c, _)) = pick else { break };
        let x = pair_element(g, c, weight(g))?;
        let s = spread_on(&x, &ball, opts)?;
        evaluated += 1;
        if s.value > best.value + 1e-12 {
            best_x = x;
            best = s;
        } else {
            break;
        }
    }
    Ok(DiameterSearch {
        value: best.value,
        converged: best.converged,
        witness: best_x,
        candidates: evaluated,
    })
}
