//! Seminorms `L^k_D(a) = ||delta^k(a)||`, certified lower bounds for the
//! metrics they induce on states, and finite-dimensional state geometry.

mod finite;
mod search;
mod state;

pub use finite::{
    jordan_check, jordan_decompose, metric_set_distance, random_density, random_traceless_hermitian,
    MetricSet,
};
pub use search::{
    diameter_lower_bound, distance_lower_bound, spectral_spread, DiameterSearch, DistanceSearch,
    SearchOptions, Spread,
};
pub use state::{evaluate_state, DensityState, StateFunctional, VectorState};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::haagerup::RDParams;
use crate::operators::{
    commutator_column_norm, commutator_matrix, commutator_upper_bound, convolution_matrix,
    GroupAlgebraElement,
};
use crate::report::{BoundReport, CheckContext};
use crate::words::{BallIndex, GroupSpec};

/// The seminorm `L^k_D` for the word length of a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeminormSpec {
    pub group: GroupSpec,
    pub k: u32,
}

impl SeminormSpec {
    pub fn new(group: GroupSpec, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::usage("seminorm order must be at least 1"));
        }
        Ok(SeminormSpec { group, k })
    }

    /// `floor(s) + 1`, the least order for which `L^k_D` controls a group
    /// with rapid-decay exponent `s`.
    pub fn minimal_order(s: f64) -> u32 {
        s.floor() as u32 + 1
    }

    /// `sum_g |x(g)| l(g)^k`, which dominates `L^k_D(lambda(x))`.
    pub fn upper(&self, x: &GroupAlgebraElement) -> f64 {
        commutator_upper_bound(x, self.k)
    }
}

fn ball_for(x: &GroupAlgebraElement, radius: u32, ctx: &CheckContext) -> Result<BallIndex> {
    if radius < x.support_radius() {
        return Err(Error::usage(format!(
            "ball radius {radius} is smaller than the support radius {}",
            x.support_radius()
        )));
    }
    BallIndex::with_cap(x.spec(), radius, ctx.ball_cap)
}

/// An attained lower bound for `||delta^k(lambda(x))||` at truncation `radius`:
/// the larger of the estimator value and the `delta_e` column norm.
fn commutator_lower(x: &GroupAlgebraElement, k: u32, radius: u32, ctx: &CheckContext) -> Result<f64> {
    let ball = ball_for(x, radius, ctx)?;
    let c = commutator_matrix(x, &ball, k)?;
    let mut e = vec![Complex64::new(0.0, 0.0); c.dim()];
    e[0] = Complex64::new(1.0, 0.0);
    let mut col = vec![Complex64::new(0.0, 0.0); c.dim()];
    c.apply(&e, &mut col);
    let column = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    Ok(ctx.norm(&c).value.max(column))
}

/// `(lower, upper)` enclosing `L^k_D(lambda(x))`: the compressed commutator
/// norm and `sum |x(g)| l(g)^k`.
pub fn seminorm_bounds(x: &GroupAlgebraElement, k: u32, radius: u32, ctx: &CheckContext) -> Result<(f64, f64)> {
    let spec = SeminormSpec::new(x.spec(), k)?;
    Ok((commutator_lower(x, k, radius, ctx)?, spec.upper(x)))
}

/// `(sum l(g)^{2k} |x(g)|^2)^(1/2) <= ||delta^k(lambda(x))||`, from the
/// `delta_e` column of the commutator.
pub fn coefficient_check(x: &GroupAlgebraElement, k: u32, radius: u32, ctx: &CheckContext) -> Result<BoundReport> {
    let (lower, upper) = seminorm_bounds(x, k, radius, ctx)?;
    Ok(BoundReport::new("coefficient", commutator_column_norm(x, k), lower, ctx.tol)
        .param("k", k)
        .param("L", radius)
        .param("seminorm_upper", upper))
}

/// `||sum_{l(g) >= n} x(g) lambda_g|| <= C 2^s n^{s-k} L^k_D(x)` for `k > s`,
/// with the seminorm replaced by its upper bound.
pub fn tail_check(
    x: &GroupAlgebraElement,
    n: u32,
    k: u32,
    params: RDParams,
    radius: u32,
    ctx: &CheckContext,
) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::usage("tail start n must be at least 1"));
    }
    if k as f64 <= params.s {
        return Err(Error::usage(format!(
            "tail bound needs k > s, got k={k}, s={}",
            params.s
        )));
    }
    let tail = x.restrict(|g| g.length() >= n);
    let lhs = if tail.is_zero() {
        0.0
    } else {
        let ball = ball_for(&tail, radius.max(tail.support_radius()), ctx)?;
        ctx.norm(&convolution_matrix(&tail, &ball)?).value
    };
    let upper = commutator_upper_bound(x, k);
    let factor = params.c * 2f64.powf(params.s) * (n as f64).powf(params.s - k as f64);
    Ok(BoundReport::new("tail", lhs, factor * upper, ctx.tol)
        .param("n", n)
        .param("k", k)
        .param("C", params.c)
        .param("s", params.s)
        .param("L", radius)
        .param("seminorm_upper", upper))
}
