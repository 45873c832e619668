//! Truncated convolution operators `P_L lambda(x) P_L`, iterated Dirac
//! commutators, and operator-norm estimation.

mod element;
mod matrix;
mod norm;
mod symbol;

pub use element::GroupAlgebraElement;
pub use matrix::{GradedMatrix, DENSE_LIMIT};
pub use norm::{
    default_estimator, estimator_by_name, estimator_names, estimator_summaries,
    hermitian_extremes, lanczos_extreme, largest_singular_value, norm_upper_bound, operator_norm,
    DenseSvd, Extreme, Lanczos, NormEstimate, NormEstimator, PowerIteration, RayleighPair,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use symbol::{z_symbol_norm, z_symbol_norm_with_tol, SymbolBracket, DEFAULT_SYMBOL_TOL};

use crate::error::{Error, Result};
use crate::words::BallIndex;

fn check_spec(x: &GroupAlgebraElement, ball: &BallIndex) -> Result<()> {
    if x.spec() != ball.spec() {
        return Err(Error::usage(format!(
            "element of {} truncated to a ball of {}",
            x.spec(),
            ball.spec()
        )));
    }
    Ok(())
}

/// Compression of `lambda(x)` to the ball: entry `(s, t)` is `x(s t^-1)`,
/// levels are word lengths.
pub fn convolution_matrix(x: &GroupAlgebraElement, ball: &BallIndex) -> Result<GradedMatrix> {
    weighted_convolution(x, ball, |_, _| 1.0)
}

/// Compression of `delta^k(lambda(x))`: entry `(s, t)` is
/// `(l(s) - l(t))^k x(s t^-1)`.
pub fn commutator_matrix(
    x: &GroupAlgebraElement,
    ball: &BallIndex,
    k: u32,
) -> Result<GradedMatrix> {
    if k == 0 {
        return Err(Error::usage("commutator order must be positive"));
    }
    weighted_convolution(x, ball, |ls, lt| (ls as f64 - lt as f64).powi(k as i32))
}

fn weighted_convolution<W>(x: &GroupAlgebraElement, ball: &BallIndex, weight: W) -> Result<GradedMatrix>
where
    W: Fn(u32, u32) -> f64,
{
    check_spec(x, ball)?;
    let levels = ball.levels();
    let mut triplets = Vec::with_capacity(ball.len() * x.support_len());
    for (t, elem) in ball.elements().iter().enumerate() {
        for (g, c) in x.terms() {
            // lambda_g delta_t = delta_{g t}
            if let Some(s) = ball.position(&(g * elem)) {
                let w = weight(levels[s], levels[t]);
                if w != 0.0 {
                    triplets.push((s, t, c * w));
                }
            }
        }
    }
    Ok(GradedMatrix::from_triplets(levels.to_vec(), triplets))
}

/// `sum_g |x(g)| l(g)^k`, an upper bound for `||delta^k(lambda(x))||` on the
/// whole of `l^2(G)`.
pub fn commutator_upper_bound(x: &GroupAlgebraElement, k: u32) -> f64 {
    x.terms()
        .map(|(g, c)| c.norm() * (g.length() as f64).powi(k as i32))
        .sum()
}

/// `(sum_g l(g)^{2k} |x(g)|^2)^(1/2)`: the norm of the `delta_e` column of
/// `delta^k(lambda(x))`.
pub fn commutator_column_norm(x: &GroupAlgebraElement, k: u32) -> f64 {
    x.weighted_l2(|g| (g.length() as f64).powi(k as i32))
}

/// `lambda(x) - tau(x) I` compressed to the ball.
pub fn centered_convolution_matrix(
    x: &GroupAlgebraElement,
    ball: &BallIndex,
) -> Result<GradedMatrix> {
    Ok(convolution_matrix(x, ball)?.shift_diagonal(x.trace()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{GroupElement, GroupSpec};
    use num_complex::Complex64;

    fn unit() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn f2() -> GroupSpec {
        GroupSpec::Free(2)
    }

    fn z1() -> GroupSpec {
        GroupSpec::FreeAbelian(1)
    }

    #[test]
    fn delta_e_is_identity() {
        for spec in [f2(), z1()] {
            let ball = BallIndex::new(spec, 2).unwrap();
            let m = convolution_matrix(&GroupAlgebraElement::delta(spec.identity()), &ball).unwrap();
            assert_eq!(m.max_abs_diff(&GradedMatrix::identity(ball.levels().to_vec())), 0.0);
        }
    }

    #[test]
    fn shift_on_z() {
        let ball = BallIndex::new(z1(), 1).unwrap();
        let x = GroupAlgebraElement::from_words(z1(), &[("[1]", 1.0)]).unwrap();
        let m = convolution_matrix(&x, &ball).unwrap();
        // basis (0, -1, 1): ones exactly where s - t = 1
        let mut ones = Vec::new();
        for (i, j, v) in m.entries() {
            assert_eq!(v, unit());
            ones.push((i, j));
        }
        assert_eq!(ones, vec![(0, 1), (2, 0)]);
    }

    #[test]
    fn generator_on_f2_ball() {
        let ball = BallIndex::new(f2(), 1).unwrap();
        let a = GroupElement::parse(f2(), "a").unwrap();
        let m = convolution_matrix(&GroupAlgebraElement::delta(a.clone()), &ball).unwrap();
        assert_eq!(m.dim(), 5);
        // partial permutation: e -> a, A -> e; a, b, B leave the ball
        let pos = |s: &str| ball.position(&GroupElement::parse(f2(), s).unwrap()).unwrap();
        assert_eq!(m.get(pos("a"), pos("")), unit());
        assert_eq!(m.get(pos(""), pos("A")), unit());
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn commutator_entries() {
        let ball = BallIndex::new(z1(), 2).unwrap();
        let x = GroupAlgebraElement::from_words(z1(), &[("[1]", 1.0)]).unwrap();
        let c = commutator_matrix(&x, &ball, 1).unwrap();
        for (i, j, v) in c.entries() {
            let s = ball.element(i).vector().unwrap()[0];
            let t = ball.element(j).vector().unwrap()[0];
            assert_eq!(s, t + 1);
            assert_eq!(v.re, (s.abs() - t.abs()) as f64);
        }
        assert!((DenseSvd.estimate(&c).value - 1.0).abs() < 1e-12);

        let fball = BallIndex::new(f2(), 2).unwrap();
        let ab = GroupElement::parse(f2(), "ab").unwrap();
        let c2 = commutator_matrix(&GroupAlgebraElement::delta(ab.clone()), &fball, 2).unwrap();
        assert_eq!(c2.get(fball.position(&ab).unwrap(), 0), Complex64::new(4.0, 0.0));
    }

    #[test]
    fn scalars_commute_with_d() {
        let ball = BallIndex::new(f2(), 3).unwrap();
        let x = GroupAlgebraElement::delta(f2().identity()).scale(Complex64::new(2.0, 1.0));
        assert_eq!(commutator_matrix(&x, &ball, 1).unwrap().nnz(), 0);
        assert!(commutator_matrix(&x, &ball, 0).is_err());
    }

    #[test]
    fn upper_bounds() {
        let a = GroupElement::parse(f2(), "a").unwrap();
        assert_eq!(commutator_upper_bound(&GroupAlgebraElement::delta(a), 1), 1.0);
        assert_eq!(commutator_upper_bound(&GroupAlgebraElement::delta(f2().identity()), 3), 0.0);
        let half_ab = GroupAlgebraElement::from_words(f2(), &[("ab", 0.5)]).unwrap();
        assert_eq!(commutator_upper_bound(&half_ab, 1), 1.0);
    }

    #[test]
    fn mismatched_spec_is_usage_error() {
        let ball = BallIndex::new(z1(), 1).unwrap();
        let x = GroupAlgebraElement::delta(f2().identity());
        assert!(matches!(convolution_matrix(&x, &ball), Err(Error::Usage(_))));
    }
}
