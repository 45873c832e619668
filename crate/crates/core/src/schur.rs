//! Diagonal calculus on graded matrices: the projections `rho_k`, Schur
//! multipliers with symbols on `Z`, and the partial inverse of `a -> [D, a]`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constants::{
    inverse_square_tail_upper, pi_over_sqrt3_upper, sqrt_two_over_k_upper, tail_factor_upper,
};
use crate::error::{Error, Result};
use crate::operators::{norm_upper_bound, GradedMatrix};
use crate::report::{BoundReport, CheckContext};

/// Default largest level of random graded matrices.
pub const DEFAULT_MAX_LEVEL: u32 = 12;

/// A finitely supported function `phi : Z -> C`, acting on graded matrices by
/// `(i, j) -> phi(level(i) - level(j)) a_ij`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Symbol {
    values: BTreeMap<i64, Complex64>,
}

impl Symbol {
    pub fn new<I: IntoIterator<Item = (i64, Complex64)>>(values: I) -> Self {
        Symbol {
            values: values
                .into_iter()
                .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
                .collect(),
        }
    }

    /// The indicator of a set of differences.
    pub fn indicator<I: IntoIterator<Item = i64>>(set: I) -> Self {
        Self::new(set.into_iter().map(|m| (m, Complex64::new(1.0, 0.0))))
    }

    /// `phi_k(m) = 1/m` for `k < |m| <= max`, zero otherwise.
    pub fn inverse_tail(k: u64, max: i64) -> Self {
        Self::new(
            (-max..=max)
                .filter(|m| m.unsigned_abs() > k)
                .map(|m| (m, Complex64::new(1.0 / m as f64, 0.0))),
        )
    }

    /// Complex Gaussian values on `-radius..=radius`.
    pub fn random<R: Rng>(rng: &mut R, radius: i64) -> Self {
        Self::new((-radius..=radius).map(|m| (m, gaussian(rng))))
    }

    pub fn get(&self, m: i64) -> Complex64 {
        self.values.get(&m).copied().unwrap_or_default()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.keys().copied()
    }

    /// Reads `{"m": [re, im], ...}` with integer keys.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, [f64; 2]> =
            serde_json::from_str(text).map_err(|source| Error::Json {
                context: "symbol".into(),
                source,
            })?;
        let mut values = BTreeMap::new();
        for (key, [re, im]) in raw {
            let m: i64 = key.trim().parse().map_err(|e| Error::Parse {
                what: "symbol index",
                input: key.clone(),
                reason: format!("{e}"),
            })?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::usage(format!("non-finite symbol value at {m}")));
            }
            if values.insert(m, Complex64::new(re, im)).is_some() {
                return Err(Error::usage(format!("symbol index {m} repeated")));
            }
        }
        Ok(Self::new(values))
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, [f64; 2]> = self
            .values
            .iter()
            .map(|(m, v)| (m.to_string(), [v.re, v.im]))
            .collect();
        serde_json::to_string(&map).expect("string keys serialize")
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Keeps the entries on the `k`-th diagonal, `level(i) - level(j) = k`.
pub fn rho_k(a: &GradedMatrix, k: i64) -> GradedMatrix {
    a.map_entries(|i, j, v| if a.level_difference(i, j) == k { v } else { Complex64::default() })
}

/// Keeps the entries with `|level(i) - level(j)| > k`.
pub fn outside_band(a: &GradedMatrix, k: u64) -> GradedMatrix {
    a.map_entries(|i, j, v| {
        if a.level_difference(i, j).unsigned_abs() > k {
            v
        } else {
            Complex64::default()
        }
    })
}

pub fn schur_apply(phi: &Symbol, a: &GradedMatrix) -> GradedMatrix {
    a.map_entries(|i, j, v| phi.get(a.level_difference(i, j)) * v)
}

/// `sum_{k != 0} (1/k) rho_k([D, A])`, which recovers `A - rho_0(A)`.
pub fn reconstruct_offdiagonal(a: &GradedMatrix) -> GradedMatrix {
    let c = a.dirac_commutator();
    c.map_entries(|i, j, v| match c.level_difference(i, j) {
        0 => Complex64::default(),
        k => v / k as f64,
    })
}

/// `||A - sum_{|i| <= k} rho_i(A)|| <= ||[D, A]|| (2 sum_{j > k} j^-2)^(1/2)`.
///
/// The left side is an attained estimate and the right side uses upper
/// enclosures of both the commutator norm and the tail sum.
pub fn diagonal_bound_check(a: &GradedMatrix, k: u64, ctx: &CheckContext) -> BoundReport {
    let lhs = ctx.norm(&outside_band(a, k)).value;
    let commutator = norm_upper_bound(&a.dirac_commutator());
    let factor = tail_factor_upper(k);
    let mut report = BoundReport::new("diagonal-bound", lhs, commutator * factor, ctx.tol)
        .param("k", k)
        .param("dim", a.dim())
        .param("commutator_upper", commutator)
        .param("tail_sum_upper", inverse_square_tail_upper(k))
        .param("estimator", ctx.estimator.name());
    report = if k == 0 {
        report.param("paper_constant", pi_over_sqrt3_upper())
    } else {
        report.param("paper_constant", sqrt_two_over_k_upper(k))
    };
    report
}

/// `||Lambda_phi(A)|| <= ||phi||_2 ||A||` with an upper enclosure of `||A||`.
pub fn schur_norm_check(phi: &Symbol, a: &GradedMatrix, ctx: &CheckContext) -> BoundReport {
    let lhs = ctx.norm(&schur_apply(phi, a)).value;
    let a_upper = norm_upper_bound(a);
    BoundReport::new("schur-bound", lhs, phi.l2_norm() * a_upper, ctx.tol)
        .param("dim", a.dim())
        .param("symbol_l2", phi.l2_norm())
        .param("matrix_upper", a_upper)
        .param("estimator", ctx.estimator.name())
}

/// Levels uniform in `0..=max_level`, complex Gaussian entries scaled by
/// `1/sqrt(dim)`.
pub fn random_graded_matrix<R: Rng>(rng: &mut R, dim: usize, max_level: u32) -> GradedMatrix {
    let levels: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=max_level)).collect();
    let scale = 1.0 / (dim.max(1) as f64).sqrt();
    let mut triplets = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            triplets.push((i, j, gaussian(rng) * scale));
        }
    }
    GradedMatrix::from_triplets(levels, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{DenseSvd, NormEstimator};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ones(levels: Vec<u32>) -> GradedMatrix {
        let n = levels.len();
        GradedMatrix::from_triplets(
            levels,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j, c(1.0 + (i * n + j) as f64)))),
        )
    }

    fn kept(a: &GradedMatrix) -> Vec<(usize, usize)> {
        a.entries().map(|(i, j, _)| (i + 1, j + 1)).collect()
    }

    fn dense_ctx() -> CheckContext {
        CheckContext::with_estimator(Arc::new(DenseSvd))
    }

    #[test]
    fn diagonal_projection_examples() {
        let a = ones(vec![0, 1, 1]);
        let mut d0 = kept(&rho_k(&a, 0));
        d0.sort();
        assert_eq!(d0, vec![(1, 1), (2, 2), (2, 3), (3, 2), (3, 3)]);
        assert_eq!(kept(&rho_k(&a, 1)), vec![(2, 1), (3, 1)]);
        let total = a
            .occurring_differences()
            .into_iter()
            .fold(GradedMatrix::zeros(a.levels().to_vec()), |acc, k| {
                acc.add_scaled(c(1.0), &rho_k(&a, k))
            });
        assert_eq!(total.max_abs_diff(&a), 0.0);
    }

    #[test]
    fn schur_examples() {
        let a = ones(vec![0, 1, 2, 1]);
        assert_eq!(schur_apply(&Symbol::indicator([0]), &a).max_abs_diff(&rho_k(&a, 0)), 0.0);
        let all = Symbol::indicator(a.occurring_differences());
        assert_eq!(schur_apply(&all, &a).max_abs_diff(&a), 0.0);

        let z = c(0.5) + Complex64::i();
        let single = GradedMatrix::from_triplets(vec![2, 0], [(0, 1, z)]);
        let d = Symbol::new((-5..=5).map(|m| (m, c(m as f64))));
        assert_eq!(schur_apply(&d, &single).get(0, 1), z * 2.0);
        assert_eq!(reconstruct_offdiagonal(&single).get(0, 1), z);
    }

    #[test]
    fn reconstruction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_graded_matrix(&mut rng, 8, DEFAULT_MAX_LEVEL);
            let expected = a.sub(&rho_k(&a, 0));
            assert!(reconstruct_offdiagonal(&a).max_abs_diff(&expected) <= 1e-12);
        }
        let diag = GradedMatrix::from_triplets(vec![1, 1, 3], [(0, 1, c(2.0)), (2, 2, c(1.0))]);
        assert_eq!(reconstruct_offdiagonal(&diag).nnz(), 0);
    }

    #[test]
    fn diagonal_bound_cases() {
        let ctx = dense_ctx();
        let commuting = GradedMatrix::from_triplets(vec![0, 2, 2], [(1, 2, c(1.0))]);
        let r = diagonal_bound_check(&commuting, 0, &ctx);
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..4 {
            let a = random_graded_matrix(&mut rng, 32, DEFAULT_MAX_LEVEL);
            let r = diagonal_bound_check(&a, k, &ctx);
            assert!(r.pass, "{r:?}");
        }
        assert!(tail_factor_upper(2) <= 1.0);
    }

    #[test]
    fn schur_bound_cases() {
        let ctx = dense_ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_graded_matrix(&mut rng, 24, DEFAULT_MAX_LEVEL);
        let a = a.scale(1.0 / DenseSvd.estimate(&a).value);
        let r = schur_norm_check(&Symbol::indicator([0]), &a, &ctx);
        assert!(r.pass && r.lhs <= 1.0 + 1e-12);
        let r = schur_norm_check(&Symbol::default(), &a, &ctx);
        assert_eq!(r.lhs, 0.0);
        for _ in 0..5 {
            let phi = Symbol::random(&mut rng, 5);
            assert!(schur_norm_check(&phi, &a, &ctx).pass);
        }
    }

    #[test]
    fn symbol_json() {
        let phi = Symbol::new([(-2, c(0.5)), (3, Complex64::new(0.0, -1.0))]);
        assert_eq!(Symbol::from_json(&phi.to_json()).unwrap(), phi);
        assert!(Symbol::from_json(r#"{"x": [1, 0]}"#).is_err());
        assert_eq!(Symbol::inverse_tail(1, 3).get(-2), c(-0.5));
        assert_eq!(Symbol::inverse_tail(1, 3).get(1), c(0.0));
    }

    fn graded() -> impl Strategy<Value = GradedMatrix> {
        (1usize..10).prop_flat_map(|n| {
            (
                proptest::collection::vec(0u32..6, n),
                proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n * n),
            )
                .prop_map(move |(levels, vals)| {
                    GradedMatrix::from_triplets(
                        levels,
                        vals.into_iter()
                            .enumerate()
                            .map(|(k, (re, im))| (k / n, k % n, Complex64::new(re, im))),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn projection_laws(a in graded(), j in -6i64..6, k in -6i64..6) {
            let rk = rho_k(&a, k);
            prop_assert_eq!(rho_k(&rk, k).max_abs_diff(&rk), 0.0);
            if j != k {
                prop_assert_eq!(rho_k(&rk, j).nnz(), 0);
            }
            prop_assert!(DenseSvd.estimate(&rk).value <= norm_upper_bound(&a));
        }

        #[test]
        fn partial_inverse_identity(a in graded()) {
            let expected = a.sub(&rho_k(&a, 0));
            prop_assert!(reconstruct_offdiagonal(&a).max_abs_diff(&expected) <= 1e-12);
        }
    }
}
