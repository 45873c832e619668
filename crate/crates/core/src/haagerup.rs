//! Sphere convolutions on free groups, rapid-decay inequalities, and the
//! endpoint inequalities of the free-group diameter bound.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::constants::{kappa_upper, pi_over_two_sqrt6_upper};
use crate::error::{Error, Result};
use crate::operators::{
    centered_convolution_matrix, commutator_column_norm, commutator_upper_bound,
    convolution_matrix, GroupAlgebraElement,
};
use crate::report::{BoundReport, CheckContext};
use crate::sampling::random_support;
use crate::schur::rho_k;
use crate::words::{sphere, BallIndex, GroupElement, GroupSpec};

/// The bound `||lambda(x) - tau(x) I|| < 2.5` for `sum |x(g)| l(g) = 1`.
pub const FREE_CENTERED_BOUND: f64 = 2.5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn require_free(spec: GroupSpec) -> Result<()> {
    if spec.is_free() {
        Ok(())
    } else {
        Err(Error::usage(format!("{spec} is not a free group")))
    }
}

/// A function supported on the words of length exactly `degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereFunction {
    spec: GroupSpec,
    degree: u32,
    values: BTreeMap<GroupElement, Complex64>,
}

impl SphereFunction {
    pub fn new<I>(spec: GroupSpec, degree: u32, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (g, c) in values {
            if g.spec() != spec || g.length() != degree {
                return Err(Error::usage(format!(
                    "{g} is not a word of length {degree} in {spec}"
                )));
            }
            if c != ZERO {
                *map.entry(g).or_insert(ZERO) += c;
            }
        }
        map.retain(|_, c| *c != ZERO);
        Ok(SphereFunction {
            spec,
            degree,
            values: map,
        })
    }

    pub fn delta(g: GroupElement) -> Self {
        let (spec, degree) = (g.spec(), g.length());
        Self::new(spec, degree, [(g, Complex64::new(1.0, 0.0))]).expect("length matches")
    }

    /// The restriction `x chi_m`.
    pub fn restrict(x: &GroupAlgebraElement, degree: u32) -> Self {
        let values = x
            .terms()
            .filter(|(g, _)| g.length() == degree)
            .map(|(g, c)| (g.clone(), *c));
        Self::new(x.spec(), degree, values).expect("filtered by length")
    }

    /// Random coefficients on about half of the sphere.
    pub fn random<R: Rng>(rng: &mut R, spec: GroupSpec, degree: u32) -> Self {
        Self::new(spec, degree, random_support(rng, &sphere(spec, degree))).expect("sphere words")
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn get(&self, g: &GroupElement) -> Complex64 {
        self.values.get(g).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &Complex64)> {
        self.values.iter()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.spec, self.degree, self.values.iter().map(|(g, c)| (g.clone(), c * s)))
            .expect("same support")
    }

    pub fn to_element(&self) -> GroupAlgebraElement {
        GroupAlgebraElement::from_terms(self.spec, self.values.iter().map(|(g, c)| (g.clone(), *c)))
            .expect("same group")
    }
}

/// `(b * eta) chi_m` with `m = deg b + deg eta`.
pub fn sphere_convolution(b: &SphereFunction, eta: &SphereFunction) -> Result<SphereFunction> {
    if b.spec != eta.spec {
        return Err(Error::usage("sphere functions over different groups"));
    }
    require_free(b.spec)?;
    let m = b.degree + eta.degree;
    let full = b.to_element().convolve(&eta.to_element())?;
    Ok(SphereFunction::restrict(&full, m))
}

/// `||(b * eta) chi_m||_2 <= ||b||_2 ||eta||_2`.
pub fn sphere_convolution_check(b: &SphereFunction, eta: &SphereFunction, tol: f64) -> Result<BoundReport> {
    let lhs = sphere_convolution(b, eta)?.l2_norm();
    Ok(
        BoundReport::new("sphere-convolution", lhs, b.l2_norm() * eta.l2_norm(), tol)
            .param("k", b.degree)
            .param("m", b.degree + eta.degree),
    )
}

/// Constants in `||lambda(x)|| <= C (sum (1 + l(g))^{2s} |x(g)|^2)^(1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RDParams {
    pub c: f64,
    pub s: f64,
}

impl RDParams {
    pub fn new(c: f64, s: f64) -> Result<Self> {
        if !(c > 0.0 && s > 0.0 && c.is_finite() && s.is_finite()) {
            return Err(Error::usage(format!("rapid decay constants must be positive, got C={c}, s={s}")));
        }
        Ok(RDParams { c, s })
    }

    /// `(2, 2)` for free groups. For `Z^d`, `s = d` and `C` is an upper
    /// enclosure of `(sum_g (1 + l(g))^{-2s})^(1/2)`, which makes the
    /// inequality a consequence of Cauchy-Schwarz and `||lambda(x)|| <= ||x||_1`.
    pub fn default_for(spec: GroupSpec) -> Self {
        match spec {
            GroupSpec::Free(_) => RDParams { c: 2.0, s: 2.0 },
            GroupSpec::FreeAbelian(1) => RDParams {
                c: kappa_upper(),
                s: 1.0,
            },
            GroupSpec::FreeAbelian(d) => RDParams {
                c: abelian_rd_constant(d),
                s: d as f64,
            },
        }
    }

    /// `C (sum (1 + l(g))^{2s} |x(g)|^2)^(1/2)`.
    pub fn bound(&self, x: &GroupAlgebraElement) -> f64 {
        self.c * x.weighted_l2(|g| (1.0 + g.length() as f64).powf(self.s))
    }
}

fn abelian_rd_constant(d: u8) -> f64 {
    static CACHE: OnceLock<std::sync::Mutex<BTreeMap<u8, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("cache lock").get(&d) {
        return *c;
    }
    // exact sphere sizes up to M, then |S_m| <= 2^d (m+1)^{d-1} and an
    // integral bound for the remainder
    const M: u32 = 4000;
    let spec = GroupSpec::FreeAbelian(d);
    let two_s = 2 * d as i32;
    let head: f64 = (0..=M)
        .rev()
        .map(|m| spec.sphere_size(m) as f64 * (1.0 + m as f64).powi(-two_s))
        .sum();
    let tail = 2f64.powi(d as i32) * (1.0 + M as f64).powi(-(d as i32)) / d as f64;
    let c = ((head * (1.0 + 1e-12) + tail).sqrt()) * (1.0 + 1e-12);
    cache.lock().expect("cache lock").insert(d, c);
    c
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

/// Compressed `||lambda(x)||` against the rapid-decay bound.
pub fn rd_check(x: &GroupAlgebraElement, params: RDParams, radius: u32, ctx: &CheckContext) -> Result<BoundReport> {
    let ball = ball_for(x, radius, ctx)?;
    let est = ctx.norm(&convolution_matrix(x, &ball)?);
    Ok(BoundReport::new("rd", est.value, params.bound(x), ctx.tol)
        .param("C", params.c)
        .param("s", params.s)
        .param("L", radius)
        .param("converged", est.converged)
        .param("estimator", ctx.estimator.name()))
}

/// `||x||_1 <= kappa (sum (1 + |n|)^2 |x(n)|^2)^(1/2)` on `Z`.
pub fn z_l1_check(x: &GroupAlgebraElement, tol: f64) -> Result<BoundReport> {
    if x.spec() != GroupSpec::FreeAbelian(1) {
        return Err(Error::usage(format!("z-l1 needs an element of z1, got {}", x.spec())));
    }
    let weighted = x.weighted_l2(|g| 1.0 + g.length() as f64);
    Ok(BoundReport::new("z-l1", x.l1_norm(), kappa_upper() * weighted, tol)
        .param("kappa_upper", kappa_upper())
        .param("weighted_l2", weighted))
}

/// `b_k(u) = (sum |x(h)|^2)^(1/2)` over `h` of length `2k` with `k`-prefix `u`.
pub fn prefix_profile(x: &GroupAlgebraElement, k: u32) -> SphereFunction {
    let mut acc: BTreeMap<GroupElement, f64> = BTreeMap::new();
    for (h, c) in x.terms().filter(|(h, _)| h.length() == 2 * k) {
        *acc.entry(h.prefix(k as usize).expect("free word")).or_default() += c.norm_sqr();
    }
    SphereFunction::new(x.spec(), k, acc.into_iter().map(|(u, s)| (u, Complex64::new(s.sqrt(), 0.0))))
        .expect("prefixes have length k")
}

/// `eta_j(v) = (sum |xi(w)|^2)^(1/2)` over `w` with `j`-suffix `v`; in
/// particular `eta_0(e) = ||xi||_2`.
pub fn suffix_profile(xi: &SphereFunction, j: u32) -> SphereFunction {
    let mut acc: BTreeMap<GroupElement, f64> = BTreeMap::new();
    for (w, c) in xi.terms() {
        *acc.entry(w.suffix(j as usize).expect("free word")).or_default() += c.norm_sqr();
    }
    SphereFunction::new(xi.spec, j, acc.into_iter().map(|(v, s)| (v, Complex64::new(s.sqrt(), 0.0))))
        .expect("suffixes have length j")
}

/// Pointwise domination `|(x * xi)(g)| <= sum_k (b_k * eta_{m-k})(g)` on the
/// sphere of degree `m`, and `||p_m(x * xi)|| <= pi/(2 sqrt 6) sum |x(g)| l(g)`.
///
/// The report's sides are the projection inequality. The pointwise excess
/// and the sharper bound through `(sum l(g)^2 |x(g)|^2)^(1/2)` are recorded
/// as conditions.
pub fn domination_check(x: &GroupAlgebraElement, xi: &SphereFunction, tol: f64) -> Result<BoundReport> {
    require_free(x.spec())?;
    if x.spec() != xi.spec {
        return Err(Error::usage("element and vector over different groups"));
    }
    if x.trace() != ZERO {
        return Err(Error::usage("domination needs x(e) = 0"));
    }
    if (xi.l2_norm() - 1.0).abs() > 1e-8 {
        return Err(Error::usage(format!("xi must be a unit vector, has norm {}", xi.l2_norm())));
    }
    let m = xi.degree;
    let projected = SphereFunction::restrict(&x.convolve(&xi.to_element())?, m);

    let eta_full = suffix_profile(xi, m);
    let mut majorant: BTreeMap<GroupElement, f64> = BTreeMap::new();
    for k in 1..=m {
        let b = prefix_profile(x, k);
        let eta = if k == m { suffix_profile(xi, 0) } else { suffix_profile(&eta_full, m - k) };
        for (g, c) in sphere_convolution(&b, &eta)?.terms() {
            *majorant.entry(g.clone()).or_default() += c.re;
        }
    }
    let excess = projected
        .terms()
        .map(|(g, c)| c.norm() - majorant.get(g).copied().unwrap_or(0.0))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);

    let lhs = projected.l2_norm();
    let constant = pi_over_two_sqrt6_upper();
    let column = commutator_column_norm(x, 1);
    Ok(
        BoundReport::new("domination", lhs, constant * commutator_upper_bound(x, 1), tol)
            .param("m", m)
            .param("pointwise_excess", excess)
            .param("column_bound", constant * column)
            .require("pointwise", excess <= tol)
            .require("column", lhs <= constant * column + tol),
    )
}

/// Compressed `||rho_0(lambda(x) - tau(x) I)||` against
/// `pi/(2 sqrt 6) sum |x(g)| l(g)`.
pub fn rho0_check(x: &GroupAlgebraElement, radius: u32, ctx: &CheckContext) -> Result<BoundReport> {
    require_free(x.spec())?;
    let ball = ball_for(x, radius, ctx)?;
    let diag = rho_k(&centered_convolution_matrix(x, &ball)?, 0);
    let est = ctx.norm(&diag);
    Ok(BoundReport::new(
        "rho0",
        est.value,
        pi_over_two_sqrt6_upper() * commutator_upper_bound(x, 1),
        ctx.tol,
    )
    .param("L", radius)
    .param("converged", est.converged)
    .param("estimator", ctx.estimator.name()))
}

/// With `x` scaled to `sum |x(g)| l(g) = 1`, the compressed
/// `||lambda(x) - tau(x) I||` stays below 2.5; the diagonal part is also
/// checked against `pi/(2 sqrt 6)`.
pub fn free_diameter_check(x: &GroupAlgebraElement, radius: u32, ctx: &CheckContext) -> Result<BoundReport> {
    require_free(x.spec())?;
    let upper = commutator_upper_bound(x, 1);
    if upper == 0.0 {
        return Err(Error::usage("x is a scalar; its commutator with D vanishes"));
    }
    let x = x.scale(Complex64::new(1.0 / upper, 0.0));
    let ball = ball_for(&x, radius, ctx)?;
    let centered = centered_convolution_matrix(&x, &ball)?;
    let est = ctx.norm(&centered);
    let diag = ctx.norm(&rho_k(&centered, 0)).value;
    let diag_bound = pi_over_two_sqrt6_upper() * commutator_upper_bound(&x, 1);
    Ok(BoundReport::new("free-diameter", est.value, FREE_CENTERED_BOUND, ctx.tol)
        .param("L", radius)
        .param("scale", 1.0 / upper)
        .param("rho0_lhs", diag)
        .param("rho0_rhs", diag_bound)
        .param("converged", est.converged)
        .param("estimator", ctx.estimator.name())
        .require("rho0", diag <= diag_bound + ctx.tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::pi_over_two_sqrt6_upper;
    use crate::operators::{DenseSvd, Lanczos};
    use crate::sampling::{random_element, trial_rng};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn f2() -> GroupSpec {
        GroupSpec::Free(2)
    }

    fn w(s: &str) -> GroupElement {
        GroupElement::parse(f2(), s).unwrap()
    }

    fn x(terms: &[(&str, f64)]) -> GroupAlgebraElement {
        GroupAlgebraElement::from_words(f2(), terms).unwrap()
    }

    fn dense() -> CheckContext {
        CheckContext::with_estimator(Arc::new(DenseSvd))
    }

    #[test]
    fn sphere_convolution_examples() {
        let r = sphere_convolution_check(&SphereFunction::delta(w("a")), &SphereFunction::delta(w("b")), 1e-12)
            .unwrap();
        assert_eq!((r.lhs, r.rhs), (1.0, 1.0));
        assert!(r.pass);
        let r = sphere_convolution_check(&SphereFunction::delta(w("a")), &SphereFunction::delta(w("Ab")), 1e-12)
            .unwrap();
        assert_eq!(r.lhs, 0.0);
        let mut rng = trial_rng(9, 0);
        for _ in 0..20 {
            let b = SphereFunction::random(&mut rng, f2(), 2);
            let eta = SphereFunction::random(&mut rng, f2(), 3);
            assert!(sphere_convolution_check(&b, &eta, 1e-10).unwrap().pass);
        }
        let z = GroupElement::parse(GroupSpec::FreeAbelian(1), "[1]").unwrap();
        assert!(sphere_convolution_check(&SphereFunction::delta(z.clone()), &SphereFunction::delta(z), 0.0).is_err());
    }

    #[test]
    fn sphere_function_rejects_wrong_lengths() {
        assert!(SphereFunction::new(f2(), 2, [(w("a"), Complex64::new(1.0, 0.0))]).is_err());
    }

    #[test]
    fn rd_examples() {
        let ctx = dense();
        let r = rd_check(&x(&[("a", 1.0)]), RDParams::default_for(f2()), 1, &ctx).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12 && r.rhs == 8.0 && r.pass);

        let z1 = GroupSpec::FreeAbelian(1);
        let cos = GroupAlgebraElement::from_words(z1, &[("[1]", 1.0), ("[-1]", 1.0)]).unwrap();
        let r = rd_check(&cos, RDParams::new(1.0, 1.0).unwrap(), 64, &ctx).unwrap();
        assert!(r.lhs <= 2.0 && (r.rhs - 8f64.sqrt()).abs() < 1e-12 && r.pass);
        assert!(rd_check(&cos, RDParams::new(1.0, 1.0).unwrap(), 0, &ctx).is_err());
        assert!(RDParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn kesten_element_plateau() {
        let kesten = x(&[("a", 1.0), ("A", 1.0), ("b", 1.0), ("B", 1.0)]);
        let ctx = CheckContext::with_estimator(Arc::new(Lanczos::new(1e-10, 20_000)));
        let mut last = 0.0;
        for l in [2, 4, 6, 8] {
            let r = rd_check(&kesten, RDParams::default_for(f2()), l, &ctx).unwrap();
            assert!(r.lhs >= last - 1e-9 && r.lhs <= 2.0 * 3f64.sqrt() + 1e-6, "L={l}: {}", r.lhs);
            assert_eq!(r.rhs, 16.0);
            last = r.lhs;
        }
        assert!(last > 3.3, "{last}");
    }

    #[test]
    fn abelian_rd_constants() {
        let c1 = RDParams::default_for(GroupSpec::FreeAbelian(1)).c;
        assert!((c1 - 1.5132310245618323).abs() < 1e-12);
        // d = 2: sum_m 4m (1+m)^-4 + 1 with an oracle tail
        let c2 = RDParams::default_for(GroupSpec::FreeAbelian(2));
        let oracle: f64 = 1.0 + (1..200_000u64).map(|m| 4.0 * m as f64 / (1.0 + m as f64).powi(4)).sum::<f64>();
        assert!(c2.c * c2.c >= oracle && c2.c * c2.c - oracle < 1e-6, "{} {oracle}", c2.c * c2.c);
        assert_eq!(c2.s, 2.0);
    }

    #[test]
    fn z_l1_examples() {
        let z1 = GroupSpec::FreeAbelian(1);
        let r = z_l1_check(&GroupAlgebraElement::from_words(z1, &[("[0]", 1.0)]).unwrap(), 1e-12).unwrap();
        assert!((r.rhs - 1.513231).abs() < 1e-6 && r.pass);
        let r = z_l1_check(&GroupAlgebraElement::from_words(z1, &[("[1]", 1.0)]).unwrap(), 1e-12).unwrap();
        assert!((r.rhs - 2.0 * kappa_upper()).abs() < 1e-15);
        assert!(z_l1_check(&x(&[("a", 1.0)]), 1e-12).is_err());
    }

    #[test]
    fn profiles() {
        let a = x(&[("ab", 3.0), ("aB", 4.0), ("ba", 1.0), ("a", 7.0)]);
        let b1 = prefix_profile(&a, 1);
        assert_eq!(b1.get(&w("a")).re, 5.0);
        assert_eq!(b1.get(&w("b")).re, 1.0);
        let xi = SphereFunction::new(f2(), 2, [(w("ab"), Complex64::new(0.6, 0.0)), (w("Bb"), Complex64::new(0.0, 0.0))]);
        assert!(xi.is_err());
        let xi = SphereFunction::new(f2(), 2, [(w("ab"), Complex64::new(0.6, 0.0)), (w("bb"), Complex64::new(0.0, 0.8))])
            .unwrap();
        assert!((suffix_profile(&xi, 1).get(&w("b")).re - 1.0).abs() < 1e-15);
        assert_eq!(suffix_profile(&xi, 0).get(&f2().identity()).re, 1.0);
    }

    #[test]
    fn domination_examples() {
        let r = domination_check(&x(&[("a", 1.0)]), &SphereFunction::delta(w("b")), 1e-10).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
        let half_ab = x(&[("ab", 0.5)]);
        let mut rng = trial_rng(2, 0);
        for m in 1..=4 {
            let xi = SphereFunction::random(&mut rng, f2(), m);
            let xi = xi.scale(1.0 / xi.l2_norm());
            let r = domination_check(&half_ab, &xi, 1e-10).unwrap();
            assert!(r.lhs <= 0.5 + 1e-12 && 0.5 <= pi_over_two_sqrt6_upper() && r.pass, "{r:?}");
        }
        assert!(domination_check(&x(&[("", 1.0)]), &SphereFunction::delta(w("a")), 1e-10).is_err());
        let two = SphereFunction::delta(w("a")).scale(2.0);
        assert!(domination_check(&x(&[("b", 1.0)]), &two, 1e-10).is_err());
    }

    #[test]
    fn literal_top_profile_fails_domination() {
        // with b_m(g) = |x(g)| the bound misses x = delta_{bA}, xi = delta_a
        let a = x(&[("bA", 1.0)]);
        let xi = SphereFunction::delta(w("a"));
        let lhs = SphereFunction::restrict(&a.convolve(&xi.to_element()).unwrap(), 1);
        assert_eq!(lhs.get(&w("b")).norm(), 1.0);
        let literal = SphereFunction::restrict(&a, 1);
        assert_eq!(literal.get(&w("b")).norm(), 0.0);
        assert!(domination_check(&a, &xi, 1e-12).unwrap().pass);
    }

    #[test]
    fn diameter_examples() {
        let ctx = CheckContext::with_estimator(Arc::new(Lanczos::new(1e-10, 20_000)));
        assert!(free_diameter_check(&x(&[("", 1.0)]), 2, &ctx).is_err());
        let r = free_diameter_check(&x(&[("a", 0.5), ("A", 0.5)]), 8, &ctx).unwrap();
        assert!(r.pass && r.lhs > 0.95 && r.lhs <= 1.0 + 1e-9, "{r:?}");
        let mut rng = trial_rng(4, 0);
        for _ in 0..3 {
            let y = random_element(&mut rng, f2(), 3, true);
            assert!(free_diameter_check(&y, 5, &ctx).unwrap().pass);
            let y0 = random_element(&mut rng, f2(), 2, false);
            let y0 = y0.scale(Complex64::new(1.0 / commutator_upper_bound(&y0, 1), 0.0));
            assert!(rho0_check(&y0, 4, &ctx).unwrap().pass);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn domination_holds(seed in any::<u64>(), m in 1u32..=4) {
            let mut rng = trial_rng(seed, 0);
            let a = random_element(&mut rng, f2(), 4, false);
            let xi = SphereFunction::random(&mut rng, f2(), m);
            let xi = xi.scale(1.0 / xi.l2_norm());
            let r = domination_check(&a, &xi, 1e-10).unwrap();
            prop_assert!(r.pass, "{:?}", r);
        }

        #[test]
        fn haagerup_lemma(seed in any::<u64>(), k in 0u32..=3, j in 0u32..=3) {
            let mut rng = trial_rng(seed, 1);
            let b = SphereFunction::random(&mut rng, f2(), k);
            let eta = SphereFunction::random(&mut rng, f2(), j);
            prop_assert!(sphere_convolution_check(&b, &eta, 1e-10).unwrap().slack >= -1e-10);
        }
    }
}
