//! Seeded random inputs shared by tests, suites and the acceptance harness.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operators::GroupAlgebraElement;
use crate::words::{sphere, GroupElement, GroupSpec};

/// The RNG for trial `trial` under a root seed: one ChaCha stream per trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Keeps each candidate with probability one half (at least one survives)
/// and attaches complex Gaussian coefficients.
pub fn random_support<R: Rng>(rng: &mut R, candidates: &[GroupElement]) -> Vec<(GroupElement, Complex64)> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for g in candidates {
        if rng.gen_bool(0.5) {
            out.push((g.clone(), complex_gaussian(rng)));
        }
    }
    if out.is_empty() {
        let g = candidates[rng.gen_range(0..candidates.len())].clone();
        out.push((g, complex_gaussian(rng)));
    }
    out
}

/// A random element supported in the ball of the given radius, optionally
/// with zero coefficient at the identity.
pub fn random_element<R: Rng>(
    rng: &mut R,
    spec: GroupSpec,
    radius: u32,
    include_identity: bool,
) -> GroupAlgebraElement {
    let start = if include_identity { 0 } else { 1 };
    let candidates: Vec<GroupElement> = (start..=radius).flat_map(|m| sphere(spec, m)).collect();
    if candidates.is_empty() {
        return GroupAlgebraElement::zero(spec);
    }
    GroupAlgebraElement::from_terms(spec, random_support(rng, &candidates))
        .expect("terms share the group")
}

/// A random self-adjoint element: `(y + y*) / 2` for a random `y`.
pub fn random_self_adjoint<R: Rng>(rng: &mut R, spec: GroupSpec, radius: u32) -> GroupAlgebraElement {
    let y = random_element(rng, spec, radius, true);
    let mut terms: Vec<(GroupElement, Complex64)> = Vec::new();
    for (g, c) in y.terms().chain(y.adjoint().terms()) {
        terms.push((g.clone(), c * 0.5));
    }
    GroupAlgebraElement::from_terms(spec, terms).expect("terms share the group")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(42, 3).gen();
        let b: u64 = trial_rng(42, 3).gen();
        let c: u64 = trial_rng(42, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_elements_respect_radius() {
        let mut rng = trial_rng(1, 0);
        let spec = GroupSpec::Free(2);
        for _ in 0..20 {
            let x = random_element(&mut rng, spec, 3, false);
            assert!(!x.is_zero());
            assert!(x.support_radius() <= 3);
            assert_eq!(x.trace(), Complex64::new(0.0, 0.0));
            assert!(random_self_adjoint(&mut rng, spec, 2).is_self_adjoint(1e-15));
        }
    }
}
