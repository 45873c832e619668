//! The twelve acceptance criteria, one status line each. Exits nonzero if
//! any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use rdcheck::constants::{pi_over_sqrt3_upper, pi_over_two_sqrt6_upper, sqrt_two_over_k_upper};
use rdcheck::haagerup::{free_diameter_check, rd_check, rho0_check, sphere_convolution_check, RDParams, SphereFunction};
use rdcheck::metrics::{
    coefficient_check, diameter_lower_bound, jordan_decompose, metric_set_distance, random_traceless_hermitian,
    spectral_spread, tail_check, MetricSet, SearchOptions, SeminormSpec, StateFunctional, VectorState,
};
use rdcheck::operators::{
    convolution_matrix, largest_singular_value, norm_upper_bound, z_symbol_norm, DenseSvd, GroupAlgebraElement,
    Lanczos, NormEstimator,
};
use rdcheck::sampling::{random_element, trial_rng};
use rdcheck::schur::{
    diagonal_bound_check, random_graded_matrix, reconstruct_offdiagonal, rho_k, schur_norm_check, Symbol,
    DEFAULT_MAX_LEVEL,
};
use rdcheck::suite::{execute, SuiteConfig};
use rdcheck::words::{sphere, BallIndex, GroupElement, GroupSpec};
use rdcheck::CheckContext;

const SEED: u64 = 2024;
const TOL: f64 = 1e-9;
const F2: GroupSpec = GroupSpec::Free(2);

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ctx(estimator: Arc<dyn NormEstimator>) -> CheckContext {
    CheckContext {
        estimator,
        tol: TOL,
        ..Default::default()
    }
}

fn dense() -> CheckContext {
    ctx(Arc::new(DenseSvd))
}

fn lanczos() -> CheckContext {
    ctx(Arc::new(Lanczos::new(1e-12, 20_000)))
}

fn max(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(f64::NEG_INFINITY, f64::max)
}

fn min(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(f64::INFINITY, f64::min)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Off-diagonal graded matrices with commutator enclosure 1, dim <= 128.
fn normalized_population(trials: usize) -> Vec<rdcheck::operators::GradedMatrix> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(SEED, t);
            let dim = rng.gen_range(2..=128);
            let a = random_graded_matrix(&mut rng, dim, DEFAULT_MAX_LEVEL);
            let a = a.sub(&rho_k(&a, 0));
            a.scale(1.0 / norm_upper_bound(&a.dirac_commutator()))
        })
        .collect()
}

fn diagonal_bound() -> Outcome {
    let ctx = dense();
    let bound = pi_over_sqrt3_upper() + TOL;
    let lhs: Vec<f64> = normalized_population(200)
        .par_iter()
        .map(|a| diagonal_bound_check(a, 0, &ctx).lhs)
        .collect();
    let worst = max(lhs.iter().copied());
    outcome(worst <= bound, format!("200 matrices, max lhs {worst:.6} vs pi/sqrt3 {bound:.6}"))
}

fn tail_bound() -> Outcome {
    let ctx = dense();
    let margins: Vec<f64> = normalized_population(200)
        .par_iter()
        .flat_map_iter(|a| {
            let commutator = norm_upper_bound(&a.dirac_commutator());
            let ctx = &ctx;
            (1..=10u64).map(move |k| {
                sqrt_two_over_k_upper(k) * commutator + TOL - diagonal_bound_check(a, k, ctx).lhs
            })
        })
        .collect();
    let worst = min(margins.iter().copied());
    outcome(worst >= 0.0, format!("2000 (matrix, k) pairs, min slack {worst:.3e}"))
}

fn partial_inverse() -> Outcome {
    let errs: Vec<f64> = (0..500)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(SEED + 1, t);
            let dim = rng.gen_range(1..=64);
            let a = random_graded_matrix(&mut rng, dim, DEFAULT_MAX_LEVEL);
            reconstruct_offdiagonal(&a).max_abs_diff(&a.sub(&rho_k(&a, 0)))
        })
        .collect();
    let worst = max(errs.into_iter());
    outcome(worst <= 1e-12, format!("500 matrices, max entry error {worst:.3e}"))
}

fn schur_bound() -> Outcome {
    let ctx = dense();
    let margins: Vec<f64> = (0..200)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(SEED + 2, t);
            let a = random_graded_matrix(&mut rng, 64, DEFAULT_MAX_LEVEL);
            let phi = Symbol::random(&mut rng, 5);
            let r = schur_norm_check(&phi, &a, &ctx);
            phi.l2_norm() * largest_singular_value(&a.to_dense()) + TOL - r.lhs
        })
        .collect();
    let worst = min(margins.into_iter());
    outcome(worst >= 0.0, format!("200 trials at dim 64, min slack {worst:.3e}"))
}

fn delta(g: &GroupElement, degree: u32) -> SphereFunction {
    SphereFunction::new(F2, degree, [(g.clone(), c(1.0))]).unwrap()
}

fn sphere_convolution() -> Outcome {
    let mut pairs: Vec<(SphereFunction, SphereFunction)> = Vec::new();
    for m in 0..=3u32 {
        for k in 0..=m {
            let left = sphere(F2, k);
            let right = sphere(F2, m - k);
            let mut bs: Vec<SphereFunction> = left.iter().map(|u| delta(u, k)).collect();
            for (i, u) in left.iter().enumerate() {
                for v in &left[i + 1..] {
                    for sign in [1.0, -1.0] {
                        bs.push(SphereFunction::new(F2, k, [(u.clone(), c(1.0)), (v.clone(), c(sign))]).unwrap());
                    }
                }
            }
            for b in &bs {
                for v in &right {
                    pairs.push((b.clone(), delta(v, m - k)));
                }
            }
        }
    }
    let exhaustive = pairs.len();
    pairs.extend((0..500).map(|t| {
        let mut rng = trial_rng(SEED + 3, t);
        let m = rng.gen_range(0..=6);
        let k = rng.gen_range(0..=m);
        (SphereFunction::random(&mut rng, F2, k), SphereFunction::random(&mut rng, F2, m - k))
    }));
    let slacks: Vec<f64> = pairs
        .par_iter()
        .map(|(b, eta)| sphere_convolution_check(b, eta, 1e-10).unwrap().slack)
        .collect();
    let worst = min(slacks.into_iter());
    outcome(
        worst >= -1e-10,
        format!("{exhaustive} exhaustive + 500 random pairs, min slack {worst:.3e}"),
    )
}

fn rapid_decay() -> Outcome {
    let ctx = lanczos();
    let params = RDParams::new(2.0, 2.0).unwrap();
    let reports: Vec<_> = (0..200)
        .into_par_iter()
        .map(|t| {
            let x = random_element(&mut trial_rng(SEED + 4, t), F2, 3, true);
            rd_check(&x, params, 6, &ctx).unwrap()
        })
        .collect();
    let worst = min(reports.iter().map(|r| r.slack));
    let ratio = max(reports.iter().map(|r| r.lhs / r.rhs));
    outcome(
        reports.iter().all(|r| r.pass),
        format!("200 trials, min slack {worst:.3e}, max lhs/rhs {ratio:.4}"),
    )
}

fn free_diameter() -> Outcome {
    let ctx = lanczos();
    let reports: Vec<_> = (0..200)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(SEED + 5, t);
            let x = loop {
                let x = random_element(&mut rng, F2, 2, true);
                if x.support_radius() > 0 {
                    break x;
                }
            };
            free_diameter_check(&x, 7, &ctx).unwrap()
        })
        .collect();
    let consistent = reports.iter().all(|r| r.pass);
    let worst = max(reports.iter().map(|r| r.lhs));

    let opts = SearchOptions {
        eigen_tol: 1e-12,
        max_matvecs: 20_000,
        ..Default::default()
    };
    let half = GroupAlgebraElement::from_words(F2, &[("a", 0.5), ("A", 0.5)]).unwrap();
    let candidate = spectral_spread(&half, 8, &opts).unwrap().value;
    let search = diameter_lower_bound(SeminormSpec::new(F2, 1).unwrap(), 2, 8, &opts).unwrap().value;
    let reported = candidate.max(search);
    outcome(
        consistent && (1.99..=5.0 + TOL).contains(&reported),
        format!(
            "200 trials, max centered norm {worst:.4} <= 2.5: {consistent}; candidate spread at L=8 {candidate:.6} \
             (exact 2cos(pi/18) = {:.6}), search {search:.6}; needs >= 1.99",
            2.0 * (PI / 18.0).cos()
        ),
    )
}

fn rho0_bound() -> Outcome {
    let ctx = lanczos();
    let bound = pi_over_two_sqrt6_upper() + TOL;
    let lhs: Vec<f64> = (0..200)
        .into_par_iter()
        .map(|t| {
            let x = random_element(&mut trial_rng(SEED + 6, t), F2, 2, false);
            let x = x.scale(c(1.0 / SeminormSpec::new(F2, 1).unwrap().upper(&x)));
            rho0_check(&x, 6, &ctx).unwrap().lhs
        })
        .collect();
    let worst = max(lhs.into_iter());
    outcome(worst <= bound, format!("200 trials, max lhs {worst:.6} vs {bound:.6}"))
}

fn z_oracle() -> Outcome {
    let z = GroupSpec::FreeAbelian(1);
    let ctx = lanczos();
    let rows: Vec<(bool, bool, f64)> = (0..20)
        .into_par_iter()
        .map(|t| {
            let x = random_element(&mut trial_rng(SEED + 7, t), z, 8, true);
            let x = x.scale(c(1.0 / x.l1_norm()));
            let est: Vec<f64> = [64, 128, 256, 512]
                .iter()
                .map(|&l| ctx.norm(&convolution_matrix(&x, &BallIndex::new(z, l).unwrap()).unwrap()).value)
                .collect();
            let bracket = z_symbol_norm(&x).unwrap();
            let top = est[3];
            let monotone = est.windows(2).all(|w| w[0] <= w[1] + TOL);
            let within = top <= bracket.upper + TOL && top >= bracket.lower - 1e-3;
            (monotone, within, bracket.upper - top)
        })
        .collect();
    let monotone = rows.iter().all(|r| r.0);
    let within = rows.iter().all(|r| r.1);
    let gap = max(rows.iter().map(|r| r.2));
    outcome(
        monotone && within,
        format!("20 elements with ||x||_1 = 1, monotone {monotone}, within bracket {within}, max gap at L=512 {gap:.3e}"),
    )
}

fn coefficient_and_tail() -> Outcome {
    let ctx = lanczos();
    let groups = [F2, GroupSpec::Free(3), GroupSpec::FreeAbelian(1), GroupSpec::FreeAbelian(2)];
    let rows: Vec<(f64, bool)> = (0..200)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(SEED + 8, t);
            let group = groups[t % groups.len()];
            let x = random_element(&mut rng, group, 2, true);
            let k = rng.gen_range(1..=3);
            let coefficient = coefficient_check(&x, k, 4, &ctx).unwrap();
            let params = RDParams::default_for(group);
            let n = rng.gen_range(1..=2);
            let order = SeminormSpec::minimal_order(params.s);
            let tail = tail_check(&x, n, order, params, 4, &ctx).unwrap();
            (coefficient.slack, tail.pass)
        })
        .collect();
    let worst = min(rows.iter().map(|r| r.0));
    let tails = rows.iter().filter(|r| r.1).count();
    outcome(
        worst >= -1e-12 && tails == rows.len(),
        format!("200 coefficient checks, min slack {worst:.3e}; tail checks passed {tails}/200"),
    )
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn jordan() -> Outcome {
    let rows: Vec<(f64, f64, f64)> = (0..200)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(SEED + 9, t);
            let d = rng.gen_range(1..=16);
            let f = random_traceless_hermitian(&mut rng, d);
            let (rho, sigma) = jordan_decompose(&f).unwrap();
            let recon = (&rho - &sigma - &f).iter().map(|v| v.norm()).fold(0.0, f64::max);
            let eig = min_eigenvalue(&rho).min(min_eigenvalue(&sigma));
            let trace = (rho.trace().re - 1.0).abs().max((sigma.trace().re - 1.0).abs());
            (recon, eig, trace)
        })
        .collect();
    let recon = max(rows.iter().map(|r| r.0));
    let eig = min(rows.iter().map(|r| r.1));
    let trace = max(rows.iter().map(|r| r.2));
    outcome(
        recon <= 1e-10 && eig >= -1e-10 && trace <= 1e-10,
        format!("200 matrices, reconstruction {recon:.3e}, min eigenvalue {eig:.3e}, trace error {trace:.3e}"),
    )
}

fn metric_axioms() -> Outcome {
    let cfg = SuiteConfig {
        suite: "metric-set".into(),
        trials: 100,
        seed: SEED,
        tol: 1e-10,
        ..Default::default()
    };
    let reports = execute(&cfg).unwrap();
    let worst = min(reports.iter().map(|r| r.slack));
    let axioms = reports.iter().all(|r| r.pass) && reports.len() == 300;

    let one = c(1.0);
    let a = GroupElement::parse(F2, "a").unwrap();
    let phi: StateFunctional = VectorState::new(F2, 2, [(F2.identity(), one), (a.clone(), one)]).unwrap().into();
    let tau: StateFunctional = VectorState::trace(F2, 2).into();
    let worked = metric_set_distance(&phi, &tau, &MetricSet::Group(vec![a])).unwrap();
    outcome(
        axioms && (worked - 0.5).abs() <= 1e-12,
        format!("100 triples, min slack {worst:.3e}; worked value {worked:.15}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("diagonal bound pi/sqrt3", diagonal_bound),
        ("tail bound sqrt(2/k)", tail_bound),
        ("partial inverse of the derivation", partial_inverse),
        ("Schur multiplier bound", schur_bound),
        ("sphere convolution inequality", sphere_convolution),
        ("rapid decay on f2, C=2, s=2", rapid_decay),
        ("free-group diameter consistency", free_diameter),
        ("rho_0 bound pi/(2 sqrt6)", rho0_bound),
        ("z1 symbol agreement", z_oracle),
        ("coefficient and tail inequalities", coefficient_and_tail),
        ("Jordan decomposition", jordan),
        ("metric axioms for d_K", metric_axioms),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let Outcome { pass, detail } = run();
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
