//! Named verification suites and the runner behind the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::haagerup::{
    domination_check, free_diameter_check, rd_check, sphere_convolution_check, z_l1_check, RDParams,
    SphereFunction,
};
use crate::metrics::{
    coefficient_check, diameter_lower_bound, distance_lower_bound, jordan_check, metric_set_distance,
    random_density, random_traceless_hermitian, tail_check, MetricSet, SearchOptions, SeminormSpec,
    StateFunctional, VectorState,
};
use crate::operators::{
    convolution_matrix, estimator_by_name, z_symbol_norm, GroupAlgebraElement, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::report::{write_reports, BoundReport, CheckContext, ReportFormat};
use crate::sampling::{random_element, trial_rng};
use crate::schur::{
    diagonal_bound_check, random_graded_matrix, rho_k, schur_norm_check, Symbol, DEFAULT_MAX_LEVEL,
};
use crate::words::{sphere, BallIndex, GroupElement, GroupSpec, DEFAULT_BALL_CAP};

/// Everything a suite run depends on; identical configs give identical reports.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub suite: String,
    pub group: GroupSpec,
    pub support_radius: u32,
    pub ball: u32,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub coeffs: Option<PathBuf>,
    pub state_a: Option<PathBuf>,
    pub state_b: Option<PathBuf>,
    /// Matrix dimension for the matrix suites.
    pub dim: usize,
    /// Commutator order `k`; each suite has its own default.
    pub order: Option<u32>,
    /// Registered norm estimator.
    pub norm: String,
    pub ball_cap: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suite: String::new(),
            group: GroupSpec::Free(2),
            support_radius: 2,
            ball: 4,
            trials: 20,
            seed: 0,
            tol: DEFAULT_TOL,
            out: None,
            format: ReportFormat::Json,
            coeffs: None,
            state_a: None,
            state_b: None,
            dim: 64,
            order: None,
            norm: "power".into(),
            ball_cap: DEFAULT_BALL_CAP,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::usage("trials must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::usage("tolerance must be positive"));
        }
        if self.ball < self.support_radius {
            return Err(Error::usage(format!(
                "ball radius {} is smaller than the support radius {}",
                self.ball, self.support_radius
            )));
        }
        if self.dim == 0 {
            return Err(Error::usage("dimension must be at least 1"));
        }
        suite_by_name(&self.suite)?;
        Ok(())
    }

    pub fn context(&self) -> Result<CheckContext> {
        Ok(CheckContext {
            estimator: estimator_by_name(&self.norm, DEFAULT_TOL, DEFAULT_MAX_ITER)?,
            tol: self.tol,
            ball_cap: self.ball_cap,
        })
    }

    fn order_or(&self, default: u32) -> u32 {
        self.order.unwrap_or(default)
    }

    fn coefficients(&self) -> Result<Option<GroupAlgebraElement>> {
        self.coeffs
            .as_deref()
            .map(|p| GroupAlgebraElement::from_json(self.group, &read(p)?))
            .transpose()
    }

    /// The fixed element from `--coeffs` as a single trial, otherwise one
    /// random element per trial.
    fn elements<F>(&self, mut random: F) -> Result<Vec<(usize, GroupAlgebraElement, ChaCha8Rng)>>
    where
        F: FnMut(&mut ChaCha8Rng) -> GroupAlgebraElement,
    {
        if let Some(x) = self.coefficients()? {
            return Ok(vec![(0, x, trial_rng(self.seed, 0))]);
        }
        Ok((0..self.trials)
            .map(|t| {
                let mut rng = trial_rng(self.seed, t);
                let x = random(&mut rng);
                (t, x, rng)
            })
            .collect())
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_free(group: GroupSpec, suite: &str) -> Result<()> {
    if group.is_free() {
        Ok(())
    } else {
        Err(Error::usage(format!("suite {suite} needs a free group, got {group}")))
    }
}

/// A named experiment producing bound reports.
pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>>;
}

/// Runs `f` on every trial in parallel, keeping trial order.
fn per_trial<F>(cfg: &SuiteConfig, f: F) -> Result<Vec<BoundReport>>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Vec<BoundReport>> + Sync,
{
    let batches: Vec<Vec<BoundReport>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            f(t, &mut rng).map(|rs| rs.into_iter().map(|r| r.with_trial(cfg.seed, t)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

fn per_element<F>(items: Vec<(usize, GroupAlgebraElement, ChaCha8Rng)>, seed: u64, f: F) -> Result<Vec<BoundReport>>
where
    F: Fn(&GroupAlgebraElement, &mut ChaCha8Rng) -> Result<Vec<BoundReport>> + Sync,
{
    let batches: Vec<Vec<BoundReport>> = items
        .into_par_iter()
        .map(|(t, x, mut rng)| {
            f(&x, &mut rng).map(|rs| rs.into_iter().map(|r| r.with_trial(seed, t)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(batches.into_iter().flatten().collect())
}

struct NormSandwich;
impl Suite for NormSandwich {
    fn name(&self) -> &'static str {
        "norm-sandwich"
    }
    fn summary(&self) -> &'static str {
        "||x||_2 <= compressed ||lambda(x)|| <= ||x||_1 (and the symbol bracket on z1)"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let items = cfg.elements(|rng| random_element(rng, cfg.group, cfg.support_radius, true))?;
        per_element(items, cfg.seed, |x, _| {
            let ball = BallIndex::with_cap(cfg.group, cfg.ball.max(x.support_radius()), ctx.ball_cap)?;
            let est = ctx.norm(&convolution_matrix(x, &ball)?).value;
            let mut out = vec![
                BoundReport::new("norm-sandwich-lower", x.l2_norm(), est, ctx.tol),
                BoundReport::new("norm-sandwich-upper", est, x.l1_norm(), ctx.tol),
            ];
            if cfg.group == GroupSpec::FreeAbelian(1) {
                let b = z_symbol_norm(x)?;
                out.push(
                    BoundReport::new("norm-sandwich-symbol", est, b.upper, ctx.tol).param("symbol_lower", b.lower),
                );
            }
            Ok(out.into_iter().map(|r| r.param("L", ball.radius())).collect())
        })
    }
}

struct DiagonalBound;
impl Suite for DiagonalBound {
    fn name(&self) -> &'static str {
        "diagonal-bound"
    }
    fn summary(&self) -> &'static str {
        "||a - sum_{|i|<=k} rho_i(a)|| <= ||[D,a]|| (2 sum_{j>k} j^-2)^(1/2), k = 0..10, rho_0 removed"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        per_trial(cfg, |_, rng| {
            let a = random_graded_matrix(rng, cfg.dim, DEFAULT_MAX_LEVEL);
            let a = a.sub(&rho_k(&a, 0));
            let c = crate::operators::norm_upper_bound(&a.dirac_commutator());
            let a = if c > 0.0 { a.scale(1.0 / c) } else { a };
            Ok((0..=10).map(|k| diagonal_bound_check(&a, k, ctx)).collect())
        })
    }
}

struct SchurBound;
impl Suite for SchurBound {
    fn name(&self) -> &'static str {
        "schur-bound"
    }
    fn summary(&self) -> &'static str {
        "||Lambda_phi(a)|| <= ||phi||_2 ||a|| for symbols on [-5, 5] (or --coeffs)"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let fixed = cfg.coeffs.as_deref().map(|p| Symbol::from_json(&read(p)?)).transpose()?;
        per_trial(cfg, |_, rng| {
            let a = random_graded_matrix(rng, cfg.dim, DEFAULT_MAX_LEVEL);
            let phi = fixed.clone().unwrap_or_else(|| Symbol::random(rng, 5));
            Ok(vec![schur_norm_check(&phi, &a, ctx)])
        })
    }
}

struct SphereConvolution;
impl Suite for SphereConvolution {
    fn name(&self) -> &'static str {
        "sphere-convolution"
    }
    fn summary(&self) -> &'static str {
        "||(b * eta) chi_m||_2 <= ||b||_2 ||eta||_2 on free-group spheres, m <= ball"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        require_free(cfg.group, self.name())?;
        let max_m = cfg.ball.clamp(1, 6);
        per_trial(cfg, |_, rng| {
            let m = rng.gen_range(0..=max_m);
            let k = rng.gen_range(0..=m);
            let b = SphereFunction::random(rng, cfg.group, k);
            let eta = SphereFunction::random(rng, cfg.group, m - k);
            Ok(vec![sphere_convolution_check(&b, &eta, ctx.tol)?])
        })
    }
}

struct RapidDecay;
impl Suite for RapidDecay {
    fn name(&self) -> &'static str {
        "rd"
    }
    fn summary(&self) -> &'static str {
        "compressed ||lambda(x)|| <= C (sum (1+l)^{2s} |x|^2)^(1/2) with the group's default (C, s)"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let params = RDParams::default_for(cfg.group);
        let items = cfg.elements(|rng| random_element(rng, cfg.group, cfg.support_radius, true))?;
        per_element(items, cfg.seed, |x, _| Ok(vec![rd_check(x, params, cfg.ball.max(x.support_radius()), ctx)?]))
    }
}

struct ZL1;
impl Suite for ZL1 {
    fn name(&self) -> &'static str {
        "z-l1"
    }
    fn summary(&self) -> &'static str {
        "||x||_1 <= kappa (sum (1+|n|)^2 |x(n)|^2)^(1/2) on z1"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        if cfg.group != GroupSpec::FreeAbelian(1) {
            return Err(Error::usage(format!("suite z-l1 needs --group z1, got {}", cfg.group)));
        }
        let items = cfg.elements(|rng| random_element(rng, cfg.group, cfg.support_radius, true))?;
        per_element(items, cfg.seed, |x, _| Ok(vec![z_l1_check(x, ctx.tol)?]))
    }
}

struct Domination;
impl Suite for Domination {
    fn name(&self) -> &'static str {
        "domination"
    }
    fn summary(&self) -> &'static str {
        "|x * xi| <= sum_k b_k * eta_{m-k} pointwise and ||p_m x xi|| <= pi/(2 sqrt 6) sum |x| l"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        require_free(cfg.group, self.name())?;
        let max_m = cfg.ball.clamp(1, 5);
        let items = cfg.elements(|rng| random_element(rng, cfg.group, cfg.support_radius, false))?;
        per_element(items, cfg.seed, |x, rng| {
            let m = rng.gen_range(1..=max_m);
            let xi = SphereFunction::random(rng, cfg.group, m);
            let xi = xi.scale(1.0 / xi.l2_norm());
            Ok(vec![domination_check(x, &xi, ctx.tol)?])
        })
    }
}

struct FreeDiameter;
impl Suite for FreeDiameter {
    fn name(&self) -> &'static str {
        "free-diameter"
    }
    fn summary(&self) -> &'static str {
        "||a - tau(a) I|| <= 2.5 and ||rho_0(a - tau(a))|| <= pi/(2 sqrt 6) for sum |a| l = 1"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        require_free(cfg.group, self.name())?;
        let items = cfg.elements(|rng| loop {
            let x = random_element(rng, cfg.group, cfg.support_radius, true);
            if x.support_radius() > 0 {
                break x;
            }
        })?;
        per_element(items, cfg.seed, |x, _| Ok(vec![free_diameter_check(x, cfg.ball.max(x.support_radius()), ctx)?]))
    }
}

struct Coefficient;
impl Suite for Coefficient {
    fn name(&self) -> &'static str {
        "coefficient"
    }
    fn summary(&self) -> &'static str {
        "(sum l^{2k} |x|^2)^(1/2) <= compressed ||delta^k(x)||, k = --order (default 1)"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let k = cfg.order_or(1);
        let items = cfg.elements(|rng| random_element(rng, cfg.group, cfg.support_radius, true))?;
        per_element(items, cfg.seed, |x, _| {
            Ok(vec![coefficient_check(x, k, cfg.ball.max(x.support_radius()), ctx)?])
        })
    }
}

struct Tail;
impl Suite for Tail {
    fn name(&self) -> &'static str {
        "tail"
    }
    fn summary(&self) -> &'static str {
        "||sum_{l >= n} x(g) lambda_g|| <= C 2^s n^{s-k} sum |x| l^k, k = --order (default floor(s)+1)"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let params = RDParams::default_for(cfg.group);
        let k = cfg.order_or(SeminormSpec::minimal_order(params.s));
        let items = cfg.elements(|rng| random_element(rng, cfg.group, cfg.support_radius, true))?;
        per_element(items, cfg.seed, |x, rng| {
            let n = rng.gen_range(1..=cfg.support_radius.max(1));
            Ok(vec![tail_check(x, n, k, params, cfg.ball.max(x.support_radius()), ctx)?])
        })
    }
}

struct Jordan;
impl Suite for Jordan {
    fn name(&self) -> &'static str {
        "jordan"
    }
    fn summary(&self) -> &'static str {
        "traceless hermitian F, trace norm <= 2, splits as rho - sigma with density matrices, d <= min(dim, 16)"
    }
    fn run(&self, cfg: &SuiteConfig, _ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let max_d = cfg.dim.min(16);
        per_trial(cfg, |_, rng| {
            let d = rng.gen_range(1..=max_d);
            let f = random_traceless_hermitian(rng, d);
            Ok(vec![jordan_check(&f, 1e-10)?])
        })
    }
}

struct MetricSetAxioms;
impl Suite for MetricSetAxioms {
    fn name(&self) -> &'static str {
        "metric-set"
    }
    fn summary(&self) -> &'static str {
        "symmetry, triangle inequality and zero diagonal of d_K on random state triples"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let group_words: Vec<GroupElement> = (1..=cfg.support_radius).flat_map(|m| sphere(cfg.group, m)).collect();
        per_trial(cfg, |t, rng| {
            let (states, set, form): (Vec<StateFunctional>, MetricSet, &str) = if t % 2 == 0 || group_words.is_empty() {
                let d = rng.gen_range(2..=cfg.dim.clamp(2, 8));
                let states = (0..3).map(|_| random_density(rng, d).into()).collect();
                let ks = (0..4).map(|_| random_traceless_hermitian(rng, d)).collect();
                (states, MetricSet::Matrices(ks), "matrices")
            } else {
                let states = (0..3)
                    .map(|_| {
                        let v = random_element(rng, cfg.group, cfg.support_radius, true);
                        VectorState::new(cfg.group, 2 * cfg.support_radius, v.terms().map(|(g, c)| (g.clone(), *c)))
                            .map(StateFunctional::from)
                    })
                    .collect::<Result<Vec<_>>>()?;
                (states, MetricSet::Group(group_words.clone()), "group")
            };
            let d = |i: usize, j: usize| metric_set_distance(&states[i], &states[j], &set);
            let (ab, ba, bc, ac, aa) = (d(0, 1)?, d(1, 0)?, d(1, 2)?, d(0, 2)?, d(0, 0)?);
            Ok(vec![
                BoundReport::new("metric-set-symmetry", (ab - ba).abs(), 0.0, ctx.tol).param("form", form),
                BoundReport::new("metric-set-triangle", ac, ab + bc, ctx.tol).param("form", form),
                BoundReport::new("metric-set-diagonal", aa, 0.0, ctx.tol).param("form", form),
            ])
        })
    }
}

fn default_states(group: GroupSpec, radius: u32) -> Result<(StateFunctional, StateFunctional)> {
    let one = Complex64::new(1.0, 0.0);
    let g = group.letters()[0].clone();
    let phi = VectorState::new(group, 2 * radius.max(1), [(group.identity(), one), (g, one)])?;
    Ok((phi.into(), VectorState::trace(group, 2 * radius.max(1)).into()))
}

struct Distance;
impl Suite for Distance {
    fn name(&self) -> &'static str {
        "distance"
    }
    fn summary(&self) -> &'static str {
        "certified lower bound for d_{k,l}(phi, psi) from --state-a/--state-b (default (e+a)/sqrt2 vs trace)"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        let k = cfg.order_or(1);
        let spec = SeminormSpec::new(cfg.group, k)?;
        let (phi, psi) = match (&cfg.state_a, &cfg.state_b) {
            (Some(a), Some(b)) => (
                VectorState::from_file(cfg.group, a)?.into(),
                VectorState::from_file(cfg.group, b)?.into(),
            ),
            (None, None) => default_states(cfg.group, cfg.support_radius)?,
            _ => return Err(Error::usage("give both --state-a and --state-b or neither")),
        };
        let opts = SearchOptions {
            restarts: cfg.trials,
            seed: cfg.seed,
            ball_cap: ctx.ball_cap,
            ..Default::default()
        };
        let found = distance_lower_bound(&phi, &psi, spec, cfg.support_radius, &opts)?;
        // the witness has ||x|| <= sum |x(g)| <= sum |x(g)| l(g)^k = 1
        let (rhs, bound) = if cfg.group.is_free() && cfg.group.rank() >= 2 && k == 1 {
            (5.0, "free-group diameter")
        } else {
            (2.0, "2 ||x||_1")
        };
        Ok(vec![BoundReport::new("distance", found.value, rhs, ctx.tol)
            .param("k", k)
            .param("R", cfg.support_radius)
            .param("bound", bound)
            .param("witness", serde_json::from_str::<serde_json::Value>(&found.witness.to_json()).unwrap_or_default())
            .with_trial(cfg.seed, 0)])
    }
}

struct Diameter;
impl Suite for Diameter {
    fn name(&self) -> &'static str {
        "diameter"
    }
    fn summary(&self) -> &'static str {
        "best spectral spread of compressed self-adjoint x with sum |x| l = 1 against the bound 5 on f<n>, n >= 2"
    }
    fn run(&self, cfg: &SuiteConfig, ctx: &CheckContext) -> Result<Vec<BoundReport>> {
        if !(cfg.group.is_free() && cfg.group.rank() >= 2) {
            return Err(Error::usage(format!(
                "suite diameter compares against the free-group bound and needs f<n> with n >= 2, got {}",
                cfg.group
            )));
        }
        let k = cfg.order_or(1);
        let opts = SearchOptions {
            restarts: cfg.trials,
            seed: cfg.seed,
            ball_cap: ctx.ball_cap,
            ..Default::default()
        };
        let found = diameter_lower_bound(SeminormSpec::new(cfg.group, k)?, cfg.support_radius, cfg.ball, &opts)?;
        Ok(vec![BoundReport::new("diameter", found.value, 5.0, ctx.tol)
            .param("k", k)
            .param("R", cfg.support_radius)
            .param("L", cfg.ball)
            .param("converged", found.converged)
            .param("candidates", found.candidates)
            .param("witness", serde_json::from_str::<serde_json::Value>(&found.witness.to_json()).unwrap_or_default())
            .with_trial(cfg.seed, 0)])
    }
}

static SUITES: &[&dyn Suite] = &[
    &NormSandwich,
    &DiagonalBound,
    &SchurBound,
    &SphereConvolution,
    &RapidDecay,
    &ZL1,
    &Domination,
    &FreeDiameter,
    &Coefficient,
    &Tail,
    &Jordan,
    &MetricSetAxioms,
    &Distance,
    &Diameter,
];

pub fn suites() -> &'static [&'static dyn Suite] {
    SUITES
}

pub fn suite_by_name(name: &str) -> Result<&'static dyn Suite> {
    SUITES.iter().copied().find(|s| s.name() == name).ok_or_else(|| {
        Error::usage(format!(
            "unknown suite {name:?}; expected one of {}",
            SUITES.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
        ))
    })
}

/// Runs the configured suite and returns its reports in trial order.
pub fn execute(cfg: &SuiteConfig) -> Result<Vec<BoundReport>> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    suite_by_name(&cfg.suite)?.run(cfg, &ctx)
}

/// 0 when every report passes, 1 otherwise.
pub fn exit_status(reports: &[BoundReport]) -> i32 {
    if reports.iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}

/// Runs the suite, writes the reports to `--out` or standard output, and
/// returns the process exit status.
pub fn run_suite(cfg: &SuiteConfig) -> Result<i32> {
    let reports = execute(cfg)?;
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            write_reports(BufWriter::new(file), &reports, cfg.format)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_reports(&mut lock, &reports, cfg.format)?;
            lock.flush().map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })?;
        }
    }
    Ok(exit_status(&reports))
}
