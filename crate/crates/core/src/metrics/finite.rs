//! State geometry of the matrix algebra `M_d` and metric sets.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use super::state::{is_hermitian, DensityState, StateFunctional, DENSITY_TOL};
use crate::error::{Error, Result};
use crate::report::BoundReport;
use crate::sampling::complex_gaussian;
use crate::words::{GroupElement, GroupSpec};

/// Writes a traceless hermitian `F` of trace norm at most 2 as `rho - sigma`
/// with density matrices `rho = F+ + g` and `sigma = F- + g`, where
/// `g = ((1 - t)/t) F+` and `t = tr F+`. `F = 0` gives `(I/d, I/d)`.
pub fn jordan_decompose(f: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    if !is_hermitian(f, DENSITY_TOL) {
        return Err(Error::usage("jordan decomposition needs a hermitian matrix"));
    }
    let d = f.nrows();
    if d == 0 {
        return Err(Error::usage("jordan decomposition needs a nonempty matrix"));
    }
    if f.trace().norm() > DENSITY_TOL {
        return Err(Error::usage(format!("matrix has trace {}, expected 0", f.trace())));
    }
    let eig = SymmetricEigen::new(f.clone());
    let trace_norm: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
    if trace_norm > 2.0 + DENSITY_TOL {
        return Err(Error::usage(format!("trace norm {trace_norm} exceeds 2")));
    }
    let mut plus = DMatrix::zeros(d, d);
    let mut minus = DMatrix::zeros(d, d);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let p = v * v.adjoint();
        if l > 0.0 {
            plus += p * Complex64::new(l, 0.0);
        } else if l < 0.0 {
            minus += p * Complex64::new(-l, 0.0);
        }
    }
    let t: f64 = eig.eigenvalues.iter().filter(|l| **l > 0.0).sum();
    if t == 0.0 {
        let half = DMatrix::from_diagonal_element(d, d, Complex64::new(1.0 / d as f64, 0.0));
        return Ok((half.clone(), half));
    }
    let g = &plus * Complex64::new((1.0 - t) / t, 0.0);
    Ok((&plus + &g, minus + g))
}

/// Checks that the decomposition reproduces `F` and yields density matrices.
/// `lhs` is the largest reconstruction error, `rhs` the tolerance.
pub fn jordan_check(f: &DMatrix<Complex64>, tol: f64) -> Result<BoundReport> {
    let (rho, sigma) = jordan_decompose(f)?;
    let err = (&rho - &sigma - f).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let min_eig = |m: &DMatrix<Complex64>| SymmetricEigen::new(m.clone()).eigenvalues.min();
    let (min_rho, min_sigma) = (min_eig(&rho), min_eig(&sigma));
    let trace_err = (rho.trace().re - 1.0).abs().max((sigma.trace().re - 1.0).abs());
    Ok(BoundReport::new("jordan", err, tol, 0.0)
        .param("dim", f.nrows())
        .param("min_eigenvalue", min_rho.min(min_sigma))
        .param("trace_error", trace_err)
        .require("positive", min_rho >= -tol && min_sigma >= -tol)
        .require("normalized", trace_err <= tol))
}

/// A traceless hermitian `d x d` matrix with trace norm uniform in `(0, 2]`.
pub fn random_traceless_hermitian<R: Rng>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let mut h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let shift = h.trace() / d as f64;
    for i in 0..d {
        h[(i, i)] -= shift;
    }
    let trace_norm: f64 = SymmetricEigen::new(h.clone()).eigenvalues.iter().map(|l| l.abs()).sum();
    if trace_norm == 0.0 {
        return h;
    }
    let target = 2.0 * (1.0 - rng.gen::<f64>());
    h * Complex64::new(target / trace_norm, 0.0)
}

/// `G G* / tr(G G*)` for a complex Gaussian `G`.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> DensityState {
    let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let mut rho = &g * g.adjoint();
    let t = rho.trace();
    rho /= t;
    // exact hermitian symmetry after rounding
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityState::new(rho).expect("Gram matrices are positive")
}

/// A finite metric set: group elements `g_n` with weights `1/n` (the set of
/// `alpha lambda_{g_n} + beta lambda_{g_n}^*` with `|alpha| + |beta| <= 1/n`),
/// or a list of matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricSet {
    Group(Vec<GroupElement>),
    Matrices(Vec<DMatrix<Complex64>>),
}

impl MetricSet {
    /// Reads a JSON list of words.
    pub fn from_json_words(spec: GroupSpec, text: &str) -> Result<Self> {
        let words: Vec<String> = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "metric set".into(),
            source,
        })?;
        let elems = words
            .iter()
            .map(|w| GroupElement::parse(spec, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(MetricSet::Group(elems))
    }

    pub fn len(&self) -> usize {
        match self {
            MetricSet::Group(g) => g.len(),
            MetricSet::Matrices(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `d_K(phi, psi) = sup_{k in K} |(phi - psi)(k)|`. For the group form the
/// supremum over the balanced hull is `max_n (1/n) max(|c_n|, |c_n'|)` with
/// `c_n = (phi - psi)(lambda_{g_n})` and `c_n'` its value at `g_n^-1`.
pub fn metric_set_distance(phi: &StateFunctional, psi: &StateFunctional, set: &MetricSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::usage("metric set is empty"));
    }
    match set {
        MetricSet::Group(elems) => {
            let (a, b) = (phi.as_vector()?, psi.as_vector()?);
            let mut best = 0.0f64;
            for (n, g) in elems.iter().enumerate() {
                super::state::check_evaluable(a, g.spec(), g.length())?;
                super::state::check_evaluable(b, g.spec(), g.length())?;
                let c = |h: &GroupElement| (a.evaluate_group_element(h) - b.evaluate_group_element(h)).norm();
                best = best.max(c(g).max(c(&g.inverse())) / (n + 1) as f64);
            }
            Ok(best)
        }
        MetricSet::Matrices(ks) => {
            let (a, b) = (phi.as_density()?, psi.as_density()?);
            let mut best = 0.0f64;
            for k in ks {
                best = best.max((a.evaluate(k)? - b.evaluate(k)?).norm());
            }
            Ok(best)
        }
    }
}
