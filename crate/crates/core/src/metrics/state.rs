use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::operators::GroupAlgebraElement;
use crate::words::{GroupElement, GroupSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `phi_xi(a) = <a xi, xi>` for a finitely supported unit vector `xi`, valid
/// on elements whose support radius plus the vector radius fits in
/// `ball_radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorState {
    spec: GroupSpec,
    ball_radius: u32,
    vector: BTreeMap<GroupElement, Complex64>,
}

#[derive(Deserialize)]
struct StateFile {
    ball_radius: u32,
    vector: BTreeMap<String, [f64; 2]>,
}

impl VectorState {
    /// Normalizes the vector, warning when its norm was off by more than 1e-8.
    pub fn new<I>(spec: GroupSpec, ball_radius: u32, vector: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, Complex64)>,
    {
        let mut map: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        for (g, c) in vector {
            if g.spec() != spec {
                return Err(Error::usage(format!("{g} is not an element of {spec}")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::usage(format!("non-finite amplitude at {g}")));
            }
            *map.entry(g).or_insert(ZERO) += c;
        }
        map.retain(|_, c| *c != ZERO);
        let norm = map.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::usage("a state vector must be nonzero"));
        }
        if (norm - 1.0).abs() > 1e-8 {
            log::warn!("state vector has norm {norm}; normalizing");
        }
        map.values_mut().for_each(|c| *c /= norm);
        let state = VectorState {
            spec,
            ball_radius,
            vector: map,
        };
        if state.vector_radius() > ball_radius {
            return Err(Error::usage(format!(
                "state vector reaches length {} beyond its ball radius {ball_radius}",
                state.vector_radius()
            )));
        }
        Ok(state)
    }

    /// The canonical trace, the vector state at `delta_e`.
    pub fn trace(spec: GroupSpec, ball_radius: u32) -> Self {
        Self::new(spec, ball_radius, [(spec.identity(), Complex64::new(1.0, 0.0))])
            .expect("unit vector at e")
    }

    /// Reads `{"ball_radius": L, "vector": {word: [re, im], ...}}`.
    pub fn from_json(spec: GroupSpec, text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "state".into(),
            source,
        })?;
        let mut terms = Vec::with_capacity(file.vector.len());
        for (word, [re, im]) in file.vector {
            terms.push((GroupElement::parse(spec, &word)?, Complex64::new(re, im)));
        }
        Self::new(spec, file.ball_radius, terms)
    }

    pub fn from_file(spec: GroupSpec, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(spec, &text)
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn ball_radius(&self) -> u32 {
        self.ball_radius
    }

    pub fn vector_radius(&self) -> u32 {
        self.vector.keys().map(GroupElement::length).max().unwrap_or(0)
    }

    pub fn amplitude(&self, g: &GroupElement) -> Complex64 {
        self.vector.get(g).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &Complex64)> {
        self.vector.iter()
    }

    /// `<lambda_g xi, xi> = sum_t xi(t) conj(xi(g t))`.
    pub fn evaluate_group_element(&self, g: &GroupElement) -> Complex64 {
        self.vector
            .iter()
            .map(|(t, c)| c * self.amplitude(&(g * t)).conj())
            .sum()
    }

    /// Largest support radius this state evaluates exactly.
    pub fn evaluable_radius(&self) -> Option<u32> {
        self.ball_radius.checked_sub(self.vector_radius())
    }

    fn check_radius(&self, radius: u32) -> Result<()> {
        match self.evaluable_radius() {
            Some(r) if r >= radius => Ok(()),
            _ => Err(Error::usage(format!(
                "state with ball radius {} and vector radius {} cannot evaluate support radius {radius}",
                self.ball_radius,
                self.vector_radius()
            ))),
        }
    }
}

/// A positive trace-one matrix `rho` on `M_d`, acting by `k -> tr(rho k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    rho: DMatrix<Complex64>,
}

pub(crate) const DENSITY_TOL: f64 = 1e-10;

pub(crate) fn is_hermitian(m: &DMatrix<Complex64>, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|v| v.norm() <= tol)
}

impl DensityState {
    pub fn new(rho: DMatrix<Complex64>) -> Result<Self> {
        if !is_hermitian(&rho, DENSITY_TOL) {
            return Err(Error::usage("a density matrix must be hermitian"));
        }
        let trace = rho.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::usage(format!("a density matrix must have trace 1, has {trace}")));
        }
        let min = SymmetricEigen::new(rho.clone()).eigenvalues.min();
        if min < -DENSITY_TOL {
            return Err(Error::usage(format!("density matrix has eigenvalue {min}")));
        }
        Ok(DensityState { rho })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    /// `tr(rho k)`.
    pub fn evaluate(&self, k: &DMatrix<Complex64>) -> Result<Complex64> {
        if k.shape() != self.rho.shape() {
            return Err(Error::usage(format!(
                "{}x{} observable for a state on M_{}",
                k.nrows(),
                k.ncols(),
                self.dim()
            )));
        }
        Ok(self.rho.component_mul(&k.transpose()).sum())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateFunctional {
    Vector(VectorState),
    Density(DensityState),
}

impl StateFunctional {
    pub fn as_vector(&self) -> Result<&VectorState> {
        match self {
            StateFunctional::Vector(v) => Ok(v),
            StateFunctional::Density(_) => {
                Err(Error::usage("a vector state on a group algebra is required"))
            }
        }
    }

    pub fn as_density(&self) -> Result<&DensityState> {
        match self {
            StateFunctional::Density(d) => Ok(d),
            StateFunctional::Vector(_) => {
                Err(Error::usage("a density state on a matrix algebra is required"))
            }
        }
    }
}

impl From<VectorState> for StateFunctional {
    fn from(v: VectorState) -> Self {
        StateFunctional::Vector(v)
    }
}

impl From<DensityState> for StateFunctional {
    fn from(d: DensityState) -> Self {
        StateFunctional::Density(d)
    }
}

/// `<lambda(x) xi, xi>`, exact when the state's ball holds the support.
pub fn evaluate_state(phi: &StateFunctional, x: &GroupAlgebraElement) -> Result<Complex64> {
    let v = phi.as_vector()?;
    if v.spec != x.spec() {
        return Err(Error::usage(format!("state on {} applied to an element of {}", v.spec, x.spec())));
    }
    v.check_radius(x.support_radius())?;
    Ok(x.terms().map(|(g, c)| c * v.evaluate_group_element(g)).sum())
}

pub(crate) fn check_evaluable(v: &VectorState, spec: GroupSpec, radius: u32) -> Result<()> {
    if v.spec != spec {
        return Err(Error::usage(format!("state on {} used with {spec}", v.spec)));
    }
    v.check_radius(radius)
}
