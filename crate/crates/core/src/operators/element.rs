use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::words::{GroupElement, GroupSpec};

/// A finitely supported function `x : G -> C`, i.e. the group-algebra element
/// `sum_g x(g) lambda_g`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAlgebraElement {
    spec: GroupSpec,
    coeffs: BTreeMap<GroupElement, Complex64>,
}

impl GroupAlgebraElement {
    pub fn zero(spec: GroupSpec) -> Self {
        GroupAlgebraElement {
            spec,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn delta(g: GroupElement) -> Self {
        let spec = g.spec();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(g, Complex64::new(1.0, 0.0));
        GroupAlgebraElement { spec, coeffs }
    }

    /// Sums repeated elements and drops resulting zeros.
    pub fn from_terms<I>(spec: GroupSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, Complex64)>,
    {
        let mut x = Self::zero(spec);
        for (g, c) in terms {
            x.add_term(g, c)?;
        }
        Ok(x)
    }

    /// Parses `word:coefficient` pairs (real coefficients); a test convenience.
    pub fn from_words(spec: GroupSpec, terms: &[(&str, f64)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(w, c)| Ok((GroupElement::parse(spec, w)?, Complex64::new(*c, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(spec, parsed)
    }

    pub fn add_term(&mut self, g: GroupElement, c: Complex64) -> Result<()> {
        if g.spec() != self.spec {
            return Err(Error::usage(format!(
                "element {g} of {} added to an element of {}",
                g.spec(),
                self.spec
            )));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::usage(format!("non-finite coefficient at {g}")));
        }
        let v = self.coeff(&g) + c;
        if v == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&g);
        } else {
            self.coeffs.insert(g, v);
        }
        Ok(())
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn coeff(&self, g: &GroupElement) -> Complex64 {
        self.coeffs.get(g).copied().unwrap_or_default()
    }

    /// The coefficient at the identity, `tau(x) = <x delta_e, delta_e>`.
    pub fn trace(&self) -> Complex64 {
        self.coeff(&self.spec.identity())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupElement, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support_radius(&self) -> u32 {
        self.coeffs.keys().map(GroupElement::length).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(sum_g w(g)^2 |x(g)|^2)^(1/2)`.
    pub fn weighted_l2<F: Fn(&GroupElement) -> f64>(&self, w: F) -> f64 {
        self.coeffs
            .iter()
            .map(|(g, c)| w(g).powi(2) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(g, c)| (g.clone(), c * s))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        GroupAlgebraElement {
            spec: self.spec,
            coeffs,
        }
    }

    /// `x*(g) = conj(x(g^-1))`, so that `lambda(x*) = lambda(x)*`.
    pub fn adjoint(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(g, c)| (g.inverse(), c.conj()))
            .collect();
        GroupAlgebraElement {
            spec: self.spec,
            coeffs,
        }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.coeffs
            .iter()
            .all(|(g, c)| (self.coeff(&g.inverse()).conj() - c).norm() <= tol)
    }

    /// Restriction to the elements satisfying `keep`.
    pub fn restrict<F: Fn(&GroupElement) -> bool>(&self, keep: F) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(g, _)| keep(g))
            .map(|(g, c)| (g.clone(), *c))
            .collect();
        GroupAlgebraElement {
            spec: self.spec,
            coeffs,
        }
    }

    /// Convolution `(x * y)(g) = sum_h x(h) y(h^-1 g)`.
    pub fn convolve(&self, other: &GroupAlgebraElement) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::usage("convolution of elements of different groups"));
        }
        let mut acc: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        for (h, a) in &self.coeffs {
            for (k, b) in &other.coeffs {
                *acc.entry(h * k).or_default() += a * b;
            }
        }
        acc.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(GroupAlgebraElement {
            spec: self.spec,
            coeffs: acc,
        })
    }

    /// Reads the JSON form `{"word": [re, im], ...}`; zero coefficients and
    /// words that reduce to the same element are rejected.
    pub fn from_json(spec: GroupSpec, text: &str) -> Result<Self> {
        let raw: BTreeMap<String, [f64; 2]> =
            serde_json::from_str(text).map_err(|source| Error::Json {
                context: "group algebra element".into(),
                source,
            })?;
        let mut coeffs = BTreeMap::new();
        for (word, [re, im]) in raw {
            let g = GroupElement::parse(spec, &word)?;
            let c = Complex64::new(re, im);
            if c == Complex64::new(0.0, 0.0) {
                return Err(Error::usage(format!("zero coefficient for {word:?}")));
            }
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::usage(format!("non-finite coefficient for {word:?}")));
            }
            if coeffs.insert(g.clone(), c).is_some() {
                return Err(Error::usage(format!("{word:?} repeats the element {g:?}")));
            }
        }
        Ok(GroupAlgebraElement { spec, coeffs })
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, [f64; 2]> = self
            .coeffs
            .iter()
            .map(|(g, c)| (g.to_string(), [c.re, c.im]))
            .collect();
        serde_json::to_string(&map).expect("string keys serialize")
    }
}
