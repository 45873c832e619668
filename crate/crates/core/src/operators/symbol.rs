//! Exact norm oracle for `Z`: `||lambda(x)||` equals the sup norm of the
//! trigonometric polynomial `f(t) = sum_n x(n) e^{i n t}` on the circle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::element::GroupAlgebraElement;
use crate::error::{Error, Result};
use crate::words::GroupSpec;

pub const DEFAULT_SYMBOL_TOL: f64 = 1e-7;
const INITIAL_CELLS: usize = 4096;
const MAX_EVALUATIONS: usize = 4_000_000;

/// Enclosure `lower <= sup_t |f(t)| <= upper`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolBracket {
    pub lower: f64,
    pub upper: f64,
    /// Grid point attaining `lower`.
    pub argmax: f64,
}

impl SymbolBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

struct Cell {
    upper_sq: f64,
    center: f64,
    half_width: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper_sq.total_cmp(&other.upper_sq) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper_sq.total_cmp(&other.upper_sq)
    }
}

pub fn z_symbol_norm(x: &GroupAlgebraElement) -> Result<SymbolBracket> {
    z_symbol_norm_with_tol(x, DEFAULT_SYMBOL_TOL)
}

/// Branch and bound over the circle. On a cell of half-width `r` centred at
/// `m`, `|f|^2 <= g(m) + |g'(m)| r + K r^2 / 2` with `g = |f|^2` and
/// `K = 2 (M1^2 + M0 M2)` bounding `|g''|`, where `Mj = sum |n|^j |x(n)|`.
pub fn z_symbol_norm_with_tol(x: &GroupAlgebraElement, tol: f64) -> Result<SymbolBracket> {
    if x.spec() != GroupSpec::FreeAbelian(1) {
        return Err(Error::usage(format!(
            "the symbol oracle needs an element of z1, got {}",
            x.spec()
        )));
    }
    let terms: Vec<(f64, Complex64)> = x
        .terms()
        .map(|(g, c)| (g.vector().expect("abelian")[0] as f64, *c))
        .collect();
    if terms.is_empty() {
        return Ok(SymbolBracket {
            lower: 0.0,
            upper: 0.0,
            argmax: 0.0,
        });
    }
    let moment = |j: i32| -> f64 { terms.iter().map(|(n, c)| n.abs().powi(j) * c.norm()).sum() };
    let (m0, m1, m2) = (moment(0), moment(1), moment(2));
    let curvature = 2.0 * (m1 * m1 + m0 * m2);
    // evaluation error of f, generously bounded
    let round = 32.0 * f64::EPSILON * m0 * (terms.len() as f64 + 1.0);

    let eval = |t: f64| -> (f64, f64) {
        let mut f = Complex64::new(0.0, 0.0);
        let mut df = Complex64::new(0.0, 0.0);
        for (n, c) in &terms {
            let e = Complex64::from_polar(1.0, n * t) * c;
            f += e;
            df += Complex64::new(0.0, *n) * e;
        }
        (f.norm_sqr(), 2.0 * (f.conj() * df).re)
    };
    let cell_bound = |g: f64, dg: f64, r: f64| g + dg.abs() * r + 0.5 * curvature * r * r;

    let mut heap = BinaryHeap::with_capacity(2 * INITIAL_CELLS);
    let mut lower_sq = 0.0f64;
    let mut argmax = 0.0;
    let r0 = PI / INITIAL_CELLS as f64;
    for i in 0..INITIAL_CELLS {
        let center = -PI + (2 * i + 1) as f64 * r0;
        let (g, dg) = eval(center);
        if g > lower_sq {
            lower_sq = g;
            argmax = center;
        }
        heap.push(Cell {
            upper_sq: cell_bound(g, dg, r0),
            center,
            half_width: r0,
        });
    }
    let mut evaluations = INITIAL_CELLS;
    loop {
        let top = heap.pop().expect("cells remain");
        let upper = top.upper_sq.sqrt() + round;
        let lower = lower_sq.sqrt();
        if upper - lower <= tol || evaluations >= MAX_EVALUATIONS {
            return Ok(SymbolBracket {
                lower: (lower - round).max(0.0),
                upper,
                argmax,
            });
        }
        let r = 0.5 * top.half_width;
        for center in [top.center - r, top.center + r] {
            let (g, dg) = eval(center);
            evaluations += 1;
            if g > lower_sq {
                lower_sq = g;
                argmax = center;
            }
            heap.push(Cell {
                upper_sq: cell_bound(g, dg, r),
                center,
                half_width: r,
            });
        }
    }
}
