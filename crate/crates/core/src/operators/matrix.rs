use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Below this dimension matrices are stored densely.
pub const DENSE_LIMIT: usize = 256;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    /// Row-major `dim * dim` entries.
    Dense(Vec<Complex64>),
    /// Compressed rows; explicit zeros are never stored.
    Sparse {
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<Complex64>,
    },
}

/// A square complex matrix whose basis vectors carry a nonnegative integer
/// level, i.e. an operator on `H = (+)_m H_m` truncated to finitely many
/// basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMatrix {
    dim: usize,
    levels: Vec<u32>,
    storage: Storage,
}

impl GradedMatrix {
    pub fn zeros(levels: Vec<u32>) -> Self {
        Self::from_triplets(levels, std::iter::empty())
    }

    pub fn identity(levels: Vec<u32>) -> Self {
        let n = levels.len();
        Self::from_triplets(levels, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))))
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    /// Dense storage is chosen below [`DENSE_LIMIT`].
    pub fn from_triplets<I>(levels: Vec<u32>, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let dim = levels.len();
        if dim < DENSE_LIMIT {
            let mut data = vec![ZERO; dim * dim];
            for (i, j, v) in triplets {
                assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
                data[i * dim + j] += v;
            }
            return GradedMatrix {
                dim,
                levels,
                storage: Storage::Dense(data),
            };
        }
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = ZERO;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        GradedMatrix {
            dim,
            levels,
            storage: Storage::Sparse {
                row_ptr,
                cols,
                vals,
            },
        }
    }

    pub fn from_dense(levels: Vec<u32>, m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), levels.len(), "level vector must match the dimension");
        assert_eq!(m.ncols(), levels.len(), "matrix must be square");
        let n = levels.len();
        Self::from_triplets(
            levels,
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter_map(|(i, j)| {
                let v = m[(i, j)];
                (v != ZERO).then_some((i, j, v))
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Level of row `i` minus level of column `j`.
    #[inline]
    pub fn level_difference(&self, i: usize, j: usize) -> i64 {
        self.levels[i] as i64 - self.levels[j] as i64
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.dim + j],
            Storage::Sparse {
                row_ptr,
                cols,
                vals,
            } => {
                let r = row_ptr[i]..row_ptr[i + 1];
                match cols[r.clone()].binary_search(&j) {
                    Ok(k) => vals[r.start + k],
                    Err(_) => ZERO,
                }
            }
        }
    }

    /// Nonzero entries as `(row, col, value)`, row by row.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, Complex64)> + '_> {
        match &self.storage {
            Storage::Dense(d) => {
                let n = self.dim;
                Box::new(
                    d.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != ZERO)
                        .map(move |(k, v)| (k / n, k % n, *v)),
                )
            }
            Storage::Sparse {
                row_ptr,
                cols,
                vals,
            } => Box::new((0..self.dim).flat_map(move |i| {
                (row_ptr[i]..row_ptr[i + 1]).map(move |k| (i, cols[k], vals[k]))
            })),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.iter().filter(|v| **v != ZERO).count(),
            Storage::Sparse { vals, .. } => vals.len(),
        }
    }

    /// Rewrites every stored entry as `f(row, col, value)`, keeping the storage.
    pub fn map_entries<F>(&self, mut f: F) -> Self
    where
        F: FnMut(usize, usize, Complex64) -> Complex64,
    {
        let storage = match &self.storage {
            Storage::Dense(d) => {
                let n = self.dim;
                Storage::Dense(
                    d.iter()
                        .enumerate()
                        .map(|(k, &v)| if v == ZERO { ZERO } else { f(k / n, k % n, v) })
                        .collect(),
                )
            }
            Storage::Sparse {
                row_ptr,
                cols,
                vals,
            } => {
                let mut new_ptr = Vec::with_capacity(row_ptr.len());
                let mut new_cols = Vec::with_capacity(cols.len());
                let mut new_vals = Vec::with_capacity(vals.len());
                new_ptr.push(0);
                for i in 0..self.dim {
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        let v = f(i, cols[k], vals[k]);
                        if v != ZERO {
                            new_cols.push(cols[k]);
                            new_vals.push(v);
                        }
                    }
                    new_ptr.push(new_cols.len());
                }
                Storage::Sparse {
                    row_ptr: new_ptr,
                    cols: new_cols,
                    vals: new_vals,
                }
            }
        };
        GradedMatrix {
            dim: self.dim,
            levels: self.levels.clone(),
            storage,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_entries(|_, _, v| v * c)
    }

    /// `self + c * other`; both must share levels.
    pub fn add_scaled(&self, c: Complex64, other: &GradedMatrix) -> Self {
        assert_eq!(self.levels, other.levels, "graded matrices must share levels");
        Self::from_triplets(
            self.levels.clone(),
            self.entries().chain(other.entries().map(|(i, j, v)| (i, j, c * v))),
        )
    }

    pub fn sub(&self, other: &GradedMatrix) -> Self {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    /// `self - c * I`.
    pub fn shift_diagonal(&self, c: Complex64) -> Self {
        Self::from_triplets(
            self.levels.clone(),
            self.entries().chain((0..self.dim).map(|i| (i, i, -c))),
        )
    }

    /// The commutator `[D, A]` with `D = diag(levels)`.
    pub fn dirac_commutator(&self) -> Self {
        self.map_entries(|i, j, v| v * self.level_difference(i, j) as f64)
    }

    /// Level differences that occur among the nonzero entries, ascending.
    pub fn occurring_differences(&self) -> Vec<i64> {
        let mut ks: Vec<i64> = self
            .entries()
            .map(|(i, j, _)| self.level_difference(i, j))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        match &self.storage {
            Storage::Dense(d) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    let row = &d[i * self.dim..(i + 1) * self.dim];
                    *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            Storage::Sparse {
                row_ptr,
                cols,
                vals,
            } => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = (row_ptr[i]..row_ptr[i + 1])
                        .map(|k| vals[k] * x[cols[k]])
                        .sum();
                }
            }
        }
    }

    /// `y = A* x`.
    pub fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.fill(ZERO);
        match &self.storage {
            Storage::Dense(d) => {
                for (i, xi) in x.iter().enumerate() {
                    if *xi == ZERO {
                        continue;
                    }
                    let row = &d[i * self.dim..(i + 1) * self.dim];
                    for (yj, a) in y.iter_mut().zip(row) {
                        *yj += a.conj() * xi;
                    }
                }
            }
            Storage::Sparse {
                row_ptr,
                cols,
                vals,
            } => {
                for (i, xi) in x.iter().enumerate() {
                    for k in row_ptr[i]..row_ptr[i + 1] {
                        y[cols[k]] += vals[k].conj() * xi;
                    }
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.entries()
            .all(|(i, j, v)| (v - self.get(j, i).conj()).norm() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|(_, _, v)| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &GradedMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut diff: HashMap<(usize, usize), Complex64> = HashMap::new();
        for (i, j, v) in self.entries() {
            *diff.entry((i, j)).or_insert(ZERO) += v;
        }
        for (i, j, v) in other.entries() {
            *diff.entry((i, j)).or_insert(ZERO) -= v;
        }
        diff.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max absolute row sum and max absolute column sum.
    pub fn row_col_sums(&self) -> (f64, f64) {
        let mut rows = vec![0.0; self.dim];
        let mut cols = vec![0.0; self.dim];
        for (i, j, v) in self.entries() {
            let a = v.norm();
            rows[i] += a;
            cols[j] += a;
        }
        let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
        (max(rows), max(cols))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dense_and_sparse_agree() {
        let n = DENSE_LIMIT + 3;
        let trip: Vec<_> = (0..n)
            .map(|i| (i, (i * 7 + 1) % n, Complex64::new(i as f64, 1.0)))
            .collect();
        let levels: Vec<u32> = (0..n as u32).map(|i| i % 5).collect();
        let sparse = GradedMatrix::from_triplets(levels.clone(), trip.clone());
        assert!(!sparse.is_dense());
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, i as f64 * 0.1)).collect();
        let mut y = vec![ZERO; n];
        sparse.apply(&x, &mut y);
        let dense = sparse.to_dense();
        let xv = nalgebra::DVector::from_vec(x.clone());
        let yd = &dense * &xv;
        for i in 0..n {
            assert!((y[i] - yd[i]).norm() < 1e-12);
        }
        let mut ya = vec![ZERO; n];
        sparse.apply_adjoint(&x, &mut ya);
        let yad = dense.adjoint() * xv;
        for i in 0..n {
            assert!((ya[i] - yad[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let levels = vec![0; DENSE_LIMIT];
        let m = GradedMatrix::from_triplets(
            levels,
            [(0, 1, c(1.0)), (0, 1, c(2.0)), (2, 2, c(1.0)), (2, 2, c(-1.0))],
        );
        assert_eq!(m.get(0, 1), c(3.0));
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn commutator_with_levels() {
        let m = GradedMatrix::from_triplets(vec![2, 0], [(0, 1, c(1.5)), (1, 0, c(1.0))]);
        let d = m.dirac_commutator();
        assert_eq!(d.get(0, 1), c(3.0));
        assert_eq!(d.get(1, 0), c(-2.0));
        assert_eq!(m.occurring_differences(), vec![-2, 2]);
    }

    #[test]
    fn shift_and_sub() {
        let m = GradedMatrix::identity(vec![0, 1, 1]);
        assert_eq!(m.shift_diagonal(c(1.0)).nnz(), 0);
        assert_eq!(m.sub(&m).nnz(), 0);
        assert_eq!(m.max_abs_diff(&m.scale(2.0)), 1.0);
    }
}
