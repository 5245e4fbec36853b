//! Compressed sparse row storage for complex operators.

use crate::{par, C64};
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<C64>,
}

impl SparseOperator {
    /// Assembles from (row, column, value) triplets. Duplicate positions are
    /// summed; exact zeros are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        assert!(dim <= u32::MAX as usize, "dimension exceeds u32 column index");
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r},{c}) out of range {dim}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(c as u32);
                values.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        // drop entries that summed to zero
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((c, v), r) in cols.into_iter().zip(values).zip(rows_of) {
            if v != C64::new(0.0, 0.0) {
                keep_cols.push(c);
                keep_vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, cols: keep_cols, values: keep_vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates the stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.cols[k] as usize, self.values[k]))
        })
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.values[k] * x[self.cols[k] as usize];
        }
        acc
    }

    /// `y = A x`, data-parallel over rows when the `parallel` feature is on.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        par::fill(y, |r| self.row_dot(r, x));
    }

    /// `y = A x` on the calling thread.
    pub fn apply_serial(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        par::fill_serial(y, |r| self.row_dot(r, x));
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest |A_rc − conj(A_cr)| over all stored positions.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, c, v) in self.triplets() {
            let mirror = self.get(c, r);
            worst = worst.max((v - mirror.conj()).norm());
        }
        worst
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.values[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// ⟨x|A|x⟩
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        par::dot(x, &y)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let t = vec![
            (0, 1, C64::new(1.0, 0.0)),
            (0, 1, C64::new(2.0, 0.0)),
            (1, 0, C64::new(3.0, 0.0)),
            (1, 1, C64::new(1.0, 0.0)),
            (1, 1, C64::new(-1.0, 0.0)),
        ];
        let a = SparseOperator::from_triplets(2, t);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), C64::new(3.0, 0.0));
        assert_eq!(a.get(1, 1), C64::new(0.0, 0.0));
        assert!((a.hermiticity_residual() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn apply_matches_dense_and_serial() {
        let n = 9000;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(i as f64 * 0.01, 0.0)));
            if i + 1 < n {
                t.push((i, i + 1, C64::new(0.5, 0.25)));
                t.push((i + 1, i, C64::new(0.5, -0.25)));
            }
        }
        let a = SparseOperator::from_triplets(n, t);
        let x: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), 0.1)).collect();
        let mut y = vec![C64::new(0.0, 0.0); n];
        let mut z = y.clone();
        a.apply(&x, &mut y);
        a.apply_serial(&x, &mut z);
        assert_eq!(y, z);
        let expect = x[4] * C64::new(0.5, -0.25) + x[5] * 0.05 + x[6] * C64::new(0.5, 0.25);
        assert!((y[5] - expect).norm() < 1e-14);
    }
}
