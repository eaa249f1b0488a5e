//! Small dense matrices over a generic scalar plus the handful of exact and
//! floating-point routines the rest of the crate needs. Heavy float work
//! (SVD, least squares) goes through nalgebra in the recovery module.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "flat data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn at(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn row_mut(&mut self, r: usize) -> &mut [S] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn col(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for c in 0..self.cols {
                    acc = acc.add(&self.at(r, c).mul(&x[c]));
                }
                acc
            })
            .collect()
    }

    pub fn mat_mul(&self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, rhs.rows, "mat_mul dimension mismatch");
        let mut out: Mat<S> = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k).clone();
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = out.at(r, c).add(&a.mul(rhs.at(k, c)));
                    *out.at_mut(r, c) = v;
                }
            }
        }
        out
    }

    /// Right-multiply by diag(d).
    pub fn scale_cols(&self, d: &[S]) -> Mat<S> {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(r, c) = self.at(r, c).mul(&d[c]);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Mat<f64> {
        self.map(|v| v.to_f64())
    }

    pub fn transpose(&self) -> Mat<S> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        out
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

pub fn sup_norm<S: Scalar>(v: &[S]) -> S {
    let mut best = S::zero();
    for x in v {
        let a = x.abs();
        if best.lt(&a) {
            best = a;
        }
    }
    best
}

pub fn vec_is_zero<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Incremental exact row basis: maintains a reduced set of independent rows.
/// With `S = Rat` decisions are exact; with `S = f64` a pivot is accepted
/// when its magnitude exceeds `pivot_floor`.
pub struct RowBasis<S> {
    dim: usize,
    rows: Vec<Vec<S>>,
    pivots: Vec<usize>,
    pivot_floor: f64,
}

impl<S: Scalar> RowBasis<S> {
    pub fn new(dim: usize) -> Self {
        RowBasis {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
            pivot_floor: 0.0,
        }
    }

    pub fn with_pivot_floor(dim: usize, pivot_floor: f64) -> Self {
        RowBasis {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
            pivot_floor,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    fn reduce(&self, v: &mut [S]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let factor = v[p].div(&row[p]).expect("pivot entry nonzero");
            for c in 0..self.dim {
                v[c] = v[c].sub(&factor.mul(&row[c]));
            }
            // Exact cancellation of the pivot column.
            v[p] = S::zero();
        }
    }

    /// Residual of `v` against the current span.
    pub fn residual(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.dim);
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w
    }

    fn accept_pivot(&self, x: &S) -> bool {
        if S::EXACT {
            !x.is_zero()
        } else {
            x.to_f64().abs() > self.pivot_floor
        }
    }

    /// Insert a row; returns true when it enlarged the span.
    pub fn insert(&mut self, v: &[S]) -> bool {
        let mut w = self.residual(v);
        let pivot = (0..self.dim).find(|&c| self.accept_pivot(&w[c]));
        match pivot {
            None => false,
            Some(p) => {
                // Normalize so the pivot is 1: keeps later reductions cheap.
                let inv = S::one().div(&w[p]).unwrap();
                for c in 0..self.dim {
                    w[c] = w[c].mul(&inv);
                }
                w[p] = S::one();
                self.rows.push(w);
                self.pivots.push(p);
                true
            }
        }
    }

    pub fn contains(&self, v: &[S]) -> bool {
        let w = self.residual(v);
        !(0..self.dim).any(|c| self.accept_pivot(&w[c]))
    }

    /// Exact basis for the orthogonal complement (vectors z with <z, row> = 0
    /// for every stored row). Standard free-column back substitution.
    pub fn complement(&self) -> Vec<Vec<S>> {
        // Build the reduced row echelon form of the stored rows first.
        let mut rref: Vec<Vec<S>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        for row in &self.rows {
            let mut w = row.clone();
            for (r, &p) in rref.iter().zip(&pivots) {
                if w[p].is_zero() {
                    continue;
                }
                let f = w[p].clone();
                for c in 0..self.dim {
                    w[c] = w[c].sub(&f.mul(&r[c]));
                }
                w[p] = S::zero();
            }
            if let Some(p) = (0..self.dim).find(|&c| self.accept_pivot(&w[c])) {
                let inv = S::one().div(&w[p]).unwrap();
                for c in 0..self.dim {
                    w[c] = w[c].mul(&inv);
                }
                w[p] = S::one();
                // Eliminate this pivot from earlier rows for full RREF.
                for (r, _) in rref.iter_mut().zip(&pivots) {
                    if !r[p].is_zero() {
                        let f = r[p].clone();
                        for c in 0..self.dim {
                            r[c] = r[c].sub(&f.mul(&w[c]));
                        }
                        r[p] = S::zero();
                    }
                }
                rref.push(w);
                pivots.push(p);
            }
        }
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.dim).filter(|c| !pivot_set.contains(c)).collect();
        // Nullspace of the row span viewed as a linear map equals the
        // orthogonal complement of the row span.
        let mut out = Vec::with_capacity(free.len());
        for &f in &free {
            let mut z = vec![S::zero(); self.dim];
            z[f] = S::one();
            for (r, &p) in rref.iter().zip(&pivots) {
                z[p] = r[f].neg();
            }
            out.push(z);
        }
        out
    }
}

/// Exact rank of a list of rows.
pub fn rank_of_rows<S: Scalar>(rows: &[Vec<S>], dim: usize) -> usize {
    let mut basis = RowBasis::new(dim);
    for r in rows {
        basis.insert(r);
    }
    basis.rank()
}

// ---------------------------------------------------------------------------
// f64 helpers
// ---------------------------------------------------------------------------

pub fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2_f64(a: &[f64]) -> f64 {
    dot_f64(a, a).sqrt()
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Rows with
/// residual below `tol` are dropped.
pub fn orthonormalize_f64(rows: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for row in rows {
        let mut v = row.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot_f64(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let n = norm2_f64(&v);
        if n > tol {
            for vi in v.iter_mut() {
                *vi /= n;
            }
            basis.push(v);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    #[test]
    fn mat_mul_and_vec() {
        let a = Mat::from_rows(vec![vec![rat(1, 1), rat(2, 1)], vec![rat(0, 1), rat(1, 2)]]);
        let x = vec![rat(3, 1), rat(4, 1)];
        assert_eq!(a.mul_vec(&x), vec![rat(11, 1), rat(2, 1)]);
        let b = Mat::from_rows(vec![vec![rat(1, 1)], vec![rat(1, 1)]]);
        let ab = a.mat_mul(&b);
        assert_eq!(ab.rows(), 2);
        assert_eq!(ab.cols(), 1);
        assert_eq!(*ab.at(0, 0), rat(3, 1));
        assert_eq!(*ab.at(1, 0), rat(1, 2));
    }

    #[test]
    fn row_basis_rank_and_membership() {
        let mut b: RowBasis<Rat> = RowBasis::new(3);
        assert!(b.insert(&[rat(1, 1), rat(0, 1), rat(1, 1)]));
        assert!(b.insert(&[rat(0, 1), rat(1, 1), rat(1, 1)]));
        // Dependent row: sum of the two above.
        assert!(!b.insert(&[rat(1, 1), rat(1, 1), rat(2, 1)]));
        assert_eq!(b.rank(), 2);
        assert!(b.contains(&[rat(2, 1), rat(-1, 1), rat(1, 1)]));
        assert!(!b.contains(&[rat(0, 1), rat(0, 1), rat(1, 1)]));
    }

    #[test]
    fn complement_is_orthogonal_and_has_right_dimension() {
        let mut b: RowBasis<Rat> = RowBasis::new(3);
        b.insert(&[rat(1, 1), rat(0, 1), rat(1, 1)]);
        b.insert(&[rat(0, 1), rat(1, 1), rat(1, 1)]);
        let comp = b.complement();
        assert_eq!(comp.len(), 1);
        for z in &comp {
            for row in b.rows() {
                assert!(dot(z, row).is_zero());
            }
        }
        // The complement of the span {(1,0,1),(0,1,1)} is spanned by (1,1,-1).
        let z = &comp[0];
        let anchor = z[2].clone();
        assert_eq!(z[0].div(&anchor).unwrap(), rat(-1, 1));
        assert_eq!(z[1].div(&anchor).unwrap(), rat(-1, 1));
    }

    #[test]
    fn orthonormalize_produces_orthonormal_rows() {
        let rows = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 1.0], // dependent
        ];
        let q = orthonormalize_f64(&rows, 1e-10);
        assert_eq!(q.len(), 2);
        for i in 0..q.len() {
            for j in 0..q.len() {
                let d = dot_f64(&q[i], &q[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }
}
