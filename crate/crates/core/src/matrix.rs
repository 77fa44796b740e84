//! Dense row-major matrices over GF(q).

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Gf;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Gf,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl std::hash::Hash for Matrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}x{} over {}]", self.rows, self.cols, self.field)?;
        f.debug_list().entries(self.row_iter()).finish()
    }
}

/// Result of row reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    /// RREF with zero rows removed.
    pub basis: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(field: &Gf, rows: usize, cols: usize) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &Gf, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from row-major data, validating every entry.
    pub fn from_vec(field: &Gf, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} entries given for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| v >= field.q()) {
            return Err(Error::usage(format!(
                "entry {bad} out of range for {field}"
            )));
        }
        Ok(Self {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from nested rows; `cols` disambiguates the zero-row case.
    pub fn from_rows(field: &Gf, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::dim(format!(
                "row of length {} in a matrix with {cols} columns",
                r.len()
            )));
        }
        Self::from_vec(field, rows.len(), cols, rows.concat())
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!(v < self.field.q());
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[u32]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.row_iter().map(<[u32]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn check_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.to_string(),
                right: other.field.to_string(),
            });
        }
        Ok(())
    }

    /// Submatrix made of the listed rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            field: self.field.clone(),
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for r in 0..self.rows {
            data.extend(idx.iter().map(|&c| self.get(r, c)));
        }
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mat_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o = f.add(*o, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    /// Product of a coefficient vector with this matrix: `sum_i v_i * row_i`.
    pub fn combine_rows(&self, coeffs: &[u32]) -> Result<Vec<u32>> {
        if coeffs.len() != self.rows {
            return Err(Error::dim(format!(
                "{} coefficients for {} rows",
                coeffs.len(),
                self.rows
            )));
        }
        let f = &self.field;
        let mut out = vec![0u32; self.cols];
        for (r, &a) in coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(r)) {
                *o = f.add(*o, f.mul(a, b));
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector `v`; `v` must have `cols` entries.
    pub fn combine_cols(&self, v: &[u32]) -> Vec<u32> {
        let f = &self.field;
        self.row_iter()
            .map(|r| {
                r.iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dim("matrix sum needs equal shapes"));
        }
        let f = &self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn scale(&self, a: u32) -> Matrix {
        let f = &self.field;
        Matrix {
            data: self.data.iter().map(|&x| f.mul(a, x)).collect(),
            ..self.clone()
        }
    }

    /// Vertical concatenation.
    pub fn stack_rows(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(Error::dim(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Horizontal concatenation.
    pub fn stack_cols(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(Error::dim(
                "horizontal concatenation needs equal row counts",
            ));
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + other.cols));
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    /// In-place reduction to RREF; returns the pivot columns. Pivots are
    /// chosen as the leftmost nonzero column, topmost candidate row, and
    /// normalized to 1.
    fn reduce_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..cols {
            if lead == self.rows {
                break;
            }
            let Some(pr) = (lead..self.rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            if pr != lead {
                for k in 0..cols {
                    self.data.swap(pr * cols + k, lead * cols + k);
                }
            }
            let inv = f.inv(self.get(lead, c)).expect("pivot is nonzero");
            if inv != 1 {
                for k in c..cols {
                    let v = self.data[lead * cols + k];
                    self.data[lead * cols + k] = f.mul(inv, v);
                }
            }
            for r in 0..self.rows {
                if r == lead {
                    continue;
                }
                let factor = self.get(r, c);
                if factor == 0 {
                    continue;
                }
                let neg = f.neg(factor);
                for k in c..cols {
                    let pv = self.data[lead * cols + k];
                    if pv != 0 {
                        let v = self.data[r * cols + k];
                        self.data[r * cols + k] = f.add(v, f.mul(neg, pv));
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        pivots
    }

    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.reduce_in_place();
        let rank = pivots.len();
        m.data.truncate(rank * m.cols);
        m.rows = rank;
        Rref {
            basis: m,
            rank,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.reduce_in_place().len()
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if self.rows != self.cols {
            return Err(Error::dim("only square matrices are invertible"));
        }
        let n = self.rows;
        let mut aug = self.stack_cols(&Matrix::identity(&self.field, n))?;
        let pivots = aug.reduce_in_place();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Domain("matrix is singular".into()));
        }
        let right: Vec<usize> = (n..2 * n).collect();
        Ok(aug.select_cols(&right))
    }

    /// Basis (as rows) of `{x : self * x = 0}`.
    pub fn null_space(&self) -> Matrix {
        let f = &self.field;
        let r = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !r.pivots.contains(c)).collect();
        let mut out = Matrix::zeros(f, free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            out.set(i, fc, 1);
            for (pr, &pc) in r.pivots.iter().enumerate() {
                out.set(i, pc, f.neg(r.basis.get(pr, fc)));
            }
        }
        out
    }

    /// dim(rowspace(A) ∩ rowspace(B)) = rank A + rank B - rank [A; B].
    pub fn intersection_dim(&self, other: &Matrix) -> Result<usize> {
        let joint = self.stack_rows(other)?;
        Ok(self.rank() + other.rank() - joint.rank())
    }

    pub fn random<R: Rng + ?Sized>(field: &Gf, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        let data = (0..rows * cols).map(|_| field.sample(rng)).collect();
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    /// Uniform over full-row-rank `rows x cols` matrices by rejection.
    pub fn random_full_rank<R: Rng + ?Sized>(
        field: &Gf,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Result<Matrix> {
        Ok(Self::random_full_rank_counted(field, rows, cols, rng)?.0)
    }

    /// As [`Matrix::random_full_rank`], also returning the number of draws.
    pub fn random_full_rank_counted<R: Rng + ?Sized>(
        field: &Gf,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Result<(Matrix, usize)> {
        if rows > cols {
            return Err(Error::usage(format!(
                "no {rows}x{cols} matrix has full row rank"
            )));
        }
        let mut draws = 0;
        loop {
            draws += 1;
            let m = Self::random(field, rows, cols, rng);
            if m.rank() == rows {
                return Ok((m, draws));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u32) -> Gf {
        Gf::of_order(q).unwrap()
    }

    fn m(f: &Gf, rows: &[&[u32]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<u32>> = rows.iter().map(|r| r.to_vec()).collect();
        Matrix::from_rows(f, cols, &rows).unwrap()
    }

    #[test]
    fn rref_examples() {
        let f2 = gf(2);
        let r = Matrix::identity(&f2, 3).rref();
        assert_eq!(r.basis, Matrix::identity(&f2, 3));
        assert_eq!((r.rank, r.pivots), (3, vec![0, 1, 2]));

        let r = m(&f2, &[&[1, 1], &[1, 1]]).rref();
        assert_eq!(r.basis, m(&f2, &[&[1, 1]]));
        assert_eq!((r.rank, r.pivots), (1, vec![0]));

        let f3 = gf(3);
        let r = m(&f3, &[&[0, 2], &[1, 1]]).rref();
        assert_eq!(r.basis, Matrix::identity(&f3, 2));
        assert_eq!((r.rank, r.pivots), (2, vec![0, 1]));
    }

    #[test]
    fn zero_row_matrices() {
        let f = gf(2);
        let empty = Matrix::zeros(&f, 0, 4);
        let r = empty.rref();
        assert_eq!(r.rank, 0);
        assert_eq!(r.basis.cols(), 4);
        let a = m(&f, &[&[1, 0, 1, 1]]);
        assert_eq!(a.stack_rows(&empty).unwrap(), a);
    }

    #[test]
    fn mat_mul_examples() {
        let f2 = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Matrix::random(&f2, 3, 5, &mut rng);
        assert_eq!(Matrix::identity(&f2, 3).mat_mul(&x).unwrap(), x);
        assert!(Matrix::zeros(&f2, 2, 3).mat_mul(&x).unwrap().is_zero());
        let a = m(&f2, &[&[1, 1]]);
        assert_eq!(a.mat_mul(&Matrix::identity(&f2, 2)).unwrap(), a);
        assert!(matches!(x.mat_mul(&x), Err(Error::Dimension(_))));
        assert!(matches!(
            a.mat_mul(&Matrix::identity(&gf(3), 2)),
            Err(Error::FieldMismatch { .. })
        ));
    }

    #[test]
    fn stack_and_intersection() {
        let f2 = gf(2);
        let a = m(&f2, &[&[1, 0, 0, 0]]);
        let b = m(&f2, &[&[0, 1, 0, 0]]);
        assert_eq!(a.stack_rows(&b).unwrap().rows(), 2);
        assert!(a.stack_rows(&Matrix::zeros(&f2, 1, 3)).is_err());

        let a = m(&f2, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let b = m(&f2, &[&[0, 1, 0, 0], &[0, 0, 1, 0]]);
        assert_eq!(a.intersection_dim(&b).unwrap(), 1);
        assert_eq!(a.intersection_dim(&a).unwrap(), 2);
        let c = m(&f2, &[&[0, 0, 1, 0], &[0, 0, 0, 1]]);
        assert_eq!(a.intersection_dim(&c).unwrap(), 0);
        assert!(a.intersection_dim(&Matrix::zeros(&f2, 1, 3)).is_err());
    }

    #[test]
    fn inverse_and_null_space() {
        let f = gf(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Matrix::random_full_rank(&f, 4, 4, &mut rng).unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.mat_mul(&inv).unwrap(), Matrix::identity(&f, 4));

        let h = Matrix::random(&f, 2, 5, &mut rng);
        let ns = h.null_space();
        assert_eq!(ns.rows(), 5 - h.rank());
        assert!(h.mat_mul(&ns.transpose()).unwrap().is_zero());
        assert!(Matrix::zeros(&f, 2, 2).inverse().is_err());
    }

    #[test]
    fn full_rank_sampling() {
        let f2 = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            assert_eq!(
                Matrix::random_full_rank(&f2, 2, 2, &mut rng)
                    .unwrap()
                    .rank(),
                2
            );
        }
        assert!(Matrix::random_full_rank(&f2, 3, 2, &mut rng).is_err());

        // 6 of the 16 binary 2x2 matrices are invertible.
        let draws: usize = (0..20_000)
            .map(|_| {
                Matrix::random_full_rank_counted(&f2, 2, 2, &mut rng)
                    .unwrap()
                    .1
            })
            .sum();
        let rate = 20_000.0 / draws as f64;
        assert!((rate - 6.0 / 16.0).abs() < 0.01, "acceptance rate {rate}");

        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(
            Matrix::random_full_rank(&f2, 3, 6, &mut r1).unwrap(),
            Matrix::random_full_rank(&f2, 3, 6, &mut r2).unwrap()
        );
    }

    #[test]
    fn rref_idempotent_on_many_matrices() {
        for q in [2, 3, 4] {
            let f = gf(q);
            let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
            for _ in 0..1000 {
                let rows = rng.gen_range(0..5);
                let cols = rng.gen_range(1..6);
                let a = Matrix::random(&f, rows, cols, &mut rng);
                let once = a.rref().basis;
                assert_eq!(once.rref().basis, once);
            }
        }
    }

    #[test]
    fn stacking_a_matrix_on_itself_keeps_rank() {
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let a = Matrix::random(&f, 3, 4, &mut rng);
            assert_eq!(a.stack_rows(&a).unwrap().rank(), a.rank());
        }
    }

    /// All vectors of the row space, as base-q integers.
    fn span(a: &Matrix) -> std::collections::BTreeSet<Vec<u32>> {
        let f = a.field();
        let q = f.q() as usize;
        let mut out = std::collections::BTreeSet::new();
        for idx in 0..q.pow(a.rows() as u32) {
            let coeffs: Vec<u32> = (0..a.rows())
                .map(|i| ((idx / q.pow(i as u32)) % q) as u32)
                .collect();
            out.insert(a.combine_rows(&coeffs).unwrap());
        }
        out
    }

    proptest! {
        #[test]
        fn rank_is_subadditive(seed in any::<u64>(), q in prop::sample::select(vec![2u32, 3, 4, 5])) {
            let f = gf(q);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Matrix::random(&f, rng.gen_range(0..4), 5, &mut rng);
            let b = Matrix::random(&f, rng.gen_range(0..4), 5, &mut rng);
            prop_assert!(a.stack_rows(&b).unwrap().rank() <= a.rank() + b.rank());
        }

        #[test]
        fn intersection_dim_matches_enumeration(seed in any::<u64>(), q in prop::sample::select(vec![2u32, 3]), cols in 1usize..=4) {
            let f = gf(q);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Matrix::random(&f, rng.gen_range(0..=3), cols, &mut rng);
            let b = Matrix::random(&f, rng.gen_range(0..=3), cols, &mut rng);
            let common = span(&a).intersection(&span(&b)).count();
            let dim = (common as f64).log(q as f64).round() as usize;
            prop_assert_eq!(q.pow(dim as u32) as usize, common);
            prop_assert_eq!(a.intersection_dim(&b).unwrap(), dim);
        }

        #[test]
        fn rref_preserves_row_space(seed in any::<u64>()) {
            let f = gf(3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = Matrix::random(&f, 3, 4, &mut rng);
            prop_assert_eq!(span(&a), span(&a.rref().basis));
        }
    }
}
