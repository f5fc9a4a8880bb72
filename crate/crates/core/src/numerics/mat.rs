use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense real matrix.
///
/// Entries are stored column-major so that the tall-skinny products that
/// dominate the iteration (`n×n` times `n×p`) run over contiguous memory.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[T]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dim(
                "from_row_major",
                format!("{} entries", rows * cols),
                format!("{} entries", entries.len()),
            ));
        }
        Ok(Self::from_fn(rows, cols, |i, j| entries[i * cols + j]))
    }

    /// Convenience constructor for literals; panics on ragged input.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        assert!(
            rows.iter().all(|row| row.as_ref().len() == c),
            "from_rows: ragged input"
        );
        Self::from_fn(r, c, |i, j| rows[i].as_ref()[j])
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major view of the entries.
    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn to_row_major(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn scale_mut(&mut self, s: T) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        self.assert_same_shape(other, "axpy");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn copy_from(&mut self, other: &Self) {
        self.assert_same_shape(other, "copy_from");
        self.data.copy_from_slice(&other.data);
    }

    pub fn trace(&self) -> T {
        self.diag().into_iter().sum()
    }

    /// Frobenius inner product `tr(selfᵀ other)`.
    pub fn dot(&self, other: &Self) -> T {
        self.assert_same_shape(other, "dot");
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    pub fn fro_norm_sq(&self) -> T {
        self.data.iter().map(|&v| v * v).sum()
    }

    pub fn fro_norm(&self) -> T {
        self.fro_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    /// Shape-checked product `self * rhs`.
    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::dim(
                "matmul",
                format!("{} rows on the right", self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        Ok(self.matmul(rhs))
    }

    /// `self * rhs`; panics on shape mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        self.matmul_acc_rows(rhs, 0, &mut out, 0);
        out
    }

    /// `out[o.., :] += self * rhs[r.., :]`, where the row ranges have
    /// `self.cols` and `self.rows` rows respectively.
    pub fn matmul_acc_rows(&self, rhs: &Self, rhs_row: usize, out: &mut Self, out_row: usize) {
        let r = self.rows;
        let inner = self.cols;
        assert!(rhs_row + inner <= rhs.rows, "matmul_acc_rows: rhs rows out of range");
        assert!(out_row + r <= out.rows, "matmul_acc_rows: output rows out of range");
        assert_eq!(rhs.cols, out.cols, "matmul_acc_rows: column counts differ");
        for j in 0..rhs.cols {
            let b_start = j * rhs.rows + rhs_row;
            let b = &rhs.data[b_start..b_start + inner];
            let o_start = j * out.rows + out_row;
            let out_col = &mut out.data[o_start..o_start + r];
            // Four columns of `self` per sweep; left-to-right addition keeps
            // the rounding of accumulating one column at a time.
            let mut k = 0;
            while k + 4 <= inner {
                let (b0, b1, b2, b3) = (b[k], b[k + 1], b[k + 2], b[k + 3]);
                let a = &self.data[k * r..(k + 4) * r];
                let (a0, rest) = a.split_at(r);
                let (a1, rest) = rest.split_at(r);
                let (a2, a3) = rest.split_at(r);
                for ((((o, &x0), &x1), &x2), &x3) in out_col.iter_mut().zip(a0).zip(a1).zip(a2).zip(a3) {
                    *o = *o + x0 * b0 + x1 * b1 + x2 * b2 + x3 * b3;
                }
                k += 4;
            }
            while k < inner {
                let bk = b[k];
                for (o, &x) in out_col.iter_mut().zip(&self.data[k * r..(k + 1) * r]) {
                    *o += x * bk;
                }
                k += 1;
            }
        }
    }

    /// `selfᵀ * rhs` without forming the transpose.
    pub fn tr_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "tr_matmul: row counts differ");
        Self::from_fn(self.cols, rhs.cols, |i, j| {
            self.col(i).iter().zip(rhs.col(j)).map(|(&a, &b)| a * b).sum()
        })
    }

    /// `self * rhsᵀ` without forming the transpose.
    pub fn matmul_tr(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "matmul_tr: column counts differ");
        let mut out = Self::zeros(self.rows, rhs.rows);
        let r = self.rows;
        for k in 0..self.cols {
            let a_col = self.col(k);
            for j in 0..rhs.rows {
                let b = rhs.data[k * rhs.rows + j];
                if b == T::zero() {
                    continue;
                }
                let out_col = &mut out.data[j * r..(j + 1) * r];
                for (o, &a) in out_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Columns `start..end` as a new matrix.
    pub fn col_block(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.cols, "col_block out of range");
        Mat {
            rows: self.rows,
            cols: end - start,
            data: self.data[start * self.rows..end * self.rows].to_vec(),
        }
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(
            r0 + block.rows <= self.rows && c0 + block.cols <= self.cols,
            "set_block out of range"
        );
        for j in 0..block.cols {
            for i in 0..block.rows {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Horizontal concatenation.
    pub fn hcat(blocks: &[Self]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if let Some(bad) = blocks.iter().find(|b| b.rows != rows) {
            return Err(Error::dim("hcat", format!("{rows} rows"), format!("{} rows", bad.rows)));
        }
        let mut data = Vec::new();
        let mut cols = 0;
        for b in blocks {
            data.extend_from_slice(&b.data);
            cols += b.cols;
        }
        Ok(Mat { rows, cols, data })
    }

    /// Vertical concatenation.
    pub fn vcat(blocks: &[Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if let Some(bad) = blocks.iter().find(|b| b.cols != cols) {
            return Err(Error::dim("vcat", format!("{cols} cols"), format!("{} cols", bad.cols)));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            out.set_block(r0, 0, b);
            r0 += b.rows;
        }
        Ok(out)
    }

    /// Entrywise mean of equally shaped matrices, accumulated in slice order.
    pub fn mean_of<'a>(mats: impl IntoIterator<Item = &'a Self>) -> Self {
        let mut iter = mats.into_iter();
        let first = iter.next().expect("mean_of: empty input");
        let mut acc = first.clone();
        let mut count = 1usize;
        for m in iter {
            acc += m;
            count += 1;
        }
        acc.scale_mut(T::one() / T::of(count as f64));
        acc
    }

    pub fn cast<U: Scalar>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| U::of(v.as_f64())).collect(),
        }
    }

    fn assert_same_shape(&self, other: &Self, op: &str) {
        assert_eq!(
            self.shape(),
            other.shape(),
            "{op}: shapes {:?} and {:?} differ",
            self.shape(),
            other.shape()
        );
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl<T: Scalar> AddAssign<&Mat<T>> for Mat<T> {
    fn add_assign(&mut self, rhs: &Mat<T>) {
        self.assert_same_shape(rhs, "add");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<T: Scalar> SubAssign<&Mat<T>> for Mat<T> {
    fn sub_assign(&mut self, rhs: &Mat<T>) {
        self.assert_same_shape(rhs, "sub");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl<T: Scalar> Add for &Mat<T> {
    type Output = Mat<T>;

    fn add(self, rhs: &Mat<T>) -> Mat<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Scalar> Sub for &Mat<T> {
    type Output = Mat<T>;

    fn sub(self, rhs: &Mat<T>) -> Mat<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Scalar> Mul for &Mat<T> {
    type Output = Mat<T>;

    fn mul(self, rhs: &Mat<T>) -> Mat<T> {
        self.matmul(rhs)
    }
}

impl<T: Scalar> Neg for &Mat<T> {
    type Output = Mat<T>;

    fn neg(self) -> Mat<T> {
        self.map(|v| -v)
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_agree_with_explicit_transposes() {
        let a = Mat::<f64>::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let b = Mat::<f64>::from_rows(&[[1.0, 0.0], [2.0, 1.0], [0.0, -1.0]]);
        let ab = a.matmul(&b);
        assert_eq!(ab, Mat::from_rows(&[[5.0, -1.0], [14.0, -1.0]]));
        assert_eq!(a.transpose().tr_matmul(&b), ab);
        assert_eq!(a.matmul_tr(&b.transpose()), ab);
        assert!(a.try_matmul(&a).is_err());
    }

    #[test]
    fn row_major_round_trip_and_blocks() {
        let m = Mat::<f64>::from_row_major(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(m[(1, 0)], 4.0);
        assert_eq!(m.to_row_major(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let left = m.col_block(0, 1);
        let right = m.col_block(1, 3);
        assert_eq!(Mat::hcat(&[left, right]).unwrap(), m);
        assert_eq!(Mat::vcat(&[m.block(0, 0, 1, 3), m.block(1, 0, 1, 3)]).unwrap(), m);
        assert!(Mat::<f64>::from_row_major(2, 2, &[1.0]).is_err());
    }

    #[test]
    fn mean_and_norms() {
        let a = Mat::<f64>::from_rows(&[[3.0, 4.0]]);
        let b = Mat::<f64>::from_rows(&[[1.0, 0.0]]);
        assert_eq!(Mat::mean_of([&a, &b]), Mat::from_rows(&[[2.0, 2.0]]));
        assert_eq!(a.fro_norm(), 5.0);
        assert_eq!(a.dot(&b), 3.0);
        assert_eq!(Mat::<f64>::identity(3).trace(), 3.0);
    }
}
