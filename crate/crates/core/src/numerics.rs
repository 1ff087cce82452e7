//! Small dense linear-algebra kernel in `f64`.
//!
//! Everything here is a pure function over immutable values. [`Matrix`] and
//! [`Vector`] reject non-finite entries at construction.

use crate::error::{Error, Result};

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Dense vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidValue(format!(
            "non-finite entry {} at index {i}",
            data[i]
        ))),
        None => Ok(()),
    }
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        check_finite(&data)?;
        Ok(Vector(data))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scaled(&self, alpha: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * alpha).collect())
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact(0) panics; a zero-column matrix has no meaningful rows
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Contiguous block of rows `[start, start + len)`.
    pub fn row_block(&self, start: usize, len: usize) -> Matrix {
        let lo = start * self.cols;
        let hi = (start + len) * self.cols;
        Matrix {
            rows: len,
            cols: self.cols,
            data: self.data[lo..hi].to_vec(),
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack<'a, I>(blocks: I) -> Result<Matrix>
    where
        I: IntoIterator<Item = &'a Matrix>,
    {
        let mut iter = blocks.into_iter().peekable();
        let cols = match iter.peek() {
            Some(m) => m.cols,
            None => return Err(Error::EmptyInput),
        };
        let mut rows = 0;
        let mut data = Vec::new();
        for m in iter {
            if m.cols != cols {
                return Err(Error::shape(format!(
                    "cannot stack {} columns onto {cols}",
                    m.cols
                )));
            }
            rows += m.rows;
            data.extend_from_slice(&m.data);
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn scaled(&self, alpha: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &Matrix, beta: f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Adds `alpha * other` in place.
    pub fn add_scaled(&mut self, other: &Matrix, alpha: f64) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity of two slices, clamped to `[-1, 1]`.
///
/// Returns 0 when either side has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

pub fn cosine_sim(a: &Vector, b: &Vector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::shape(format!(
            "cosine of dims {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(cosine(&a.0, &b.0))
}

/// Component-wise mean over the rows of `m`.
pub fn row_mean(m: &Matrix) -> Result<Vector> {
    if m.rows == 0 {
        return Err(Error::EmptyInput);
    }
    let mut acc = vec![0.0; m.cols];
    for row in m.row_iter() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let inv = 1.0 / m.rows as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    Ok(Vector(acc))
}

/// Row-wise softmax, stabilized by subtracting each row's maximum.
pub fn softmax_rows(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    if m.cols == 0 {
        return out;
    }
    for row in out.data.chunks_exact_mut(m.cols) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::shape(format!(
            "matmul {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += aik * bv;
            }
        }
    }
    Ok(out)
}

/// `a * bᵀ` without materializing the transpose.
pub fn matmul_transposed(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.cols {
        return Err(Error::shape(format!(
            "matmul {}x{} by ({}x{})ᵀ",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut data = Vec::with_capacity(a.rows * b.rows);
    for ar in a.row_iter() {
        for br in b.row_iter() {
            data.push(dot(ar, br));
        }
    }
    Ok(Matrix {
        rows: a.rows,
        cols: b.rows,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(data: &[f64]) -> Vector {
        Vector::new(data.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_sim(&v(&[1., 0.]), &v(&[1., 0.])).unwrap(), 1.0);
        assert_eq!(cosine_sim(&v(&[1., 0.]), &v(&[-1., 0.])).unwrap(), -1.0);
        assert_eq!(cosine_sim(&v(&[1., 0.]), &v(&[0., 1.])).unwrap(), 0.0);
    }

    #[test]
    fn cosine_zero_vector_is_zero() {
        assert_eq!(cosine_sim(&v(&[0., 0.]), &v(&[3., 1.])).unwrap(), 0.0);
        assert_eq!(cosine_sim(&v(&[0., 0.]), &v(&[0., 0.])).unwrap(), 0.0);
    }

    #[test]
    fn cosine_dim_mismatch() {
        assert!(cosine_sim(&v(&[1., 0.]), &v(&[1., 0., 0.])).is_err());
    }

    #[test]
    fn row_mean_examples() {
        let m = Matrix::from_rows(&[[1., 2.], [3., 4.]]).unwrap();
        assert_eq!(row_mean(&m).unwrap().as_slice(), &[2., 3.]);
        let m = Matrix::from_rows(&[[5., 6.]]).unwrap();
        assert_eq!(row_mean(&m).unwrap().as_slice(), &[5., 6.]);
        let m = Matrix::from_rows(&[[1., 1.], [-1., -1.]]).unwrap();
        assert_eq!(row_mean(&m).unwrap().as_slice(), &[0., 0.]);
    }

    #[test]
    fn row_mean_empty() {
        let m = Matrix::zeros(0, 3);
        assert!(matches!(row_mean(&m), Err(Error::EmptyInput)));
    }

    #[test]
    fn softmax_examples() {
        let s = softmax_rows(&Matrix::from_rows(&[[0., 0.]]).unwrap());
        assert_eq!(s.as_slice(), &[0.5, 0.5]);
        let s = softmax_rows(&Matrix::from_rows(&[[1000., 1000.]]).unwrap());
        assert_eq!(s.as_slice(), &[0.5, 0.5]);
        let s = softmax_rows(&Matrix::from_rows(&[[0., 3f64.ln()]]).unwrap());
        assert!((s.get(0, 0) - 0.25).abs() < 1e-12);
        assert!((s.get(0, 1) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn matmul_examples() {
        let m = Matrix::from_rows(&[[1., 2.], [3., 4.]]).unwrap();
        assert_eq!(matmul(&Matrix::identity(2), &m).unwrap(), m);
        assert_eq!(
            matmul(&Matrix::zeros(2, 2), &m).unwrap(),
            Matrix::zeros(2, 2)
        );
        let ones = Matrix::from_rows(&[[1.], [1.]]).unwrap();
        assert_eq!(matmul(&m, &ones).unwrap().as_slice(), &[3., 7.]);
        assert!(matmul(&ones, &ones).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Matrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    fn naive_matmul(a: &Matrix, b: &Matrix) -> Vec<f64> {
        let mut out = vec![0.0; a.rows() * b.cols()];
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                for k in 0..a.cols() {
                    out[i * b.cols() + j] += a.get(i, k) * b.get(k, j);
                }
            }
        }
        out
    }

    fn mat8() -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-10.0f64..10.0, 64).prop_map(|d| Matrix::new(8, 8, d).unwrap())
    }

    proptest! {
        #[test]
        fn cosine_self_is_one(a in prop::collection::vec(-100.0f64..100.0, 1..16)) {
            prop_assume!(norm(&a) > 1e-6);
            prop_assert!((cosine(&a, &a) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn cosine_scale_invariant(
            ab in (1usize..16).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )),
            alpha in 1e-3f64..1e3,
        ) {
            let (a, b) = ab;
            let scaled: Vec<f64> = a.iter().map(|x| x * alpha).collect();
            prop_assert!((cosine(&scaled, &b) - cosine(&a, &b)).abs() < 1e-9);
        }

        #[test]
        fn softmax_rows_sum_to_one(d in prop::collection::vec(-50.0f64..50.0, 24)) {
            let s = softmax_rows(&Matrix::new(4, 6, d).unwrap());
            for row in s.row_iter() {
                prop_assert!(row.iter().all(|&p| p >= 0.0));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            }
        }

        #[test]
        fn matmul_matches_triple_loop(a in mat8(), b in mat8()) {
            let fast = matmul(&a, &b).unwrap();
            for (x, y) in fast.as_slice().iter().zip(naive_matmul(&a, &b)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            let t = matmul_transposed(&a, &b.transpose()).unwrap();
            for (x, y) in t.as_slice().iter().zip(fast.as_slice()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
