//! Dense real matrices with LU factorisation (partial pivoting).

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    /// Wraps row-major `entries`; every entry must be finite.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        DenseMatrix::new(rows, cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v · A`.
    pub fn left_mul(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::Shape(format!(
                "row vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Packed `PA = LU` factors: unit-lower `L` below the diagonal, `U` on and
/// above it.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    /// `perm[i]` is the row of `A` that ended up in row `i`.
    perm: Vec<usize>,
    parity: f64,
    singular_at: Option<usize>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> f64 {
        self.parity
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// First column whose pivot was exactly zero, if any.
    pub fn singular_at(&self) -> Option<usize> {
        self.singular_at
    }

    pub fn lower(&self) -> DenseMatrix {
        let n = self.n;
        let mut l = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                l.entries[i * n + j] = self.lu[i * n + j];
            }
        }
        l
    }

    pub fn upper(&self) -> DenseMatrix {
        let n = self.n;
        let mut u = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                u.entries[i * n + j] = self.lu[i * n + j];
            }
        }
        u
    }

    pub fn determinant(&self) -> f64 {
        if self.singular_at.is_some() {
            return 0.0;
        }
        let n = self.n;
        (0..n).fold(self.parity, |d, i| d * self.lu[i * n + i])
    }

    /// Solves `A x = b` for a column vector `b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Shape(format!(
                "rhs of length {} for dimension {n}",
                b.len()
            )));
        }
        if let Some(pivot) = self.singular_at {
            return Err(Error::Singular { pivot });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }
}

/// LU factorisation with partial pivoting. A zero pivot does not abort the
/// factorisation; it is recorded in [`LuFactors::singular_at`].
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "LU needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    Ok(lu_factor_in_place(a.rows, a.entries.clone()))
}

pub(crate) fn lu_factor_in_place(n: usize, mut lu: Vec<f64>) -> LuFactors {
    debug_assert_eq!(lu.len(), n * n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut parity = 1.0;
    let mut singular_at = None;

    for k in 0..n {
        let mut p = k;
        let mut best = lu[k * n + k].abs();
        for i in k + 1..n {
            let v = lu[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if p != k {
            let (head, tail) = lu.split_at_mut(p * n);
            head[k * n..(k + 1) * n].swap_with_slice(&mut tail[..n]);
            perm.swap(k, p);
            parity = -parity;
        }
        let pivot = lu[k * n + k];
        if pivot == 0.0 || !pivot.is_finite() {
            singular_at.get_or_insert(k);
            continue;
        }
        let (top, bottom) = lu.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n + k + 1..(k + 1) * n];
        for row in bottom.chunks_exact_mut(n) {
            let factor = row[k] / pivot;
            row[k] = factor;
            if factor != 0.0 {
                for (v, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *v -= factor * u;
                }
            }
        }
    }

    LuFactors {
        n,
        lu,
        perm,
        parity,
        singular_at,
    }
}

/// Solves the row system `x · A = rhs` by factoring `Aᵀ`.
pub fn solve_row_system(rhs: &[f64], a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() || a.rows != rhs.len() {
        return Err(Error::Shape(format!(
            "row system with rhs length {} and {}x{} matrix",
            rhs.len(),
            a.rows,
            a.cols
        )));
    }
    let factors = lu_factor(&a.transpose())?;
    factors.solve(rhs)
}

/// `det(A)` as the signed product of the LU pivots; zero when singular.
pub fn determinant(a: &DenseMatrix) -> Result<f64> {
    Ok(lu_factor(a)?.determinant())
}

/// `scale · ‖A‖_F`.
pub fn scaled_frobenius(a: &DenseMatrix, scale: f64) -> f64 {
    scale * a.frobenius()
}
