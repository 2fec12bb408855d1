//! Square polynomial matrices, the composition `B(s)A(s) + D(s)C(s)`,
//! symbolic determinants and pointwise complex evaluation.
//!
//! Symbolic determinants use subset-memoized Laplace expansion (2^n minors,
//! exact over floating coefficients); the stability engine's hot path
//! instead evaluates matrices at `j*omega` and takes a numeric determinant.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::kharitonov::IntervalPolynomial;
use crate::poly::Polynomial;

/// Default cap on `n` for symbolic determinants.
pub const DETERMINANT_DIM_CAP: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix must be square and non-empty (row {row} has length {len}, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("empty matrix")]
    Empty,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("symbolic determinant capped at n <= {cap}, got n = {n}")]
    DimensionCap { n: usize, cap: usize },
}

/// Square matrix of real polynomials, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMatrix {
    n: usize,
    entries: Vec<Polynomial>,
}

impl PolynomialMatrix {
    pub fn new(rows: Vec<Vec<Polynomial>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare { row, len: r.len(), n });
            }
            entries.extend(r);
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Polynomial) -> Self {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { Polynomial::one() } else { Polynomial::zero() })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| Polynomial::zero())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, p: Polynomial) {
        self.entries[i * self.n + j] = p;
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        for col in 0..self.n {
            self.entries.swap(i * self.n + col, j * self.n + col);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(Self::from_fn(self.n, |i, j| self.entry(i, j).add(other.entry(i, j))))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: other.n });
        }
        Ok(Self::from_fn(self.n, |i, k| {
            let mut acc = Polynomial::zero();
            for j in 0..self.n {
                acc = acc.add(&self.entry(i, j).mul(other.entry(j, k)));
            }
            acc
        }))
    }

    /// `B*A + D*C`, the family composition.
    pub fn compose(b: &Self, a: &Self, d: &Self, c: &Self) -> Result<Self, MatrixError> {
        let ba = b.mul(a)?;
        let dc = d.mul(c)?;
        ba.add(&dc)
    }

    /// Exact symbolic determinant by Laplace expansion memoized over column
    /// subsets; `O(2^n * n)` polynomial multiplications.
    pub fn determinant(&self) -> Result<Polynomial, MatrixError> {
        self.determinant_capped(DETERMINANT_DIM_CAP)
    }

    pub fn determinant_capped(&self, cap: usize) -> Result<Polynomial, MatrixError> {
        let n = self.n;
        if n > cap || n > 63 {
            return Err(MatrixError::DimensionCap { n, cap });
        }
        // dp[mask] = determinant of the submatrix formed by the first
        // popcount(mask) rows and the column set `mask`, built by expanding
        // along the last of those rows.
        let full = (1_u64 << n) - 1;
        let mut dp: Vec<Option<Polynomial>> = vec![None; 1 << n];
        dp[0] = Some(Polynomial::one());
        for mask in 1..=full {
            let row = (mask.count_ones() - 1) as usize;
            let mut acc = Polynomial::zero();
            let mut pos = 0;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let minor = dp[(mask & !(1 << col)) as usize]
                    .as_ref()
                    .expect("smaller masks are filled first");
                let term = self.entry(row, col).mul(minor);
                if (row + pos) % 2 == 0 {
                    acc = acc.add(&term);
                } else {
                    acc = acc.sub(&term);
                }
                pos += 1;
            }
            dp[mask as usize] = Some(acc);
        }
        Ok(dp[full as usize].take().unwrap())
    }

    /// Entrywise Horner evaluation.
    pub fn eval(&self, z: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, |i, j| self.entry(i, j).eval(z))
    }

    /// Max entry degree per column; zero entries contribute nothing
    /// (`None` when the whole column is zero).
    pub fn column_degrees(&self) -> Vec<Option<usize>> {
        (0..self.n)
            .map(|j| {
                (0..self.n)
                    .filter(|&i| !self.entry(i, j).is_zero())
                    .map(|i| self.entry(i, j).degree())
                    .max()
            })
            .collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, p| m.max(p.max_abs_coeff()))
    }

    pub fn rows(&self) -> Vec<Vec<Polynomial>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entry(i, j).clone()).collect()).collect()
    }
}

/// Square matrix of interval polynomials: a box family of polynomial
/// matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalPolynomialMatrix {
    n: usize,
    entries: Vec<IntervalPolynomial>,
}

impl IntervalPolynomialMatrix {
    pub fn new(rows: Vec<Vec<IntervalPolynomial>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare { row, len: r.len(), n });
            }
            entries.extend(r);
        }
        Ok(Self { n, entries })
    }

    /// Point family at the given matrix.
    pub fn from_point(m: &PolynomialMatrix) -> Self {
        Self {
            n: m.dim(),
            entries: (0..m.dim() * m.dim())
                .map(|k| IntervalPolynomial::from_point(m.entry(k / m.dim(), k % m.dim())))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &IntervalPolynomial {
        &self.entries[i * self.n + j]
    }

    pub fn center(&self) -> PolynomialMatrix {
        PolynomialMatrix::from_fn(self.n, |i, j| self.entry(i, j).center())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PolynomialMatrix {
        PolynomialMatrix::from_fn(self.n, |i, j| self.entry(i, j).sample(rng))
    }

    /// Number of entries whose box is not a single point.
    pub fn nondegenerate_entries(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_full_point()).count()
    }
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(
            n,
            |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) },
        )
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Self {
        Self::from_fn(rows.len(), |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self::from_fn(self.n, |i, k| (0..self.n).map(|j| self.entry(i, j) * other.entry(j, k)).sum())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self::from_fn(self.n, |i, j| self.entry(i, j) + other.entry(i, j))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_fn(self.n, |i, j| c * self.entry(i, j))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.entry(j, i).conj())
    }

    /// `(M + M^H) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self.entry(i, j) + self.entry(j, i).conj()))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Determinant by Gaussian elimination with partial pivoting; singular
    /// matrices return (numerically) zero.
    pub fn det(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| {
                    a[r1 * n + col].norm().partial_cmp(&a[r2 * n + col].norm()).unwrap()
                })
                .unwrap();
            let pivot = a[pivot_row * n + col];
            if pivot.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                }
                det = -det;
            }
            det *= pivot;
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                if factor.norm() == 0.0 {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[row * n + k] -= factor * v;
                }
            }
        }
        det
    }

    /// Determinant of the top-left `k x k` block.
    pub fn leading_minor(&self, k: usize) -> Complex64 {
        ComplexMatrix::from_fn(k, |i, j| self.entry(i, j)).det()
    }

    /// Inverse by Gauss-Jordan with partial pivoting; `None` when a pivot
    /// falls below `tol` relative to the largest entry.
    pub fn invert(&self, tol: f64) -> Option<Self> {
        let n = self.n;
        let scale = self.max_abs().max(1e-300);
        let mut a = self.entries.clone();
        let mut inv = ComplexMatrix::identity(n).entries;
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| {
                    a[r1 * n + col].norm().partial_cmp(&a[r2 * n + col].norm()).unwrap()
                })
                .unwrap();
            if a[pivot_row * n + col].norm() <= tol * scale {
                return None;
            }
            if pivot_row != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot_row * n + k);
                    inv.swap(col * n + k, pivot_row * n + k);
                }
            }
            let pivot = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= pivot;
                inv[col * n + k] /= pivot;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[row * n + col];
                if factor.norm() == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let av = a[col * n + k];
                    let iv = inv[col * n + k];
                    a[row * n + k] -= factor * av;
                    inv[row * n + k] -= factor * iv;
                }
            }
        }
        Some(Self { n, entries: inv })
    }
}
