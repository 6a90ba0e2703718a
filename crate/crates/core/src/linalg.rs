//! Dense exact linear algebra over a prime field `F_p`.
//!
//! All decompositions are pivot-canonical: the same input always yields the
//! same reduced echelon form, the same pivot columns, and therefore the same
//! kernel bases and cokernel projections, bit for bit. Downstream reports
//! rely on that determinism.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prime field descriptor. The modulus must be prime and below `2^31` so that
/// products of residues fit in a `u64`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Fp {
    p: u64,
}

impl Fp {
    pub const DEFAULT_CHARACTERISTIC: u64 = 101;

    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 31 {
            return Err(Error::Invalid(format!("field characteristic {p} is too large")));
        }
        if !is_prime(p) {
            return Err(Error::Invalid(format!("field characteristic {p} is not prime")));
        }
        Ok(Fp { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce_i64(&self, x: i64) -> u64 {
        let m = self.p as i64;
        (((x % m) + m) % m) as u64
    }

    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a % self.p) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.p) * (b % self.p) % self.p
    }

    /// Multiplicative inverse of a nonzero residue, by Fermat's little theorem.
    pub fn inv(&self, a: u64) -> u64 {
        let a = a % self.p;
        assert!(a != 0, "inverse of zero in F_{}", self.p);
        self.pow(a, self.p - 2)
    }

    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            exp >>= 1;
        }
        acc
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Row-major dense matrix over `F_p`. Zero rows or columns are legal; a
/// `0 x n` or `n x 0` matrix is the unique map to or from the zero space.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Fp,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl Matrix {
    pub fn zero(field: Fp, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(field: Fp, n: usize) -> Self {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: Fp, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Invalid("ragged rows in matrix literal".into()));
        }
        let mut m = Matrix::zero(field, r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, field.reduce_i64(x));
            }
        }
        Ok(m)
    }

    pub fn from_residue_rows(field: Fp, rows: &[Vec<u64>]) -> Result<Self> {
        let signed: Vec<Vec<i64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| (x % field.modulus()) as i64).collect())
            .collect();
        Matrix::from_rows(field, &signed)
    }

    pub fn from_fn(field: Fp, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut m = Matrix::zero(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, field.reduce(f(i, j)));
            }
        }
        m
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j] = v % self.field.modulus();
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|i| self.entries[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.field, rhs.field, "field mismatch in matrix product");
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch in matrix product");
        let f = self.field;
        let p = f.modulus();
        let mut out = Matrix::zero(f, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, (cur + a * rhs.get(k, j)) % p);
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| {
            self.field.add(self.get(i, j), rhs.get(i, j))
        })
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| {
            self.field.sub(self.get(i, j), rhs.get(i, j))
        })
    }

    pub fn scale(&self, c: u64) -> Matrix {
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| self.field.mul(c, self.get(i, j)))
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.rows, rhs.rows);
        Matrix::from_fn(self.field, self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                rhs.get(i, j - self.cols)
            }
        })
    }

    /// Columns of `self` selected by `indices`, in the given order.
    pub fn take_columns(&self, indices: &[usize]) -> Matrix {
        Matrix::from_fn(self.field, self.rows, indices.len(), |i, j| self.get(i, indices[j]))
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Reduced row echelon form together with the pivot columns, in increasing
    /// order. Pivot choice is the first nonzero entry scanning down each
    /// column left to right, so the output is canonical.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = self.field;
        let p = f.modulus();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, col) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    let a = m.get(r, j);
                    let b = m.get(pr, j);
                    m.set(r, j, b);
                    m.set(pr, j, a);
                }
            }
            let inv = f.inv(m.get(r, col));
            for j in 0..m.cols {
                m.set(r, j, m.get(r, j) * inv % p);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, col);
                if factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(col);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the null space, one column per free column of the echelon
    /// form: the free coordinate is 1, pivot coordinates are the negated
    /// echelon entries. `cols - rank` columns in total.
    pub fn kernel_basis(&self) -> Matrix {
        let f = self.field;
        let (r, pivots) = self.rref();
        let is_pivot = mark(self.cols, &pivots);
        let free: Vec<usize> = (0..self.cols).filter(|&j| !is_pivot[j]).collect();
        let mut out = Matrix::zero(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, 1);
            for (i, &pc) in pivots.iter().enumerate() {
                out.set(pc, k, f.neg(r.get(i, fc)));
            }
        }
        out
    }

    /// Projection `q` with `q * self = 0` and `rank(q) = rows - rank(self)`.
    ///
    /// Built from the echelon form of the transpose: the pivot columns of
    /// `self^T` index the coordinates that lead the column space, and `q`
    /// records what remains of each coordinate vector after subtracting its
    /// column-space part, restricted to the non-pivot coordinates.
    pub fn cokernel_projection(&self) -> Matrix {
        let f = self.field;
        let (r, pivots) = self.transpose().rref();
        let is_pivot = mark(self.rows, &pivots);
        let free: Vec<usize> = (0..self.rows).filter(|&j| !is_pivot[j]).collect();
        let mut q = Matrix::zero(f, free.len(), self.rows);
        for (k, &fc) in free.iter().enumerate() {
            q.set(k, fc, 1);
            for (i, &pc) in pivots.iter().enumerate() {
                q.set(k, pc, f.neg(r.get(i, fc)));
            }
        }
        q
    }
}

fn mark(len: usize, indices: &[usize]) -> Vec<bool> {
    let mut v = vec![false; len];
    for &i in indices {
        v[i] = true;
    }
    v
}

/// Solve `basis * x = target` column by column, taking the particular
/// solution with all free variables zero. Fails with [`Error::NoSolution`]
/// when some target column leaves the span of the basis.
pub fn solve_in_span(basis: &Matrix, target: &Matrix) -> Result<Matrix> {
    assert_eq!(basis.field, target.field, "field mismatch in solve_in_span");
    if basis.rows != target.rows {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows, target has {}",
            basis.rows, target.rows
        )));
    }
    let (r, pivots) = basis.hstack(target).rref();
    if pivots.iter().any(|&c| c >= basis.cols) {
        return Err(Error::NoSolution);
    }
    let mut x = Matrix::zero(basis.field, basis.cols, target.cols);
    for (i, &pc) in pivots.iter().enumerate() {
        for j in 0..target.cols {
            x.set(pc, j, r.get(i, basis.cols + j));
        }
    }
    Ok(x)
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}(mod {}){:?}", self.rows, self.cols, self.field.modulus(), self.to_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}
