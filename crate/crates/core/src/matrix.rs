//! Dense exact matrices, their float counterparts, and integer Hermite
//! normal forms used to decide lattice equality.

use crate::rational::{common_denominator, int, to_f64, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        write!(f, "Matrix{rows:?}")
    }
}

impl Matrix {
    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![Rational::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    /// Returns `None` when the rows are ragged or empty.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len)?;
        if c == 0 || rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self::new(r, c, rows.into_iter().flatten().collect()))
    }

    pub fn from_columns(cols: &[Vec<Rational>]) -> Option<Self> {
        let c = cols.len();
        let r = cols.first().map(Vec::len)?;
        if r == 0 || cols.iter().any(|col| col.len() != r) {
            return None;
        }
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Some(m)
    }

    pub fn from_integer_columns(cols: &[Vec<BigInt>]) -> Option<Self> {
        let cols: Vec<Vec<Rational>> = cols
            .iter()
            .map(|c| c.iter().cloned().map(Rational::from_integer).collect())
            .collect();
        Self::from_columns(&cols)
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

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product dimensions");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimensions");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix::new(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x * c).collect(),
        )
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&int(-1))
    }

    /// Determinant by fraction Gaussian elimination. Panics if not square.
    pub fn det(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                a.swap_rows(p, col);
                det = -det;
            }
            let pivot = a.get(col, col).clone();
            det *= &pivot;
            for r in col + 1..n {
                let f = a.get(r, col) / &pivot;
                if f.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a.get(r, c) - &f * a.get(col, c);
                    a.set(r, c, v);
                }
            }
        }
        det
    }

    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            a.swap_rows(p, rank);
            let pivot = a.get(rank, col).clone();
            for r in rank + 1..self.rows {
                let f = a.get(r, col) / &pivot;
                if f.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let v = a.get(r, c) - &f * a.get(rank, c);
                    a.set(r, c, v);
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Gauss-Jordan inverse; `None` for singular or non-square input.
    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            a.swap_rows(p, col);
            inv.swap_rows(p, col);
            let pivot = a.get(col, col).recip();
            for c in 0..n {
                let v = a.get(col, c) * &pivot;
                a.set(col, c, v);
                let w = inv.get(col, c) * &pivot;
                inv.set(col, c, w);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let v = a.get(r, c) - &f * a.get(col, c);
                    a.set(r, c, v);
                    let w = inv.get(r, c) - &f * inv.get(col, c);
                    inv.set(r, c, w);
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        common_denominator(self.data.iter())
    }

    /// Columns of `D * self` as integers, with `D` the denominator lcm.
    pub fn integer_columns(&self) -> (BigInt, Vec<Vec<BigInt>>) {
        let d = self.denominator_lcm();
        (d.clone(), self.scaled_integer_columns(&d))
    }

    /// Columns of `scale * self`; `scale` must clear every denominator.
    pub fn scaled_integer_columns(&self, scale: &BigInt) -> Vec<Vec<BigInt>> {
        let s = Rational::from_integer(scale.clone());
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| {
                        let v = self.get(i, j) * &s;
                        assert!(v.is_integer(), "scale does not clear denominators");
                        v.to_integer()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_float(&self) -> FloatMatrix {
        FloatMatrix::new(self.rows, self.cols, self.data.iter().map(to_f64).collect())
    }
}

/// Row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FloatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len)?;
        if c == 0 || rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self::new(r, c, rows.into_iter().flatten().collect()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn mul(&self, other: &FloatMatrix) -> FloatMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimensions");
        let mut out = FloatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> FloatMatrix {
        let mut out = FloatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Partial-pivot Gauss-Jordan inverse; `None` when a pivot vanishes.
    pub fn inverse(&self) -> Option<FloatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = FloatMatrix::identity(n);
        for col in 0..n {
            let p = (col..n).max_by(|&x, &y| {
                a.get(x, col).abs().total_cmp(&a.get(y, col).abs())
            })?;
            if a.get(p, col) == 0.0 || !a.get(p, col).is_finite() {
                return None;
            }
            for c in 0..n {
                a.data.swap(p * n + c, col * n + c);
                inv.data.swap(p * n + c, col * n + c);
            }
            let pivot = a.get(col, col);
            for c in 0..n {
                a.data[col * n + c] /= pivot;
                inv.data[col * n + c] /= pivot;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f == 0.0 {
                    continue;
                }
                for c in 0..n {
                    a.data[r * n + c] -= f * a.data[col * n + c];
                    inv.data[r * n + c] -= f * inv.data[col * n + c];
                }
            }
        }
        Some(inv)
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for col in 0..n {
            let p = (col..n)
                .max_by(|&x, &y| a.get(x, col).abs().total_cmp(&a.get(y, col).abs()))
                .unwrap();
            if a.get(p, col) == 0.0 {
                return 0.0;
            }
            if p != col {
                for c in 0..n {
                    a.data.swap(p * n + c, col * n + c);
                }
                det = -det;
            }
            let pivot = a.get(col, col);
            det *= pivot;
            for r in col + 1..n {
                let f = a.get(r, col) / pivot;
                for c in col..n {
                    a.data[r * n + c] -= f * a.data[col * n + c];
                }
            }
        }
        det
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Incremental exact independence test over rational vectors.
#[derive(Debug, Clone, Default)]
pub struct RankTracker {
    rows: Vec<(usize, Vec<Rational>)>,
}

impl RankTracker {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` if it is independent of the stored vectors; reports whether it was.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut v = v.to_vec();
        // Each stored row is zero at every earlier pivot, so one pass suffices.
        for (pivot, row) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let f = &v[*pivot] / &row[*pivot];
            for (a, b) in v.iter_mut().zip(row) {
                *a -= &f * b;
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }

    pub fn insert_i64(&mut self, v: &[i64]) -> bool {
        self.insert(&v.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    pub fn insert_bigint(&mut self, v: &[BigInt]) -> bool {
        self.insert(&v.iter().cloned().map(Rational::from_integer).collect::<Vec<_>>())
    }

    /// Whether `v` lies in the span without modifying the tracker.
    pub fn is_independent(&self, v: &[Rational]) -> bool {
        self.clone().insert(v)
    }
}

/// `(g, s, t)` with `s*a + t*b = g = gcd(a, b) >= 0`.
fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Column Hermite normal form of an integer matrix given by its `k` columns
/// of length `d`, with row rank `d`.
///
/// The result has `d` columns, is lower triangular with a positive
/// diagonal, and every entry left of the diagonal satisfies `0 <= a < diag`.
/// Returns `None` when the row rank is below `d`.
pub fn hermite_normal_form(columns: &[Vec<BigInt>]) -> Option<Vec<Vec<BigInt>>> {
    let k = columns.len();
    let d = columns.first()?.len();
    if k < d {
        return None;
    }
    let mut cols: Vec<Vec<BigInt>> = columns.to_vec();
    for i in 0..d {
        // Fold every later column's row-i entry into column i.
        for j in i + 1..k {
            if cols[j][i].is_zero() {
                continue;
            }
            if cols[i][i].is_zero() {
                cols.swap(i, j);
                continue;
            }
            let (g, s, t) = ext_gcd(&cols[i][i], &cols[j][i]);
            let x = &cols[i][i] / &g;
            let y = &cols[j][i] / &g;
            let (ci, cj) = (cols[i].clone(), cols[j].clone());
            for r in 0..d {
                cols[i][r] = &s * &ci[r] + &t * &cj[r];
                cols[j][r] = &x * &cj[r] - &y * &ci[r];
            }
        }
        if cols[i][i].is_zero() {
            return None;
        }
        if cols[i][i].is_negative() {
            for v in cols[i].iter_mut() {
                *v = -v.clone();
            }
        }
        let pivot = cols[i][i].clone();
        let ci = cols[i].clone();
        for col in cols.iter_mut().take(i) {
            let q = col[i].div_floor(&pivot);
            if !q.is_zero() {
                for r in 0..d {
                    col[r] -= &q * &ci[r];
                }
            }
        }
    }
    cols.truncate(d);
    Some(cols)
}

/// Whether the column spans of two full-row-rank rational matrices are the
/// same lattice.
pub fn same_lattice(a: &Matrix, b: &Matrix) -> bool {
    if a.rows() != b.rows() {
        return false;
    }
    let scale = a.denominator_lcm().lcm(&b.denominator_lcm());
    let ha = hermite_normal_form(&a.scaled_integer_columns(&scale));
    let hb = hermite_normal_form(&b.scaled_integer_columns(&scale));
    matches!((ha, hb), (Some(x), Some(y)) if x == y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn det_inverse_rank() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.det(), int(1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        let s = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det(), int(0));
        assert!(s.inverse().is_none());
        assert_eq!(s.rank(), 1);
        assert_eq!(a.rank(), 2);
        let d = Matrix::diagonal(&[rat(2, 1), rat(1, 2)]);
        assert_eq!(d.inverse().unwrap(), Matrix::diagonal(&[rat(1, 2), int(2)]));
    }

    #[test]
    fn hnf_is_canonical() {
        // Unimodular scramble of the identity spans Z^2.
        let a = m(&[&[1, 1], &[0, 1]]);
        assert!(same_lattice(&a, &Matrix::identity(2)));
        let b = m(&[&[2, 0], &[0, 1]]);
        assert!(!same_lattice(&b, &Matrix::identity(2)));
        let h = hermite_normal_form(&b.integer_columns().1).unwrap();
        assert_eq!(h, vec![vec![BigInt::from(2), BigInt::from(0)], vec![BigInt::from(0), BigInt::from(1)]]);
        // Extra generators are allowed.
        let gens = vec![
            vec![BigInt::from(4), BigInt::from(0)],
            vec![BigInt::from(6), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(3)],
        ];
        let h = hermite_normal_form(&gens).unwrap();
        assert_eq!(h[0], vec![BigInt::from(2), BigInt::from(0)]);
        assert_eq!(h[1], vec![BigInt::from(0), BigInt::from(3)]);
    }

    #[test]
    fn rational_lattices_compare_after_scaling() {
        let a = Matrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![rat(-2, 3), int(2)]]).unwrap();
        let swapped = Matrix::from_columns(&[a.column(1), a.column(0)]).unwrap();
        assert!(same_lattice(&a, &swapped));
        let sheared = a.mul(&m(&[&[1, 3], &[0, 1]]));
        assert!(same_lattice(&a, &sheared));
        assert!(!same_lattice(&a, &a.scale(&int(2))));
    }

    #[test]
    fn float_inverse() {
        let a = FloatMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let p = a.mul(&a.inverse().unwrap());
        assert!((p.get(0, 0) - 1.0).abs() < 1e-12 && p.get(0, 1).abs() < 1e-12);
        assert!((a.det() - 1.0).abs() < 1e-12);
    }
}
