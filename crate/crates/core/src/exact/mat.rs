//! Dense matrices over exact rings.

use super::{Int, Rat, Ring};
use crate::{Error, Result};
use num_traits::Signed;

/// Rectangular dense matrix over a ring, row-major.
///
/// Matrices are immutable once handed out; mutation is crate-internal.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

pub type IntMat = Mat<Int>;
pub type RatMat = Mat<Rat>;

impl<R: Ring> Mat<R> {
    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![R::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = R::one();
        }
        m
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

    pub fn at(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a.mul(other.at(k, j));
                    let cur = out.at(i, j).add(&t);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn add_mat(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.add(b))
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub_mat(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub(b))
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: &R) -> Self {
        let data = self.data.iter().map(|a| a.mul(s)).collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn apply(&self, v: &[R]) -> Vec<R> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = R::zero();
                for j in 0..self.cols {
                    acc = acc.add(&self.at(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn is_zero_mat(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    pub fn entries(&self) -> impl Iterator<Item = &R> {
        self.data.iter()
    }
}

impl IntMat {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Int::from(x)).collect())
                .collect(),
        )
    }

    pub fn to_rat(&self) -> RatMat {
        let data = self
            .data
            .iter()
            .map(|x| Rat::from_integer(x.clone()))
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                if self.at(i, j) != self.at(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// Fraction-free determinant (Bareiss).
    pub fn det(&self) -> Int {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a: Vec<Vec<Int>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = &t / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    /// Content: gcd of all entries (0 for the zero matrix).
    pub fn content(&self) -> Int {
        let mut g = Int::zero();
        for e in &self.data {
            g = num_integer::gcd(g, e.abs());
        }
        g
    }

    pub fn max_abs(&self) -> Int {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Int::zero)
    }
}

impl RatMat {
    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<RatMat> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of non-square".into()));
        }
        let n = self.rows;
        let mut a: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                let mut aug = vec![Rat::zero(); n];
                aug[i] = Rat::one();
                row.extend(aug);
                row
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero());
            let pivot = pivot.ok_or(Error::SingularMatrix)?;
            a.swap(col, pivot);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x /= p.clone();
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in 0..2 * n {
                        let t = &a[col][c] * &f;
                        a[r][c] -= t;
                    }
                }
            }
        }
        Ok(Mat::from_rows(a.into_iter().map(|r| r[n..].to_vec()).collect()))
    }

    pub fn rank(&self) -> usize {
        let mut a: Vec<Vec<Rat>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let mut rank = 0;
        let mut col = 0;
        while rank < self.rows && col < self.cols {
            match (rank..self.rows).find(|&r| !a[r][col].is_zero()) {
                None => {
                    col += 1;
                    continue;
                }
                Some(p) => {
                    a.swap(rank, p);
                    let inv = a[rank][col].recip();
                    for c in col..self.cols {
                        a[rank][c] = &a[rank][c] * &inv;
                    }
                    for r in 0..self.rows {
                        if r != rank && !a[r][col].is_zero() {
                            let f = a[r][col].clone();
                            for c in col..self.cols {
                                let t = &a[rank][c] * &f;
                                a[r][c] -= t;
                            }
                        }
                    }
                    rank += 1;
                    col += 1;
                }
            }
        }
        rank
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Exact integer matrix if all entries are integral.
    pub fn to_int(&self) -> Option<IntMat> {
        if !self.is_integral() {
            return None;
        }
        let data = self.data.iter().map(|x| x.to_integer()).collect();
        Some(Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

impl<R: Ring + std::fmt::Debug> std::fmt::Debug for Mat<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}
