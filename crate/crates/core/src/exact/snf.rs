//! Smith normal form over the integers, with unimodular transforms.

use super::{Int, IntMat};
use crate::{Error, Result};
use num_traits::{Signed, Zero};

/// `u * m * v = s` with `u`, `v` unimodular and `s` diagonal with
/// successive divisibility `d_1 | d_2 | ... | d_r`, all `d_i >= 0`.
#[derive(Debug, Clone)]
pub struct SnfDecomposition {
    pub u: IntMat,
    pub s: IntMat,
    pub v: IntMat,
}

impl SnfDecomposition {
    /// The diagonal entries, including trailing zeros.
    pub fn divisors(&self) -> Vec<Int> {
        let r = self.s.rows().min(self.s.cols());
        (0..r).map(|i| self.s.at(i, i).clone()).collect()
    }
}

/// SNF of a square nonsingular matrix.
pub fn snf(m: &IntMat) -> Result<SnfDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("snf expects a square matrix".into()));
    }
    if m.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(snf_rect(m))
}

struct SnfWork {
    rows: usize,
    cols: usize,
    a: Vec<Vec<Int>>,
    u: Vec<Vec<Int>>,
    v: Vec<Vec<Int>>,
}

/// SNF of an arbitrary rectangular matrix.
///
/// Pivoting is deterministic: the smallest nonzero absolute value in the
/// working submatrix, ties broken by row then column order, so the
/// transforms are reproducible across runs.
pub fn snf_rect(m: &IntMat) -> SnfDecomposition {
    let mut w = SnfWork {
        rows: m.rows(),
        cols: m.cols(),
        a: (0..m.rows()).map(|i| m.row(i).to_vec()).collect(),
        u: identity_rows(m.rows()),
        v: identity_rows(m.cols()),
    };
    let r = w.rows.min(w.cols);

    w.diagonalize();
    // Positive diagonal.
    for i in 0..r {
        if w.a[i][i].is_negative() {
            w.negate_row(i);
        }
    }

    SnfDecomposition {
        u: IntMat::from_rows(w.u),
        s: IntMat::from_rows(w.a),
        v: IntMat::from_rows(w.v),
    }
}

impl SnfWork {
    fn diagonalize(&mut self) {
        let r = self.rows.min(self.cols);
        let mut k = 0;
        while k < r {
            let Some((pi, pj)) = self.smallest_pivot(k) else {
                break; // submatrix is zero; trailing zeros stay at the end
            };
            self.swap_rows(k, pi);
            self.swap_cols(k, pj);
            loop {
                for i in k + 1..self.rows {
                    self.gcd_rows(k, i);
                }
                // clearing a row can re-dirty the column, but only while
                // the pivot strictly shrinks to a proper divisor, so the
                // alternation is logarithmic
                for j in k + 1..self.cols {
                    self.gcd_cols(k, j);
                }
                let col_clear = (k + 1..self.rows).all(|i| self.a[i][k].is_zero());
                let row_clear = (k + 1..self.cols).all(|j| self.a[k][j].is_zero());
                if !(col_clear && row_clear) {
                    continue;
                }
                // Divisibility chain: the pivot must divide the whole
                // trailing block before we advance. Pulling an offending
                // row into row k forces a pivot-shrinking re-clear,
                // so this terminates.
                match self.non_divisible(k) {
                    Some(i) => self.row_axpy(k, i, &Int::from(1)),
                    None => break,
                }
            }
            k += 1;
        }
    }

    /// Zero a[i][k] against the pivot a[k][k] in one unimodular step.
    /// When the pivot does not divide the entry, a Bezout combination
    /// replaces the pivot by the gcd directly; iterated remainder
    /// division is avoided because it blows up the off-pivot columns.
    fn gcd_rows(&mut self, k: usize, i: usize) {
        if self.a[i][k].is_zero() {
            return;
        }
        let a = self.a[k][k].clone();
        let b = self.a[i][k].clone();
        if (&b % &a).is_zero() {
            let q = -(&b / &a);
            self.row_axpy(i, k, &q);
            return;
        }
        let (g, x, y) = ext_gcd(&a, &b);
        let (ca, cb) = (&a / &g, &b / &g);
        for (cols, m) in [(self.cols, &mut self.a), (self.rows, &mut self.u)] {
            for c in 0..cols {
                let rk = &x * &m[k][c] + &y * &m[i][c];
                let ri = &ca * &m[i][c] - &cb * &m[k][c];
                m[k][c] = rk;
                m[i][c] = ri;
            }
        }
    }

    /// Column counterpart of gcd_rows, acting on a[k][j].
    fn gcd_cols(&mut self, k: usize, j: usize) {
        if self.a[k][j].is_zero() {
            return;
        }
        let a = self.a[k][k].clone();
        let b = self.a[k][j].clone();
        if (&b % &a).is_zero() {
            let q = -(&b / &a);
            self.col_axpy(j, k, &q);
            return;
        }
        let (g, x, y) = ext_gcd(&a, &b);
        let (ca, cb) = (&a / &g, &b / &g);
        for (rows, m) in [(self.rows, &mut self.a), (self.cols, &mut self.v)] {
            for r in 0..rows {
                let ck = &x * &m[r][k] + &y * &m[r][j];
                let cj = &ca * &m[r][j] - &cb * &m[r][k];
                m[r][k] = ck;
                m[r][j] = cj;
            }
        }
    }

    /// First row of the trailing block containing an entry the pivot
    /// a[k][k] does not divide, if any.
    fn non_divisible(&self, k: usize) -> Option<usize> {
        let p = &self.a[k][k];
        for i in k + 1..self.rows {
            for j in k + 1..self.cols {
                if !(&self.a[i][j] % p).is_zero() {
                    return Some(i);
                }
            }
        }
        None
    }

    fn smallest_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(Int, usize, usize)> = None;
        for i in k..self.rows {
            for j in k..self.cols {
                if self.a[i][j].is_zero() {
                    continue;
                }
                let v = self.a[i][j].abs();
                match &best {
                    Some((b, _, _)) if *b <= v => {}
                    _ => best = Some((v, i, j)),
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            self.u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        for row in self.v.iter_mut() {
            row.swap(i, j);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -x.clone();
        }
        for x in self.u[i].iter_mut() {
            *x = -x.clone();
        }
    }

    /// row_i += q * row_k (on A and U).
    fn row_axpy(&mut self, i: usize, k: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = &self.a[k][j] * q;
            self.a[i][j] += t;
        }
        for j in 0..self.rows {
            let t = &self.u[k][j] * q;
            self.u[i][j] += t;
        }
    }

    /// col_j += q * col_k (on A and V).
    fn col_axpy(&mut self, j: usize, k: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for row in self.a.iter_mut() {
            let t = &row[k] * q;
            row[j] += t;
        }
        for row in self.v.iter_mut() {
            let t = &row[k] * q;
            row[j] += t;
        }
    }
}

fn identity_rows(n: usize) -> Vec<Vec<Int>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Int::from(1) } else { Int::zero() })
                .collect()
        })
        .collect()
}


/// Quotient rounded to nearest, so remainders satisfy |r| <= |d|/2.
#[cfg(test)]
fn div_round(n: &Int, d: &Int) -> Int {
    let (mut q, r) = num_integer::Integer::div_rem(n, d);
    let two_r = r.abs() * Int::from(2);
    if two_r > d.abs() {
        if n.is_negative() ^ d.is_negative() {
            q -= 1;
        } else {
            q += 1;
        }
    }
    q
}

/// Extended gcd: returns (g, x, y) with x*a + y*b = g >= 0.
pub fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let e = num_integer::Integer::extended_gcd(a, b);
    (e.gcd, e.x, e.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::IntMat;

    fn check(m: &IntMat, expect: &[i64]) {
        let d = snf_rect(m);
        assert_eq!(d.u.mul(m).mul(&d.v), d.s);
        assert_eq!(d.u.det().abs(), Int::from(1));
        assert_eq!(d.v.det().abs(), Int::from(1));
        let divs = d.divisors();
        assert_eq!(divs, expect.iter().map(|&x| Int::from(x)).collect::<Vec<_>>());
        for w in divs.windows(2) {
            if !w[0].is_zero() {
                assert!((&w[1] % &w[0]).is_zero());
            } else {
                assert!(w[1].is_zero());
            }
        }
    }

    #[test]
    fn identity_is_fixed() {
        check(&IntMat::identity(3), &[1, 1, 1]);
    }

    #[test]
    fn diagonal_gets_divisibility_chain() {
        check(&IntMat::from_i64_rows(&[&[2, 0], &[0, 3]]), &[1, 6]);
        check(&IntMat::from_i64_rows(&[&[6, 0], &[0, 4]]), &[2, 12]);
    }

    #[test]
    fn dense_example() {
        check(&IntMat::from_i64_rows(&[&[2, 4], &[6, 8]]), &[2, 4]);
    }

    #[test]
    fn rectangular_and_rank_deficient() {
        check(&IntMat::from_i64_rows(&[&[2, 4, 6]]), &[2]);
        check(&IntMat::from_i64_rows(&[&[1, 2], &[2, 4]]), &[1, 0]);
        check(&IntMat::from_i64_rows(&[&[0, 0], &[0, 0]]), &[0, 0]);
    }

    #[test]
    fn singular_square_rejected() {
        let m = IntMat::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert!(matches!(snf(&m), Err(Error::SingularMatrix)));
    }

    #[test]
    fn div_round_gives_small_remainder() {
        for n in -20i64..=20 {
            for d in [-7i64, -3, 2, 5] {
                let q = div_round(&Int::from(n), &Int::from(d));
                let r = Int::from(n) - &q * Int::from(d);
                assert!(r.abs() * Int::from(2) <= Int::from(d).abs(), "{n}/{d}");
            }
        }
    }
}
