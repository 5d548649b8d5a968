//! Monic polynomials and the division-free characteristic polynomial.

use super::mat::Mat;
use super::{Rat, Ring};
use crate::{Error, Result};

/// Monic polynomial over a commutative ring, coefficients stored in
/// ascending degree order; the leading coefficient is always `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPoly<R> {
    coeffs: Vec<R>,
}

impl<R: Ring> MonicPoly<R> {
    /// Build from ascending coefficients; rejects non-monic input.
    pub fn new(coeffs: Vec<R>) -> Result<Self> {
        match coeffs.last() {
            Some(c) if *c == R::one() => Ok(MonicPoly { coeffs }),
            _ => Err(Error::NotMonic),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients in ascending degree order (constant term first).
    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn eval(&self, x: &R) -> R {
        let mut acc = R::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Evaluate at a square matrix (used for Cayley-Hamilton checks).
    pub fn eval_matrix(&self, m: &Mat<R>) -> Mat<R> {
        assert!(m.is_square());
        let n = m.rows();
        let mut acc = Mat::zero(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m);
            let cid = Mat::identity(n).scale(c);
            acc = acc.add_mat(&cid);
        }
        acc
    }
}

impl MonicPoly<Rat> {
    /// True iff every coefficient is a rational integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }
}

impl MonicPoly<super::Scalar> {
    /// True iff every coefficient is an algebraic integer: integer in the
    /// rational case, or all power-basis coordinates integral in the
    /// cyclotomic case (the power basis is an integral basis of Z[zeta_N]).
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_algebraic_integer())
    }
}

/// Characteristic polynomial `det(X*id - M)` by the Berkowitz algorithm:
/// division-free, so it is exact over any commutative ring.
pub fn berkowitz_charpoly<R: Ring>(m: &Mat<R>) -> Result<MonicPoly<R>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "charpoly expects a square matrix".into(),
        ));
    }
    let n = m.rows();
    if n == 0 {
        return MonicPoly::new(vec![R::one()]);
    }

    // Descending-order coefficient vector, grown one principal minor at a
    // time via Toeplitz products.
    let mut c: Vec<R> = vec![R::one(), m.at(0, 0).neg()];
    for i in 1..n {
        // Toeplitz column: [1, -a, -(R C), -(R M C), -(R M^2 C), ...]
        let a = m.at(i, i);
        let row: Vec<R> = (0..i).map(|j| m.at(i, j).clone()).collect();
        let col: Vec<R> = (0..i).map(|j| m.at(j, i).clone()).collect();
        let mut t: Vec<R> = Vec::with_capacity(i + 2);
        t.push(R::one());
        t.push(a.neg());
        let mut w = col.clone();
        for _ in 0..i {
            let dot = dot(&row, &w);
            t.push(dot.neg());
            w = mat_vec_principal(m, i, &w);
        }
        // c_new[r] = sum_{k} t[r - k] * c[k]
        let mut next = vec![R::zero(); i + 2];
        for (r, slot) in next.iter_mut().enumerate() {
            let mut acc = R::zero();
            for (k, ck) in c.iter().enumerate() {
                if r >= k && r - k < t.len() {
                    acc = acc.add(&t[r - k].mul(ck));
                }
            }
            *slot = acc;
        }
        c = next;
    }

    c.reverse();
    MonicPoly::new(c)
}

fn dot<R: Ring>(a: &[R], b: &[R]) -> R {
    let mut acc = R::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

/// Multiply the leading k x k principal submatrix of `m` by `v`.
fn mat_vec_principal<R: Ring>(m: &Mat<R>, k: usize, v: &[R]) -> Vec<R> {
    (0..k)
        .map(|i| {
            let mut acc = R::zero();
            for j in 0..k {
                acc = acc.add(&m.at(i, j).mul(&v[j]));
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat_int, IntMat};

    #[test]
    fn charpoly_two_by_two() {
        let m = IntMat::from_i64_rows(&[&[2049, 0], &[196560, -24]]).to_rat();
        let p = berkowitz_charpoly(&m).unwrap();
        assert_eq!(p.coeffs(), &[rat_int(-49176), rat_int(-2025), rat_int(1)]);
        assert!(p.is_integral());
    }

    #[test]
    fn charpoly_diagonal() {
        let m = IntMat::from_i64_rows(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]).to_rat();
        let p = berkowitz_charpoly(&m).unwrap();
        // (X-1)(X-2)(X-3) = X^3 - 6X^2 + 11X - 6
        assert_eq!(
            p.coeffs(),
            &[rat_int(-6), rat_int(11), rat_int(-6), rat_int(1)]
        );
    }

    #[test]
    fn cayley_hamilton() {
        let m = IntMat::from_i64_rows(&[&[3, 1, 4], &[1, 5, 9], &[2, 6, 5]]).to_rat();
        let p = berkowitz_charpoly(&m).unwrap();
        assert!(p.eval_matrix(&m).is_zero_mat());
    }

    #[test]
    fn non_monic_rejected() {
        assert!(MonicPoly::new(vec![rat_int(1), rat_int(2)]).is_err());
        assert!(MonicPoly::<Rat>::new(vec![]).is_err());
    }
}
