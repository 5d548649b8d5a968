//! Exact cyclotomic arithmetic in the power basis of the N-th cyclotomic
//! polynomial. Hosts Dirichlet character values and root-of-unity sums.

use super::{Int, Rat};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Element of Q(zeta_N), stored as phi(N) rational coordinates in the
/// power basis 1, zeta, ..., zeta^{phi(N)-1}, reduced modulo the N-th
/// cyclotomic polynomial. Rational elements are normalized to conductor 1.
#[derive(Debug, Clone)]
pub struct CycInt {
    conductor: u64,
    coeffs: Vec<Rat>,
}

fn phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Coefficients (ascending) of the N-th cyclotomic polynomial, cached.
pub fn cyclotomic_polynomial(n: u64) -> Vec<Int> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<Int>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by the product of Phi_d for proper divisors d.
    let mut num = vec![Int::zero(); n as usize + 1];
    num[0] = -Int::one();
    num[n as usize] = Int::one();
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            num = int_poly_div_exact(&num, &phi_d);
        }
    }
    cache.lock().unwrap().insert(n, num.clone());
    num
}

/// Exact division of integer polynomials (ascending coefficients);
/// divisor must be monic and divide exactly.
fn int_poly_div_exact(num: &[Int], den: &[Int]) -> Vec<Int> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    assert!(den[dd].is_one());
    let qd = rem.len() - 1 - dd;
    let mut q = vec![Int::zero(); qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd].clone();
        q[i] = c.clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            let t = dj * &c;
            rem[i + j] -= t;
        }
    }
    assert!(rem.iter().all(|x| x.is_zero()), "inexact polynomial division");
    q
}

impl CycInt {
    /// Build from arbitrary-length power-basis coordinates; reduces
    /// modulo the cyclotomic polynomial and normalizes rationals.
    pub fn new(conductor: u64, coeffs: Vec<Rat>) -> Self {
        assert!(conductor >= 1);
        let deg = phi(conductor) as usize;
        let modulus: Vec<Rat> = cyclotomic_polynomial(conductor)
            .into_iter()
            .map(Rat::from_integer)
            .collect();
        let mut c = poly_rem(coeffs, &modulus);
        c.resize(deg, Rat::zero());
        let out = CycInt {
            conductor,
            coeffs: c,
        };
        out.shrink_rational()
    }

    fn shrink_rational(self) -> Self {
        if self.conductor != 1 && self.coeffs[1..].iter().all(|x| x.is_zero()) {
            CycInt {
                conductor: 1,
                coeffs: vec![self.coeffs[0].clone()],
            }
        } else {
            self
        }
    }

    pub fn from_rat(x: Rat) -> Self {
        CycInt {
            conductor: 1,
            coeffs: vec![x],
        }
    }

    pub fn from_int(x: i64) -> Self {
        Self::from_rat(Rat::from_integer(Int::from(x)))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// zeta_N^k.
    pub fn root_of_unity(n: u64, k: i64) -> Self {
        let kk = k.rem_euclid(n as i64) as usize;
        let mut coeffs = vec![Rat::zero(); kk + 1];
        coeffs[kk] = Rat::one();
        CycInt::new(n, coeffs)
    }

    /// exp(2 pi i r) for rational r.
    pub fn exp_2pi_i(r: &Rat) -> Self {
        let den = r.denom().clone();
        let num = r.numer().mod_floor(&den);
        let n: u64 = den.to_string().parse().expect("conductor overflow");
        let k: i64 = num.to_string().parse().expect("exponent overflow");
        Self::root_of_unity(n, k)
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Power-basis coordinates (length phi(conductor)).
    pub fn coords(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.conductor == 1
    }

    pub fn to_rat(&self) -> Option<Rat> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// All power-basis coordinates integral. Exact because the power
    /// basis is an integral basis of Z[zeta_N].
    pub fn is_algebraic_integer(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_integer())
    }

    /// Embed into Q(zeta_m); requires conductor | m.
    pub fn embed(&self, m: u64) -> Result<CycInt> {
        if m % self.conductor != 0 {
            return Err(Error::ConductorMismatch(self.conductor, m));
        }
        let step = (m / self.conductor) as usize;
        let mut coeffs = vec![Rat::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * step] = c.clone();
        }
        Ok(CycInt::new(m, coeffs))
    }

    /// Both operands as coordinate vectors of equal length at the lcm
    /// conductor. Works on raw vectors so rational shrinking cannot
    /// desynchronize the lengths.
    fn common(&self, other: &CycInt) -> (Vec<Rat>, Vec<Rat>, u64) {
        let l = self.conductor.lcm(&other.conductor);
        let spread = |x: &CycInt| {
            let step = (l / x.conductor) as usize;
            let mut out = vec![Rat::zero(); (x.coeffs.len() - 1) * step + 1];
            for (i, c) in x.coeffs.iter().enumerate() {
                out[i * step] = c.clone();
            }
            out
        };
        let mut a = spread(self);
        let mut b = spread(other);
        let len = a.len().max(b.len());
        a.resize(len, Rat::zero());
        b.resize(len, Rat::zero());
        (a, b, l)
    }

    pub fn add(&self, other: &CycInt) -> CycInt {
        let (a, b, l) = self.common(other);
        let coeffs = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        CycInt::new(l, coeffs)
    }

    pub fn sub(&self, other: &CycInt) -> CycInt {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycInt {
        CycInt {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, other: &CycInt) -> CycInt {
        let (a, b, l) = self.common(other);
        let mut prod = vec![Rat::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        CycInt::new(l, prod)
    }

    pub fn scale(&self, s: &Rat) -> CycInt {
        CycInt {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|x| x * s).collect(),
        }
        .shrink_rational()
    }

    /// Complex conjugation zeta -> zeta^{-1}.
    pub fn conj(&self) -> CycInt {
        let n = self.conductor;
        if n == 1 {
            return self.clone();
        }
        let mut coeffs = vec![Rat::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = ((n as usize) - i) % n as usize;
            coeffs[k] += c;
        }
        CycInt::new(n, coeffs)
    }

    /// Multiplicative inverse in the field Q(zeta_N).
    pub fn inverse(&self) -> Result<CycInt> {
        if self.is_zero() {
            return Err(Error::SingularMatrix);
        }
        if let Some(r) = self.to_rat() {
            return Ok(CycInt::from_rat(r.recip()));
        }
        let modulus: Vec<Rat> = cyclotomic_polynomial(self.conductor)
            .into_iter()
            .map(Rat::from_integer)
            .collect();
        let inv = poly_mod_inverse(&self.coeffs, &modulus)?;
        Ok(CycInt::new(self.conductor, inv))
    }
}

impl PartialEq for CycInt {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

/// Remainder of `a` modulo the monic polynomial `m` (ascending coeffs).
fn poly_rem(mut a: Vec<Rat>, m: &[Rat]) -> Vec<Rat> {
    let dm = m.len() - 1;
    while a.len() > dm {
        let i = a.len() - 1;
        let c = a[i].clone();
        if !c.is_zero() {
            for (j, mj) in m.iter().enumerate() {
                let t = mj * &c;
                a[i - dm + j] -= t;
            }
        }
        a.pop();
    }
    a
}

fn poly_deg(a: &[Rat]) -> Option<usize> {
    a.iter().rposition(|x| !x.is_zero())
}

/// Inverse of `a` modulo monic `m` via the extended Euclidean algorithm
/// over Q[x]. `m` need not be irreducible; a zero-divisor input errors.
fn poly_mod_inverse(a: &[Rat], m: &[Rat]) -> Result<Vec<Rat>> {
    // Invariant: r0 = s0*a mod m, r1 = s1*a mod m.
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    let mut s0: Vec<Rat> = vec![];
    let mut s1: Vec<Rat> = vec![Rat::one()];
    while let Some(d1) = poly_deg(&r1) {
        if d1 == 0 {
            let inv = r1[0].recip();
            return Ok(s1.iter().map(|x| x * &inv).collect());
        }
        let d0 = poly_deg(&r0).unwrap_or(0);
        if d0 < d1 {
            std::mem::swap(&mut r0, &mut r1);
            std::mem::swap(&mut s0, &mut s1);
            continue;
        }
        // One long-division step.
        let lc1 = r1[d1].clone();
        let lc0 = r0[d0].clone();
        let shift = d0 - d1;
        let f = &lc0 / &lc1;
        for j in 0..=d1 {
            let t = &r1[j] * &f;
            r0[j + shift] -= t;
        }
        let mut s1s: Vec<Rat> = vec![Rat::zero(); shift + s1.len()];
        for (j, c) in s1.iter().enumerate() {
            s1s[j + shift] = c * &f;
        }
        if s0.len() < s1s.len() {
            s0.resize(s1s.len(), Rat::zero());
        }
        for (j, c) in s1s.iter().enumerate() {
            s0[j] -= c;
        }
        std::mem::swap(&mut r0, &mut r1);
        std::mem::swap(&mut s0, &mut s1);
    }
    Err(Error::SingularMatrix)
}

impl crate::exact::Ring for CycInt {
    fn zero() -> Self {
        CycInt::zero()
    }
    fn one() -> Self {
        CycInt::one()
    }
    fn is_zero(&self) -> bool {
        CycInt::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        CycInt::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        CycInt::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        CycInt::mul(self, other)
    }
    fn neg(&self) -> Self {
        CycInt::neg(self)
    }
}
