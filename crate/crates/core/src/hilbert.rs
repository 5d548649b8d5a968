//! HNF ideal arithmetic for Q and real quadratic fields, and the
//! Hecke coefficient recursion C(m, T'(p)f) = sum over a containing
//! m + p of chi(a) N(a)^(k0-1) C(a^-2 m p, f).

use crate::exact::{Int, Rat};
use crate::fourier::{HalfIntMat, Mode, QExpansion, RingTag};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Base field: Q, or the real quadratic field Q(sqrt d) with ring
/// generator omega = (1+sqrt d)/2 when d = 1 mod 4 and sqrt d otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Quad { d: i64 },
}

impl Field {
    pub fn quad(d: i64) -> Result<Field> {
        if d <= 1 {
            return Err(Error::InvalidConfig(format!("d = {d} must exceed 1")));
        }
        for q in 2.. {
            if q * q > d {
                break;
            }
            if d % (q * q) == 0 {
                return Err(Error::InvalidConfig(format!("d = {d} is not squarefree")));
            }
        }
        Ok(Field::Quad { d })
    }

    pub fn discriminant(&self) -> i64 {
        match self {
            Field::Rational => 1,
            Field::Quad { d } => {
                if d % 4 == 1 {
                    *d
                } else {
                    4 * d
                }
            }
        }
    }

    /// (t, s) with omega^2 = t*omega + s.
    fn omega_relation(&self) -> (i64, i64) {
        match self {
            Field::Rational => (0, 0),
            Field::Quad { d } => {
                if d % 4 == 1 {
                    (1, (d - 1) / 4)
                } else {
                    (0, *d)
                }
            }
        }
    }
}

/// Nonzero integral ideal in HNF basis [a, b + c*omega] with a, c > 0,
/// c | a, c | b, 0 <= b < a; for Q the basis degenerates to [a] with
/// b = 0, c = 1 by convention. Norm = a*c.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ideal {
    field: Field,
    a: Int,
    b: Int,
    c: Int,
}

/// (x + y*omega)(u + v*omega) with omega^2 = t*omega + s.
fn elt_mul(field: Field, x: (&Int, &Int), y: (&Int, &Int)) -> (Int, Int) {
    let (t, s) = field.omega_relation();
    let rat = x.0 * y.0 + x.1 * y.1 * Int::from(s);
    let irr = x.0 * y.1 + x.1 * y.0 + x.1 * y.1 * Int::from(t);
    (rat, irr)
}

/// HNF basis [(a,0), (b,c)] of the Z-module spanned by the pairs
/// x + y*omega; the module must have full rank.
fn hnf_pairs(pairs: &[(Int, Int)]) -> Result<(Int, Int, Int)> {
    let mut a = Int::zero();
    let mut v2: Option<(Int, Int)> = None; // y-component positive gcd so far
    for (x, y) in pairs {
        if y.is_zero() {
            a = a.gcd(x);
            continue;
        }
        v2 = Some(match v2 {
            None => (x.clone(), y.clone()),
            Some((bx, by)) => {
                let e = by.extended_gcd(y);
                let nx = &e.x * &bx + &e.y * x;
                let ny = e.gcd;
                // complementary unimodular combination, lands on the x-axis
                let rx = (y / &ny) * &bx - (&by / &ny) * x;
                a = a.gcd(&rx);
                (nx, ny)
            }
        });
    }
    let (mut b, mut c) = v2.unwrap_or((Int::zero(), Int::zero()));
    if c.is_negative() {
        b = -b;
        c = -c;
    }
    a = a.abs();
    if a.is_zero() || c.is_zero() {
        return Err(Error::InvalidConfig("module does not have full rank".into()));
    }
    b = b.mod_floor(&a);
    Ok((a, b, c))
}

impl Ideal {
    /// Build from an HNF triple, verifying closure under omega.
    pub fn new(field: Field, a: Int, b: Int, c: Int) -> Result<Ideal> {
        if field == Field::Rational {
            if !a.is_positive() || !b.is_zero() || c != Int::from(1) {
                return Err(Error::InvalidConfig("rational ideal needs a > 0, b = 0, c = 1".into()));
            }
            return Ok(Ideal { field, a, b, c });
        }
        if !a.is_positive() || !c.is_positive() || b.is_negative() || b >= a {
            return Err(Error::InvalidConfig("HNF bounds violated".into()));
        }
        if !(&a % &c).is_zero() || !(&b % &c).is_zero() {
            return Err(Error::InvalidConfig("c must divide a and b".into()));
        }
        let ideal = Ideal { field, a, b, c };
        // closure: omega times each basis vector stays inside
        let (t, _) = field.omega_relation();
        let wa = elt_mul(field, (&ideal.a, &Int::zero()), (&Int::zero(), &Int::from(1)));
        let wb = elt_mul(field, (&ideal.b, &ideal.c), (&Int::zero(), &Int::from(1)));
        let _ = t;
        if !ideal.contains(&wa.0, &wa.1) || !ideal.contains(&wb.0, &wb.1) {
            return Err(Error::InvalidConfig("module is not an ideal".into()));
        }
        Ok(ideal)
    }

    /// Ideal generated by the elements (as an O_F-module).
    pub fn from_generators(field: Field, gens: &[(Int, Int)]) -> Result<Ideal> {
        if field == Field::Rational {
            let mut a = Int::zero();
            for (x, y) in gens {
                if !y.is_zero() {
                    return Err(Error::InvalidConfig("rational element has no omega part".into()));
                }
                a = a.gcd(x);
            }
            if a.is_zero() {
                return Err(Error::InvalidConfig("zero ideal".into()));
            }
            return Ideal::new(field, a, Int::zero(), Int::from(1));
        }
        let mut pairs = Vec::with_capacity(2 * gens.len());
        for g in gens {
            pairs.push(g.clone());
            pairs.push(elt_mul(field, (&g.0, &g.1), (&Int::zero(), &Int::from(1))));
        }
        let (a, b, c) = hnf_pairs(&pairs)?;
        Ideal::new(field, a, b, c)
    }

    pub fn principal(field: Field, x: Int, y: Int) -> Result<Ideal> {
        Ideal::from_generators(field, &[(x, y)])
    }

    pub fn unit(field: Field) -> Ideal {
        Ideal {
            field,
            a: Int::from(1),
            b: Int::zero(),
            c: Int::from(1),
        }
    }

    pub fn integer(field: Field, n: i64) -> Result<Ideal> {
        Ideal::principal(field, Int::from(n), Int::zero())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn hnf(&self) -> (Int, Int, Int) {
        (self.a.clone(), self.b.clone(), self.c.clone())
    }

    pub fn norm(&self) -> Int {
        if self.field == Field::Rational {
            self.a.clone()
        } else {
            &self.a * &self.c
        }
    }

    pub fn is_unit(&self) -> bool {
        self.norm() == Int::from(1)
    }

    /// x + y*omega lies in the ideal.
    pub fn contains(&self, x: &Int, y: &Int) -> bool {
        if self.field == Field::Rational {
            return y.is_zero() && (x % &self.a).is_zero();
        }
        if !(y % &self.c).is_zero() {
            return false;
        }
        ((x - (y / &self.c) * &self.b) % &self.a).is_zero()
    }

    /// Z-basis of the underlying module.
    fn z_basis(&self) -> Vec<(Int, Int)> {
        if self.field == Field::Rational {
            vec![(self.a.clone(), Int::zero())]
        } else {
            vec![
                (self.a.clone(), Int::zero()),
                (self.b.clone(), self.c.clone()),
            ]
        }
    }

    fn check_field(&self, other: &Ideal) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Ideal) -> Result<Ideal> {
        self.check_field(other)?;
        let mut gens = Vec::with_capacity(4);
        for u in self.z_basis() {
            for v in other.z_basis() {
                gens.push(elt_mul(self.field, (&u.0, &u.1), (&v.0, &v.1)));
            }
        }
        Ideal::from_generators(self.field, &gens)
    }

    /// Ideal sum I + J (the gcd of the two ideals).
    pub fn add(&self, other: &Ideal) -> Result<Ideal> {
        self.check_field(other)?;
        let mut gens = self.z_basis();
        gens.extend(other.z_basis());
        Ideal::from_generators(self.field, &gens)
    }

    pub fn divides(&self, other: &Ideal) -> Result<bool> {
        self.check_field(other)?;
        Ok(other.z_basis().iter().all(|(x, y)| self.contains(x, y)))
    }

    /// Conjugate ideal (omega -> t - omega).
    fn conj(&self) -> Result<Ideal> {
        if self.field == Field::Rational {
            return Ok(self.clone());
        }
        let (t, _) = self.field.omega_relation();
        Ideal::from_generators(
            self.field,
            &[
                (self.a.clone(), Int::zero()),
                (&self.b + &self.c * Int::from(t), -self.c.clone()),
            ],
        )
    }

    /// Exact quotient J = self / other, using I * conj(I) = (N(I)):
    /// self * conj(other) scaled down by N(other).
    pub fn quotient(&self, other: &Ideal) -> Result<Ideal> {
        self.check_field(other)?;
        if !other.divides(self)? {
            return Err(Error::InvalidConfig("quotient of non-divisible ideals".into()));
        }
        if self.field == Field::Rational {
            return Ideal::new(self.field, &self.a / &other.a, Int::zero(), Int::from(1));
        }
        // quadratic case: I * conj(I) = (N(I))
        let num = self.mul(&other.conj()?)?;
        let n = other.norm();
        for v in [&num.a, &num.b, &num.c] {
            debug_assert!((v % &n).is_zero());
        }
        Ideal::new(self.field, &num.a / &n, &num.b / &n, &num.c / &n)
    }

    /// True for prime ideals: prime norm, or the inert (q) with q prime
    /// and the minimal polynomial of omega irreducible mod q.
    pub fn is_prime(&self) -> bool {
        let n = self.norm();
        let Some(n64) = n.to_u64() else {
            return false;
        };
        if is_rational_prime(n64) {
            return true;
        }
        if self.field == Field::Rational {
            return false;
        }
        let q = num_integer::Roots::sqrt(&n64);
        if q * q != n64 || !is_rational_prime(q) {
            return false;
        }
        // inert check: self = (q) and x^2 - t x - s has no root mod q
        let (t, s) = self.field.omega_relation();
        let inert = (0..q as i64).all(|r| (r * r - t * r - s).rem_euclid(q as i64) != 0);
        inert && self.a == Int::from(q as i64) && self.b.is_zero() && self.c == Int::from(q as i64)
    }

    /// All ideals containing the sum self + other.
    pub fn divisors_of_sum(&self, other: &Ideal) -> Result<Vec<Ideal>> {
        let s = self.add(other)?;
        let n = s
            .norm()
            .to_i64()
            .ok_or_else(|| Error::CapExceeded("sum norm too large to enumerate".into()))?;
        let mut out = Vec::new();
        for cand in ideals_of_norm_dividing(self.field, n)? {
            if cand.divides(&s)? {
                out.push(cand);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.a, self.b, self.c)
    }
}

fn is_rational_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            return false;
        }
        q += 1;
    }
    true
}

/// All ideals whose norm divides n (n > 0; exhaustive HNF scan).
fn ideals_of_norm_dividing(field: Field, n: i64) -> Result<Vec<Ideal>> {
    if n <= 0 {
        return Err(Error::InvalidConfig("norm must be positive".into()));
    }
    if n > 1_000_000 {
        return Err(Error::CapExceeded(format!("ideal scan cap at norm 10^6, got {n}")));
    }
    let mut out = Vec::new();
    if field == Field::Rational {
        for a in 1..=n {
            if n % a == 0 {
                out.push(Ideal::new(field, Int::from(a), Int::zero(), Int::from(1))?);
            }
        }
        return Ok(out);
    }
    for c in 1..=n {
        if n % c != 0 {
            continue;
        }
        let mut a = c;
        while a * c <= n {
            if (n % (a * c)) == 0 {
                let mut b = 0;
                while b < a {
                    if let Ok(i) = Ideal::new(field, Int::from(a), Int::from(b), Int::from(c)) {
                        out.push(i);
                    }
                    b += c;
                }
            }
            a += c;
        }
    }
    out.sort();
    Ok(out)
}

/// All ideals of norm at most the bound (test/CLI support).
pub fn ideals_up_to_norm(field: Field, bound: i64) -> Result<Vec<Ideal>> {
    let mut out = std::collections::BTreeSet::new();
    for n in 1..=bound {
        for i in ideals_of_norm_dividing(field, n)? {
            if i.norm() <= Int::from(bound) {
                out.insert(i);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Prime ideals above a rational prime p <= 10^4, found by splitting the
/// minimal polynomial of omega mod p.
pub fn primes_above(field: Field, p: u64) -> Result<Vec<Ideal>> {
    if !is_rational_prime(p) {
        return Err(Error::NotPrime);
    }
    if p > 10_000 {
        return Err(Error::CapExceeded(format!("prime splitting cap at 10^4, got {p}")));
    }
    if field == Field::Rational {
        return Ok(vec![Ideal::integer(field, p as i64)?]);
    }
    let (t, s) = field.omega_relation();
    let pi = p as i64;
    let roots: Vec<i64> = (0..pi).filter(|r| (r * r - t * r - s).rem_euclid(pi) == 0).collect();
    if roots.is_empty() {
        // inert
        return Ok(vec![Ideal::integer(field, pi)?]);
    }
    let mut out = Vec::new();
    for r in roots {
        // the prime (p, omega - r)
        out.push(Ideal::from_generators(
            field,
            &[(Int::from(pi), Int::zero()), (Int::from(-r), Int::from(1))],
        )?);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Character on ideals coprime to the level; only the trivial character
/// is modeled (spec restricts the corpus to it).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdealChar {
    Trivial,
}

impl IdealChar {
    pub fn value(&self, _i: &Ideal) -> Rat {
        Rat::from_integer(Int::from(1))
    }

    pub fn spec(&self) -> &'static str {
        "1"
    }

    pub fn parse_spec(s: &str) -> Result<IdealChar> {
        if s == "1" {
            Ok(IdealChar::Trivial)
        } else {
            Err(Error::InvalidConfig(format!("unsupported ideal character {s}")))
        }
    }
}

/// Finite coefficient map ideal -> C(ideal), with the weight datum
/// k0 = max of the archimedean weights.
#[derive(Debug, Clone)]
pub struct IdealCoeffMap {
    pub field: Field,
    pub k0: i64,
    pub chi: IdealChar,
    pub coeffs: BTreeMap<Ideal, Rat>,
}

impl IdealCoeffMap {
    pub fn new(field: Field, k0: i64, chi: IdealChar) -> IdealCoeffMap {
        IdealCoeffMap {
            field,
            k0,
            chi,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, i: Ideal, v: Rat) -> Result<()> {
        if i.field() != self.field {
            return Err(Error::FieldMismatch);
        }
        self.coeffs.insert(i, v);
        Ok(())
    }

    pub fn get(&self, i: &Ideal) -> Option<&Rat> {
        self.coeffs.get(i)
    }
}

/// One step of the recursion: C(m, T'(p)f) over the requested targets.
pub fn hecke_prime(c: &IdealCoeffMap, p: &Ideal, targets: &[Ideal]) -> Result<IdealCoeffMap> {
    if p.field() != c.field {
        return Err(Error::FieldMismatch);
    }
    if !p.is_prime() {
        return Err(Error::NotPrime);
    }
    let mut missing = Vec::new();
    let mut out = IdealCoeffMap::new(c.field, c.k0, c.chi);
    for m in targets {
        let mp = m.mul(p)?;
        let mut acc = Rat::zero();
        let mut ok = true;
        for a in m.divisors_of_sum(p)? {
            let a2 = a.mul(&a)?;
            let key = mp.quotient(&a2)?;
            let Some(v) = c.get(&key) else {
                missing.push(key.to_string());
                ok = false;
                continue;
            };
            let na = a.norm();
            let mut w = Rat::from_integer(Int::from(1));
            for _ in 0..(c.k0 - 1).max(0) {
                w *= Rat::from_integer(na.clone());
            }
            acc += c.chi.value(&a) * w * v;
        }
        if ok {
            out.set(m.clone(), acc)?;
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::MissingIndices(missing));
    }
    Ok(out)
}

/// T'(p) T'(q) = T'(q) T'(p) on the given targets; the intermediate
/// support is derived automatically and closure failures surface as
/// missing-index errors.
pub fn commute_check(c: &IdealCoeffMap, p: &Ideal, q: &Ideal, targets: &[Ideal]) -> Result<bool> {
    let mid_for = |outer: &Ideal, targets: &[Ideal]| -> Result<Vec<Ideal>> {
        let mut keys = std::collections::BTreeSet::new();
        for m in targets {
            let mo = m.mul(outer)?;
            for a in m.divisors_of_sum(outer)? {
                keys.insert(mo.quotient(&a.mul(&a)?)?);
            }
        }
        Ok(keys.into_iter().collect())
    };
    let mid_p = mid_for(p, targets)?;
    let mid_q = mid_for(q, targets)?;
    let pq = hecke_prime(&hecke_prime(c, q, &mid_p)?, p, targets)?;
    let qp = hecke_prime(&hecke_prime(c, p, &mid_q)?, q, targets)?;
    Ok(targets.iter().all(|m| pq.get(m) == qp.get(m)))
}

// ---------------------------------------------------------------------------
// F = Q bridge to the degree-1 Siegel engine, and the line format
// ---------------------------------------------------------------------------

/// Rational-field coefficient map as a degree-1 expansion, ideal (m)
/// mapped to the index with trace m.
pub fn to_qexp(c: &IdealCoeffMap, theta: i64) -> Result<QExpansion> {
    if c.field != Field::Rational {
        return Err(Error::Unsupported("expansion bridge is for F = Q".into()));
    }
    let mut f = QExpansion::new(
        1,
        1,
        vec![c.k0],
        crate::fourier::CharTuple::trivial(1, 1),
        RingTag::Q,
        Mode::Explicit,
    )?;
    f.set_coeff(HalfIntMat::scalar(0), vec![crate::exact::Scalar::from_rat(Rat::zero())])?;
    for m in 1..=theta {
        let key = Ideal::integer(Field::Rational, m)?;
        let v = c
            .get(&key)
            .ok_or_else(|| Error::MissingIndices(vec![key.to_string()]))?;
        f.set_coeff(
            HalfIntMat::scalar(m),
            vec![crate::exact::Scalar::from_rat(v.clone())],
        )?;
    }
    Ok(f)
}

/// Inverse of to_qexp on nonzero indices.
pub fn from_qexp(f: &QExpansion, k0: i64) -> Result<IdealCoeffMap> {
    if f.n() != 1 {
        return Err(Error::Unsupported("expansion bridge is for degree 1".into()));
    }
    let mut c = IdealCoeffMap::new(Field::Rational, k0, IdealChar::Trivial);
    for (t, v) in f.iter() {
        let m = t.trace();
        if m == 0 {
            continue;
        }
        let r = v[0]
            .as_rat()
            .ok_or_else(|| Error::InvalidConfig("irrational coefficient".into()))?;
        c.set(Ideal::integer(Field::Rational, m)?, r.clone())?;
    }
    Ok(c)
}

/// Header "HILB 1", field/weight/character line, then `a b c : coeff`.
pub fn write_coeff_map(c: &IdealCoeffMap) -> String {
    let d = match c.field {
        Field::Rational => 1,
        Field::Quad { d } => d,
    };
    let mut out = format!("HILB 1\nd={} k0={} chi={}\n", d, c.k0, c.chi.spec());
    for (i, v) in &c.coeffs {
        out.push_str(&format!("{i} : {v}\n"));
    }
    out
}

pub fn parse_coeff_map(text: &str) -> Result<IdealCoeffMap> {
    let err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.into(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "HILB 1")) => {}
        _ => return Err(err(1, "expected header HILB 1")),
    }
    let (_, meta) = lines.next().ok_or_else(|| err(2, "missing field line"))?;
    let mut d = None;
    let mut k0 = None;
    let mut chi = None;
    for part in meta.split_whitespace() {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| err(2, "expected key=value"))?;
        match key {
            "d" => d = Some(val.parse::<i64>().map_err(|_| err(2, "bad d"))?),
            "k0" => k0 = Some(val.parse::<i64>().map_err(|_| err(2, "bad k0"))?),
            "chi" => chi = Some(IdealChar::parse_spec(val)?),
            _ => return Err(err(2, "unknown key")),
        }
    }
    let field = match d.ok_or_else(|| err(2, "missing d"))? {
        1 => Field::Rational,
        d => Field::quad(d)?,
    };
    let mut map = IdealCoeffMap::new(
        field,
        k0.ok_or_else(|| err(2, "missing k0"))?,
        chi.ok_or_else(|| err(2, "missing chi"))?,
    );
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once(':')
            .ok_or_else(|| err(ln + 1, "expected `a b c : coeff`"))?;
        let nums: Vec<Int> = lhs
            .split_whitespace()
            .map(|s| s.parse::<Int>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(ln + 1, "bad HNF entry"))?;
        if nums.len() != 3 {
            return Err(err(ln + 1, "expected three HNF entries"));
        }
        let ideal = Ideal::new(field, nums[0].clone(), nums[1].clone(), nums[2].clone())?;
        let coeff = parse_rat_str(rhs.trim()).ok_or_else(|| err(ln + 1, "bad coefficient"))?;
        map.set(ideal, coeff)?;
    }
    Ok(map)
}

fn parse_rat_str(s: &str) -> Option<Rat> {
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n.trim().parse().ok()?;
        let d: Int = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        s.parse::<Int>().ok().map(Rat::from_integer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::delta;
    use crate::integrality::{certify, hecke_matrix};

    fn q5() -> Field {
        Field::quad(5).unwrap()
    }

    fn qi(n: i64) -> Ideal {
        Ideal::integer(Field::Rational, n).unwrap()
    }

    #[test]
    fn field_construction() {
        assert!(Field::quad(4).is_err());
        assert!(Field::quad(12).is_err());
        assert_eq!(q5().discriminant(), 5);
        assert_eq!(Field::quad(2).unwrap().discriminant(), 8);
    }

    #[test]
    fn two_is_inert_in_q5() {
        let two = Ideal::integer(q5(), 2).unwrap();
        assert_eq!(two.norm(), Int::from(4));
        assert!(two.is_prime());
        assert_eq!(primes_above(q5(), 2).unwrap(), vec![two]);
    }

    #[test]
    fn sqrt5_is_ramified() {
        let ps = primes_above(q5(), 5).unwrap();
        assert_eq!(ps.len(), 1);
        let p = &ps[0];
        assert_eq!(p.norm(), Int::from(5));
        // sqrt 5 = -1 + 2 omega generates the same prime
        let s5 = Ideal::principal(q5(), Int::from(-1), Int::from(2)).unwrap();
        assert_eq!(*p, s5);
        assert_eq!(p.mul(p).unwrap(), Ideal::integer(q5(), 5).unwrap());
    }

    #[test]
    fn splitting_in_q5() {
        // 11 = 1 mod 5 splits; 3 is inert
        assert_eq!(primes_above(q5(), 11).unwrap().len(), 2);
        assert_eq!(primes_above(q5(), 3).unwrap().len(), 1);
        assert!(Ideal::integer(q5(), 3).unwrap().is_prime());
        assert!(matches!(primes_above(q5(), 4), Err(Error::NotPrime)));
    }

    #[test]
    fn norm_is_multiplicative() {
        let ideals = ideals_up_to_norm(q5(), 20).unwrap();
        for i in &ideals {
            for j in &ideals {
                let p = i.mul(j).unwrap();
                assert_eq!(p.norm(), i.norm() * j.norm(), "{i} * {j}");
                assert_eq!(p, j.mul(i).unwrap());
            }
        }
        // associativity spot checks
        let a = &ideals[2];
        let b = &ideals[5];
        let c = &ideals[7];
        assert_eq!(a.mul(b).unwrap().mul(c).unwrap(), a.mul(&b.mul(c).unwrap()).unwrap());
    }

    #[test]
    fn quotient_inverts_product() {
        let ideals = ideals_up_to_norm(q5(), 15).unwrap();
        for i in &ideals {
            for j in &ideals {
                let p = i.mul(j).unwrap();
                assert_eq!(p.quotient(i).unwrap(), *j);
            }
        }
    }

    #[test]
    fn divisors_of_coprime_sum() {
        let divs = qi(2).divisors_of_sum(&qi(3)).unwrap();
        assert_eq!(divs, vec![qi(1)]);
        let divs = qi(4).divisors_of_sum(&qi(2)).unwrap();
        assert_eq!(divs, vec![qi(1), qi(2)]);
    }

    #[test]
    fn field_mismatch_rejected() {
        let i = qi(2);
        let j = Ideal::integer(q5(), 2).unwrap();
        assert!(matches!(i.mul(&j), Err(Error::FieldMismatch)));
    }

    #[test]
    fn hecke_prime_rational_example() {
        let mut c = IdealCoeffMap::new(Field::Rational, 2, IdealChar::Trivial);
        c.set(qi(1), Rat::from_integer(Int::from(1))).unwrap();
        c.set(qi(2), Rat::from_integer(Int::from(5))).unwrap();
        c.set(qi(4), Rat::from_integer(Int::from(9))).unwrap();
        let out = hecke_prime(&c, &qi(2), &[qi(1), qi(2)]).unwrap();
        // p coprime to m: single term C(mp)
        assert_eq!(*out.get(&qi(1)).unwrap(), Rat::from_integer(Int::from(5)));
        // p | m: C(4) + 2 * C(1) = 11
        assert_eq!(*out.get(&qi(2)).unwrap(), Rat::from_integer(Int::from(11)));
    }

    #[test]
    fn hecke_prime_missing_support() {
        let mut c = IdealCoeffMap::new(Field::Rational, 2, IdealChar::Trivial);
        c.set(qi(1), Rat::from_integer(Int::from(1))).unwrap();
        match hecke_prime(&c, &qi(2), &[qi(1)]) {
            Err(Error::MissingIndices(v)) => assert_eq!(v, vec!["2 0 1".to_string()]),
            other => panic!("expected missing support, got {other:?}"),
        }
    }

    #[test]
    fn classical_rule_specialization() {
        // C(m, T'(p) f) = C(mp) + p^(k0-1) C(m/p) over F = Q
        let mut c = IdealCoeffMap::new(Field::Rational, 4, IdealChar::Trivial);
        for m in 1..=60 {
            c.set(qi(m), Rat::from_integer(Int::from(m * m + 1))).unwrap();
        }
        for p in [2i64, 3, 5] {
            for m in 1..=10 {
                let out = hecke_prime(&c, &qi(p), &[qi(m)]).unwrap();
                let mut want = Rat::from_integer(Int::from((m * p) * (m * p) + 1));
                if m % p == 0 {
                    let q = m / p;
                    want += Rat::from_integer(Int::from(p).pow(3) * Int::from(q * q + 1));
                }
                assert_eq!(*out.get(&qi(m)).unwrap(), want, "p={p} m={m}");
            }
        }
    }

    #[test]
    fn delta_eigenvalue_cross_check() {
        // tau data under T'(2) reproduces the Siegel-engine eigenvalue -24
        let f = delta(16).unwrap();
        let c = from_qexp(&f, 12).unwrap();
        let targets: Vec<Ideal> = (1..=8).map(qi).collect();
        let out = hecke_prime(&c, &qi(2), &targets).unwrap();
        for m in 1..=8 {
            let want = c.get(&qi(m)).unwrap() * Rat::from_integer(Int::from(-24));
            assert_eq!(*out.get(&qi(m)).unwrap(), want, "m={m}");
        }
    }

    #[test]
    fn integer_data_stays_integer() {
        let mut c = IdealCoeffMap::new(q5(), 3, IdealChar::Trivial);
        for (k, i) in ideals_up_to_norm(q5(), 60).unwrap().into_iter().enumerate() {
            c.set(i, Rat::from_integer(Int::from(k as i64 * 7 - 3))).unwrap();
        }
        let p = primes_above(q5(), 5).unwrap().remove(0);
        let targets: Vec<Ideal> = ideals_up_to_norm(q5(), 10).unwrap();
        let out = hecke_prime(&c, &p, &targets).unwrap();
        assert!(out.coeffs.values().all(|v| v.is_integer()));
    }

    #[test]
    fn commute_rational() {
        let mut c = IdealCoeffMap::new(Field::Rational, 2, IdealChar::Trivial);
        for m in 1..=216 {
            if 216 % m == 0 {
                c.set(qi(m), Rat::from_integer(Int::from(m * 13 % 37 - 18))).unwrap();
            }
        }
        let targets: Vec<Ideal> = [1, 2, 3, 6].into_iter().map(qi).collect();
        assert!(commute_check(&c, &qi(2), &qi(3), &targets).unwrap());
        assert!(commute_check(&c, &qi(2), &qi(2), &targets).unwrap());
    }

    #[test]
    fn commute_quadratic() {
        let mut c = IdealCoeffMap::new(q5(), 2, IdealChar::Trivial);
        for i in ideals_up_to_norm(q5(), 100).unwrap() {
            let (a, b, _) = i.hnf();
            let v = (a * Int::from(3) + b * Int::from(11)) % Int::from(17) - Int::from(8);
            c.set(i, Rat::from_integer(v)).unwrap();
        }
        let p = primes_above(q5(), 5).unwrap().remove(0);
        let q = Ideal::integer(q5(), 2).unwrap();
        let targets: Vec<Ideal> = ideals_up_to_norm(q5(), 4).unwrap();
        assert!(commute_check(&c, &p, &q, &targets).unwrap());
    }

    #[test]
    fn roundtrip_line_format() {
        let mut c = IdealCoeffMap::new(q5(), 2, IdealChar::Trivial);
        for i in ideals_up_to_norm(q5(), 12).unwrap() {
            let n = i.norm();
            c.set(i, Rat::new(n, Int::from(3))).unwrap();
        }
        let text = write_coeff_map(&c);
        let back = parse_coeff_map(&text).unwrap();
        assert_eq!(back.field, c.field);
        assert_eq!(back.k0, c.k0);
        assert_eq!(back.coeffs, c.coeffs);
        assert!(parse_coeff_map("HILB 2\n").is_err());
        assert!(parse_coeff_map("HILB 1\nd=5 k0=2 chi=1\n1 1 1 : 3\n").is_err());
    }

    #[test]
    fn certification_via_integrality_module() {
        // synthetic stable pair: scaled E12 and Delta coefficient maps
        let e = crate::corpus::eisenstein(12, 24).unwrap();
        let d = delta(24).unwrap();
        let op = |f: &QExpansion| {
            let c = from_qexp(f, 12)?;
            let targets: Vec<Ideal> = (1..=8).map(qi).collect();
            let out = hecke_prime(&c, &qi(2), &targets)?;
            let mut g = to_qexp(&out, 8)?;
            // constant term transforms by 1 + p^(k0-1) for the Eisenstein row;
            // solving only sees indices >= 1, so drop it entirely
            g.set_coeff(
                HalfIntMat::scalar(0),
                vec![crate::exact::Scalar::from_rat(Rat::zero())],
            )?;
            Ok(g)
        };
        // strip constant terms so both maps are honest ideal-indexed data
        let strip = |f: &QExpansion| {
            let mut g = QExpansion::new(
                1,
                1,
                vec![12],
                crate::fourier::CharTuple::trivial(1, 1),
                RingTag::Q,
                Mode::Explicit,
            )
            .unwrap();
            for (t, v) in f.iter() {
                if t.trace() > 0 {
                    g.set_coeff(t.clone(), v.clone()).unwrap();
                }
            }
            g
        };
        let basis = vec![strip(&e), strip(&d)];
        let m = hecke_matrix(&basis, op).unwrap();
        let cert = certify(&m, &basis).unwrap();
        assert!(cert.verdict, "{cert}");
        assert_eq!(
            cert.charpoly.coeffs()[0],
            Rat::from_integer(Int::from(-49176))
        );
    }
}
