//! Fourier index lattice for Siegel expansions, canonicalization of
//! binary indices, Dirichlet character tuples, and the QEXP text format.

use crate::exact::{CycInt, Int, IntMat, Scalar};
use crate::{Error, Result};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Symmetric positive semi-definite half-integral index T, stored as
/// G = 2T so that all arithmetic stays in the integers: G is symmetric
/// with even diagonal; half-integrality of T is a parity condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfIntMat {
    n: usize,
    g: Vec<i64>,
}

impl HalfIntMat {
    /// Build from the rows of G = 2T; enforces all invariants.
    pub fn from_g_rows(rows: &[&[i64]]) -> Result<Self> {
        let n = rows.len();
        let mut g = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch("ragged index matrix".into()));
            }
            g.extend_from_slice(r);
        }
        let m = HalfIntMat { n, g };
        m.validate()?;
        Ok(m)
    }

    pub fn from_g_vec(n: usize, g: Vec<i64>) -> Result<Self> {
        if g.len() != n * n {
            return Err(Error::DimensionMismatch("index entry count".into()));
        }
        let m = HalfIntMat { n, g };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.at(i, i) % 2 != 0 {
                return Err(Error::InvalidConfig(format!(
                    "odd diagonal entry {} in G",
                    self.at(i, i)
                )));
            }
            for j in 0..i {
                if self.at(i, j) != self.at(j, i) {
                    return Err(Error::InvalidConfig("index matrix not symmetric".into()));
                }
            }
        }
        if !self.is_psd() {
            return Err(Error::InvalidConfig("index matrix not PSD".into()));
        }
        Ok(())
    }

    pub fn zero(n: usize) -> Self {
        HalfIntMat {
            n,
            g: vec![0; n * n],
        }
    }

    /// n=1 index T=(t), G=(2t).
    pub fn scalar(t: i64) -> Self {
        assert!(t >= 0);
        HalfIntMat { n: 1, g: vec![2 * t] }
    }

    /// Diagonal T = diag(t_1..t_n).
    pub fn diag(ts: &[i64]) -> Self {
        let n = ts.len();
        let mut g = vec![0i64; n * n];
        for (i, &t) in ts.iter().enumerate() {
            assert!(t >= 0);
            g[i * n + i] = 2 * t;
        }
        HalfIntMat { n, g }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry of G = 2T.
    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.g[i * self.n + j]
    }

    /// tr(T), exact since diag(G) is even.
    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| self.at(i, i)).sum::<i64>() / 2
    }

    /// Upper-triangular entries of G, row-major: the canonical sort key
    /// and the serialized form.
    pub fn upper_entries(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.at(i, j));
            }
        }
        out
    }

    pub fn g_mat(&self) -> IntMat {
        IntMat::from_rows(
            (0..self.n)
                .map(|i| (0..self.n).map(|j| Int::from(self.at(i, j))).collect())
                .collect(),
        )
    }

    /// Exact PSD test: every principal minor of G is nonnegative.
    pub fn is_psd(&self) -> bool {
        for mask in 1u32..(1 << self.n) {
            let idx: Vec<usize> = (0..self.n).filter(|i| mask >> i & 1 == 1).collect();
            if minor_i128(&self.g, self.n, &idx) < 0 {
                return false;
            }
        }
        true
    }

    /// det(2T) for n = 2.
    pub fn det_g(&self) -> i64 {
        assert_eq!(self.n, 2);
        self.at(0, 0) * self.at(1, 1) - self.at(0, 1) * self.at(1, 0)
    }
}

fn minor_i128(g: &[i64], n: usize, idx: &[usize]) -> i128 {
    match idx.len() {
        1 => g[idx[0] * n + idx[0]] as i128,
        2 => {
            let (a, b) = (idx[0], idx[1]);
            let (p, q, r) = (
                g[a * n + a] as i128,
                g[a * n + b] as i128,
                g[b * n + b] as i128,
            );
            p * r - q * q
        }
        3 => {
            let m = |i: usize, j: usize| g[idx[i] * n + idx[j]] as i128;
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        }
        _ => unreachable!("degree cap is 3"),
    }
}

impl PartialOrd for HalfIntMat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HalfIntMat {
    /// Lexicographic on the upper-triangular entries of G.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.upper_entries().cmp(&other.upper_entries()))
    }
}

/// All T with tr(T) <= theta, in canonical (lex on G) order.
pub fn enumerate_indices(n: usize, theta: i64) -> Result<Vec<HalfIntMat>> {
    if !(1..=3).contains(&n) {
        return Err(Error::Unsupported(format!("degree {n} not in 1..=3")));
    }
    if theta < 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    // Diagonals of G are even with half-trace bounded by theta;
    // off-diagonals bounded by the 2x2 minor condition.
    let mut diag = vec![0i64; n];
    enumerate_diag(&mut diag, 0, theta, &mut |d| {
        let mut g = vec![0i64; n * n];
        for i in 0..n {
            g[i * n + i] = d[i];
        }
        let offs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        fill_offdiag(&mut g, n, d, &offs, 0, &mut |g| {
            if let Ok(m) = HalfIntMat::from_g_vec(n, g.to_vec()) {
                out.push(m);
            }
        });
    });
    out.sort();
    Ok(out)
}

fn enumerate_diag(diag: &mut [i64], pos: usize, left: i64, emit: &mut impl FnMut(&[i64])) {
    if pos == diag.len() {
        emit(diag);
        return;
    }
    let mut v = 0;
    while v <= left {
        diag[pos] = 2 * v;
        enumerate_diag(diag, pos + 1, left - v, emit);
        v += 1;
    }
}

fn fill_offdiag(
    g: &mut [i64],
    n: usize,
    diag: &[i64],
    offs: &[(usize, usize)],
    pos: usize,
    emit: &mut impl FnMut(&[i64]),
) {
    if pos == offs.len() {
        emit(g);
        return;
    }
    let (i, j) = offs[pos];
    let bound = isqrt(diag[i] * diag[j]);
    for v in -bound..=bound {
        g[i * n + j] = v;
        g[j * n + i] = v;
        fill_offdiag(g, n, diag, offs, pos + 1, emit);
    }
}

fn isqrt(x: i64) -> i64 {
    debug_assert!(x >= 0);
    let mut r = (x as f64).sqrt() as i64;
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    while r * r > x {
        r -= 1;
    }
    r
}

/// S = p^{-delta} D T tD if half-integral PSD, else None (a(S, f) = 0
/// for S outside the index lattice).
pub fn transform_index(t: &HalfIntMat, d: &IntMat, p: u64, delta: u32) -> Option<HalfIntMat> {
    let n = t.n();
    assert_eq!(d.rows(), n);
    assert_eq!(d.cols(), n);
    let g2 = d.mul(&t.g_mat()).mul(&d.transpose());
    let scale = Int::from(p).pow(delta);
    let mut g = Vec::with_capacity(n * n);
    for e in g2.entries() {
        let (q, r) = num_integer::Integer::div_rem(e, &scale);
        if !r.is_zero() {
            return None;
        }
        let v: i64 = i64::try_from(&q).ok()?;
        g.push(v);
    }
    HalfIntMat::from_g_vec(n, g).ok()
}

/// Gauss reduction of a binary index: T_c = U T tU with U in GL_2(Z),
/// T_c the canonical representative (0 <= 2t12 <= t11 <= t22 when
/// definite; content * diag(1,0) when rank 1; 0 when rank 0).
pub fn reduce_binary(t: &HalfIntMat) -> (HalfIntMat, IntMat) {
    assert_eq!(t.n(), 2);
    if t.det_g() == 0 {
        return reduce_rank_deficient(t);
    }
    // Work on (a, b, c) = (t11, 2*t12, t22) as i64; U accumulates row ops.
    let (mut a, mut b, mut c) = (t.at(0, 0) / 2, t.at(0, 1), t.at(1, 1) / 2);
    let mut u = [[1i64, 0], [0, 1]];
    loop {
        if a > c {
            // swap variables
            std::mem::swap(&mut a, &mut c);
            u = [[u[1][0], u[1][1]], [u[0][0], u[0][1]]];
            continue;
        }
        // shift x -> x - s*y to put b in (-a, a]
        let s = b.div_euclid(2 * a);
        let s = if b - s * 2 * a > a { s + 1 } else { s };
        if s != 0 {
            // (x, y) -> (x, y + s x) on the form equals row op on U
            c += s * s * a - s * b;
            b -= 2 * s * a;
            u[1][0] -= s * u[0][0];
            u[1][1] -= s * u[0][1];
            continue;
        }
        if a > c {
            continue;
        }
        if b < 0 {
            b = -b;
            u[1][0] = -u[1][0];
            u[1][1] = -u[1][1];
            continue;
        }
        debug_assert!(0 <= b && b <= a && a <= c);
        break;
    }
    let tc = HalfIntMat::from_g_rows(&[&[2 * a, b], &[b, 2 * c]]).expect("reduced form valid");
    let umat = IntMat::from_i64_rows(&[&u[0], &u[1]]);
    debug_assert_eq!(umat.mul(&t.g_mat()).mul(&umat.transpose()), tc.g_mat());
    (tc, umat)
}

fn reduce_rank_deficient(t: &HalfIntMat) -> (HalfIntMat, IntMat) {
    let g = [t.at(0, 0), t.at(0, 1), t.at(1, 1)];
    if g == [0, 0, 0] {
        return (HalfIntMat::zero(2), IntMat::identity(2));
    }
    // T = m v tv with v primitive; send v to e1.
    let v: (i64, i64) = if g[0] != 0 {
        let gc = num_integer::gcd(g[0], g[1]);
        (g[0] / gc, g[1] / gc)
    } else {
        (0, 1)
    };
    let m = if v.0 != 0 {
        (g[0] / 2) / (v.0 * v.0)
    } else {
        (g[2] / 2) / (v.1 * v.1)
    };
    let (gcd, x, y) = ext_gcd_i64(v.0, v.1);
    debug_assert_eq!(gcd, 1);
    let u = IntMat::from_i64_rows(&[&[x, y], &[-v.1, v.0]]);
    let tc = HalfIntMat::from_g_rows(&[&[2 * m, 0], &[0, 0]]).expect("rank-1 canonical");
    debug_assert_eq!(u.mul(&t.g_mat()).mul(&u.transpose()), tc.g_mat());
    (tc, u)
}

fn ext_gcd_i64(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        let s = a.signum();
        return (a.abs(), if s == 0 { 1 } else { s }, 0);
    }
    let (g, x, y) = ext_gcd_i64(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

/// Dirichlet character mod N with values in the `order`-th roots of
/// unity, stored as exponents per residue (None off the unit group).
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletChar {
    modulus: u64,
    order: u64,
    exps: Vec<Option<u64>>,
}

impl DirichletChar {
    pub fn new(modulus: u64, order: u64, exps: Vec<Option<u64>>) -> Result<Self> {
        if modulus == 0 || order == 0 || exps.len() != modulus as usize {
            return Err(Error::InvalidConfig("bad character table shape".into()));
        }
        let c = DirichletChar {
            modulus,
            order,
            exps,
        };
        for r in 0..modulus {
            let coprime = num_integer::gcd(r, modulus) == 1 || modulus == 1;
            if coprime != c.exps[r as usize].is_some() {
                return Err(Error::InvalidConfig(format!(
                    "character support wrong at residue {r}"
                )));
            }
        }
        if c.exps[1 % modulus as usize].unwrap_or(1) != 0 {
            return Err(Error::InvalidConfig("character not 1 at 1".into()));
        }
        for a in 0..modulus {
            for b in a..modulus {
                if let (Some(ea), Some(eb)) = (c.exps[a as usize], c.exps[b as usize]) {
                    let ab = (a * b % modulus) as usize;
                    if c.exps[ab] != Some((ea + eb) % order) {
                        return Err(Error::InvalidConfig(format!(
                            "character not multiplicative at ({a},{b})"
                        )));
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn trivial(modulus: u64) -> Self {
        let exps = (0..modulus)
            .map(|r| {
                if num_integer::gcd(r, modulus) == 1 || modulus == 1 {
                    Some(0)
                } else {
                    None
                }
            })
            .collect();
        DirichletChar {
            modulus,
            order: 1,
            exps,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().flatten().all(|&e| e == 0)
    }

    /// chi(m) as a cyclotomic value (zero off the unit group).
    pub fn value(&self, m: u64) -> CycInt {
        match self.exps[(m % self.modulus) as usize] {
            Some(e) => CycInt::root_of_unity(self.order, e as i64),
            None => CycInt::zero(),
        }
    }

    /// chi(p)^a for a >= 0.
    pub fn value_pow(&self, p: u64, a: u32) -> CycInt {
        let mut acc = CycInt::one();
        let v = self.value(p);
        for _ in 0..a {
            acc = acc.mul(&v);
        }
        acc
    }

    fn spec(&self) -> String {
        let mut s = format!("ord{}[", self.order);
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            match e {
                Some(e) => {
                    let _ = write!(s, "{e}");
                }
                None => s.push('-'),
            }
        }
        s.push(']');
        s
    }

    fn parse_spec(s: &str, modulus: u64) -> Option<Self> {
        let body = s.strip_prefix("ord")?;
        let (order, rest) = body.split_once('[')?;
        let order: u64 = order.parse().ok()?;
        let rest = rest.strip_suffix(']')?;
        let exps: Option<Vec<Option<u64>>> = rest
            .split(',')
            .map(|t| {
                if t == "-" {
                    Some(None)
                } else {
                    t.parse::<u64>().ok().map(Some)
                }
            })
            .collect();
        DirichletChar::new(modulus, order, exps?).ok()
    }
}

/// Tuple (chi_1, ..., chi_n) of characters mod N.
#[derive(Debug, Clone, PartialEq)]
pub struct CharTuple {
    chars: Vec<DirichletChar>,
}

impl CharTuple {
    pub fn new(chars: Vec<DirichletChar>) -> Result<Self> {
        let Some(first) = chars.first() else {
            return Err(Error::InvalidConfig("empty character tuple".into()));
        };
        if chars.iter().any(|c| c.modulus != first.modulus) {
            return Err(Error::InvalidConfig("mixed character moduli".into()));
        }
        Ok(CharTuple { chars })
    }

    pub fn trivial(n: usize, modulus: u64) -> Self {
        CharTuple {
            chars: vec![DirichletChar::trivial(modulus); n],
        }
    }

    pub fn chars(&self) -> &[DirichletChar] {
        &self.chars
    }

    pub fn is_trivial(&self) -> bool {
        self.chars.iter().all(|c| c.is_trivial())
    }

    /// prod_j chi_j(p^{alpha_j}) over the torus exponents alpha_1..alpha_n.
    pub fn torus_value(&self, p: u64, alphas: &[u32]) -> CycInt {
        let mut acc = CycInt::one();
        for (c, &a) in self.chars.iter().zip(alphas) {
            acc = acc.mul(&c.value_pow(p, a));
        }
        acc
    }

    fn spec(&self) -> String {
        if self.is_trivial() {
            return "trivial".into();
        }
        self.chars
            .iter()
            .map(|c| c.spec())
            .collect::<Vec<_>>()
            .join(";")
    }

    fn parse_spec(s: &str, n: usize, modulus: u64) -> Option<Self> {
        if s == "trivial" {
            return Some(CharTuple::trivial(n, modulus));
        }
        let chars: Option<Vec<DirichletChar>> = s
            .split(';')
            .map(|t| DirichletChar::parse_spec(t, modulus))
            .collect();
        let chars = chars?;
        if chars.len() != n {
            return None;
        }
        CharTuple::new(chars).ok()
    }
}

/// Coefficient ring of an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingTag {
    Z,
    Q,
    Cyc(u64),
}

impl RingTag {
    fn spec(&self) -> String {
        match self {
            RingTag::Z => "Z".into(),
            RingTag::Q => "Q".into(),
            RingTag::Cyc(n) => format!("cyc:{n}"),
        }
    }

    fn parse_spec(s: &str) -> Option<Self> {
        match s {
            "Z" => Some(RingTag::Z),
            "Q" => Some(RingTag::Q),
            _ => s.strip_prefix("cyc:").and_then(|t| {
                let n: u64 = t.parse().ok()?;
                (n >= 1).then_some(RingTag::Cyc(n))
            }),
        }
    }

    pub fn conductor(&self) -> u64 {
        match self {
            RingTag::Cyc(n) => *n,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Explicit,
    Class,
}

/// Fourier expansion container keyed by canonical indices. Class mode
/// stores one coefficient per GL_n(Z)-class and is only legal for
/// level-1 scalar even weight, where a(U T tU) = a(T).
#[derive(Debug, Clone, PartialEq)]
pub struct QExpansion {
    n: usize,
    level: u64,
    weight: Vec<i64>,
    chi: CharTuple,
    ring: RingTag,
    mode: Mode,
    dim: usize,
    coeffs: BTreeMap<HalfIntMat, Vec<Scalar>>,
}

impl QExpansion {
    pub fn new(
        n: usize,
        level: u64,
        weight: Vec<i64>,
        chi: CharTuple,
        ring: RingTag,
        mode: Mode,
    ) -> Result<Self> {
        if !(1..=3).contains(&n) || level == 0 {
            return Err(Error::InvalidConfig(format!("degree {n} / level {level}")));
        }
        if weight.len() != n {
            return Err(Error::InvalidConfig("weight length != degree".into()));
        }
        if chi.chars().len() != n || chi.chars()[0].modulus() != level {
            return Err(Error::InvalidConfig("character tuple shape".into()));
        }
        let dim = crate::weights::model_dimension(&weight)?;
        if mode == Mode::Class {
            let scalar_even = weight.iter().all(|&k| k == weight[0]) && weight[0] % 2 == 0;
            if level != 1 || !scalar_even || n > 2 {
                return Err(Error::InvalidConfig(
                    "class mode needs level 1, scalar even weight, degree <= 2".into(),
                ));
            }
        }
        Ok(QExpansion {
            n,
            level,
            weight,
            chi,
            ring,
            mode,
            dim,
            coeffs: BTreeMap::new(),
        })
    }

    /// Level-1 scalar-weight expansion, the common corpus shape.
    pub fn scalar_level_one(n: usize, k: i64, mode: Mode) -> Result<Self> {
        QExpansion::new(
            n,
            1,
            vec![k; n],
            CharTuple::trivial(n, 1),
            RingTag::Z,
            mode,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn weight(&self) -> &[i64] {
        &self.weight
    }

    pub fn chi(&self) -> &CharTuple {
        &self.chi
    }

    pub fn ring(&self) -> RingTag {
        self.ring
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn canonical_key(&self, t: &HalfIntMat) -> HalfIntMat {
        match (self.mode, self.n) {
            (Mode::Class, 2) => reduce_binary(t).0,
            _ => t.clone(),
        }
    }

    pub fn set_coeff(&mut self, t: HalfIntMat, c: Vec<Scalar>) -> Result<()> {
        if t.n() != self.n {
            return Err(Error::DimensionMismatch("index degree".into()));
        }
        if c.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "coefficient arity {} vs model dimension {}",
                c.len(),
                self.dim
            )));
        }
        let key = self.canonical_key(&t);
        self.coeffs.insert(key, c);
        Ok(())
    }

    pub fn set_scalar_coeff(&mut self, t: HalfIntMat, c: i64) -> Result<()> {
        self.set_coeff(t, vec![Scalar::from_int(c)])
    }

    pub fn coeff(&self, t: &HalfIntMat) -> Option<&[Scalar]> {
        self.coeffs.get(&self.canonical_key(t)).map(|v| &v[..])
    }

    /// Stored keys in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &HalfIntMat> {
        self.coeffs.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HalfIntMat, &Vec<Scalar>)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Every coefficient entry an algebraic integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs
            .values()
            .flat_map(|v| v.iter())
            .all(|c| c.is_algebraic_integer())
    }

    /// Same shape (degree, level, weight, character, ring, mode).
    pub fn same_shape(&self, other: &QExpansion) -> bool {
        self.n == other.n
            && self.level == other.level
            && self.weight == other.weight
            && self.chi == other.chi
            && self.ring == other.ring
            && self.mode == other.mode
    }
}

/// Serialize to QEXP text format version 1 (UTF-8, LF).
pub fn write_qexp(f: &QExpansion) -> String {
    let mut out = String::from("QEXP 1\n");
    let weight = f
        .weight
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let _ = writeln!(
        out,
        "n={} N={} weight={} chi={} ring={} mode={}",
        f.n,
        f.level,
        weight,
        f.chi.spec(),
        f.ring.spec(),
        match f.mode {
            Mode::Explicit => "explicit",
            Mode::Class => "class",
        }
    );
    for (t, c) in f.iter() {
        let key = t
            .upper_entries()
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let vals = c
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "{key} : {vals}");
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parse QEXP text format version 1.
pub fn parse_qexp(text: &str) -> Result<QExpansion> {
    let mut lines = text.lines().enumerate();
    let (_, magic) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if magic != "QEXP 1" {
        return Err(parse_err(1, "expected header `QEXP 1`"));
    }
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing parameter header"))?;

    let mut n = None;
    let mut level = None;
    let mut weight: Option<Vec<i64>> = None;
    let mut chi_spec = None;
    let mut ring = None;
    let mut mode = None;
    for field in header.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| parse_err(2, format!("malformed field `{field}`")))?;
        match key {
            "n" => n = Some(val.parse::<usize>().map_err(|_| parse_err(2, "bad n"))?),
            "N" => level = Some(val.parse::<u64>().map_err(|_| parse_err(2, "bad N"))?),
            "weight" => {
                let w: std::result::Result<Vec<i64>, _> =
                    val.split(',').map(|t| t.parse::<i64>()).collect();
                weight = Some(w.map_err(|_| parse_err(2, "bad weight"))?);
            }
            "chi" => chi_spec = Some(val.to_string()),
            "ring" => {
                ring = Some(
                    RingTag::parse_spec(val).ok_or_else(|| parse_err(2, "bad ring tag"))?,
                )
            }
            "mode" => {
                mode = Some(match val {
                    "explicit" => Mode::Explicit,
                    "class" => Mode::Class,
                    _ => return Err(parse_err(2, "bad mode")),
                })
            }
            _ => return Err(parse_err(2, format!("unknown header key `{key}`"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(2, "missing n"))?;
    let level = level.ok_or_else(|| parse_err(2, "missing N"))?;
    let weight = weight.ok_or_else(|| parse_err(2, "missing weight"))?;
    let chi_spec = chi_spec.ok_or_else(|| parse_err(2, "missing chi"))?;
    let ring = ring.ok_or_else(|| parse_err(2, "missing ring"))?;
    let mode = mode.ok_or_else(|| parse_err(2, "missing mode"))?;
    let chi = CharTuple::parse_spec(&chi_spec, n, level)
        .ok_or_else(|| parse_err(2, "bad character spec"))?;

    let mut f = QExpansion::new(n, level, weight, chi, ring, mode)
        .map_err(|e| parse_err(2, e.to_string()))?;
    let upper_len = n * (n + 1) / 2;
    let mut last_key: Option<HalfIntMat> = None;
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (key_part, val_part) = line
            .split_once(" : ")
            .ok_or_else(|| parse_err(lineno, "missing ` : ` separator"))?;
        let entries: std::result::Result<Vec<i64>, _> = key_part
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect();
        let entries = entries.map_err(|_| parse_err(lineno, "bad index entry"))?;
        if entries.len() != upper_len {
            return Err(parse_err(
                lineno,
                format!("expected {upper_len} index entries, got {}", entries.len()),
            ));
        }
        // unpack upper triangle into a full symmetric matrix
        let mut g = vec![0i64; n * n];
        let mut pos = 0;
        for r in 0..n {
            for c in r..n {
                g[r * n + c] = entries[pos];
                g[c * n + r] = entries[pos];
                pos += 1;
            }
        }
        let t = HalfIntMat::from_g_vec(n, g).map_err(|e| parse_err(lineno, e.to_string()))?;
        if let Some(prev) = &last_key {
            if *prev >= t {
                return Err(parse_err(lineno, "indices not strictly increasing"));
            }
        }
        last_key = Some(t.clone());
        let coeffs = split_scalars(val_part)
            .ok_or_else(|| parse_err(lineno, "bad coefficient list"))?
            .iter()
            .map(|s| Scalar::parse(s, ring.conductor()))
            .collect::<Option<Vec<Scalar>>>()
            .ok_or_else(|| parse_err(lineno, "bad coefficient"))?;
        if ring == RingTag::Z && !coeffs.iter().all(|c| c.is_algebraic_integer()) {
            return Err(parse_err(lineno, "non-integer coefficient under ring=Z"));
        }
        f.set_coeff(t, coeffs)
            .map_err(|e| parse_err(lineno, e.to_string()))?;
    }
    Ok(f)
}

/// Split a coefficient list on commas outside brackets (cyclotomic
/// coordinates contain commas).
fn split_scalars(s: &str) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' => {
                depth += 1;
                cur.push(ch);
            }
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
                cur.push(ch);
            }
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return None;
    }
    out.push(cur);
    Some(out)
}
