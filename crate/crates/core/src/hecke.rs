//! Gauss sums over the B-block groups, the coefficient-level action of
//! T(p^delta) and T_{j,n-j}(p^2), character projection, and the
//! normalization exponents restoring lattice stability at small weight.

use crate::cosets::{b_generators, b_reps, tj_cosets, v_cosets, CosetRep};
use crate::exact::{snf_rect, CycInt, Int, IntMat, Rat, RatMat, Ring, Scalar};
use crate::fourier::{
    enumerate_indices, transform_index, CharTuple, HalfIntMat, Mode, QExpansion, RingTag,
};
use crate::weights::{build_model, HighestWeight};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet};

/// Value of a B-block exponential sum. The cyclotomic sum always
/// collapses to a rational integer, either 0 or the full group order
/// prod d_l^(n-l+1) over the elementary divisors of D.
#[derive(Debug, Clone)]
pub struct GaussSumResult {
    pub value: Int,
    pub vanished: bool,
    pub snf_divisors: Vec<Int>,
}

fn trace_rat(m: &RatMat) -> Rat {
    (0..m.rows()).map(|i| m.at(i, i).clone()).sum()
}

/// exp(2 pi i tr(S B D^-1)) for S given as G = 2S.
fn b_phase(s_g: &RatMat, b: &IntMat, dinv: &RatMat) -> CycInt {
    let tr = trace_rat(&s_g.mul(&b.to_rat()).mul(dinv)) / Rat::from_integer(Int::from(2));
    CycInt::exp_2pi_i(&tr)
}

/// Validate a Gauss-sum input pair; S is passed as the integral matrix
/// G = 2S (symmetric, even diagonal, PSD not required).
fn gauss_check(s_g: &IntMat, d: &IntMat) -> Result<()> {
    if !s_g.is_square() || !d.is_square() || s_g.rows() != d.rows() {
        return Err(Error::DimensionMismatch("gauss sum shapes".into()));
    }
    if s_g.transpose() != *s_g || (0..s_g.rows()).any(|i| !s_g.at(i, i).is_even()) {
        return Err(Error::InvalidConfig("S is not half-integral".into()));
    }
    if d.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(())
}

fn divisors_of(d: &IntMat) -> Vec<Int> {
    snf_rect(d).divisors().iter().map(|x| x.abs()).collect()
}

fn full_group_order(divisors: &[Int]) -> Int {
    let n = divisors.len();
    let mut v = Int::from(1);
    for (l, dl) in divisors.iter().enumerate() {
        v *= dl.pow((n - l) as u32);
    }
    v
}

/// Term-by-term evaluation of G(S, D) = sum over B of
/// exp(2 pi i tr(S B D^-1)), B over the classes of Lambda_D mod Sym_n(Z) D.
pub fn gauss_brute(s_g: &IntMat, d: &IntMat) -> Result<GaussSumResult> {
    gauss_check(s_g, d)?;
    let dinv = d.to_rat().inverse()?;
    let s_rat = s_g.to_rat();
    let mut acc = CycInt::zero();
    for b in b_reps(d)? {
        acc = acc.add(&b_phase(&s_rat, &b, &dinv));
    }
    let value = acc
        .to_rat()
        .filter(|r| r.is_integer())
        .map(|r| r.to_integer())
        .ok_or_else(|| {
            Error::InvalidConfig("Gauss sum failed to collapse to a rational integer".into())
        })?;
    Ok(GaussSumResult {
        vanished: value.is_zero(),
        value,
        snf_divisors: divisors_of(d),
    })
}

/// Closed evaluation: the sum is a character sum over a finite abelian
/// group, so it is the group order when the character is trivial on the
/// generators and 0 otherwise.
pub fn gauss_closed(s_g: &IntMat, d: &IntMat) -> Result<GaussSumResult> {
    gauss_check(s_g, d)?;
    let dinv = d.to_rat().inverse()?;
    let s_rat = s_g.to_rat();
    let trivial = b_generators(d)?
        .iter()
        .all(|g| b_phase(&s_rat, g, &dinv) == CycInt::one());
    let snf_divisors = divisors_of(d);
    let value = if trivial {
        full_group_order(&snf_divisors)
    } else {
        Int::from(0)
    };
    Ok(GaussSumResult {
        vanished: value.is_zero(),
        value,
        snf_divisors,
    })
}

/// Operator family for the normalization exponent of Theorem 1.2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Tp,
    Tjp2,
}

/// Exponent e such that p^e times the operator preserves the integral
/// coefficient lattice; 0 once the lowest weight exceeds the degree.
pub fn norm_factor(n: usize, k_n: i64, op: OpKind) -> i64 {
    let n = n as i64;
    match op {
        OpKind::Tp => {
            if k_n < n {
                (n - k_n) * (n - k_n + 1) / 2
            } else {
                0
            }
        }
        OpKind::Tjp2 => {
            if k_n <= n {
                n * (n - k_n + 1)
            } else {
                0
            }
        }
    }
}

/// Every index S = p^-delta D T tD over the targets and coset blocks D
/// that lands back in the half-integral PSD lattice; these are exactly
/// the input coefficients the action reads.
pub fn needed_indices(
    targets: &[HalfIntMat],
    p: u64,
    delta: u32,
    cosets: &[CosetRep],
) -> Vec<HalfIntMat> {
    let mut out = BTreeSet::new();
    for t in targets {
        for rep in cosets {
            if let Some(s) = transform_index(t, &rep.d, p, delta) {
                out.insert(s);
            }
        }
    }
    out.into_iter().collect()
}

fn render_index(t: &HalfIntMat) -> String {
    let parts: Vec<String> = t.upper_entries().iter().map(|x| x.to_string()).collect();
    parts.join(" ")
}

fn pow_rat(base: u64, exp: i64) -> Rat {
    let b = Rat::from_integer(Int::from(base));
    let mut acc = Rat::from_integer(Int::from(1));
    for _ in 0..exp.unsigned_abs() {
        acc *= &b;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Shared coefficient action over a coset system with similitude
/// p^delta: a(T) of the image is the normalized sum of
/// chi(torus) rho(D)^-1 e(2 pi i N tr(S B D^-1)) a(S) over representatives.
fn apply_cosets(
    f: &QExpansion,
    p: u64,
    delta: u32,
    reps: &[CosetRep],
    theta_out: i64,
) -> Result<QExpansion> {
    let n = f.n();
    let big_n = f.level();
    if big_n % p as u64 == 0 {
        return Err(Error::InvalidConfig(format!("p = {p} divides the level {big_n}")));
    }
    let empty_like = |ring: RingTag| {
        QExpansion::new(n, big_n, f.weight().to_vec(), f.chi().clone(), ring, f.mode())
    };
    if f.is_empty() {
        return empty_like(f.ring());
    }
    let mut targets = enumerate_indices(n, theta_out)?;
    if f.mode() == Mode::Class {
        targets = targets.iter().map(|t| f.canonical_key(t)).collect();
        targets.sort();
        targets.dedup();
    }
    let needed = needed_indices(&targets, p, delta, reps);
    let missing: Vec<String> = needed
        .iter()
        .filter(|s| f.coeff(s).is_none())
        .map(|s| render_index(&f.canonical_key(s)))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingIndices(missing));
    }

    let model = build_model(HighestWeight::new(f.weight().to_vec())?)?;
    let dim = f.dim();
    let norm_exp: i64 = f.weight().iter().sum::<i64>() - (n * (n + 1) / 2) as i64;
    let global = pow_rat(p, delta as i64 * norm_exp);
    let level_rat = Rat::from_integer(Int::from(big_n));

    // per-distinct-D data: D^-1 and rho(D^-1), keyed by the entries
    struct DData {
        dinv: RatMat,
        rho_inv: RatMat,
    }
    let mut dcache: BTreeMap<Vec<Int>, DData> = BTreeMap::new();
    let mut coeffs: Vec<(HalfIntMat, Vec<Scalar>)> = Vec::new();
    for t in &targets {
        let mut acc = vec![Scalar::zero(); dim];
        for rep in reps {
            let Some(s) = transform_index(t, &rep.d, p, delta) else {
                continue;
            };
            let a = f.coeff(&s).expect("checked above");
            let key: Vec<Int> = rep.d.entries().cloned().collect();
            if !dcache.contains_key(&key) {
                let dinv = rep.d.to_rat().inverse()?;
                let rho_inv = model.rho_matrix(&dinv)?;
                dcache.insert(key.clone(), DData { dinv, rho_inv });
            }
            let dd = &dcache[&key];
            let tr = trace_rat(&s.g_mat().to_rat().mul(&rep.b.to_rat()).mul(&dd.dinv))
                * &level_rat
                / Rat::from_integer(Int::from(2));
            let factor = Scalar::from_cyc(
                f.chi().torus_value(p, &rep.alpha).mul(&CycInt::exp_2pi_i(&tr)),
            );
            for i in 0..dim {
                let mut w = Scalar::zero();
                for (j, aj) in a.iter().enumerate() {
                    let c = dd.rho_inv.at(i, j);
                    if !c.is_zero() {
                        w = w.add(&aj.scale(c));
                    }
                }
                acc[i] = acc[i].add(&w.mul(&factor));
            }
        }
        for x in acc.iter_mut() {
            *x = x.scale(&global);
        }
        coeffs.push((t.clone(), acc));
    }

    // ring tag from the values actually produced
    let mut all_int = true;
    let mut conductor: u64 = 1;
    for (_, v) in &coeffs {
        for x in v {
            if !x.is_rational() {
                conductor = num_integer::lcm(conductor, x.to_cyc().conductor());
            } else if x.as_rat().map_or(true, |r| !r.is_integer()) {
                all_int = false;
            }
        }
    }
    let ring = if conductor > 1 {
        RingTag::Cyc(conductor)
    } else if all_int && f.ring() == RingTag::Z {
        RingTag::Z
    } else {
        RingTag::Q
    };
    let mut out = empty_like(ring)?;
    for (t, v) in coeffs {
        out.set_coeff(t, v)?;
    }
    Ok(out)
}

/// Action of T(p^delta) on Fourier coefficients, truncated to
/// tr(T) <= theta_out.
pub fn apply_t(f: &QExpansion, p: u64, delta: u32, theta_out: i64) -> Result<QExpansion> {
    apply_t_seeded(f, p, delta, theta_out, 0)
}

/// apply_t with a seeded coset enumeration; the seed permutes the
/// representative choices only, never the result.
pub fn apply_t_seeded(
    f: &QExpansion,
    p: u64,
    delta: u32,
    theta_out: i64,
    seed: u64,
) -> Result<QExpansion> {
    let reps = v_cosets(f.n(), p, delta, f.level(), seed)?;
    apply_cosets(f, p, delta, &reps, theta_out)
}

/// Action of T_{j,n-j}(p^2), similitude p^2 with the rank-j coset system.
pub fn apply_tj(f: &QExpansion, j: usize, p: u64, theta_out: i64) -> Result<QExpansion> {
    apply_tj_seeded(f, j, p, theta_out, 0)
}

/// apply_tj with a seeded coset enumeration.
pub fn apply_tj_seeded(
    f: &QExpansion,
    j: usize,
    p: u64,
    theta_out: i64,
    seed: u64,
) -> Result<QExpansion> {
    if j >= f.n() {
        return Err(Error::InvalidConfig(format!("j = {j} not below degree {}", f.n())));
    }
    let reps = tj_cosets(f.n(), j, p, f.level(), seed)?;
    apply_cosets(f, p, 2, &reps, theta_out)
}

// ---------------------------------------------------------------------------
// Double-coset Gauss sums G_{a,b} and G_j
// ---------------------------------------------------------------------------

/// G_j(T): the X_j sum for the level N >= 2 system with
/// D_j = diag(p^2 1_j, p 1_{n-j}). The sum factors into independent
/// geometric sums, one per free coordinate of the B-block, giving
/// p^{j(n+1)} exactly when every one is trivial and 0 otherwise.
pub fn gauss_j(n: usize, j: usize, p: u64, t: &HalfIntMat) -> Result<Int> {
    if t.n() != n || j > n {
        return Err(Error::DimensionMismatch("gauss_j shape".into()));
    }
    let p = p as i64;
    let p2 = p * p;
    // B11 diagonal: B_ii mod p^2 with coefficient T_ii = G_ii / 2
    for i in 0..j {
        if (t.at(i, i) / 2) % p2 != 0 {
            return Ok(Int::from(0));
        }
    }
    // B11 off-diagonal: mod p^2 with coefficient 2 T_ik = G_ik
    for i in 0..j {
        for k in i + 1..j {
            if t.at(i, k) % p2 != 0 {
                return Ok(Int::from(0));
            }
        }
    }
    // B12: mod p with coefficient 2 T_il = G_il
    for i in 0..j {
        for l in j..n {
            if t.at(i, l) % p != 0 {
                return Ok(Int::from(0));
            }
        }
    }
    Ok(Int::from(p).pow((j * (n + 1)) as u32))
}

/// All G_{a,b}(T) values for D_{a,b} = diag(1_{n-a-b}, p 1_a, p^2 1_b),
/// batched over the target rank j = 0..=n and the index list. X_{a,b}
/// membership of a B-class is decided by the mod-p rank of the assembled
/// block matrix (the divisor cap p^2 holds automatically on Lambda_D).
pub fn gauss_ab_batch(
    n: usize,
    a: usize,
    b: usize,
    p: u64,
    ts: &[HalfIntMat],
) -> Result<Vec<Vec<Int>>> {
    if n == 0 || n > 3 || a + b > n {
        return Err(Error::InvalidConfig(format!("gauss_ab shape n={n} a={a} b={b}")));
    }
    if ts.iter().any(|t| t.n() != n) {
        return Err(Error::DimensionMismatch("index degree".into()));
    }
    let pi = p as i64;
    let mut d = vec![1i64; n];
    for l in 0..a {
        d[n - a - b + l] = pi;
    }
    for l in 0..b {
        d[n - b + l] = pi * pi;
    }
    let p2 = pi * pi;
    let m = 2 * p2; // common phase denominator
    // Free coordinates B_{l,k}, l >= k, running mod d_k with
    // B_{k,l} = (d_l/d_k) B_{l,k}; coordinates with d_k = 1 vanish.
    // The rank class depends on B mod p only, so the top p-adic digit
    // of each mod-p^2 coordinate contributes an independent geometric
    // sum that collapses to a closed per-index factor.
    let coords: Vec<(usize, usize)> = (0..n)
        .flat_map(|k| (k..n).map(move |l| (l, k)))
        .filter(|&(_, k)| d[k] > 1)
        .collect();
    // classify every mod-p digit vector by the F_p-rank of the assembly
    let mut classes: Vec<Vec<Vec<i64>>> = vec![Vec::new(); n + 1];
    let mut v0 = vec![0i64; coords.len()];
    loop {
        let mut w = vec![vec![0i64; 2 * n]; 2 * n];
        for l in 0..n {
            w[l][l] = (p2 / d[l]).rem_euclid(pi);
            w[n + l][n + l] = d[l].rem_euclid(pi);
        }
        for (s, &(l, k)) in coords.iter().enumerate() {
            // B_{k,l} = (d_l/d_k) B_{l,k} survives mod p only when d_l = d_k
            w[l][n + k] = v0[s];
            if l != k && d[l] == d[k] {
                w[k][n + l] = v0[s];
            }
        }
        let j = rank_mod_p(&mut w, pi);
        classes[j].push(v0.clone());
        let mut pos = coords.len();
        for s in (0..coords.len()).rev() {
            v0[s] += 1;
            if v0[s] < pi {
                pos = s;
                break;
            }
            v0[s] = 0;
        }
        if pos == coords.len() {
            break;
        }
    }
    let mut out = vec![vec![Int::from(0); ts.len()]; n + 1];
    for (ti, t) in ts.iter().enumerate() {
        // tr(T B D^-1) numerator coefficient of each coordinate, mod m;
        // G symmetry pairs (l,k) with (k,l) so off-diagonals pick up 2
        let mut cs = vec![0i64; coords.len()];
        let mut digit_factor = Int::from(1);
        for (s, &(l, k)) in coords.iter().enumerate() {
            let mult = if l == k { 1 } else { 2 };
            cs[s] = (t.at(k, l) * mult * (p2 / d[k])).rem_euclid(m);
            if d[k] == p2 {
                // top digit ranges over v1 mod p with phase c_s v1 / 2p
                if cs[s] % (2 * pi) == 0 {
                    digit_factor *= pi;
                } else {
                    digit_factor = Int::from(0);
                }
            }
        }
        if digit_factor.is_zero() {
            continue;
        }
        for (j, class) in classes.iter().enumerate() {
            let mut cnt = vec![0u64; m as usize];
            for v in class {
                let num: i64 = v.iter().zip(&cs).map(|(x, c)| x * c).sum();
                cnt[num.rem_euclid(m) as usize] += 1;
            }
            let mut acc = CycInt::zero();
            for (r, &c) in cnt.iter().enumerate() {
                if c > 0 {
                    let root = CycInt::exp_2pi_i(&Rat::new(Int::from(r as i64), Int::from(m)));
                    acc = acc.add(&root.scale(&Rat::from_integer(Int::from(c))));
                }
            }
            let base = acc
                .to_rat()
                .filter(|r| r.is_integer())
                .map(|r| r.to_integer())
                .ok_or_else(|| {
                    Error::InvalidConfig("double-coset Gauss sum did not collapse".into())
                })?;
            out[j][ti] = base * &digit_factor;
        }
    }
    Ok(out)
}

fn rank_mod_p(w: &mut [Vec<i64>], p: i64) -> usize {
    let rows = w.len();
    let cols = w[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| w[r][c] % p != 0) else {
            continue;
        };
        w.swap(rank, piv);
        let inv = (1..p).find(|x| (x * w[rank][c]).rem_euclid(p) == 1).expect("unit");
        for r in rank + 1..rows {
            let f = (w[r][c] * inv).rem_euclid(p);
            for k in c..cols {
                w[r][k] = (w[r][k] - f * w[rank][k]).rem_euclid(p);
            }
        }
        rank += 1;
    }
    rank
}

// ---------------------------------------------------------------------------
// Character projection
// ---------------------------------------------------------------------------

/// Action table of the diagonal torus ((Z/NZ)^x)^n on a fixed index
/// domain: each group element permutes the indices and scales the
/// coefficients. Group-action axioms are verified on construction.
#[derive(Debug, Clone)]
pub struct TorusAction {
    n: usize,
    modulus: u64,
    maps: BTreeMap<Vec<u64>, BTreeMap<HalfIntMat, (HalfIntMat, Scalar)>>,
}

fn unit_tuples(n: usize, modulus: u64) -> Vec<Vec<u64>> {
    let units: Vec<u64> = (0..modulus.max(1))
        .filter(|&u| modulus == 1 || num_integer::gcd(u, modulus) == 1)
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|t| {
                units.iter().map(move |&u| {
                    let mut t = t.clone();
                    t.push(u);
                    t
                })
            })
            .collect();
    }
    out
}

impl TorusAction {
    pub fn new(
        n: usize,
        modulus: u64,
        maps: BTreeMap<Vec<u64>, BTreeMap<HalfIntMat, (HalfIntMat, Scalar)>>,
    ) -> Result<Self> {
        let tuples = unit_tuples(n, modulus);
        if maps.len() != tuples.len() || tuples.iter().any(|t| !maps.contains_key(t)) {
            return Err(Error::NotGroupAction("wrong group element set".into()));
        }
        let domain: BTreeSet<&HalfIntMat> = maps[&tuples[0]].keys().collect();
        for (g, m) in &maps {
            let keys: BTreeSet<&HalfIntMat> = m.keys().collect();
            let images: BTreeSet<&HalfIntMat> = m.values().map(|(t, _)| t).collect();
            if keys != domain || images != domain {
                return Err(Error::NotGroupAction(format!("element {g:?} is not a bijection")));
            }
        }
        let one = vec![1 % modulus.max(1); n];
        for (t, (img, s)) in &maps[&one] {
            if img != t || *s != Scalar::from_int(1) {
                return Err(Error::NotGroupAction("identity does not act trivially".into()));
            }
        }
        for g in &tuples {
            for h in &tuples {
                let gh: Vec<u64> = g
                    .iter()
                    .zip(h)
                    .map(|(x, y)| x * y % modulus.max(1))
                    .collect();
                for t in maps[&tuples[0]].keys() {
                    let (t1, s1) = &maps[h][t];
                    let (t2, s2) = &maps[g][t1];
                    let (t3, s3) = &maps[&gh][t];
                    if t3 != t2 || *s3 != s1.mul(s2) {
                        return Err(Error::NotGroupAction(format!(
                            "composition fails at {g:?} {h:?}"
                        )));
                    }
                }
            }
        }
        Ok(TorusAction { n, modulus, maps })
    }

    /// The trivial action on a given domain.
    pub fn identity(n: usize, modulus: u64, domain: &[HalfIntMat]) -> Result<Self> {
        let table: BTreeMap<HalfIntMat, (HalfIntMat, Scalar)> = domain
            .iter()
            .map(|t| (t.clone(), (t.clone(), Scalar::from_int(1))))
            .collect();
        let maps = unit_tuples(n, modulus)
            .into_iter()
            .map(|g| (g, table.clone()))
            .collect();
        TorusAction::new(n, modulus, maps)
    }

    fn translate(&self, g: &[u64], f: &QExpansion) -> Result<QExpansion> {
        let mut out = QExpansion::new(
            f.n(),
            f.level(),
            f.weight().to_vec(),
            f.chi().clone(),
            f.ring(),
            f.mode(),
        )?;
        for (t, c) in f.iter() {
            let (img, s) = self.maps[g]
                .get(t)
                .ok_or_else(|| Error::NotGroupAction(format!("index {} off the domain", render_index(t))))?;
            out.set_coeff(img.clone(), c.iter().map(|x| x.mul(s)).collect())?;
        }
        Ok(out)
    }
}

/// P_chi(f) = phi(N)^-n sum over torus elements of chi(gamma)^-1 gamma.f;
/// idempotent, and the projections over all characters sum back to f.
pub fn project_char(f: &QExpansion, chi: &CharTuple, action: &TorusAction) -> Result<QExpansion> {
    if chi.chars().len() != f.n() || action.n != f.n() || action.modulus != f.level() {
        return Err(Error::InvalidConfig("projection shape mismatch".into()));
    }
    let tuples = unit_tuples(f.n(), f.level());
    let order = Rat::from_integer(Int::from(tuples.len() as i64));
    let mut acc: BTreeMap<HalfIntMat, Vec<Scalar>> = BTreeMap::new();
    for g in &tuples {
        // chi(gamma)^-1 is the complex conjugate on root-of-unity values
        let mut weight = CycInt::one();
        for (c, &u) in chi.chars().iter().zip(g) {
            weight = weight.mul(&c.value(u).conj());
        }
        let weight = Scalar::from_cyc(weight);
        let moved = action.translate(g, f)?;
        for (t, c) in moved.iter() {
            let slot = acc.entry(t.clone()).or_insert_with(|| vec![Scalar::zero(); f.dim()]);
            for (si, ci) in slot.iter_mut().zip(c) {
                *si = si.add(&ci.mul(&weight));
            }
        }
    }
    let ring = match f.ring() {
        RingTag::Z | RingTag::Q => RingTag::Q,
        r => r,
    };
    let mut out = QExpansion::new(f.n(), f.level(), f.weight().to_vec(), f.chi().clone(), ring, f.mode())?;
    for (t, mut c) in acc {
        for x in c.iter_mut() {
            *x = x.scale(&order.recip());
        }
        out.set_coeff(t, c)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{delta, eisenstein, theta_e8};
    use crate::fourier::DirichletChar;

    fn scalar_mat(v: i64) -> IntMat {
        IntMat::from_i64_rows(&[&[v]])
    }

    fn coeff_rat(f: &QExpansion, t: &HalfIntMat) -> Rat {
        f.coeff(t).expect("present")[0].as_rat().expect("rational").clone()
    }

    #[test]
    fn gauss_scalar_cases() {
        for p in [2i64, 3, 5] {
            for s in -4..=4 {
                let r = gauss_brute(&scalar_mat(2 * s), &scalar_mat(p)).unwrap();
                let want = if s % p == 0 { p } else { 0 };
                assert_eq!(r.value, Int::from(want), "p={p} s={s}");
                let c = gauss_closed(&scalar_mat(2 * s), &scalar_mat(p)).unwrap();
                assert_eq!(c.value, r.value);
            }
        }
    }

    #[test]
    fn gauss_identity_is_one() {
        for n in 1..=2 {
            let s = IntMat::zero(n, n);
            let r = gauss_brute(&s, &IntMat::identity(n)).unwrap();
            assert_eq!(r.value, Int::from(1));
            assert!(!r.vanished);
        }
    }

    #[test]
    fn gauss_diag_one_two() {
        // two-term sum 1 + exp(pi i s22)
        for g12 in -2i64..=2 {
            for s22 in 0..4 {
                let s = IntMat::from_i64_rows(&[&[2, g12], &[g12, 2 * s22]]);
                let d = IntMat::from_i64_rows(&[&[1, 0], &[0, 2]]);
                let want = if s22 % 2 == 0 { 2 } else { 0 };
                assert_eq!(gauss_brute(&s, &d).unwrap().value, Int::from(want));
            }
        }
    }

    #[test]
    fn gauss_closed_examples() {
        for p in [2i64, 3] {
            let d = IntMat::from_i64_rows(&[&[p, 0], &[0, p]]);
            let r = gauss_closed(&IntMat::zero(2, 2), &d).unwrap();
            assert_eq!(r.value, Int::from(p.pow(3)));
        }
        let r = gauss_closed(&scalar_mat(2), &scalar_mat(2)).unwrap();
        assert_eq!(r.value, Int::from(0));
        assert!(r.vanished);
    }

    fn sweep_d_mats(n: usize, dets: &[i64]) -> Vec<IntMat> {
        let mut out = Vec::new();
        for &det in dets {
            if n == 1 {
                out.push(scalar_mat(det));
                continue;
            }
            for a in 1..=det {
                if det % a != 0 {
                    continue;
                }
                let c = det / a;
                for b in 0..c {
                    out.push(IntMat::from_i64_rows(&[&[a, b], &[0, c]]));
                }
            }
        }
        out
    }

    #[test]
    fn gauss_closed_matches_brute_exhaustively() {
        // degree 1
        for d in sweep_d_mats(1, &[1, 2, 3, 4, 5, 6, 8, 9]) {
            for s in -6i64..=6 {
                let sg = scalar_mat(2 * s);
                let bv = gauss_brute(&sg, &d).unwrap();
                let cv = gauss_closed(&sg, &d).unwrap();
                assert_eq!(bv.value, cv.value);
            }
        }
        // degree 2, PSD indices and non-PSD variants
        let mut ss: Vec<IntMat> = enumerate_indices(2, 4)
            .unwrap()
            .iter()
            .map(|t| t.g_mat())
            .collect();
        let flipped: Vec<IntMat> = ss
            .iter()
            .map(|g| {
                IntMat::from_rows(vec![
                    vec![-g.at(0, 0).clone(), g.at(0, 1).clone()],
                    vec![g.at(1, 0).clone(), g.at(1, 1).clone()],
                ])
            })
            .collect();
        ss.extend(flipped);
        for d in sweep_d_mats(2, &[1, 2, 3, 4, 8, 9, 12]) {
            let order = full_group_order(&divisors_of(&d));
            for sg in &ss {
                if sg.transpose() != *sg {
                    continue;
                }
                let bv = gauss_brute(sg, &d).unwrap();
                let cv = gauss_closed(sg, &d).unwrap();
                assert_eq!(bv.value, cv.value, "S={sg:?} D={d:?}");
                assert!(bv.value.is_zero() || bv.value == order);
            }
        }
    }

    #[test]
    fn norm_factor_examples() {
        assert_eq!(norm_factor(2, 4, OpKind::Tp), 0);
        assert_eq!(norm_factor(3, 1, OpKind::Tp), 3);
        assert_eq!(norm_factor(2, 2, OpKind::Tjp2), 2);
        assert_eq!(norm_factor(2, 4, OpKind::Tjp2), 0);
        assert_eq!(norm_factor(3, 3, OpKind::Tjp2), 3);
    }

    #[test]
    fn needed_indices_classical() {
        let reps = v_cosets(1, 2, 1, 1, 0).unwrap();
        let need = needed_indices(&[HalfIntMat::scalar(1)], 2, 1, &reps);
        assert_eq!(need, vec![HalfIntMat::scalar(2)]);
        let need = needed_indices(&[HalfIntMat::scalar(2)], 2, 1, &reps);
        assert_eq!(need, vec![HalfIntMat::scalar(1), HalfIntMat::scalar(4)]);
        let reps2 = v_cosets(2, 2, 1, 1, 0).unwrap();
        let targets = enumerate_indices(2, 2).unwrap();
        for s in needed_indices(&targets, 2, 1, &reps2) {
            assert!(s.is_psd());
        }
    }

    #[test]
    fn eisenstein_is_t2_eigenform() {
        let f = eisenstein(4, 12).unwrap();
        let g = apply_t(&f, 2, 1, 6).unwrap();
        assert!(g.is_integral());
        for m in 0..=6 {
            let t = HalfIntMat::scalar(m);
            assert_eq!(coeff_rat(&g, &t), coeff_rat(&f, &t) * Rat::from_integer(Int::from(9)));
        }
        // a((1)) of T(2)E4 = a((2)) = 2160 = 9 * 240
        assert_eq!(coeff_rat(&g, &HalfIntMat::scalar(1)), Rat::from_integer(Int::from(2160)));
    }

    #[test]
    fn eisenstein_eigenvalues_other_weights() {
        for (k, p, lam) in [(6i64, 2u64, 33i64), (4, 3, 28), (12, 2, 2049)] {
            let f = eisenstein(k, 4 * p as i64).unwrap();
            let g = apply_t(&f, p, 1, 4).unwrap();
            for m in 0..=4 {
                let t = HalfIntMat::scalar(m);
                assert_eq!(
                    coeff_rat(&g, &t),
                    coeff_rat(&f, &t) * Rat::from_integer(Int::from(lam)),
                    "k={k} p={p} m={m}"
                );
            }
        }
    }

    #[test]
    fn delta_eigenvalues() {
        let f = delta(60).unwrap();
        let g2 = apply_t(&f, 2, 1, 20).unwrap();
        let g3 = apply_t(&f, 3, 1, 20).unwrap();
        for m in 0..=20 {
            let t = HalfIntMat::scalar(m);
            assert_eq!(coeff_rat(&g2, &t), coeff_rat(&f, &t) * Rat::from_integer(Int::from(-24)));
            assert_eq!(coeff_rat(&g3, &t), coeff_rat(&f, &t) * Rat::from_integer(Int::from(252)));
        }
    }

    #[test]
    fn empty_input_gives_empty_output() {
        let f = QExpansion::scalar_level_one(1, 4, Mode::Explicit).unwrap();
        let g = apply_t(&f, 2, 1, 5).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn missing_indices_are_reported() {
        let f = eisenstein(4, 3).unwrap();
        match apply_t(&f, 2, 1, 4) {
            Err(Error::MissingIndices(v)) => {
                assert!(v.contains(&"8".to_string()), "missing list {v:?}");
            }
            other => panic!("expected missing-index error, got {other:?}"),
        }
    }

    #[test]
    fn level_divisibility_rejected() {
        let chi = CharTuple::trivial(1, 2);
        let f = QExpansion::new(1, 2, vec![4], chi, RingTag::Z, Mode::Explicit).unwrap();
        assert!(matches!(apply_t(&f, 2, 1, 3), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn apply_t_commutes_on_eisenstein() {
        let f = eisenstein(4, 36).unwrap();
        let a = apply_t(&apply_t(&f, 2, 1, 18).unwrap(), 3, 1, 6).unwrap();
        let b = apply_t(&apply_t(&f, 3, 1, 12).unwrap(), 2, 1, 6).unwrap();
        for m in 0..=6 {
            let t = HalfIntMat::scalar(m);
            assert_eq!(coeff_rat(&a, &t), coeff_rat(&b, &t));
        }
    }

    #[test]
    fn tj_scalar_action_degree_one() {
        // T_{0,1}(p^2) on degree 1 is the single coset p 1_2, scaling by p^{k-2}
        let f = eisenstein(4, 6).unwrap();
        let g = apply_tj(&f, 0, 2, 6).unwrap();
        for m in 0..=6 {
            let t = HalfIntMat::scalar(m);
            assert_eq!(coeff_rat(&g, &t), coeff_rat(&f, &t) * Rat::from_integer(Int::from(4)));
        }
        assert!(matches!(apply_tj(&f, 1, 2, 3), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn theta_degree_two_is_t2_eigenform() {
        let reps = v_cosets(2, 2, 1, 1, 0).unwrap();
        let targets = enumerate_indices(2, 2).unwrap();
        let mut need = needed_indices(&targets, 2, 1, &reps);
        need.extend(targets.iter().cloned());
        let f = theta_e8(2, &need, None).unwrap();
        let g = apply_t(&f, 2, 1, 2).unwrap();
        assert!(g.is_integral());
        // Siegel Eisenstein eigenvalue (1 + p^{k-2})(1 + p^{k-1}) = 45
        for t in &targets {
            assert_eq!(
                coeff_rat(&g, t),
                coeff_rat(&f, t) * Rat::from_integer(Int::from(45)),
                "index {}",
                render_index(t)
            );
        }
    }

    #[test]
    fn gauss_j_matches_direct_sum() {
        // brute force over B11 mod p^2 and B12 mod p with B22 = 0
        for p in [2i64, 3] {
            let p2 = p * p;
            for t in enumerate_indices(2, 3).unwrap() {
                let j = 1;
                let mut acc = CycInt::zero();
                for b11 in 0..p2 {
                    for b12 in 0..p {
                        // tr(T B D^-1) = T11 b11 / p^2 + 2 T12 b12 / p
                        let tr = Rat::new(Int::from(t.at(0, 0) * b11), Int::from(2 * p2))
                            + Rat::new(Int::from(t.at(0, 1) * b12), Int::from(p));
                        acc = acc.add(&CycInt::exp_2pi_i(&tr));
                    }
                }
                let direct = acc.to_rat().unwrap().to_integer();
                assert_eq!(gauss_j(2, j, p as u64, &t).unwrap(), direct);
            }
        }
    }

    #[test]
    fn gauss_j_values_are_zero_or_full() {
        for p in [2u64, 3] {
            for n in 2..=3usize {
                for j in 0..=n {
                    for t in enumerate_indices(n, 2).unwrap() {
                        let v = gauss_j(n, j, p, &t).unwrap();
                        let full = Int::from(p).pow((j * (n + 1)) as u32);
                        assert!(v.is_zero() || v == full, "n={n} j={j} p={p}");
                    }
                }
            }
        }
    }

    #[test]
    fn gauss_ab_degree_one_cases() {
        // (a,b) = (0,1): whole group sits in the rank-1 class
        let ts: Vec<HalfIntMat> = (0..=4).map(HalfIntMat::scalar).collect();
        for p in [2u64, 3] {
            let p2 = Int::from((p * p) as i64);
            let batch = gauss_ab_batch(1, 0, 1, p, &ts).unwrap();
            for (ti, t) in ts.iter().enumerate() {
                assert_eq!(batch[0][ti], Int::from(0));
                let want = if t.at(0, 0) % (2 * (p * p) as i64) == 0 {
                    p2.clone()
                } else {
                    Int::from(0)
                };
                assert_eq!(batch[1][ti], want, "p={p} t={}", t.at(0, 0) / 2);
            }
            // (a,b) = (1,0): rank-0 class is B = 0 alone
            let batch = gauss_ab_batch(1, 1, 0, p, &ts).unwrap();
            for (ti, _) in ts.iter().enumerate() {
                assert_eq!(batch[0][ti], Int::from(1));
            }
        }
    }

    #[test]
    fn gauss_ab_classes_partition_the_group() {
        // summing the class values over j recovers the full character sum
        for p in [2u64, 3] {
            for (a, b) in [(0usize, 1usize), (1, 0), (1, 1), (2, 0), (0, 2)] {
                if a + b > 2 {
                    continue;
                }
                let ts = enumerate_indices(2, 2).unwrap();
                let batch = gauss_ab_batch(2, a, b, p, &ts).unwrap();
                for (ti, t) in ts.iter().enumerate() {
                    let mut total = Int::from(0);
                    for row in &batch {
                        total += &row[ti];
                    }
                    let pi = p as i64;
                    let mut d = vec![1i64; 2];
                    for l in 0..a {
                        d[2 - a - b + l] = pi;
                    }
                    for l in 0..b {
                        d[2 - b + l] = pi * pi;
                    }
                    let dm = IntMat::from_i64_rows(&[&[d[0], 0], &[0, d[1]]]);
                    let full = gauss_brute(&t.g_mat(), &dm).unwrap();
                    assert_eq!(total, full.value, "p={p} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn gauss_ab_valuation_bound_small() {
        for p in [2u64, 3] {
            let ts = enumerate_indices(2, 2).unwrap();
            for a in 0..=2usize {
                for b in 0..=2 - a {
                    let batch = gauss_ab_batch(2, a, b, p, &ts).unwrap();
                    for row in &batch {
                        for v in row {
                            if v.is_zero() {
                                continue;
                            }
                            let mut w = v.abs();
                            let mut ord = 0;
                            while (&w % Int::from(p)).is_zero() {
                                w /= Int::from(p);
                                ord += 1;
                            }
                            assert!(
                                ord >= (b * (a + b + 1)) as u32,
                                "p={p} a={a} b={b} value {v}"
                            );
                        }
                    }
                }
            }
        }
    }

    fn two_chars_mod_three() -> (CharTuple, CharTuple) {
        let trivial = CharTuple::trivial(1, 3);
        let quad = DirichletChar::new(3, 2, vec![None, Some(0), Some(1)]).unwrap();
        (trivial, CharTuple::new(vec![quad]).unwrap())
    }

    fn synthetic_level_three() -> (QExpansion, TorusAction) {
        let chi = CharTuple::trivial(1, 3);
        let mut f = QExpansion::new(1, 3, vec![4], chi, RingTag::Q, Mode::Explicit).unwrap();
        f.set_scalar_coeff(HalfIntMat::scalar(1), 5).unwrap();
        f.set_scalar_coeff(HalfIntMat::scalar(2), 7).unwrap();
        // the unit 2 mod 3 swaps the two indices
        let one = Scalar::from_int(1);
        let t1 = HalfIntMat::scalar(1);
        let t2 = HalfIntMat::scalar(2);
        let ident: BTreeMap<_, _> = [
            (t1.clone(), (t1.clone(), one.clone())),
            (t2.clone(), (t2.clone(), one.clone())),
        ]
        .into();
        let swap: BTreeMap<_, _> = [
            (t1.clone(), (t2.clone(), one.clone())),
            (t2.clone(), (t1.clone(), one.clone())),
        ]
        .into();
        let maps = BTreeMap::from([(vec![1u64], ident), (vec![2u64], swap)]);
        let action = TorusAction::new(1, 3, maps).unwrap();
        (f, action)
    }

    #[test]
    fn projection_trivial_levels() {
        for level in [1u64, 2] {
            let chi = CharTuple::trivial(1, level);
            let mut f =
                QExpansion::new(1, level, vec![4], chi.clone(), RingTag::Q, Mode::Explicit).unwrap();
            f.set_scalar_coeff(HalfIntMat::scalar(1), 7).unwrap();
            let action = TorusAction::identity(1, level, &[HalfIntMat::scalar(1)]).unwrap();
            let g = project_char(&f, &chi, &action).unwrap();
            assert_eq!(coeff_rat(&g, &HalfIntMat::scalar(1)), Rat::from_integer(Int::from(7)));
        }
    }

    #[test]
    fn projections_sum_to_identity_and_idempotent() {
        let (f, action) = synthetic_level_three();
        let (chi0, chi1) = two_chars_mod_three();
        let p0 = project_char(&f, &chi0, &action).unwrap();
        let p1 = project_char(&f, &chi1, &action).unwrap();
        for m in [1i64, 2] {
            let t = HalfIntMat::scalar(m);
            assert_eq!(coeff_rat(&p0, &t) + coeff_rat(&p1, &t), coeff_rat(&f, &t));
        }
        for p in [&p0, &p1] {
            let again = project_char(p, if p == &p0 { &chi0 } else { &chi1 }, &action).unwrap();
            for m in [1i64, 2] {
                let t = HalfIntMat::scalar(m);
                assert_eq!(coeff_rat(&again, &t), coeff_rat(p, &t));
            }
        }
    }

    #[test]
    fn torus_action_axioms_enforced() {
        // a scalar table failing multiplicativity is rejected
        let t1 = HalfIntMat::scalar(1);
        let bad: BTreeMap<_, _> = [(t1.clone(), (t1.clone(), Scalar::from_int(2)))].into();
        let ident: BTreeMap<_, _> = [(t1.clone(), (t1.clone(), Scalar::from_int(1)))].into();
        let maps = BTreeMap::from([(vec![1u64], ident), (vec![2u64], bad)]);
        assert!(matches!(
            TorusAction::new(1, 3, maps),
            Err(Error::NotGroupAction(_))
        ));
    }
}
