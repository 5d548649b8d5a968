//! Coset representative systems for the similitude Hecke operators.
//!
//! The central object is the set of integral symplectic-similitude matrices
//! with similitude p^delta whose reduction mod N is blockwise
//! diag(1, p^delta). Left classes under the principal congruence group
//! biject with their row lattices, which is what both the enumeration and
//! the brute-force oracle exploit.

use crate::exact::{snf_rect, Int, IntMat, Rat};
use crate::{Error, Result};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Enumeration caps. Sizes grow like p^(quadratic in n), so anything past
/// these is a resource decision, not a correctness one.
pub const MAX_DEGREE: usize = 3;
pub const MAX_SIMILITUDE: u64 = 27;
pub const ORACLE_MAX_DEGREE: usize = 2;
pub const ORACLE_MAX_SIMILITUDE: u64 = 9;

fn int_pow(p: u64, e: u32) -> Int {
    Int::from(p).pow(e)
}

fn is_small_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_level(p: u64, big_n: u64) -> Result<()> {
    if !is_small_prime(p) {
        return Err(Error::NotPrime);
    }
    if big_n == 0 {
        return Err(Error::InvalidConfig("level 0".into()));
    }
    if big_n > 1 && big_n % p == 0 {
        return Err(Error::InvalidConfig(format!("p = {p} divides N = {big_n}")));
    }
    Ok(())
}

fn diag_mat(entries: &[Int]) -> IntMat {
    let n = entries.len();
    let mut m = IntMat::zero(n, n);
    for (i, e) in entries.iter().enumerate() {
        m.set(i, i, e.clone());
    }
    m
}

fn mat_mod(m: &IntMat, modulus: &Int) -> IntMat {
    let mut out = IntMat::zero(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, m.at(i, j).mod_floor(modulus));
        }
    }
    out
}

fn unimodular_inverse(m: &IntMat) -> Result<IntMat> {
    m.to_rat()
        .inverse()?
        .to_int()
        .ok_or(Error::SingularMatrix)
}

/// 2n x 2n standard alternating form.
fn j_mat(n: usize) -> IntMat {
    let mut j = IntMat::zero(2 * n, 2 * n);
    for i in 0..n {
        j.set(i, n + i, Int::one());
        j.set(n + i, i, -Int::one());
    }
    j
}

fn block_2x2(a: &IntMat, b: &IntMat, c: &IntMat, d: &IntMat) -> IntMat {
    let n = a.rows();
    let mut m = IntMat::zero(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, a.at(i, j).clone());
            m.set(i, n + j, b.at(i, j).clone());
            m.set(n + i, j, c.at(i, j).clone());
            m.set(n + i, n + j, d.at(i, j).clone());
        }
    }
    m
}

/// Row-style Hermite normal form of a nonsingular square matrix:
/// upper triangular, positive pivots, entries above a pivot reduced
/// into [0, pivot). Canonical invariant of the row lattice.
pub fn hnf_rows(m: &IntMat) -> Result<IntMat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("hnf of non-square".into()));
    }
    let n = m.rows();
    let mut a: Vec<Vec<Int>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    for j in 0..n {
        loop {
            let piv = (j..n)
                .filter(|&i| !a[i][j].is_zero())
                .min_by_key(|&i| a[i][j].abs())
                .ok_or(Error::SingularMatrix)?;
            a.swap(j, piv);
            let mut done = true;
            for i in j + 1..n {
                if a[i][j].is_zero() {
                    continue;
                }
                let q = a[i][j].div_floor(&a[j][j]);
                for c in j..n {
                    let t = &q * &a[j][c];
                    a[i][c] -= t;
                }
                if !a[i][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[j][j].is_negative() {
            for c in j..n {
                a[j][c] = -a[j][c].clone();
            }
        }
        for i in 0..j {
            let q = a[i][j].div_floor(&a[j][j]);
            if !q.is_zero() {
                for c in j..n {
                    let t = &q * &a[j][c];
                    a[i][c] -= t;
                }
            }
        }
    }
    Ok(IntMat::from_rows(a))
}

/// p-exponents of the elementary divisors, ascending.
/// None if some divisor is not a power of p.
pub fn snf_p_type(m: &IntMat, p: u64) -> Result<Option<Vec<u32>>> {
    let dec = snf_rect(m);
    let mut out = Vec::new();
    for d in dec.divisors() {
        if d.is_zero() {
            return Ok(None);
        }
        let mut d = d.abs();
        let pi = Int::from(p);
        let mut e = 0u32;
        while (&d % &pi).is_zero() {
            d /= &pi;
            e += 1;
        }
        if !d.is_one() {
            return Ok(None);
        }
        out.push(e);
    }
    Ok(Some(out))
}

// ---------------------------------------------------------------------------
// Torus lifts g_j(m)
// ---------------------------------------------------------------------------

/// Smallest SL_2(Z) matrix (by max entry, then lexicographic) with
/// nonnegative entries congruent to diag(m^-1, m) mod N off a zero
/// off-diagonal mod N. Restricting to nonnegative entries is what makes
/// the minimum unique and stable.
fn sl2_congruence(m: u64, big_n: u64) -> IntMat {
    if big_n == 1 {
        return IntMat::identity(2);
    }
    let n = big_n as i64;
    let m_res = (m % big_n) as i64;
    // m inverse mod N
    let m_inv = (1..n).find(|x| (x * m_res) % n == 1).expect("m coprime to N");
    for bound in 0.. {
        let mut best: Option<[i64; 4]> = None;
        for a in (m_inv..=bound).step_by(big_n as usize) {
            for b in (0..=bound).step_by(big_n as usize) {
                for c in (0..=bound).step_by(big_n as usize) {
                    let num = 1 + b * c;
                    if a == 0 || num % a != 0 {
                        continue;
                    }
                    let d = num / a;
                    if d < 0 || d > bound || d % n != m_res {
                        continue;
                    }
                    if a.max(b).max(c).max(d) != bound {
                        continue;
                    }
                    let cand = [a, b, c, d];
                    if best.map_or(true, |cur| cand < cur) {
                        best = Some(cand);
                    }
                }
            }
        }
        if let Some([a, b, c, d]) = best {
            return IntMat::from_i64_rows(&[&[a, b], &[c, d]]);
        }
    }
    unreachable!()
}

/// Element of Sp_2n(Z) congruent mod N to
/// diag(m^-1 1_j, 1_{n-j}, m 1_j, 1_{n-j}).
///
/// Built by placing one fixed SL_2 solution at each symplectic coordinate
/// pair (i, n+i), i < j. Deterministic.
pub fn gj_matrix(n: usize, j: usize, m: u64, big_n: u64) -> Result<IntMat> {
    if j > n {
        return Err(Error::InvalidConfig(format!("j = {j} exceeds n = {n}")));
    }
    if big_n == 0 || num_integer::gcd(m, big_n) != 1 {
        return Err(Error::InvalidConfig(format!(
            "m = {m} not invertible mod N = {big_n}"
        )));
    }
    let s = sl2_congruence(m, big_n);
    let mut g = IntMat::identity(2 * n);
    for i in 0..j {
        g.set(i, i, s.at(0, 0).clone());
        g.set(i, n + i, s.at(0, 1).clone());
        g.set(n + i, i, s.at(1, 0).clone());
        g.set(n + i, n + i, s.at(1, 1).clone());
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// SL_n(Z/M) -> SL_n(Z) lifting
// ---------------------------------------------------------------------------

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn inv_mod(a: &Int, m: &Int) -> Option<Int> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

struct LiftWork {
    w: Vec<Vec<Int>>,
    m: Int,
    // (i, j, t): row_i += t * row_j, in application order
    row_ops: Vec<(usize, usize, Int)>,
    col_ops: Vec<(usize, usize, Int)>,
}

impl LiftWork {
    fn row_op(&mut self, i: usize, j: usize, t: Int) {
        let t = t.mod_floor(&self.m);
        if t.is_zero() {
            return;
        }
        for c in 0..self.w.len() {
            self.w[i][c] = (&self.w[i][c] + &t * &self.w[j][c]).mod_floor(&self.m);
        }
        self.row_ops.push((i, j, t));
    }

    // col_j += t * col_i
    fn col_op(&mut self, i: usize, j: usize, t: Int) {
        let t = t.mod_floor(&self.m);
        if t.is_zero() {
            return;
        }
        for r in 0..self.w.len() {
            self.w[r][j] = (&self.w[r][j] + &t * &self.w[r][i]).mod_floor(&self.m);
        }
        self.col_ops.push((i, j, t));
    }
}

/// Exact SL_n(Z) matrix congruent to `target` mod `modulus`.
///
/// Reduces the residue to the identity with elementary transvections
/// (possible over Z/M since the determinant is 1 there), then multiplies
/// integral lifts of the inverse operations. Fails if det != 1 mod M.
pub fn sl_lift(target: &IntMat, modulus: u64) -> Result<IntMat> {
    if !target.is_square() {
        return Err(Error::DimensionMismatch("sl_lift of non-square".into()));
    }
    let n = target.rows();
    let m = Int::from(modulus);
    if !(target.det().mod_floor(&m)).is_one() {
        return Err(Error::InvalidConfig("determinant not 1 mod M".into()));
    }
    if n == 0 || modulus == 1 {
        return Ok(IntMat::identity(n));
    }
    let primes = prime_factors(modulus);
    let mut work = LiftWork {
        w: (0..n)
            .map(|i| target.row(i).iter().map(|x| x.mod_floor(&m)).collect())
            .collect(),
        m: m.clone(),
        row_ops: Vec::new(),
        col_ops: Vec::new(),
    };
    for k in 0..n {
        // Make the pivot a unit: for each prime of M pick a row whose
        // column-k entry survives mod that prime, and add a CRT-mixed
        // combination of those rows to row k. The trailing block is
        // invertible mod every prime, so such rows exist.
        let mut add_coef = vec![Int::zero(); n];
        let mut need = false;
        for &l in &primes {
            let li = Int::from(l);
            if !(&work.w[k][k] % &li).is_zero() {
                continue;
            }
            let src = (k + 1..n)
                .find(|&i| !(&work.w[i][k] % &li).is_zero())
                .ok_or(Error::SingularMatrix)?;
            // coefficient 1 mod l, 0 mod the other primes of M
            let others: Int = primes
                .iter()
                .filter(|&&q| q != l)
                .map(|&q| Int::from(q))
                .product();
            let adj = inv_mod(&others, &li).expect("coprime radical parts");
            add_coef[src] += others * adj;
            need = true;
        }
        if need {
            for i in k + 1..n {
                let t = add_coef[i].clone();
                if !t.mod_floor(&m).is_zero() {
                    work.row_op(k, i, t);
                }
            }
        }
        let u = work.w[k][k].clone();
        let ui = inv_mod(&u, &m).ok_or(Error::SingularMatrix)?;
        for i in k + 1..n {
            let t = -(&work.w[i][k] * &ui);
            work.row_op(i, k, t);
        }
        for jc in k + 1..n {
            let t = -(&work.w[k][jc] * &ui);
            work.col_op(k, jc, t);
        }
    }
    // Diagonal of units with product 1; sweep each into its neighbor with
    // the Whitehead identity diag(v, v^-1) = w(v) w(-1),
    // w(v) = E12(v) E21(-v^-1) E12(v).
    for k in 0..n - 1 {
        let v = inv_mod(&work.w[k][k].clone(), &m).ok_or(Error::SingularMatrix)?;
        let vi = inv_mod(&v, &m).ok_or(Error::SingularMatrix)?;
        work.row_op(k, k + 1, -Int::one());
        work.row_op(k + 1, k, Int::one());
        work.row_op(k, k + 1, -Int::one());
        work.row_op(k, k + 1, v.clone());
        work.row_op(k + 1, k, -vi);
        work.row_op(k, k + 1, v);
    }
    debug_assert!((0..n).all(|i| (0..n).all(|j| {
        work.w[i][j] == if i == j { Int::one() } else { Int::zero() }
    })));
    // (L_K ... L_1) A (R_1 ... R_M) = I, so
    // A = inv(L_1) ... inv(L_K) * inv(R_M) ... inv(R_1).
    let mut g = IntMat::identity(n);
    for (i, j, t) in &work.row_ops {
        let mut e = IntMat::identity(n);
        e.set(*i, *j, -t.clone());
        g = g.mul(&e);
    }
    for (i, j, t) in work.col_ops.iter().rev() {
        let mut e = IntMat::identity(n);
        e.set(*i, *j, -t.clone());
        g = g.mul(&e);
    }
    debug_assert_eq!(mat_mod(&g, &m), mat_mod(target, &m));
    debug_assert!(g.det().is_one());
    Ok(g)
}

// ---------------------------------------------------------------------------
// sl_cosets
// ---------------------------------------------------------------------------

/// Enumerate Hermite forms with p-power pivots: diagonal exponents summing
/// to `total`, each at most `cap`, entries above a pivot reduced mod it.
fn hnf_candidates(n: usize, p: u64, total: u32, cap: u32) -> Vec<IntMat> {
    let mut diags: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec_diag(pos: usize, left: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=cap.min(left) {
            cur[pos] = e;
            rec_diag(pos + 1, left - e, cap, cur, out);
        }
    }
    rec_diag(0, total, cap, &mut cur, &mut diags);
    let mut out = Vec::new();
    for diag in diags {
        let pivots: Vec<Int> = diag.iter().map(|&e| int_pow(p, e)).collect();
        // odometer over the strictly-upper entries, row-major
        let slots: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let limits: Vec<Int> = slots.iter().map(|&(_, j)| pivots[j].clone()).collect();
        let mut vals = vec![Int::zero(); slots.len()];
        loop {
            let mut h = diag_mat(&pivots);
            for (s, &(i, j)) in slots.iter().enumerate() {
                h.set(i, j, vals[s].clone());
            }
            out.push(h);
            let mut carry = slots.len();
            for s in (0..slots.len()).rev() {
                vals[s] += 1u32;
                if vals[s] < limits[s] {
                    carry = s;
                    break;
                }
                vals[s] = Int::zero();
            }
            if carry == slots.len() {
                break;
            }
        }
    }
    out
}

/// Representatives for (SL_n(Z) cap D^-1 SL_n(Z) D)\SL_n(Z) with
/// D = diag(p^beta), every representative congruent to 1 mod N.
///
/// Cosets biject with row lattices Z^n D g of elementary-divisor type
/// diag(p^beta); those are enumerated as Hermite forms. The subgroup only
/// sees the differences of beta, so beta is normalized first. `seed`
/// varies the representative inside its class without changing the class.
pub fn sl_cosets(beta: &[u32], p: u64, big_n: u64, seed: u64) -> Result<Vec<IntMat>> {
    check_level(p, big_n)?;
    let n = beta.len();
    if n == 0 {
        return Err(Error::InvalidConfig("empty exponent vector".into()));
    }
    let bmin = *beta.iter().min().unwrap();
    let betan: Vec<u32> = beta.iter().map(|b| b - bmin).collect();
    let e_max = *betan.iter().max().unwrap();
    if e_max == 0 {
        return Ok(vec![IntMat::identity(n)]);
    }
    let total: u32 = betan.iter().sum();
    let mut sorted = betan.clone();
    sorted.sort_unstable();
    // permutation aligning the ascending divisor order with beta's order
    let mut ord: Vec<usize> = (0..n).collect();
    ord.sort_by_key(|&i| (betan[i], i));
    let mut perm = IntMat::zero(n, n);
    for (k, &i) in ord.iter().enumerate() {
        perm.set(i, k, Int::one());
    }
    let d0 = diag_mat(&betan.iter().map(|&e| int_pow(p, e)).collect::<Vec<_>>());
    let mut out = Vec::new();
    for h in hnf_candidates(n, p, total, e_max) {
        match snf_p_type(&h, p)? {
            Some(t) if t == sorted => {}
            _ => continue,
        }
        let dec = snf_rect(&h);
        // lattice Z^n H = Z^n Sigma V^-1 and D0 * (P V^-1) spans it
        let vinv = unimodular_inverse(&dec.v)?;
        let mut g = perm.mul(&vinv);
        if g.det() == -Int::one() {
            for c in 0..n {
                let neg = -g.at(0, c).clone();
                g.set(0, c, neg);
            }
        }
        debug_assert!(g.det().is_one());
        if big_n > 1 {
            // h*g with h in the subgroup and congruent to g^-1 mod N;
            // h = 1 mod p^e_max keeps it in the subgroup.
            let pe = int_pow(p, e_max);
            let modulus = big_n * p.pow(e_max);
            let m = Int::from(modulus);
            let ginv = unimodular_inverse(&g)?;
            let nn = Int::from(big_n);
            let mut target = IntMat::identity(n);
            for i in 0..n {
                for j in 0..n {
                    let r = crt_pair(
                        &ginv.at(i, j).mod_floor(&nn),
                        &nn,
                        &if i == j { Int::one() } else { Int::zero() },
                        &pe,
                    );
                    target.set(i, j, r.mod_floor(&m));
                }
            }
            let lift = sl_lift(&target, modulus)?;
            g = lift.mul(&g);
            debug_assert!(mat_mod(&g, &nn) == IntMat::identity(n));
        }
        if seed != 0 && n >= 2 {
            // unipotent element of the subgroup, trivial mod N
            let i0 = ord[0];
            let j0 = *ord.last().unwrap();
            let c = Int::from(big_n) * int_pow(p, e_max) * Int::from(seed % 5);
            let mut twist = IntMat::identity(n);
            twist.set(i0, j0, c);
            g = twist.mul(&g);
        }
        debug_assert_eq!(
            hnf_rows(&d0.mul(&g)).unwrap(),
            hnf_rows(&h).unwrap(),
            "representative spans the wrong lattice"
        );
        out.push(g);
    }
    Ok(out)
}

/// x = a mod m, x = b mod n for coprime m, n.
fn crt_pair(a: &Int, m: &Int, b: &Int, n: &Int) -> Int {
    let e = m.extended_gcd(n);
    debug_assert!(e.gcd.is_one());
    // a + m * m^-1(n) * (b - a)
    let minv = e.x.mod_floor(n);
    a + m * ((b - a) * minv).mod_floor(n)
}

// ---------------------------------------------------------------------------
// b_reps
// ---------------------------------------------------------------------------

/// Representatives of Lambda_D / (Sym_n(Z) * D), where
/// Lambda_D = { B integral : transpose(B) D = transpose(D) B },
/// equivalently B D^-1 symmetric.
///
/// For Sigma = U D V in Smith form the classes are S * Sigma with S
/// symmetric, S_ij in (1/gcd(sigma_i, sigma_j)) Z mod Z; they transport
/// back along B = transpose(U) B' V^-1. Count is prod sigma_i^(n-i+1).
pub fn b_reps(d: &IntMat) -> Result<Vec<IntMat>> {
    if !d.is_square() {
        return Err(Error::DimensionMismatch("b_reps of non-square".into()));
    }
    let n = d.rows();
    if d.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let dec = snf_rect(d);
    let sigma: Vec<Int> = dec.divisors().iter().map(|x| x.abs()).collect();
    let ut = dec.u.transpose();
    let vinv = unimodular_inverse(&dec.v)?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();
    let limits: Vec<Int> = pairs
        .iter()
        .map(|&(i, j)| num_integer::gcd(sigma[i].clone(), sigma[j].clone()))
        .collect();
    let mut vals = vec![Int::zero(); pairs.len()];
    let mut out = Vec::new();
    loop {
        let mut bp = IntMat::zero(n, n);
        for (s, &(i, j)) in pairs.iter().enumerate() {
            if vals[s].is_zero() {
                continue;
            }
            bp.set(i, j, &vals[s] * (&sigma[j] / &limits[s]));
            if i != j {
                bp.set(j, i, &vals[s] * (&sigma[i] / &limits[s]));
            }
        }
        out.push(ut.mul(&bp).mul(&vinv));
        let mut carry = pairs.len();
        for s in (0..pairs.len()).rev() {
            vals[s] += 1u32;
            if vals[s] < limits[s] {
                carry = s;
                break;
            }
            vals[s] = Int::zero();
        }
        if carry == pairs.len() {
            break;
        }
    }
    Ok(out)
}

/// Generators of the finite group Lambda_D / (Sym_n(Z) * D): one
/// transported matrix per Smith coordinate with a nontrivial cyclic
/// factor. Checking a character on these decides triviality without
/// walking the whole group.
pub fn b_generators(d: &IntMat) -> Result<Vec<IntMat>> {
    if !d.is_square() {
        return Err(Error::DimensionMismatch("b_generators of non-square".into()));
    }
    let n = d.rows();
    if d.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let dec = snf_rect(d);
    let sigma: Vec<Int> = dec.divisors().iter().map(|x| x.abs()).collect();
    let ut = dec.u.transpose();
    let vinv = unimodular_inverse(&dec.v)?;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let g = num_integer::gcd(sigma[i].clone(), sigma[j].clone());
            if g.is_one() {
                continue;
            }
            let mut bp = IntMat::zero(n, n);
            bp.set(i, j, &sigma[j] / &g);
            if i != j {
                bp.set(j, i, &sigma[i] / &g);
            }
            out.push(ut.mul(&bp).mul(&vinv));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Assembled representatives
// ---------------------------------------------------------------------------

/// One coset representative: torus prefix, lower-right block D, the
/// B-matrix before the level scaling, and the assembled 2n x 2n product
/// g_1(p^a1) ... g_n(p^an) * [[p^delta tD^-1, N B], [0, D]].
#[derive(Debug, Clone)]
pub struct CosetRep {
    pub alpha: Vec<u32>,
    pub d: IntMat,
    pub b: IntMat,
    pub assembled: IntMat,
}

impl CosetRep {
    /// Exact invariants: similitude relation, the symmetry constraint on B,
    /// and the blockwise congruence diag(1, p^delta) mod N.
    pub fn validate(&self, p: u64, delta: u32, big_n: u64) -> Result<()> {
        let g = &self.assembled;
        let n2 = g.rows();
        let n = n2 / 2;
        let j = j_mat(n);
        let pd = int_pow(p, delta);
        let lhs = g.transpose().mul(&j).mul(g);
        if lhs != j.scale(&pd) {
            return Err(Error::InvalidConfig("similitude relation fails".into()));
        }
        let sym = self.b.transpose().mul(&self.d);
        if sym != sym.transpose() {
            return Err(Error::InvalidConfig("B D^-1 not symmetric".into()));
        }
        if big_n > 1 {
            let nn = Int::from(big_n);
            let mut expect = IntMat::identity(n2);
            for i in n..n2 {
                expect.set(i, i, pd.mod_floor(&nn));
            }
            if mat_mod(g, &nn) != expect {
                return Err(Error::InvalidConfig("mod-N congruence fails".into()));
            }
        }
        Ok(())
    }

    /// Hermite form of the row lattice: complete invariant of the left
    /// congruence-group class.
    pub fn canonical_invariant(&self) -> Result<Vec<Int>> {
        let h = hnf_rows(&self.assembled)?;
        Ok(h.entries().cloned().collect())
    }
}

fn check_caps(n: usize, p: u64, delta: u32) -> Result<()> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::CapExceeded(format!("degree {n} outside 1..={MAX_DEGREE}")));
    }
    let similitude = p.checked_pow(delta).filter(|&s| s <= MAX_SIMILITUDE);
    if similitude.is_none() {
        return Err(Error::CapExceeded(format!(
            "p^delta = {p}^{delta} exceeds {MAX_SIMILITUDE}"
        )));
    }
    Ok(())
}

/// Complete representative system for the left classes of the integral
/// similitude-p^delta matrices with the diag(1, p^delta) congruence mod N.
///
/// Representatives are indexed by exponent tuples (a_0..a_{n-1}) with sum
/// at most delta, a unimodular part from sl_cosets, and a B-class; the
/// torus prefix g_1(p^a1)...g_n(p^an) restores the mod-N congruence.
pub fn v_cosets(n: usize, p: u64, delta: u32, big_n: u64, seed: u64) -> Result<Vec<CosetRep>> {
    check_caps(n, p, delta)?;
    check_level(p, big_n)?;
    let pd = int_pow(p, delta);
    let mut out = Vec::new();
    let mut alpha = vec![0u32; n];
    enumerate_alpha(0, delta, &mut alpha, &mut |head: &[u32]| {
        let used: u32 = head.iter().sum();
        let mut full = head.to_vec();
        full.push(delta - used);
        let beta: Vec<u32> = (1..=n)
            .map(|i| head[..i].iter().sum())
            .collect();
        let mut torus = IntMat::identity(2 * n);
        for (j, &aj) in full.iter().enumerate().skip(1) {
            torus = torus.mul(&gj_matrix(n, j, p.pow(aj), big_n)?);
        }
        let d0 = diag_mat(&beta.iter().map(|&e| int_pow(p, e)).collect::<Vec<_>>());
        for r in sl_cosets(&beta, p, big_n, seed)? {
            let d = d0.mul(&r);
            let a = d
                .to_rat()
                .inverse()?
                .transpose()
                .scale(&Rat::from_integer(pd.clone()))
                .to_int()
                .ok_or(Error::SingularMatrix)?;
            for b in b_reps(&d)? {
                let upper = b.scale(&Int::from(big_n));
                let m0 = block_2x2(&a, &upper, &IntMat::zero(n, n), &d);
                let rep = CosetRep {
                    alpha: full.clone(),
                    d: d.clone(),
                    b,
                    assembled: torus.mul(&m0),
                };
                debug_assert!(rep.validate(p, delta, big_n).is_ok());
                out.push(rep);
            }
        }
        Ok(())
    })?;
    Ok(out)
}

fn enumerate_alpha(
    pos: usize,
    left: u32,
    cur: &mut Vec<u32>,
    f: &mut dyn FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if pos == cur.len() {
        return f(cur);
    }
    for a in 0..=left {
        cur[pos] = a;
        enumerate_alpha(pos + 1, left - a, cur, f)?;
    }
    Ok(())
}

/// Representatives for the double-coset operator attached to
/// diag(1_j, p 1_{n-j}, p^2 1_j, p 1_{n-j}): the classes of the full
/// similitude-p^2 system whose elementary-divisor type matches that
/// diagonal. Membership is decided by Smith form, the contracted test.
pub fn tj_cosets(n: usize, j: usize, p: u64, big_n: u64, seed: u64) -> Result<Vec<CosetRep>> {
    if j >= n {
        return Err(Error::InvalidConfig(format!("j = {j} outside 0..{n}")));
    }
    let mut target = Vec::new();
    target.extend(std::iter::repeat(0u32).take(j));
    target.extend(std::iter::repeat(1u32).take(2 * (n - j)));
    target.extend(std::iter::repeat(2u32).take(j));
    let mut out = Vec::new();
    for rep in v_cosets(n, p, 2, big_n, seed)? {
        if snf_p_type(&rep.assembled, p)? == Some(target.clone()) {
            out.push(rep);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Independent class enumeration: left classes of the similitude-p^delta
/// set biject with their row lattices, and a lattice spanned by a Hermite
/// form H arises exactly when p^delta divides every entry of H J tH
/// (then (1/p^delta) H J tH is a unimodular alternating form, so some
/// unimodular u makes uH a similitude matrix). Pivots divide p^delta
/// because the lattice contains p^delta Z^2n. The class set does not
/// depend on N; N only selects the representative inside each class.
pub fn brute_cosets_oracle(
    n: usize,
    p: u64,
    delta: u32,
    big_n: u64,
) -> Result<BTreeSet<Vec<Int>>> {
    if n == 0 || n > ORACLE_MAX_DEGREE {
        return Err(Error::CapExceeded(format!(
            "oracle degree {n} outside 1..={ORACLE_MAX_DEGREE}"
        )));
    }
    let similitude = p.checked_pow(delta).filter(|&s| s <= ORACLE_MAX_SIMILITUDE);
    if similitude.is_none() {
        return Err(Error::CapExceeded(format!(
            "oracle similitude {p}^{delta} exceeds {ORACLE_MAX_SIMILITUDE}"
        )));
    }
    check_level(p, big_n)?;
    let m = 2 * n;
    let pd = p.pow(delta) as i64;
    let mut out = BTreeSet::new();
    let mut diag = vec![0u32; m];
    brute_rec(0, (n as u32) * delta, delta, &mut diag, &mut |diag| {
        let pivots: Vec<i64> = diag.iter().map(|&e| (p as i64).pow(e)).collect();
        let slots: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .collect();
        let mut vals = vec![0i64; slots.len()];
        loop {
            let mut h = vec![vec![0i64; m]; m];
            for i in 0..m {
                h[i][i] = pivots[i];
            }
            for (s, &(i, j)) in slots.iter().enumerate() {
                h[i][j] = vals[s];
            }
            if alternating_divisible(&h, n, pd) {
                out.insert(
                    h.iter()
                        .flat_map(|row| row.iter().map(|&x| Int::from(x)))
                        .collect(),
                );
            }
            let mut carry = slots.len();
            for s in (0..slots.len()).rev() {
                vals[s] += 1;
                if vals[s] < pivots[slots[s].1] {
                    carry = s;
                    break;
                }
                vals[s] = 0;
            }
            if carry == slots.len() {
                break;
            }
        }
    });
    Ok(out)
}

fn brute_rec(pos: usize, left: u32, cap: u32, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    if pos == cur.len() {
        if left == 0 {
            f(cur);
        }
        return;
    }
    for e in 0..=cap.min(left) {
        cur[pos] = e;
        brute_rec(pos + 1, left - e, cap, cur, f);
    }
}

/// p^delta | every entry of H J tH, computed in machine integers
/// (entries are at most p^delta <= 9, so no overflow).
fn alternating_divisible(h: &[Vec<i64>], n: usize, pd: i64) -> bool {
    let m = 2 * n;
    for i in 0..m {
        for j in i + 1..m {
            // (H J tH)_ij = sum_k H_ik (J tH)_kj
            //            = sum_{k<n} H_ik H_j,n+k - H_i,n+k H_jk
            let mut acc = 0i64;
            for k in 0..n {
                acc += h[i][k] * h[j][n + k] - h[i][n + k] * h[j][k];
            }
            if acc % pd != 0 {
                return false;
            }
        }
    }
    true
}

/// Oracle classes restricted to the elementary-divisor type of
/// diag(1_j, p 1_{n-j}, p^2 1_j, p 1_{n-j}), for cross-checking tj_cosets.
pub fn brute_tj_oracle(n: usize, j: usize, p: u64, big_n: u64) -> Result<BTreeSet<Vec<Int>>> {
    if j >= n {
        return Err(Error::InvalidConfig(format!("j = {j} outside 0..{n}")));
    }
    let mut target = Vec::new();
    target.extend(std::iter::repeat(0u32).take(j));
    target.extend(std::iter::repeat(1u32).take(2 * (n - j)));
    target.extend(std::iter::repeat(2u32).take(j));
    let mut out = BTreeSet::new();
    for inv in brute_cosets_oracle(n, p, 2, big_n)? {
        let m = 2 * n;
        let h = IntMat::from_rows(
            inv.chunks(m).map(|row| row.to_vec()).collect(),
        );
        if snf_p_type(&h, p)? == Some(target.clone()) {
            out.insert(inv);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i(x: i64) -> Int {
        Int::from(x)
    }

    #[test]
    fn gj_identity_cases() {
        assert_eq!(gj_matrix(1, 1, 5, 1).unwrap(), IntMat::identity(2));
        assert_eq!(gj_matrix(2, 2, 1, 3).unwrap(), IntMat::identity(4));
    }

    #[test]
    fn gj_minimal_solution() {
        let g = gj_matrix(1, 1, 2, 3).unwrap();
        assert_eq!(g, IntMat::from_i64_rows(&[&[2, 3], &[3, 5]]));
    }

    #[test]
    fn gj_embedded_is_symplectic_and_congruent() {
        let n = 2;
        let g = gj_matrix(n, 1, 2, 3).unwrap();
        let j = j_mat(n);
        assert_eq!(g.transpose().mul(&j).mul(&g), j);
        let nn = i(3);
        let r = mat_mod(&g, &nn);
        // diag(2^-1, 1, 2, 1) = diag(2, 1, 2, 1) mod 3
        let expect = mat_mod(
            &IntMat::from_i64_rows(&[
                &[2, 0, 0, 0],
                &[0, 1, 0, 0],
                &[0, 0, 2, 0],
                &[0, 0, 0, 1],
            ]),
            &nn,
        );
        assert_eq!(r, expect);
    }

    #[test]
    fn gj_rejects_bad_m() {
        assert!(gj_matrix(1, 1, 3, 6).is_err());
    }

    #[test]
    fn sl_lift_examples() {
        for (rows, modulus) in [
            (vec![vec![1i64, 1], vec![0, 1]], 4u64),
            (vec![vec![2, 1], vec![1, 1]], 5),
            (vec![vec![5, 3], vec![3, 2]], 12),
            (vec![vec![1, 2, 3], vec![0, 1, 4], vec![0, 0, 1]], 6),
            (vec![vec![0, 1, 0], vec![3, 0, 1], vec![10, 0, 3]], 11),
        ] {
            let t = IntMat::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&x| i(x)).collect())
                    .collect(),
            );
            let g = sl_lift(&t, modulus).unwrap();
            assert!(g.det().is_one());
            let m = Int::from(modulus);
            assert_eq!(mat_mod(&g, &m), mat_mod(&t, &m));
        }
    }

    #[test]
    fn sl_lift_rejects_wrong_determinant() {
        let t = IntMat::from_i64_rows(&[&[2, 0], &[0, 1]]);
        assert!(sl_lift(&t, 5).is_err());
    }

    #[test]
    fn sl_cosets_trivial_and_index() {
        assert_eq!(sl_cosets(&[0, 0], 2, 1, 0).unwrap().len(), 1);
        // index of the Gamma_0(p)-type subgroup is p + 1
        assert_eq!(sl_cosets(&[0, 1], 2, 1, 0).unwrap().len(), 3);
        assert_eq!(sl_cosets(&[0, 1], 3, 1, 0).unwrap().len(), 4);
        // only differences matter
        assert_eq!(sl_cosets(&[1, 2], 2, 1, 0).unwrap().len(), 3);
        // descending order: conjugate subgroup, same index
        assert_eq!(sl_cosets(&[1, 0], 2, 1, 0).unwrap().len(), 3);
        // cyclic type (1, p^2)
        assert_eq!(sl_cosets(&[0, 2], 2, 1, 0).unwrap().len(), 6);
    }

    #[test]
    fn sl_cosets_congruence_and_distinct_lattices() {
        for seed in [0, 1] {
            let reps = sl_cosets(&[0, 1], 2, 3, seed).unwrap();
            assert_eq!(reps.len(), 3);
            let d0 = diag_mat(&[i(1), i(2)]);
            let mut lattices = BTreeSet::new();
            for r in &reps {
                assert!(r.det().is_one());
                assert_eq!(mat_mod(r, &i(3)), IntMat::identity(2));
                let h = hnf_rows(&d0.mul(r)).unwrap();
                lattices.insert(h.entries().cloned().collect::<Vec<_>>());
            }
            assert_eq!(lattices.len(), 3, "representatives collide");
        }
    }

    #[test]
    fn sl_cosets_seeds_agree_on_classes() {
        let d0 = diag_mat(&[i(1), i(2), i(4)]);
        let collect = |seed| {
            sl_cosets(&[0, 1, 2], 2, 3, seed)
                .unwrap()
                .iter()
                .map(|r| {
                    hnf_rows(&d0.mul(r))
                        .unwrap()
                        .entries()
                        .cloned()
                        .collect::<Vec<_>>()
                })
                .collect::<BTreeSet<_>>()
        };
        assert_eq!(collect(0), collect(2));
    }

    #[test]
    fn b_reps_counts_and_examples() {
        assert_eq!(b_reps(&IntMat::identity(2)).unwrap().len(), 1);
        assert_eq!(b_reps(&diag_mat(&[i(2), i(2)])).unwrap().len(), 8);
        let reps = b_reps(&diag_mat(&[i(1), i(2)])).unwrap();
        assert_eq!(reps.len(), 2);
        assert_eq!(reps[0], IntMat::zero(2, 2));
        assert_eq!(reps[1], IntMat::from_i64_rows(&[&[0, 0], &[0, 1]]));
    }

    #[test]
    fn b_reps_magnitude_matches_divisors() {
        for d in [
            diag_mat(&[i(2), i(4)]),
            diag_mat(&[i(3), i(9)]),
            IntMat::from_i64_rows(&[&[2, 2], &[0, 4]]),
            IntMat::from_i64_rows(&[&[1, 1, 0], &[0, 2, 1], &[0, 0, 2]]),
        ] {
            let dec = snf_rect(&d);
            let n = d.rows();
            let expect: Int = dec
                .divisors()
                .iter()
                .enumerate()
                .map(|(idx, s)| s.abs().pow((n - idx) as u32))
                .product();
            let reps = b_reps(&d).unwrap();
            assert_eq!(Int::from(reps.len()), expect);
            // membership: B D^-1 symmetric
            let dinv = d.to_rat().inverse().unwrap();
            for b in &reps {
                let s = b.to_rat().mul(&dinv);
                assert_eq!(s, s.transpose());
            }
        }
    }

    #[test]
    fn b_reps_classes_are_distinct() {
        let d = IntMat::from_i64_rows(&[&[2, 2], &[0, 4]]);
        let dinv = d.to_rat().inverse().unwrap();
        let reps = b_reps(&d).unwrap();
        for (x, bx) in reps.iter().enumerate() {
            for by in reps.iter().skip(x + 1) {
                // difference in Sym * D would mean (Bx - By) D^-1 integral
                let diff = bx.sub_mat(by).to_rat().mul(&dinv);
                assert!(!diff.is_integral());
            }
        }
    }

    #[test]
    fn b_reps_rejects_singular() {
        assert!(b_reps(&IntMat::zero(2, 2)).is_err());
    }

    #[test]
    fn v_cosets_frozen_counts() {
        assert_eq!(v_cosets(1, 2, 1, 1, 0).unwrap().len(), 3);
        // 1 + p(p+1) + p^3 = 1 + 6 + 8
        assert_eq!(v_cosets(2, 2, 1, 1, 0).unwrap().len(), 15);
        assert_eq!(v_cosets(1, 2, 2, 1, 0).unwrap().len(), 7);
    }

    #[test]
    fn v_cosets_level_congruence() {
        let reps = v_cosets(1, 3, 1, 2, 0).unwrap();
        assert_eq!(reps.len(), 4);
        for r in &reps {
            r.validate(3, 1, 2).unwrap();
        }
    }

    #[test]
    fn oracle_frozen_counts() {
        assert_eq!(brute_cosets_oracle(1, 2, 1, 1).unwrap().len(), 3);
        assert_eq!(brute_cosets_oracle(1, 2, 2, 1).unwrap().len(), 7);
        assert_eq!(brute_cosets_oracle(2, 2, 1, 1).unwrap().len(), 15);
    }

    #[test]
    fn completeness_against_oracle() {
        // the acceptance sweep: all configurations inside the oracle range
        for n in [1usize, 2] {
            for p in [2u64, 3] {
                for delta in [1u32, 2] {
                    for big_n in [1u64, 2, 3] {
                        if big_n % p == 0 {
                            continue;
                        }
                        let reps = v_cosets(n, p, delta, big_n, 0).unwrap();
                        let mut invariants = BTreeSet::new();
                        for r in &reps {
                            r.validate(p, delta, big_n).unwrap();
                            assert!(
                                invariants.insert(r.canonical_invariant().unwrap()),
                                "duplicate class at n={n} p={p} delta={delta} N={big_n}"
                            );
                        }
                        let oracle = brute_cosets_oracle(n, p, delta, big_n).unwrap();
                        assert_eq!(
                            invariants, oracle,
                            "class mismatch at n={n} p={p} delta={delta} N={big_n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn v_cosets_seed_invariant_classes() {
        let classes = |seed| {
            v_cosets(2, 2, 1, 3, seed)
                .unwrap()
                .iter()
                .map(|r| r.canonical_invariant().unwrap())
                .collect::<BTreeSet<_>>()
        };
        assert_eq!(classes(0), classes(1));
    }

    #[test]
    fn tj_scalar_coset() {
        for p in [2u64, 3] {
            let reps = tj_cosets(1, 0, p, 1, 0).unwrap();
            assert_eq!(reps.len(), 1);
            assert_eq!(
                reps[0].assembled,
                IntMat::identity(2).scale(&i(p as i64))
            );
        }
    }

    #[test]
    fn tj_matches_oracle() {
        for (n, j, p, big_n) in [(1, 0, 2, 1), (2, 0, 2, 1), (2, 1, 2, 1), (2, 1, 3, 2)] {
            let reps = tj_cosets(n, j, p, big_n, 0).unwrap();
            let mut invariants = BTreeSet::new();
            for r in &reps {
                r.validate(p, 2, big_n).unwrap();
                assert!(invariants.insert(r.canonical_invariant().unwrap()));
            }
            let oracle = brute_tj_oracle(n, j, p, big_n).unwrap();
            assert_eq!(invariants, oracle, "tj mismatch at n={n} j={j} p={p} N={big_n}");
        }
    }

    #[test]
    fn tj_level_congruence() {
        let reps = tj_cosets(2, 0, 2, 3, 0).unwrap();
        assert!(!reps.is_empty());
        let nn = i(3);
        for r in &reps {
            let got = mat_mod(&r.assembled, &nn);
            let mut expect = IntMat::identity(4);
            expect.set(2, 2, i(4).mod_floor(&nn));
            expect.set(3, 3, i(4).mod_floor(&nn));
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            v_cosets(4, 2, 1, 1, 0),
            Err(Error::CapExceeded(_))
        ));
        assert!(matches!(
            v_cosets(1, 2, 6, 1, 0),
            Err(Error::CapExceeded(_))
        ));
        assert!(matches!(
            brute_cosets_oracle(3, 2, 1, 1),
            Err(Error::CapExceeded(_))
        ));
        assert!(matches!(
            brute_cosets_oracle(1, 2, 4, 1),
            Err(Error::CapExceeded(_))
        ));
        assert!(v_cosets(1, 2, 1, 2, 0).is_err(), "p | N must be rejected");
        assert!(v_cosets(1, 4, 1, 1, 0).is_err(), "composite p rejected");
    }

    #[test]
    fn hnf_is_canonical() {
        let m = IntMat::from_i64_rows(&[&[2, 1], &[0, 2]]);
        let u = IntMat::from_i64_rows(&[&[1, 0], &[1, 1]]);
        let h1 = hnf_rows(&m).unwrap();
        let h2 = hnf_rows(&u.mul(&m)).unwrap();
        assert_eq!(h1, h2);
        assert!(hnf_rows(&IntMat::zero(2, 2)).is_err());
    }
}
