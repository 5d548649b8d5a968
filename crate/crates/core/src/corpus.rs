//! Oracle generators computed without the Hecke engine: elliptic
//! Eisenstein series, Delta via the eta product, and theta series of the
//! E8 lattice in degree 1 and 2.

use crate::exact::{Int, Rat, Scalar};
use crate::fourier::{HalfIntMat, Mode, QExpansion};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

/// sum of d^e over divisors d of m (m >= 1).
fn sigma(m: i64, e: u32) -> Int {
    let mut s = Int::from(0);
    for d in 1..=m {
        if m % d == 0 {
            s += Int::from(d).pow(e);
        }
    }
    s
}

fn set_int(f: &mut QExpansion, t: HalfIntMat, c: Int) -> Result<()> {
    f.set_coeff(t, vec![Scalar::from_rat(Rat::from_integer(c))])
}

/// Level-1 Eisenstein series of weight k, denominators cleared:
/// a(0) = denom(-B_k/2k), a(m) = numer(-2k/B_k) * sigma_{k-1}(m).
pub fn eisenstein(k: i64, theta: i64) -> Result<QExpansion> {
    // -2k/B_k as (numerator, denominator) in lowest terms.
    let (num, den): (i64, i64) = match k {
        4 => (240, 1),
        6 => (-504, 1),
        8 => (480, 1),
        10 => (-264, 1),
        12 => (65520, 691),
        14 => (-24, 1),
        _ => {
            return Err(Error::Unsupported(format!(
                "Eisenstein weight {k} not in {{4,6,8,10,12,14}}"
            )))
        }
    };
    let mut f = QExpansion::scalar_level_one(1, k, Mode::Explicit)?;
    set_int(&mut f, HalfIntMat::scalar(0), Int::from(den))?;
    for m in 1..=theta.max(0) {
        set_int(&mut f, HalfIntMat::scalar(m), Int::from(num) * sigma(m, (k - 1) as u32))?;
    }
    Ok(f)
}

/// Delta = q prod (1-q^m)^24, coefficients through q^theta.
pub fn delta(theta: i64) -> Result<QExpansion> {
    let len = (theta.max(0) + 1) as usize;
    // eta-quotient part prod(1-q^m) via the pentagonal number theorem
    let mut eta = vec![Int::from(0); len];
    if len > 0 {
        eta[0] = Int::from(1);
        let mut k: i64 = 1;
        loop {
            let (e1, e2) = (k * (3 * k - 1) / 2, k * (3 * k + 1) / 2);
            if e1 >= len as i64 {
                break;
            }
            let s = if k % 2 == 0 { 1 } else { -1 };
            eta[e1 as usize] += s;
            if e2 < len as i64 {
                eta[e2 as usize] += s;
            }
            k += 1;
        }
    }
    let mul = |a: &[Int], b: &[Int]| {
        let mut out = vec![Int::from(0); len];
        for (i, x) in a.iter().enumerate() {
            if x == &Int::from(0) {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x * y;
            }
        }
        out
    };
    let e2 = mul(&eta, &eta);
    let e4 = mul(&e2, &e2);
    let e8 = mul(&e4, &e4);
    let e16 = mul(&e8, &e8);
    let e24 = mul(&e16, &e8);
    let mut f = QExpansion::scalar_level_one(1, 12, Mode::Explicit)?;
    for m in 0..=theta.max(0) {
        let c = if m == 0 {
            Int::from(0)
        } else {
            e24[(m - 1) as usize].clone()
        };
        set_int(&mut f, HalfIntMat::scalar(m), c)?;
    }
    Ok(f)
}

/// Largest vector norm the shell cache will enumerate.
pub const SHELL_NORM_CAP: i64 = 24;

/// E8 Gram matrix: Cartan matrix of the T(2,3,5) tree (center node 0,
/// legs 0-1, 0-2-3, 0-4-5-6-7). Even, positive definite, determinant 1.
const E8_EDGES: [(usize, usize); 7] = [(0, 1), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6), (6, 7)];

fn e8_gram() -> [[i64; 8]; 8] {
    let mut g = [[0i64; 8]; 8];
    for i in 0..8 {
        g[i][i] = 2;
    }
    for &(i, j) in &E8_EDGES {
        g[i][j] = -1;
        g[j][i] = -1;
    }
    g
}

/// Vectors of each even norm up to `max_norm`, keyed by norm.
pub struct ShellCache {
    max_norm: i64,
    shells: BTreeMap<i64, Vec<[i16; 8]>>,
}

impl ShellCache {
    pub fn count(&self, norm: i64) -> Option<usize> {
        if norm > self.max_norm || norm < 0 {
            return None;
        }
        Some(self.shells.get(&norm).map_or(0, |v| v.len()))
    }

    pub fn vectors(&self, norm: i64) -> &[[i16; 8]] {
        self.shells.get(&norm).map_or(&[], |v| &v[..])
    }
}

/// Exact LDL^T data for the Gram form: q[i][i] > 0 and
/// Q(x) = sum_i q[i][i] (x_i + sum_{j>i} q[i][j] x_j)^2.
fn cholesky(g: &[[i64; 8]; 8]) -> Vec<Vec<Rat>> {
    let mut q: Vec<Vec<Rat>> = (0..8)
        .map(|i| (0..8).map(|j| Rat::from_integer(Int::from(g[i][j]))).collect())
        .collect();
    for i in 0..8 {
        for j in i + 1..8 {
            let s = &q[i][j] / &q[i][i];
            for l in j..8 {
                let t = &q[j][l] - &s * &q[i][l];
                q[j][l] = t;
            }
            q[i][j] = s;
        }
    }
    q
}

fn rat_to_f64(x: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().expect("small rational")
}

/// Enumerate all lattice vectors of norm <= max_norm by the standard
/// completed-squares recursion; exact integer norms decide membership.
fn enumerate_shells(max_norm: i64) -> ShellCache {
    let g = e8_gram();
    let q = cholesky(&g);
    let qf: Vec<Vec<f64>> = q.iter().map(|r| r.iter().map(rat_to_f64).collect()).collect();
    let mut shells: BTreeMap<i64, Vec<[i16; 8]>> = BTreeMap::new();
    let mut x = [0i64; 8];
    // recurse from the last coordinate down so each level has a budget
    fn rec(
        level: usize,
        budget: f64,
        x: &mut [i64; 8],
        qf: &[Vec<f64>],
        g: &[[i64; 8]; 8],
        shells: &mut BTreeMap<i64, Vec<[i16; 8]>>,
        max_norm: i64,
    ) {
        if budget < -1e-9 {
            return;
        }
        let i = level;
        let center: f64 = (i + 1..8).map(|j| qf[i][j] * x[j] as f64).sum();
        let half_width = (budget.max(0.0) / qf[i][i]).sqrt() + 1e-6;
        let lo = (-center - half_width).floor() as i64;
        let hi = (-center + half_width).ceil() as i64;
        for v in lo..=hi {
            x[i] = v;
            let used = qf[i][i] * (v as f64 + center) * (v as f64 + center);
            if i == 0 {
                // exact integer norm check
                let mut norm = 0i64;
                for a in 0..8 {
                    for b in 0..8 {
                        norm += g[a][b] * x[a] * x[b];
                    }
                }
                if norm <= max_norm {
                    let mut out = [0i16; 8];
                    for (o, &xi) in out.iter_mut().zip(x.iter()) {
                        *o = xi as i16;
                    }
                    shells.entry(norm).or_default().push(out);
                }
            } else {
                rec(i - 1, budget - used, x, qf, g, shells, max_norm);
            }
        }
        x[i] = 0;
    }
    rec(7, max_norm as f64 + 0.5, &mut x, &qf, &g, &mut shells, max_norm);
    for v in shells.values_mut() {
        v.sort();
    }
    ShellCache { max_norm, shells }
}

fn write_cache(c: &ShellCache) -> String {
    let mut out = format!("E8SHELLS 1 max_norm={}\n", c.max_norm);
    for (norm, vs) in &c.shells {
        out.push_str(&format!("norm {}: {}\n", norm, vs.len()));
        for v in vs {
            let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

fn parse_cache(text: &str) -> Option<ShellCache> {
    let mut lines = text.lines();
    let head = lines.next()?;
    let max_norm: i64 = head.strip_prefix("E8SHELLS 1 max_norm=")?.parse().ok()?;
    let mut shells: BTreeMap<i64, Vec<[i16; 8]>> = BTreeMap::new();
    let mut cur: Option<(i64, usize)> = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("norm ") {
            let (n, c) = rest.split_once(": ")?;
            cur = Some((n.parse().ok()?, c.parse().ok()?));
            shells.insert(cur?.0, Vec::with_capacity(cur?.1));
            continue;
        }
        let (norm, _) = cur?;
        let v: Option<Vec<i16>> = line.split(' ').map(|t| t.parse().ok()).collect();
        let v = v?;
        if v.len() != 8 {
            return None;
        }
        let mut a = [0i16; 8];
        a.copy_from_slice(&v);
        shells.get_mut(&norm)?.push(a);
    }
    for (n, vs) in &shells {
        let declared = text
            .lines()
            .find(|l| l.starts_with(&format!("norm {n}: ")))
            .and_then(|l| l.rsplit(' ').next()?.parse::<usize>().ok())?;
        if vs.len() != declared {
            return None;
        }
    }
    Some(ShellCache { max_norm, shells })
}

/// Load or compute shells of norm <= max_norm; cache_dir stores one
/// versioned text file per bound.
pub fn load_shells(max_norm: i64, cache_dir: Option<&Path>) -> Result<ShellCache> {
    if max_norm > SHELL_NORM_CAP {
        return Err(Error::CapExceeded(format!(
            "shell norm {max_norm} exceeds cap {SHELL_NORM_CAP}"
        )));
    }
    let path = cache_dir.map(|d| d.join(format!("e8_shells_{max_norm}.txt")));
    if let Some(p) = &path {
        if let Ok(text) = std::fs::read_to_string(p) {
            if let Some(c) = parse_cache(&text) {
                if c.max_norm == max_norm {
                    return Ok(c);
                }
            }
        }
    }
    let c = enumerate_shells(max_norm);
    if let Some(p) = &path {
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::File::create(p)?;
        f.write_all(write_cache(&c).as_bytes())?;
    }
    Ok(c)
}

#[cfg(test)]
fn dot(g: &[[i64; 8]; 8], x: &[i16; 8], y: &[i16; 8]) -> i64 {
    let mut gx = [0i64; 8];
    for (i, gxi) in gx.iter_mut().enumerate() {
        for j in 0..8 {
            *gxi += g[i][j] * y[j] as i64;
        }
    }
    (0..8).map(|i| x[i] as i64 * gx[i]).sum()
}

/// Theta series of E8 in degree n at the given indices:
/// a(T) = #{(x_1..x_n) : <x_i, x_j> = (2T)_ij}. Class mode, weight 4.
pub fn theta_e8(n: usize, indices: &[HalfIntMat], cache_dir: Option<&Path>) -> Result<QExpansion> {
    if !(1..=2).contains(&n) {
        return Err(Error::Unsupported(format!("theta degree {n} not in 1..=2")));
    }
    let mut f = QExpansion::new(
        n,
        1,
        vec![4; n],
        crate::fourier::CharTuple::trivial(n, 1),
        crate::fourier::RingTag::Z,
        Mode::Class,
    )?;
    // canonical class representatives actually needing a count
    let mut keys: Vec<HalfIntMat> = indices.iter().map(|t| f.canonical_key(t)).collect();
    keys.sort();
    keys.dedup();
    let max_norm = keys
        .iter()
        .flat_map(|t| (0..n).map(move |i| t.at(i, i)))
        .max()
        .unwrap_or(0);
    let shells = load_shells(max_norm, cache_dir)?;
    if n == 1 {
        for t in keys {
            let c = shells.count(t.at(0, 0)).expect("within bound") as i64;
            set_int(&mut f, t, Int::from(c))?;
        }
        return Ok(f);
    }
    let g = e8_gram();
    // one inner-product histogram per diagonal pair covers every b
    let mut diag_pairs: Vec<(i64, i64)> = keys.iter().map(|t| (t.at(0, 0), t.at(1, 1))).collect();
    diag_pairs.sort();
    diag_pairs.dedup();
    let mut hists: BTreeMap<(i64, i64), BTreeMap<i64, i64>> = BTreeMap::new();
    for &(na, nc) in &diag_pairs {
        let mut hist: BTreeMap<i64, i64> = BTreeMap::new();
        for x in shells.vectors(na) {
            let mut gx = [0i64; 8];
            for (i, gxi) in gx.iter_mut().enumerate() {
                for j in 0..8 {
                    *gxi += g[i][j] * x[j] as i64;
                }
            }
            for y in shells.vectors(nc) {
                let ip: i64 = (0..8).map(|i| gx[i] * y[i] as i64).sum();
                *hist.entry(ip).or_insert(0) += 1;
            }
        }
        hists.insert((na, nc), hist);
    }
    for t in keys {
        let hist = &hists[&(t.at(0, 0), t.at(1, 1))];
        let c = hist.get(&t.at(0, 1)).copied().unwrap_or(0);
        set_int(&mut f, t, Int::from(c))?;
    }
    Ok(f)
}

/// theta_e8 over every index with tr(T) <= theta.
pub fn theta_e8_trace(n: usize, theta: i64, cache_dir: Option<&Path>) -> Result<QExpansion> {
    let indices = crate::fourier::enumerate_indices(n, theta)?;
    theta_e8(n, &indices, cache_dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::reduce_binary;

    fn coeff_int(f: &QExpansion, t: &HalfIntMat) -> Int {
        let c = f.coeff(t).expect("coefficient present");
        c[0].as_rat().expect("rational").to_integer()
    }

    #[test]
    fn eisenstein_weight_four() {
        let f = eisenstein(4, 6).unwrap();
        let want = [1, 240, 2160, 6720, 17520, 30240, 60480];
        for (m, w) in want.iter().enumerate() {
            assert_eq!(coeff_int(&f, &HalfIntMat::scalar(m as i64)), Int::from(*w));
        }
    }

    #[test]
    fn eisenstein_weight_twelve_scaled() {
        let f = eisenstein(12, 2).unwrap();
        assert_eq!(coeff_int(&f, &HalfIntMat::scalar(0)), Int::from(691));
        assert_eq!(coeff_int(&f, &HalfIntMat::scalar(1)), Int::from(65520));
        assert_eq!(coeff_int(&f, &HalfIntMat::scalar(2)), Int::from(65520) * sigma(2, 11));
    }

    #[test]
    fn eisenstein_truncation_and_bad_weight() {
        let f = eisenstein(6, 0).unwrap();
        assert_eq!(f.len(), 1);
        assert!(matches!(eisenstein(5, 3), Err(Error::Unsupported(_))));
        assert!(matches!(eisenstein(16, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn delta_leading_coefficients() {
        let f = delta(11).unwrap();
        let tau = [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612];
        for (m, w) in tau.iter().enumerate() {
            assert_eq!(coeff_int(&f, &HalfIntMat::scalar(m as i64)), Int::from(*w), "tau({m})");
        }
    }

    #[test]
    fn delta_is_multiplicative() {
        let f = delta(35).unwrap();
        let tau = |m: i64| coeff_int(&f, &HalfIntMat::scalar(m));
        // tau(mn) = tau(m)tau(n) for coprime m, n
        assert_eq!(tau(6), tau(2) * tau(3));
        assert_eq!(tau(35), tau(5) * tau(7));
        // tau(p^2) = tau(p)^2 - p^11 tau(1)
        assert_eq!(tau(4), tau(2) * tau(2) - Int::from(2048));
    }

    #[test]
    fn e8_gram_is_even_unimodular() {
        let g = e8_gram();
        let m = crate::exact::IntMat::from_rows(
            (0..8)
                .map(|i| (0..8).map(|j| Int::from(g[i][j])).collect())
                .collect(),
        );
        assert_eq!(m.det(), Int::from(1));
        assert_eq!(m.transpose(), m);
    }

    #[test]
    fn shell_counts_match_divisor_sums() {
        // r(m) = 240 sigma_3(m) for the E8 lattice
        let shells = enumerate_shells(12);
        assert_eq!(shells.count(0), Some(1));
        for m in 1..=6i64 {
            let want = Int::from(240) * sigma(m, 3);
            assert_eq!(Int::from(shells.count(2 * m).unwrap()), want, "norm {}", 2 * m);
        }
    }

    #[test]
    fn shells_closed_under_negation() {
        let shells = enumerate_shells(4);
        for norm in [2i64, 4] {
            let vs = shells.vectors(norm);
            for v in vs {
                let neg: [i16; 8] = std::array::from_fn(|i| -v[i]);
                assert!(vs.binary_search(&neg).is_ok());
            }
        }
    }

    #[test]
    fn cache_roundtrip() {
        let dir = std::env::temp_dir().join("hecke_e8_cache_test");
        let _ = std::fs::remove_dir_all(&dir);
        let a = load_shells(6, Some(&dir)).unwrap();
        let b = load_shells(6, Some(&dir)).unwrap();
        for norm in [0i64, 2, 4, 6] {
            assert_eq!(a.vectors(norm), b.vectors(norm));
        }
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn theta_degree_one_matches_eisenstein() {
        let theta = theta_e8_trace(1, 6, None).unwrap();
        let e4 = eisenstein(4, 6).unwrap();
        for m in 0..=6 {
            let t = HalfIntMat::scalar(m);
            assert_eq!(coeff_int(&theta, &t), coeff_int(&e4, &t), "index {m}");
        }
    }

    #[test]
    fn theta_degree_two_basics() {
        let f = theta_e8_trace(2, 2, None).unwrap();
        assert_eq!(coeff_int(&f, &HalfIntMat::zero(2)), Int::from(1));
        // rank-1 indices restrict to the degree-1 counts
        assert_eq!(coeff_int(&f, &HalfIntMat::diag(&[1, 0])), Int::from(240));
        assert_eq!(coeff_int(&f, &HalfIntMat::diag(&[2, 0])), Int::from(2160));
    }

    #[test]
    fn theta_degree_two_class_invariant() {
        let f = theta_e8_trace(2, 3, None).unwrap();
        for t in crate::fourier::enumerate_indices(2, 3).unwrap() {
            let (canon, _) = reduce_binary(&t);
            assert_eq!(f.coeff(&t), f.coeff(&canon));
        }
    }

    #[test]
    fn theta_pair_counts_are_consistent() {
        // summing the inner-product histogram over b recovers the
        // product of the shell sizes
        let f = theta_e8_trace(2, 2, None).unwrap();
        let shells = enumerate_shells(4);
        let mut total = Int::from(0);
        let mut seen = std::collections::BTreeSet::new();
        for t in crate::fourier::enumerate_indices(2, 2).unwrap() {
            if t.at(0, 0) == 2 && t.at(1, 1) == 2 && seen.insert(t.upper_entries()) {
                total += coeff_int(&f, &t);
            }
        }
        let n = Int::from(shells.count(2).unwrap());
        assert_eq!(total, &n * &n);
    }

    #[test]
    fn shell_cap_enforced() {
        assert!(matches!(
            load_shells(SHELL_NORM_CAP + 2, None),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn dot_agrees_with_gram() {
        let g = e8_gram();
        let shells = enumerate_shells(2);
        for v in shells.vectors(2) {
            assert_eq!(dot(&g, v, v), 2);
        }
    }
}
