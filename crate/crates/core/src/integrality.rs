//! Truncation, lattice saturation, and the integrality certificate for
//! Hecke matrices, plus exhaustive verifiers for the valuation and
//! counting bounds used in the proofs.

use crate::cosets::v_cosets;
use crate::exact::{
    berkowitz_charpoly, snf_rect, Int, MonicPoly, Rat, RatMat, Scalar,
};
use crate::fourier::{HalfIntMat, QExpansion, RingTag};
use crate::hecke::{norm_factor, OpKind};
use crate::weights::{build_model, HighestWeight};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

/// Truncation state shared by the solver and the certifier: the canonical
/// index order over the joint support, the injective prefix length, and
/// the flattened rational coefficient matrix on that prefix (one column
/// per basis element).
pub struct TruncationData {
    pub n_star: usize,
    pub indices: Vec<HalfIntMat>,
    pub matrix: RatMat,
    conductor: u64,
}

fn flatten_scalar(x: &Scalar, conductor: u64, out: &mut Vec<Rat>) -> Result<()> {
    if conductor == 1 {
        out.push(
            x.as_rat()
                .cloned()
                .ok_or_else(|| Error::InvalidConfig("irrational value in a rational ring".into()))?,
        );
    } else {
        out.extend(x.to_cyc().embed(conductor)?.coords().iter().cloned());
    }
    Ok(())
}

fn flatten_coeff(c: &[Scalar], conductor: u64, out: &mut Vec<Rat>) -> Result<()> {
    for x in c {
        flatten_scalar(x, conductor, out)?;
    }
    Ok(())
}

fn flatten_at(f: &QExpansion, t: &HalfIntMat, conductor: u64, width: usize) -> Result<Vec<Rat>> {
    let mut out = Vec::new();
    match f.coeff(t) {
        Some(c) => flatten_coeff(c, conductor, &mut out)?,
        None => out.resize(width, Rat::zero()),
    }
    Ok(out)
}

fn coord_width(dim: usize, conductor: u64) -> usize {
    let phi = if conductor == 1 {
        1
    } else {
        (1..=conductor).filter(|x| num_integer::gcd(*x, conductor) == 1).count()
    };
    dim * phi
}

/// Canonical index order, joint conductor, and shape validation.
fn basis_frame(basis: &[QExpansion]) -> Result<(Vec<HalfIntMat>, u64)> {
    let first = basis.first().ok_or_else(|| Error::InvalidConfig("empty basis".into()))?;
    if basis.iter().any(|f| !f.same_shape(first)) {
        return Err(Error::DimensionMismatch("basis expansions differ in shape".into()));
    }
    let mut conductor = 1u64;
    for f in basis {
        conductor = num_integer::lcm(conductor, f.ring().conductor());
    }
    let indices: BTreeSet<HalfIntMat> = basis.iter().flat_map(|f| f.support().cloned()).collect();
    Ok((indices.into_iter().collect(), conductor))
}

/// Smallest prefix of the canonical index order on which the basis
/// coefficient columns have full rank; the prefix map is then injective
/// on the span, and minimality holds by construction.
pub fn truncation_data(basis: &[QExpansion]) -> Result<TruncationData> {
    let (indices, conductor) = basis_frame(basis)?;
    let k = basis.len();
    let width = coord_width(basis[0].dim(), conductor);
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut n_star = None;
    for (pos, t) in indices.iter().enumerate() {
        for r in 0..width {
            let mut row = Vec::with_capacity(k);
            for f in basis {
                row.push(flatten_at(f, t, conductor, width)?[r].clone());
            }
            rows.push(row);
        }
        if RatMat::from_rows(rows.clone()).rank() == k {
            n_star = Some(pos + 1);
            break;
        }
    }
    let Some(n_star) = n_star else {
        // identify the first column dependent on its predecessors
        let full = RatMat::from_rows(rows);
        for j in 0..k {
            let sub = RatMat::from_rows(
                (0..full.rows())
                    .map(|i| (0..=j).map(|c| full.at(i, c).clone()).collect())
                    .collect(),
            );
            if sub.rank() == j {
                return Err(Error::DependentBasis(j));
            }
        }
        unreachable!("rank deficiency implies a dependent column");
    };
    let mat_rows: Vec<Vec<Rat>> = rows.into_iter().take(n_star * width).collect();
    Ok(TruncationData {
        n_star,
        indices,
        matrix: RatMat::from_rows(mat_rows),
        conductor,
    })
}

/// Prefix length N* alone (Lemma-2.2 interface).
pub fn injective_truncation(basis: &[QExpansion]) -> Result<usize> {
    truncation_data(basis).map(|d| d.n_star)
}

/// Matrix C with op(f_i) = sum_j C_ij f_j, solved on the injective
/// prefix and verified on every index shared by the whole basis and the
/// image.
pub fn hecke_matrix<F>(basis: &[QExpansion], op: F) -> Result<RatMat>
where
    F: Fn(&QExpansion) -> Result<QExpansion>,
{
    let data = truncation_data(basis)?;
    let k = basis.len();
    let width = coord_width(basis[0].dim(), data.conductor);
    let b = &data.matrix;
    let gram = b.transpose().mul(b);
    let gram_inv = gram.inverse()?;
    let shared: Vec<&HalfIntMat> = data
        .indices
        .iter()
        .filter(|t| basis.iter().all(|f| f.coeff(t).is_some()))
        .collect();
    let mut c_rows = Vec::with_capacity(k);
    for f in basis {
        let g = op(f)?;
        if g.ring().conductor() != 1 && g.ring().conductor() != data.conductor {
            return Err(Error::ConductorMismatch(g.ring().conductor(), data.conductor));
        }
        let missing: Vec<String> = data.indices[..data.n_star]
            .iter()
            .filter(|t| g.coeff(t).is_none())
            .map(|t| render_index(t))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingIndices(missing));
        }
        let mut y = Vec::new();
        for t in &data.indices[..data.n_star] {
            y.extend(flatten_at(&g, t, data.conductor, width)?);
        }
        let bty: Vec<Rat> = (0..k)
            .map(|j| (0..y.len()).map(|r| b.at(r, j) * &y[r]).sum())
            .collect();
        let x = gram_inv.apply(&bty);
        // residual check on every shared index the image carries
        for t in &shared {
            if g.coeff(t).is_none() {
                continue;
            }
            let gv = flatten_at(&g, t, data.conductor, width)?;
            for r in 0..width {
                let mut acc = gv[r].clone();
                for (j, fj) in basis.iter().enumerate() {
                    acc -= flatten_at(fj, t, data.conductor, width)?[r].clone() * &x[j];
                }
                if !acc.is_zero() {
                    return Err(Error::UnstableSpan(render_index(t)));
                }
            }
        }
        c_rows.push(x);
    }
    Ok(RatMat::from_rows(c_rows))
}

fn render_index(t: &HalfIntMat) -> String {
    let parts: Vec<String> = t.upper_entries().iter().map(|x| x.to_string()).collect();
    parts.join(" ")
}

/// Certificate that the eigenvalues of a Hecke matrix are algebraic
/// integers: charpoly of the operator re-expressed on the saturated
/// coefficient lattice, with a witness row when the lattice itself is
/// not preserved.
pub struct IntegralityCertificate {
    pub charpoly: MonicPoly<Rat>,
    pub ring: RingTag,
    pub n_star: usize,
    pub fingerprint: String,
    pub verdict: bool,
    pub witness: Option<(usize, Vec<Rat>)>,
}

impl fmt::Display for IntegralityCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "certificate")?;
        writeln!(f, "  degree: {}", self.charpoly.degree())?;
        writeln!(f, "  truncation: {}", self.n_star)?;
        writeln!(f, "  fingerprint: {}", self.fingerprint)?;
        let ring = match self.ring {
            RingTag::Z => "Z".to_string(),
            RingTag::Q => "Q".to_string(),
            RingTag::Cyc(n) => format!("Z[zeta_{n}]"),
        };
        writeln!(f, "  ring: {ring}")?;
        let cs: Vec<String> = self.charpoly.coeffs().iter().map(|c| c.to_string()).collect();
        writeln!(f, "  charpoly ascending: {}", cs.join(" "))?;
        if let Some((i, row)) = &self.witness {
            let r: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(f, "  witness row {i}: {}", r.join(" "))?;
        }
        write!(f, "INTEGRAL: {}", if self.verdict { "yes" } else { "no" })
    }
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Re-express `c` on the saturation of the row lattice of truncated
/// basis coefficients and report whether its charpoly is integral.
pub fn certify(c: &RatMat, basis: &[QExpansion]) -> Result<IntegralityCertificate> {
    let k = basis.len();
    if c.rows() != k || c.cols() != k {
        return Err(Error::DimensionMismatch("matrix does not match the basis".into()));
    }
    let data = truncation_data(basis)?;
    let rows_rat = data.matrix.transpose(); // k x R, one row per basis form
    let mut ell = Int::from(1);
    for e in rows_rat.entries() {
        ell = num_integer::lcm(ell, e.denom().clone());
    }
    let rows_int = rows_rat
        .scale(&Rat::from_integer(ell.clone()))
        .to_int()
        .expect("denominators cleared");
    let dec = snf_rect(&rows_int);
    let divisors = dec.divisors();
    if divisors.iter().take(k).any(|d| d.is_zero()) {
        return Err(Error::DependentBasis(k - 1));
    }
    // saturated basis: row i of U * rows_int, divided by the i-th divisor,
    // so the transition from the original basis is T = ell * D^-1 * U
    let t_rows: Vec<Vec<Rat>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| Rat::new(dec.u.at(i, j) * &ell, divisors[i].clone()))
                .collect()
        })
        .collect();
    let t = RatMat::from_rows(t_rows);
    let c_sat = t.mul(c).mul(&t.inverse()?);
    let charpoly = berkowitz_charpoly(&c_sat)?;
    let verdict = charpoly.is_integral();
    let witness = (0..k).find_map(|i| {
        if (0..k).any(|j| !c_sat.at(i, j).is_integer()) {
            Some((i, c_sat.row(i).to_vec()))
        } else {
            None
        }
    });
    let mut buf = ell.to_string();
    for e in rows_int.entries() {
        buf.push(' ');
        buf.push_str(&e.to_string());
    }
    let ring = if data.conductor > 1 {
        RingTag::Cyc(data.conductor)
    } else {
        RingTag::Z
    };
    Ok(IntegralityCertificate {
        charpoly,
        ring,
        n_star: data.n_star,
        fingerprint: format!("{:016x}", fnv64(buf.as_bytes())),
        verdict,
        witness,
    })
}

// ---------------------------------------------------------------------------
// Exhaustive bound verifiers
// ---------------------------------------------------------------------------

/// F_b(a) = (2n - a - 2b) k_n - n(n+1) + b(a+b+1), checked against the
/// claimed minima over 0 <= a, b with a + b <= n. Returns the list of
/// violated instances, which must be empty.
pub fn check_fb(n: i64, k_n: i64) -> Vec<String> {
    let f = |a: i64, b: i64| (2 * n - a - 2 * b) * k_n - n * (n + 1) + b * (a + b + 1);
    let mut bad = Vec::new();
    for b in 0..=n {
        for a in 0..=n - b {
            let v = f(a, b);
            if k_n > n {
                let min = (n - b) * (k_n - n - 1);
                if v < min || min < 0 {
                    bad.push(format!("n={n} k_n={k_n} a={a} b={b}: F={v} below {min}"));
                }
            } else {
                if v < -n * (n - k_n + 1) {
                    bad.push(format!("n={n} k_n={k_n} a={a} b={b}: F={v} below global bound"));
                }
                let min = if b >= k_n {
                    f(0, b)
                } else {
                    -(n - b) * (n - k_n + 1)
                };
                if v < min {
                    bad.push(format!("n={n} k_n={k_n} a={a} b={b}: F={v} below case bound {min}"));
                }
            }
        }
        if k_n > n && f(n - b, b) != (n - b) * (k_n - n - 1) {
            bad.push(format!("n={n} k_n={k_n} b={b}: minimum not at a=n-b"));
        }
    }
    bad
}

fn rat_pow(base: u64, exp: i64) -> Rat {
    let mut acc = Rat::from_integer(Int::from(1));
    let b = Rat::from_integer(Int::from(base));
    for _ in 0..exp.unsigned_abs() {
        acc *= &b;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Margin check k_j - k_n + j - 1 >= 0 for the weight exponents, and,
/// for n <= 2, the integrality of the normalized block operators
/// p^e rho(p^delta D^-1) prod (p^delta)^-(n-j+1) d_j^(n-j+1) over the
/// coset blocks D of T(p^delta).
pub fn check_weight_exponent(k: &[i64], p: u64, delta: u32) -> Result<Vec<String>> {
    let n = k.len();
    let k_n = *k.last().ok_or_else(|| Error::InvalidConfig("empty weight".into()))?;
    let mut bad = Vec::new();
    for (j, kj) in k.iter().enumerate() {
        // j runs 0-based, so this is the paper's k_j - k_n + j - 1
        let margin = kj - k_n + j as i64;
        if margin < 0 {
            bad.push(format!("margin k_{} - k_{n} + {} - 1 = {} < 0", j + 1, j + 1, margin));
        }
    }
    if n > 2 {
        return Ok(bad);
    }
    let model = build_model(HighestWeight::new(k.to_vec())?)?;
    let e = norm_factor(n, k_n, OpKind::Tp);
    let mut seen: BTreeSet<Vec<Int>> = BTreeSet::new();
    for rep in v_cosets(n, p, delta, 1, 0)? {
        if !seen.insert(rep.d.entries().cloned().collect()) {
            continue;
        }
        let pd = rat_pow(p, delta as i64);
        let dinv_scaled = rep.d.to_rat().inverse()?.scale(&pd);
        let rho = model.rho_matrix(&dinv_scaled)?;
        let mut s = rat_pow(p, e * delta as i64);
        let divs = snf_rect(&rep.d).divisors();
        for (j, d) in divs.iter().enumerate() {
            let exp = (n - j) as i64;
            s *= Rat::from_integer(d.abs()).pow(exp as i32);
            s *= rat_pow(p, -(delta as i64) * exp);
        }
        if !rho.scale(&s).is_integral() {
            bad.push(format!(
                "block D with divisors {:?} not integral after scaling by {s}",
                divs.iter().map(|x| x.to_string()).collect::<Vec<_>>()
            ));
        }
    }
    Ok(bad)
}

/// Exact count of E(M, d), the algebraic integers of degree <= d whose
/// conjugates all have absolute value <= M, together with the
/// (16 M)^(d^2) comparison bound. Closed-form root tests cover d <= 2.
pub fn count_e(m: i64, d: u32) -> Result<(u64, Int)> {
    if m < 1 || d < 1 {
        return Err(Error::InvalidConfig("count_e needs M, d >= 1".into()));
    }
    if d > 2 {
        return Err(Error::Unsupported(
            "root-modulus tests implemented for degree <= 2 only".into(),
        ));
    }
    if m > 100 {
        return Err(Error::CapExceeded(format!("count_e enumeration cap at M = 100, got {m}")));
    }
    let bound = Int::from(16 * m).pow(d * d);
    let mut count = 0u64;
    for a in -m..=m {
        let _ = a;
        count += 1; // linear X - a, root a in [-M, M]
    }
    if d == 2 {
        for b in -2 * m..=2 * m {
            for c in -m * m..=m * m {
                let disc = b * b - 4 * c;
                if disc >= 0 && num_integer::Roots::sqrt(&disc).pow(2) == disc {
                    continue; // reducible over Z, roots already counted at degree 1
                }
                let inside = if disc < 0 {
                    // conjugate pair of modulus sqrt(c)
                    c <= m * m
                } else {
                    // real pair: both roots in [-M, M]
                    m * m + b * m + c >= 0 && m * m - b * m + c >= 0 && b.abs() <= 2 * m
                };
                if inside {
                    count += 2;
                }
            }
        }
    }
    if Int::from(count) > bound {
        return Err(Error::InvalidConfig(format!(
            "count {count} exceeds the bound {bound} at M={m} d={d}"
        )));
    }
    Ok((count, bound))
}
