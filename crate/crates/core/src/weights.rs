//! Polynomial representations of GL_n with a given highest weight,
//! realized inside a tensor product of symmetric powers of exterior
//! powers, together with exact evaluation on rational matrices.

use crate::exact::{rat_int, Rat, RatMat, Ring};
use crate::{Error, Result};

/// Weakly decreasing integer weight (k_1, ..., k_n) with k_n >= 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HighestWeight {
    k: Vec<i64>,
}

impl HighestWeight {
    pub fn new(k: Vec<i64>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::InvalidConfig("empty weight".into()));
        }
        if k.windows(2).any(|w| w[0] < w[1]) || *k.last().unwrap() < 0 {
            return Err(Error::InvalidConfig(format!(
                "weight {k:?} is not weakly decreasing with nonnegative tail"
            )));
        }
        Ok(HighestWeight { k })
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[i64] {
        &self.k
    }

    pub fn k_min(&self) -> i64 {
        *self.k.last().unwrap()
    }

    pub fn is_scalar(&self) -> bool {
        self.k.iter().all(|&x| x == self.k[0])
    }
}

/// One tensor factor: the d-th symmetric power of the j-th exterior
/// power of the standard module.
#[derive(Debug, Clone)]
struct SymFactor {
    d: i64,
    /// j-subsets of {0..n}, the basis of the exterior power, in lex order.
    subsets: Vec<Vec<usize>>,
    /// Monomials: weakly increasing index tuples of length d into `subsets`.
    monomials: Vec<Vec<usize>>,
}

/// Tensor model containing the irreducible module of the given highest
/// weight as its top component. Basis vectors are products of exterior
/// monomials; the det^{k_n} twist is carried in the weights.
#[derive(Debug, Clone)]
pub struct TensorModel {
    hw: HighestWeight,
    factors: Vec<SymFactor>,
    dim: usize,
    weights: Vec<Vec<i64>>,
    /// The tensor realization can be reducible for n >= 3.
    maybe_reducible: bool,
}

fn binom(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..b {
        r = r * (a - i) / (i + 1);
    }
    r
}

fn subsets_of_size(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, j, cur, out);
            cur.pop();
        }
    }
    rec(0, n, j, &mut cur, &mut out);
    out
}

/// Weakly increasing tuples of length d over 0..m (monomial basis of Sym^d).
fn monomials(m: usize, d: i64) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, left: i64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i, m, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(0, m, d, &mut cur, &mut out);
    out
}

/// Dimension of the tensor model without building it.
pub fn model_dimension(k: &[i64]) -> Result<usize> {
    let hw = HighestWeight::new(k.to_vec())?;
    let n = hw.n();
    let mut dim = 1usize;
    for j in 1..n {
        let d = hw.k()[j - 1] - hw.k()[j];
        let space = binom(n, j);
        dim = dim.saturating_mul(binom(d as usize + space - 1, space - 1));
    }
    Ok(dim)
}

pub const DEFAULT_DIM_CAP: usize = 10_000;

pub fn build_model(hw: HighestWeight) -> Result<TensorModel> {
    build_model_capped(hw, DEFAULT_DIM_CAP)
}

pub fn build_model_capped(hw: HighestWeight, cap: usize) -> Result<TensorModel> {
    let n = hw.n();
    let dim = model_dimension(hw.k())?;
    if dim > cap {
        return Err(Error::CapExceeded(format!(
            "model dimension {dim} exceeds cap {cap}"
        )));
    }
    let mut factors = Vec::new();
    for j in 1..n {
        let d = hw.k()[j - 1] - hw.k()[j];
        let subsets = subsets_of_size(n, j);
        let monos = monomials(subsets.len(), d);
        factors.push(SymFactor {
            d,
            subsets,
            monomials: monos,
        });
    }

    // Basis = cartesian product of factor monomials; weight of a basis
    // vector is the sum of subset indicator vectors plus k_n on every
    // coordinate from the determinant twist.
    let kn = hw.k_min();
    let mut weights = Vec::with_capacity(dim);
    let mut idx = vec![0usize; factors.len()];
    loop {
        let mut w = vec![kn; n];
        for (f, &mi) in factors.iter().zip(&idx) {
            for &si in &f.monomials[mi] {
                for &coord in &f.subsets[si] {
                    w[coord] += 1;
                }
            }
        }
        weights.push(w);
        // odometer over factor monomials, last factor fastest
        let mut pos = factors.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < factors[pos].monomials.len() {
                break;
            }
            idx[pos] = 0;
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if factors.is_empty() || pos == usize::MAX {
            break;
        }
    }
    assert_eq!(weights.len(), dim);

    // Lemma 2.5 bound: every weight coordinate is at least k_n.
    for w in &weights {
        assert!(w.iter().all(|&x| x >= kn));
    }

    Ok(TensorModel {
        maybe_reducible: n >= 3 && factors.iter().any(|f| f.d > 0),
        hw,
        factors,
        dim,
        weights,
    })
}

impl TensorModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hw(&self) -> &HighestWeight {
        &self.hw
    }

    pub fn maybe_reducible(&self) -> bool {
        self.maybe_reducible
    }

    /// Weight of each basis vector, in basis order.
    pub fn basis_weights(&self) -> &[Vec<i64>] {
        &self.weights
    }

    /// Distinct weights with multiplicities, lex-sorted.
    pub fn weight_list(&self) -> Vec<(Vec<i64>, usize)> {
        let mut sorted = self.weights.clone();
        sorted.sort();
        let mut out: Vec<(Vec<i64>, usize)> = Vec::new();
        for w in sorted {
            match out.last_mut() {
                Some((prev, m)) if *prev == w => *m += 1,
                _ => out.push((w, 1)),
            }
        }
        out
    }

    /// Matrix of the action of `g` on one Sym^d(Lambda^j) factor.
    fn factor_matrix(&self, f: &SymFactor, g: &RatMat) -> RatMat {
        let m = f.subsets.len();
        // Exterior action: entry (row J, col I) = det of the (J, I) minor.
        let mut ext = RatMat::zero(m, m);
        for (a, jj) in f.subsets.iter().enumerate() {
            for (b, ii) in f.subsets.iter().enumerate() {
                ext.set(a, b, minor_det(g, jj, ii));
            }
        }
        if f.d == 0 {
            return RatMat::identity(1);
        }
        // Symmetric power: expand the image of each monomial.
        let k = f.monomials.len();
        let mut out = RatMat::zero(k, k);
        for (col, mono) in f.monomials.iter().enumerate() {
            // product over the d letters of (column `si` of ext)
            let mut acc: std::collections::BTreeMap<Vec<usize>, Rat> =
                std::collections::BTreeMap::new();
            acc.insert(Vec::new(), rat_int(1));
            for &si in mono {
                let mut next: std::collections::BTreeMap<Vec<usize>, Rat> =
                    std::collections::BTreeMap::new();
                for (partial, coeff) in &acc {
                    for a in 0..m {
                        let e = ext.at(a, si);
                        if Ring::is_zero(e) {
                            continue;
                        }
                        let mut key = partial.clone();
                        key.push(a);
                        key.sort_unstable();
                        let c = coeff * e;
                        *next.entry(key).or_insert_with(|| rat_int(0)) += c;
                    }
                }
                acc = next;
            }
            for (key, coeff) in acc {
                let row = f
                    .monomials
                    .binary_search(&key)
                    .expect("monomial basis is lex-sorted");
                out.set(row, col, coeff);
            }
        }
        out
    }

    /// Apply rho(g) to a coefficient vector, exactly.
    pub fn rho_apply(&self, g: &RatMat, v: &[Rat]) -> Result<Vec<Rat>> {
        let n = self.hw.n();
        if g.rows() != n || g.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "rho expects {n}x{n}, got {}x{}",
                g.rows(),
                g.cols()
            )));
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs model dimension {}",
                v.len(),
                self.dim
            )));
        }
        let det = rat_det(g);
        if Ring::is_zero(&det) {
            return Err(Error::SingularMatrix);
        }
        let mut out = v.to_vec();
        // Contract each tensor axis with its factor matrix in turn.
        let sizes: Vec<usize> = self.factors.iter().map(|f| f.monomials.len()).collect();
        for (axis, f) in self.factors.iter().enumerate() {
            let mat = self.factor_matrix(f, g);
            out = apply_along_axis(&out, &sizes, axis, &mat);
        }
        // det^{k_n} twist.
        let mut twist = rat_int(1);
        let kn = self.hw.k_min();
        for _ in 0..kn.unsigned_abs() {
            twist = &twist * &det;
        }
        if kn < 0 {
            twist = twist.recip();
        }
        for x in out.iter_mut() {
            *x = &*x * &twist;
        }
        Ok(out)
    }

    /// Full matrix of rho(g) in the basis order (columns are images of
    /// basis vectors).
    pub fn rho_matrix(&self, g: &RatMat) -> Result<RatMat> {
        let mut cols = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut e = vec![rat_int(0); self.dim];
            e[i] = rat_int(1);
            cols.push(self.rho_apply(g, &e)?);
        }
        let mut out = RatMat::zero(self.dim, self.dim);
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                out.set(i, j, x.clone());
            }
        }
        Ok(out)
    }
}

/// det of the square minor of g with rows `rows`, cols `cols` (size <= 3
/// in practice; generic cofactor expansion).
fn minor_det(g: &RatMat, rows: &[usize], cols: &[usize]) -> Rat {
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    match k {
        0 => rat_int(1),
        1 => g.at(rows[0], cols[0]).clone(),
        _ => {
            let mut acc = rat_int(0);
            for (i, &r) in rows.iter().enumerate() {
                let e = g.at(r, cols[0]);
                if Ring::is_zero(e) {
                    continue;
                }
                let sub_rows: Vec<usize> = rows
                    .iter()
                    .enumerate()
                    .filter(|&(a, _)| a != i)
                    .map(|(_, &x)| x)
                    .collect();
                let sub = minor_det(g, &sub_rows, &cols[1..]);
                let term = e * &sub;
                if i % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

fn rat_det(g: &RatMat) -> Rat {
    let n = g.rows();
    let idx: Vec<usize> = (0..n).collect();
    minor_det(g, &idx, &idx)
}

/// Contract axis `axis` of the tensor-shaped vector with `mat`.
fn apply_along_axis(v: &[Rat], sizes: &[usize], axis: usize, mat: &RatMat) -> Vec<Rat> {
    let m = sizes[axis];
    let inner: usize = sizes[axis + 1..].iter().product();
    let outer: usize = sizes[..axis].iter().product();
    let mut out = vec![rat_int(0); v.len()];
    for o in 0..outer {
        for i in 0..inner {
            for row in 0..m {
                let mut acc = rat_int(0);
                for col in 0..m {
                    let e = mat.at(row, col);
                    if !Ring::is_zero(e) {
                        acc += e * &v[(o * m + col) * inner + i];
                    }
                }
                out[(o * m + row) * inner + i] = acc;
            }
        }
    }
    out
}

/// True if all entries of a rational vector are integers with no common
/// denominator, i.e. the vector lies in the integer lattice of the model.
pub fn vector_is_integral(v: &[Rat]) -> bool {
    v.iter().all(|x| x.is_integer())
}

/// rho(g) on integer input for integer g stays integral; used as a
/// lattice sanity check.
pub fn check_integer_action(model: &TensorModel, g: &RatMat, v: &[Rat]) -> Result<bool> {
    let gv = model.rho_apply(g, v)?;
    Ok(vector_is_integral(&gv))
}
