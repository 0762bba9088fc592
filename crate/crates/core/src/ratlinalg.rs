//! Dense exact linear algebra over `Rational`: Bareiss determinants,
//! adjugates and inverses, Frobenius norms, invertible-basis enumeration,
//! and the vector norms used for penalties.

use std::fmt;
use std::ops::{Index, IndexMut};

use itertools::Itertools;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{int, sqrt_upper, Int, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|r| r.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "] ({}x{})", self.rows, self.cols)
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds from row vectors; every row must have `cols` entries.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::arg(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(RatMatrix { rows: r, cols, data })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged matrix literal");
                r.iter().map(|&x| int(x))
            })
            .collect();
        RatMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn diag(d: &[Rational]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::arg(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ y`
    pub fn tmul_vec(&self, y: &[Rational]) -> Vec<Rational> {
        assert_eq!(y.len(), self.rows, "dimension mismatch in tmul_vec");
        let mut out = vec![Rational::zero(); self.cols];
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += a * yi;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> RatMatrix {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> RatMatrix {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    pub fn select_rows(&self, rows: &[usize]) -> RatMatrix {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &cols)
    }

    /// Side-by-side concatenation; all blocks share a row count.
    pub fn hstack(blocks: &[&RatMatrix]) -> Result<RatMatrix> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::arg("hstack blocks disagree on row count"));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, off + j)] = b[(i, j)].clone();
                }
            }
            off += b.cols;
        }
        Ok(out)
    }

    /// Vertical concatenation; all blocks share a column count.
    pub fn vstack(blocks: &[&RatMatrix]) -> Result<RatMatrix> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::arg("vstack blocks disagree on column count"));
        }
        let mut data = Vec::new();
        for b in blocks {
            data.extend(b.data.iter().cloned());
        }
        Ok(RatMatrix {
            rows: blocks.iter().map(|b| b.rows).sum(),
            cols,
            data,
        })
    }

    pub fn push_row(&mut self, row: Vec<Rational>) {
        if self.rows == 0 && self.data.is_empty() && self.cols != row.len() {
            self.cols = row.len();
        }
        assert_eq!(row.len(), self.cols, "push_row length mismatch");
        self.data.extend(row);
        self.rows += 1;
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn vec_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Rows scaled to integers; returns the integer rows and each row's factor.
fn integer_rows(m: &RatMatrix) -> (Vec<Vec<Int>>, Vec<Int>) {
    let mut rows = Vec::with_capacity(m.rows);
    let mut scales = Vec::with_capacity(m.rows);
    for i in 0..m.rows {
        let l = m
            .row(i)
            .iter()
            .fold(Int::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
        rows.push(
            m.row(i)
                .iter()
                .map(|x| (x * Rational::from_integer(l.clone())).to_integer())
                .collect(),
        );
        scales.push(l);
    }
    (rows, scales)
}

fn exact_div(a: Int, b: &Int) -> Int {
    let (q, r) = num_integer::Integer::div_rem(&a, b);
    debug_assert!(r.is_zero(), "Bareiss division was not exact");
    q
}

/// One-step Bareiss elimination on the first `n` columns of `m`, applied to
/// all its columns. Returns the sign from row swaps, or `None` if singular.
fn bareiss_forward(m: &mut [Vec<Int>], n: usize) -> Option<i32> {
    let width = m.first().map_or(0, |r| r.len());
    let mut sign = 1;
    let mut prev = Int::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let p = (k + 1..n).find(|&p| !m[p][k].is_zero())?;
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..width {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = exact_div(v, &prev);
            }
            m[i][k] = Int::zero();
        }
        prev = m[k][k].clone();
    }
    Some(sign)
}

/// Determinant by fraction-free elimination.
pub fn det(m: &RatMatrix) -> Result<Rational> {
    if !m.is_square() {
        return Err(Error::arg(format!("det of non-square {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Rational::one());
    }
    let (mut rows, scales) = integer_rows(m);
    let Some(sign) = bareiss_forward(&mut rows, n) else {
        return Ok(Rational::zero());
    };
    let denom = scales.iter().fold(Int::one(), |acc, s| acc * s);
    Ok(Rational::new(&rows[n - 1][n - 1] * Int::from(sign), denom))
}

/// Exact inverse: Bareiss on `[A | I]`, then rational back substitution.
pub fn inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::arg(format!("inverse of non-square {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    let (int_rows, scales) = integer_rows(m);
    let mut aug: Vec<Vec<Int>> = int_rows
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..n).map(|j| if i == j { Int::one() } else { Int::zero() }));
            row
        })
        .collect();
    if bareiss_forward(&mut aug, n).is_none() || (n > 0 && aug[n - 1][n - 1].is_zero()) {
        return Err(Error::SingularMatrix { det: "0".into() });
    }
    // The integer matrix is D·A with D = diag(scales), so A⁻¹ = (D·A)⁻¹·D.
    let mut x = RatMatrix::zeros(n, n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = Rational::from_integer(aug[i][n + col].clone());
            for j in i + 1..n {
                if !aug[i][j].is_zero() {
                    acc -= Rational::from_integer(aug[i][j].clone()) * &x[(j, col)];
                }
            }
            x[(i, col)] = acc / Rational::from_integer(aug[i][i].clone());
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !x[(i, j)].is_zero() {
                x[(i, j)] *= Rational::from_integer(scales[j].clone());
            }
        }
    }
    Ok(x)
}

/// Transposed matrix of signed cofactors, defined for singular inputs too.
pub fn adjugate(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::arg(format!("adjugate of non-square {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(RatMatrix::zeros(0, 0));
    }
    if n == 1 {
        return Ok(RatMatrix::identity(1));
    }
    let d = det(m)?;
    if !d.is_zero() {
        return Ok(inverse(m)?.scale(&d));
    }
    let mut adj = RatMatrix::zeros(n, n);
    let idx: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..n {
            let rows: Vec<usize> = idx.iter().copied().filter(|&r| r != i).collect();
            let cols: Vec<usize> = idx.iter().copied().filter(|&c| c != j).collect();
            let minor = det(&m.select(&rows, &cols))?;
            adj[(j, i)] = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    Ok(adj)
}

pub fn frob_sq(m: &RatMatrix) -> Rational {
    m.data.iter().fold(Rational::zero(), |acc, x| acc + x * x)
}

pub fn frob_upper(m: &RatMatrix, slack: &Rational) -> Rational {
    sqrt_upper(&frob_sq(m), slack).expect("squares are nonnegative")
}

/// Row echelon reduction; returns (reduced matrix, pivot columns).
fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..a.cols {
                let tmp = a[(p, j)].clone();
                a[(p, j)] = a[(r, j)].clone();
                a[(r, j)] = tmp;
            }
        }
        let piv = a[(r, c)].clone();
        for j in c..a.cols {
            let v = &a[(r, j)] / &piv;
            a[(r, j)] = v;
        }
        for i in 0..a.rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..a.cols {
                if !a[(r, j)].is_zero() {
                    let v = &a[(i, j)] - &f * &a[(r, j)];
                    a[(i, j)] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &RatMatrix) -> usize {
    rref(m).1.len()
}

/// A basis of `{x : Mx = 0}` as the columns of an `n × d` matrix.
pub fn null_space(m: &RatMatrix) -> RatMatrix {
    let (red, pivots) = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut z = RatMatrix::zeros(m.cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        z[(f, k)] = Rational::one();
        for (r, &c) in pivots.iter().enumerate() {
            z[(c, k)] = -&red[(r, f)];
        }
    }
    z
}

/// A particular solution of `A x = b` (free variables set to zero), or
/// `None` when the system is inconsistent.
pub fn solve_particular(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(a.rows, b.len(), "solve_particular dimension mismatch");
    let bcol = RatMatrix {
        rows: b.len(),
        cols: 1,
        data: b.to_vec(),
    };
    let aug = RatMatrix::hstack(&[a, &bcol]).ok()?;
    let (red, pivots) = rref(&aug);
    if pivots.last() == Some(&a.cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); a.cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = red[(r, a.cols)].clone();
    }
    Some(x)
}

/// One invertible square submatrix, identified by its row and column sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Basis {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    #[serde(with = "crate::exactnum::serde_rat")]
    pub det: Rational,
    #[serde(with = "crate::exactnum::serde_rat")]
    pub inv_frob_sq: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BasisSet {
    pub bases: Vec<Basis>,
}

impl BasisSet {
    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn max_inv_frob_sq(&self) -> Option<Rational> {
        self.bases.iter().map(|b| b.inv_frob_sq.clone()).max()
    }

    /// lcm of |det| over the set, for determinants that are integers.
    pub fn det_lcm(&self) -> Result<Int> {
        let mut acc = Int::one();
        for b in &self.bases {
            if !b.det.is_integer() {
                return Err(Error::arg(format!("basis determinant {} is not integral", b.det)));
            }
            acc = num_integer::Integer::lcm(&acc, &b.det.to_integer().abs());
        }
        Ok(acc)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn collect_bases(m: &RatMatrix, sizes: &[usize], cap: u64) -> Result<BasisSet> {
    let count = sizes.iter().fold(0u128, |acc, &k| {
        acc.saturating_add(binomial(m.rows, k).saturating_mul(binomial(m.cols, k)))
    });
    if count > cap as u128 {
        return Err(Error::limit("basis enumeration", count, cap));
    }
    let mut candidates = Vec::new();
    for &k in sizes {
        for rows in (0..m.rows).combinations(k) {
            for cols in (0..m.cols).combinations(k) {
                candidates.push((rows.clone(), cols));
            }
        }
    }
    let bases = candidates
        .into_par_iter()
        .filter_map(|(rows, cols)| {
            let sub = m.select(&rows, &cols);
            let d = det(&sub).ok()?;
            if d.is_zero() {
                return None;
            }
            let inv = inverse(&sub).ok()?;
            Some(Basis {
                rows,
                cols,
                det: d,
                inv_frob_sq: frob_sq(&inv),
            })
        })
        .collect();
    Ok(BasisSet { bases })
}

/// All invertible square submatrices of size `rank(M)`. With full row rank
/// these are exactly the column bases; otherwise row subsets are chosen too.
pub fn enumerate_bases(m: &RatMatrix, cap: u64) -> Result<BasisSet> {
    let r = rank(m);
    if r == 0 {
        return Ok(BasisSet::default());
    }
    collect_bases(m, &[r], cap)
}

/// Invertible square submatrices of every size up to `rank(M)`.
pub fn enumerate_invertible_submatrices(m: &RatMatrix, cap: u64) -> Result<BasisSet> {
    let r = rank(m);
    let sizes: Vec<usize> = (1..=r).collect();
    collect_bases(m, &sizes, cap)
}

/// Upper bound on the largest `‖B⁻¹‖_F` over the bases of `m`.
pub fn beta(m: &RatMatrix, slack: &Rational, cap: u64) -> Result<Rational> {
    let set = enumerate_bases(m, cap)?;
    beta_of(&set, slack)
}

pub fn beta_of(set: &BasisSet, slack: &Rational) -> Result<Rational> {
    let max = set
        .max_inv_frob_sq()
        .ok_or_else(|| Error::DegenerateMatrix("no invertible basis".into()))?;
    sqrt_upper(&max, slack)
}

/// Penalty norms on residual vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }

    pub fn parse(s: &str) -> Result<Norm> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "l-inf" | "inf" => Ok(Norm::Linf),
            other => Err(Error::arg(format!("unknown norm {other:?}"))),
        }
    }

    /// Exact value for ℓ1 and ℓ∞; `None` for ℓ2, which is irrational in general.
    pub fn exact(self, v: &[Rational]) -> Option<Rational> {
        match self {
            Norm::L1 => Some(v.iter().fold(Rational::zero(), |a, x| a + x.abs())),
            Norm::Linf => Some(v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)),
            Norm::L2 => {
                let sq = norm_sq(v);
                let s = sqrt_upper(&sq, &int(1)).ok()?;
                (&s * &s == sq).then_some(s)
            }
        }
    }

    /// Rational upper bound, exact unless the norm is ℓ2.
    pub fn upper(self, v: &[Rational], slack: &Rational) -> Rational {
        match self.exact(v) {
            Some(x) => x,
            None => sqrt_upper(&norm_sq(v), slack).expect("squares are nonnegative"),
        }
    }

    pub fn value_f64(self, v: &[Rational]) -> f64 {
        let xs = v.iter().map(crate::exactnum::to_f64);
        match self {
            Norm::L1 => xs.map(f64::abs).sum(),
            Norm::L2 => xs.map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => xs.map(f64::abs).fold(0.0, f64::max),
        }
    }

    /// Exact test of `‖v‖ <= r`.
    pub fn le(self, v: &[Rational], r: &Rational) -> bool {
        match self {
            Norm::L2 => !r.is_negative() && norm_sq(v) <= r * r,
            _ => &self.exact(v).expect("exact norm") <= r,
        }
    }

    /// Upper bound on `sup ‖y‖ / ‖y‖₂` over `R^m`, the factor converting a
    /// Euclidean bound on `y` into a bound in this norm. For a dual pairing
    /// this is also `sup ‖u‖₂ / ‖u‖` for the dual norm.
    pub fn l2_factor(self, m: usize, slack: &Rational) -> Rational {
        match self {
            Norm::L1 => sqrt_upper(&int(m.max(1) as i64), slack).expect("positive"),
            Norm::L2 | Norm::Linf => Rational::one(),
        }
    }
}

pub fn norm_sq(v: &[Rational]) -> Rational {
    v.iter().fold(Rational::zero(), |a, x| a + x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use proptest::prelude::*;

    fn cofactor_det(m: &RatMatrix) -> Rational {
        match m.rows() {
            0 => int(1),
            1 => m[(0, 0)].clone(),
            n => (0..n)
                .map(|j| {
                    let rows: Vec<usize> = (1..n).collect();
                    let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                    let term = &m[(0, j)] * cofactor_det(&m.select(&rows, &cols));
                    if j % 2 == 0 {
                        term
                    } else {
                        -term
                    }
                })
                .fold(int(0), |a, b| a + b),
        }
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&RatMatrix::from_i64(&[&[1, 2], &[3, 4]])).unwrap(), int(-2));
        assert_eq!(det(&RatMatrix::identity(3)).unwrap(), int(1));
        assert_eq!(det(&RatMatrix::from_i64(&[&[2, 0], &[0, 3]])).unwrap(), int(6));
        assert_eq!(det(&RatMatrix::from_i64(&[&[0, 1], &[1, 0]])).unwrap(), int(-1));
        assert!(det(&RatMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn adjugate_examples() {
        let m = RatMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        assert_eq!(adjugate(&m).unwrap(), RatMatrix::from_i64(&[&[4, -2], &[-3, 1]]));
        assert_eq!(adjugate(&RatMatrix::identity(2)).unwrap(), RatMatrix::identity(2));
        let s = RatMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        let adj = adjugate(&s).unwrap();
        assert_eq!(adj, RatMatrix::from_i64(&[&[4, -2], &[-2, 1]]));
        assert!(s.mul(&adj).unwrap().is_zero());
    }

    #[test]
    fn inverse_examples() {
        let two = RatMatrix::from_rows(vec![vec![int(2)]], 1).unwrap();
        let half = RatMatrix::from_rows(vec![vec![rat(1, 2)]], 1).unwrap();
        assert_eq!(inverse(&two).unwrap(), half);
        assert_eq!(inverse(&RatMatrix::identity(3)).unwrap(), RatMatrix::identity(3));
        let m = RatMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, RatMatrix::from_i64(&[&[1, -1], &[0, 1]]));
        assert_eq!(m.mul(&inv).unwrap(), RatMatrix::identity(2));
        assert!(matches!(
            inverse(&RatMatrix::from_i64(&[&[1, 2], &[2, 4]])),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn frob_examples() {
        assert_eq!(frob_sq(&RatMatrix::identity(2)), int(2));
        assert_eq!(frob_sq(&RatMatrix::from_i64(&[&[1, 2], &[3, 4]])), int(30));
        assert_eq!(frob_sq(&RatMatrix::zeros(2, 2)), int(0));
    }

    #[test]
    fn basis_examples() {
        let set = enumerate_bases(&RatMatrix::from_i64(&[&[1, 1]]), 1000).unwrap();
        assert_eq!(set.bases.iter().map(|b| b.cols.clone()).collect::<Vec<_>>(), vec![vec![0], vec![1]]);
        assert!(set.bases.iter().all(|b| b.det == int(1)));

        let set = enumerate_bases(&RatMatrix::from_i64(&[&[2, 0], &[0, 3]]), 1000).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.bases[0].det, int(6));

        let set = enumerate_bases(&RatMatrix::from_i64(&[&[1, 2, 3]]), 1000).unwrap();
        let dets: Vec<Rational> = set.bases.iter().map(|b| b.det.clone()).collect();
        assert_eq!(dets, vec![int(1), int(2), int(3)]);

        let err = enumerate_bases(&RatMatrix::from_i64(&[&[1, 2, 3]]), 2).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }

    #[test]
    fn rank_deficient_bases_select_rows() {
        let m = RatMatrix::from_i64(&[&[1, 2], &[2, 4]]);
        let set = enumerate_bases(&m, 100).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.bases.iter().all(|b| b.rows.len() == 1));
        assert!(enumerate_bases(&RatMatrix::zeros(2, 2), 100).unwrap().is_empty());
    }

    #[test]
    fn beta_examples() {
        let slack = rat(1, 1000);
        let b = beta(&RatMatrix::from_i64(&[&[1]]), &slack, 10).unwrap();
        assert!(b >= int(1) && b <= rat(1001, 1000));
        let b = beta(&RatMatrix::from_i64(&[&[2]]), &slack, 10).unwrap();
        assert!(b >= rat(1, 2) && b <= rat(1001, 2000));
        // [1 2; 0 1]: bases {0,1} only; inverse [1 -2; 0 1] has frob_sq 6
        let m = RatMatrix::from_i64(&[&[1, 2, 0], &[0, 1, 1]]);
        let set = enumerate_bases(&m, 100).unwrap();
        let direct = set
            .bases
            .iter()
            .map(|b| frob_sq(&inverse(&m.select(&b.rows, &b.cols)).unwrap()))
            .max()
            .unwrap();
        let b = beta(&m, &slack, 100).unwrap();
        assert!(&b * &b >= direct);
        assert!(matches!(
            beta(&RatMatrix::zeros(1, 2), &slack, 10),
            Err(Error::DegenerateMatrix(_))
        ));
    }

    #[test]
    fn solve_particular_cases() {
        let a = RatMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        assert!(solve_particular(&a, &[int(1), int(2)]).is_none());
        let x = solve_particular(&a, &[int(3), int(3)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![int(3), int(3)]);
    }

    #[test]
    fn norms_and_duals() {
        let v = vec![int(3), int(-4)];
        assert_eq!(Norm::L1.exact(&v), Some(int(7)));
        assert_eq!(Norm::Linf.exact(&v), Some(int(4)));
        assert_eq!(Norm::L2.exact(&v), Some(int(5)));
        assert_eq!(Norm::L2.exact(&[int(1), int(1)]), None);
        assert!(Norm::L2.le(&[int(1), int(1)], &rat(142, 100)));
        assert!(!Norm::L2.le(&[int(1), int(1)], &rat(141, 100)));
        assert_eq!(Norm::L1.dual(), Norm::Linf);
        assert_eq!(Norm::L2.dual(), Norm::L2);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec((-6i64..7, 1i64..4), n * n).prop_map(move |v| {
            let rows = v.chunks(n).map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect();
            RatMatrix::from_rows(rows, n).unwrap()
        })
    }

    proptest! {
        #[test]
        fn adjugate_identity(m in (1usize..5).prop_flat_map(arb_matrix)) {
            let n = m.rows();
            let d = det(&m).unwrap();
            let prod = m.mul(&adjugate(&m).unwrap()).unwrap();
            prop_assert_eq!(prod, RatMatrix::identity(n).scale(&d));
        }

        #[test]
        fn inverse_identity(m in (1usize..5).prop_flat_map(arb_matrix)) {
            if let Ok(inv) = inverse(&m) {
                prop_assert_eq!(inv.mul(&m).unwrap(), RatMatrix::identity(m.rows()));
            } else {
                prop_assert_eq!(det(&m).unwrap(), int(0));
            }
        }

        #[test]
        fn bareiss_matches_cofactors(m in (1usize..4).prop_flat_map(arb_matrix)) {
            prop_assert_eq!(det(&m).unwrap(), cofactor_det(&m));
        }

        #[test]
        fn repeated_row_has_zero_det(m in (2usize..5).prop_flat_map(arb_matrix)) {
            let mut rows = m.to_rows();
            rows[1] = rows[0].clone();
            let r = RatMatrix::from_rows(rows, m.cols()).unwrap();
            prop_assert_eq!(det(&r).unwrap(), int(0));
        }

        #[test]
        fn beta_dominates_each_basis(v in proptest::collection::vec(-3i64..4, 8)) {
            let m = RatMatrix::from_i64(&[&v[..4], &v[4..]]);
            let set = enumerate_bases(&m, 1000).unwrap();
            if !set.is_empty() {
                let b = beta_of(&set, &rat(1, 100)).unwrap();
                for basis in &set.bases {
                    let inv = inverse(&m.select(&basis.rows, &basis.cols)).unwrap();
                    prop_assert!(&b * &b >= frob_sq(&inv));
                }
            }
        }
    }
}
