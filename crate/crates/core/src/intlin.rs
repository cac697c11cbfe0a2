//! Exact integer linear algebra over unbounded integers.
//!
//! Row Hermite normal forms, Smith decompositions with explicit unimodular
//! transforms, and saturated integer kernels. Everything here works on
//! [`BigInt`] entries; callers with machine-width data convert at the edges.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntlinError {
    #[error("matrix has rank {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from machine-width rows. `cols` is needed when there are no rows.
    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged matrix row {i}");
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = BigInt::from(x);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend(r);
        }
        IntMatrix { rows: n, cols, data }
    }

    pub fn diag(entries: &[i64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * n + i] = BigInt::from(x);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Submatrix of the given row and column ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> IntMatrix {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (oi, i) in rows.clone().enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out.data[oi * cols.len() + oj] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect::<Option<Vec<_>>>())
            .collect()
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(|x| x.is_zero())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = v;
        }
    }

    /// Determinant of a square matrix (fraction-free Bareiss elimination).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m.get(r, k).is_zero()) else {
                    return BigInt::zero();
                };
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.get(k, k).clone();
        }
        sign * m.get(n - 1, n - 1).clone()
    }

    pub fn rank(&self) -> usize {
        let (h, _) = hnf(self);
        (0..h.rows).filter(|&i| !h.is_zero_row(i)).count()
    }
}

/// Smallest nonzero |entry| in the given positions, ties broken by position order.
fn min_abs_position<I: Iterator<Item = (usize, usize)>>(m: &IntMatrix, positions: I) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for (i, j) in positions {
        let v = m.get(i, j);
        if v.is_zero() {
            continue;
        }
        let a = v.abs();
        match &best {
            Some((_, b)) if *b <= a => {}
            _ => best = Some(((i, j), a)),
        }
    }
    best.map(|(p, _)| p)
}

/// Row Hermite normal form. Returns `(H, Umod)` with `H = Umod * A`, `Umod`
/// unimodular, nonzero rows of `H` first with strictly increasing pivot
/// columns, positive pivots and entries above each pivot in `[0, pivot)`.
pub fn hnf(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let m = a.rows;
    let mut h = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut p = 0;
    for col in 0..a.cols {
        if p == m {
            break;
        }
        let mut found = false;
        loop {
            let Some((best, _)) = min_abs_position(&h, (p..m).map(|r| (r, col))) else {
                break;
            };
            found = true;
            h.swap_rows(p, best);
            u.swap_rows(p, best);
            let mut clean = true;
            for r in p + 1..m {
                if h.get(r, col).is_zero() {
                    continue;
                }
                let q = h.get(r, col).div_floor(h.get(p, col));
                let nq = -q;
                h.add_row(r, p, &nq);
                u.add_row(r, p, &nq);
                if !h.get(r, col).is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if !found {
            continue;
        }
        if h.get(p, col).is_negative() {
            h.negate_row(p);
            u.negate_row(p);
        }
        for r in 0..p {
            let q = h.get(r, col).div_floor(h.get(p, col));
            if !q.is_zero() {
                let nq = -q;
                h.add_row(r, p, &nq);
                u.add_row(r, p, &nq);
            }
        }
        p += 1;
    }
    (h, u)
}

/// Smith normal form with both transforms and their inverses:
/// `p * a * q = d`, `a = p_inv * d * q_inv`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub p: IntMatrix,
    pub p_inv: IntMatrix,
    pub q: IntMatrix,
    pub q_inv: IntMatrix,
    pub d: IntMatrix,
    /// Nonzero diagonal entries, each dividing the next.
    pub invariants: Vec<BigInt>,
}

pub fn smith(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut p = IntMatrix::identity(m);
    let mut p_inv = IntMatrix::identity(m);
    let mut q = IntMatrix::identity(n);
    let mut q_inv = IntMatrix::identity(n);
    let mut t = 0;
    while t < m.min(n) {
        let positions = (t..m).flat_map(|i| (t..n).map(move |j| (i, j)));
        let Some((pi, pj)) = min_abs_position(&d, positions) else {
            break;
        };
        d.swap_rows(t, pi);
        p.swap_rows(t, pi);
        p_inv.swap_cols(t, pi);
        d.swap_cols(t, pj);
        q.swap_cols(t, pj);
        q_inv.swap_rows(t, pj);
        let mut dirty = false;
        for r in t + 1..m {
            if d.get(r, t).is_zero() {
                continue;
            }
            let k = d.get(r, t).div_floor(d.get(t, t));
            // row r -= k row t ; inverse: col t of p_inv += k col r
            let nk = -k.clone();
            d.add_row(r, t, &nk);
            p.add_row(r, t, &nk);
            p_inv.add_col(t, r, &k);
            if !d.get(r, t).is_zero() {
                dirty = true;
            }
        }
        for c in t + 1..n {
            if d.get(t, c).is_zero() {
                continue;
            }
            let k = d.get(t, c).div_floor(d.get(t, t));
            // col c -= k col t ; inverse: row t of q_inv += k row c
            let nk = -k.clone();
            d.add_col(c, t, &nk);
            q.add_col(c, t, &nk);
            q_inv.add_row(t, c, &k);
            if !d.get(t, c).is_zero() {
                dirty = true;
            }
        }
        if dirty {
            continue;
        }
        // Divisibility: pull in a row holding an entry the pivot does not divide.
        let piv = d.get(t, t).clone();
        let bad = (t + 1..m).find(|&r| (t + 1..n).any(|c| !d.get(r, c).is_multiple_of(&piv)));
        if let Some(r) = bad {
            let one = BigInt::one();
            d.add_row(t, r, &one);
            p.add_row(t, r, &one);
            p_inv.add_col(r, t, &(-one));
            continue;
        }
        if piv.is_negative() {
            d.negate_row(t);
            p.negate_row(t);
            p_inv.negate_col(t);
        }
        t += 1;
    }
    let invariants = (0..m.min(n)).map(|i| d.get(i, i).clone()).filter(|x| !x.is_zero()).collect();
    SmithForm { p, p_inv, q, q_inv, d, invariants }
}

/// The decomposition `X = fullW * D~ * fullU` with the first `n` columns of
/// `fullW` forming `W`, the first `n` rows of `fullU` forming `U`.
#[derive(Clone, Debug)]
pub struct VpmDecomposition {
    pub w: IntMatrix,
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub full_w: IntMatrix,
    pub full_u: IntMatrix,
}

impl VpmDecomposition {
    pub fn det_d(&self) -> BigInt {
        self.d.det()
    }

    /// `D~`: `D` padded with zeros to the shape of `X`.
    pub fn d_padded(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.full_w.rows(), self.full_u.rows());
        for i in 0..self.d.rows() {
            out.set(i, i, self.d.get(i, i).clone());
        }
        out
    }
}

pub fn decompose_vpm(x: &IntMatrix, rank_n: usize) -> Result<VpmDecomposition, IntlinError> {
    let s = smith(x);
    let found = s.invariants.len();
    if found != rank_n {
        return Err(IntlinError::RankMismatch { expected: rank_n, found });
    }
    let n = rank_n;
    let mut d = IntMatrix::zeros(n, n);
    for (i, v) in s.invariants.iter().enumerate() {
        d.set(i, i, v.clone());
    }
    Ok(VpmDecomposition {
        w: s.p_inv.block(0..x.rows(), 0..n),
        d,
        u: s.q_inv.block(0..n, 0..x.cols()),
        full_w: s.p_inv,
        full_u: s.q_inv,
    })
}

/// Saturated basis of the left kernel `{w : w * A = 0}`, in Hermite normal form.
/// Has zero rows when the kernel is trivial.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let (h, u) = hnf(a);
    let r = (0..h.rows()).filter(|&i| !h.is_zero_row(i)).count();
    if r == a.rows() {
        return IntMatrix::zeros(0, a.rows());
    }
    let k = u.block(r..a.rows(), 0..a.rows());
    let (kh, _) = hnf(&k);
    kh
}

/// An integer `C` with `B * C = I`, if the rows of `B` span a saturated
/// sublattice of full rank.
pub fn right_inverse(b: &IntMatrix) -> Option<IntMatrix> {
    let s = smith(b);
    let n = b.rows();
    if s.invariants.len() != n || s.invariants.iter().any(|x| !x.is_one()) {
        return None;
    }
    Some(s.q.block(0..b.cols(), 0..n).mul(&s.p))
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}
