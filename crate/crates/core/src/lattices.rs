//! Every lattice on which a polytope with integral vertex pairing matrix is
//! reflexive, each realized in explicit coordinates.
//!
//! With `X = W · D · U` from [`decompose_vpm`](crate::intlin::decompose_vpm),
//! intermediate lattices correspond to factorizations `D = T · S` with `T`
//! and `S` upper triangular, positive diagonals and `T` column-reduced
//! (`0 <= T_ji < T_jj` for `j < i`). The polytope then has vertices given by
//! the columns of `S · U` and its dual by the rows of `W · T`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::intlin::{decompose_vpm, IntMatrix};
use crate::polytope::{dual, hull, is_reflexive, vpm, IntVector, Polytope, PolytopeError};

#[derive(Clone, Debug)]
pub struct LatticeRealization {
    /// Upper triangular; columns generate the lattice inside the finest one.
    pub t: Vec<IntVector>,
    pub s: Vec<IntVector>,
    /// `det T`, the index of the lattice in the finest one.
    pub index: i64,
    /// Vertices of the polytope in lattice coordinates.
    pub vertices: Vec<IntVector>,
    /// Vertices of the dual, in dual lattice coordinates.
    pub dual_vertices: Vec<IntVector>,
}

impl LatticeRealization {
    pub fn polytope(&self) -> Polytope {
        hull(&self.vertices).expect("realization is full-dimensional")
    }

    pub fn dual_polytope(&self) -> Polytope {
        hull(&self.dual_vertices).expect("realization is full-dimensional")
    }
}

/// Diagonal of `D` for `p`'s vertex pairing matrix; the product is the
/// index of the coarsest lattice in the finest one.
pub fn vpm_invariants(p: &Polytope) -> Result<Vec<i64>, PolytopeError> {
    let x = vpm(p)?;
    let dec = decompose_vpm(&x, p.dim()).expect("vertex pairing matrix has full rank");
    Ok((0..p.dim()).map(|i| small(dec.d.get(i, i))).collect())
}

fn small(x: &BigInt) -> i64 {
    x.to_i64().expect("entry fits in 64 bits")
}

fn to_rows(m: &IntMatrix) -> Vec<IntVector> {
    m.to_i64_rows().expect("entries fit in 64 bits")
}

/// All realizations, in order of the recursion: columns of `T` left to
/// right, diagonal entries ascending, off-diagonal entries ascending.
pub fn enumerate_lattices(p: &Polytope) -> Result<Vec<LatticeRealization>, PolytopeError> {
    let x = vpm(p)?;
    let n = p.dim();
    let dec = decompose_vpm(&x, n).expect("vertex pairing matrix has full rank");
    let d: Vec<i64> = (0..n).map(|i| small(dec.d.get(i, i))).collect();
    let w = to_rows(&dec.w);
    let u = to_rows(&dec.u);
    let mut out = Vec::new();
    for (t, s) in factorizations(&d) {
        let su = mat_mul(&s, &u);
        let wt = mat_mul(&w, &t);
        let vertices = transpose(&su);
        let index = (0..n).map(|i| t[i][i]).product();
        out.push(LatticeRealization { t, s, index, vertices, dual_vertices: wt });
    }
    Ok(out)
}

/// Pairs `(T, S)` of upper triangular matrices with `T · S = diag(d)`.
pub fn factorizations(d: &[i64]) -> Vec<(Vec<IntVector>, Vec<IntVector>)> {
    let n = d.len();
    let mut out = Vec::new();
    let mut t = vec![vec![0i64; n]; n];
    let mut s = vec![vec![0i64; n]; n];
    column(d, 0, &mut t, &mut s, &mut out);
    out
}

fn column(d: &[i64], i: usize, t: &mut Vec<IntVector>, s: &mut Vec<IntVector>, out: &mut Vec<(Vec<IntVector>, Vec<IntVector>)>) {
    let n = d.len();
    if i == n {
        out.push((t.clone(), s.clone()));
        return;
    }
    for tii in 1..=d[i] {
        if d[i] % tii != 0 {
            continue;
        }
        t[i][i] = tii;
        s[i][i] = d[i] / tii;
        off_diagonal(d, i, i, t, s, out);
    }
    t[i][i] = 0;
    s[i][i] = 0;
}

/// Fill `T_ji` and `S_ji` for rows `j < row` of column `i`, bottom up.
fn off_diagonal(
    d: &[i64],
    i: usize,
    row: usize,
    t: &mut Vec<IntVector>,
    s: &mut Vec<IntVector>,
    out: &mut Vec<(Vec<IntVector>, Vec<IntVector>)>,
) {
    if row == 0 {
        column(d, i + 1, t, s, out);
        return;
    }
    let j = row - 1;
    // (T S)_ji = T_jj S_ji + T_ji S_ii + Σ_{j<k<i} T_jk S_ki must vanish.
    let rest: i64 = (j + 1..i).map(|k| t[j][k] * s[k][i]).sum();
    for tji in 0..t[j][j] {
        let num = tji * s[i][i] + rest;
        if num % t[j][j] != 0 {
            continue;
        }
        t[j][i] = tji;
        s[j][i] = -num / t[j][j];
        off_diagonal(d, i, j, t, s, out);
    }
    t[j][i] = 0;
    s[j][i] = 0;
}

fn mat_mul(a: &[IntVector], b: &[IntVector]) -> Vec<IntVector> {
    let m = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..m).map(|c| row.iter().zip(b).map(|(x, br)| x * br[c]).sum()).collect())
        .collect()
}

fn transpose(a: &[IntVector]) -> Vec<IntVector> {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|c| a.iter().map(|r| r[c]).collect()).collect()
}

/// Defensive check that a realization is a reflexive pair in its own
/// coordinates.
pub fn reflexive_on_lattice(real: &LatticeRealization) -> bool {
    let (Ok(p), Ok(q)) = (hull(&real.vertices), hull(&real.dual_vertices)) else {
        return false;
    };
    is_reflexive(&p) && dual(&p).is_ok_and(|d| d == q)
}
