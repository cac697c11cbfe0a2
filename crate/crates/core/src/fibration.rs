//! Toric fibrations: reflexive sections of Δ*, their base projections,
//! fibrations encoded by sub-CWS and projections of Δ onto facets that come
//! from weights with a unique partition.
//!
//! A fibration is a sublattice `N_fib ⊂ N` such that `Δ* ∩ N_fib` is
//! reflexive. Dually, the image of Δ in `M_fib = M / N_fib^⊥` is the polar of
//! that section, which is how reflexivity is tested here: project the
//! vertices of Δ and check the facets of the image.

use std::collections::HashMap;

use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::intlin::{self, IntMatrix};
use crate::polytope::{dot, gcd_of, dual, hull, is_reflexive, span_coordinates, IntVector, Polytope, PolytopeError};
use crate::weights::{delta_of_q, nabla_vertices, Cws, WeightSystem, WeightsError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FibrationError {
    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// A reflexive section `Δ*_fib = Δ* ∩ N_fib` with its base projection.
#[derive(Clone, Debug)]
pub struct Fibration {
    pub fiber_dim: usize,
    /// Rows form a basis of `N_fib` in Hermite normal form.
    pub basis: Vec<IntVector>,
    /// `Δ*_fib` in the coordinates of `basis`.
    pub fiber: Polytope,
    pub base: BaseProjection,
}

impl Fibration {
    /// Lattice points of the fiber, mapped back into `N`.
    pub fn fiber_points(&self) -> Vec<IntVector> {
        let n = self.basis.first().map_or(0, |r| r.len());
        let mut out: Vec<IntVector> = self
            .fiber
            .lattice_points()
            .iter()
            .map(|c| (0..n).map(|j| c.iter().zip(&self.basis).map(|(a, b)| a * b[j]).sum()).collect())
            .collect();
        out.sort();
        out
    }
}

/// Image of one nonzero lattice point of Δ* outside the fiber:
/// `π(point) = r · rays[ray]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointImage {
    pub point: IntVector,
    pub ray: usize,
    pub r: i64,
}

/// The quotient map `π: N -> N_bas = N / N_fib`.
#[derive(Clone, Debug)]
pub struct BaseProjection {
    /// Rows span `N_fib^⊥ ⊂ M`; `π(v)_j = <quotient_j, v>`.
    pub quotient: Vec<IntVector>,
    /// Primitive generators in `N_bas`, in order of first appearance.
    pub rays: Vec<IntVector>,
    pub images: Vec<PointImage>,
}

impl BaseProjection {
    pub fn project(&self, v: &[i64]) -> IntVector {
        self.quotient.iter().map(|q| dot(q, v)).collect()
    }

    /// Number of Δ* points mapping onto each ray.
    pub fn preimage_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.rays.len()];
        for im in &self.images {
            c[im.ray] += 1;
        }
        c
    }

    /// Rays over whose divisor the fiber becomes reducible: more than one
    /// point of Δ* maps onto them.
    pub fn reducible(&self) -> Vec<bool> {
        self.preimage_counts().into_iter().map(|c| c > 1).collect()
    }
}

/// Base data for the sublattice spanned by the rows of `basis`. Every
/// nonzero lattice point of `dstar` outside the fiber is recorded.
pub fn base_projection(dstar: &Polytope, basis: &[IntVector]) -> BaseProjection {
    let n = dstar.dim();
    let quotient = if basis.is_empty() {
        IntMatrix::identity(n)
    } else {
        intlin::integer_kernel(&IntMatrix::from_i64_rows(basis, n).transpose())
    };
    let quotient = quotient.to_i64_rows().expect("quotient basis fits");
    let mut proj = BaseProjection { quotient, rays: Vec::new(), images: Vec::new() };
    let mut index: HashMap<IntVector, usize> = HashMap::new();
    for v in dstar.lattice_points() {
        let img = proj.project(v);
        let r = gcd_of(&img);
        if r == 0 {
            continue;
        }
        let ray: IntVector = img.iter().map(|x| x / r).collect();
        let next = index.len();
        let j = *index.entry(ray.clone()).or_insert(next);
        if j == proj.rays.len() {
            proj.rays.push(ray);
        }
        proj.images.push(PointImage { point: v.clone(), ray: j, r });
    }
    proj
}

/// The section of `dstar` by the span of `generators`, if reflexive.
/// `delta` must be the dual of `dstar`.
pub fn section(delta: &Polytope, dstar: &Polytope, generators: &[IntVector]) -> Option<Fibration> {
    let n = dstar.dim();
    let (basis, _) = span_coordinates(generators, n);
    let k = basis.len();
    if k == 0 {
        return None;
    }
    // Image of Δ in M_fib; its polar is the section.
    let image: Vec<IntVector> = delta.vertices().iter().map(|x| basis.iter().map(|b| dot(b, x)).collect()).collect();
    let image = hull(&image).ok()?;
    if !is_reflexive(&image) {
        return None;
    }
    let fiber = dual(&image).ok()?;
    let base = base_projection(dstar, &basis);
    Some(Fibration { fiber_dim: k, basis, fiber, base })
}

/// All reflexive sections of `dstar` of dimension `fiber_dim`, one per
/// subspace. Empty unless `dstar` is
/// reflexive and `1 <= fiber_dim < n`.
pub fn reflexive_sections(dstar: &Polytope, fiber_dim: usize) -> Vec<Fibration> {
    let n = dstar.dim();
    if fiber_dim == 0 || fiber_dim >= n || !is_reflexive(dstar) {
        return Vec::new();
    }
    let Ok(delta) = dual(dstar) else {
        return Vec::new();
    };
    // A vertex of a k-dimensional section lies on a face of dimension at
    // most n - k, so only such points can span a reflexive section.
    let points: Vec<IntVector> = dstar
        .lattice_points()
        .iter()
        .filter(|p| {
            let tight: Vec<IntVector> = dstar.facets().iter().filter(|f| f.eval(p) == 0).map(|f| f.normal.clone()).collect();
            crate::hull::rank_i64(&tight) >= fiber_dim
        })
        .cloned()
        .collect();
    let spans = if fiber_dim == n - 1 { hyperplanes(&points, n) } else { subspaces(&points, fiber_dim) };
    spans
        .par_iter()
        .filter(|members| members.len() > fiber_dim)
        .filter_map(|members| {
            let gens: Vec<IntVector> = members.iter().map(|&i| points[i].clone()).collect();
            section(&delta, dstar, &gens)
        })
        .collect()
}

/// Number of reflexive projections of Δ along a line, i.e. reflexive
/// sections of Δ* of codimension one.
pub fn count_reflexive_projections(delta: &Polytope) -> usize {
    match dual(delta) {
        Ok(dstar) => reflexive_sections(&dstar, delta.dim() - 1).len(),
        Err(_) => 0,
    }
}

/// Fraction-free row echelon form of a few small vectors, for span
/// membership tests.
struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    fn reduce(&self, v: &[i64]) -> Vec<i128> {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (p, r) in &self.rows {
            if v[*p] == 0 {
                continue;
            }
            let (a, b) = (r[*p], v[*p]);
            for (x, y) in v.iter_mut().zip(r) {
                *x = *x * a - b * y;
            }
            let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
            if g > 1 {
                v.iter_mut().for_each(|x| *x /= g);
            }
        }
        v
    }

    fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v`; false if it was already in the span.
    fn push(&mut self, v: &[i64]) -> bool {
        let r = self.reduce(v);
        match r.iter().position(|&x| x != 0) {
            Some(p) => {
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }
}

/// True iff `base` (sorted indices) is the greedy basis of the points of its
/// span: each element is the first point not in the span of its
/// predecessors. `inside` lists every point in the span.
fn greedy_basis(points: &[IntVector], base: &[usize], inside: &[usize]) -> bool {
    let mut prefix = Echelon::new();
    let mut t = 0;
    for &z in inside {
        while t < base.len() && base[t] < z {
            prefix.push(&points[base[t]]);
            t += 1;
        }
        if t < base.len() && base[t] == z {
            continue;
        }
        if !prefix.contains(&points[z]) {
            return false;
        }
    }
    true
}

/// Independent `k`-subsets of `points` in increasing index order.
fn independent_subsets(points: &[IntVector], k: usize) -> Vec<Vec<usize>> {
    fn rec(points: &[IntVector], k: usize, start: usize, cur: &mut Vec<usize>, ech: &Echelon, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..points.len() {
            let mut e = Echelon { rows: ech.rows.clone() };
            if e.push(&points[i]) {
                cur.push(i);
                rec(points, k, i + 1, cur, &e, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(points, k, 0, &mut Vec::new(), &Echelon::new(), &mut out);
    out
}

/// Every `k`-dimensional subspace spanned by `points`, as the sorted indices
/// of the points it contains.
fn subspaces(points: &[IntVector], k: usize) -> Vec<Vec<usize>> {
    independent_subsets(points, k)
        .into_par_iter()
        .filter_map(|base| {
            let mut ech = Echelon::new();
            for &b in &base {
                ech.push(&points[b]);
            }
            let inside: Vec<usize> = (0..points.len()).filter(|&i| ech.contains(&points[i])).collect();
            greedy_basis(points, &base, &inside).then_some(inside)
        })
        .collect()
}

/// Every hyperplane spanned by `points`, as sorted member indices. Each
/// hyperplane is found once, from its greedy codimension-two basis, by
/// grouping the remaining points by the normal they span with it.
fn hyperplanes(points: &[IntVector], n: usize) -> Vec<Vec<usize>> {
    if n < 2 {
        return Vec::new();
    }
    let bases = if n == 2 { vec![Vec::new()] } else { independent_subsets(points, n - 2) };
    bases
        .into_par_iter()
        .flat_map_iter(|base| {
            let mut ech = Echelon::new();
            for &b in &base {
                ech.push(&points[b]);
            }
            let mut inside = Vec::new();
            let mut groups: HashMap<IntVector, Vec<usize>> = HashMap::new();
            let mut rows: Vec<&IntVector> = base.iter().map(|&b| &points[b]).collect();
            for (i, p) in points.iter().enumerate() {
                if ech.contains(p) {
                    inside.push(i);
                    continue;
                }
                rows.push(p);
                let normal = primitive_normal(&rows, n);
                rows.pop();
                groups.entry(normal).or_default().push(i);
            }
            let ok = greedy_basis(points, &base, &inside);
            let last = base.last().copied();
            let mut out = Vec::new();
            if ok {
                for (_, g) in groups {
                    if last.is_some_and(|l| g[0] < l) {
                        continue;
                    }
                    let mut members: Vec<usize> = inside.iter().chain(&g).copied().collect();
                    members.sort_unstable();
                    out.push(members);
                }
            }
            out
        })
        .collect()
}

/// Primitive normal of `n - 1` vectors in `Z^n` with its first nonzero
/// entry positive.
fn primitive_normal(rows: &[&IntVector], n: usize) -> IntVector {
    let mut v: Vec<i128> = (0..n)
        .map(|skip| {
            let m: Vec<Vec<i128>> = rows.iter().map(|r| (0..n).filter(|&c| c != skip).map(|c| r[c] as i128).collect()).collect();
            let d = det_i128(m);
            if skip % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect();
    let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
    if g > 0 {
        v.iter_mut().for_each(|x| *x /= g);
    }
    if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v.into_iter().map(|x| x as i64).collect()
}

/// Bareiss determinant.
fn det_i128(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// `n_l = Σ_{i≠l} y_i n_i` with `y_l = -1`; `y` is a lattice point of Δ in
/// the coordinates `x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightPartition {
    pub l: usize,
    pub y: IntVector,
}

/// All partitions of `weights[l]` by the other weights, stopping after
/// `limit` of them.
pub fn partitions(weights: &[i64], l: usize, limit: usize) -> Vec<IntVector> {
    fn rec(w: &[i64], l: usize, i: usize, rest: i64, y: &mut IntVector, limit: usize, out: &mut Vec<IntVector>) {
        if out.len() >= limit {
            return;
        }
        if i == w.len() {
            if rest == 0 {
                out.push(y.clone());
            }
            return;
        }
        if i == l {
            return rec(w, l, i + 1, rest, y, limit, out);
        }
        for c in 0..=rest / w[i] {
            y[i] = c;
            rec(w, l, i + 1, rest - c * w[i], y, limit, out);
        }
        y[i] = 0;
    }
    let mut y = vec![0; weights.len()];
    y[l] = -1;
    let mut out = Vec::new();
    rec(weights, l, 0, weights[l], &mut y, limit, &mut out);
    out
}

/// Indices whose weight has exactly one partition by the others, with
/// that partition. Indices refer to the sorted weights of `ws`.
pub fn unique_partitions(ws: &WeightSystem) -> Vec<WeightPartition> {
    let w = ws.weights();
    (0..w.len())
        .filter_map(|l| match partitions(w, l, 2).as_slice() {
            [y] => Some(WeightPartition { l, y: y.clone() }),
            _ => None,
        })
        .collect()
}

/// The fibration whose fiber is the section dual to projecting Δ(ws) along
/// `y` onto the facet `x_l = -1`, when that is reflexive.
pub fn facet_fibration(ws: &WeightSystem, part: &WeightPartition) -> Option<Fibration> {
    let q = ws.to_cws();
    let delta = delta_of_q(&q).ok()?;
    let dstar = dual(&delta).ok()?;
    section(&delta, &dstar, &section_generators(&q, part))
}

/// `V'_i = V_i + y_i V_l` for `i != l`; they span the orthogonal
/// complement of `y`.
fn section_generators(q: &Cws, part: &WeightPartition) -> Vec<IntVector> {
    let v = nabla_vertices(q);
    (0..v.len())
        .filter(|&i| i != part.l)
        .map(|i| v[i].iter().zip(&v[part.l]).map(|(a, b)| a + part.y[i] * b).collect())
        .collect()
}

/// Weight system of the fiber of a reflexive facet projection. The `V'_i`
/// satisfy the original relation without `n_l`; dividing each by its index
/// in `N` rescales the corresponding weight.
pub fn facet_projection(ws: &WeightSystem, part: &WeightPartition) -> Option<WeightSystem> {
    facet_fibration(ws, part)?;
    let q = ws.to_cws();
    let gens = section_generators(&q, part);
    let (_, coords) = span_coordinates(&gens, q.dim());
    let w: Vec<i64> = (0..ws.len())
        .filter(|&i| i != part.l)
        .zip(&coords)
        .map(|(i, c)| ws.weights()[i] * gcd_of(c))
        .collect();
    WeightSystem::new(&w).ok()
}

/// Distinct reflexive projections of Δ(ws) onto facets coming from unique
/// partitions. Partitions `y` and `-y` project along the same line.
pub fn count_facet_projections(ws: &WeightSystem) -> usize {
    let mut lines: Vec<IntVector> = Vec::new();
    for part in unique_partitions(ws) {
        let y = if part.y.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            part.y.iter().map(|x| -x).collect()
        } else {
            part.y.clone()
        };
        if lines.contains(&y) {
            continue;
        }
        if facet_fibration(ws, &part).is_some() {
            lines.push(y);
        }
    }
    lines.len()
}

/// The fibration encoded by the systems `fiber_systems` of `q`, whose
/// support must not carry any other system. The fiber subspace is spanned by
/// the ∇ vertices `V_i` over that support.
pub fn cws_fibration(q: &Cws, fiber_systems: &[usize]) -> Result<Option<Fibration>, FibrationError> {
    let s = q.systems();
    if fiber_systems.is_empty() || fiber_systems.iter().any(|&j| j >= s.len()) {
        return Err(FibrationError::InvalidSubsystem("system index out of range".into()));
    }
    let mut chosen = fiber_systems.to_vec();
    chosen.sort_unstable();
    chosen.dedup();
    let support: Vec<usize> = (0..q.k()).filter(|&i| chosen.iter().any(|&j| s[j][i] > 0)).collect();
    let dim = support.len() - chosen.len();
    if dim < 2 {
        return Err(FibrationError::InvalidSubsystem(format!("fiber dimension {dim} is below 2")));
    }
    if dim >= q.dim() {
        return Err(FibrationError::InvalidSubsystem("fiber is the whole space".into()));
    }
    let v = nabla_vertices(q);
    let gens: Vec<IntVector> = support.iter().map(|&i| v[i].clone()).collect();
    if crate::hull::rank_i64(&gens) != dim {
        return Err(FibrationError::InvalidSubsystem("another system lives on the same coordinates".into()));
    }
    let delta = delta_of_q(q)?;
    let dstar = dual(&delta)?;
    Ok(section(&delta, &dstar, &gens))
}
