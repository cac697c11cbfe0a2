//! Lattice polytopes: exact hulls, polar duals, lattice points, face
//! lattices, normal forms and automorphisms.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use thiserror::Error;

use crate::bitset::BitSet;
use crate::hull::{hull_facets, rank_i64};
use crate::intlin::{self, IntMatrix};

pub type IntVector = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("points span an affine space of dimension {affine_dim} in ambient dimension {ambient}")]
    Degenerate { ambient: usize, affine_dim: usize },
    #[error("origin is not strictly interior")]
    NoInteriorOrigin,
    #[error("dual polytope has non-integer vertices")]
    NonLatticeDual,
    #[error("vertex pairing matrix is not integral")]
    NonIntegerVpm,
    #[error("polytopes are not a reflexive dual pair")]
    NotReflexivePair,
    #[error("no points given")]
    Empty,
}

/// Supporting inequality `<normal, x> + offset >= 0`, tight on the facet.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Facet {
    pub normal: IntVector,
    pub offset: i64,
}

impl Facet {
    #[inline]
    pub fn eval(&self, x: &[i64]) -> i64 {
        dot(&self.normal, x) + self.offset
    }
}

#[inline]
pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<IntVector>,
    facets: Vec<Facet>,
    points: OnceLock<Vec<IntVector>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl Eq for Polytope {}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[IntVector] {
        &self.vertices
    }

    /// Facets in lexicographic order of (normal, offset).
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.facets.iter().all(|f| f.eval(x) >= 0)
    }

    pub fn strictly_contains(&self, x: &[i64]) -> bool {
        self.facets.iter().all(|f| f.eval(x) > 0)
    }

    /// All lattice points, in lexicographic order.
    pub fn lattice_points(&self) -> &[IntVector] {
        self.points.get_or_init(|| enumerate_lattice_points(self))
    }

    /// Number of lattice points strictly inside.
    pub fn interior_point_count(&self) -> usize {
        self.lattice_points().iter().filter(|p| self.strictly_contains(p)).count()
    }

    /// Image under `x -> g x` for a square integer matrix `g` (rows of `g`).
    pub fn transform(&self, g: &[IntVector]) -> Polytope {
        let pts: Vec<IntVector> = self.vertices.iter().map(|v| g.iter().map(|row| dot(row, v)).collect()).collect();
        hull(&pts).expect("transform of a full-dimensional polytope by a regular matrix")
    }

    fn from_parts(dim: usize, mut vertices: Vec<IntVector>, mut facets: Vec<Facet>) -> Polytope {
        vertices.sort();
        facets.sort();
        Polytope { dim, vertices, facets, points: OnceLock::new() }
    }

    /// Vertex/facet incidence: `inc[f]` holds the vertex indices on facet `f`.
    pub fn facet_vertex_incidence(&self) -> Vec<BitSet> {
        self.facets
            .iter()
            .map(|f| {
                let mut b = BitSet::new(self.vertices.len());
                for (i, v) in self.vertices.iter().enumerate() {
                    if f.eval(v) == 0 {
                        b.insert(i);
                    }
                }
                b
            })
            .collect()
    }
}

/// Convex hull of a point set. The result is always full-dimensional.
pub fn hull(points: &[IntVector]) -> Result<Polytope, PolytopeError> {
    let Some(first) = points.first() else {
        return Err(PolytopeError::Empty);
    };
    let n = first.len();
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    // Process far-out points first: they are most likely vertices, which
    // keeps the intermediate facet lists short.
    let m = pts.len() as i64;
    let sum: Vec<i64> = (0..n).map(|j| pts.iter().map(|p| p[j]).sum()).collect();
    pts.sort_by_cached_key(|p| {
        let d: i64 = p.iter().zip(&sum).map(|(x, s)| (m * x - s).abs()).sum();
        std::cmp::Reverse(d)
    });
    match hull_facets(&pts, n) {
        Ok(r) => {
            let vertices = r.vertices.iter().map(|&i| pts[i].clone()).collect();
            let facets = r.facets.into_iter().map(|(normal, offset)| Facet { normal, offset }).collect();
            Ok(Polytope::from_parts(n, vertices, facets))
        }
        Err(d) => Err(PolytopeError::Degenerate { ambient: n, affine_dim: d }),
    }
}

/// Origin strictly interior (false for lower-dimensional point sets).
pub fn has_ip(p: &Polytope) -> bool {
    p.facets.iter().all(|f| f.offset > 0)
}

/// `has_ip` on an arbitrary point set.
pub fn points_have_ip(points: &[IntVector]) -> bool {
    hull(points).map(|p| has_ip(&p)).unwrap_or(false)
}

pub fn is_reflexive(p: &Polytope) -> bool {
    p.facets.iter().all(|f| f.offset == 1)
}

/// Polar dual `{y : <y, x> >= -1 for x in P}`; it must be a lattice polytope.
pub fn dual(p: &Polytope) -> Result<Polytope, PolytopeError> {
    if !has_ip(p) {
        return Err(PolytopeError::NoInteriorOrigin);
    }
    if !is_reflexive(p) {
        return Err(PolytopeError::NonLatticeDual);
    }
    let vertices = p.facets.iter().map(|f| f.normal.clone()).collect();
    let facets = p.vertices.iter().map(|v| Facet { normal: v.clone(), offset: 1 }).collect();
    Ok(Polytope::from_parts(p.dim, vertices, facets))
}

/// Dual vertices as `(numerator, denominator)` pairs; one per facet of `p`.
pub fn dual_rational(p: &Polytope) -> Result<Vec<(IntVector, i64)>, PolytopeError> {
    if !has_ip(p) {
        return Err(PolytopeError::NoInteriorOrigin);
    }
    Ok(p.facets.iter().map(|f| (f.normal.clone(), f.offset)).collect())
}

fn enumerate_lattice_points(p: &Polytope) -> Vec<IntVector> {
    let n = p.dim;
    // Facets of the projections to the leading coordinates give exact
    // bounds for each coordinate given the previous ones.
    let mut levels: Vec<Vec<Facet>> = Vec::with_capacity(n);
    for j in 1..n {
        let proj: Vec<IntVector> = p.vertices.iter().map(|v| v[..j].to_vec()).collect();
        levels.push(hull(&proj).expect("projection of a full-dimensional polytope").facets);
    }
    levels.push(p.facets.clone());
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    fill(&levels, 0, &mut x, &mut out);
    out
}

fn fill(levels: &[Vec<Facet>], j: usize, x: &mut Vec<i64>, out: &mut Vec<IntVector>) {
    let mut lo = i64::MIN;
    let mut hi = i64::MAX;
    for f in &levels[j] {
        let rest = dot(&f.normal[..j], &x[..j]) + f.offset;
        let a = f.normal[j];
        match a.cmp(&0) {
            Ordering::Greater => lo = lo.max(-(rest.div_euclid(a))),
            Ordering::Less => hi = hi.min(rest.div_euclid(-a)),
            Ordering::Equal => {
                if rest < 0 {
                    return;
                }
            }
        }
    }
    for v in lo..=hi {
        x[j] = v;
        if j + 1 == levels.len() {
            out.push(x.clone());
        } else {
            fill(levels, j + 1, x, out);
        }
    }
}

/// A face with its incidences and lattice-point counts.
#[derive(Clone, Debug)]
pub struct Face {
    pub dim: usize,
    /// Indices into `Polytope::vertices`.
    pub vertices: BitSet,
    /// Indices into `Polytope::facets` of the facets containing this face.
    pub facets: BitSet,
    /// Lattice points on the face.
    pub l: usize,
    /// Lattice points in the relative interior.
    pub l_interior: usize,
    /// Index of the dual face in the dual lattice (dimension `n - 1 - dim`).
    pub dual: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct FaceLattice {
    pub dim: usize,
    /// `faces[d]` lists the faces of dimension `d`, for `d` in `0..dim`.
    pub faces: Vec<Vec<Face>>,
}

impl FaceLattice {
    pub fn count(&self, d: usize) -> usize {
        self.faces[d].len()
    }
}

/// Face lattice with lattice-point counts; no dual links.
pub fn face_lattice(p: &Polytope) -> FaceLattice {
    let n = p.dim;
    let nv = p.vertices.len();
    let inc = p.facet_vertex_incidence();
    let mut by_dim: Vec<Vec<BitSet>> = vec![Vec::new(); n];
    by_dim[n - 1] = inc.clone();
    for d in (0..n - 1).rev() {
        let mut found: Vec<BitSet> = Vec::new();
        for f in &by_dim[d + 1] {
            for g in &inc {
                let s = f.and(g);
                if s == *f || s.is_empty() {
                    continue;
                }
                if found.contains(&s) {
                    continue;
                }
                if affine_dim(p, &s) == d {
                    found.push(s);
                }
            }
        }
        found.sort();
        by_dim[d] = found;
    }
    let _ = nv;

    let tight: Vec<BitSet> = p
        .lattice_points()
        .iter()
        .map(|x| {
            let mut b = BitSet::new(p.facets.len());
            for (i, f) in p.facets.iter().enumerate() {
                if f.eval(x) == 0 {
                    b.insert(i);
                }
            }
            b
        })
        .collect();

    let faces = by_dim
        .into_iter()
        .enumerate()
        .map(|(d, sets)| {
            sets.into_iter()
                .map(|vs| {
                    let mut fs = BitSet::new(p.facets.len());
                    for (i, s) in inc.iter().enumerate() {
                        if vs.is_subset(s) {
                            fs.insert(i);
                        }
                    }
                    let l = tight.iter().filter(|t| fs.is_subset(t)).count();
                    let l_interior = tight.iter().filter(|t| **t == fs).count();
                    Face { dim: d, vertices: vs, facets: fs, l, l_interior, dual: None }
                })
                .collect()
        })
        .collect();
    FaceLattice { dim: n, faces }
}

fn affine_dim(p: &Polytope, vs: &BitSet) -> usize {
    let idx: Vec<usize> = vs.iter().collect();
    let Some(&first) = idx.first() else {
        return 0;
    };
    let base = &p.vertices[first];
    let diffs: Vec<IntVector> = idx[1..]
        .iter()
        .map(|&i| p.vertices[i].iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    rank_i64(&diffs)
}

/// Face lattices of a reflexive `p` and of its dual, with the inclusion
/// reversing pairing filled in on both sides.
pub fn face_lattice_pair(p: &Polytope) -> Result<(Polytope, FaceLattice, FaceLattice), PolytopeError> {
    let q = dual(p)?;
    let mut fp = face_lattice(p);
    let mut fq = face_lattice(&q);
    let n = p.dim;
    // Facet i of p corresponds to the dual vertex with coordinates facets[i].normal.
    let facet_to_dual_vertex: Vec<usize> = p
        .facets
        .iter()
        .map(|f| q.vertices.binary_search(&f.normal).expect("dual vertex"))
        .collect();
    for d in 0..n {
        for i in 0..fp.faces[d].len() {
            let mut target = BitSet::new(q.vertices.len());
            for fi in fp.faces[d][i].facets.iter() {
                target.insert(facet_to_dual_vertex[fi]);
            }
            let dd = n - 1 - d;
            let j = fq.faces[dd]
                .iter()
                .position(|g| g.vertices == target)
                .expect("dual face present");
            fp.faces[d][i].dual = Some(j);
            fq.faces[dd][j].dual = Some(i);
        }
    }
    Ok((q, fp, fq))
}

/// `<normal_f, v> + offset_f` for facets `f` (rows) and vertices `v` (columns).
pub fn pairing_matrix(p: &Polytope) -> Vec<Vec<i64>> {
    p.facets.iter().map(|f| p.vertices.iter().map(|v| f.eval(v)).collect()).collect()
}

/// Vertex pairing matrix `X_ij = <dual vertex i, vertex j>`.
pub fn vpm(p: &Polytope) -> Result<IntMatrix, PolytopeError> {
    if !has_ip(p) {
        return Err(PolytopeError::NoInteriorOrigin);
    }
    let mut rows = Vec::with_capacity(p.facets.len());
    for f in &p.facets {
        let mut row = Vec::with_capacity(p.vertices.len());
        for v in &p.vertices {
            let x = dot(&f.normal, v);
            if x % f.offset != 0 {
                return Err(PolytopeError::NonIntegerVpm);
            }
            row.push(x / f.offset);
        }
        rows.push(row);
    }
    Ok(IntMatrix::from_i64_rows(&rows, p.vertices.len()))
}

/// Canonical representative under `GL(n, Z)` and vertex relabelling.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalForm {
    /// `dim` rows, one column per vertex.
    pub matrix: Vec<IntVector>,
}

impl NormalForm {
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.matrix.first().map_or(0, |r| r.len())
    }

    /// Vertices in the normal-form coordinates.
    pub fn vertices(&self) -> Vec<IntVector> {
        (0..self.vertex_count()).map(|j| self.matrix.iter().map(|r| r[j]).collect()).collect()
    }

    pub fn polytope(&self) -> Polytope {
        hull(&self.vertices()).expect("normal form describes a full-dimensional polytope")
    }

    /// Compact byte serialization: dims followed by zigzag varints.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + self.dim() * self.vertex_count());
        push_varint(&mut out, self.dim() as u64);
        push_varint(&mut out, self.vertex_count() as u64);
        for r in &self.matrix {
            for &x in r {
                push_varint(&mut out, ((x << 1) ^ (x >> 63)) as u64);
            }
        }
        out
    }

    pub fn from_key(bytes: &[u8]) -> Option<NormalForm> {
        let mut pos = 0;
        let dim = read_varint(bytes, &mut pos)? as usize;
        let nv = read_varint(bytes, &mut pos)? as usize;
        let mut matrix = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut row = Vec::with_capacity(nv);
            for _ in 0..nv {
                let z = read_varint(bytes, &mut pos)?;
                row.push(((z >> 1) as i64) ^ -((z & 1) as i64));
            }
            matrix.push(row);
        }
        (pos == bytes.len()).then_some(NormalForm { matrix })
    }
}

fn push_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

fn read_varint(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Some(v);
        }
        shift += 7;
        if shift > 63 {
            return None;
        }
    }
}

struct Refinement {
    used: Vec<bool>,
    cols: Vec<usize>,
    /// Block starts within `cols`; a block may still be permuted freely.
    starts: Vec<usize>,
}

/// All column orders under which the pairing matrix, with suitably ordered
/// rows, is lexicographically maximal.
fn maximal_column_orders(pm: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let nf = pm.len();
    let nv = pm.first().map_or(0, |r| r.len());
    let mut states = vec![Refinement { used: vec![false; nf], cols: (0..nv).collect(), starts: vec![0] }];
    let mut row = Vec::with_capacity(nv);
    for _ in 0..nf {
        let mut best: Option<Vec<i64>> = None;
        let mut next: Vec<Refinement> = Vec::new();
        for st in &states {
            for r in 0..nf {
                if st.used[r] {
                    continue;
                }
                let values = &pm[r];
                let mut cols = st.cols.clone();
                let mut starts = Vec::with_capacity(nv);
                for (bi, &s) in st.starts.iter().enumerate() {
                    let e = st.starts.get(bi + 1).copied().unwrap_or(nv);
                    cols[s..e].sort_by(|&a, &b| values[b].cmp(&values[a]));
                    starts.push(s);
                    for k in s + 1..e {
                        if values[cols[k]] != values[cols[k - 1]] {
                            starts.push(k);
                        }
                    }
                }
                row.clear();
                row.extend(cols.iter().map(|&c| values[c]));
                let ord = match &best {
                    None => Ordering::Greater,
                    Some(b) => row.as_slice().cmp(b.as_slice()),
                };
                if ord == Ordering::Less {
                    continue;
                }
                if ord == Ordering::Greater {
                    best = Some(row.clone());
                    next.clear();
                }
                let mut used = st.used.clone();
                used[r] = true;
                next.push(Refinement { used, cols, starts });
            }
        }
        states = next;
    }
    states.into_iter().map(|s| s.cols).collect()
}

/// Row Hermite normal form of a small machine-width matrix, falling back to
/// unbounded integers if an intermediate value overflows.
pub(crate) fn hnf_i64(m: &[IntVector]) -> Vec<IntVector> {
    if let Some(h) = hnf_checked(m) {
        return h;
    }
    let cols = m.first().map_or(0, |r| r.len());
    let (h, _) = intlin::hnf(&IntMatrix::from_i64_rows(m, cols));
    h.to_i64_rows().expect("Hermite form entries fit in 64 bits")
}

fn hnf_checked(m: &[IntVector]) -> Option<Vec<IntVector>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut h = m.to_vec();
    let mut p = 0;
    for col in 0..cols {
        if p == rows {
            break;
        }
        let mut found = false;
        loop {
            let best = (p..rows).filter(|&r| h[r][col] != 0).min_by_key(|&r| (h[r][col].unsigned_abs(), r));
            let Some(best) = best else { break };
            found = true;
            h.swap(p, best);
            let mut clean = true;
            for r in p + 1..rows {
                if h[r][col] == 0 {
                    continue;
                }
                let q = Integer::div_floor(&h[r][col], &h[p][col]);
                for j in 0..cols {
                    h[r][j] = h[r][j].checked_sub(q.checked_mul(h[p][j])?)?;
                }
                if h[r][col] != 0 {
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
        if h[p][col] < 0 {
            for x in h[p].iter_mut() {
                *x = x.checked_neg()?;
            }
        }
        for r in 0..p {
            let q = Integer::div_floor(&h[r][col], &h[p][col]);
            if q != 0 {
                for j in 0..cols {
                    h[r][j] = h[r][j].checked_sub(q.checked_mul(h[p][j])?)?;
                }
            }
        }
        p += 1;
    }
    Some(h)
}

fn ordered_vertex_matrix(p: &Polytope, order: &[usize]) -> Vec<IntVector> {
    (0..p.dim).map(|i| order.iter().map(|&c| p.vertices[c][i]).collect()).collect()
}

fn normal_form_with_orders(p: &Polytope) -> (NormalForm, Vec<Vec<IntVector>>) {
    let pm = pairing_matrix(p);
    let orders = maximal_column_orders(&pm);
    let forms: Vec<Vec<IntVector>> = orders.iter().map(|o| hnf_i64(&ordered_vertex_matrix(p, o))).collect();
    let best = forms.iter().min().expect("at least one maximal order").clone();
    (NormalForm { matrix: best }, forms)
}

/// Canonical form: maximize the facet/vertex pairing matrix over row and
/// column permutations, then take the smallest Hermite form of the vertex
/// matrix over all maximizing vertex orders.
pub fn normal_form(p: &Polytope) -> NormalForm {
    normal_form_with_orders(p).0
}

/// Order of the group of lattice automorphisms of `p`.
pub fn automorphism_order(p: &Polytope) -> usize {
    let (nf, forms) = normal_form_with_orders(p);
    forms.iter().filter(|f| **f == nf.matrix).count()
}

/// Exponent matrix `<v_k, x> + 1` over lattice points `x` of `delta` (rows)
/// and nonzero lattice points `v_k` of `delta_star` (columns).
pub fn monomial_exponents(delta: &Polytope, delta_star: &Polytope) -> Result<IntMatrix, PolytopeError> {
    let expected = dual(delta).map_err(|_| PolytopeError::NotReflexivePair)?;
    if expected != *delta_star {
        return Err(PolytopeError::NotReflexivePair);
    }
    let vs: Vec<&IntVector> = delta_star.lattice_points().iter().filter(|v| v.iter().any(|&c| c != 0)).collect();
    let rows: Vec<IntVector> = delta
        .lattice_points()
        .iter()
        .map(|x| vs.iter().map(|v| dot(v, x) + 1).collect())
        .collect();
    Ok(IntMatrix::from_i64_rows(&rows, vs.len()))
}

/// Coordinates of the lattice `span(points) ∩ Z^n`: returns a basis `B`
/// (rows) and the coordinates `c` of each point with `point = c * B`.
pub fn span_coordinates(points: &[IntVector], n: usize) -> (Vec<IntVector>, Vec<IntVector>) {
    let pm = IntMatrix::from_i64_rows(points, n);
    let orth = intlin::integer_kernel(&pm.transpose());
    let basis = if orth.rows() == 0 { IntMatrix::identity(n) } else { intlin::integer_kernel(&orth.transpose()) };
    let c = intlin::right_inverse(&basis).expect("saturated basis has a right inverse");
    let coords = pm.mul(&c);
    (
        basis.to_i64_rows().expect("basis fits"),
        coords.to_i64_rows().expect("coordinates fit"),
    )
}

/// Polytope text block: `<#points> <dim>` then one point per line.
pub fn format_polytope(p: &Polytope) -> String {
    format_points(p.vertices(), p.dim())
}

pub fn format_points(points: &[IntVector], dim: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", points.len(), dim);
    for v in points {
        let row: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

#[derive(Clone, Debug)]
pub struct PolytopeBlock {
    /// 1-based line number of the header.
    pub line: usize,
    pub comments: Vec<String>,
    pub points: Vec<IntVector>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn parse_ints(line: &str, lineno: usize) -> Result<Vec<i64>, ParseError> {
    line.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|e| ParseError { line: lineno, msg: format!("bad integer {t:?}: {e}") }))
        .collect()
}

/// Parses consecutive polytope blocks. Comment lines (`#`) before a header
/// are attached to that block.
pub fn parse_polytopes(text: &str) -> Result<Vec<PolytopeBlock>, ParseError> {
    let mut blocks = Vec::new();
    let mut comments = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    while let Some((lineno, line)) = lines.next() {
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            comments.push(line.to_string());
            continue;
        }
        let head = parse_ints(line, lineno)?;
        let [count, dim] = head[..] else {
            return Err(ParseError { line: lineno, msg: "expected header `<#points> <dim>`".into() });
        };
        if count <= 0 || dim <= 0 {
            return Err(ParseError { line: lineno, msg: "point count and dimension must be positive".into() });
        }
        let mut points = Vec::with_capacity(count as usize);
        while points.len() < count as usize {
            let Some((ln, l)) = lines.next() else {
                return Err(ParseError { line: lineno, msg: format!("block ends after {} of {count} points", points.len()) });
            };
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let p = parse_ints(l, ln)?;
            if p.len() != dim as usize {
                return Err(ParseError { line: ln, msg: format!("expected {dim} coordinates, found {}", p.len()) });
            }
            points.push(p);
        }
        blocks.push(PolytopeBlock { line: lineno, comments: std::mem::take(&mut comments), points });
    }
    Ok(blocks)
}

/// Exact determinant of a small square matrix.
pub fn det_i64(m: &[IntVector]) -> BigInt {
    IntMatrix::from_i64_rows(m, m.len()).det()
}

pub(crate) fn gcd_of(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<IntVector> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    #[test]
    fn square() {
        let p = hull(&pts(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1], &[0, 0]])).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        assert!(is_reflexive(&p));
        let d = dual(&p).unwrap();
        assert_eq!(d.vertices(), &pts(&[&[-1, 0], &[0, -1], &[0, 1], &[1, 0]])[..]);
        assert_eq!(p.lattice_points().len(), 9);
        assert_eq!(automorphism_order(&p), 8);
    }

    #[test]
    fn non_reflexive_diamond() {
        let p = hull(&pts(&[&[2, 0], &[-2, 0], &[0, 1], &[0, -1]])).unwrap();
        assert!(has_ip(&p));
        assert!(!is_reflexive(&p));
        assert_eq!(dual(&p), Err(PolytopeError::NonLatticeDual));
    }

    #[test]
    fn triangle_and_degenerate() {
        let t = hull(&pts(&[&[1, 0], &[0, 1], &[-1, -1]])).unwrap();
        assert!(is_reflexive(&t));
        assert!(!points_have_ip(&pts(&[&[1, 0], &[0, 1], &[1, 1]])));
        assert!(matches!(
            hull(&pts(&[&[0, 0], &[1, 1], &[2, 2]])),
            Err(PolytopeError::Degenerate { ambient: 2, affine_dim: 1 })
        ));
        let seg = hull(&pts(&[&[-1], &[1]])).unwrap();
        assert!(has_ip(&seg));
    }

    #[test]
    fn quartic_simplex() {
        let s = hull(&pts(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]])).unwrap();
        assert!(is_reflexive(&s));
        let d = dual(&s).unwrap();
        assert_eq!(d.lattice_points().len(), 35);
        assert_eq!(dual(&d).unwrap(), s);
        let x = vpm(&d).unwrap();
        for i in 0..4 {
            let row = &x.to_i64_rows().unwrap()[i];
            assert_eq!(row.iter().filter(|&&v| v == 3).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v == -1).count(), 3);
        }
    }

    #[test]
    fn face_lattice_of_square() {
        let p = hull(&pts(&[&[1, 1], &[1, -1], &[-1, 1], &[-1, -1]])).unwrap();
        let fl = face_lattice(&p);
        assert_eq!(fl.count(0), 4);
        assert_eq!(fl.count(1), 4);
        assert!(fl.faces[1].iter().all(|f| f.l == 3 && f.l_interior == 1));
        assert!(fl.faces[0].iter().all(|f| f.l == 1 && f.l_interior == 1));
    }

    #[test]
    fn normal_form_roundtrip_key() {
        let p = hull(&pts(&[&[1, 0], &[0, 1], &[-1, -1]])).unwrap();
        let nf = normal_form(&p);
        assert_eq!(NormalForm::from_key(&nf.key()), Some(nf.clone()));
        let g = vec![vec![2, 1], vec![1, 1]];
        assert_eq!(normal_form(&p.transform(&g)), nf);
    }

    #[test]
    fn parse_blocks() {
        let text = "# a\n3 2\n1 0\n0 1\n-1 -1\n\n4 1\n-1\n0\n1\n2\n";
        let b = parse_polytopes(text).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].comments, vec!["# a".to_string()]);
        assert!(parse_polytopes("2 2\n1 0\n").is_err());
        assert!(parse_polytopes("1 2\n1 x\n").is_err());
    }
}
