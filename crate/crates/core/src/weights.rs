//! Weight systems and combined weight systems (CWS): the polytopes they
//! define, IP checks, exhaustive enumeration and minimality types.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::intlin::{self, IntMatrix};
use crate::polytope::{dual, has_ip, hull, points_have_ip, IntVector, Polytope, PolytopeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightsError {
    #[error("invalid weight system: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// Positive integer weights `n_i` with gcd 1, sorted ascending; the degree
/// is `d = Σ n_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightSystem {
    weights: Vec<i64>,
}

impl WeightSystem {
    pub fn new(weights: &[i64]) -> Result<Self, WeightsError> {
        if weights.len() < 2 {
            return Err(WeightsError::Invalid("need at least two weights".into()));
        }
        if weights.iter().any(|&w| w <= 0) {
            return Err(WeightsError::Invalid("weights must be positive".into()));
        }
        let g = weights.iter().fold(0i64, |g, &w| g.gcd(&w));
        let mut w: Vec<i64> = weights.iter().map(|&x| x / g).collect();
        w.sort_unstable();
        Ok(WeightSystem { weights: w })
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.weights.iter().sum()
    }

    pub fn to_cws(&self) -> Cws {
        Cws { systems: vec![self.weights.clone()] }
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degree())?;
        for w in &self.weights {
            write!(f, " {w}")?;
        }
        Ok(())
    }
}

/// Several weight systems over a shared coordinate set; `systems[j][i]` is
/// `n_i^{(j)} >= 0` and each system's degree is its sum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cws {
    systems: Vec<Vec<i64>>,
}

impl Cws {
    pub fn new(systems: Vec<Vec<i64>>) -> Result<Self, WeightsError> {
        let Some(k) = systems.first().map(|s| s.len()) else {
            return Err(WeightsError::Invalid("no systems".into()));
        };
        if systems.iter().any(|s| s.len() != k) {
            return Err(WeightsError::Invalid("systems differ in length".into()));
        }
        if systems.iter().flatten().any(|&w| w < 0) {
            return Err(WeightsError::Invalid("negative weight".into()));
        }
        if systems.iter().any(|s| s.iter().all(|&w| w == 0)) {
            return Err(WeightsError::Invalid("empty system".into()));
        }
        if (0..k).any(|i| systems.iter().all(|s| s[i] == 0)) {
            return Err(WeightsError::Invalid("coordinate with no positive weight".into()));
        }
        let systems = systems
            .into_iter()
            .map(|s| {
                let g = s.iter().fold(0i64, |g, &w| g.gcd(&w));
                s.into_iter().map(|w| w / g).collect()
            })
            .collect();
        let q = Cws { systems };
        if q.dim() + q.systems.len() != k || q.rank() != q.systems.len() {
            return Err(WeightsError::Invalid("weight systems are linearly dependent".into()));
        }
        Ok(q)
    }

    pub fn single(weights: &[i64]) -> Result<Self, WeightsError> {
        Ok(WeightSystem::new(weights)?.to_cws())
    }

    pub fn systems(&self) -> &[Vec<i64>] {
        &self.systems
    }

    /// Number of coordinates (vertices of ∇).
    pub fn k(&self) -> usize {
        self.systems[0].len()
    }

    /// Dimension `k - #systems` of the polytopes.
    pub fn dim(&self) -> usize {
        self.k() - self.systems.len()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.systems.iter().map(|s| s.iter().sum()).collect()
    }

    fn rank(&self) -> usize {
        crate::hull::rank_i64(&self.systems)
    }

    /// Canonical representative under coordinate and system permutations:
    /// the permutation minimizing the sorted list of `(degree, weights)`.
    pub fn canonical(&self) -> Cws {
        let k = self.k();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best: Option<Vec<(i64, Vec<i64>)>> = None;
        permute_all(&mut perm, 0, &mut |p| {
            let mut blocks: Vec<(i64, Vec<i64>)> =
                self.systems.iter().map(|s| (s.iter().sum(), p.iter().map(|&i| s[i]).collect())).collect();
            blocks.sort();
            if best.as_ref().is_none_or(|b| blocks < *b) {
                best = Some(blocks);
            }
        });
        Cws { systems: best.expect("k >= 1").into_iter().map(|(_, v)| v).collect() }
    }
}

fn permute_all(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute_all(p, i + 1, f);
        p.swap(i, j);
    }
}

impl fmt::Display for Cws {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, s) in self.systems.iter().enumerate() {
            if j > 0 {
                write!(f, "  ")?;
            }
            write!(f, "{}", s.iter().sum::<i64>())?;
            for w in s {
                write!(f, " {w}")?;
            }
        }
        Ok(())
    }
}

/// Parses one line of `d n_1 … n_k` blocks. With `k = None` the block length
/// is inferred: it must be the unique length for which every block's degree
/// equals the sum of its weights.
pub fn parse_cws_line(line: &str, k: Option<usize>) -> Result<Cws, WeightsError> {
    let toks: Vec<i64> = line
        .split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| WeightsError::Invalid(format!("bad integer {t:?}"))))
        .collect::<Result<_, _>>()?;
    let m = toks.len();
    let consistent = |b: usize| m % b == 0 && toks.chunks(b).all(|c| c[0] == c[1..].iter().sum::<i64>());
    let block = match k {
        Some(k) => {
            if !consistent(k + 1) {
                return Err(WeightsError::Invalid(format!("line is not a sequence of `d n_1..n_{k}` blocks")));
            }
            k + 1
        }
        None => {
            let sizes: Vec<usize> = (3..=m).filter(|&b| consistent(b)).collect();
            match sizes[..] {
                [b] => b,
                [] => return Err(WeightsError::Invalid("no block length makes every degree the sum of its weights".into())),
                _ => return Err(WeightsError::Invalid("ambiguous block length; pass the number of weights".into())),
            }
        }
    };
    Cws::new(toks.chunks(block).map(|c| c[1..].to_vec()).collect())
}

/// Lattice of allowed points of a CWS: `x ∈ Z^k` with `Σ_i n_i^{(j)} x_i = 0`.
/// `basis` rows span it; `x = c · basis` and `c = x · coords`.
struct Embedding {
    basis: Vec<IntVector>,
    coords: IntMatrix,
}

fn embedding(q: &Cws) -> Embedding {
    let k = q.k();
    let cols: Vec<IntVector> = (0..k).map(|i| q.systems.iter().map(|s| s[i]).collect()).collect();
    let a = IntMatrix::from_i64_rows(&cols, q.systems.len());
    let b = intlin::integer_kernel(&a);
    let coords = intlin::right_inverse(&b).expect("kernel basis is saturated");
    Embedding { basis: b.to_i64_rows().expect("small basis"), coords }
}

/// Solutions `a >= 0` of `Σ_i n_i^{(j)} a_i = d^{(j)}` for every system.
pub fn allowed_points(q: &Cws) -> Vec<IntVector> {
    let k = q.k();
    // Coordinates with big weights first: their ranges are shortest.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(q.systems.iter().map(|s| s[i]).max().unwrap_or(0)));
    // Last position at which each system still has a positive weight.
    let last: Vec<usize> = q
        .systems
        .iter()
        .map(|s| order.iter().rposition(|&i| s[i] > 0).expect("non-empty system"))
        .collect();
    let mut out = Vec::new();
    let mut a = vec![0i64; k];
    let mut rem = q.degrees();
    solve(q, &order, &last, 0, &mut a, &mut rem, &mut out);
    out.sort();
    out
}

fn solve(q: &Cws, order: &[usize], last: &[usize], pos: usize, a: &mut Vec<i64>, rem: &mut Vec<i64>, out: &mut Vec<IntVector>) {
    if pos == order.len() {
        if rem.iter().all(|&r| r == 0) {
            out.push(a.clone());
        }
        return;
    }
    let i = order[pos];
    let mut hi = i64::MAX;
    for (j, s) in q.systems.iter().enumerate() {
        if s[i] > 0 {
            hi = hi.min(rem[j] / s[i]);
        }
    }
    // If this is the last coordinate serving some system, its value is forced.
    let mut forced: Option<i64> = None;
    for (j, s) in q.systems.iter().enumerate() {
        if last[j] == pos {
            if rem[j] % s[i] != 0 {
                return;
            }
            let v = rem[j] / s[i];
            if forced.is_some_and(|f| f != v) {
                return;
            }
            forced = Some(v);
        }
    }
    let range = match forced {
        Some(v) if v <= hi => v..=v,
        Some(_) => return,
        None => 0..=hi,
    };
    for v in range {
        a[i] = v;
        for (j, s) in q.systems.iter().enumerate() {
            rem[j] -= v * s[i];
        }
        solve(q, order, last, pos + 1, a, rem, out);
        for (j, s) in q.systems.iter().enumerate() {
            rem[j] += v * s[i];
        }
    }
    a[i] = 0;
}

fn to_coords(x: &[IntVector], emb: &Embedding) -> Vec<IntVector> {
    if x.is_empty() {
        return Vec::new();
    }
    let m = IntMatrix::from_i64_rows(x, x[0].len());
    m.mul(&emb.coords).to_i64_rows().expect("coordinates fit")
}

/// The polytope Δ(q): convex hull of the allowed points `x = a - 1`, in
/// coordinates of the lattice `{x ∈ Z^k : Σ n_i^{(j)} x_i = 0}`.
pub fn delta_of_q(q: &Cws) -> Result<Polytope, WeightsError> {
    let emb = embedding(q);
    let xs: Vec<IntVector> = allowed_points(q).into_iter().map(|a| a.into_iter().map(|v| v - 1).collect()).collect();
    Ok(hull(&to_coords(&xs, &emb))?)
}

/// True iff Δ(q) is full-dimensional with the origin strictly inside.
pub fn has_ip_cws(q: &Cws) -> bool {
    delta_of_q(q).map(|d| has_ip(&d)).unwrap_or(false)
}

/// Vertices `V_i` of ∇ in the same coordinates as Δ(q): `<V_i, c> = x_i`.
pub fn nabla_vertices(q: &Cws) -> Vec<IntVector> {
    let emb = embedding(q);
    (0..q.k()).map(|i| emb.basis.iter().map(|r| r[i]).collect()).collect()
}

/// The minimal polytope ∇ = conv(V_i) with `Σ_i n_i^{(j)} V_i = 0`.
pub fn nabla_of_q(q: &Cws) -> Result<Polytope, WeightsError> {
    Ok(hull(&nabla_vertices(q))?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MinimalityType {
    pub span: bool,
    pub lp_minimal: bool,
    pub very_minimal: bool,
    pub r_minimal: bool,
}

impl MinimalityType {
    /// Strongest property as a one-letter tag: `r`, `l`, `s` or `-`.
    pub fn letter(&self) -> &'static str {
        if self.r_minimal {
            "r"
        } else if self.lp_minimal {
            "l"
        } else if self.span {
            "s"
        } else {
            "-"
        }
    }

    /// Tag listing lp-minimality and span separately, e.g. `ls`, `l`, `s`.
    pub fn tag(&self) -> String {
        if self.r_minimal {
            return "r".into();
        }
        let mut s = String::new();
        if self.lp_minimal {
            s.push('l');
        }
        if self.span {
            s.push('s');
        }
        if s.is_empty() {
            s.push('-');
        }
        s
    }
}

fn without(points: &[IntVector], v: &IntVector) -> Vec<IntVector> {
    points.iter().filter(|p| *p != v).cloned().collect()
}

/// Span, lp-minimality and very-minimality of the ∇ of an IP CWS.
/// r-minimality is reported equal to very-minimality, which is exact for
/// dimension at most 4.
pub fn minimality_type(q: &Cws) -> Result<MinimalityType, WeightsError> {
    if q.dim() > 4 {
        return Err(WeightsError::Unsupported("minimality types need dimension <= 4".into()));
    }
    let delta = delta_of_q(q)?;
    let dstar = dual(&delta)?;
    let vs = nabla_vertices(q);
    let nabla = hull(&vs)?;
    let span = vs.iter().all(|v| dstar.vertices().binary_search(v).is_ok());
    let lp_minimal = vs.iter().all(|v| !points_have_ip(&without(nabla.lattice_points(), v)));
    let very_minimal = vs.iter().all(|v| !points_have_ip(&without(dstar.lattice_points(), v)));
    Ok(MinimalityType { span, lp_minimal, very_minimal, r_minimal: very_minimal })
}

/// Candidate weight systems from the separating-hyperplane search, or only
/// those with the IP property.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumerationMode {
    Candidates,
    Ip,
}

/// Exhaustive search for weight systems with `l` weights.
///
/// The search keeps a set of points allowed by the unknown weights,
/// starting from the origin. At each node, `a` is the orthogonal projection
/// of `(1,…,1)` onto the complement of their span; either the weights equal
/// `a`, or some allowed point has `Σ a_i x_i < 0`, and the search branches
/// over all such integer points with `x_i >= -1` for which positive weights
/// orthogonal to the enlarged set still exist.
pub fn enumerate_single_ws(l: usize, mode: EnumerationMode) -> Result<Vec<WeightSystem>, WeightsError> {
    if !(2..=5).contains(&l) {
        return Err(WeightsError::Unsupported(format!("weight systems with {l} weights")));
    }
    let candidates = search::run(l);
    let mut out: Vec<WeightSystem> = candidates.into_iter().map(|w| WeightSystem::new(&w).expect("positive")).collect();
    out.sort();
    out.dedup();
    if mode == EnumerationMode::Ip {
        out = out.into_par_iter().filter(|w| has_ip_cws(&w.to_cws())).collect();
    }
    Ok(out)
}

mod search {
    use super::*;

    /// Rational row echelon form, each row scaled to a primitive integer
    /// vector with positive pivot; canonical for the span.
    pub(super) fn rref(rows: &[Vec<i128>], l: usize) -> Vec<Vec<i128>> {
        let mut m: Vec<Vec<i128>> = rows.to_vec();
        let mut r = 0;
        for c in 0..l {
            let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, p);
            for i in 0..m.len() {
                if i != r && m[i][c] != 0 {
                    let (a, b) = (m[r][c], m[i][c]);
                    for j in 0..l {
                        m[i][j] = a * m[i][j] - b * m[r][j];
                    }
                    primitive(&mut m[i]);
                }
            }
            primitive(&mut m[r]);
            if m[r][c] < 0 {
                m[r].iter_mut().for_each(|x| *x = -*x);
            }
            r += 1;
        }
        m.truncate(r);
        m
    }

    pub(super) fn primitive(v: &mut [i128]) {
        let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
        if g > 1 {
            v.iter_mut().for_each(|x| *x /= g);
        }
    }

    /// Integer basis of `{y : R y = 0}` for `R` in the form returned by `rref`.
    pub(super) fn null_space(r: &[Vec<i128>], l: usize) -> Vec<Vec<i128>> {
        let pivots: Vec<usize> = r.iter().map(|row| row.iter().position(|&x| x != 0).expect("nonzero row")).collect();
        let lcm = r.iter().zip(&pivots).fold(1i128, |acc, (row, &p)| acc.lcm(&row[p]));
        (0..l)
            .filter(|c| !pivots.contains(c))
            .map(|f| {
                let mut v = vec![0i128; l];
                v[f] = lcm;
                for (row, &p) in r.iter().zip(&pivots) {
                    v[p] = -row[f] * (lcm / row[p]);
                }
                primitive(&mut v);
                v
            })
            .collect()
    }

    /// Does `t · K > 0` have a solution? Fourier–Motzkin on `Kᵀ t >= 1`.
    pub(super) fn positive_in_row_space(k: &[Vec<i128>]) -> bool {
        let m = k.len();
        if m == 0 {
            return false;
        }
        let l = k[0].len();
        // Constraint: coeffs · t >= rhs.
        let mut cons: Vec<(Vec<i128>, i128)> = (0..l).map(|i| ((0..m).map(|r| k[r][i]).collect(), 1)).collect();
        for var in 0..m {
            let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
            for c in cons {
                match c.0[var].signum() {
                    1 => pos.push(c),
                    -1 => neg.push(c),
                    _ => rest.push(c),
                }
            }
            for (pc, pr) in &pos {
                for (nc, nr) in &neg {
                    let (a, b) = (pc[var], -nc[var]);
                    let mut coeffs: Vec<i128> = pc.iter().zip(nc).map(|(x, y)| b * x + a * y).collect();
                    let mut rhs = b * pr + a * nr;
                    let g = coeffs.iter().fold(rhs.abs(), |g, &x| g.gcd(&x));
                    if g > 1 {
                        coeffs.iter_mut().for_each(|x| *x /= g);
                        rhs /= g;
                    }
                    rest.push((coeffs, rhs));
                }
            }
            rest.sort();
            rest.dedup();
            cons = rest;
        }
        cons.iter().all(|(_, rhs)| *rhs <= 0)
    }

    struct Node {
        span: Vec<Vec<i128>>,
    }

    pub(super) fn run(l: usize) -> BTreeSet<Vec<i64>> {
        let mut seen: HashSet<Vec<Vec<i128>>> = HashSet::new();
        let mut found: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut stack = vec![Node { span: Vec::new() }];
        while let Some(node) = stack.pop() {
            let orth: Vec<Vec<i128>> = if node.span.is_empty() {
                (0..l).map(|i| (0..l).map(|j| i128::from(i == j)).collect()).collect()
            } else {
                null_space(&node.span, l)
            };
            let a = projection_of_ones(&orth, l);
            if a.iter().any(|&x| x <= 0) {
                // Never observed for l <= 5; kept as a hard failure rather
                // than a silent gap in the search.
                panic!("non-positive separating vector at span {:?}", node.span);
            }
            let mut w: Vec<i64> = a.iter().map(|&x| x as i64).collect();
            w.sort_unstable();
            found.insert(w);
            if orth.len() == 1 {
                continue;
            }
            let sum: i128 = a.iter().sum();
            let bounds: Vec<i64> = a.iter().map(|&aj| ((sum - aj - 1) / aj) as i64).collect();
            let mut x = vec![-1i64; l];
            loop {
                let ax: i128 = a.iter().zip(&x).map(|(&ai, &xi)| ai * xi as i128).sum();
                if ax < 0 {
                    let mut rows = node.span.clone();
                    rows.push(x.iter().map(|&v| v as i128).collect());
                    let span = rref(&rows, l);
                    if !seen.contains(&span) && positive_in_row_space(&null_space(&span, l)) {
                        seen.insert(span.clone());
                        stack.push(Node { span });
                    }
                }
                // Odometer over the box -1 <= x_j <= bounds[j].
                let mut j = 0;
                while j < l {
                    if x[j] < bounds[j] {
                        x[j] += 1;
                        break;
                    }
                    x[j] = -1;
                    j += 1;
                }
                if j == l {
                    break;
                }
            }
        }
        found
    }

    /// Integer vector along the orthogonal projection of `(1,…,1)` onto the
    /// row space of `k`, scaled to be primitive.
    pub(super) fn projection_of_ones(k: &[Vec<i128>], l: usize) -> Vec<i128> {
        let m = k.len();
        let g: Vec<Vec<i128>> = (0..m).map(|i| (0..m).map(|j| dot(&k[i], &k[j])).collect()).collect();
        let b: Vec<i128> = (0..m).map(|i| k[i].iter().sum()).collect();
        // Solve G t = b by Cramer's rule with the adjugate; det G > 0.
        let t = adjugate_solve(&g, &b);
        let mut a: Vec<i128> = (0..l).map(|c| (0..m).map(|r| t[r] * k[r][c]).sum()).collect();
        primitive(&mut a);
        a
    }

    fn dot(a: &[i128], b: &[i128]) -> i128 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn det(m: &[Vec<i128>]) -> i128 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        // Bareiss elimination.
        let mut a = m.to_vec();
        let mut sign = 1;
        let mut prev = 1i128;
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| a[r][c] != 0) else { return 0 };
            if p != c {
                a.swap(p, c);
                sign = -sign;
            }
            for r in c + 1..n {
                for j in c + 1..n {
                    a[r][j] = (a[r][j] * a[c][c] - a[r][c] * a[c][j]) / prev;
                }
                a[r][c] = 0;
            }
            prev = a[c][c];
        }
        sign * a[n - 1][n - 1]
    }

    fn adjugate_solve(g: &[Vec<i128>], b: &[i128]) -> Vec<i128> {
        let m = g.len();
        (0..m)
            .map(|i| {
                let mut gi = g.to_vec();
                for r in 0..m {
                    gi[r][i] = b[r];
                }
                det(&gi)
            })
            .collect()
    }
}

/// Coordinate layout of a CWS: each system is a list of coordinate
/// indices, to be filled with the weights of one IP weight system.
fn place(k: usize, parts: &[(&[usize], &[i64])]) -> Vec<Vec<i64>> {
    parts
        .iter()
        .map(|(idx, w)| {
            let mut s = vec![0i64; k];
            for (&i, &v) in idx.iter().zip(w.iter()) {
                s[i] = v;
            }
            s
        })
        .collect()
}

/// Orderings of `w` with the first `distinguished` positions fixed and the
/// rest sorted, deduplicated.
fn placements(w: &[i64], distinguished: usize) -> Vec<Vec<i64>> {
    let mut out = BTreeSet::new();
    let mut p: Vec<usize> = (0..w.len()).collect();
    permute_all(&mut p, 0, &mut |perm| {
        let mut v: Vec<i64> = perm.iter().map(|&i| w[i]).collect();
        v[distinguished..].sort_unstable();
        out.insert(v);
    });
    out.into_iter().collect()
}

/// All IP CWS of dimension `n`: single systems with `n + 1` weights and
/// combinations of lower-length IP systems along the admissible simplex
/// structures. Dimension 4 takes hours and is meant for batch runs.
pub fn enumerate_cws(n: usize) -> Result<Vec<Cws>, WeightsError> {
    if !(1..=4).contains(&n) {
        return Err(WeightsError::Unsupported(format!("CWS enumeration in dimension {n}")));
    }
    let ws = |l: usize| -> Result<Vec<Vec<i64>>, WeightsError> {
        Ok(enumerate_single_ws(l, EnumerationMode::Ip)?.into_iter().map(|w| w.weights().to_vec()).collect())
    };
    let mut out: Vec<Cws> = ws(n + 1)?.into_iter().map(|w| Cws { systems: vec![w] }).collect();
    let combos = structure_candidates(n, &ws)?;
    let mut seen = HashSet::new();
    let mut combined: Vec<Cws> = combos
        .into_par_iter()
        .filter_map(|systems| {
            let q = Cws::new(systems).ok()?.canonical();
            Some(q)
        })
        .collect();
    combined.sort();
    combined.dedup();
    combined.retain(|q| seen.insert(q.clone()));
    let ip: Vec<Cws> = combined.into_par_iter().filter(has_ip_cws).collect();
    out.extend(ip);
    Ok(out)
}

/// One row of the structure catalog with its candidate systems (before
/// the IP filter and deduplication).
pub fn structure_candidates(
    n: usize,
    ws: &dyn Fn(usize) -> Result<Vec<Vec<i64>>, WeightsError>,
) -> Result<Vec<Vec<Vec<i64>>>, WeightsError> {
    Ok(structure_rows(n, ws)?.into_iter().flat_map(|(_, c)| c).collect())
}

/// Candidate combinations grouped by simplex structure, in catalog order.
pub fn structure_rows(
    n: usize,
    ws: &dyn Fn(usize) -> Result<Vec<Vec<i64>>, WeightsError>,
) -> Result<Vec<(&'static str, Vec<Vec<Vec<i64>>>)>, WeightsError> {
    let mut rows = Vec::new();
    match n {
        1 => {}
        2 => {
            let seg = ws(2)?;
            rows.push(("2+2", disjoint(&[seg.clone(), seg])));
        }
        3 => {
            let seg = ws(2)?;
            let tri = ws(3)?;
            rows.push(("3+2", disjoint(&[tri.clone(), seg.clone()])));
            rows.push(("3+3 sharing 1", sharing(&tri, &tri, 1)));
            rows.push(("2+2+2", disjoint(&[seg.clone(), seg.clone(), seg])));
        }
        4 => {
            let tri = ws(3)?;
            let tet = ws(4)?;
            rows.push(("4+4 sharing 2", sharing(&tet, &tet, 2)));
            rows.push(("4+3 sharing 1", sharing(&tet, &tri, 1)));
            rows.push(("3+3", disjoint(&[tri.clone(), tri.clone()])));
            rows.push(("3+3+3 sharing 1", three_triangles(&tri)));
            let mut lower: Vec<Vec<Vec<i64>>> = Vec::new();
            for (_, c) in structure_rows(3, ws)? {
                lower.extend(c);
            }
            for w in &tet {
                lower.push(vec![w.clone()]);
            }
            let ip3: Vec<Vec<Vec<i64>>> = {
                let mut v: Vec<Cws> = lower.into_iter().filter_map(|s| Cws::new(s).ok()).map(|q| q.canonical()).collect();
                v.sort();
                v.dedup();
                v.into_par_iter().filter(has_ip_cws).map(|q| q.systems).collect()
            };
            rows.push(("n=3 + 2", ip3.into_iter().map(|s| extend_by_segment(&s)).collect()));
        }
        _ => return Err(WeightsError::Unsupported(format!("structures in dimension {n}"))),
    }
    Ok(rows)
}

/// Systems on pairwise disjoint coordinate blocks.
fn disjoint(parts: &[Vec<Vec<i64>>]) -> Vec<Vec<Vec<i64>>> {
    let k: usize = parts.iter().map(|p| p[0].len()).sum();
    let mut out = vec![Vec::new()];
    let mut offset = 0;
    for choices in parts {
        let len = choices[0].len();
        let idx: Vec<usize> = (offset..offset + len).collect();
        out = out
            .into_iter()
            .flat_map(|acc: Vec<Vec<i64>>| {
                let idx = idx.clone();
                choices.iter().map(move |w| {
                    let mut a = acc.clone();
                    a.extend(place(k, &[(&idx, w)]));
                    a
                })
            })
            .collect();
        offset += len;
    }
    out
}

/// Two systems sharing `shared` coordinates.
fn sharing(a: &[Vec<i64>], b: &[Vec<i64>], shared: usize) -> Vec<Vec<Vec<i64>>> {
    let la = a[0].len();
    let lb = b[0].len();
    let k = la + lb - shared;
    let ia: Vec<usize> = (0..la).collect();
    let ib: Vec<usize> = (0..shared).chain(la..k).collect();
    let mut out = Vec::new();
    for wa in a {
        for pa in placements(wa, shared) {
            for wb in b {
                for pb in placements(wb, shared) {
                    out.push(place(k, &[(&ia, &pa), (&ib, &pb)]));
                }
            }
        }
    }
    out
}

/// Three triangles sharing a single common vertex.
fn three_triangles(tri: &[Vec<i64>]) -> Vec<Vec<Vec<i64>>> {
    let k = 7;
    let idx: [[usize; 3]; 3] = [[0, 1, 2], [0, 3, 4], [0, 5, 6]];
    let opts: Vec<Vec<i64>> = tri.iter().flat_map(|w| placements(w, 1)).collect();
    let mut out = Vec::new();
    for x in &opts {
        for y in &opts {
            for z in &opts {
                out.push(place(k, &[(&idx[0], x), (&idx[1], y), (&idx[2], z)]));
            }
        }
    }
    out
}

fn extend_by_segment(systems: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let k = systems[0].len();
    let mut out: Vec<Vec<i64>> = systems.iter().map(|s| s.iter().copied().chain([0, 0]).collect()).collect();
    let mut seg = vec![0i64; k + 2];
    seg[k] = 1;
    seg[k + 1] = 1;
    out.push(seg);
    out
}

/// Count of CWS per structure row after the IP filter; used for
/// reporting and for checking against published totals.
pub fn structure_counts(n: usize) -> Result<Vec<(&'static str, usize)>, WeightsError> {
    let ws = |l: usize| -> Result<Vec<Vec<i64>>, WeightsError> {
        Ok(enumerate_single_ws(l, EnumerationMode::Ip)?.into_iter().map(|w| w.weights().to_vec()).collect())
    };
    let mut counts = Vec::new();
    for (name, cands) in structure_rows(n, &ws)? {
        let mut qs: Vec<Cws> = cands.into_iter().filter_map(|s| Cws::new(s).ok()).map(|q| q.canonical()).collect();
        qs.sort();
        qs.dedup();
        counts.push((name, qs.into_par_iter().filter(has_ip_cws).count()));
    }
    Ok(counts)
}

/// Lattice point and vertex counts of Δ(q) and its dual.
pub fn point_vertex_counts(q: &Cws) -> Result<[usize; 4], WeightsError> {
    let d = delta_of_q(q)?;
    let ds = dual(&d)?;
    Ok([d.lattice_points().len(), d.vertices().len(), ds.lattice_points().len(), ds.vertices().len()])
}
