//! Exact facet enumeration by incremental double description.
//!
//! The arithmetic is generic so that the same code runs on checked `i64`
//! (fast path) and on `BigInt` (taken when the fast path overflows).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::bitset::BitSet;

#[derive(Debug)]
pub(crate) struct Overflow;

pub(crate) trait Ring: Clone + PartialEq + std::fmt::Debug {
    fn from_i64(x: i64) -> Self;
    fn add(&self, o: &Self) -> Result<Self, Overflow>;
    fn sub(&self, o: &Self) -> Result<Self, Overflow>;
    fn mul(&self, o: &Self) -> Result<Self, Overflow>;
    fn signum(&self) -> i32;
    fn gcd(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn neg(&self) -> Result<Self, Overflow>;
    fn to_i64(&self) -> Option<i64>;

    fn is_zero(&self) -> bool {
        self.signum() == 0
    }
}

impl Ring for i64 {
    fn from_i64(x: i64) -> Self {
        x
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_add(*o).ok_or(Overflow)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_sub(*o).ok_or(Overflow)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        self.checked_mul(*o).ok_or(Overflow)
    }
    fn signum(&self) -> i32 {
        i64::signum(*self) as i32
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Result<Self, Overflow> {
        self.checked_neg().ok_or(Overflow)
    }
    fn to_i64(&self) -> Option<i64> {
        Some(*self)
    }
}

impl Ring for BigInt {
    fn from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
    fn add(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Result<Self, Overflow> {
        Ok(self * o)
    }
    fn signum(&self) -> i32 {
        if Zero::is_zero(self) {
            0
        } else if self.is_negative() {
            -1
        } else {
            1
        }
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Result<Self, Overflow> {
        Ok(-self)
    }
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(self)
    }
}

fn dot<T: Ring>(a: &[T], b: &[T]) -> Result<T, Overflow> {
    let mut s = T::from_i64(0);
    for (x, y) in a.iter().zip(b) {
        s = s.add(&x.mul(y)?)?;
    }
    Ok(s)
}

/// Divide out the content of a row, making it primitive.
fn make_primitive<T: Ring>(v: &mut [T]) {
    let g = v.iter().fold(T::from_i64(0), |g, x| g.gcd(x));
    if !g.is_zero() && g != T::from_i64(1) {
        for x in v.iter_mut() {
            *x = x.div_exact(&g);
        }
    }
}

/// Fraction-free reduction of `v` against an echelon basis; returns the
/// reduced vector (zero iff `v` lies in the span).
fn reduce<T: Ring>(basis: &[(usize, Vec<T>)], v: &[T]) -> Result<Vec<T>, Overflow> {
    let mut v = v.to_vec();
    for (pc, b) in basis {
        if v[*pc].is_zero() {
            continue;
        }
        let f = v[*pc].clone();
        let p = b[*pc].clone();
        for j in 0..v.len() {
            v[j] = v[j].mul(&p)?.sub(&b[j].mul(&f)?)?;
        }
        make_primitive(&mut v);
    }
    Ok(v)
}

/// Incrementally grown echelon basis of a vector space over Q.
pub(crate) struct Echelon<T: Ring> {
    rows: Vec<(usize, Vec<T>)>,
}

impl<T: Ring> Echelon<T> {
    pub fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v`; returns true if it increased the rank.
    pub fn push(&mut self, v: &[T]) -> Result<bool, Overflow> {
        let r = reduce(&self.rows, v)?;
        match r.iter().position(|x| !x.is_zero()) {
            Some(pc) => {
                self.rows.push((pc, r));
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

pub(crate) fn rank_of<T: Ring>(vs: &[Vec<T>]) -> Result<usize, Overflow> {
    let mut e = Echelon::new();
    for v in vs {
        e.push(v)?;
    }
    Ok(e.rank())
}

/// Normal of the hyperplane through `n` affinely independent points in dimension `n`.
fn hyperplane_normal<T: Ring>(pts: &[&Vec<T>], n: usize) -> Result<Vec<T>, Overflow> {
    // Rows are differences to the first point; the normal spans their kernel.
    let base = pts[0];
    let diffs: Vec<Vec<T>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a.sub(b)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let mut normal = Vec::with_capacity(n);
    for k in 0..n {
        let minor: Vec<Vec<T>> = diffs
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, x)| x.clone()).collect())
            .collect();
        let d = det(&minor)?;
        normal.push(if k % 2 == 0 { d } else { d.neg()? });
    }
    make_primitive(&mut normal);
    Ok(normal)
}

fn det<T: Ring>(m: &[Vec<T>]) -> Result<T, Overflow> {
    let n = m.len();
    if n == 0 {
        return Ok(T::from_i64(1));
    }
    let mut a = m.to_vec();
    let mut sign = 1;
    let mut prev = T::from_i64(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return Ok(T::from_i64(0));
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].mul(&a[k][k])?.sub(&a[i][k].mul(&a[k][j])?)?;
                a[i][j] = v.div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        d.neg()
    } else {
        Ok(d)
    }
}

pub(crate) struct DdResult {
    /// (normal, offset) with `<normal, x> + offset >= 0` on the hull.
    pub facets: Vec<(Vec<i64>, i64)>,
    /// Indices (into the input) of the points that are vertices.
    pub vertices: Vec<usize>,
}

pub(crate) enum DdError {
    Degenerate(usize),
    Overflow,
}

impl From<Overflow> for DdError {
    fn from(_: Overflow) -> Self {
        DdError::Overflow
    }
}

struct Face<T> {
    normal: Vec<T>,
    offset: T,
    inc: BitSet,
}

pub(crate) fn double_description<T: Ring>(input: &[Vec<i64>], n: usize) -> Result<DdResult, DdError> {
    let pts: Vec<Vec<T>> = input.iter().map(|p| p.iter().map(|&x| T::from_i64(x)).collect()).collect();
    let m = pts.len();
    if m == 0 {
        return Err(DdError::Degenerate(0));
    }

    // Initial simplex: greedy affinely independent selection.
    let mut simplex = vec![0usize];
    let mut ech = Echelon::<T>::new();
    for (i, p) in pts.iter().enumerate().skip(1) {
        if simplex.len() == n + 1 {
            break;
        }
        let d: Vec<T> = p.iter().zip(&pts[0]).map(|(a, b)| a.sub(b)).collect::<Result<_, _>>()?;
        if ech.push(&d)? {
            simplex.push(i);
        }
    }
    if simplex.len() < n + 1 {
        return Err(DdError::Degenerate(simplex.len() - 1));
    }

    let mut faces: Vec<Face<T>> = Vec::new();
    for omit in 0..=n {
        let on: Vec<&Vec<T>> = simplex.iter().enumerate().filter(|&(j, _)| j != omit).map(|(_, &i)| &pts[i]).collect();
        let mut normal = hyperplane_normal(&on, n)?;
        let mut offset = dot(&normal, on[0])?.neg()?;
        let val = dot(&normal, &pts[simplex[omit]])?.add(&offset)?;
        if val.signum() < 0 {
            normal = normal.iter().map(|x| x.neg()).collect::<Result<_, _>>()?;
            offset = offset.neg()?;
        }
        let mut inc = BitSet::new(m);
        for (j, &i) in simplex.iter().enumerate() {
            if j != omit {
                inc.insert(i);
            }
        }
        faces.push(Face { normal, offset, inc });
    }

    let in_simplex: Vec<bool> = {
        let mut v = vec![false; m];
        for &i in &simplex {
            v[i] = true;
        }
        v
    };

    for pi in 0..m {
        if in_simplex[pi] {
            continue;
        }
        let p = &pts[pi];
        let vals: Vec<T> = faces
            .iter()
            .map(|f| dot(&f.normal, p)?.add(&f.offset))
            .collect::<Result<_, _>>()?;
        let neg: Vec<usize> = (0..faces.len()).filter(|&i| vals[i].signum() < 0).collect();
        if neg.is_empty() {
            for (f, v) in faces.iter_mut().zip(&vals) {
                if v.is_zero() {
                    f.inc.insert(pi);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..faces.len()).filter(|&i| vals[i].signum() > 0).collect();
        let mut new_faces = Vec::new();
        for &fi in &neg {
            for &gi in &pos {
                let common = faces[fi].inc.and(&faces[gi].inc);
                if common.len() < n - 1 {
                    continue;
                }
                let blocked = faces
                    .iter()
                    .enumerate()
                    .any(|(hi, h)| hi != fi && hi != gi && common.is_subset(&h.inc));
                if blocked {
                    continue;
                }
                let (sf, sg) = (&vals[fi], &vals[gi]);
                let (f, g) = (&faces[fi], &faces[gi]);
                let mut normal: Vec<T> = f
                    .normal
                    .iter()
                    .zip(&g.normal)
                    .map(|(a, b)| sg.mul(a)?.sub(&sf.mul(b)?))
                    .collect::<Result<_, _>>()?;
                let mut offset = sg.mul(&f.offset)?.sub(&sf.mul(&g.offset)?)?;
                let gcd = normal.iter().fold(offset.clone(), |acc, x| acc.gcd(x));
                if !gcd.is_zero() && gcd != T::from_i64(1) {
                    for x in normal.iter_mut() {
                        *x = x.div_exact(&gcd);
                    }
                    offset = offset.div_exact(&gcd);
                }
                let mut inc = common;
                inc.insert(pi);
                new_faces.push(Face { normal, offset, inc });
            }
        }
        let mut kept: Vec<Face<T>> = Vec::with_capacity(faces.len() + new_faces.len());
        for (i, mut f) in faces.into_iter().enumerate() {
            match vals[i].signum() {
                -1 => continue,
                0 => f.inc.insert(pi),
                _ => {}
            }
            kept.push(f);
        }
        kept.extend(new_faces);
        faces = kept;
    }

    // Normals from the double description are primitive up to the offset
    // content; make the normal itself primitive (offsets stay integral on
    // lattice input).
    let mut facets = Vec::with_capacity(faces.len());
    for f in &faces {
        let mut nv = f.normal.clone();
        let g = nv.iter().fold(T::from_i64(0), |g, x| g.gcd(x));
        for x in nv.iter_mut() {
            *x = x.div_exact(&g);
        }
        let off = f.offset.div_exact(&g);
        let nv: Vec<i64> = nv.iter().map(|x| x.to_i64().ok_or(Overflow)).collect::<Result<_, _>>()?;
        facets.push((nv, off.to_i64().ok_or(Overflow)?));
    }

    let mut vertices = Vec::new();
    for pi in 0..m {
        let normals: Vec<Vec<T>> = faces.iter().filter(|f| f.inc.contains(pi)).map(|f| f.normal.clone()).collect();
        if normals.len() >= n && rank_of(&normals)? == n {
            vertices.push(pi);
        }
    }
    Ok(DdResult { facets, vertices })
}

pub(crate) fn hull_facets(points: &[Vec<i64>], n: usize) -> Result<DdResult, usize> {
    match double_description::<i64>(points, n) {
        Ok(r) => Ok(r),
        Err(DdError::Degenerate(d)) => Err(d),
        Err(DdError::Overflow) => match double_description::<BigInt>(points, n) {
            Ok(r) => Ok(r),
            Err(DdError::Degenerate(d)) => Err(d),
            Err(DdError::Overflow) => panic!("facet data exceeds 64-bit range"),
        },
    }
}

pub(crate) fn rank_i64(vs: &[Vec<i64>]) -> usize {
    match rank_of::<i64>(vs) {
        Ok(r) => r,
        Err(_) => {
            let big: Vec<Vec<BigInt>> = vs.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
            rank_of(&big).expect("bigint rank")
        }
    }
}
