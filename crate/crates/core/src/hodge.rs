//! Hodge numbers `h_{1i}` of Calabi–Yau hypersurfaces from a reflexive pair,
//! Picard numbers of toric K3 surfaces, and Euler numbers of threefolds.

use std::collections::HashMap;

use thiserror::Error;

use crate::polytope::{dot, dual, face_lattice_pair, is_reflexive, IntVector, Polytope};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HodgeError {
    #[error("polytope is not reflexive")]
    NotReflexive,
    #[error("dimension {0} not supported here")]
    WrongDimension(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeData {
    pub n: usize,
    /// `h[i - 1] = h_{1i}` for `i = 1..=n-2`.
    pub h: Vec<i64>,
    /// `2 (h11 - h12)` for threefolds.
    pub chi: Option<i64>,
    /// Picard number of the generic K3 surface (`n = 3`).
    pub picard: Option<i64>,
}

impl HodgeData {
    pub fn h11(&self) -> i64 {
        self.h[0]
    }
}

/// Hodge numbers of the hypersurface whose Newton polytope is `delta`.
/// Dimension 5 is evaluated by the same formula; its geometric meaning is
/// not checked here.
pub fn hodge_numbers(delta: &Polytope) -> Result<HodgeData, HodgeError> {
    let n = delta.dim();
    if !(3..=5).contains(&n) {
        return Err(HodgeError::WrongDimension(n));
    }
    if !is_reflexive(delta) {
        return Err(HodgeError::NotReflexive);
    }
    let (dstar, fl, fl_star) = face_lattice_pair(delta).map_err(|_| HodgeError::NotReflexive)?;
    let facet_sum = |faces: &crate::polytope::FaceLattice| -> i64 { faces.faces[n - 1].iter().map(|f| f.l_interior as i64).sum() };
    let base_star = dstar.lattice_points().len() as i64 - n as i64 - 1 - facet_sum(&fl_star);
    let base = delta.lattice_points().len() as i64 - n as i64 - 1 - facet_sum(&fl);
    let mut h = Vec::with_capacity(n - 2);
    for i in 1..=n - 2 {
        // Faces of Δ* of codimension i + 1 paired with their dual faces of dimension i.
        let dim_star = n - i - 1;
        let mut v: i64 = fl_star.faces[dim_star]
            .iter()
            .map(|f| {
                let g = &fl.faces[i][f.dual.expect("dual face")];
                (f.l_interior * g.l_interior) as i64
            })
            .sum();
        if i == 1 {
            v += base_star;
        }
        if i == n - 2 {
            v += base;
        }
        h.push(v);
    }
    let chi = (n == 4).then(|| 2 * (h[0] - h[1]));
    let picard = if n == 3 { Some(picard(delta)?) } else { None };
    Ok(HodgeData { n, h, chi, picard })
}

/// Picard number of the K3 surface with Newton polytope `delta`.
///
/// Computed from tight-facet signatures of lattice points rather than the
/// face lattice, so it independently checks the Hodge computation.
pub fn picard(delta: &Polytope) -> Result<i64, HodgeError> {
    if delta.dim() != 3 {
        return Err(HodgeError::WrongDimension(delta.dim()));
    }
    let dstar = dual(delta).map_err(|_| HodgeError::NotReflexive)?;
    // A Δ* point's signature: the vertices of Δ (facets of Δ*) it is tight on.
    let sig_star = signatures(dstar.lattice_points(), delta.vertices());
    // A Δ point's signature: the vertices of Δ* it is tight on.
    let sig = signatures(delta.lattice_points(), dstar.vertices());
    let mut by_sig: HashMap<&Vec<usize>, i64> = HashMap::new();
    for s in &sig {
        *by_sig.entry(s).or_default() += 1;
    }
    let mut groups: HashMap<&Vec<usize>, i64> = HashMap::new();
    for s in &sig_star {
        *groups.entry(s).or_default() += 1;
    }
    let mut pic = dstar.lattice_points().len() as i64 - 4;
    for (s, &count) in &groups {
        // Face of Δ* on which these points are relatively interior: its
        // dimension is 3 minus the rank of the tight facet normals.
        let normals: Vec<IntVector> = s.iter().map(|&i| delta.vertices()[i].clone()).collect();
        let dim = 3 - crate::hull::rank_i64(&normals);
        match dim {
            2 => pic -= count,
            1 => {
                // Dual edge of Δ: points tight exactly on this edge's vertices.
                let verts: Vec<usize> = dstar
                    .vertices()
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| s.iter().all(|&i| dot(v, &delta.vertices()[i]) == -1))
                    .map(|(j, _)| j)
                    .collect();
                pic += count * by_sig.get(&verts).copied().unwrap_or(0);
            }
            _ => {}
        }
    }
    Ok(pic)
}

fn signatures(points: &[IntVector], duals: &[IntVector]) -> Vec<Vec<usize>> {
    points
        .iter()
        .map(|x| duals.iter().enumerate().filter(|(_, u)| dot(u, x) == -1).map(|(i, _)| i).collect())
        .collect()
}

/// Hodge numbers of `delta` and of its dual are exchanged, `h_{1i} <-> h_{1,n-1-i}`.
pub fn mirror_check(delta: &Polytope) -> Result<bool, HodgeError> {
    let a = hodge_numbers(delta)?;
    let b = hodge_numbers(&dual(delta).map_err(|_| HodgeError::NotReflexive)?)?;
    let mut rev = b.h.clone();
    rev.reverse();
    Ok(a.h == rev)
}

/// The n = 3 combination that always evaluates to 20, together with the
/// Picard-number identity `Pic(Δ) + Pic(Δ*) - Σ_edges l*(θ*) l*(θ) = 20`.
pub fn k3_identities(delta: &Polytope) -> Result<(i64, i64), HodgeError> {
    let h = hodge_numbers(delta)?;
    let dstar = dual(delta).map_err(|_| HodgeError::NotReflexive)?;
    let pic = picard(delta)?;
    let pic_star = picard(&dstar)?;
    let (_, fl, fl_star) = face_lattice_pair(delta).map_err(|_| HodgeError::NotReflexive)?;
    let edges: i64 = fl_star.faces[1]
        .iter()
        .map(|f| (f.l_interior * fl.faces[1][f.dual.expect("dual")].l_interior) as i64)
        .sum();
    Ok((h.h11(), pic + pic_star - edges))
}
