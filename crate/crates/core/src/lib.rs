//! Reflexive lattice polytopes from combined weight systems: construction,
//! normal forms, sublattices, Hodge data, fibrations and classification.

pub mod bitset;
pub mod classify;
mod hull;
pub mod fibration;
pub mod hodge;
pub mod intlin;
pub mod lattices;
pub mod polytope;
pub mod weights;
