mod common;

use std::collections::BTreeSet;

use refpoly::polytope::{dual, hull, is_reflexive};
use refpoly::weights::*;

fn canonical_set(ws: &[WeightSystem]) -> BTreeSet<Vec<i64>> {
    ws.iter().map(|w| w.weights().to_vec()).collect()
}

#[test]
fn ip_weights_with_four_entries_match_table() {
    let ip = enumerate_single_ws(4, EnumerationMode::Ip).unwrap();
    let table: BTreeSet<Vec<i64>> = common::k3_rows().iter().map(|r| r.ws().weights().to_vec()).collect();
    assert_eq!(ip.len(), 95);
    assert_eq!(canonical_set(&ip), table);
}

#[test]
fn three_weights() {
    let ip = enumerate_single_ws(3, EnumerationMode::Ip).unwrap();
    let expect: BTreeSet<Vec<i64>> = [vec![1, 1, 1], vec![1, 1, 2], vec![1, 2, 3]].into_iter().collect();
    assert_eq!(canonical_set(&ip), expect);
}

#[test]
fn candidates_include_every_ip_system() {
    let cand = canonical_set(&enumerate_single_ws(4, EnumerationMode::Candidates).unwrap());
    let ip = canonical_set(&enumerate_single_ws(4, EnumerationMode::Ip).unwrap());
    assert!(ip.is_subset(&cand));
}

#[test]
fn delta_of_ip_system_is_reflexive() {
    // Every IP system in dimension at most 4 gives a reflexive polytope.
    for r in common::k3_rows() {
        let d = delta_of_q(&r.ws().to_cws()).unwrap();
        assert!(is_reflexive(&d), "{:?}", r.weights);
    }
}

#[test]
fn k3_point_counts_and_types() {
    for r in common::k3_rows() {
        let q = r.ws().to_cws();
        assert_eq!(point_vertex_counts(&q).unwrap(), r.counts, "{:?}", r.weights);
        assert_eq!(minimality_type(&q).unwrap().letter(), r.tag, "{:?}", r.weights);
    }
}

#[test]
fn combined_systems_in_dimension_three() {
    let all = enumerate_cws(3).unwrap();
    let singles = all.iter().filter(|q| q.systems().len() == 1).count();
    let combined: BTreeSet<Cws> = all.iter().filter(|q| q.systems().len() > 1).map(|q| q.canonical()).collect();
    let table: BTreeSet<Cws> = common::cws3_rows().into_iter().map(|(q, _, _)| q.canonical()).collect();
    assert_eq!(singles, 95);
    assert_eq!(combined, table);
}

#[test]
fn combined_system_rows() {
    for (q, tag, counts) in common::cws3_rows() {
        assert_eq!(point_vertex_counts(&q).unwrap(), counts, "{q}");
        assert_eq!(minimality_type(&q).unwrap().letter(), tag, "{q}");
    }
}

#[test]
fn dimension_two() {
    let all = enumerate_cws(2).unwrap();
    assert_eq!(all.len(), 4);
    let square = Cws::new(vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]]).unwrap().canonical();
    assert!(all.iter().any(|q| q.canonical() == square));
    let very: Vec<&Cws> = all.iter().filter(|q| minimality_type(q).unwrap().very_minimal).collect();
    assert_eq!(very.len(), 3);
}

#[test]
fn nabla_relation_holds() {
    // Σ n_i V_i = 0 for each system.
    for r in common::k3_rows().iter().take(20) {
        let q = r.ws().to_cws();
        let v = nabla_vertices(&q);
        for s in q.systems() {
            for c in 0..q.dim() {
                assert_eq!(s.iter().zip(&v).map(|(n, vi)| n * vi[c]).sum::<i64>(), 0);
            }
        }
        // ∇ sits inside Δ*.
        let ds = dual(&delta_of_q(&q).unwrap()).unwrap();
        assert!(v.iter().all(|x| ds.contains(x)));
    }
}

#[test]
fn planar_embedding_example() {
    // {(1,1,0,0,2)/4, (0,0,1,1,2)/4}: a 3d polytope, with ∇ = conv(V_i).
    let q = Cws::new(vec![vec![1, 1, 0, 0, 2], vec![0, 0, 1, 1, 2]]).unwrap();
    assert_eq!(q.dim(), 3);
    let nabla = hull(&nabla_vertices(&q)).unwrap();
    assert_eq!(nabla.vertices().len(), 5);
    assert!(has_ip_cws(&q));
}

#[test]
fn display_roundtrip() {
    for (q, _, _) in common::cws3_rows() {
        assert_eq!(parse_cws_line(&q.to_string(), None).unwrap(), q);
    }
}
