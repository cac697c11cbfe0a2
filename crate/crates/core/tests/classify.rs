use std::collections::BTreeSet;
use std::io::Write;

use refpoly::classify::*;
use refpoly::polytope::{dual, hull, is_reflexive, monomial_exponents, normal_form, NormalForm};
use refpoly::weights::{delta_of_q, enumerate_cws, has_ip_cws, minimality_type, Cws};

fn keys(run: &ClassificationRun) -> BTreeSet<Vec<u8>> {
    run.store.keys().into_iter().collect()
}

fn plane() -> ClassificationRun {
    classify(2, &default_seeds(2).unwrap(), &ClassifyOptions::default()).unwrap()
}

#[test]
fn sixteen_polygons() {
    let run = plane();
    assert_eq!(run.seeds.len(), 3);
    assert_eq!(run.store.len(), 16);
    assert_eq!(run.before_lattices, 16);
    let c = connectedness_report(&run);
    assert!(c.connected);
    assert_eq!(c.components, 1);
    assert_eq!(c.spanning.len(), 15);
}

#[test]
fn lattice_refinement_adds_nothing_in_the_plane() {
    let opts = ClassifyOptions { with_lattices: true, ..Default::default() };
    let run = classify(2, &default_seeds(2).unwrap(), &opts).unwrap();
    assert_eq!(keys(&run), keys(&plane()));
}

#[test]
fn polygon_invariants() {
    let forms = plane().store.normal_forms();
    // Boundary point counts of the 16 reflexive polygons run from 3 to 9,
    // and a polygon and its dual have 12 boundary points together.
    let boundary = |nf: &NormalForm| nf.polytope().lattice_points().len() - 1;
    let counts: BTreeSet<usize> = forms.iter().map(boundary).collect();
    assert_eq!(counts, (3..=9).collect());
    let all: BTreeSet<&NormalForm> = forms.iter().collect();
    for nf in &forms {
        let p = nf.polytope();
        assert!(is_reflexive(&p));
        let d = dual(&p).unwrap();
        assert!(all.contains(&normal_form(&d)));
        assert_eq!(boundary(nf) + d.lattice_points().len() - 1, 12);
        assert_eq!(dual(&d).unwrap(), p);
        let e = monomial_exponents(&p, &d).unwrap().to_i64_rows().unwrap();
        assert!(e.iter().flatten().all(|&x| x >= 0));
    }
}

#[test]
fn every_ip_system_is_covered() {
    // Seeding with all IP CWS instead of the very minimal ones finds nothing new.
    let all: Vec<Cws> = enumerate_cws(2).unwrap().into_iter().filter(has_ip_cws).collect();
    let run = classify(2, &all, &ClassifyOptions::default()).unwrap();
    assert_eq!(keys(&run), keys(&plane()));
}

#[test]
fn r_maximal_matches_containment() {
    // Oracle: P is r-maximal iff its dual has no proper reflexive
    // subpolytope, since reflexive Q ⊃ P means Q* ⊂ P*.
    let forms = plane().store.normal_forms();
    let mut maximal = 0;
    for nf in &forms {
        let p = nf.polytope();
        let oracle = reflexive_subpolytopes(&dual(&p).unwrap()).len() == 1;
        assert_eq!(check_r_maximal(&p), oracle);
        maximal += usize::from(oracle);
    }
    assert!(maximal >= 3);
    // Very minimal seeds give r-maximal Δ(q); (1,2,3) is not even lp-minimal.
    for q in enumerate_cws(2).unwrap() {
        let very = minimality_type(&q).unwrap().very_minimal;
        assert_eq!(check_r_maximal(&delta_of_q(&q).unwrap()), very, "{q}");
    }
    assert!(!check_r_maximal(&delta_of_q(&Cws::single(&[1, 2, 3]).unwrap()).unwrap()));
    let quintic = delta_of_q(&Cws::single(&[1, 1, 1, 1, 1]).unwrap()).unwrap();
    assert!(check_r_maximal(&quintic));
    assert!(!check_r_maximal(&dual(&quintic).unwrap()));
}

#[test]
fn subpolytopes_of_the_hexagon() {
    let hex = hull(&[vec![1, 0], vec![0, 1], vec![-1, 1], vec![-1, 0], vec![0, -1], vec![1, -1]]).unwrap();
    let subs = reflexive_subpolytopes(&hex);
    assert!(subs.contains(&normal_form(&hex)));
    assert!(subs.iter().all(|nf| nf.polytope().lattice_points().len() <= 7));
    let tri = hull(&[vec![1, 0], vec![0, 1], vec![-1, -1]]).unwrap();
    assert!(subs.contains(&normal_form(&tri)));
}

#[test]
fn unsupported_dimensions() {
    assert!(matches!(classify(5, &[], &ClassifyOptions::default()), Err(ClassifyError::Unsupported(5))));
    assert!(matches!(classify(4, &[], &ClassifyOptions::default()), Err(ClassifyError::Unsupported(4))));
    let seeds = default_seeds(2).unwrap();
    assert!(classify(3, &seeds, &ClassifyOptions::default()).is_err());
}

fn with_checkpoint(path: &std::path::Path) -> ClassifyOptions {
    ClassifyOptions { checkpoint: Some(path.to_path_buf()), sync_every: 3, ..Default::default() }
}

#[test]
fn resume_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.log");
    let seeds = default_seeds(2).unwrap();
    let first = classify(2, &seeds, &with_checkpoint(&path)).unwrap();
    let size = std::fs::metadata(&path).unwrap().len();
    let again = classify(2, &seeds, &with_checkpoint(&path)).unwrap();
    assert_eq!(keys(&first), keys(&again));
    assert_eq!(keys(&again), keys(&plane()));
    // Nothing was redone, and the replayed edges still connect everything.
    assert_eq!(again.store.processed(), 0);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), size);
    assert!(connectedness_report(&again).connected);
}

#[test]
fn partial_run_completes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.log");
    let seeds = default_seeds(2).unwrap();
    classify(2, &seeds[..1], &with_checkpoint(&path)).unwrap();
    let (_, replay) = DedupStore::open(&path, 1).unwrap();
    assert_eq!(replay.seeds_done, vec![0]);
    let rest = classify(2, &seeds, &with_checkpoint(&path)).unwrap();
    assert_eq!(keys(&rest), keys(&plane()));
    assert!(connectedness_report(&rest).connected);
}

#[test]
fn torn_tail_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.log");
    let seeds = default_seeds(2).unwrap();
    classify(2, &seeds, &with_checkpoint(&path)).unwrap();
    let size = std::fs::metadata(&path).unwrap().len();
    // A record header promising more bytes than were written.
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    f.write_all(&[200, 0, 0, 0, 1, 7, 7]).unwrap();
    drop(f);
    let (store, replay) = DedupStore::open(&path, 1).unwrap();
    assert_eq!(store.len(), 16);
    assert_eq!(replay.seeds_done.len(), seeds.len());
    drop(store);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), size);
}

#[test]
fn corrupt_record_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.log");
    std::fs::write(&path, [2, 0, 0, 0, 9, 9]).unwrap();
    assert!(matches!(DedupStore::open(&path, 1), Err(ClassifyError::Corrupt(0))));
}

#[test]
fn store_dedups() {
    let s = DedupStore::in_memory();
    assert!(s.insert(b"abc").unwrap());
    assert!(!s.insert(b"abc").unwrap());
    assert!(s.contains(b"abc"));
    assert_eq!(s.len(), 1);
    assert_eq!(s.found(), 1);
}
