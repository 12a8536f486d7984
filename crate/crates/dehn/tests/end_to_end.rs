use dehn::catalog::{builtin_paper_catalog, load_catalog, query, save_catalog, Query, SetKind};
use dehn::engine::{Engine, MatchOptions, Status};
use dehn::homology::{first_homology, SurgeryDiagram};

#[test]
fn saved_catalog_verifies_like_the_builtin_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.json");
    let builtin = builtin_paper_catalog();
    save_catalog(&builtin, &path).unwrap();
    let loaded = load_catalog(&path).unwrap();
    assert_eq!(loaded.to_json(), builtin.to_json());

    let (a, b) = (Engine::new(&builtin), Engine::new(&loaded));
    for id in Engine::covered_targets() {
        let (va, vb) = (a.verify_rigidity_theorem(id).unwrap(), b.verify_rigidity_theorem(id).unwrap());
        assert_eq!(va, vb, "{id}");
        assert_eq!(va.status, Status::Rigid, "{id}");
    }
}

#[test]
fn query_then_decide() {
    let cat = builtin_paper_catalog();
    let engine = Engine::new(&cat);
    let q = Query {
        cusps: Some(1),
        max_delta: Some((SetKind::Et, 8)),
        ..Query::default()
    };
    let hits = query(&cat, &q);
    assert!(!hits.is_empty());
    for e in hits {
        let p = cat.resolve(e.id()).unwrap().profile().unwrap().clone();
        let v = engine.decide(&p, e.id()).unwrap();
        assert_eq!(v.status, Status::Rigid, "{}", e.id());
        // knot exteriors hit the knot rule first
        assert!(v.candidates.iter().any(|c| c == e.id()), "{:?}", v.candidates);
    }
}

#[test]
fn family_instances_agree_with_surgery_homology() {
    // the catalog's recorded H1 for L(n-1/2) matches a direct computation
    let cat = builtin_paper_catalog();
    let mut compared = 0;
    for n in -8i64..=8 {
        let id = format!("L({}/2)", 2 * n - 1);
        let p = cat.resolve(&id).unwrap().profile().unwrap().clone();
        let Some(recorded) = p.homology_value() else { continue };
        let d = SurgeryDiagram::new(vec![vec![0, 3], vec![3, 0]], vec![Some(format!("{}/2", 2 * n - 1).parse().unwrap()), None])
            .unwrap();
        assert_eq!(first_homology(&d).unwrap(), recorded, "{id}");
        compared += 1;
    }
    assert!(compared > 0);
}

#[test]
fn every_manifold_matches_itself() {
    let cat = builtin_paper_catalog();
    let engine = Engine::new(&cat);
    for m in cat.manifolds() {
        let matches = engine
            .match_dehn_fillings(&m.profile, &m.profile, MatchOptions { null_slopes: false })
            .unwrap();
        assert!(!matches.is_empty(), "{}", m.id);
    }
}
