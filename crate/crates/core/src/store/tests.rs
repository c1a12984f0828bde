use std::collections::{HashMap, HashSet};

use super::*;

fn pv_str(s: &str) -> PropertyValue {
    PropertyValue::Str(s.into())
}

fn paper(store: &Store, id: &str, features: Vec<f64>, class: i64) -> NodeId {
    store
        .create_node(
            &["PAPER"],
            vec![
                ("id", pv_str(id)),
                ("features", PropertyValue::Vector(features)),
                ("label", PropertyValue::Int(class)),
            ],
        )
        .unwrap()
}

#[test]
fn first_insert_gets_id_zero() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let n = paper(&store, "p1", vec![0.1, 0.2], 3);
    assert_eq!(n, NodeId(0));
    assert_eq!(store.node_count(), 1);
}

#[test]
fn empty_labels_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let err = store.create_node(&[], vec![]).unwrap_err();
    assert!(matches!(err, StoreError::EmptyLabels));
}

#[test]
fn thousand_inserts_count() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    for i in 0..1000 {
        store
            .create_node(&["PAPER"], vec![("id", PropertyValue::Int(i))])
            .unwrap();
    }
    assert_eq!(store.node_count(), 1000);
}

#[test]
fn duplicate_id_same_label_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    paper(&store, "p1", vec![0.0], 0);
    let err = store
        .create_node(&["PAPER"], vec![("id", pv_str("p1"))])
        .unwrap_err();
    assert!(matches!(err, StoreError::DuplicateId { .. }));
    // Same id under a different label is fine.
    store.create_node(&["AUTHOR"], vec![("id", pv_str("p1"))]).unwrap();
}

#[test]
fn vector_dim_enforced_per_label() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    paper(&store, "a", vec![0.1, 0.2], 0);
    let err = store
        .create_node(
            &["PAPER"],
            vec![("id", pv_str("b")), ("features", PropertyValue::Vector(vec![1.0]))],
        )
        .unwrap_err();
    assert!(matches!(err, StoreError::VectorDimMismatch { .. }));
}

#[test]
fn create_edge_and_star_degree() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let hub = paper(&store, "hub", vec![0.0], 0);
    let mut spokes = Vec::new();
    for i in 0..5 {
        spokes.push(paper(&store, &format!("s{i}"), vec![0.0], 0));
    }
    for &s in &spokes {
        store.create_edge(hub, s, "CITES", vec![]).unwrap();
    }
    assert_eq!(store.edge_count(), 5);

    let txn = store.begin_read();
    let out: Vec<_> = txn
        .expand(hub, Direction::Out, None)
        .unwrap()
        .collect::<Result<_>>()
        .unwrap();
    assert_eq!(out.len(), 5);
    let nbrs: HashSet<_> = out.iter().map(|h| h.nbr).collect();
    assert_eq!(nbrs, spokes.iter().copied().collect());
}

#[test]
fn dangling_edge_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let a = paper(&store, "a", vec![0.0], 0);
    paper(&store, "b", vec![0.0], 0);
    let err = store.create_edge(a, NodeId(999_999), "CITES", vec![]).unwrap_err();
    assert!(matches!(err, StoreError::UnknownNode(_)));
}

#[test]
fn expand_directions_and_sink() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let a = paper(&store, "a", vec![0.0], 0);
    let b = paper(&store, "b", vec![0.0], 0);
    let c = paper(&store, "c", vec![0.0], 0);
    store.create_edge(a, b, "CITES", vec![]).unwrap();
    store.create_edge(a, c, "CITES", vec![]).unwrap();
    store.create_edge(c, a, "WRITES", vec![]).unwrap();

    let txn = store.begin_read();
    let cites = store.rel_id("CITES");
    let out: Vec<_> = txn
        .expand(a, Direction::Out, cites)
        .unwrap()
        .collect::<Result<_>>()
        .unwrap();
    assert_eq!(out.len(), 2);

    // Sink under that rel type.
    let out_b: Vec<_> = txn
        .expand(b, Direction::Out, None)
        .unwrap()
        .collect::<Result<_>>()
        .unwrap();
    assert!(out_b.is_empty());

    // both == out ∪ in as multisets.
    let both: Vec<_> = txn
        .expand(a, Direction::Both, None)
        .unwrap()
        .map(|h| h.unwrap().edge)
        .collect();
    let mut expected: Vec<_> = txn
        .expand(a, Direction::Out, None)
        .unwrap()
        .chain(txn.expand(a, Direction::In, None).unwrap())
        .map(|h| h.unwrap().edge)
        .collect();
    let mut got = both.clone();
    got.sort();
    expected.sort();
    assert_eq!(got, expected);
}

#[test]
fn get_property_and_hit_accounting() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let n = paper(&store, "p1", vec![0.1, 0.2], 3);

    let txn = store.begin_read();
    assert_eq!(
        txn.get_property(n, "features").unwrap(),
        Some(PropertyValue::Vector(vec![0.1, 0.2]))
    );
    assert_eq!(txn.get_property(n, "missing").unwrap(), None);

    let before = txn.db_hits();
    for _ in 0..10 {
        txn.get_property(n, "label").unwrap();
    }
    assert_eq!(txn.db_hits() - before, 10);
}

#[test]
fn index_seek_matches_and_charges() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let mut ids = Vec::new();
    for i in 0..10 {
        paper(&store, &format!("p{i}"), vec![0.0], 0);
        ids.push(IdKey::Str(format!("p{i}")));
    }
    let txn = store.begin_read();
    let hits = txn.node_index_seek("PAPER", "id", &ids).unwrap();
    assert_eq!(hits.len(), 10);
    assert_eq!(txn.db_hits(), 20);

    assert!(txn.node_index_seek("PAPER", "id", &[]).unwrap().is_empty());
    assert_eq!(txn.db_hits(), 20);

    let some_absent = vec![
        IdKey::Str("p1".into()),
        IdKey::Str("nope".into()),
        IdKey::Str("p2".into()),
    ];
    assert_eq!(txn.node_index_seek("PAPER", "id", &some_absent).unwrap().len(), 2);

    let err = txn.node_index_seek("PAPER", "title", &ids).unwrap_err();
    assert!(matches!(err, StoreError::IndexNotFound { .. }));
}

#[test]
fn stats_examples() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let s = store.stats();
    assert_eq!((s.node_count, s.edge_count), (0, 0));

    let mut nodes = Vec::new();
    for i in 0..10 {
        nodes.push(paper(&store, &format!("p{i}"), vec![0.0], 0));
    }
    for k in 0..98u64 {
        let src = nodes[(k % 10) as usize];
        let dst = nodes[((k + 3) % 10) as usize];
        store.create_edge(src, dst, "CITES", vec![]).unwrap();
    }
    let s = store.stats();
    assert_eq!(s.edge_count, 98);
    let (_, _, avg) = s
        .avg_out_degree
        .iter()
        .find(|(l, r, _)| &**l == "PAPER" && &**r == "CITES")
        .unwrap();
    assert!((avg - 9.8).abs() < 1e-12);
}

#[test]
fn multi_label_counts() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    store.create_node(&["PAPER", "AUTHOR"], vec![]).unwrap();
    store.create_node(&["PAPER"], vec![]).unwrap();
    let s = store.stats();
    let sum: u64 = s.label_counts.iter().map(|(_, c)| c).sum();
    assert_eq!(s.node_count, 2);
    assert_eq!(sum, 3);
}

#[test]
fn write_while_reader_open_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    paper(&store, "a", vec![0.0], 0);
    let txn = store.begin_read();
    let err = store.create_node(&["PAPER"], vec![]).unwrap_err();
    assert!(matches!(err, StoreError::WriteWhileRead(1)));
    drop(txn);
    store.create_node(&["PAPER"], vec![]).unwrap();
}

#[test]
fn read_only_store_rejects_writes() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    paper(&store, "a", vec![0.0], 0);
    store.flush().unwrap();
    drop(store);
    let ro = Store::open_read(dir.path(), StoreConfig::default()).unwrap();
    assert!(matches!(ro.create_node(&["X"], vec![]).unwrap_err(), StoreError::ReadOnly));
}

/// Round-trip: flush + reopen yields identical read results, and the DbHit
/// counts for the same reads are identical (hit determinism).
#[test]
fn reopen_round_trip_and_hit_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let mut rng_state = 9u64;
    let mut next = move || {
        rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
        rng_state >> 33
    };
    let mut nodes = Vec::new();
    for i in 0..50 {
        nodes.push(paper(&store, &format!("p{i}"), vec![i as f64, 0.5], (i % 4) as i64));
    }
    let mut edges = Vec::new();
    for _ in 0..200 {
        let a = nodes[(next() % 50) as usize];
        let b = nodes[(next() % 50) as usize];
        edges.push((a, b));
        store.create_edge(a, b, "CITES", vec![]).unwrap();
    }
    store.flush().unwrap();

    let observe = |store: &Store| {
        let txn = store.begin_read();
        let mut out: Vec<(Vec<ExpandHit>, Option<PropertyValue>, Vec<NodeId>, u64)> = Vec::new();
        for &n in &nodes {
            let hits: Vec<_> = txn
                .expand(n, Direction::Both, None)
                .unwrap()
                .collect::<Result<_>>()
                .unwrap();
            let f = txn.get_property(n, "features").unwrap();
            let seek = txn
                .node_index_seek("PAPER", "id", &[IdKey::Str(format!("p{}", n.0))])
                .unwrap();
            out.push((hits, f, seek, txn.db_hits()));
        }
        out
    };

    let before = observe(&store);
    drop(store);
    let reopened = Store::open_read(dir.path(), StoreConfig::default()).unwrap();
    let after = observe(&reopened);
    assert_eq!(before, after);
    // Determinism within one store state too.
    let again = observe(&reopened);
    assert_eq!(after, again);
}

/// Index/scan equivalence and degree conservation against a shadow graph.
#[test]
fn shadow_model_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let mut shadow_out: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut shadow_ids: HashMap<String, u64> = HashMap::new();

    let mut state = 77u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        state >> 33
    };
    let n = 80u64;
    for i in 0..n {
        let id = format!("n{i}");
        let node = store
            .create_node(&["PAPER"], vec![("id", pv_str(&id))])
            .unwrap();
        shadow_ids.insert(id, node.0);
    }
    for _ in 0..400 {
        let a = next() % n;
        let b = next() % n;
        store.create_edge(NodeId(a), NodeId(b), "CITES", vec![]).unwrap();
        shadow_out.entry(a).or_default().push(b);
    }

    let txn = store.begin_read();
    // Degree conservation.
    let mut out_sum = 0usize;
    let mut in_sum = 0usize;
    for i in 0..n {
        out_sum += txn.expand(NodeId(i), Direction::Out, None).unwrap().count();
        in_sum += txn.expand(NodeId(i), Direction::In, None).unwrap().count();
    }
    assert_eq!(out_sum as u64, store.edge_count());
    assert_eq!(in_sum as u64, store.edge_count());

    // Adjacency equals the shadow multiset.
    for i in 0..n {
        let mut got: Vec<u64> = txn
            .expand(NodeId(i), Direction::Out, None)
            .unwrap()
            .map(|h| h.unwrap().nbr.0)
            .collect();
        let mut want = shadow_out.get(&i).cloned().unwrap_or_default();
        got.sort();
        want.sort();
        assert_eq!(got, want, "out adjacency of {i}");
    }

    // Seek equals a full-scan filter.
    for probe in ["n0", "n17", "n79", "ghost"] {
        let seek = txn
            .node_index_seek("PAPER", "id", &[IdKey::Str(probe.into())])
            .unwrap();
        let scan: Vec<NodeId> = (0..n)
            .filter(|&i| {
                matches!(
                    txn.get_property(NodeId(i), "id").unwrap(),
                    Some(PropertyValue::Str(ref s)) if s == probe
                )
            })
            .map(NodeId)
            .collect();
        assert_eq!(seek, scan, "probe {probe}");
    }
}

#[test]
fn append_after_reopen_write() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::create(dir.path(), StoreConfig::default()).unwrap();
    let a = paper(&store, "a", vec![1.0], 0);
    store.flush().unwrap();
    drop(store);

    let store = Store::open_write(dir.path(), StoreConfig::default()).unwrap();
    let b = paper(&store, "b", vec![2.0], 1);
    store.create_edge(a, b, "CITES", vec![]).unwrap();
    store.flush().unwrap();
    drop(store);

    let ro = Store::open_read(dir.path(), StoreConfig::default()).unwrap();
    assert_eq!(ro.node_count(), 2);
    let txn = ro.begin_read();
    let hits: Vec<_> = txn
        .expand(a, Direction::Out, None)
        .unwrap()
        .collect::<Result<_>>()
        .unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].nbr, b);
}
