use std::sync::Arc;

use lccs_lsh::bench::{gaussian_clusters, linear_scan, prepare_points, ClusterSpec};
use lccs_lsh::index::{StoredIndex, INDEX_MAGIC};
use lccs_lsh::lsh::Metric;
use lccs_lsh::{Error, IndexConfig, LccsIndex, LshFamily, PointSet};
use proptest::prelude::*;

fn clusters(n: usize, q: usize, seed: u64) -> (Arc<PointSet>, PointSet) {
    let (p, q) = gaussian_clusters(&ClusterSpec::new(16, 5), n, q, seed).unwrap();
    (Arc::new(p), q)
}

fn rp(w: f64) -> LshFamily {
    LshFamily::random_projection(w).unwrap()
}

#[test]
fn exhaustive_budget_equals_linear_scan() {
    let (points, queries) = clusters(400, 20, 3);
    for family in [rp(0.5), LshFamily::CrossPolytope] {
        let index = LccsIndex::build(points.clone(), &IndexConfig::new(family, 16, 9)).unwrap();
        let scan_points = prepare_points(&points, index.metric()).unwrap();
        for q in queries.rows() {
            let k = 7;
            let res = index.query(q, k, points.len() - k + 1).unwrap();
            assert!(res.exhaustive);
            assert_eq!(res.candidates_examined(), points.len());
            let prepared = index.prepare_query(q).unwrap();
            let (ids, dists) = linear_scan(&scan_points, &prepared, k);
            assert_eq!(res.ids, ids);
            for (a, b) in res.distances.iter().zip(&dists) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn candidate_sets_grow_with_lambda() {
    let (points, queries) = clusters(2000, 10, 4);
    let index = LccsIndex::build(points, &IndexConfig::new(rp(1.0), 32, 1)).unwrap();
    for q in queries.rows() {
        let small = index.query(q, 5, 20).unwrap();
        let large = index.query(q, 5, 200).unwrap();
        assert_eq!(small.candidates_examined(), 24);
        assert_eq!(large.candidates_examined(), 204);
        // The shorter search is a prefix of the longer one, so the nearest
        // distances can only improve.
        assert_eq!(&large.candidates[..24], &small.candidates[..]);
        for (a, b) in large.distances.iter().zip(&small.distances) {
            assert!(a <= b);
        }
    }
}

#[test]
fn save_load_round_trip() {
    let (points, queries) = clusters(300, 5, 5);
    let dir = tempfile::tempdir().unwrap();
    for (name, family) in [("rp", rp(0.7)), ("cp", LshFamily::CrossPolytope)] {
        let index = LccsIndex::build(points.clone(), &IndexConfig::new(family, 12, 77)).unwrap();
        let path = dir.path().join(format!("{name}.lccs"));
        index.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], INDEX_MAGIC);
        assert_eq!(bytes.len(), index.file_len());

        let loaded = LccsIndex::load(&path, points.clone()).unwrap();
        assert_eq!(loaded.hash_strings(), index.hash_strings());
        assert_eq!(loaded.shift_array(), index.shift_array());
        assert_eq!(loaded.seed(), 77);
        for q in queries.rows() {
            assert_eq!(loaded.query(q, 3, 10).unwrap(), index.query(q, 3, 10).unwrap());
        }
    }
}

#[test]
fn load_rejects_other_points() {
    let (points, _) = clusters(100, 1, 6);
    let index = LccsIndex::build(points.clone(), &IndexConfig::new(rp(1.0), 8, 0)).unwrap();
    let stored = StoredIndex::decode(&index.to_bytes()).unwrap();

    let mut changed = points.as_flat().to_vec();
    changed[17] += 1.0;
    let other = PointSet::new(points.dim(), changed).unwrap();
    assert!(stored.clone().attach(other).is_err());
    assert!(stored.clone().attach(points.truncated(99)).is_err());
    assert!(stored.attach(points).is_ok());
}

#[test]
fn corrupted_files_are_rejected() {
    let (points, _) = clusters(50, 1, 7);
    let index = LccsIndex::build(points, &IndexConfig::new(rp(1.0), 8, 0)).unwrap();
    let bytes = index.to_bytes();
    for cut in [0, 3, 40, 69, bytes.len() - 1] {
        assert!(matches!(StoredIndex::decode(&bytes[..cut]), Err(Error::Format { .. })), "cut {cut}");
    }
    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(StoredIndex::decode(&trailing).is_err());
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(StoredIndex::decode(&magic).is_err());
    let mut version = bytes;
    version[4] = 99;
    assert!(StoredIndex::decode(&version).is_err());
}

#[test]
fn angular_index_ignores_scale() {
    let (points, queries) = clusters(300, 5, 8);
    let scaled: Vec<f32> = points.as_flat().iter().map(|x| 3.5 * x).collect();
    let scaled = PointSet::new(points.dim(), scaled).unwrap();
    let config = IndexConfig::new(LshFamily::CrossPolytope, 16, 2);
    let a = LccsIndex::build(points, &config).unwrap();
    let b = LccsIndex::build(scaled, &config).unwrap();
    assert_eq!(a.metric(), Metric::Angular);
    assert_eq!(a.hash_strings(), b.hash_strings());
    for q in queries.rows() {
        assert_eq!(a.query(q, 5, 20).unwrap().ids, b.query(q, 5, 20).unwrap().ids);
    }
}

#[test]
fn query_validation() {
    let (points, _) = clusters(50, 1, 9);
    let index = LccsIndex::build(points, &IndexConfig::new(rp(1.0), 8, 0)).unwrap();
    let q = vec![0.0f32; 16];
    assert!(index.query(&q, 0, 5).is_err());
    assert!(index.query(&q, 5, 0).is_err());
    assert!(matches!(index.query(&q[..3], 1, 1), Err(Error::DimensionMismatch { .. })));
    let mut bad = q.clone();
    bad[2] = f32::NAN;
    assert!(index.query(&bad, 1, 1).is_err());
    // Asking for more than exists gives everything, flagged as short.
    let res = index.query(&q, 80, 1).unwrap();
    assert!(res.short);
    assert_eq!(res.ids.len(), 50);
}

#[test]
fn same_seed_same_index() {
    let (points, _) = clusters(200, 1, 10);
    let config = IndexConfig::new(rp(0.8), 20, 123);
    let a = LccsIndex::build(points.clone(), &config).unwrap();
    let b = LccsIndex::build(points.clone(), &config).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    let c = LccsIndex::build(points, &IndexConfig::new(rp(0.8), 20, 124)).unwrap();
    assert_ne!(a.hash_strings(), c.hash_strings());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn results_are_sorted_distinct_and_exact(seed in 0u64..1000, k in 1usize..8, lambda in 1usize..40) {
        let (points, queries) = clusters(150, 3, seed);
        let index = LccsIndex::build(points.clone(), &IndexConfig::new(rp(0.6), 10, seed)).unwrap();
        for q in queries.rows() {
            let res = index.query(q, k, lambda).unwrap();
            prop_assert_eq!(res.candidates_examined(), (lambda + k - 1).min(150));
            prop_assert_eq!(res.ids.len(), k);
            for w in res.distances.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let mut ids = res.ids.clone();
            ids.sort_unstable();
            ids.dedup();
            prop_assert_eq!(ids.len(), k);
            for (&id, &d) in res.ids.iter().zip(&res.distances) {
                let exact: f64 = points.row(id as usize).iter().zip(q)
                    .map(|(a, b)| (*a as f64 - *b as f64).powi(2)).sum::<f64>().sqrt();
                prop_assert!((exact - d).abs() < 1e-6);
                prop_assert!(res.candidates.iter().any(|c| c.string_id == id));
            }
        }
    }
}
