use lccs_lsh::bench::{gaussian_clusters, ClusterSpec};
use lccs_lsh::multiprobe::{generate_perturbations, mp_query, score_lists, DEFAULT_MAX_GAP};
use lccs_lsh::{IndexConfig, LccsIndex, LshFamily};
use proptest::prelude::*;

fn index(family: LshFamily, n: usize, m: usize, seed: u64) -> (LccsIndex, Vec<Vec<f32>>) {
    let (p, q) = gaussian_clusters(&ClusterSpec::new(12, 4), n, 8, seed).unwrap();
    let queries = q.rows().map(<[f32]>::to_vec).collect();
    (LccsIndex::build(p, &IndexConfig::new(family, m, seed)).unwrap(), queries)
}

#[test]
fn one_probe_is_the_plain_query() {
    for family in [LshFamily::random_projection(0.5).unwrap(), LshFamily::CrossPolytope] {
        let (idx, queries) = index(family, 500, 16, 1);
        for q in &queries {
            let (mp, stats) = mp_query(&idx, q, 5, 12, 1, DEFAULT_MAX_GAP).unwrap();
            assert_eq!(mp, idx.query(q, 5, 12).unwrap());
            assert_eq!(stats.probes, 1);
        }
    }
}

#[test]
fn more_probes_examine_a_superset() {
    let (idx, queries) = index(LshFamily::random_projection(0.4).unwrap(), 1500, 24, 2);
    for q in &queries {
        let mut previous: Vec<u32> = Vec::new();
        let mut best = f64::INFINITY;
        for probes in [1, 5, 25, 49] {
            let r = idx.query_multiprobe(q, 4, 6, probes, DEFAULT_MAX_GAP).unwrap();
            let ids: Vec<u32> = r.candidates.iter().map(|c| c.string_id).collect();
            assert_eq!(&ids[..previous.len()], &previous[..]);
            let mut distinct = ids.clone();
            distinct.sort_unstable();
            distinct.dedup();
            assert_eq!(distinct.len(), ids.len());
            assert!(r.distances[0] <= best);
            best = r.distances[0];
            previous = ids;
        }
    }
}

#[test]
fn candidate_count_is_bounded_by_budget() {
    let (idx, queries) = index(LshFamily::CrossPolytope, 800, 16, 3);
    for q in &queries {
        let (r, stats) = mp_query(&idx, q, 3, 7, 17, 2).unwrap();
        assert!(r.candidates_examined() <= 7 + 2 + 16 * 7);
        assert!(stats.probes <= 17);
    }
}

#[test]
fn saturated_pool_stops_probing() {
    let (idx, queries) = index(LshFamily::random_projection(1.0).unwrap(), 30, 8, 4);
    let (r, stats) = mp_query(&idx, &queries[0], 5, 10, 50, 2).unwrap();
    assert_eq!(r.candidates_examined(), 30);
    assert!(stats.probes < 50);
}

#[test]
fn rejects_bad_probe_arguments() {
    let (idx, queries) = index(LshFamily::random_projection(1.0).unwrap(), 30, 8, 5);
    assert!(mp_query(&idx, &queries[0], 1, 1, 0, 2).is_err());
    assert!(mp_query(&idx, &queries[0], 1, 1, 3, 0).is_err());
    assert!(mp_query(&idx, &queries[0], 0, 1, 3, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    // Perturbed hash strings stay distinct from each other and from the
    // query's own string, and their scores never decrease.
    #[test]
    fn perturbed_strings_are_distinct(seed in 0u64..500, probes in 2usize..60, gap in 1usize..4) {
        let (idx, queries) = index(LshFamily::random_projection(0.5).unwrap(), 40, 6, seed);
        let point = idx.prepare_query(&queries[0]).unwrap();
        let base = idx.hash_query(&queries[0]).unwrap();
        let alts = score_lists(idx.functions(), &point).unwrap();
        let p = generate_perturbations(&alts, probes, gap).unwrap();
        let mut strings: Vec<Vec<i64>> = p.vectors.iter().map(|v| v.apply(&base, &alts)).collect();
        prop_assert_eq!(&strings[0], &base);
        for w in p.vectors.windows(2) {
            prop_assert!(w[0].score() <= w[1].score());
        }
        let total = strings.len();
        strings.sort();
        strings.dedup();
        prop_assert_eq!(strings.len(), total);
    }
}
