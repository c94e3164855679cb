use std::collections::BTreeMap;

use forcelayout::ranker::Precomputed;
use forcelayout::*;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = [f64; 3]> {
    [0.01..10.0f64, 0.01..10.0f64, 0.01..10.0f64]
}

fn asset(i: usize, dims: [f64; 3], s: f64, clip: f64) -> AssetRecord {
    AssetRecord {
        id: format!("asset_{i:03}"),
        description: String::new(),
        dims,
        semantic: None,
        views: Vec::new(),
        sims: BTreeMap::from([("q".to_string(), Precomputed { s_sbert: Some(s), s_clip_views: vec![clip] })]),
    }
}

fn catalog() -> impl Strategy<Value = Vec<AssetRecord>> {
    prop::collection::vec((dims(), 0.0..1.0f64, 0.0..1.0f64), 1..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            // coarse similarities so ties actually happen
            .map(|(i, (d, s, c))| asset(i, d, (s * 8.0).round() / 8.0, (c * 8.0).round() / 8.0))
            .collect()
    })
}

fn query(target: [f64; 3]) -> Query {
    Query { id: "q".into(), target_dims: target, semantic: None, visual: None }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn size_score_is_scale_invariant(t in dims(), a in dims(), st in 0.01..100.0f64, sa in 0.01..100.0f64) {
        let base = size_score(t, a, 10.0).unwrap();
        let scaled = size_score(t.map(|x| x * st), a.map(|x| x * sa), 10.0).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12);
        prop_assert!(base > 0.0 && base <= 1.0);
        prop_assert_eq!(size_score(t, t, 10.0).unwrap(), 1.0);
        prop_assert!((size_score(t, t.map(|x| x * sa), 10.0).unwrap() - 1.0).abs() <= 1e-12);
        if a.iter().zip(&t).any(|(x, y)| (x / a[0] - y / t[0]).abs() > 1e-6) {
            prop_assert!(base < 1.0);
        }
    }

    #[test]
    fn rank_is_a_stable_permutation(cat in catalog(), target in dims(), top_k in 1usize..50, rot in 0usize..40) {
        let w = RankWeights { top_k, ..Default::default() };
        let out = rank(&query(target), &Catalog { assets: cat.clone() }, &w).unwrap();
        prop_assert_eq!(out.len(), top_k.min(cat.len()));

        // survivors of stage one are exactly the top_k by semantic score, smaller id on ties
        let mut by_sem: Vec<_> = cat.iter().map(|a| (a.sims["q"].s_sbert.unwrap(), a.id.clone())).collect();
        by_sem.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| x.1.cmp(&y.1)));
        let mut want: Vec<String> = by_sem.into_iter().take(top_k).map(|x| x.1).collect();
        let mut got: Vec<String> = out.iter().map(|c| c.id.clone()).collect();
        want.sort();
        got.sort();
        prop_assert_eq!(want, got);
        for pair in out.windows(2) {
            prop_assert!(pair[0].score > pair[1].score || (pair[0].score == pair[1].score && pair[0].id < pair[1].id));
        }

        let mut shuffled = cat;
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        prop_assert_eq!(rank(&query(target), &Catalog { assets: shuffled }, &w).unwrap(), out);
    }

    #[test]
    fn better_similarity_never_lowers_rank(cat in catalog(), target in dims(), pick in 0usize..40, bump in 0.0..0.5f64, visual in any::<bool>()) {
        let w = RankWeights { top_k: 1000, ..Default::default() };
        let i = pick % cat.len();
        let id = cat[i].id.clone();
        let pos = |assets: &[AssetRecord]| {
            rank(&query(target), &Catalog { assets: assets.to_vec() }, &w).unwrap().iter().position(|c| c.id == id).unwrap()
        };
        let before = pos(&cat);
        let mut better = cat.clone();
        let p = better[i].sims.get_mut("q").unwrap();
        if visual {
            p.s_clip_views[0] += bump;
        } else {
            *p.s_sbert.as_mut().unwrap() += bump;
        }
        prop_assert!(pos(&better) <= before);
    }
}
