//! Two-stage asset retrieval: semantic recall, then fused semantic, visual
//! and aspect-ratio re-ranking. Similarities or embeddings are inputs.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::RankError;

/// Similarities of one asset against one query, computed elsewhere.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Precomputed {
    pub s_sbert: Option<f64>,
    /// Visual similarity per rendered view.
    #[serde(default)]
    pub s_clip_views: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetRecord {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub dims: [f64; 3],
    #[serde(default)]
    pub semantic: Option<Vec<f64>>,
    /// Visual embedding per view.
    #[serde(default)]
    pub views: Vec<Vec<f64>>,
    /// Query id → precomputed similarities.
    #[serde(default)]
    pub sims: BTreeMap<String, Precomputed>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub assets: Vec<AssetRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Query {
    #[serde(default)]
    pub id: String,
    pub target_dims: [f64; 3],
    #[serde(default)]
    pub semantic: Option<Vec<f64>>,
    #[serde(default)]
    pub visual: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    /// Size-score sensitivity.
    pub k: f64,
    /// Stage-one recall count.
    pub top_k: usize,
}

impl Default for RankWeights {
    fn default() -> Self {
        Self { w1: 5.0, w2: 85.0, w3: 10.0, k: 10.0, top_k: 60 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub id: String,
    pub s_sbert: f64,
    pub s_clip: f64,
    pub s_size: f64,
    pub score: f64,
}

fn normalized(dims: [f64; 3]) -> [f64; 3] {
    let m = dims[0].max(dims[1]).max(dims[2]);
    [dims[0] / m, dims[1] / m, dims[2] / m]
}

/// `exp(-k · mean |t̂ - â|)` with both dimension vectors divided by their largest entry.
pub fn size_score(target: [f64; 3], asset: [f64; 3], k: f64) -> Result<f64, RankError> {
    for (name, d) in [("target", target), ("asset", asset)] {
        if !d.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(RankError::NonPositiveDimension(name.to_string()));
        }
    }
    let (t, a) = (normalized(target), normalized(asset));
    let mean = t.iter().zip(&a).map(|(x, y)| (x - y).abs()).sum::<f64>() / 3.0;
    Ok((-k * mean).exp())
}

pub fn final_score(s_sbert: f64, s_clip: f64, s_size: f64, w: &RankWeights) -> f64 {
    w.w1 * s_sbert + w.w2 * s_clip + w.w3 * s_size
}

/// Similarity from squared L2 distance: `1 / (1 + d²)`.
pub fn l2_similarity(a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    1.0 / (1.0 + d2)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

fn semantic_similarity(query: &Query, asset: &AssetRecord) -> Result<f64, RankError> {
    if let (Some(q), Some(a)) = (&query.semantic, &asset.semantic) {
        if q.len() != a.len() {
            return Err(RankError::DimensionMismatch { id: asset.id.clone(), query: q.len(), asset: a.len() });
        }
        return Ok(l2_similarity(q, a));
    }
    asset
        .sims
        .get(&query.id)
        .and_then(|p| p.s_sbert)
        .ok_or_else(|| RankError::MissingSemantic(asset.id.clone()))
}

fn visual_similarity(query: &Query, asset: &AssetRecord) -> Result<f64, RankError> {
    if let Some(q) = &query.visual {
        if !asset.views.is_empty() {
            for v in &asset.views {
                if v.len() != q.len() {
                    return Err(RankError::DimensionMismatch { id: asset.id.clone(), query: q.len(), asset: v.len() });
                }
            }
            return Ok(max_of(asset.views.iter().map(|v| cosine(q, v))).unwrap_or(0.0));
        }
    }
    asset
        .sims
        .get(&query.id)
        .and_then(|p| max_of(p.s_clip_views.iter().copied()))
        .ok_or_else(|| RankError::MissingVisual(asset.id.clone()))
}

fn by_desc_then_id(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

/// Stage one keeps the `top_k` semantically closest assets, stage two orders
/// them by fused score. Ties go to the smaller id.
pub fn rank(query: &Query, catalog: &Catalog, w: &RankWeights) -> Result<Vec<Candidate>, RankError> {
    if catalog.assets.is_empty() {
        return Err(RankError::EmptyCatalog);
    }
    let mut recalled = catalog
        .assets
        .iter()
        .map(|a| Ok((semantic_similarity(query, a)?, a)))
        .collect::<Result<Vec<_>, RankError>>()?;
    recalled.sort_by(|x, y| by_desc_then_id((x.0, &x.1.id), (y.0, &y.1.id)));
    recalled.truncate(w.top_k.max(1));

    let mut out = recalled
        .into_iter()
        .map(|(s_sbert, a)| {
            let s_clip = visual_similarity(query, a)?;
            let s_size = size_score(query.target_dims, a.dims, w.k)
                .map_err(|_| RankError::NonPositiveDimension(a.id.clone()))?;
            Ok(Candidate { id: a.id.clone(), s_sbert, s_clip, s_size, score: final_score(s_sbert, s_clip, s_size, w) })
        })
        .collect::<Result<Vec<_>, RankError>>()?;
    out.sort_by(|x, y| by_desc_then_id((x.score, &x.id), (y.score, &y.id)));
    Ok(out)
}

pub fn write_candidates_csv<W: Write>(cands: &[Candidate], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "id", "s_sbert", "s_clip", "s_size", "score"])?;
    for (i, c) in cands.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            c.id.clone(),
            format!("{:.6}", c.s_sbert),
            format!("{:.6}", c.s_clip),
            format!("{:.6}", c.s_size),
            format!("{:.6}", c.score),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asset(id: &str, dims: [f64; 3], s: f64, clip: f64) -> AssetRecord {
        AssetRecord {
            id: id.into(),
            description: String::new(),
            dims,
            semantic: None,
            views: Vec::new(),
            sims: BTreeMap::from([("q".to_string(), Precomputed { s_sbert: Some(s), s_clip_views: vec![clip] })]),
        }
    }

    fn query(dims: [f64; 3]) -> Query {
        Query { id: "q".into(), target_dims: dims, semantic: None, visual: None }
    }

    #[test]
    fn size_score_examples() {
        assert_eq!(size_score([2.0, 1.0, 1.0], [4.0, 2.0, 2.0], 10.0).unwrap(), 1.0);
        let s = size_score([1.0, 1.0, 1.0], [2.0, 1.0, 1.0], 10.0).unwrap();
        assert!((s - (-10.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!(size_score([1.0, 0.0, 1.0], [1.0, 1.0, 1.0], 10.0).is_err());
    }

    #[test]
    fn final_score_examples() {
        let w = RankWeights::default();
        assert_eq!(final_score(1.0, 1.0, 1.0, &w), 100.0);
        assert_eq!(final_score(0.0, 0.0, 0.0, &w), 0.0);
    }

    #[test]
    fn clip_is_max_over_views() {
        let mut a = asset("a", [1.0, 1.0, 1.0], 0.5, 0.0);
        a.sims.get_mut("q").unwrap().s_clip_views = vec![0.2, 0.7, 0.5];
        let c = rank(&query([1.0, 1.0, 1.0]), &Catalog { assets: vec![a] }, &RankWeights::default()).unwrap();
        assert_eq!(c[0].s_clip, 0.7);
    }

    #[test]
    fn matching_aspect_wins_ties() {
        let cat = Catalog {
            assets: vec![asset("a_wide", [3.0, 1.0, 1.0], 0.5, 0.5), asset("b_match", [2.0, 1.0, 1.0], 0.5, 0.5)],
        };
        let c = rank(&query([4.0, 2.0, 2.0]), &cat, &RankWeights::default()).unwrap();
        assert_eq!(c[0].id, "b_match");
    }

    #[test]
    fn recall_clamps_to_catalog() {
        let cat = Catalog { assets: (0..5).map(|i| asset(&format!("a{i}"), [1.0, 1.0, 1.0], 0.1 * i as f64, 0.1)).collect() };
        assert_eq!(rank(&query([1.0, 1.0, 1.0]), &cat, &RankWeights::default()).unwrap().len(), 5);
        let w = RankWeights { top_k: 2, ..Default::default() };
        let ids: Vec<_> = rank(&query([1.0, 1.0, 1.0]), &cat, &w).unwrap().into_iter().map(|c| c.id).collect();
        assert_eq!(ids, vec!["a4", "a3"]);
    }

    #[test]
    fn embeddings_are_compared_directly() {
        let mut a = asset("a", [1.0, 1.0, 1.0], 0.0, 0.0);
        a.sims.clear();
        a.semantic = Some(vec![1.0, 0.0]);
        a.views = vec![vec![0.0, 1.0], vec![1.0, 1.0]];
        let q = Query { id: String::new(), target_dims: [1.0, 1.0, 1.0], semantic: Some(vec![0.0, 0.0]), visual: Some(vec![1.0, 0.0]) };
        let c = rank(&q, &Catalog { assets: vec![a.clone()] }, &RankWeights::default()).unwrap();
        assert_eq!(c[0].s_sbert, 0.5);
        assert!((c[0].s_clip - 0.5f64.sqrt()).abs() < 1e-12);

        let bad = Query { semantic: Some(vec![0.0; 3]), ..q };
        assert!(matches!(rank(&bad, &Catalog { assets: vec![a] }, &RankWeights::default()), Err(RankError::DimensionMismatch { .. })));
    }

    #[test]
    fn empty_catalog_is_an_error() {
        assert!(matches!(rank(&query([1.0; 3]), &Catalog::default(), &RankWeights::default()), Err(RankError::EmptyCatalog)));
    }
}
