use crate::model::{rank_cmp, RankedTuple, RankingFunction, SearchQuery, Tuple};
use crate::rerankmd::TopKResult;

/// Exact top-h by (score, id), read straight from the tuple list. Touches no interface.
pub fn brute_force_topk(
    tuples: &[Tuple],
    q: &SearchQuery,
    f: &RankingFunction,
    h: usize,
) -> TopKResult {
    let mut m: Vec<RankedTuple> = tuples
        .iter()
        .filter(|t| q.matches(t))
        .map(|t| RankedTuple::new(t.clone(), f))
        .collect();
    m.sort_by(|a, b| rank_cmp(a.key(), b.key()));
    let short = m.len() < h;
    m.truncate(h);
    let costs = vec![Default::default(); m.len()];
    TopKResult {
        tuples: m,
        costs,
        short,
        launches: 0,
        spent: Default::default(),
    }
}
