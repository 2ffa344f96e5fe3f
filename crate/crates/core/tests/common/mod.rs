#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rerank_core::access::{HistoryStore, SimulatedDatabase, SystemRanking};
use rerank_core::config::{DenseIndexParams, RerankConfig};
use rerank_core::model::{CategoricalAttr, OrdinalAttr, Orientation, Schema, SearchQuery, Tuple};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One continuous attribute `A` on [0, 1000] plus a categorical `C`.
pub fn schema_1d() -> Schema {
    Schema::new(
        vec![OrdinalAttr::continuous("A", 0.0, 1000.0)],
        vec![CategoricalAttr::new("C", ["x", "y"])],
    )
    .unwrap()
}

pub fn tuples_1d(values: &[f64]) -> Vec<Tuple> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| Tuple::new(i as u64, vec![*v], vec!["x".into()]))
        .collect()
}

pub fn db(schema: Schema, ts: Vec<Tuple>, system: SystemRanking, k: usize) -> SimulatedDatabase {
    SimulatedDatabase::new(schema, ts, system, k).unwrap()
}

pub fn cfg(n: usize, k: usize) -> RerankConfig {
    RerankConfig::new(DenseIndexParams::defaults(n, k))
}

pub fn new_history() -> HistoryStore {
    HistoryStore::new()
}

/// Matching tuples sorted by (key, id) on one attribute.
pub fn sorted_matches(ts: &[Tuple], q: &SearchQuery, attr: usize, o: Orientation) -> Vec<Tuple> {
    let mut m: Vec<Tuple> = ts.iter().filter(|t| q.matches(t)).cloned().collect();
    m.sort_by(|a, b| {
        o.canonical(a.ordinal[attr])
            .total_cmp(&o.canonical(b.ordinal[attr]))
            .then(a.id.cmp(&b.id))
    });
    m
}

pub fn uniform_values(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(lo..hi)).collect()
}
