mod common;

use common::*;
use rand::Rng;
use rerank_core::access::{AdversarialDatabase, Phase, Probe, SystemRanking, TopKInterface};
use rerank_core::config::TieHandling;
use rerank_core::interval::{Interval, Lower, Upper};
use rerank_core::model::{
    CategoricalAttr, OrdinalAttr, Orientation, RangePredicate, RankingFunction, Schema,
    SearchQuery, Tuple,
};
use rerank_core::rerank1d::{
    get_next_baseline, get_next_binary, get_next_reranked, oracle_lookup, Axis, DenseIndex1D,
    GetNext1D, Strategy1D,
};

const ASC: Orientation = Orientation::SmallerPreferred;

fn ascending_system() -> SystemRanking {
    SystemRanking::Function(RankingFunction::attribute(0, ASC))
}

fn descending_system() -> SystemRanking {
    SystemRanking::Function(RankingFunction::attribute(0, Orientation::LargerPreferred))
}

#[test]
fn baseline_aligned_system_costs_two_queries() {
    let d = db(
        schema_1d(),
        tuples_1d(&[1.0, 2.0, 3.0]),
        ascending_system(),
        5,
    );
    let mut h = new_history();
    let mut p = Probe::new(&d, &mut h, "t", 0);
    let t = get_next_baseline(
        &mut p,
        &cfg(3, 5),
        &SearchQuery::all(),
        Axis::new(0, ASC),
        None,
    )
    .unwrap()
    .unwrap();
    assert_eq!(t.ordinal[0], 1.0);
    assert_eq!(d.ledger().total(), 2);
}

#[test]
fn pivot_at_max_yields_none() {
    let ts = tuples_1d(&[1.0, 2.0, 3.0]);
    let d = db(schema_1d(), ts.clone(), ascending_system(), 1);
    let c = cfg(3, 1);
    let axis = Axis::new(0, ASC);
    let mut h = new_history();
    let mut p = Probe::new(&d, &mut h, "t", 0);
    assert!(
        get_next_baseline(&mut p, &c, &SearchQuery::all(), axis, Some(&ts[2]))
            .unwrap()
            .is_none()
    );
    assert!(
        get_next_binary(&mut p, &c, &SearchQuery::all(), axis, Some(&ts[2]))
            .unwrap()
            .is_none()
    );
    let mut idx = DenseIndex1D::new();
    assert!(get_next_reranked(
        &mut p,
        &mut idx,
        &c,
        &SearchQuery::all(),
        axis,
        Some(&ts[2])
    )
    .unwrap()
    .is_none());
}

#[test]
fn baseline_anti_aligned_k1_costs_r_plus_one() {
    let mut r = rng(11);
    let n = 40;
    let d = db(
        schema_1d(),
        tuples_1d(&uniform_values(&mut r, n, 1.0, 999.0)),
        descending_system(),
        1,
    );
    let mut h = new_history();
    let mut p = Probe::new(&d, &mut h, "t", 0);
    let c = cfg(n, 1).with_ties(TieHandling::AssumeDistinct);
    get_next_baseline(&mut p, &c, &SearchQuery::all(), Axis::new(0, ASC), None)
        .unwrap()
        .unwrap();
    assert_eq!(d.ledger().total(), n as u64 + 1);
}

#[test]
fn binary_single_tuple_is_cheap() {
    let d = db(schema_1d(), tuples_1d(&[42.0]), descending_system(), 1);
    let mut h = new_history();
    let mut p = Probe::new(&d, &mut h, "t", 0);
    let t = get_next_binary(
        &mut p,
        &cfg(1, 1),
        &SearchQuery::all(),
        Axis::new(0, ASC),
        None,
    )
    .unwrap()
    .unwrap();
    assert_eq!(t.ordinal[0], 42.0);
    assert!(d.ledger().total() <= 3);
}

/// Random 1D instance: values on a grid so that ties occur, a categorical filter and an optional range.
fn instance(seed: u64) -> (Schema, Vec<Tuple>, SystemRanking, usize, SearchQuery, Axis) {
    let mut r = rng(seed);
    let grid = r.gen_bool(0.5);
    let schema = if grid {
        Schema::new(
            vec![
                OrdinalAttr::grid("A", 0.0, 200.0, 1.0),
                OrdinalAttr::continuous("B", 0.0, 1.0),
            ],
            vec![CategoricalAttr::new("C", ["x", "y", "z"])],
        )
        .unwrap()
    } else {
        Schema::new(
            vec![
                OrdinalAttr::continuous("A", 0.0, 200.0),
                OrdinalAttr::continuous("B", 0.0, 1.0),
            ],
            vec![CategoricalAttr::new("C", ["x", "y", "z"])],
        )
        .unwrap()
    };
    let n = r.gen_range(1..=1000);
    let ts: Vec<Tuple> = (0..n)
        .map(|i| {
            let a = if grid {
                r.gen_range(0..=200) as f64
            } else {
                r.gen_range(0.0..200.0)
            };
            Tuple::new(
                i as u64,
                vec![a, r.gen_range(0.0..1.0)],
                vec![["x", "y", "z"][r.gen_range(0..3)].to_string()],
            )
        })
        .collect();
    let system = match r.gen_range(0..3) {
        0 => SystemRanking::Function(RankingFunction::attribute(0, ASC)),
        1 => SystemRanking::Function(RankingFunction::attribute(0, Orientation::LargerPreferred)),
        _ => SystemRanking::Random { seed },
    };
    let k = [1, 5, 10][r.gen_range(0..3)];
    let mut q = SearchQuery::all();
    if r.gen_bool(0.5) {
        q = q.with_equality(0, ["x", "y", "z"][r.gen_range(0..3)]);
    }
    if r.gen_bool(0.3) {
        let lo = r.gen_range(0.0..150.0);
        q = q.with_range(RangePredicate::new(
            0,
            lo,
            r.gen(),
            lo + r.gen_range(1.0..50.0),
            r.gen(),
        ));
    }
    if r.gen_bool(0.3) {
        q = q.with_range(RangePredicate::closed(1, 0.0, r.gen_range(0.2..1.0)));
    }
    let o = if r.gen_bool(0.5) {
        ASC
    } else {
        Orientation::LargerPreferred
    };
    (schema, ts, system, k, q, Axis::new(0, o))
}

#[test]
fn strategies_agree_with_sort_oracle() {
    for seed in 0..500u64 {
        let (schema, ts, system, k, q, axis) = instance(seed);
        let expect = sorted_matches(&ts, &q, 0, axis.orientation);
        let h_max = rng(seed ^ 0xabc).gen_range(1..=12);
        let d = db(schema, ts.clone(), system, k);
        let c = cfg(ts.len(), k);
        let mut idx = DenseIndex1D::new();
        for strategy in [Strategy1D::Baseline, Strategy1D::Binary, Strategy1D::Rerank] {
            let mut h = new_history();
            let mut p = Probe::new(&d, &mut h, "t", seed);
            let mut cur = GetNext1D::new(q.clone(), axis, strategy);
            let mut got = Vec::new();
            while got.len() < h_max {
                match cur.next(&mut p, &mut idx, &c).unwrap() {
                    Some(t) => got.push(t),
                    None => break,
                }
            }
            let want: Vec<_> = expect.iter().take(h_max).cloned().collect();
            assert_eq!(got, want, "seed {seed} strategy {strategy:?}");
        }
    }
}

#[test]
fn index_regions_are_sound_and_disjoint() {
    for seed in 0..60u64 {
        let (schema, ts, system, k, q, axis) = instance(seed);
        let d = db(schema, ts.clone(), system, k);
        let mut c = cfg(ts.len(), k);
        c.params.c = 1.0;
        let mut idx = DenseIndex1D::new();
        let mut h = new_history();
        let mut p = Probe::new(&d, &mut h, "t", seed);
        let mut cur = GetNext1D::new(q.clone(), axis, Strategy1D::Rerank);
        for _ in 0..10 {
            cur.next(&mut p, &mut idx, &c).unwrap();
        }
        let rs = idx.regions(axis);
        for w in rs.windows(2) {
            assert!(w[0].end <= w[1].start.v, "seed {seed}: overlapping regions");
        }
        for r in rs {
            let mut expect: Vec<Tuple> = ts
                .iter()
                .filter(|t| r.complete().contains(axis.key(t)))
                .cloned()
                .collect();
            expect.sort_by(|a, b| axis.key(a).total_cmp(&axis.key(b)).then(a.id.cmp(&b.id)));
            assert_eq!(r.discovered, expect, "seed {seed}");
        }
    }
}

#[test]
fn baseline_queries_always_reveal_new_matches() {
    let mut r = rng(5);
    for seed in 0..30u64 {
        let ts = tuples_1d(&uniform_values(&mut r, 300, 0.0, 1000.0));
        let d = db(schema_1d(), ts, SystemRanking::Random { seed }, 5);
        d.ledger().enable_trace();
        let mut h = new_history();
        let mut p = Probe::new(&d, &mut h, "t", 0);
        let mut cur = GetNext1D::new(SearchQuery::all(), Axis::new(0, ASC), Strategy1D::Baseline);
        let c = cfg(300, 5).with_ties(TieHandling::AssumeDistinct);
        for _ in 0..20 {
            let seen = p.history.len();
            cur.next(&mut p, &mut DenseIndex1D::new(), &c).unwrap();
            let revealing = d
                .ledger()
                .take_trace()
                .iter()
                .filter(|e| e.returned > 0)
                .count();
            assert!(
                revealing <= p.history.len() - seen,
                "seed {seed}: a non-underflow query revealed nothing new"
            );
        }
    }
}

#[test]
fn oracle_crawls_past_non_matching_tuples() {
    let ts = vec![
        Tuple::new(0, vec![5.0], vec!["y".into()]),
        Tuple::new(1, vec![5.1], vec!["x".into()]),
        Tuple::new(2, vec![900.0], vec!["x".into()]),
    ];
    let d = db(schema_1d(), ts, descending_system(), 1);
    let c = cfg(3, 1);
    let axis = Axis::new(0, ASC);
    let q = SearchQuery::all().with_equality(0, "x");
    let mut idx = DenseIndex1D::new();
    let mut h = new_history();
    let mut p = Probe::new(&d, &mut h, "t", 0);
    let range = Interval::new(Lower::open(4.0), Upper::open(6.0));
    let f = oracle_lookup(&mut p, &mut idx, &c, &q, axis, range)
        .unwrap()
        .unwrap();
    assert_eq!(f.best.ordinal[0], 5.1);
    // two crawl steps, each a shrinking scan plus a point query resolving ties
    let r = &idx.regions(axis)[0];
    assert_eq!(r.discovered.len(), 2);
    assert_eq!(d.ledger().counts("t", 0).search, 0);

    // a repeated lookup is answered from the index
    let before = d.ledger().total();
    let f2 = oracle_lookup(&mut p, &mut idx, &c, &q, axis, range)
        .unwrap()
        .unwrap();
    assert_eq!(f2.best, f.best);
    assert_eq!(d.ledger().total(), before);
}

#[test]
fn crawl_of_a_region_is_linear_in_its_size() {
    let mut r = rng(8);
    for seed in 0..20u64 {
        let vals = uniform_values(&mut r, 60, 100.0, 101.0);
        let mut all = vals.clone();
        all.extend(uniform_values(&mut r, 200, 200.0, 1000.0));
        let d = db(
            schema_1d(),
            tuples_1d(&all),
            SystemRanking::Random { seed },
            3,
        );
        d.ledger().enable_trace();
        let c = cfg(all.len(), 3).with_ties(TieHandling::AssumeDistinct);
        let mut idx = DenseIndex1D::new();
        let mut h = new_history();
        let mut p = Probe::new(&d, &mut h, "t", 0);
        let q = SearchQuery::all().with_equality(0, "y");
        let range = Interval::new(Lower::closed(100.0), Upper::open(101.0));
        assert!(
            oracle_lookup(&mut p, &mut idx, &c, &q, Axis::new(0, ASC), range)
                .unwrap()
                .is_none()
        );
        let trace = d.ledger().take_trace();
        let non_underflow = trace.iter().filter(|e| e.returned > 0).count();
        let underflow = trace.len() - non_underflow;
        assert!(
            non_underflow <= 60,
            "{non_underflow} non-underflow queries for 60 tuples"
        );
        assert!(underflow <= 61);
        assert!(trace.iter().all(|e| e.charge.phase == Phase::IndexBuild));
    }
}

#[test]
fn dense_cluster_is_paid_once() {
    let n = 1024;
    let k = 5;
    let params = rerank_core::config::DenseIndexParams::defaults(n, k);
    let mut r = rng(3);
    let width = params.threshold(1000.0) / 4.0;
    let mut vals = uniform_values(&mut r, params.s, 500.0, 500.0 + width);
    vals.extend(
        uniform_values(&mut r, n - params.s, 0.0, 1000.0)
            .into_iter()
            .filter(|v| !(499.0..502.0).contains(v)),
    );
    let mut ts = tuples_1d(&vals);
    for (i, t) in ts.iter_mut().enumerate() {
        t.categorical[0] = if i % 2 == 0 { "x".into() } else { "y".into() };
    }
    let d = db(schema_1d(), ts, descending_system(), k);
    let mut c = cfg(n, k).with_ties(TieHandling::AssumeDistinct);
    c.reuse_history = false;
    let mut idx = DenseIndex1D::new();
    let axis = Axis::new(0, ASC);
    let q = SearchQuery::all()
        .with_equality(0, "x")
        .with_range(RangePredicate::closed(0, 499.0, 1000.0));

    let mut h = new_history();
    let mut step_costs = Vec::new();
    for qid in [1u64, 2] {
        let mut p = Probe::new(&d, &mut h, "rerank", qid);
        let mut cur = GetNext1D::new(q.clone(), axis, Strategy1D::Rerank);
        let mut costs = Vec::new();
        for _ in 0..5 {
            let before = p.counts();
            let t = cur.next(&mut p, &mut idx, &c).unwrap().unwrap();
            assert!(t.ordinal[0] >= 500.0 && t.ordinal[0] <= 500.0 + width);
            costs.push(p.counts().since(&before));
        }
        step_costs.push(costs);
    }
    let first = d.ledger().counts("rerank", 1);
    let second = d.ledger().counts("rerank", 2);
    assert!(first.index_build > 0);
    assert_eq!(second.index_build, 0);
    for c in &step_costs[1][1..] {
        assert_eq!(c.total(), 0, "{:?}", step_costs[1]);
    }
}

#[test]
fn adversary_forces_n_over_k_queries() {
    for strategy in [Strategy1D::Baseline, Strategy1D::Binary, Strategy1D::Rerank] {
        let adv = AdversarialDatabase::new(0.0, 1000.0, 5, 100).unwrap();
        let mut h = new_history();
        let mut p = Probe::new(&adv, &mut h, "adv", 0);
        let c = cfg(100, 5);
        let t = GetNext1D::new(SearchQuery::all(), Axis::new(0, ASC), strategy)
            .next(&mut p, &mut DenseIndex1D::new(), &c)
            .unwrap()
            .unwrap();
        assert!(
            adv.ledger().total() >= 20,
            "{strategy:?} issued {}",
            adv.ledger().total()
        );
        adv.check_consistency().unwrap();
        let db = adv.materialized();
        let min = db
            .iter()
            .map(|t| t.ordinal[0])
            .fold(f64::INFINITY, f64::min);
        assert_eq!(t.ordinal[0], min);
    }
}
