mod common;

use common::{cfg, db, new_history, rng};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rerank_core::access::{Probe, SystemRanking};
use rerank_core::config::{QueueOrder, TieHandling};
use rerank_core::model::{
    CategoricalAttr, OrdinalAttr, Orientation, RangePredicate, RankedTuple, RankingFunction,
    Schema, SearchQuery, Tuple, TupleId,
};
use rerank_core::rerankmd::{md_top1, md_topk, ta_over_1d, Indexes, MdStrategy};

const STRATEGIES: [MdStrategy; 3] = [MdStrategy::Baseline, MdStrategy::Binary, MdStrategy::Rerank];

fn schema(grid: bool) -> Schema {
    let a = |n: &str| {
        if grid {
            OrdinalAttr::grid(n, 0.0, 20.0, 1.0)
        } else {
            OrdinalAttr::continuous(n, 0.0, 100.0)
        }
    };
    Schema::new(
        vec![a("A"), a("B"), a("C")],
        vec![CategoricalAttr::new("K", ["x", "y", "z"])],
    )
    .unwrap()
}

/// Random tuples; no two agree on every attribute, since no query could tell them apart.
fn tuples(r: &mut ChaCha8Rng, s: &Schema, n: usize) -> Vec<Tuple> {
    let mut out: Vec<Tuple> = Vec::new();
    while out.len() < n {
        let ord: Vec<f64> = s
            .ordinal()
            .iter()
            .map(|a| match a.step() {
                Some(st) => (r.gen_range(0..=(a.width() / st) as i64) as f64) * st + a.lower,
                None => r.gen_range(a.lower..a.upper),
            })
            .collect();
        let cat = vec![["x", "y", "z"][r.gen_range(0..3)].to_string()];
        if out.iter().all(|t| t.ordinal != ord || t.categorical != cat) {
            out.push(Tuple::new(out.len() as u64, ord, cat));
        }
    }
    out
}

fn random_f(r: &mut ChaCha8Rng, m: usize) -> RankingFunction {
    let mut attrs = [0, 1, 2];
    attrs.shuffle(r);
    let terms: Vec<_> = attrs[..m]
        .iter()
        .map(|a| {
            let o = if r.gen_bool(0.5) {
                Orientation::SmallerPreferred
            } else {
                Orientation::LargerPreferred
            };
            (*a, r.gen_range(0.2..3.0), o)
        })
        .collect();
    RankingFunction::linear(&terms).unwrap()
}

fn random_q(r: &mut ChaCha8Rng, s: &Schema) -> SearchQuery {
    let mut q = SearchQuery::all();
    for (i, a) in s.ordinal().iter().enumerate() {
        if r.gen_bool(0.3) {
            let x = r.gen_range(a.lower..a.upper);
            let y = r.gen_range(a.lower..a.upper);
            q = q.with_range(RangePredicate::closed(i, x.min(y), x.max(y)));
        }
    }
    if r.gen_bool(0.3) {
        q = q.with_equality(0, ["x", "y", "z"][r.gen_range(0..3)]);
    }
    q
}

fn oracle(ts: &[Tuple], q: &SearchQuery, f: &RankingFunction, h: usize) -> Vec<TupleId> {
    let mut m: Vec<(f64, TupleId)> = ts
        .iter()
        .filter(|t| q.matches(t))
        .map(|t| (f.eval(t), t.id))
        .collect();
    m.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    m.into_iter().take(h).map(|x| x.1).collect()
}

fn ids(ts: &[RankedTuple]) -> Vec<TupleId> {
    ts.iter().map(|t| t.tuple.id).collect()
}

fn system(r: &mut ChaCha8Rng) -> SystemRanking {
    match r.gen_range(0..3) {
        0 => SystemRanking::Random { seed: r.gen() },
        _ => {
            let m = r.gen_range(1..=3);
            SystemRanking::Function(random_f(r, m))
        }
    }
}

fn check(grid: bool, ties: TieHandling, seeds: std::ops::Range<u64>) {
    for seed in seeds {
        let mut r = rng(seed);
        let s = schema(grid);
        let n = r.gen_range(1..200);
        let ts = tuples(&mut r, &s, n);
        let k = [1, 3, 10][r.gen_range(0..3)];
        let sys = system(&mut r);
        let d = db(s.clone(), ts.clone(), sys, k);
        let m = r.gen_range(1..=3);
        let f = random_f(&mut r, m);
        let q = random_q(&mut r, &s);
        let h = r.gen_range(1..8);
        let mut c = cfg(n, k).with_ties(ties);
        if r.gen_bool(0.3) {
            c.queue = QueueOrder::Fifo;
        }
        let want = oracle(&ts, &q, &f, h);
        for st in STRATEGIES {
            let mut hist = new_history();
            let mut p = Probe::new(&d, &mut hist, "md", 0);
            let mut idx = Indexes::new();
            let top = md_top1(&mut p, &mut idx, &c, &q, &f, st).unwrap();
            assert_eq!(
                top.map(|t| t.tuple.id),
                want.first().copied(),
                "top1 seed {seed} {st:?}"
            );
            let mut hist = new_history();
            let mut p = Probe::new(&d, &mut hist, "md", 1);
            let res = md_topk(&mut p, &mut idx, &c, &q, &f, h, st).unwrap();
            assert_eq!(ids(&res.tuples), want, "topk seed {seed} {st:?}");
            assert_eq!(res.short, want.len() < h);
            assert!(res.costs.windows(2).all(|w| w[0].total() <= w[1].total()));
        }
        let mut hist = new_history();
        let mut p = Probe::new(&d, &mut hist, "ta", 0);
        let res = ta_over_1d(&mut p, &mut Indexes::new(), &c, &q, &f, h).unwrap();
        let got: Vec<f64> = res.tuples.iter().map(|t| t.score).collect();
        let exp: Vec<f64> = want.iter().map(|id| f.eval(&ts[id.0 as usize])).collect();
        assert_eq!(got, exp, "ta seed {seed}");
    }
}

#[test]
fn continuous_instances_match_the_oracle() {
    check(false, TieHandling::Resolve, 0..150);
}

#[test]
fn continuous_instances_assuming_distinct_values() {
    check(false, TieHandling::AssumeDistinct, 150..250);
}

#[test]
fn grid_instances_with_ties_match_the_oracle() {
    check(true, TieHandling::Resolve, 250..400);
}
