use std::collections::HashSet;

use super::{CostLedger, TopKInterface};
use crate::model::{
    rank_cmp, Orientation, QueryOutcome, RankingFunction, Schema, SearchQuery, Tuple,
};
use crate::{Error, Result};

/// The database's own ordering of tuples.
#[derive(Clone, Debug)]
pub enum SystemRanking {
    Function(RankingFunction),
    /// A fixed pseudo-random permutation of tuple ids.
    Random {
        seed: u64,
    },
}

impl SystemRanking {
    /// Parses a linear ranking spec, or `random:SEED`.
    pub fn parse(spec: &str, schema: &Schema) -> Result<Self> {
        match spec.trim().strip_prefix("random:") {
            Some(seed) => seed
                .trim()
                .parse()
                .map(|seed| SystemRanking::Random { seed })
                .map_err(|_| Error::InvalidRanking(format!("bad random seed in {spec:?}"))),
            None => RankingFunction::parse(spec, schema).map(SystemRanking::Function),
        }
    }

    pub fn describe(&self, schema: &Schema) -> String {
        match self {
            SystemRanking::Function(f) => f.describe(schema),
            SystemRanking::Random { seed } => format!("random:{seed}"),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// An in-memory database behind a top-k interface.
#[derive(Debug)]
pub struct SimulatedDatabase {
    schema: Schema,
    /// Tuples in system-rank order.
    tuples: Vec<Tuple>,
    system: SystemRanking,
    system_k: usize,
    order_by: bool,
    ledger: CostLedger,
}

impl SimulatedDatabase {
    pub fn new(
        schema: Schema,
        mut tuples: Vec<Tuple>,
        system: SystemRanking,
        system_k: usize,
    ) -> Result<Self> {
        if system_k == 0 {
            return Err(Error::InvalidConfig("system k must be positive".into()));
        }
        let mut ids = HashSet::with_capacity(tuples.len());
        for t in &tuples {
            t.check(&schema)?;
            if !ids.insert(t.id) {
                return Err(Error::SchemaMismatch(format!(
                    "duplicate tuple id {}",
                    t.id
                )));
            }
        }
        match &system {
            SystemRanking::Function(f) => {
                f.validate(&schema)?;
                let mut keyed: Vec<(f64, Tuple)> =
                    tuples.into_iter().map(|t| (f.eval(&t), t)).collect();
                keyed.sort_by(|a, b| rank_cmp((a.0, a.1.id), (b.0, b.1.id)));
                tuples = keyed.into_iter().map(|(_, t)| t).collect();
            }
            SystemRanking::Random { seed } => {
                tuples.sort_by_key(|t| (splitmix64(seed ^ splitmix64(t.id.0)), t.id));
            }
        }
        Ok(SimulatedDatabase {
            schema,
            tuples,
            system,
            system_k,
            order_by: false,
            ledger: CostLedger::new(),
        })
    }

    /// Enables the ORDER BY option of the interface.
    pub fn with_order_by(mut self, enabled: bool) -> Self {
        self.order_by = enabled;
        self
    }

    pub fn order_by(&self) -> bool {
        self.order_by
    }

    /// All tuples in system-rank order. Reading them bypasses the interface.
    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn system_ranking(&self) -> &SystemRanking {
        &self.system
    }
}

impl TopKInterface for SimulatedDatabase {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn system_k(&self) -> usize {
        self.system_k
    }

    fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    fn respond(&self, q: &SearchQuery) -> Result<QueryOutcome> {
        Ok(QueryOutcome::from_ranked(
            self.system_k,
            self.tuples.iter().filter(|t| q.matches(t)).cloned(),
        ))
    }

    fn respond_ordered(
        &self,
        q: &SearchQuery,
        attr: usize,
        o: Orientation,
    ) -> Option<Result<QueryOutcome>> {
        if !self.order_by {
            return None;
        }
        let mut m: Vec<&Tuple> = self.tuples.iter().filter(|t| q.matches(t)).collect();
        m.sort_by(|a, b| {
            o.canonical(a.ordinal[attr])
                .total_cmp(&o.canonical(b.ordinal[attr]))
                .then(a.id.cmp(&b.id))
        });
        Some(Ok(QueryOutcome::from_ranked(
            self.system_k,
            m.into_iter().cloned(),
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::{execute, Charge, HistoryStore, Phase};
    use crate::model::{OrdinalAttr, RangePredicate, Status};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn schema() -> Schema {
        Schema::new(
            vec![
                OrdinalAttr::continuous("AIR_TIME", 0.0, 1000.0),
                OrdinalAttr::continuous("TAXI_IN", 0.0, 100.0),
            ],
            vec![],
        )
        .unwrap()
    }

    fn random_tuples(n: usize, seed: u64) -> Vec<Tuple> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                Tuple::ordinal(
                    i as u64,
                    vec![rng.gen_range(0.0..1000.0), rng.gen_range(0.0..100.0)],
                )
            })
            .collect()
    }

    #[test]
    fn execute_statuses_and_ledger() {
        let s = schema();
        let sr1 = SystemRanking::parse("0.3*AIR_TIME + TAXI_IN", &s).unwrap();
        let db = SimulatedDatabase::new(s.clone(), random_tuples(3, 1), sr1.clone(), 10).unwrap();
        let mut h = HistoryStore::new();
        let c = Charge::new("t", 0, Phase::Search);
        let out = execute(&db, &mut h, &c, &SearchQuery::all()).unwrap();
        assert_eq!((out.status, out.tuples.len()), (Status::Valid, 3));
        let none = SearchQuery::all().with_range(RangePredicate::closed(0, 2000.0, 3000.0));
        assert_eq!(
            execute(&db, &mut h, &c, &none).unwrap().status,
            Status::Underflow
        );

        let ts = random_tuples(25, 2);
        let db = SimulatedDatabase::new(s.clone(), ts.clone(), sr1.clone(), 10).unwrap();
        let out = execute(&db, &mut h, &c, &SearchQuery::all()).unwrap();
        let SystemRanking::Function(f) = &sr1 else {
            unreachable!()
        };
        let mut local = ts.clone();
        local.sort_by(|a, b| f.eval(a).total_cmp(&f.eval(b)));
        assert_eq!(out.status, Status::Overflow);
        assert_eq!(out.tuples, local[..10].to_vec());
        assert_eq!(db.ledger().total(), 1);

        let bad = SearchQuery::all().with_range(RangePredicate::closed(7, 0.0, 1.0));
        assert!(execute(&db, &mut h, &c, &bad).is_err());
        assert_eq!(db.ledger().total(), 1);
    }

    #[test]
    fn overflow_answers_match_local_topk() {
        let s = schema();
        let ts = random_tuples(500, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for system in [
            SystemRanking::parse("-1*AIR_TIME + 0.5*TAXI_IN", &s).unwrap(),
            SystemRanking::Random { seed: 9 },
        ] {
            let db = SimulatedDatabase::new(s.clone(), ts.clone(), system, 7).unwrap();
            let order: Vec<_> = db.tuples().iter().map(|t| t.id).collect();
            for _ in 0..200 {
                let a = rng.gen_range(0.0..1000.0);
                let b = rng.gen_range(a..1000.0);
                let q =
                    SearchQuery::all().with_range(RangePredicate::new(0, a, rng.gen(), b, false));
                let out = db.respond(&q).unwrap();
                let expect: Vec<_> = order
                    .iter()
                    .filter(|id| q.matches(&ts[id.0 as usize]))
                    .take(7)
                    .collect();
                assert_eq!(out.tuples.iter().map(|t| &t.id).collect::<Vec<_>>(), expect);
                assert!(out.tuples.iter().all(|t| q.matches(t)));
            }
        }
    }

    #[test]
    fn rejects_bad_tuples() {
        let s = schema();
        let out_of_domain = vec![Tuple::ordinal(0, vec![2000.0, 1.0])];
        assert!(SimulatedDatabase::new(
            s.clone(),
            out_of_domain,
            SystemRanking::Random { seed: 0 },
            5
        )
        .is_err());
        let dup = vec![
            Tuple::ordinal(0, vec![1.0, 1.0]),
            Tuple::ordinal(0, vec![2.0, 1.0]),
        ];
        assert!(SimulatedDatabase::new(s, dup, SystemRanking::Random { seed: 0 }, 5).is_err());
    }
}
