use std::sync::Mutex;

use super::{CostLedger, TopKInterface};
use crate::interval::Interval;
use crate::model::{OrdinalAttr, QueryOutcome, Schema, SearchQuery, Status, Tuple, TupleId};
use crate::{Error, Result};

#[derive(Debug)]
struct State {
    vq: f64,
    fabricated: Vec<Tuple>,
    /// Set once the budget runs out; answers are honest from then on.
    hidden: Option<Tuple>,
    calls: Vec<(SearchQuery, QueryOutcome)>,
}

/// A single-attribute interface that makes any reranking strategy pay at
/// least n/k queries to find the smallest value.
///
/// Queries whose range starts at the domain bottom `v_0` overflow with freshly
/// fabricated tuples just below the min-query-threshold `v_q`; every other
/// query is answered from tuples fabricated so far. After `n - 1` tuples the
/// adversary commits to one extra hidden tuple and answers honestly.
#[derive(Debug)]
pub struct AdversarialDatabase {
    schema: Schema,
    v0: f64,
    k: usize,
    budget: usize,
    state: Mutex<State>,
    ledger: CostLedger,
}

impl AdversarialDatabase {
    pub fn new(v0: f64, v_inf: f64, k: usize, n: usize) -> Result<Self> {
        if k == 0 || n < 2 {
            return Err(Error::InvalidConfig(
                "adversary needs k >= 1 and n >= 2".into(),
            ));
        }
        let schema = Schema::new(vec![OrdinalAttr::continuous("A", v0, v_inf)], vec![])?;
        Ok(AdversarialDatabase {
            schema,
            v0,
            k,
            budget: n - 1,
            state: Mutex::new(State {
                vq: v_inf,
                fabricated: Vec::new(),
                hidden: None,
                calls: Vec::new(),
            }),
            ledger: CostLedger::new(),
        })
    }

    pub fn min_query_threshold(&self) -> f64 {
        self.state.lock().unwrap().vq
    }

    pub fn fabricated(&self) -> Vec<Tuple> {
        self.state.lock().unwrap().fabricated.clone()
    }

    /// A concrete database consistent with every answer given so far.
    pub fn materialized(&self) -> Vec<Tuple> {
        let st = self.state.lock().unwrap();
        let mut all = st.fabricated.clone();
        let extra = match &st.hidden {
            Some(h) => h.clone(),
            None => Tuple::ordinal(st.fabricated.len() as u64, vec![(self.v0 + st.vq) / 2.0]),
        };
        all.push(extra);
        all
    }

    /// Replays every recorded call against [`Self::materialized`].
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        let db = self.materialized();
        let calls = self.state.lock().unwrap().calls.clone();
        for (i, (q, out)) in calls.iter().enumerate() {
            let r: Vec<TupleId> = db.iter().filter(|t| q.matches(t)).map(|t| t.id).collect();
            if out.tuples.len() > self.k || out.tuples.iter().any(|t| !r.contains(&t.id)) {
                return Err(format!("call {i}: returned tuples outside R(q)"));
            }
            let ok = match out.status {
                Status::Underflow => r.is_empty(),
                Status::Valid => out.tuples.len() == r.len() && !r.is_empty(),
                Status::Overflow => r.len() > self.k && out.tuples.len() == self.k,
            };
            if !ok {
                return Err(format!(
                    "call {i}: {:?} inconsistent with |R(q)| = {}",
                    out.status,
                    r.len()
                ));
            }
        }
        Ok(())
    }

    fn honest(&self, st: &State, range: &Interval) -> QueryOutcome {
        let mut m: Vec<Tuple> = st
            .fabricated
            .iter()
            .chain(st.hidden.iter())
            .filter(|t| range.contains(t.ordinal[0]))
            .cloned()
            .collect();
        m.sort_by(|a, b| b.ordinal[0].total_cmp(&a.ordinal[0]).then(a.id.cmp(&b.id)));
        QueryOutcome::from_ranked(self.k, m)
    }
}

impl TopKInterface for AdversarialDatabase {
    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn system_k(&self) -> usize {
        self.k
    }

    fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    fn respond(&self, q: &SearchQuery) -> Result<QueryOutcome> {
        if !q.equalities.is_empty() || q.ranges.iter().any(|r| r.attr != 0) {
            return Err(Error::Unsupported(
                "the adversary only answers single-attribute ranges".into(),
            ));
        }
        let range = q.interval_on(0);
        let mut st = self.state.lock().unwrap();
        let out = if st.hidden.is_some() || range.lo.v > self.v0 || range.hi.v <= self.v0 {
            let out = self.honest(&st, &range);
            if st.hidden.is_none() && range.lo.v > self.v0 {
                st.vq = st.vq.min(range.lo.v);
            }
            out
        } else {
            let mut reuse: Vec<Tuple> = st
                .fabricated
                .iter()
                .filter(|t| range.contains(t.ordinal[0]))
                .cloned()
                .collect();
            reuse.sort_by(|a, b| b.ordinal[0].total_cmp(&a.ordinal[0]));
            reuse.truncate(self.k);
            let need = self.k - reuse.len();
            let u = st.vq.min(range.hi.v);
            let (lo, hi) = ((self.v0 + u) / 2.0, u);
            let room = self.budget - st.fabricated.len();
            let fresh = need.min(room);
            for j in 1..=fresh {
                let id = st.fabricated.len() as u64;
                let v = lo + (hi - lo) * j as f64 / (fresh + 1) as f64;
                st.fabricated.push(Tuple::ordinal(id, vec![v]));
            }
            if need > room {
                let id = st.fabricated.len() as u64;
                st.hidden = Some(Tuple::ordinal(id, vec![(self.v0 + u) / 2.0]));
                self.honest(&st, &range)
            } else {
                if fresh > 0 {
                    st.vq = lo;
                }
                let mut m: Vec<Tuple> = st
                    .fabricated
                    .iter()
                    .filter(|t| range.contains(t.ordinal[0]))
                    .cloned()
                    .collect();
                m.sort_by(|a, b| b.ordinal[0].total_cmp(&a.ordinal[0]));
                m.truncate(self.k);
                QueryOutcome {
                    status: Status::Overflow,
                    tuples: m,
                }
            }
        };
        st.calls.push((q.clone(), out.clone()));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RangePredicate;

    #[test]
    fn first_query_overflows_with_fresh_tuples() {
        let adv = AdversarialDatabase::new(0.0, 100.0, 2, 100).unwrap();
        let out = adv.respond(&SearchQuery::all()).unwrap();
        assert_eq!(out.status, Status::Overflow);
        assert_eq!(out.tuples.len(), 2);
        assert!(out
            .tuples
            .iter()
            .all(|t| t.ordinal[0] > 50.0 && t.ordinal[0] < 100.0));
        assert_eq!(adv.min_query_threshold(), 50.0);
        adv.check_consistency().unwrap();
    }

    #[test]
    fn ranges_above_bottom_only_see_fabricated_tuples() {
        let adv = AdversarialDatabase::new(0.0, 100.0, 2, 100).unwrap();
        let q = SearchQuery::all().with_range(RangePredicate::open(0, 10.0, 20.0));
        assert_eq!(adv.respond(&q).unwrap().status, Status::Underflow);
        assert_eq!(adv.min_query_threshold(), 10.0);
        let out = adv.respond(&SearchQuery::all()).unwrap();
        assert!(out
            .tuples
            .iter()
            .all(|t| t.ordinal[0] > 5.0 && t.ordinal[0] < 10.0));
        adv.check_consistency().unwrap();
    }

    #[test]
    fn rejects_other_predicates() {
        let adv = AdversarialDatabase::new(0.0, 100.0, 2, 100).unwrap();
        let q = SearchQuery::all().with_equality(0, "x");
        assert!(matches!(adv.respond(&q), Err(Error::Unsupported(_))));
    }

    #[test]
    fn budget_exhaustion_stays_consistent() {
        let adv = AdversarialDatabase::new(0.0, 1.0, 3, 10).unwrap();
        let mut upper = 1.0;
        for _ in 0..8 {
            let q = SearchQuery::all().with_range(RangePredicate::new(0, 0.0, true, upper, true));
            let out = adv.respond(&q).unwrap();
            if let Some(m) = out.tuples.iter().map(|t| t.ordinal[0]).reduce(f64::min) {
                upper = m;
            }
        }
        assert_eq!(adv.materialized().len(), 10);
        adv.check_consistency().unwrap();
    }
}
