use crate::access::Probe;
use crate::model::{RangePredicate, SearchQuery, Tuple};
use crate::{Error, Result};

/// Retrieves every tuple matching `q`.
///
/// An overflowing query is split on the first ordinal attribute (in `prefer`
/// order, then schema order) not yet pinned to a single value: at the median
/// of the returned values when they differ, otherwise into below, at and
/// above the one returned value. Once every ordinal attribute is pinned, the
/// split enumerates the values of a categorical attribute. Every piece either
/// loses a returned tuple or pins one more attribute, so the crawl ends
/// unless more than k tuples agree on every attribute.
pub fn crawl_query(p: &mut Probe, q: &SearchQuery, prefer: &[usize]) -> Result<Vec<Tuple>> {
    let out = p.run(q)?;
    if !out.is_overflow() {
        return Ok(out.tuples);
    }
    let schema = p.schema();
    let order = prefer
        .iter()
        .copied()
        .chain((0..schema.ordinal().len()).filter(|a| !prefer.contains(a)));
    for attr in order {
        if q.range_on(attr).is_some_and(|r| r.lower == r.upper) {
            continue;
        }
        let mut vals: Vec<f64> = out.tuples.iter().map(|t| t.ordinal[attr]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let pieces = if vals.len() >= 2 {
            let m = vals[vals.len() / 2];
            vec![
                RangePredicate::new(attr, f64::NEG_INFINITY, false, m, true),
                RangePredicate::new(attr, m, false, f64::INFINITY, false),
            ]
        } else {
            let v = vals[0];
            vec![
                RangePredicate::new(attr, f64::NEG_INFINITY, false, v, true),
                RangePredicate::closed(attr, v, v),
                RangePredicate::new(attr, v, true, f64::INFINITY, false),
            ]
        };
        let mut all = Vec::new();
        for r in pieces {
            all.extend(crawl_query(p, &q.clone().with_range(r), prefer)?);
        }
        return Ok(all);
    }
    for (c, attr) in schema.categorical().iter().enumerate() {
        if q.equalities.iter().any(|(a, _)| *a == c) {
            continue;
        }
        if attr.values.is_empty() {
            return Err(Error::Unsupported(format!(
                "cannot enumerate the values of {}",
                attr.name
            )));
        }
        let mut all = Vec::new();
        for v in &attr.values {
            all.extend(crawl_query(
                p,
                &q.clone().with_equality(c, v.clone()),
                prefer,
            )?);
        }
        return Ok(all);
    }
    Err(Error::Indistinguishable {
        count: out.tuples.len(),
    })
}

/// All tuples matching `q` whose `attr` equals `value`.
pub fn crawl_ties(p: &mut Probe, q: &SearchQuery, attr: usize, value: f64) -> Result<Vec<Tuple>> {
    let point = q
        .clone()
        .with_range(RangePredicate::closed(attr, value, value));
    let others: Vec<usize> = (0..p.schema().ordinal().len())
        .filter(|a| *a != attr)
        .collect();
    let mut ts = crawl_query(p, &point, &others)?;
    ts.sort_by_key(|t| t.id);
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::{HistoryStore, SimulatedDatabase, SystemRanking, TopKInterface};
    use crate::model::{CategoricalAttr, OrdinalAttr, Schema};

    fn db(ts: Vec<Tuple>, k: usize) -> SimulatedDatabase {
        let s = Schema::new(
            vec![
                OrdinalAttr::continuous("a", 0.0, 10.0),
                OrdinalAttr::continuous("b", 0.0, 10.0),
            ],
            vec![CategoricalAttr::new("c", ["x", "y", "z"])],
        )
        .unwrap();
        SimulatedDatabase::new(s, ts, SystemRanking::Random { seed: 1 }, k).unwrap()
    }

    fn t(id: u64, a: f64, b: f64, c: &str) -> Tuple {
        Tuple::new(id, vec![a, b], vec![c.into()])
    }

    #[test]
    fn tie_cases() {
        let d = db(
            vec![
                t(1, 5.0, 1.0, "x"),
                t(2, 5.0, 2.0, "x"),
                t(3, 5.0, 3.0, "x"),
                t(4, 6.0, 1.0, "x"),
            ],
            1,
        );
        let mut h = HistoryStore::new();
        let mut p = Probe::new(&d, &mut h, "t", 0);
        let ids = |v: Vec<Tuple>| v.into_iter().map(|t| t.id.0).collect::<Vec<_>>();
        assert_eq!(
            ids(crawl_ties(&mut p, &SearchQuery::all(), 0, 5.0).unwrap()),
            vec![1, 2, 3]
        );
        assert_eq!(
            ids(crawl_ties(&mut p, &SearchQuery::all(), 0, 6.0).unwrap()),
            vec![4]
        );
        assert!(crawl_ties(&mut p, &SearchQuery::all(), 0, 7.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn categorical_split_and_indistinguishable() {
        let d = db(
            vec![
                t(1, 5.0, 1.0, "x"),
                t(2, 5.0, 1.0, "y"),
                t(3, 5.0, 1.0, "z"),
            ],
            2,
        );
        let mut h = HistoryStore::new();
        let mut p = Probe::new(&d, &mut h, "t", 0);
        assert_eq!(
            crawl_ties(&mut p, &SearchQuery::all(), 0, 5.0)
                .unwrap()
                .len(),
            3
        );

        let d = db(
            vec![
                t(1, 5.0, 1.0, "x"),
                t(2, 5.0, 1.0, "x"),
                t(3, 5.0, 1.0, "x"),
            ],
            2,
        );
        let mut h = HistoryStore::new();
        let mut p = Probe::new(&d, &mut h, "t", 0);
        assert!(matches!(
            crawl_ties(&mut p, &SearchQuery::all(), 0, 5.0),
            Err(Error::Indistinguishable { .. })
        ));
        assert!(d.ledger().total() > 0);
    }
}
