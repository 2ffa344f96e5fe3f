use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::ops::Bound;

use crate::interval::Interval;
use crate::model::{Orientation, RankedTuple, RankingFunction, SearchQuery, Tuple, TupleId};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Every tuple returned by any interface query so far, with one sorted view
/// per ordinal attribute.
#[derive(Clone, Debug, Default)]
pub struct HistoryStore {
    tuples: Vec<Tuple>,
    pos: HashMap<TupleId, usize>,
    views: Vec<BTreeSet<(Key, TupleId)>>,
}

impl HistoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn get(&self, id: TupleId) -> Option<&Tuple> {
        self.pos.get(&id).map(|&i| &self.tuples[i])
    }

    pub fn contains(&self, id: TupleId) -> bool {
        self.pos.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    /// Returns whether the tuple was new.
    pub fn insert(&mut self, t: &Tuple) -> bool {
        if self.pos.contains_key(&t.id) {
            return false;
        }
        if self.views.len() < t.ordinal.len() {
            self.views.resize_with(t.ordinal.len(), BTreeSet::new);
        }
        for (v, view) in t.ordinal.iter().zip(self.views.iter_mut()) {
            view.insert((Key(*v), t.id));
        }
        self.pos.insert(t.id, self.tuples.len());
        self.tuples.push(t.clone());
        true
    }

    pub fn insert_all(&mut self, ts: &[Tuple]) {
        for t in ts {
            self.insert(t);
        }
    }

    /// Seen tuples with `attr` inside `range`, ascending by (value, id).
    pub fn in_range(&self, attr: usize, range: Interval) -> impl Iterator<Item = &Tuple> + '_ {
        let view = self.views.get(attr);
        let start = if range.lo.v == f64::NEG_INFINITY {
            Bound::Unbounded
        } else {
            Bound::Included((Key(range.lo.v), TupleId(0)))
        };
        view.into_iter()
            .flat_map(move |v| v.range((start, Bound::Unbounded)))
            .skip_while(move |(k, _)| !range.lo.admits(k.0))
            .take_while(move |(k, _)| range.hi.admits(k.0))
            .map(move |(_, id)| &self.tuples[self.pos[id]])
    }

    /// The seen tuple matching `q` with the smallest canonical key
    /// (`orientation.sign() * value`) inside `keys`, ties broken by id.
    pub fn min_in(
        &self,
        q: &SearchQuery,
        attr: usize,
        o: Orientation,
        keys: Interval,
    ) -> Option<Tuple> {
        match o {
            Orientation::SmallerPreferred => {
                self.in_range(attr, keys).find(|t| q.matches(t)).cloned()
            }
            Orientation::LargerPreferred => {
                let vals = keys.negate();
                let view = self.views.get(attr)?;
                let end = if vals.hi.v == f64::INFINITY {
                    Bound::Unbounded
                } else {
                    Bound::Included((Key(vals.hi.v), TupleId(u64::MAX)))
                };
                let mut best: Option<&Tuple> = None;
                for (k, id) in view
                    .range((Bound::Unbounded, end))
                    .rev()
                    .skip_while(|(k, _)| !vals.hi.admits(k.0))
                    .take_while(|(k, _)| vals.lo.admits(k.0))
                {
                    if let Some(b) = best {
                        if k.0 != b.ordinal[attr] {
                            break;
                        }
                    }
                    let t = &self.tuples[self.pos[id]];
                    if q.matches(t) {
                        best = Some(t);
                    }
                }
                best.cloned()
            }
        }
    }

    /// Among seen tuples matching `q` with `attr` strictly above `bound`, the
    /// one with the smallest value (ties by id).
    pub fn min_above(&self, q: &SearchQuery, attr: usize, bound: f64) -> Option<Tuple> {
        let keys = Interval::new(
            crate::interval::Lower::open(bound),
            crate::interval::Upper::UNBOUNDED,
        );
        self.min_in(q, attr, Orientation::SmallerPreferred, keys)
    }

    /// The best-scoring seen tuple matching both `q` and `region`.
    pub fn min_score(
        &self,
        q: &SearchQuery,
        f: &RankingFunction,
        region: &SearchQuery,
    ) -> Option<RankedTuple> {
        self.tuples
            .iter()
            .filter(|t| q.matches(t) && region.matches(t))
            .map(|t| (f.eval(t), t))
            .min_by(|a, b| crate::model::rank_cmp((a.0, a.1.id), (b.0, b.1.id)))
            .map(|(score, t)| RankedTuple {
                tuple: t.clone(),
                score,
            })
    }
}
