use std::collections::HashMap;

use super::Axis;
use crate::interval::{Interval, Lower, Upper};
use crate::model::{Orientation, SearchQuery, Tuple};

/// A crawled range of one attribute, in key space.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseRegion1D {
    pub attr: usize,
    pub orientation: Orientation,
    pub start: Lower,
    /// Nominal end of the region (exclusive).
    pub end: f64,
    /// Every database tuple with a key from `start` through `exhausted` is in `discovered`.
    pub exhausted: Upper,
    /// Sorted by (key, id).
    pub discovered: Vec<Tuple>,
}

impl DenseRegion1D {
    pub fn axis(&self) -> Axis {
        Axis::new(self.attr, self.orientation)
    }

    pub fn complete(&self) -> Interval {
        Interval::new(self.start, self.exhausted)
    }
}

fn lower_order(l: &Lower) -> (f64, bool) {
    (l.v, l.open)
}

/// Query-agnostic index of crawled ranges, shared by all user queries.
#[derive(Clone, Debug, Default)]
pub struct DenseIndex1D {
    regions: HashMap<Axis, Vec<DenseRegion1D>>,
}

impl DenseIndex1D {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn regions(&self, axis: Axis) -> &[DenseRegion1D] {
        self.regions.get(&axis).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All regions, ordered by attribute, orientation and start.
    pub fn all(&self) -> Vec<&DenseRegion1D> {
        let mut axes: Vec<&Axis> = self.regions.keys().collect();
        axes.sort_by_key(|a| (a.attr, a.orientation == Orientation::LargerPreferred));
        axes.into_iter()
            .flat_map(|a| self.regions[a].iter())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.regions.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The region whose complete part includes the start of `cur`.
    pub fn covering(&self, axis: Axis, cur: Lower) -> Option<&DenseRegion1D> {
        self.regions(axis)
            .iter()
            .find(|r| r.start.covers(&cur) && !Interval::new(cur, r.exhausted).is_empty())
    }

    /// The earliest region start lying strictly after `cur`.
    pub fn next_start(&self, axis: Axis, cur: Lower) -> Option<Lower> {
        self.regions(axis)
            .iter()
            .map(|r| r.start)
            .filter(|s| !s.covers(&cur))
            .min_by(|a, b| lower_order(a).partial_cmp(&lower_order(b)).unwrap())
    }

    /// The best tuple matching `q` among those known inside `keys`, with all
    /// matching tuples sharing its key. Only the complete part of the region
    /// holding the start of `keys` is consulted.
    pub fn best_known(&self, axis: Axis, q: &SearchQuery, keys: Interval) -> Option<Vec<Tuple>> {
        let r = self.covering(axis, keys.lo)?;
        let keys = keys.intersect(&r.complete());
        let mut it = r
            .discovered
            .iter()
            .filter(|t| keys.contains(axis.key(t)) && q.matches(t));
        let first = it.next()?;
        let k = axis.key(first);
        let mut group = vec![first.clone()];
        group.extend(it.take_while(|t| axis.key(t) == k).cloned());
        Some(group)
    }

    /// Records that the tuples with keys in `[cur, upto]` are exactly `found`.
    pub fn record(
        &mut self,
        axis: Axis,
        cur: Lower,
        upto: Upper,
        found: Vec<Tuple>,
        nominal_end: f64,
    ) {
        let list = self.regions.entry(axis).or_default();
        let mut discovered = found;
        discovered.sort_by(|a, b| axis.key(a).total_cmp(&axis.key(b)).then(a.id.cmp(&b.id)));
        list.push(DenseRegion1D {
            attr: axis.attr,
            orientation: axis.orientation,
            start: cur,
            end: nominal_end.max(upto.v),
            exhausted: upto,
            discovered,
        });
        Self::normalize(axis, list);
    }

    pub(crate) fn insert_region(&mut self, r: DenseRegion1D) {
        let axis = r.axis();
        let list = self.regions.entry(axis).or_default();
        list.push(r);
        Self::normalize(axis, list);
    }

    fn normalize(axis: Axis, list: &mut Vec<DenseRegion1D>) {
        list.sort_by(|a, b| {
            lower_order(&a.start)
                .partial_cmp(&lower_order(&b.start))
                .unwrap()
        });
        let mut out: Vec<DenseRegion1D> = Vec::with_capacity(list.len());
        for r in list.drain(..) {
            match out.last_mut() {
                Some(prev) if r.start.covers(&Lower::after(prev.exhausted)) => {
                    if !prev.exhausted.covers(&r.exhausted) {
                        prev.exhausted = r.exhausted;
                    }
                    prev.end = prev.end.max(r.end);
                    let mut all = std::mem::take(&mut prev.discovered);
                    all.extend(r.discovered);
                    all.sort_by(|a, b| axis.key(a).total_cmp(&axis.key(b)).then(a.id.cmp(&b.id)));
                    all.dedup_by(|a, b| a.id == b.id);
                    prev.discovered = all;
                }
                _ => out.push(r),
            }
        }
        for i in 1..out.len() {
            let next = out[i].start.v;
            let prev = &mut out[i - 1];
            prev.end = prev.end.min(next).max(prev.exhausted.v);
        }
        *list = out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(id: u64, v: f64) -> Tuple {
        Tuple::ordinal(id, vec![v])
    }

    #[test]
    fn adjacent_records_merge() {
        let axis = Axis::new(0, Orientation::SmallerPreferred);
        let mut idx = DenseIndex1D::new();
        idx.record(
            axis,
            Lower::open(1.0),
            Upper::closed(2.0),
            vec![t(1, 2.0)],
            5.0,
        );
        idx.record(
            axis,
            Lower::open(2.0),
            Upper::closed(3.0),
            vec![t(2, 3.0)],
            5.0,
        );
        assert_eq!(idx.regions(axis).len(), 1);
        let r = &idx.regions(axis)[0];
        assert_eq!(
            (r.start, r.exhausted),
            (Lower::open(1.0), Upper::closed(3.0))
        );
        assert_eq!(r.discovered.len(), 2);
        assert!(idx.covering(axis, Lower::closed(2.5)).is_some());
        assert!(idx.covering(axis, Lower::open(3.0)).is_none());
    }

    #[test]
    fn gaps_keep_regions_apart_and_nominal_ranges_disjoint() {
        let axis = Axis::new(0, Orientation::SmallerPreferred);
        let mut idx = DenseIndex1D::new();
        idx.record(
            axis,
            Lower::open(1.0),
            Upper::closed(2.0),
            vec![t(1, 2.0)],
            9.0,
        );
        idx.record(axis, Lower::open(4.0), Upper::open(6.0), vec![], 6.0);
        let rs = idx.regions(axis);
        assert_eq!(rs.len(), 2);
        assert!(rs[0].end <= rs[1].start.v);
        assert_eq!(
            idx.next_start(axis, Lower::open(2.0)),
            Some(Lower::open(4.0))
        );
        idx.record(axis, Lower::open(2.0), Upper::closed(4.0), vec![], 4.0);
        assert_eq!(idx.regions(axis).len(), 1);
    }

    #[test]
    fn best_known_groups_ties() {
        let axis = Axis::new(0, Orientation::SmallerPreferred);
        let mut idx = DenseIndex1D::new();
        idx.record(
            axis,
            Lower::closed(0.0),
            Upper::closed(3.0),
            vec![t(3, 2.0), t(1, 2.0), t(2, 3.0)],
            3.0,
        );
        let g = idx
            .best_known(
                axis,
                &SearchQuery::all(),
                Interval::new(Lower::open(1.0), Upper::UNBOUNDED),
            )
            .unwrap();
        assert_eq!(g.iter().map(|t| t.id.0).collect::<Vec<_>>(), vec![1, 3]);
    }
}
