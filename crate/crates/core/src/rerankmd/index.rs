use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::model::{SearchQuery, Tuple};

/// A crawled box of the database: value ranges on some ordinal attributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseRegionMd {
    pub ranges: Vec<(usize, Interval)>,
    /// Every database tuple inside `ranges` when `crawled`.
    pub discovered: Vec<Tuple>,
    pub crawled: bool,
}

impl DenseRegionMd {
    pub fn new(ranges: Vec<(usize, Interval)>, mut discovered: Vec<Tuple>) -> Self {
        discovered.sort_by_key(|t| t.id);
        DenseRegionMd {
            ranges,
            discovered,
            crawled: true,
        }
    }

    /// Whether the box given by `ranges` lies inside this region.
    pub fn covers(&self, ranges: &[(usize, Interval)]) -> bool {
        self.crawled
            && self.ranges.iter().all(|(a, mine)| {
                ranges
                    .iter()
                    .any(|(b, iv)| a == b && (iv.is_empty() || mine.covers(iv)))
            })
    }

    /// Known tuples inside `ranges` that match `q`.
    pub fn matching<'a>(
        &'a self,
        ranges: &'a [(usize, Interval)],
        q: &'a SearchQuery,
    ) -> impl Iterator<Item = &'a Tuple> {
        self.discovered.iter().filter(move |t| {
            q.matches(t) && ranges.iter().all(|(a, iv)| iv.contains(t.ordinal[*a]))
        })
    }
}

/// Crawled multi-attribute boxes, shared by all user queries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DenseIndexMd {
    regions: Vec<DenseRegionMd>,
}

impl DenseIndexMd {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn regions(&self) -> &[DenseRegionMd] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn lookup(&self, ranges: &[(usize, Interval)]) -> Option<&DenseRegionMd> {
        self.regions.iter().find(|r| r.covers(ranges))
    }

    /// Adds a region unless an existing one already covers it; regions it covers are dropped.
    pub fn insert(&mut self, r: DenseRegionMd) {
        if self.lookup(&r.ranges).is_some() {
            return;
        }
        self.regions.retain(|old| !r.covers(&old.ranges));
        self.regions.push(r);
    }
}
