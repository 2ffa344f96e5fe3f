use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::partition::{cover, split_by_anchor, virtual_split};
use super::{DenseRegionMd, Indexes, MdStrategy};
use crate::access::{Phase, Probe};
use crate::config::{QueueOrder, RerankConfig, TieHandling};
use crate::contour::{max_volume_dominated_box, tighten, RankBox};
use crate::interval::Upper;
use crate::model::{
    rank_cmp, QueryOutcome, RangePredicate, RankedTuple, RankingFunction, SearchQuery, Status,
    Tuple,
};
use crate::rerank1d::{crawl_query, Axis, GetNext1D};
use crate::{Error, Result};

struct Pending {
    bound: f64,
    seq: u64,
    bx: RankBox,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // reversed: BinaryHeap pops the largest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Boxes still to be examined. Best-first pops the box whose best corner
/// scores lowest.
pub struct SubspaceQueue {
    order: QueueOrder,
    heap: BinaryHeap<Pending>,
    fifo: VecDeque<RankBox>,
    seq: u64,
}

impl SubspaceQueue {
    pub fn new(order: QueueOrder) -> Self {
        SubspaceQueue {
            order,
            heap: BinaryHeap::new(),
            fifo: VecDeque::new(),
            seq: 0,
        }
    }

    pub fn push(&mut self, f: &RankingFunction, bx: RankBox) {
        match self.order {
            QueueOrder::BestFirst => {
                self.seq += 1;
                self.heap.push(Pending {
                    bound: f.canonical_score(&bx.lo_corner()),
                    seq: self.seq,
                    bx,
                });
            }
            QueueOrder::Fifo => self.fifo.push_back(bx),
        }
    }

    pub fn pop(&mut self) -> Option<RankBox> {
        match self.order {
            QueueOrder::BestFirst => self.heap.pop().map(|p| p.bx),
            QueueOrder::Fifo => self.fifo.pop_front(),
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len() + self.fifo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The top-1 of a box, with the other tuples sharing its ranked values when known.
#[derive(Clone, Debug)]
pub(crate) struct Top1 {
    pub best: RankedTuple,
    /// Tuples at exactly the same ranked values, when the search resolved them.
    pub same_point: Option<Vec<RankedTuple>>,
}

pub(crate) fn best_of(f: &RankingFunction, ts: &[Tuple]) -> Option<RankedTuple> {
    ts.iter()
        .map(|t| RankedTuple::new(t.clone(), f))
        .min_by(|a, b| rank_cmp(a.key(), b.key()))
}

/// The ranked dimension whose extent in `bx`, relative to its domain, is the largest.
pub(crate) fn widest_dim(
    f: &RankingFunction,
    schema: &crate::model::Schema,
    bx: &RankBox,
) -> usize {
    let mut best = 0;
    let mut best_w = f64::NEG_INFINITY;
    let mut order: Vec<usize> = (0..f.dims()).collect();
    order.sort_by_key(|&i| f.attrs()[i]);
    for i in order {
        let dw = schema.attr(f.attrs()[i]).width();
        let w = if dw > 0.0 {
            bx.dims[i].width() / dw
        } else {
            0.0
        };
        if w > best_w {
            best_w = w;
            best = i;
        }
    }
    best
}

pub(crate) struct Searcher<'s, 'p, 'a> {
    pub p: &'s mut Probe<'p>,
    pub idx: &'a mut Indexes,
    pub cfg: &'a RerankConfig,
    pub q: &'a SearchQuery,
    pub f: &'a RankingFunction,
    pub strategy: MdStrategy,
}

impl Searcher<'_, '_, '_> {
    /// Answers the box query, from the dense index when the strategy allows it.
    fn probe(&mut self, bx: &RankBox) -> Result<QueryOutcome> {
        if self.strategy == MdStrategy::Rerank {
            if let Some(out) = self.dense(bx)? {
                return Ok(out);
            }
        }
        self.p.run(&bx.query(self.f, self.q))
    }

    fn dense(&mut self, bx: &RankBox) -> Result<Option<QueryOutcome>> {
        let schema = self.p.schema();
        let ranges = bx.value_ranges(self.f);
        let known = |r: &DenseRegionMd, q: &SearchQuery| {
            let ts: Vec<_> = r.matching(&ranges, q).cloned().collect();
            let status = if ts.is_empty() {
                Status::Underflow
            } else {
                Status::Valid
            };
            QueryOutcome { status, tuples: ts }
        };
        if let Some(r) = self.idx.md.lookup(&ranges) {
            return Ok(Some(known(r, self.q)));
        }
        if bx.volume(self.f, schema) >= self.cfg.params.fraction() {
            return Ok(None);
        }
        let generic = ranges
            .iter()
            .fold(SearchQuery::all(), |q, (a, iv)| q.with_interval(*a, *iv));
        let prefer = [self.f.attrs()[self.cfg.crawl_attr.min(self.f.dims() - 1)]];
        let crawled = match self
            .p
            .with_phase(Phase::IndexBuild, |p| crawl_query(p, &generic, &prefer))
        {
            Ok(ts) => ts,
            Err(Error::Indistinguishable { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let region = DenseRegionMd::new(ranges.clone(), crawled);
        let out = known(&region, self.q);
        if region.discovered.len() >= self.cfg.params.s {
            self.idx.md.insert(region);
        }
        Ok(Some(out))
    }

    /// Any matching tuple inside `region`, found by a 1D search on its widest dimension.
    fn seed(&mut self, region: &RankBox) -> Result<Option<RankedTuple>> {
        let schema = self.p.schema();
        let rq = region.query(self.f, self.q);
        if let Some(t) = self.p.history.min_score(&rq, self.f, &SearchQuery::all()) {
            return Ok(Some(t));
        }
        let d = widest_dim(self.f, schema, region);
        let axis = Axis::new(self.f.attrs()[d], self.f.orientation(d));
        let cfg = self.cfg.clone().with_ties(TieHandling::AssumeDistinct);
        let Some(found) = GetNext1D::new(rq.clone(), axis, self.strategy.one_d()).next(
            self.p,
            &mut self.idx.one_d,
            &cfg,
        )?
        else {
            return Ok(None);
        };
        let seen = self.p.history.min_score(&rq, self.f, &SearchQuery::all());
        Ok(Some(
            seen.unwrap_or_else(|| RankedTuple::new(found, self.f)),
        ))
    }

    /// The best tuple matching the query inside `region`. Tuples sharing the
    /// winner's ranked values are resolved when `resolve_point` is set.
    pub fn top1(&mut self, region: &RankBox, resolve_point: bool) -> Result<Option<Top1>> {
        let schema = self.p.schema();
        if region.is_void(self.f, schema) {
            return Ok(None);
        }
        let Some(mut inc) = self.seed(region)? else {
            return Ok(None);
        };
        // every match at the incumbent's point, when its box did not overflow
        let mut inc_out: Option<Vec<Tuple>> = None;
        'restart: loop {
            let mut queue = SubspaceQueue::new(self.cfg.queue);
            for b in cover(self.f, schema, region, &inc) {
                queue.push(self.f, b);
            }
            while let Some(b) = queue.pop() {
                let Some(b) = tighten(self.f, schema, inc.score, &b) else {
                    continue;
                };
                let out = self.probe(&b)?;
                let Some(top) = best_of(self.f, &out.tuples) else {
                    continue;
                };
                if top.outranks(&inc) {
                    inc_out = (!out.is_overflow()).then_some(out.tuples);
                    inc = top;
                    continue 'restart;
                }
                if !out.is_overflow() {
                    continue;
                }
                let anchor = self.f.canonical(&top.tuple);
                if self.strategy == MdStrategy::Baseline {
                    for p in split_by_anchor(&b, &anchor) {
                        queue.push(self.f, p);
                    }
                    continue;
                }
                let v = max_volume_dominated_box(self.f, schema, inc.score, &b);
                if v.at_best_corner || v.fully_dominated {
                    for p in split_by_anchor(&b, &anchor) {
                        queue.push(self.f, p);
                    }
                    continue;
                }
                let mut d = b.clone();
                for (i, k) in v.keys.iter().enumerate() {
                    d.dims[i].hi = d.dims[i].hi.tighter(Upper::closed(*k));
                }
                let dout = self.probe(&d)?;
                if let Some(top) = best_of(self.f, &dout.tuples) {
                    if top.outranks(&inc) {
                        inc_out = (!dout.is_overflow()).then_some(dout.tuples);
                        inc = top;
                        continue 'restart;
                    }
                }
                for p in virtual_split(&b, &v.keys, &anchor) {
                    queue.push(self.f, p);
                }
            }
            break;
        }
        if !resolve_point {
            return Ok(Some(Top1 {
                best: inc,
                same_point: None,
            }));
        }
        let c = self.f.canonical(&inc.tuple);
        let found = match inc_out {
            Some(ts) => ts
                .into_iter()
                .filter(|t| self.f.canonical(t) == c)
                .collect(),
            None => {
                let point = self.f.attrs().iter().fold(self.q.clone(), |q, &a| {
                    let v = inc.tuple.ordinal[a];
                    q.with_range(RangePredicate::closed(a, v, v))
                });
                crawl_query(self.p, &point, &[])?
            }
        };
        let mut group: Vec<RankedTuple> = found
            .into_iter()
            .map(|t| RankedTuple::new(t, self.f))
            .collect();
        group.sort_by_key(|r| r.tuple.id);
        if group.is_empty() {
            group.push(inc.clone());
        }
        let best = group.remove(0);
        Ok(Some(Top1 {
            best,
            same_point: Some(group),
        }))
    }
}
