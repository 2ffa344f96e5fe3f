use std::collections::HashSet;

use super::top1::{widest_dim, Searcher, Top1};
use super::{Indexes, MdStrategy};
use crate::access::{PhaseCounts, Probe};
use crate::config::{RerankConfig, TieHandling};
use crate::contour::{below, RankBox};
use crate::interval::{Interval, Lower, Upper};
use crate::model::{rank_cmp, RankedTuple, RankingFunction, SearchQuery, TupleId};
use crate::Result;

/// Top-h answer with the cumulative cost after each emitted tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct TopKResult {
    pub tuples: Vec<RankedTuple>,
    /// `costs[i]` is what the query had cost when `tuples[i]` was emitted.
    pub costs: Vec<PhaseCounts>,
    /// Fewer than h tuples match the query.
    pub short: bool,
    /// Number of top-1 searches started.
    pub launches: usize,
    /// Cost of the whole call, including queries after the last emission.
    pub spent: PhaseCounts,
}

impl TopKResult {
    pub fn total(&self) -> PhaseCounts {
        self.spent
    }
}

/// The best tuple matching `q` under `f`.
pub fn md_top1(
    p: &mut Probe,
    idx: &mut Indexes,
    cfg: &RerankConfig,
    q: &SearchQuery,
    f: &RankingFunction,
    strategy: MdStrategy,
) -> Result<Option<RankedTuple>> {
    let region = RankBox::from_query(f, p.schema(), q);
    let mut s = Searcher {
        p,
        idx,
        cfg,
        q,
        f,
        strategy,
    };
    Ok(s.top1(&region, cfg.ties == TieHandling::Resolve)?
        .map(|t| t.best))
}

enum Item {
    Box { bx: RankBox, top: Top1 },
    Known(RankedTuple),
}

impl Item {
    fn key(&self) -> (f64, TupleId) {
        match self {
            Item::Box { top, .. } => top.best.key(),
            Item::Known(t) => t.key(),
        }
    }
}

struct TopK<'s, 'p, 'a> {
    s: Searcher<'s, 'p, 'a>,
    frontier: Vec<Item>,
    seen: HashSet<TupleId>,
    launches: usize,
    resolve: bool,
}

impl TopK<'_, '_, '_> {
    fn launch(&mut self, bx: RankBox) -> Result<()> {
        self.launches += 1;
        if let Some(top) = self.s.top1(&bx, self.resolve)? {
            self.frontier.push(Item::Box { bx, top });
        }
        Ok(())
    }

    fn know(&mut self, t: RankedTuple) {
        if self.seen.insert(t.tuple.id) {
            self.frontier.push(Item::Known(t));
        }
    }

    /// Replaces the emitting box by the parts not yet accounted for.
    fn split(&mut self, bx: RankBox, top: Top1, dim: usize) -> Result<()> {
        let c = self.s.f.canonical(&top.best.tuple);
        self.launch(bx.with_dim(dim, below(c[dim])))?;
        let above = Interval::new(Lower::open(c[dim]), Upper::UNBOUNDED);
        self.launch(bx.with_dim(dim, above))?;
        if !self.resolve {
            return Ok(());
        }
        for t in top.same_point.unwrap_or_default() {
            self.know(t);
        }
        let mut pinned = vec![dim];
        let mut slab = bx.with_dim(dim, Interval::closed(c[dim], c[dim]));
        loop {
            let Some(next) = (0..c.len()).find(|i| !pinned.contains(i)) else {
                return Ok(());
            };
            let out = self.s.p.run(&slab.query(self.s.f, self.s.q))?;
            if !out.is_overflow() {
                for t in out.tuples {
                    self.know(RankedTuple::new(t, self.s.f));
                }
                return Ok(());
            }
            self.launch(slab.with_dim(next, below(c[next])))?;
            let above = Interval::new(Lower::open(c[next]), Upper::UNBOUNDED);
            self.launch(slab.with_dim(next, above))?;
            slab = slab.with_dim(next, Interval::closed(c[next], c[next]));
            pinned.push(next);
        }
    }
}

/// The `h` best tuples matching `q` under `f`, best first, ties broken by id.
#[allow(clippy::too_many_arguments)]
pub fn md_topk(
    p: &mut Probe,
    idx: &mut Indexes,
    cfg: &RerankConfig,
    q: &SearchQuery,
    f: &RankingFunction,
    h: usize,
    strategy: MdStrategy,
) -> Result<TopKResult> {
    let schema = p.schema();
    let region = RankBox::from_query(f, schema, q);
    let dim = widest_dim(f, schema, &region);
    let resolve = cfg.ties == TieHandling::Resolve;
    let mut run = TopK {
        s: Searcher {
            p,
            idx,
            cfg,
            q,
            f,
            strategy,
        },
        frontier: Vec::new(),
        seen: HashSet::new(),
        launches: 0,
        resolve,
    };
    let mut tuples = Vec::new();
    let mut costs = Vec::new();
    if h > 0 {
        run.launch(region)?;
    }
    while tuples.len() < h {
        let Some(i) = (0..run.frontier.len())
            .min_by(|a, b| rank_cmp(run.frontier[*a].key(), run.frontier[*b].key()))
        else {
            break;
        };
        let item = run.frontier.swap_remove(i);
        let emitted = match &item {
            Item::Box { top, .. } => top.best.clone(),
            Item::Known(t) => t.clone(),
        };
        run.seen.insert(emitted.tuple.id);
        tuples.push(emitted);
        costs.push(run.s.p.counts());
        if tuples.len() == h {
            break;
        }
        if let Item::Box { bx, top } = item {
            run.split(bx, top, dim)?;
        }
    }
    let short = tuples.len() < h;
    let spent = run.s.p.counts();
    Ok(TopKResult {
        tuples,
        costs,
        short,
        launches: run.launches,
        spent,
    })
}
