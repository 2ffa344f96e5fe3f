use std::collections::VecDeque;

use super::search::{baseline, bisect};
use super::{crawl_ties, Axis, DenseIndex1D, Strategy1D};
use crate::access::Probe;
use crate::config::{RerankConfig, TieHandling};
use crate::interval::{Lower, Upper};
use crate::model::{SearchQuery, Tuple};
use crate::Result;

/// Incremental Get-Next over one attribute: each call returns the next
/// matching tuple by (key, id).
#[derive(Clone, Debug)]
pub struct GetNext1D {
    q: SearchQuery,
    axis: Axis,
    strategy: Strategy1D,
    /// Key of the last emitted group.
    pivot: Option<f64>,
    pending: VecDeque<Tuple>,
    emitted: usize,
    done: bool,
}

impl GetNext1D {
    pub fn new(q: SearchQuery, axis: Axis, strategy: Strategy1D) -> Self {
        GetNext1D {
            q,
            axis,
            strategy,
            pivot: None,
            pending: VecDeque::new(),
            emitted: 0,
            done: false,
        }
    }

    /// Continues after `pivot`: only tuples with a strictly larger key follow.
    pub fn after(q: SearchQuery, axis: Axis, strategy: Strategy1D, pivot: Option<&Tuple>) -> Self {
        let mut s = Self::new(q, axis, strategy);
        s.pivot = pivot.map(|t| axis.key(t));
        s
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn query(&self) -> &SearchQuery {
        &self.q
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// Key of the most recently reached value, if any.
    pub fn pivot(&self) -> Option<f64> {
        self.pivot
    }

    pub fn is_exhausted(&self) -> bool {
        self.done && self.pending.is_empty()
    }

    pub fn next(
        &mut self,
        p: &mut Probe,
        index: &mut DenseIndex1D,
        cfg: &RerankConfig,
    ) -> Result<Option<Tuple>> {
        if self.pending.is_empty() && !self.done {
            self.advance(p, index, cfg)?;
        }
        let t = self.pending.pop_front();
        if t.is_some() {
            self.emitted += 1;
        }
        Ok(t)
    }

    fn advance(
        &mut self,
        p: &mut Probe,
        index: &mut DenseIndex1D,
        cfg: &RerankConfig,
    ) -> Result<()> {
        let schema = p.schema();
        let start = self.axis.start(schema, &self.q);
        let lo = match self.pivot {
            Some(k) => Lower::open(k).tighter(start),
            None => start,
        };
        let found = match self.strategy {
            Strategy1D::Baseline => baseline(p, cfg, &self.q, self.axis, lo, Upper::UNBOUNDED)?,
            Strategy1D::Binary => bisect(p, index, cfg, &self.q, self.axis, lo, None)?,
            Strategy1D::Rerank => {
                let th = cfg.params.threshold(schema.attr(self.axis.attr).width());
                bisect(p, index, cfg, &self.q, self.axis, lo, Some(th))?
            }
        };
        let Some(found) = found else {
            self.done = true;
            return Ok(());
        };
        self.pivot = Some(self.axis.key(&found.best));
        let mut group = match (found.ties, cfg.ties) {
            (Some(g), _) => g,
            (None, TieHandling::Resolve) => {
                let v = found.best.ordinal[self.axis.attr];
                let g = crawl_ties(p, &self.q, self.axis.attr, v)?;
                if g.is_empty() {
                    vec![found.best]
                } else {
                    g
                }
            }
            (None, TieHandling::AssumeDistinct) => vec![found.best],
        };
        group.sort_by_key(|t| t.id);
        self.pending.extend(group);
        Ok(())
    }
}

/// The matching tuple right after `pivot` (the first one when `pivot` is `None`).
#[allow(clippy::too_many_arguments)]
pub fn get_next(
    p: &mut Probe,
    index: &mut DenseIndex1D,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    pivot: Option<&Tuple>,
    strategy: Strategy1D,
) -> Result<Option<Tuple>> {
    GetNext1D::after(q.clone(), axis, strategy, pivot).next(p, index, cfg)
}

pub fn get_next_baseline(
    p: &mut Probe,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    pivot: Option<&Tuple>,
) -> Result<Option<Tuple>> {
    get_next(
        p,
        &mut DenseIndex1D::new(),
        cfg,
        q,
        axis,
        pivot,
        Strategy1D::Baseline,
    )
}

pub fn get_next_binary(
    p: &mut Probe,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    pivot: Option<&Tuple>,
) -> Result<Option<Tuple>> {
    get_next(
        p,
        &mut DenseIndex1D::new(),
        cfg,
        q,
        axis,
        pivot,
        Strategy1D::Binary,
    )
}

pub fn get_next_reranked(
    p: &mut Probe,
    index: &mut DenseIndex1D,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    pivot: Option<&Tuple>,
) -> Result<Option<Tuple>> {
    get_next(p, index, cfg, q, axis, pivot, Strategy1D::Rerank)
}
