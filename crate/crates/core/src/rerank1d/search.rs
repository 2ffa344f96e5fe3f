use super::{crawl_ties, Axis, DenseIndex1D};
use crate::access::{Phase, Probe};
use crate::config::{RerankConfig, TieHandling};
use crate::interval::{Interval, Lower, Upper};
use crate::model::{SearchQuery, Tuple};
use crate::Result;

/// The smallest-key matching tuple a search settled on.
#[derive(Clone, Debug, PartialEq)]
pub struct Found {
    pub best: Tuple,
    /// Every matching tuple sharing `best`'s key, sorted by id, when the
    /// search itself proved the list complete.
    pub ties: Option<Vec<Tuple>>,
}

impl Found {
    pub(crate) fn unresolved(best: Tuple) -> Self {
        Found { best, ties: None }
    }

    /// From a Valid answer: it holds every match in its range, ties included.
    fn from_valid(axis: Axis, ts: &[Tuple]) -> Option<Self> {
        let best = axis.lowest(ts)?.clone();
        let k = axis.key(&best);
        let mut ties: Vec<Tuple> = ts.iter().filter(|t| axis.key(t) == k).cloned().collect();
        ties.sort_by_key(|t| t.id);
        Some(Found {
            best,
            ties: Some(ties),
        })
    }
}

fn history_candidate(
    p: &Probe,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    keys: Interval,
) -> Option<Tuple> {
    cfg.reuse_history
        .then(|| p.history.min_in(q, axis.attr, axis.orientation, keys))
        .flatten()
}

/// Shrinks the range `[lo, candidate)` until a query underflows. The ties of
/// the result are known when the last non-empty answer was Valid.
pub(crate) fn baseline(
    p: &mut Probe,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    lo: Lower,
    hi: Upper,
) -> Result<Option<Found>> {
    let mut cand = history_candidate(p, cfg, q, axis, Interval::new(lo, hi)).map(Found::unresolved);
    loop {
        let top = cand.as_ref().map_or(hi, |c| Upper::open(axis.key(&c.best)));
        let out = p.run(&axis.query(q, Interval::new(lo, top)))?;
        if out.is_underflow() {
            return Ok(cand);
        }
        cand = if out.is_overflow() {
            axis.lowest(&out.tuples).cloned().map(Found::unresolved)
        } else {
            Found::from_valid(axis, &out.tuples)
        };
    }
}

/// Bisects `[lo, candidate)`. With a `threshold`, ranges narrower than it go
/// to [`oracle_lookup`] instead.
pub(crate) fn bisect(
    p: &mut Probe,
    index: &mut DenseIndex1D,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    mut lo: Lower,
    threshold: Option<f64>,
) -> Result<Option<Found>> {
    let schema = p.schema();
    if threshold.is_some() {
        while let Some(r) = index.covering(axis, lo) {
            let exhausted = r.exhausted;
            if let Some(group) = index.best_known(axis, q, Interval::new(lo, Upper::UNBOUNDED)) {
                return Ok(Some(Found {
                    best: group[0].clone(),
                    ties: Some(group),
                }));
            }
            lo = Lower::after(exhausted);
        }
    }
    let mut cand = match history_candidate(p, cfg, q, axis, Interval::new(lo, Upper::UNBOUNDED)) {
        Some(c) => c,
        None => {
            let out = p.run(&axis.query(q, Interval::new(lo, Upper::UNBOUNDED)))?;
            if !out.is_overflow() {
                return Ok(Found::from_valid(axis, &out.tuples));
            }
            axis.lowest(&out.tuples)
                .cloned()
                .expect("overflow returns tuples")
        }
    };
    loop {
        let c = axis.key(&cand);
        if let Some(th) = threshold {
            if c - lo.v < th {
                let range = Interval::new(lo, Upper::open(c));
                return Ok(Some(
                    oracle_lookup(p, index, cfg, q, axis, range)?
                        .unwrap_or(Found::unresolved(cand)),
                ));
            }
        }
        let out = match axis.midpoint(schema, lo.v, c) {
            Some(m) => {
                let low = p.run(&axis.query(q, Interval::new(lo, Upper::open(m))))?;
                if low.is_underflow() {
                    lo = Lower::closed(m);
                    p.run(&axis.query(q, Interval::new(lo, Upper::open(c))))?
                } else {
                    low
                }
            }
            None => p.run(&axis.query(q, Interval::new(lo, Upper::open(c))))?,
        };
        if out.is_underflow() {
            return Ok(Some(Found::unresolved(cand)));
        }
        if !out.is_overflow() {
            return Ok(Found::from_valid(axis, &out.tuples));
        }
        cand = axis
            .lowest(&out.tuples)
            .cloned()
            .expect("overflow returns tuples");
    }
}

/// Finds the smallest-key tuple matching `q` inside `range`, answering from
/// the dense index where it is complete and crawling the rest without the
/// user's selection conditions. Crawl queries are charged to the index-build
/// phase. `None` when `range` holds no matching tuple.
pub fn oracle_lookup(
    p: &mut Probe,
    index: &mut DenseIndex1D,
    cfg: &RerankConfig,
    q: &SearchQuery,
    axis: Axis,
    range: Interval,
) -> Result<Option<Found>> {
    let mut cur = range.lo;
    loop {
        if Interval::new(cur, range.hi).is_empty() {
            return Ok(None);
        }
        if let Some(r) = index.covering(axis, cur) {
            let exhausted = r.exhausted;
            if let Some(group) = index.best_known(axis, q, Interval::new(cur, range.hi)) {
                return Ok(Some(Found {
                    best: group[0].clone(),
                    ties: Some(group),
                }));
            }
            cur = Lower::after(exhausted);
            continue;
        }
        let stop = index
            .next_start(axis, cur)
            .map_or(range.hi, |s| Upper::before(s).tighter(range.hi));
        let (upto, found) =
            p.with_phase(Phase::IndexBuild, |p| crawl_step(p, cfg, axis, cur, stop))?;
        index.record(axis, cur, upto, found, range.hi.v);
    }
}

/// Finds the first tuples of the whole database at or after `cur`, up to `stop`.
fn crawl_step(
    p: &mut Probe,
    cfg: &RerankConfig,
    axis: Axis,
    cur: Lower,
    stop: Upper,
) -> Result<(Upper, Vec<Tuple>)> {
    let generic = SearchQuery::all();
    match baseline(p, cfg, &generic, axis, cur, stop)? {
        None => Ok((stop, Vec::new())),
        Some(Found { best: t, ties }) => {
            let w = axis.key(&t);
            let group = match (ties, cfg.ties) {
                (Some(g), _) => g,
                (None, TieHandling::Resolve) => {
                    crawl_ties(p, &generic, axis.attr, t.ordinal[axis.attr])?
                }
                (None, TieHandling::AssumeDistinct) => vec![t],
            };
            Ok((Upper::closed(w), group))
        }
    }
}
