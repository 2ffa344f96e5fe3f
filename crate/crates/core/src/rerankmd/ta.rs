use std::collections::{HashMap, VecDeque};

use super::topk::TopKResult;
use super::Indexes;
use crate::access::Probe;
use crate::config::RerankConfig;
use crate::interval::{Interval, Lower, Upper};
use crate::model::{rank_cmp, RankedTuple, RankingFunction, SearchQuery, Tuple, TupleId};
use crate::rerank1d::{crawl_ties, Axis, GetNext1D, Strategy1D};
use crate::Result;

/// Sorted access on one attribute through the interface's ORDER BY option.
struct Ordered {
    q: SearchQuery,
    axis: Axis,
    cur: Lower,
    buf: VecDeque<Tuple>,
    done: bool,
}

impl Ordered {
    /// `None` when the interface has no ORDER BY.
    fn next(&mut self, p: &mut Probe) -> Option<Result<Option<Tuple>>> {
        if self.buf.is_empty() && !self.done {
            if let Err(e) = self.page(p)? {
                return Some(Err(e));
            }
        }
        Some(Ok(self.buf.pop_front()))
    }

    fn page(&mut self, p: &mut Probe) -> Option<Result<()>> {
        let keys = Interval::new(self.cur, Upper::UNBOUNDED);
        let out = match p.run_ordered(
            &self.axis.query(&self.q, keys),
            self.axis.attr,
            self.axis.orientation,
        )? {
            Ok(out) => out,
            Err(e) => return Some(Err(e)),
        };
        let overflow = out.is_overflow();
        let mut ts = out.tuples;
        ts.sort_by(|a, b| {
            self.axis
                .key(a)
                .total_cmp(&self.axis.key(b))
                .then(a.id.cmp(&b.id))
        });
        if !overflow {
            self.buf.extend(ts);
            self.done = true;
            return Some(Ok(()));
        }
        let last = self.axis.key(ts.last().expect("overflow returns tuples"));
        if ts.iter().all(|t| self.axis.key(t) == last) {
            let v = ts[0].ordinal[self.axis.attr];
            match crawl_ties(p, &self.q, self.axis.attr, v) {
                Ok(g) => self.buf.extend(g),
                Err(e) => return Some(Err(e)),
            }
            self.cur = Lower::open(last);
        } else {
            self.buf
                .extend(ts.into_iter().filter(|t| self.axis.key(t) < last));
            self.cur = Lower::closed(last);
        }
        Some(Ok(()))
    }
}

enum Stream {
    GetNext(GetNext1D),
    Ordered(Ordered),
}

/// Threshold-style top-h over one sorted stream per ranked attribute. Each
/// round pulls one tuple from every stream; the search stops once the h-th
/// best seen score is strictly below the score of the last keys pulled, or
/// a stream runs dry.
pub fn ta_over_1d(
    p: &mut Probe,
    idx: &mut Indexes,
    cfg: &RerankConfig,
    q: &SearchQuery,
    f: &RankingFunction,
    h: usize,
) -> Result<TopKResult> {
    let schema = p.schema();
    let mut streams: Vec<Stream> = (0..f.dims())
        .map(|i| {
            let axis = Axis::new(f.attrs()[i], f.orientation(i));
            if cfg.ta_sorted_access {
                let cur = axis.start(schema, q);
                Stream::Ordered(Ordered {
                    q: q.clone(),
                    axis,
                    cur,
                    buf: VecDeque::new(),
                    done: false,
                })
            } else {
                Stream::GetNext(GetNext1D::new(q.clone(), axis, Strategy1D::Rerank))
            }
        })
        .collect();
    let mut last = vec![f64::NEG_INFINITY; f.dims()];
    let mut seen: HashMap<TupleId, RankedTuple> = HashMap::new();
    let mut tuples: Vec<RankedTuple> = Vec::new();
    let mut costs = Vec::new();
    if h == 0 {
        return Ok(TopKResult {
            tuples,
            costs,
            short: false,
            launches: 0,
            spent: p.counts(),
        });
    }
    let mut dry = false;
    'rounds: loop {
        for (i, st) in streams.iter_mut().enumerate() {
            let t = match st {
                Stream::GetNext(g) => g.next(p, &mut idx.one_d, cfg)?,
                Stream::Ordered(o) => match o.next(p) {
                    Some(r) => r?,
                    None => {
                        let axis = o.axis;
                        let mut g = GetNext1D::new(q.clone(), axis, Strategy1D::Rerank);
                        let t = g.next(p, &mut idx.one_d, cfg)?;
                        *st = Stream::GetNext(g);
                        t
                    }
                },
            };
            let Some(t) = t else {
                dry = true;
                break 'rounds;
            };
            last[i] = f.orientation(i).canonical(t.ordinal[f.attrs()[i]]);
            seen.entry(t.id).or_insert_with(|| RankedTuple::new(t, f));
        }
        let tau = f.canonical_score(&last);
        let mut best: Vec<&RankedTuple> = seen.values().collect();
        best.sort_by(|a, b| rank_cmp(a.key(), b.key()));
        if best.len() >= h && best[h - 1].score < tau {
            break;
        }
    }
    let mut all: Vec<RankedTuple> = seen.into_values().collect();
    all.sort_by(|a, b| rank_cmp(a.key(), b.key()));
    all.truncate(h);
    let c = p.counts();
    for t in all {
        tuples.push(t);
        costs.push(c);
    }
    let short = dry && tuples.len() < h;
    Ok(TopKResult {
        tuples,
        costs,
        short,
        launches: 0,
        spent: c,
    })
}
