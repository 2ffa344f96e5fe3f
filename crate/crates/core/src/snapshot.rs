//! Plain-text snapshots of the dense indexes.
//!
//! ```text
//! rerank-index format_version=1
//! 1d attr=DEP_DELAY orientation=smaller start=[0 end=12.5 exhausted=9] ids=4,17,23
//! md AIR_TIME=[10,20) TAXI_IN=[0,5] ids=8,9
//! ```
//!
//! `1d` lines hold one crawled range in key space (keys are negated values
//! for larger-preferred orientations). `md` lines hold one crawled box in
//! value space. Tuples are stored by id and resolved against the dataset on load.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::interval::{Interval, Lower, Upper};
use crate::model::{Orientation, Schema, Tuple, TupleId};
use crate::rerank1d::DenseRegion1D;
use crate::rerankmd::{DenseRegionMd, Indexes};
use crate::{Error, Result};

pub const HEADER: &str = "rerank-index format_version=1";

fn lower_str(l: Lower) -> String {
    format!("{}{}", if l.open { '(' } else { '[' }, l.v)
}

fn upper_str(u: Upper) -> String {
    format!("{}{}", u.v, if u.open { ')' } else { ']' })
}

fn ids_str(ts: &[Tuple]) -> String {
    if ts.is_empty() {
        return "-".into();
    }
    ts.iter()
        .map(|t| t.id.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn save(idx: &Indexes, schema: &Schema) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in idx.one_d.all() {
        let o = match r.orientation {
            Orientation::SmallerPreferred => "smaller",
            Orientation::LargerPreferred => "larger",
        };
        let _ = writeln!(
            out,
            "1d attr={} orientation={} start={} end={} exhausted={} ids={}",
            schema.attr(r.attr).name,
            o,
            lower_str(r.start),
            r.end,
            upper_str(r.exhausted),
            ids_str(&r.discovered)
        );
    }
    for r in idx.md.regions() {
        out.push_str("md");
        for (a, iv) in &r.ranges {
            let _ = write!(
                out,
                " {}={},{}",
                schema.attr(*a).name,
                lower_str(iv.lo),
                upper_str(iv.hi)
            );
        }
        let _ = writeln!(out, " ids={}", ids_str(&r.discovered));
    }
    out
}

struct Line<'a> {
    no: usize,
    fields: HashMap<&'a str, &'a str>,
    order: Vec<(&'a str, &'a str)>,
}

impl<'a> Line<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.no,
            msg: msg.into(),
        }
    }

    fn get(&self, k: &str) -> Result<&'a str> {
        self.fields
            .get(k)
            .copied()
            .ok_or_else(|| self.err(format!("missing {k}=")))
    }

    fn num(&self, s: &str) -> Result<f64> {
        s.parse().map_err(|_| self.err(format!("bad number {s:?}")))
    }

    fn lower(&self, s: &str) -> Result<Lower> {
        match s.split_at_checked(1) {
            Some(("[", v)) => Ok(Lower::closed(self.num(v)?)),
            Some(("(", v)) => Ok(Lower::open(self.num(v)?)),
            _ => Err(self.err(format!("bad lower bound {s:?}"))),
        }
    }

    fn upper(&self, s: &str) -> Result<Upper> {
        match s.split_at_checked(s.len().saturating_sub(1)) {
            Some((v, "]")) => Ok(Upper::closed(self.num(v)?)),
            Some((v, ")")) => Ok(Upper::open(self.num(v)?)),
            _ => Err(self.err(format!("bad upper bound {s:?}"))),
        }
    }

    fn tuples(&self, lookup: &dyn Fn(TupleId) -> Option<Tuple>) -> Result<Vec<Tuple>> {
        let ids = self.get("ids")?;
        if ids == "-" {
            return Ok(Vec::new());
        }
        ids.split(',')
            .map(|s| {
                let id = TupleId(
                    s.parse()
                        .map_err(|_| self.err(format!("bad tuple id {s:?}")))?,
                );
                lookup(id).ok_or_else(|| self.err(format!("tuple {id} is not in the dataset")))
            })
            .collect()
    }
}

/// Reads a snapshot written by [`save`]; `lookup` maps ids back to tuples.
pub fn load(
    text: &str,
    schema: &Schema,
    lookup: &dyn Fn(TupleId) -> Option<Tuple>,
) -> Result<Indexes> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        Some((no, h)) => {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected {HEADER:?}, found {h:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty snapshot".into(),
            })
        }
    }
    let mut idx = Indexes::new();
    for (no, text) in lines {
        let mut words = text.split_whitespace();
        let kind = words.next().unwrap_or_default();
        let mut line = Line {
            no,
            fields: HashMap::new(),
            order: Vec::new(),
        };
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| line.err(format!("expected key=value, found {w:?}")))?;
            line.fields.insert(k, v);
            line.order.push((k, v));
        }
        let attr = |name: &str| {
            schema
                .ordinal_index(name)
                .map_err(|_| line.err(format!("unknown attribute {name}")))
        };
        match kind {
            "1d" => {
                let orientation = match line.get("orientation")? {
                    "smaller" => Orientation::SmallerPreferred,
                    "larger" => Orientation::LargerPreferred,
                    o => return Err(line.err(format!("bad orientation {o:?}"))),
                };
                let mut discovered = line.tuples(lookup)?;
                let attr = attr(line.get("attr")?)?;
                discovered.sort_by(|a, b| {
                    orientation
                        .canonical(a.ordinal[attr])
                        .total_cmp(&orientation.canonical(b.ordinal[attr]))
                        .then(a.id.cmp(&b.id))
                });
                idx.one_d.insert_region(DenseRegion1D {
                    attr,
                    orientation,
                    start: line.lower(line.get("start")?)?,
                    end: line.num(line.get("end")?)?,
                    exhausted: line.upper(line.get("exhausted")?)?,
                    discovered,
                });
            }
            "md" => {
                let mut ranges = Vec::new();
                for (k, v) in line.order.iter().filter(|(k, _)| *k != "ids") {
                    let (lo, hi) = v
                        .split_once(',')
                        .ok_or_else(|| line.err(format!("bad range {v:?}")))?;
                    ranges.push((attr(k)?, Interval::new(line.lower(lo)?, line.upper(hi)?)));
                }
                idx.md
                    .insert(DenseRegionMd::new(ranges, line.tuples(lookup)?));
            }
            k => return Err(line.err(format!("unknown record kind {k:?}"))),
        }
    }
    Ok(idx)
}
