use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Schema, Tuple};
use crate::interval::{Interval, Lower, Upper};
use crate::{Error, Result};

/// A range on one ordinal attribute, referenced by schema position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangePredicate {
    pub attr: usize,
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl RangePredicate {
    pub fn new(attr: usize, lower: f64, lower_open: bool, upper: f64, upper_open: bool) -> Self {
        RangePredicate {
            attr,
            lower,
            upper,
            lower_open,
            upper_open,
        }
    }

    pub fn closed(attr: usize, lower: f64, upper: f64) -> Self {
        Self::new(attr, lower, false, upper, false)
    }

    pub fn open(attr: usize, lower: f64, upper: f64) -> Self {
        Self::new(attr, lower, true, upper, true)
    }

    pub fn from_interval(attr: usize, i: Interval) -> Self {
        Self::new(attr, i.lo.v, i.lo.open, i.hi.v, i.hi.open)
    }

    /// The canonical empty predicate: lower above upper.
    pub fn empty(attr: usize) -> Self {
        Self::closed(attr, f64::INFINITY, f64::NEG_INFINITY)
    }

    pub fn interval(&self) -> Interval {
        Interval::new(
            Lower {
                v: self.lower,
                open: self.lower_open,
            },
            Upper {
                v: self.upper,
                open: self.upper_open,
            },
        )
    }

    pub fn is_empty(&self) -> bool {
        self.interval().is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.interval().contains(x)
    }

    pub fn intersect(&self, other: &RangePredicate) -> RangePredicate {
        debug_assert_eq!(self.attr, other.attr);
        Self::from_interval(self.attr, self.interval().intersect(&other.interval()))
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        if self.attr >= schema.ordinal().len() {
            return Err(Error::InvalidQuery(format!(
                "ordinal attribute #{} does not exist",
                self.attr
            )));
        }
        if self.lower.is_nan() || self.upper.is_nan() {
            return Err(Error::InvalidQuery("range bound is NaN".into()));
        }
        if self.lower > self.upper {
            return Err(Error::InvalidQuery(format!(
                "range on {} has lower > upper",
                schema.attr(self.attr).name
            )));
        }
        if self.lower == self.upper && (self.lower_open || self.upper_open) {
            return Err(Error::InvalidQuery(format!(
                "degenerate range on {} must be closed on both ends",
                schema.attr(self.attr).name
            )));
        }
        Ok(())
    }
}

/// The closed-range equivalent of `p`, for interfaces that only accept closed ranges.
///
/// Continuous domains shrink open ends by `epsilon_rel` times the domain width;
/// grid domains snap to the nearest admitted grid point. An empty result is
/// returned as [`RangePredicate::empty`].
pub fn close_open_range(p: &RangePredicate, schema: &Schema) -> RangePredicate {
    let a = schema.attr(p.attr);
    let (lo, hi) = if a.step().is_some() {
        match (
            a.snap_up(p.lower, p.lower_open),
            a.snap_down(p.upper, p.upper_open),
        ) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return RangePredicate::empty(p.attr),
        }
    } else {
        let eps = schema.epsilon_rel() * a.width();
        let lo = if p.lower_open && p.lower.is_finite() {
            p.lower + eps
        } else {
            p.lower
        };
        let hi = if p.upper_open && p.upper.is_finite() {
            p.upper - eps
        } else {
            p.upper
        };
        (lo, hi)
    };
    if lo > hi {
        RangePredicate::empty(p.attr)
    } else {
        RangePredicate::closed(p.attr, lo, hi)
    }
}

/// A conjunctive query: ordinal ranges plus categorical equalities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchQuery {
    pub ranges: Vec<RangePredicate>,
    pub equalities: Vec<(usize, String)>,
}

impl SearchQuery {
    pub fn all() -> Self {
        Self::default()
    }

    /// Adds a range, intersecting it with any existing range on the same attribute.
    pub fn with_range(mut self, p: RangePredicate) -> Self {
        match self.ranges.iter_mut().find(|r| r.attr == p.attr) {
            Some(r) => *r = r.intersect(&p),
            None => self.ranges.push(p),
        }
        self
    }

    pub fn with_interval(self, attr: usize, i: Interval) -> Self {
        if i == Interval::ALL {
            return self;
        }
        self.with_range(RangePredicate::from_interval(attr, i))
    }

    pub fn with_equality(mut self, attr: usize, value: impl Into<String>) -> Self {
        self.equalities.push((attr, value.into()));
        self
    }

    pub fn without_range(mut self, attr: usize) -> Self {
        self.ranges.retain(|r| r.attr != attr);
        self
    }

    pub fn range_on(&self, attr: usize) -> Option<&RangePredicate> {
        self.ranges.iter().find(|r| r.attr == attr)
    }

    pub fn interval_on(&self, attr: usize) -> Interval {
        self.range_on(attr)
            .map(|r| r.interval())
            .unwrap_or(Interval::ALL)
    }

    pub fn is_unconstrained(&self) -> bool {
        self.ranges.is_empty() && self.equalities.is_empty()
    }

    pub fn matches(&self, t: &Tuple) -> bool {
        self.ranges.iter().all(|r| r.contains(t.ordinal[r.attr]))
            && self.equalities.iter().all(|(a, v)| t.categorical[*a] == *v)
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        self.validate_structure(schema)?;
        self.ranges.iter().try_for_each(|r| r.validate(schema))
    }

    /// Checks attribute references only; empty ranges pass.
    pub fn validate_structure(&self, schema: &Schema) -> Result<()> {
        for (i, r) in self.ranges.iter().enumerate() {
            if r.attr >= schema.ordinal().len() {
                return Err(Error::InvalidQuery(format!(
                    "ordinal attribute #{} does not exist",
                    r.attr
                )));
            }
            if r.lower.is_nan() || r.upper.is_nan() {
                return Err(Error::InvalidQuery("range bound is NaN".into()));
            }
            if self.ranges[..i].iter().any(|o| o.attr == r.attr) {
                return Err(Error::InvalidQuery(format!(
                    "more than one range on {}",
                    schema.attr(r.attr).name
                )));
            }
        }
        for (i, (a, _)) in self.equalities.iter().enumerate() {
            if *a >= schema.categorical().len() {
                return Err(Error::InvalidQuery(format!(
                    "categorical attribute #{a} does not exist"
                )));
            }
            if self.equalities[..i].iter().any(|(o, _)| o == a) {
                return Err(Error::InvalidQuery(format!(
                    "more than one equality on {}",
                    schema.categorical()[*a].name
                )));
            }
        }
        Ok(())
    }

    /// True when no tuple of the schema can match, decidable without asking the database.
    pub fn is_provably_empty(&self, schema: &Schema) -> bool {
        let range_empty = self.ranges.iter().any(|r| {
            let a = schema.attr(r.attr);
            let dom = Interval::closed(a.lower, a.upper);
            r.is_empty()
                || r.interval().intersect(&dom).is_empty()
                || (a.step().is_some() && close_open_range(r, schema).is_empty())
        });
        let eq_empty = self
            .equalities
            .iter()
            .any(|(a, v)| !schema.categorical()[*a].admits(v));
        let eq_conflict = self
            .equalities
            .iter()
            .enumerate()
            .any(|(i, (a, v))| self.equalities[..i].iter().any(|(b, w)| a == b && v != w));
        range_empty || eq_empty || eq_conflict
    }

    pub fn to_spec(&self, schema: &Schema) -> QuerySpec {
        QuerySpec {
            ranges: self
                .ranges
                .iter()
                .map(|r| RangeSpec {
                    attr: schema.attr(r.attr).name.clone(),
                    lower: r.lower.is_finite().then_some(r.lower),
                    upper: r.upper.is_finite().then_some(r.upper),
                    lower_open: r.lower_open && r.lower.is_finite(),
                    upper_open: r.upper_open && r.upper.is_finite(),
                })
                .collect(),
            equalities: self
                .equalities
                .iter()
                .map(|(a, v)| (schema.categorical()[*a].name.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn display<'a>(&'a self, schema: &'a Schema) -> impl fmt::Display + 'a {
        QueryDisplay { q: self, schema }
    }
}

struct QueryDisplay<'a> {
    q: &'a SearchQuery,
    schema: &'a Schema,
}

impl fmt::Display for QueryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_unconstrained() {
            return write!(f, "*");
        }
        let mut first = true;
        for r in &self.q.ranges {
            if !first {
                write!(f, " AND ")?;
            }
            first = false;
            write!(
                f,
                "{} IN {}{}, {}{}",
                self.schema.attr(r.attr).name,
                if r.lower_open { '(' } else { '[' },
                r.lower,
                r.upper,
                if r.upper_open { ')' } else { ']' }
            )?;
        }
        for (a, v) in &self.q.equalities {
            if !first {
                write!(f, " AND ")?;
            }
            first = false;
            write!(f, "{} = {:?}", self.schema.categorical()[*a].name, v)?;
        }
        Ok(())
    }
}

/// A range on a named attribute. Missing bounds are unbounded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub attr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default)]
    pub lower_open: bool,
    #[serde(default)]
    pub upper_open: bool,
}

/// Name-based form of [`SearchQuery`] used in files and on the wire.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    #[serde(default)]
    pub ranges: Vec<RangeSpec>,
    #[serde(default)]
    pub equalities: Vec<(String, String)>,
}

impl QuerySpec {
    pub fn resolve(&self, schema: &Schema) -> Result<SearchQuery> {
        let mut q = SearchQuery::all();
        for r in &self.ranges {
            let attr = schema.ordinal_index(&r.attr)?;
            if q.range_on(attr).is_some() {
                return Err(Error::InvalidQuery(format!(
                    "more than one range on {}",
                    r.attr
                )));
            }
            q.ranges.push(RangePredicate::new(
                attr,
                r.lower.unwrap_or(f64::NEG_INFINITY),
                r.lower_open && r.lower.is_some(),
                r.upper.unwrap_or(f64::INFINITY),
                r.upper_open && r.upper.is_some(),
            ));
        }
        for (a, v) in &self.equalities {
            q.equalities.push((schema.categorical_index(a)?, v.clone()));
        }
        q.validate(schema)?;
        Ok(q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Overflow,
    Valid,
    Underflow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryOutcome {
    pub status: Status,
    pub tuples: Vec<Tuple>,
}

impl QueryOutcome {
    pub fn underflow() -> Self {
        QueryOutcome {
            status: Status::Underflow,
            tuples: Vec::new(),
        }
    }

    /// Builds the answer from matching tuples given in system-rank order.
    pub fn from_ranked(k: usize, ranked: impl IntoIterator<Item = Tuple>) -> Self {
        let mut tuples: Vec<Tuple> = ranked.into_iter().take(k + 1).collect();
        let status = if tuples.is_empty() {
            Status::Underflow
        } else if tuples.len() > k {
            tuples.truncate(k);
            Status::Overflow
        } else {
            Status::Valid
        };
        QueryOutcome { status, tuples }
    }

    pub fn is_overflow(&self) -> bool {
        self.status == Status::Overflow
    }

    pub fn is_underflow(&self) -> bool {
        self.status == Status::Underflow
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CategoricalAttr, OrdinalAttr};

    fn schema() -> Schema {
        Schema::new(
            vec![
                OrdinalAttr::grid("g", 0.0, 10.0, 1.0),
                OrdinalAttr::continuous("c", 0.0, 100.0),
            ],
            vec![CategoricalAttr::new("k", ["x", "y"])],
        )
        .unwrap()
    }

    fn t(g: f64, c: f64, k: &str) -> Tuple {
        Tuple::new(0, vec![g, c], vec![k.into()])
    }

    #[test]
    fn matches_honors_bounds() {
        let open = SearchQuery::all().with_range(RangePredicate::open(0, 2.0, 5.0));
        assert!(!open.matches(&t(2.0, 0.0, "x")));
        let closed = SearchQuery::all().with_range(RangePredicate::closed(0, 2.0, 5.0));
        assert!(closed.matches(&t(2.0, 0.0, "x")));
        assert!(SearchQuery::all().matches(&t(7.0, 3.0, "y")));
        let eq = SearchQuery::all().with_equality(0, "y");
        assert!(!eq.matches(&t(7.0, 3.0, "x")));
    }

    #[test]
    fn closing_open_ranges() {
        let s = schema();
        assert_eq!(
            close_open_range(&RangePredicate::open(0, 2.0, 5.0), &s),
            RangePredicate::closed(0, 3.0, 4.0)
        );
        assert_eq!(
            close_open_range(&RangePredicate::closed(0, 2.0, 5.0), &s),
            RangePredicate::closed(0, 2.0, 5.0)
        );
        let eps = s.epsilon_rel() * 100.0;
        let tiny = RangePredicate::open(1, 2.0, 2.0 + eps / 2.0);
        assert!(close_open_range(&tiny, &s).is_empty());
        assert!(close_open_range(&RangePredicate::open(0, 3.0, 4.0), &s).is_empty());
    }

    #[test]
    fn validation() {
        let s = schema();
        assert!(SearchQuery::all()
            .with_range(RangePredicate::open(0, 2.0, 2.0))
            .validate(&s)
            .is_err());
        assert!(SearchQuery::all()
            .with_range(RangePredicate::closed(5, 2.0, 2.0))
            .validate(&s)
            .is_err());
        let dup = SearchQuery {
            ranges: vec![RangePredicate::closed(0, 0.0, 1.0); 2],
            equalities: vec![],
        };
        assert!(dup.validate(&s).is_err());
        assert!(SearchQuery::all()
            .with_equality(3, "x")
            .validate(&s)
            .is_err());
    }

    #[test]
    fn spec_round_trip() {
        let s = schema();
        let q = SearchQuery::all()
            .with_range(RangePredicate::new(1, f64::NEG_INFINITY, false, 5.0, true))
            .with_equality(0, "x");
        assert_eq!(q.to_spec(&s).resolve(&s).unwrap(), q);
    }

    #[test]
    fn outcome_statuses() {
        let ts = |n: usize| (0..n).map(|i| Tuple::ordinal(i as u64, vec![]));
        assert_eq!(
            QueryOutcome::from_ranked(3, ts(0)).status,
            Status::Underflow
        );
        assert_eq!(QueryOutcome::from_ranked(3, ts(3)).status, Status::Valid);
        let o = QueryOutcome::from_ranked(3, ts(4));
        assert_eq!((o.status, o.tuples.len()), (Status::Overflow, 3));
    }
}
