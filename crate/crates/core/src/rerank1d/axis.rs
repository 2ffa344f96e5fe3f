use crate::interval::{Interval, Lower};
use crate::model::{Orientation, Schema, SearchQuery, Tuple};

/// A ranked attribute seen in canonical key space, where the key of a
/// tuple is `orientation.sign() * value` and smaller keys rank first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Axis {
    pub attr: usize,
    pub orientation: Orientation,
}

impl Axis {
    pub fn new(attr: usize, orientation: Orientation) -> Self {
        Axis { attr, orientation }
    }

    pub fn key(&self, t: &Tuple) -> f64 {
        self.orientation.canonical(t.ordinal[self.attr])
    }

    /// Maps a key interval to the matching value interval (and back).
    pub fn flip(&self, i: Interval) -> Interval {
        match self.orientation {
            Orientation::SmallerPreferred => i,
            Orientation::LargerPreferred => i.negate(),
        }
    }

    pub fn query(&self, q: &SearchQuery, keys: Interval) -> SearchQuery {
        q.clone().with_interval(self.attr, self.flip(keys))
    }

    pub fn domain(&self, schema: &Schema) -> Interval {
        let a = schema.attr(self.attr);
        self.flip(Interval::closed(a.lower, a.upper))
    }

    /// Where a search under `q` starts: the domain bottom, raised by any range `q` puts on the attribute.
    pub fn start(&self, schema: &Schema, q: &SearchQuery) -> Lower {
        self.domain(schema)
            .intersect(&self.flip(q.interval_on(self.attr)))
            .lo
    }

    /// The tuple with the smallest (key, id).
    pub fn lowest<'t>(&self, ts: &'t [Tuple]) -> Option<&'t Tuple> {
        ts.iter()
            .min_by(|a, b| self.key(a).total_cmp(&self.key(b)).then(a.id.cmp(&b.id)))
    }

    /// A split point strictly between `lo` and `hi` in key space, snapped to
    /// the grid on grid domains. `None` when no such point exists.
    pub fn midpoint(&self, schema: &Schema, lo: f64, hi: f64) -> Option<f64> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return None;
        }
        let mid = lo + (hi - lo) / 2.0;
        let a = schema.attr(self.attr);
        let inside = |m: f64| m > lo && m < hi;
        if a.step().is_none() {
            return inside(mid).then_some(mid);
        }
        let s = self.orientation.sign();
        let vm = s * mid;
        [a.snap_down(vm, false), a.snap_up(vm, false)]
            .into_iter()
            .flatten()
            .map(|v| s * v)
            .filter(|m| inside(*m))
            .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OrdinalAttr;

    #[test]
    fn grid_midpoints_stay_strictly_inside() {
        let s = Schema::new(vec![OrdinalAttr::grid("a", 0.0, 10.0, 1.0)], vec![]).unwrap();
        let up = Axis::new(0, Orientation::SmallerPreferred);
        assert_eq!(up.midpoint(&s, 2.0, 6.0), Some(4.0));
        assert!(matches!(up.midpoint(&s, 2.0, 5.0), Some(m) if m == 3.0 || m == 4.0));
        assert_eq!(up.midpoint(&s, 2.0, 3.0), None);
        let down = Axis::new(0, Orientation::LargerPreferred);
        assert_eq!(down.midpoint(&s, -6.0, -2.0), Some(-4.0));
        assert_eq!(down.midpoint(&s, -3.0, -2.0), None);
    }

    #[test]
    fn keys_flip_for_larger_preferred() {
        let s = Schema::new(vec![OrdinalAttr::continuous("a", 0.0, 10.0)], vec![]).unwrap();
        let down = Axis::new(0, Orientation::LargerPreferred);
        assert_eq!(down.domain(&s), Interval::closed(-10.0, 0.0));
        let q = SearchQuery::all().with_range(crate::model::RangePredicate::closed(0, 2.0, 7.0));
        assert_eq!(down.start(&s, &q), Lower::closed(-7.0));
    }
}
