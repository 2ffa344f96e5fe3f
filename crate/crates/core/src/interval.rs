//! One-dimensional bounds with explicit open/closed ends.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lower {
    pub v: f64,
    pub open: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Upper {
    pub v: f64,
    pub open: bool,
}

impl Lower {
    pub const UNBOUNDED: Lower = Lower {
        v: f64::NEG_INFINITY,
        open: false,
    };

    pub fn closed(v: f64) -> Self {
        Lower { v, open: false }
    }

    pub fn open(v: f64) -> Self {
        Lower { v, open: true }
    }

    pub fn admits(&self, x: f64) -> bool {
        x > self.v || (!self.open && x == self.v)
    }

    /// Whether every value admitted by `other` is admitted by `self`.
    pub fn covers(&self, other: &Lower) -> bool {
        self.v < other.v || (self.v == other.v && (!self.open || other.open))
    }

    pub fn tighter(self, other: Lower) -> Lower {
        if self.covers(&other) {
            other
        } else {
            self
        }
    }

    /// The bound starting right after `u` ends.
    pub fn after(u: Upper) -> Lower {
        Lower {
            v: u.v,
            open: !u.open,
        }
    }
}

impl Upper {
    pub const UNBOUNDED: Upper = Upper {
        v: f64::INFINITY,
        open: false,
    };

    pub fn closed(v: f64) -> Self {
        Upper { v, open: false }
    }

    pub fn open(v: f64) -> Self {
        Upper { v, open: true }
    }

    pub fn admits(&self, x: f64) -> bool {
        x < self.v || (!self.open && x == self.v)
    }

    pub fn covers(&self, other: &Upper) -> bool {
        self.v > other.v || (self.v == other.v && (!self.open || other.open))
    }

    pub fn tighter(self, other: Upper) -> Upper {
        if self.covers(&other) {
            other
        } else {
            self
        }
    }

    /// The bound ending right before `l` starts.
    pub fn before(l: Lower) -> Upper {
        Upper {
            v: l.v,
            open: !l.open,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Lower,
    pub hi: Upper,
}

impl Interval {
    pub const ALL: Interval = Interval {
        lo: Lower::UNBOUNDED,
        hi: Upper::UNBOUNDED,
    };

    pub fn new(lo: Lower, hi: Upper) -> Self {
        Interval { lo, hi }
    }

    pub fn closed(a: f64, b: f64) -> Self {
        Interval {
            lo: Lower::closed(a),
            hi: Upper::closed(b),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo.admits(x) && self.hi.admits(x)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.v.is_nan()
            || self.hi.v.is_nan()
            || self.lo.v > self.hi.v
            || (self.lo.v == self.hi.v && (self.lo.open || self.hi.open))
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.tighter(other.lo),
            hi: self.hi.tighter(other.hi),
        }
    }

    /// Whether `other` is a subset of `self`.
    pub fn covers(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo.covers(&other.lo) && self.hi.covers(&other.hi))
    }

    /// The image of this interval under `x -> -x`.
    pub fn negate(&self) -> Interval {
        Interval {
            lo: Lower {
                v: -self.hi.v,
                open: self.hi.open,
            },
            hi: Upper {
                v: -self.lo.v,
                open: self.lo.open,
            },
        }
    }

    pub fn width(&self) -> f64 {
        self.hi.v - self.lo.v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_and_closed_ends() {
        let i = Interval::new(Lower::open(2.0), Upper::closed(5.0));
        assert!(!i.contains(2.0));
        assert!(i.contains(5.0));
        assert!(i.contains(3.0));
        assert!(Interval::new(Lower::closed(2.0), Upper::open(2.0)).is_empty());
        assert!(!Interval::closed(2.0, 2.0).is_empty());
    }

    #[test]
    fn after_and_before_partition_the_line() {
        let u = Upper::closed(3.0);
        let l = Lower::after(u);
        for x in [2.0, 3.0, 3.5] {
            assert_ne!(u.admits(x), l.admits(x));
        }
        let l = Lower::closed(1.0);
        let u = Upper::before(l);
        for x in [0.5, 1.0, 1.5] {
            assert_ne!(u.admits(x), l.admits(x));
        }
    }

    #[test]
    fn negate_round_trips_membership() {
        let i = Interval::new(Lower::open(-1.0), Upper::closed(4.0));
        let n = i.negate();
        for x in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            assert_eq!(i.contains(x), n.contains(-x));
        }
    }

    #[test]
    fn covers_respects_open_ends() {
        let a = Interval::new(Lower::open(0.0), Upper::closed(1.0));
        let b = Interval::closed(0.0, 1.0);
        assert!(b.covers(&a));
        assert!(!a.covers(&b));
    }
}
