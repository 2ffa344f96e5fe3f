//! Rank-contour geometry: intercepts, outrank floors and the largest box
//! lying entirely on the outranking side of a contour.
//!
//! Everything here works in canonical coordinates, one per ranked attribute,
//! where the key of a value is `orientation.sign() * value` and smaller keys
//! score lower (better).

use crate::interval::{Interval, Lower, Upper};
use crate::model::{
    OrdinalAttr, Orientation, RankingFunction, RankingKind, Schema, SearchQuery, Tuple,
};
use crate::{Error, Result};

const ASCENT_SWEEPS: usize = 200;
const ASCENT_TOL: f64 = 1e-6;

/// A box over the ranked attributes of a ranking function, in canonical coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RankBox {
    pub dims: Vec<Interval>,
}

impl RankBox {
    /// The ranked-attribute domains narrowed by `q`'s ranges.
    pub fn from_query(f: &RankingFunction, schema: &Schema, q: &SearchQuery) -> Self {
        let dims = (0..f.dims())
            .map(|i| {
                let a = schema.attr(f.attrs()[i]);
                let o = f.orientation(i);
                key_interval(
                    o,
                    Interval::closed(a.lower, a.upper).intersect(&q.interval_on(f.attrs()[i])),
                )
            })
            .collect();
        RankBox { dims }
    }

    pub fn dims(&self) -> usize {
        self.dims.len()
    }

    pub fn lo_corner(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d.lo.v).collect()
    }

    pub fn hi_corner(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d.hi.v).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.iter().any(Interval::is_empty)
    }

    /// Empty, or holding no admissible value on some grid attribute.
    pub fn is_void(&self, f: &RankingFunction, schema: &Schema) -> bool {
        self.is_empty()
            || self.dims.iter().enumerate().any(|(i, d)| {
                let a = schema.attr(f.attrs()[i]);
                a.step().is_some() && !has_grid_point(a, f.orientation(i), d)
            })
    }

    /// Whether every bound of the lowest corner is closed.
    pub fn lo_closed(&self) -> bool {
        self.dims.iter().all(|d| !d.lo.open)
    }

    pub fn contains(&self, c: &[f64]) -> bool {
        self.dims.iter().zip(c).all(|(d, x)| d.contains(*x))
    }

    pub fn contains_tuple(&self, f: &RankingFunction, t: &Tuple) -> bool {
        self.contains(&f.canonical(t))
    }

    pub fn intersect(&self, other: &RankBox) -> RankBox {
        RankBox {
            dims: self
                .dims
                .iter()
                .zip(&other.dims)
                .map(|(a, b)| a.intersect(b))
                .collect(),
        }
    }

    pub fn covers(&self, other: &RankBox) -> bool {
        other.is_empty() || self.dims.iter().zip(&other.dims).all(|(a, b)| a.covers(b))
    }

    pub fn with_dim(&self, i: usize, iv: Interval) -> RankBox {
        let mut b = self.clone();
        b.dims[i] = b.dims[i].intersect(&iv);
        b
    }

    /// Product of widths relative to the full domains; 0 for degenerate boxes.
    pub fn volume(&self, f: &RankingFunction, schema: &Schema) -> f64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let w = schema.attr(f.attrs()[i]).width();
                if w > 0.0 {
                    (d.width() / w).max(0.0)
                } else {
                    1.0
                }
            })
            .product()
    }

    /// The value-space ranges of the box, one per ranked attribute.
    pub fn value_ranges(&self, f: &RankingFunction) -> Vec<(usize, Interval)> {
        self.dims
            .iter()
            .enumerate()
            .map(|(i, d)| (f.attrs()[i], key_interval(f.orientation(i), *d)))
            .collect()
    }

    /// `q` narrowed to the box.
    pub fn query(&self, f: &RankingFunction, q: &SearchQuery) -> SearchQuery {
        self.value_ranges(f)
            .into_iter()
            .fold(q.clone(), |q, (a, iv)| q.with_interval(a, iv))
    }
}

/// Maps a value interval to key space and back.
pub fn key_interval(o: Orientation, iv: Interval) -> Interval {
    match o {
        Orientation::SmallerPreferred => iv,
        Orientation::LargerPreferred => iv.negate(),
    }
}

fn has_grid_point(a: &OrdinalAttr, o: Orientation, keys: &Interval) -> bool {
    let v = key_interval(o, *keys);
    match (
        a.snap_up(v.lo.v.max(a.lower), v.lo.open && v.lo.v >= a.lower),
        a.snap_down(v.hi.v.min(a.upper), v.hi.open && v.hi.v <= a.upper),
    ) {
        (Some(lo), Some(hi)) => lo <= hi,
        _ => false,
    }
}

/// Grid keys of one ranked attribute, ascending.
struct KeyGrid<'a> {
    attr: &'a OrdinalAttr,
    o: Orientation,
}

impl KeyGrid<'_> {
    /// Number of grid points.
    fn len(&self) -> i64 {
        self.attr.grid_last().map_or(0, |l| l + 1)
    }

    /// The `i`-th smallest key.
    fn key(&self, i: i64) -> f64 {
        match self.o {
            Orientation::SmallerPreferred => self.attr.grid_value(i),
            Orientation::LargerPreferred => -self.attr.grid_value(self.len() - 1 - i),
        }
    }

    /// Index range of the keys inside `iv`, if any.
    fn span(&self, iv: &Interval) -> Option<(i64, i64)> {
        let n = self.len();
        let first = partition_point(0, n, |i| !iv.lo.admits(self.key(i)));
        let last = partition_point(0, n, |i| iv.hi.admits(self.key(i))) - 1;
        (first <= last && first < n && last >= 0).then_some((first, last))
    }
}

/// First index in `[lo, hi)` where `pred` turns false, for a predicate true then false.
fn partition_point(mut lo: i64, mut hi: i64, pred: impl Fn(i64) -> bool) -> i64 {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest `x` in `[a, b]` with `ok(x)`, given `ok(a)` and `ok` true then false.
fn float_max(a: f64, b: f64, guess: Option<f64>, ok: impl Fn(f64) -> bool) -> f64 {
    if ok(b) {
        return b;
    }
    let (mut lo, mut hi) = (a, b);
    if let Some(g) = guess.filter(|g| g.is_finite() && *g > a && *g < b) {
        let mut d = g.abs().max(1.0) * 1e-12;
        let (mut l, mut h) = (g, g);
        while l > a && !ok(l) {
            l = (g - d).max(a);
            d *= 4.0;
        }
        d = g.abs().max(1.0) * 1e-12;
        while h < b && ok(h) {
            h = (g + d).min(b);
            d *= 4.0;
        }
        if ok(l) && !ok(h) {
            lo = l;
            hi = h;
        }
    }
    loop {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            return lo;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Smallest `x` in `[a, b]` with `ok(x)`, given `ok(b)` and `ok` false then true.
fn float_min(a: f64, b: f64, guess: Option<f64>, ok: impl Fn(f64) -> bool) -> f64 {
    -float_max(-b, -a, guess.map(|g| -g), |x| ok(-x))
}

/// Where a contour meets one axis of a box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intercept {
    /// In value space.
    pub value: f64,
    /// In key space.
    pub key: f64,
    /// The contour passes beyond the box; `key` is the box's far end.
    pub saturated: bool,
    /// Even the box's best corner scores above the reference.
    pub empty: bool,
}

/// ℓ for ranked dimension `dim`: the largest key `x` in the box such that the
/// box's best corner with `dim` moved to `x` scores at most `t_score`. On
/// grid domains only grid values are considered.
pub fn axis_intercept(
    f: &RankingFunction,
    schema: &Schema,
    t_score: f64,
    dim: usize,
    bx: &RankBox,
) -> Intercept {
    let o = f.orientation(dim);
    let attr = schema.attr(f.attrs()[dim]);
    let base = bx.lo_corner();
    let g = |x: f64| {
        let mut c = base.clone();
        c[dim] = x;
        f.canonical_score(&c)
    };
    let iv = bx.dims[dim];
    let out = |key: f64, saturated: bool, empty: bool| Intercept {
        value: o.sign() * key,
        key,
        saturated,
        empty,
    };
    if attr.step().is_some() {
        let grid = KeyGrid { attr, o };
        let Some((first, last)) = grid.span(&iv) else {
            return out(iv.lo.v, false, true);
        };
        if g(grid.key(first)) > t_score {
            return out(grid.key(first), false, true);
        }
        if g(grid.key(last)) <= t_score {
            return out(grid.key(last), true, false);
        }
        let i = partition_point(first, last + 1, |i| g(grid.key(i)) <= t_score) - 1;
        return out(grid.key(i), false, false);
    }
    let (a, b) = (iv.lo.v, iv.hi.v);
    if g(a) > t_score {
        return out(a, false, true);
    }
    if g(b) <= t_score {
        return out(b, true, false);
    }
    let guess = match f.kind() {
        RankingKind::Linear { weights } if weights[dim] > 0.0 => {
            Some(a + (t_score - g(a)) / weights[dim])
        }
        _ => None,
    };
    out(float_max(a, b, guess, |x| g(x) <= t_score), false, false)
}

/// An outrank floor b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Floor {
    pub value: f64,
    pub key: f64,
    /// Every domain value qualifies; `key` is the domain's best end.
    pub unbounded: bool,
}

/// b for ranked dimension `dim`: the smallest key `x` in the attribute's
/// domain such that `anchor` with `dim` moved to `x` still scores at least
/// `t_score`. On grid domains only grid values are considered.
pub fn outrank_floor(
    f: &RankingFunction,
    schema: &Schema,
    t_score: f64,
    anchor: &Tuple,
    dim: usize,
) -> Result<Floor> {
    let o = f.orientation(dim);
    let attr = schema.attr(f.attrs()[dim]);
    let base = f.canonical(anchor);
    if f.canonical_score(&base) < t_score {
        return Err(Error::InvalidQuery(format!(
            "anchor {} scores below the reference score",
            anchor.id
        )));
    }
    let g = |x: f64| {
        let mut c = base.clone();
        c[dim] = x;
        f.canonical_score(&c)
    };
    let dom = key_interval(o, Interval::closed(attr.lower, attr.upper));
    let out = |key: f64, unbounded: bool| Floor {
        value: o.sign() * key,
        key,
        unbounded,
    };
    if attr.step().is_some() {
        let grid = KeyGrid { attr, o };
        let n = grid.len();
        if g(grid.key(0)) >= t_score {
            return Ok(out(grid.key(0), true));
        }
        if g(grid.key(n - 1)) < t_score {
            return Ok(out(base[dim], false));
        }
        let i = partition_point(0, n, |i| g(grid.key(i)) < t_score);
        return Ok(out(grid.key(i), false));
    }
    let (a, b) = (dom.lo.v, dom.hi.v.max(base[dim]));
    if g(a) >= t_score {
        return Ok(out(a, true));
    }
    let guess = match f.kind() {
        RankingKind::Linear { weights } if weights[dim] > 0.0 => {
            Some(base[dim] - (g(base[dim]) - t_score) / weights[dim])
        }
        _ => None,
    };
    // closed form when it is feasible
    match guess.filter(|x| *x >= a && *x <= b && g(*x) >= t_score) {
        Some(x) => Ok(out(x, false)),
        None => Ok(out(float_min(a, b, guess, |x| g(x) >= t_score), false)),
    }
}

/// A point placed on a contour to bound the largest outranking box.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualTuple {
    /// Value-space coordinates, one per ranked attribute.
    pub values: Vec<f64>,
    /// Key-space coordinates.
    pub keys: Vec<f64>,
    pub score: f64,
    /// The box's best corner already scores at least the reference.
    pub at_best_corner: bool,
    /// Every point of the box scores below the reference; `keys` is the worst corner.
    pub fully_dominated: bool,
}

impl VirtualTuple {
    fn new(
        f: &RankingFunction,
        keys: Vec<f64>,
        at_best_corner: bool,
        fully_dominated: bool,
    ) -> Self {
        let values = keys
            .iter()
            .enumerate()
            .map(|(i, k)| f.orientation(i).sign() * k)
            .collect();
        let score = f.canonical_score(&keys);
        VirtualTuple {
            values,
            keys,
            score,
            at_best_corner,
            fully_dominated,
        }
    }

    /// Product of `keys - lo` relative to the domains.
    pub fn volume(&self, f: &RankingFunction, schema: &Schema, bx: &RankBox) -> f64 {
        self.keys
            .iter()
            .zip(&bx.dims)
            .enumerate()
            .map(|(i, (k, d))| {
                let w = schema.attr(f.attrs()[i]).width();
                let x = (k - d.lo.v).max(0.0);
                if w > 0.0 {
                    x / w
                } else {
                    1.0
                }
            })
            .product()
    }
}

/// The contour point `v'` whose box `[lo, v']` has the largest volume, with
/// `S(v') >= t_score`. Linear functions spread the score mass evenly over
/// the dimensions, clamped to the box; general functions use pairwise
/// coordinate ascent on the log volume.
pub fn max_volume_dominated_box(
    f: &RankingFunction,
    schema: &Schema,
    t_score: f64,
    bx: &RankBox,
) -> VirtualTuple {
    let lo = bx.lo_corner();
    let hi = bx.hi_corner();
    if f.canonical_score(&lo) >= t_score {
        return VirtualTuple::new(f, lo, true, false);
    }
    if f.canonical_score(&hi) < t_score {
        return VirtualTuple::new(f, hi, false, true);
    }
    let keys = match f.kind() {
        RankingKind::Linear { weights } => water_fill(weights, t_score, &lo, &hi),
        RankingKind::General { .. } => coordinate_ascent(f, schema, t_score, &lo, &hi),
    };
    VirtualTuple::new(f, lift(f, t_score, keys, &hi), false, false)
}

fn water_fill(w: &[f64], t_score: f64, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let m = lo.len();
    let mut v = lo.to_vec();
    let mut active: Vec<usize> = Vec::new();
    for i in 0..m {
        if w[i] > 0.0 {
            active.push(i);
        } else {
            v[i] = hi[i];
        }
    }
    let mut mass = t_score - w.iter().zip(&v).map(|(w, x)| w * x).sum::<f64>();
    loop {
        if active.is_empty() {
            return v;
        }
        let share = mass / active.len() as f64;
        let clamped: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| lo[i] + share / w[i] > hi[i])
            .collect();
        if clamped.is_empty() {
            for &i in &active {
                v[i] = lo[i] + share / w[i];
            }
            return v;
        }
        for i in clamped {
            v[i] = hi[i];
            mass -= w[i] * (hi[i] - lo[i]);
            active.retain(|&j| j != i);
        }
    }
}

/// Raises coordinates until the score reaches `t_score`.
fn lift(f: &RankingFunction, t_score: f64, mut v: Vec<f64>, hi: &[f64]) -> Vec<f64> {
    for i in (0..v.len()).rev() {
        if f.canonical_score(&v) >= t_score {
            break;
        }
        let g = |x: f64| {
            let mut c = v.clone();
            c[i] = x;
            f.canonical_score(&c) >= t_score
        };
        let x = if g(hi[i]) {
            float_min(v[i], hi[i], None, g)
        } else {
            hi[i]
        };
        v[i] = x;
    }
    v
}

fn log_volume(v: &[f64], lo: &[f64], scale: &[f64]) -> f64 {
    v.iter()
        .zip(lo)
        .zip(scale)
        .map(|((x, l), s)| ((x - l) / s).ln())
        .sum()
}

fn coordinate_ascent(
    f: &RankingFunction,
    schema: &Schema,
    t_score: f64,
    lo: &[f64],
    hi: &[f64],
) -> Vec<f64> {
    let m = lo.len();
    let scale: Vec<f64> = (0..m)
        .map(|i| schema.attr(f.attrs()[i]).width().max(f64::MIN_POSITIVE))
        .collect();
    // start on the diagonal
    let at = |l: f64| -> Vec<f64> { (0..m).map(|i| lo[i] + l * (hi[i] - lo[i])).collect() };
    let lambda = float_min(0.0, 1.0, None, |l| f.canonical_score(&at(l)) >= t_score);
    let mut v = at(lambda);
    if m < 2 {
        return v;
    }
    // y on dimension j that puts the point back on the contour, with dimension i at x
    let solve = |v: &[f64], i: usize, x: f64, j: usize| -> Option<f64> {
        let mut c = v.to_vec();
        c[i] = x;
        c[j] = hi[j];
        if f.canonical_score(&c) < t_score {
            return None;
        }
        c[j] = lo[j];
        if f.canonical_score(&c) >= t_score {
            return Some(lo[j]);
        }
        Some(float_min(lo[j], hi[j], None, |y| {
            let mut d = c.clone();
            d[j] = y;
            f.canonical_score(&d) >= t_score
        }))
    };
    let mut best = log_volume(&v, lo, &scale);
    for _ in 0..ASCENT_SWEEPS {
        let before = best;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let objective = |x: f64| -> f64 {
                    match solve(&v, i, x, j) {
                        Some(y) => {
                            let mut c = v.clone();
                            c[i] = x;
                            c[j] = y;
                            log_volume(&c, lo, &scale)
                        }
                        None => f64::NEG_INFINITY,
                    }
                };
                let x = golden_max(lo[i], hi[i], &objective);
                let val = objective(x);
                if val > best {
                    if let Some(y) = solve(&v, i, x, j) {
                        v[i] = x;
                        v[j] = y;
                        best = val;
                    }
                }
            }
        }
        if best - before <= ASCENT_TOL {
            break;
        }
    }
    v
}

fn golden_max(mut a: f64, mut b: f64, g: &impl Fn(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-12 * (a.abs() + b.abs()).max(1.0) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// A reference score with the function and box it is evaluated in.
#[derive(Clone, Debug)]
pub struct Contour<'a> {
    pub f: &'a RankingFunction,
    pub schema: &'a Schema,
    pub score: f64,
    pub bx: RankBox,
}

impl<'a> Contour<'a> {
    pub fn new(f: &'a RankingFunction, schema: &'a Schema, score: f64, bx: RankBox) -> Self {
        Contour {
            f,
            schema,
            score,
            bx,
        }
    }

    /// Whether some point of the box scores at most the reference.
    pub fn feasible(&self) -> bool {
        !self.bx.is_empty() && self.f.canonical_score(&self.bx.lo_corner()) <= self.score
    }

    pub fn axis_intercept(&self, dim: usize) -> Intercept {
        axis_intercept(self.f, self.schema, self.score, dim, &self.bx)
    }

    pub fn outrank_floor(&self, anchor: &Tuple, dim: usize) -> Result<Floor> {
        outrank_floor(self.f, self.schema, self.score, anchor, dim)
    }

    pub fn max_volume_dominated_box(&self) -> VirtualTuple {
        max_volume_dominated_box(self.f, self.schema, self.score, &self.bx)
    }

    /// Shrinks every dimension of the box to its intercept. `None` when no
    /// point of the box can score at most the reference.
    pub fn tighten(&self) -> Option<RankBox> {
        tighten(self.f, self.schema, self.score, &self.bx)
    }
}

/// Clips `bx` to the points that can score at most `score`: `None` when the
/// best corner already scores above it (or reaches it on an open corner).
pub fn tighten(f: &RankingFunction, schema: &Schema, score: f64, bx: &RankBox) -> Option<RankBox> {
    if bx.is_void(f, schema) {
        return None;
    }
    let s = f.canonical_score(&bx.lo_corner());
    if s > score || (s == score && !bx.lo_closed()) {
        return None;
    }
    let mut out = bx.clone();
    for i in 0..bx.dims() {
        let l = axis_intercept(f, schema, score, i, bx);
        if l.empty {
            return None;
        }
        if !l.saturated {
            out.dims[i].hi = out.dims[i].hi.tighter(Upper::closed(l.key));
        }
    }
    (!out.is_void(f, schema)).then_some(out)
}

/// The half-open key interval `[lo, x)`.
pub fn below(x: f64) -> Interval {
    Interval::new(Lower::UNBOUNDED, Upper::open(x))
}

/// The closed key interval `[x, +inf)`.
pub fn at_or_above(x: f64) -> Interval {
    Interval::new(Lower::closed(x), Upper::UNBOUNDED)
}
