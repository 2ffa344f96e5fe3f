use crate::contour::{tighten, RankBox};
use crate::interval::{Interval, Lower, Upper};
use crate::model::{RankedTuple, RankingFunction, Schema};

/// `bx` minus the closed orthant `{c >= anchor}`, as disjoint pieces: the
/// i-th piece holds the points whose first coordinate below the anchor is i.
pub fn split_by_anchor(bx: &RankBox, anchor: &[f64]) -> Vec<RankBox> {
    let mut out = Vec::new();
    let mut rest = bx.clone();
    for (i, a) in anchor.iter().enumerate() {
        let piece = rest.with_dim(i, Interval::new(Lower::UNBOUNDED, Upper::open(*a)));
        if !piece.is_empty() {
            out.push(piece);
        }
        rest = rest.with_dim(i, Interval::new(Lower::closed(*a), Upper::UNBOUNDED));
        if rest.is_empty() {
            break;
        }
    }
    out
}

/// The boxes that may hold a tuple outranking `incumbent` inside `region`,
/// clipped to its contour.
pub fn cover(
    f: &RankingFunction,
    schema: &Schema,
    region: &RankBox,
    incumbent: &RankedTuple,
) -> Vec<RankBox> {
    split_by_anchor(region, &f.canonical(&incumbent.tuple))
        .into_iter()
        .filter_map(|b| tighten(f, schema, incumbent.score, &b))
        .collect()
}

/// Splits `bx` around a virtual tuple `v` on the contour, dropping the
/// orthant `{c >= v}`. The piece that would still hold the returned tuple
/// `t` is split again around it, giving between m and 2m - 1 pieces.
pub fn virtual_split(bx: &RankBox, v: &[f64], t: &[f64]) -> Vec<RankBox> {
    let mut out = Vec::new();
    for piece in split_by_anchor(bx, v) {
        if piece.contains(t) {
            out.extend(split_by_anchor(&piece, t));
        } else {
            out.push(piece);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{OrdinalAttr, Orientation, SearchQuery, Tuple};

    fn setup() -> (RankingFunction, Schema, RankBox) {
        let s = Schema::new(
            vec![
                OrdinalAttr::continuous("x", 0.0, 10.0),
                OrdinalAttr::continuous("y", 0.0, 10.0),
            ],
            vec![],
        )
        .unwrap();
        let f = RankingFunction::linear(&[
            (0, 1.0, Orientation::SmallerPreferred),
            (1, 1.0, Orientation::SmallerPreferred),
        ])
        .unwrap();
        let b = RankBox::from_query(&f, &s, &SearchQuery::all());
        (f, s, b)
    }

    #[test]
    fn split_counts() {
        let (_, _, b) = setup();
        assert_eq!(split_by_anchor(&b, &[4.0, 4.0]).len(), 2);
        assert_eq!(virtual_split(&b, &[3.0, 3.0], &[5.0, 5.0]).len(), 2);
        assert_eq!(virtual_split(&b, &[3.0, 3.0], &[1.0, 5.0]).len(), 3);
        assert_eq!(virtual_split(&b, &[3.0, 3.0], &[5.0, 1.0]).len(), 3);
    }

    #[test]
    fn cover_excludes_the_incumbent() {
        let (f, s, b) = setup();
        let t = RankedTuple::new(Tuple::ordinal(1, vec![4.0, 2.0]), &f);
        let c = cover(&f, &s, &b, &t);
        assert!(c.iter().all(|p| !p.contains(&[4.0, 2.0])));
        assert!(c.iter().all(|p| p.hi_corner().iter().all(|x| *x <= 6.0)));
    }
}
