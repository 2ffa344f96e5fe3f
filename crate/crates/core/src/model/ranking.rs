use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Schema, Tuple};
use crate::{Error, Result};

/// Which end of an attribute's domain ranks higher.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    SmallerPreferred,
    LargerPreferred,
}

impl Orientation {
    /// Multiplier mapping a value to canonical "smaller is better" space.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::SmallerPreferred => 1.0,
            Orientation::LargerPreferred => -1.0,
        }
    }

    pub fn canonical(self, v: f64) -> f64 {
        self.sign() * v
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::SmallerPreferred => Orientation::LargerPreferred,
            Orientation::LargerPreferred => Orientation::SmallerPreferred,
        }
    }
}

/// Score callback over the ranked attribute values, in ranked-attribute order.
pub type ScoreFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum RankingKind {
    Linear { weights: Vec<f64> },
    General { score: ScoreFn, label: String },
}

/// A monotone user ranking function. Smaller scores rank higher.
#[derive(Clone)]
pub struct RankingFunction {
    attrs: Vec<usize>,
    orientation: Vec<Orientation>,
    kind: RankingKind,
}

impl fmt::Debug for RankingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("RankingFunction");
        d.field("attrs", &self.attrs)
            .field("orientation", &self.orientation);
        match &self.kind {
            RankingKind::Linear { weights } => d.field("weights", weights),
            RankingKind::General { label, .. } => d.field("general", label),
        };
        d.finish()
    }
}

impl RankingFunction {
    /// Weighted sum with nonnegative weights and a preference order per attribute.
    pub fn linear(terms: &[(usize, f64, Orientation)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidRanking("no ranked attributes".into()));
        }
        for (i, (a, w, _)) in terms.iter().enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidRanking(format!(
                    "weight {w} must be finite and nonnegative"
                )));
            }
            if terms[..i].iter().any(|(b, _, _)| b == a) {
                return Err(Error::InvalidRanking(format!(
                    "attribute #{a} appears twice"
                )));
            }
        }
        Ok(RankingFunction {
            attrs: terms.iter().map(|t| t.0).collect(),
            orientation: terms.iter().map(|t| t.2).collect(),
            kind: RankingKind::Linear {
                weights: terms.iter().map(|t| t.1).collect(),
            },
        })
    }

    /// Signed coefficients: a negative coefficient means larger values are preferred.
    pub fn from_coefficients(coefs: &[(usize, f64)]) -> Result<Self> {
        let terms: Vec<_> = coefs
            .iter()
            .map(|&(a, c)| {
                let o = if c < 0.0 {
                    Orientation::LargerPreferred
                } else {
                    Orientation::SmallerPreferred
                };
                (a, c.abs(), o)
            })
            .collect();
        Self::linear(&terms)
    }

    /// Ranking by a single attribute.
    pub fn attribute(attr: usize, orientation: Orientation) -> Self {
        RankingFunction {
            attrs: vec![attr],
            orientation: vec![orientation],
            kind: RankingKind::Linear { weights: vec![1.0] },
        }
    }

    /// An arbitrary score callback. Monotonicity is the caller's promise; see [`check_monotone`].
    pub fn general(
        attrs: Vec<usize>,
        orientation: Vec<Orientation>,
        label: impl Into<String>,
        score: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if attrs.is_empty() || attrs.len() != orientation.len() {
            return Err(Error::InvalidRanking(
                "need one orientation per ranked attribute".into(),
            ));
        }
        for (i, a) in attrs.iter().enumerate() {
            if attrs[..i].contains(a) {
                return Err(Error::InvalidRanking(format!(
                    "attribute #{a} appears twice"
                )));
            }
        }
        Ok(RankingFunction {
            attrs,
            orientation,
            kind: RankingKind::General {
                score: Arc::new(score),
                label: label.into(),
            },
        })
    }

    /// Parses `w1*ATTR1 + w2*ATTR2 ...`; a term may omit its coefficient and carry a sign.
    pub fn parse(spec: &str, schema: &Schema) -> Result<Self> {
        let coefs = parse_terms(spec)?
            .into_iter()
            .map(|(c, name)| {
                schema
                    .ordinal_index(&name)
                    .map(|a| (a, c))
                    .map_err(|_| Error::InvalidRanking(format!("unknown attribute {name}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coefficients(&coefs)
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        match self.attrs.iter().find(|a| **a >= schema.ordinal().len()) {
            Some(a) => Err(Error::InvalidRanking(format!(
                "ordinal attribute #{a} does not exist"
            ))),
            None => Ok(()),
        }
    }

    pub fn attrs(&self) -> &[usize] {
        &self.attrs
    }

    pub fn dims(&self) -> usize {
        self.attrs.len()
    }

    pub fn orientation(&self, i: usize) -> Orientation {
        self.orientation[i]
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientation
    }

    pub fn kind(&self) -> &RankingKind {
        &self.kind
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match &self.kind {
            RankingKind::Linear { weights } => Some(weights),
            RankingKind::General { .. } => None,
        }
    }

    /// Score from canonical coordinates, one per ranked attribute.
    pub fn canonical_score(&self, c: &[f64]) -> f64 {
        match &self.kind {
            RankingKind::Linear { weights } => weights.iter().zip(c).map(|(w, x)| w * x).sum(),
            RankingKind::General { score, .. } => {
                let v: Vec<f64> = c
                    .iter()
                    .zip(&self.orientation)
                    .map(|(x, o)| o.sign() * x)
                    .collect();
                score(&v)
            }
        }
    }

    /// Canonical coordinates of a tuple, one per ranked attribute.
    pub fn canonical(&self, t: &Tuple) -> Vec<f64> {
        self.attrs
            .iter()
            .zip(&self.orientation)
            .map(|(a, o)| o.canonical(t.ordinal[*a]))
            .collect()
    }

    /// Score of a tuple already validated against the schema.
    pub fn eval(&self, t: &Tuple) -> f64 {
        self.canonical_score(&self.canonical(t))
    }

    pub fn score(&self, t: &Tuple) -> Result<f64> {
        if let Some(a) = self.attrs.iter().find(|a| **a >= t.ordinal.len()) {
            return Err(Error::SchemaMismatch(format!(
                "tuple {} has no value for attribute #{a}",
                t.id
            )));
        }
        Ok(self.eval(t))
    }

    /// Human-readable form; linear functions render in the parseable grammar.
    pub fn describe(&self, schema: &Schema) -> String {
        match &self.kind {
            RankingKind::Linear { weights } => {
                let mut out = String::new();
                for (i, ((a, o), w)) in self
                    .attrs
                    .iter()
                    .zip(&self.orientation)
                    .zip(weights)
                    .enumerate()
                {
                    let neg = *o == Orientation::LargerPreferred;
                    match (i, neg) {
                        (0, true) => out.push('-'),
                        (0, false) => {}
                        (_, true) => out.push_str(" - "),
                        (_, false) => out.push_str(" + "),
                    }
                    out.push_str(&format!("{}*{}", w, schema.attr(*a).name));
                }
                out
            }
            RankingKind::General { label, .. } => label.clone(),
        }
    }
}

fn parse_terms(spec: &str) -> Result<Vec<(f64, String)>> {
    let err = |msg: String| Error::InvalidRanking(format!("{msg} in {spec:?}"));
    let s: Vec<char> = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty ranking".into()));
    }
    let mut terms = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut sign = 1.0;
        if s[i] == '+' || s[i] == '-' {
            if s[i] == '-' {
                sign = -1.0;
            }
            i += 1;
        } else if !terms.is_empty() {
            return Err(err(format!("expected + or - at offset {i}")));
        }
        let start = i;
        while i < s.len() && s[i] != '+' && s[i] != '-' {
            // exponent signs belong to the number
            if (s[i] == 'e' || s[i] == 'E')
                && i + 1 < s.len()
                && (s[i + 1] == '+' || s[i + 1] == '-')
            {
                let before: String = s[start..i].iter().collect();
                if before.parse::<f64>().is_ok() && !before.contains('*') {
                    i += 2;
                    continue;
                }
            }
            i += 1;
        }
        let term: String = s[start..i].iter().collect();
        let (coef, name) = match term.split_once('*') {
            Some((c, n)) => (
                c.parse::<f64>()
                    .map_err(|_| err(format!("bad coefficient {c:?}")))?,
                n.to_string(),
            ),
            None => (1.0, term.clone()),
        };
        let ident_ok = name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ident_ok {
            return Err(err(format!("bad attribute name {name:?}")));
        }
        terms.push((sign * coef, name));
    }
    Ok(terms)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MonotoneCheck {
    Ok,
    /// `dominating` is at least as preferred as `dominated` on every ranked
    /// attribute yet scores strictly worse. Values are in ranked-attribute order.
    Counterexample {
        dominated: Vec<f64>,
        dominating: Vec<f64>,
    },
}

/// Samples dominated pairs and looks for a monotonicity violation.
pub fn check_monotone(
    f: &RankingFunction,
    schema: &Schema,
    samples: usize,
    seed: u64,
) -> Result<MonotoneCheck> {
    if samples == 0 {
        return Err(Error::InvalidConfig(
            "check_monotone needs at least one sample".into(),
        ));
    }
    f.validate(schema)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom: Vec<(f64, f64)> = f
        .attrs()
        .iter()
        .zip(f.orientations())
        .map(|(a, o)| {
            let at = schema.attr(*a);
            let (x, y) = (o.canonical(at.lower), o.canonical(at.upper));
            (x.min(y), x.max(y))
        })
        .collect();
    let mut c1 = vec![0.0; dom.len()];
    let mut c2 = vec![0.0; dom.len()];
    for _ in 0..samples {
        for (i, &(lo, hi)) in dom.iter().enumerate() {
            c1[i] = match rng.gen_range(0..8) {
                0 => lo,
                1 => hi,
                _ => rng.gen_range(lo..=hi),
            };
            c2[i] = match rng.gen_range(0..8) {
                0 => lo,
                1 => c1[i],
                _ => rng.gen_range(lo..=c1[i]),
            };
        }
        if f.canonical_score(&c1) < f.canonical_score(&c2) {
            let back = |c: &[f64]| {
                c.iter()
                    .zip(f.orientations())
                    .map(|(x, o)| o.sign() * x)
                    .collect()
            };
            return Ok(MonotoneCheck::Counterexample {
                dominated: back(&c1),
                dominating: back(&c2),
            });
        }
    }
    Ok(MonotoneCheck::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OrdinalAttr;

    fn dot() -> Schema {
        Schema::new(
            vec![
                OrdinalAttr::continuous("AIR_TIME", 0.0, 2000.0),
                OrdinalAttr::continuous("TAXI_IN", 0.0, 200.0),
                OrdinalAttr::continuous("DISTANCE", 0.0, 5000.0),
                OrdinalAttr::continuous("DEP_DELAY", -100.0, 2000.0),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn linear_scores() {
        let s = dot();
        let sr1 = RankingFunction::parse("0.3*AIR_TIME + TAXI_IN", &s).unwrap();
        assert_eq!(
            sr1.eval(&Tuple::ordinal(1, vec![100.0, 10.0, 0.0, 0.0])),
            40.0
        );
        let sr2 = RankingFunction::parse("-0.1*DISTANCE - DEP_DELAY", &s).unwrap();
        assert_eq!(
            sr2.eval(&Tuple::ordinal(1, vec![0.0, 0.0, 1000.0, 5.0])),
            -105.0
        );
        let zero = RankingFunction::from_coefficients(&[(0, 0.0), (1, 0.0)]).unwrap();
        assert_eq!(zero.eval(&Tuple::ordinal(1, vec![3.0, 4.0, 0.0, 0.0])), 0.0);
    }

    #[test]
    fn general_wrapping_matches_linear() {
        let g = RankingFunction::general(
            vec![2, 3],
            vec![Orientation::LargerPreferred; 2],
            "sr2",
            |v| -0.1 * v[0] - v[1],
        )
        .unwrap();
        assert_eq!(
            g.eval(&Tuple::ordinal(1, vec![0.0, 0.0, 1000.0, 5.0])),
            -105.0
        );
    }

    #[test]
    fn missing_value_is_a_schema_mismatch() {
        let f = RankingFunction::attribute(3, Orientation::SmallerPreferred);
        assert!(matches!(
            f.score(&Tuple::ordinal(1, vec![1.0])),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn parse_and_describe_round_trip() {
        let s = dot();
        for spec in [
            "0.3*AIR_TIME + 1*TAXI_IN",
            "-0.1*DISTANCE - 1*DEP_DELAY",
            "1e-3*AIR_TIME",
        ] {
            let f = RankingFunction::parse(spec, &s).unwrap();
            let again = RankingFunction::parse(&f.describe(&s), &s).unwrap();
            assert_eq!(f.describe(&s), again.describe(&s));
        }
        assert_eq!(
            RankingFunction::parse("-DISTANCE", &s)
                .unwrap()
                .orientation(0),
            Orientation::LargerPreferred
        );
        assert!(RankingFunction::parse("0.3*NOPE", &s).is_err());
        assert!(RankingFunction::parse("0.3*", &s).is_err());
        assert!(RankingFunction::parse("", &s).is_err());
        assert!(RankingFunction::parse("AIR_TIME + AIR_TIME", &s).is_err());
    }

    #[test]
    fn monotone_checks() {
        let s = dot();
        let f = RankingFunction::parse("0.3*AIR_TIME + TAXI_IN - DISTANCE", &s).unwrap();
        assert_eq!(
            check_monotone(&f, &s, 10_000, 1).unwrap(),
            MonotoneCheck::Ok
        );
        assert_eq!(
            check_monotone(&f, &s, 100_000, 2).unwrap(),
            MonotoneCheck::Ok
        );
        assert!(check_monotone(&f, &s, 0, 1).is_err());

        let sq = Schema::new(
            vec![
                OrdinalAttr::continuous("a", -1.0, 1.0),
                OrdinalAttr::continuous("b", -1.0, 1.0),
            ],
            vec![],
        )
        .unwrap();
        let prod = RankingFunction::general(
            vec![0, 1],
            vec![Orientation::SmallerPreferred; 2],
            "a*b",
            |v| v[0] * v[1],
        )
        .unwrap();
        match check_monotone(&prod, &sq, 10_000, 3).unwrap() {
            MonotoneCheck::Counterexample {
                dominated,
                dominating,
            } => {
                assert!(dominating.iter().zip(&dominated).all(|(x, y)| x <= y));
                assert!(dominated[0] * dominated[1] < dominating[0] * dominating[1]);
            }
            MonotoneCheck::Ok => panic!("product should violate monotonicity"),
        }
        // the pair (0,0) vs (-1,-1) is a violation by direct evaluation
        assert!(prod.canonical_score(&[0.0, 0.0]) < prod.canonical_score(&[-1.0, -1.0]));
    }

    #[test]
    fn score_is_pure() {
        let s = dot();
        let f = RankingFunction::parse("0.37*AIR_TIME + 0.11*TAXI_IN", &s).unwrap();
        let t = Tuple::ordinal(9, vec![123.456, 7.89, 0.0, 0.0]);
        assert_eq!(f.eval(&t).to_bits(), f.eval(&t.clone()).to_bits());
    }
}
