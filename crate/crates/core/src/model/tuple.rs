use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{RankingFunction, Schema};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TupleId(pub u64);

impl fmt::Display for TupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuple {
    pub id: TupleId,
    pub ordinal: Vec<f64>,
    #[serde(default)]
    pub categorical: Vec<String>,
}

impl Tuple {
    pub fn new(id: u64, ordinal: Vec<f64>, categorical: Vec<String>) -> Self {
        Tuple {
            id: TupleId(id),
            ordinal,
            categorical,
        }
    }

    /// A tuple with ordinal values only.
    pub fn ordinal(id: u64, ordinal: Vec<f64>) -> Self {
        Tuple::new(id, ordinal, Vec::new())
    }

    pub fn value(&self, attr: usize) -> f64 {
        self.ordinal[attr]
    }

    pub fn check(&self, schema: &Schema) -> Result<()> {
        if self.ordinal.len() != schema.ordinal().len()
            || self.categorical.len() != schema.categorical().len()
        {
            return Err(Error::SchemaMismatch(format!(
                "tuple {} has {}+{} values, schema expects {}+{}",
                self.id,
                self.ordinal.len(),
                self.categorical.len(),
                schema.ordinal().len(),
                schema.categorical().len()
            )));
        }
        for (v, a) in self.ordinal.iter().zip(schema.ordinal()) {
            if !a.in_domain(*v) || !a.on_grid(*v) {
                return Err(Error::SchemaMismatch(format!(
                    "tuple {}: {} = {} is outside its domain",
                    self.id, a.name, v
                )));
            }
        }
        for (v, a) in self.categorical.iter().zip(schema.categorical()) {
            if !a.admits(v) {
                return Err(Error::SchemaMismatch(format!(
                    "tuple {}: {} = {:?} is not an admissible value",
                    self.id, a.name, v
                )));
            }
        }
        Ok(())
    }
}

/// Total order on (score, id): smaller score first, ties broken by id.
pub fn rank_cmp(a: (f64, TupleId), b: (f64, TupleId)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedTuple {
    pub tuple: Tuple,
    pub score: f64,
}

impl RankedTuple {
    pub fn new(tuple: Tuple, f: &RankingFunction) -> Self {
        let score = f.eval(&tuple);
        RankedTuple { tuple, score }
    }

    pub fn key(&self) -> (f64, TupleId) {
        (self.score, self.tuple.id)
    }

    /// Whether `self` ranks strictly ahead of `other`.
    pub fn outranks(&self, other: &RankedTuple) -> bool {
        rank_cmp(self.key(), other.key()) == Ordering::Less
    }
}
