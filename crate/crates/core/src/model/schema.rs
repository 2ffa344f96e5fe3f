use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discreteness {
    Continuous,
    Grid { step: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrdinalAttr {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default = "continuous")]
    pub discreteness: Discreteness,
}

fn continuous() -> Discreteness {
    Discreteness::Continuous
}

impl OrdinalAttr {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        OrdinalAttr {
            name: name.into(),
            lower,
            upper,
            discreteness: Discreteness::Continuous,
        }
    }

    pub fn grid(name: impl Into<String>, lower: f64, upper: f64, step: f64) -> Self {
        OrdinalAttr {
            name: name.into(),
            lower,
            upper,
            discreteness: Discreteness::Grid { step },
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn step(&self) -> Option<f64> {
        match self.discreteness {
            Discreteness::Grid { step } => Some(step),
            Discreteness::Continuous => None,
        }
    }

    /// Index of the last grid point, when the domain is a grid.
    pub fn grid_last(&self) -> Option<i64> {
        self.step().map(|s| (self.width() / s).round() as i64)
    }

    pub fn grid_value(&self, i: i64) -> f64 {
        match (self.step(), self.grid_last()) {
            (Some(_), Some(last)) if i == last => self.upper,
            (Some(s), Some(_)) => self.lower + i as f64 * s,
            _ => f64::NAN,
        }
    }

    /// Nearest grid index to `x`, or `None` on continuous domains.
    pub fn grid_index(&self, x: f64) -> Option<i64> {
        self.step().map(|s| ((x - self.lower) / s).round() as i64)
    }

    pub fn in_domain(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn on_grid(&self, x: f64) -> bool {
        match (self.step(), self.grid_index(x)) {
            (Some(s), Some(i)) => {
                i >= 0
                    && i <= self.grid_last().unwrap_or(0)
                    && (self.grid_value(i) - x).abs() <= 1e-9 * s
            }
            _ => true,
        }
    }

    /// Smallest grid point admitted by a lower bound at `x`.
    pub fn snap_up(&self, x: f64, open: bool) -> Option<f64> {
        let s = self.step()?;
        let last = self.grid_last()?;
        let admits = |g: f64| g > x || (!open && g == x);
        let mut i = if x <= self.lower {
            0
        } else {
            (((x - self.lower) / s).ceil() as i64).clamp(0, last + 1)
        };
        while i > 0 && admits(self.grid_value(i - 1)) {
            i -= 1;
        }
        while i <= last && !admits(self.grid_value(i)) {
            i += 1;
        }
        (i <= last).then(|| self.grid_value(i))
    }

    /// Largest grid point admitted by an upper bound at `x`.
    pub fn snap_down(&self, x: f64, open: bool) -> Option<f64> {
        let s = self.step()?;
        let last = self.grid_last()?;
        let admits = |g: f64| g < x || (!open && g == x);
        let mut i = if x >= self.upper {
            last
        } else {
            (((x - self.lower) / s).floor() as i64).clamp(-1, last)
        };
        while i < last && admits(self.grid_value(i + 1)) {
            i += 1;
        }
        while i >= 0 && !admits(self.grid_value(i)) {
            i -= 1;
        }
        (i >= 0).then(|| self.grid_value(i))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalAttr {
    pub name: String,
    /// Admissible values. Empty means the set is not enumerated.
    #[serde(default)]
    pub values: Vec<String>,
}

impl CategoricalAttr {
    pub fn new(
        name: impl Into<String>,
        values: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        CategoricalAttr {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn admits(&self, v: &str) -> bool {
        self.values.is_empty() || self.values.iter().any(|x| x == v)
    }
}

#[derive(Serialize, Deserialize)]
struct SchemaDef {
    #[serde(default)]
    ordinal: Vec<OrdinalAttr>,
    #[serde(default)]
    categorical: Vec<CategoricalAttr>,
    #[serde(default = "default_epsilon")]
    epsilon_rel: f64,
}

fn default_epsilon() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemaDef", into = "SchemaDef")]
pub struct Schema {
    ordinal: Vec<OrdinalAttr>,
    categorical: Vec<CategoricalAttr>,
    epsilon_rel: f64,
}

impl TryFrom<SchemaDef> for Schema {
    type Error = Error;

    fn try_from(d: SchemaDef) -> Result<Self> {
        Schema::new(d.ordinal, d.categorical)?.with_epsilon(d.epsilon_rel)
    }
}

impl From<Schema> for SchemaDef {
    fn from(s: Schema) -> Self {
        SchemaDef {
            ordinal: s.ordinal,
            categorical: s.categorical,
            epsilon_rel: s.epsilon_rel,
        }
    }
}

impl Schema {
    pub fn new(ordinal: Vec<OrdinalAttr>, categorical: Vec<CategoricalAttr>) -> Result<Self> {
        let mut names = std::collections::HashSet::new();
        for a in &ordinal {
            if !names.insert(a.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate attribute name {}",
                    a.name
                )));
            }
            if !(a.lower.is_finite() && a.upper.is_finite() && a.lower < a.upper) {
                return Err(Error::Schema(format!(
                    "attribute {} needs finite lower < upper",
                    a.name
                )));
            }
            if let Some(step) = a.step() {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(Error::Schema(format!(
                        "attribute {} has a non-positive grid step",
                        a.name
                    )));
                }
                let cells = a.width() / step;
                if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
                    return Err(Error::Schema(format!(
                        "grid step of {} does not divide its domain",
                        a.name
                    )));
                }
            }
        }
        for c in &categorical {
            if !names.insert(c.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate attribute name {}",
                    c.name
                )));
            }
        }
        Ok(Schema {
            ordinal,
            categorical,
            epsilon_rel: default_epsilon(),
        })
    }

    /// Sets the relative epsilon used to close open bounds on continuous domains.
    pub fn with_epsilon(mut self, epsilon_rel: f64) -> Result<Self> {
        if !(epsilon_rel > 0.0 && epsilon_rel < 1.0) {
            return Err(Error::Schema("epsilon_rel must lie in (0, 1)".into()));
        }
        self.epsilon_rel = epsilon_rel;
        Ok(self)
    }

    pub fn epsilon_rel(&self) -> f64 {
        self.epsilon_rel
    }

    pub fn ordinal(&self) -> &[OrdinalAttr] {
        &self.ordinal
    }

    pub fn categorical(&self) -> &[CategoricalAttr] {
        &self.categorical
    }

    pub fn attr(&self, i: usize) -> &OrdinalAttr {
        &self.ordinal[i]
    }

    pub fn ordinal_index(&self, name: &str) -> Result<usize> {
        self.ordinal
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown ordinal attribute {name}")))
    }

    pub fn categorical_index(&self, name: &str) -> Result<usize> {
        self.categorical
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::InvalidQuery(format!("unknown categorical attribute {name}")))
    }

    pub(crate) fn set_categorical_values(&mut self, i: usize, values: Vec<String>) {
        self.categorical[i].values = values;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_domains() {
        assert!(Schema::new(vec![OrdinalAttr::continuous("a", 1.0, 1.0)], vec![]).is_err());
        assert!(Schema::new(vec![OrdinalAttr::grid("a", 0.0, 10.0, 3.0)], vec![]).is_err());
        assert!(Schema::new(vec![OrdinalAttr::grid("a", 0.0, 10.0, 0.0)], vec![]).is_err());
        assert!(Schema::new(
            vec![
                OrdinalAttr::continuous("a", 0.0, 1.0),
                OrdinalAttr::continuous("a", 0.0, 2.0)
            ],
            vec![]
        )
        .is_err());
        assert!(Schema::new(vec![OrdinalAttr::grid("a", 0.0, 1.0, 0.1)], vec![]).is_ok());
    }

    #[test]
    fn snapping_on_grid() {
        let a = OrdinalAttr::grid("a", 0.0, 10.0, 1.0);
        assert_eq!(a.snap_up(2.0, true), Some(3.0));
        assert_eq!(a.snap_up(2.0, false), Some(2.0));
        assert_eq!(a.snap_up(2.5, false), Some(3.0));
        assert_eq!(a.snap_down(5.0, true), Some(4.0));
        assert_eq!(a.snap_down(5.0, false), Some(5.0));
        assert_eq!(a.snap_up(10.0, true), None);
        assert_eq!(a.snap_down(0.0, true), None);
        assert_eq!(a.snap_up(f64::NEG_INFINITY, false), Some(0.0));
        assert_eq!(a.snap_down(f64::INFINITY, false), Some(10.0));
    }

    #[test]
    fn schema_round_trips_through_toml() {
        let s = Schema::new(
            vec![
                OrdinalAttr::grid("a", 0.0, 10.0, 0.5),
                OrdinalAttr::continuous("b", -1.0, 1.0),
            ],
            vec![CategoricalAttr::new("c", ["x", "y"])],
        )
        .unwrap();
        let text = toml::to_string(&s).unwrap();
        let back: Schema = toml::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
