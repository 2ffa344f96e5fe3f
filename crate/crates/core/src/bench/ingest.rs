use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::check_version;
use crate::access::{SimulatedDatabase, SystemRanking};
use crate::model::{CategoricalAttr, Discreteness, OrdinalAttr, Schema, Tuple};
use crate::{Error, Result};

/// Value used for a missing ordinal cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullPolicy {
    #[default]
    Max,
    Min,
    Value(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutOfDomain {
    #[default]
    Reject,
    Clamp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrdinalSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default)]
    pub null: NullPolicy,
}

/// Declarative schema file:
///
/// ```toml
/// format_version = 1
/// id_column = "id"
/// [[ordinal]]
/// name = "AIR_TIME"
/// lower = 0
/// upper = 1988
/// step = 1
/// [[categorical]]
/// name = "CARRIER"
/// ```
///
/// Categorical attributes without `values` take the values found in the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemaSpec {
    pub format_version: u32,
    #[serde(default)]
    pub ordinal: Vec<OrdinalSpec>,
    #[serde(default)]
    pub categorical: Vec<CategoricalAttr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id_column: Option<String>,
    #[serde(default)]
    pub out_of_domain: OutOfDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_rel: Option<f64>,
}

impl SchemaSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: SchemaSpec =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("schema spec: {e}")))?;
        check_version(spec.format_version, "schema spec")?;
        spec.schema()?;
        Ok(spec)
    }

    pub fn from_schema(schema: &Schema) -> Self {
        SchemaSpec {
            format_version: super::FORMAT_VERSION,
            ordinal: schema
                .ordinal()
                .iter()
                .map(|a| OrdinalSpec {
                    name: a.name.clone(),
                    lower: a.lower,
                    upper: a.upper,
                    step: a.step(),
                    null: NullPolicy::Max,
                })
                .collect(),
            categorical: schema.categorical().to_vec(),
            id_column: Some("id".into()),
            out_of_domain: OutOfDomain::Reject,
            epsilon_rel: Some(schema.epsilon_rel()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema spec serializes")
    }

    pub fn schema(&self) -> Result<Schema> {
        let ordinal = self
            .ordinal
            .iter()
            .map(|o| OrdinalAttr {
                name: o.name.clone(),
                lower: o.lower,
                upper: o.upper,
                discreteness: match o.step {
                    Some(step) => Discreteness::Grid { step },
                    None => Discreteness::Continuous,
                },
            })
            .collect();
        let s = Schema::new(ordinal, self.categorical.clone())?;
        match self.epsilon_rel {
            Some(e) => s.with_epsilon(e),
            None => Ok(s),
        }
    }
}

/// A loaded table: schema plus every tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub tuples: Vec<Tuple>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Puts the table behind a top-k interface.
    pub fn database(&self, system: SystemRanking, system_k: usize) -> Result<SimulatedDatabase> {
        SimulatedDatabase::new(self.schema.clone(), self.tuples.clone(), system, system_k)
    }
}

const NULLS: [&str; 4] = ["", "NULL", "null", "NA"];

pub fn ingest_csv(path: &Path, spec: &SchemaSpec) -> Result<Dataset> {
    ingest_reader(std::fs::File::open(path)?, spec)
}

/// Reads CSV with a header row. Columns not named in the spec are ignored.
pub fn ingest_reader(r: impl Read, spec: &SchemaSpec) -> Result<Dataset> {
    let mut schema = spec.schema()?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let csv_err = |line: usize, e: csv::Error| Error::Parse {
        line,
        msg: e.to_string(),
    };
    let header = rdr.headers().map_err(|e| csv_err(1, e))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("no column named {name}"),
            })
    };
    let id_col = spec.id_column.as_deref().map(col).transpose()?;
    let ord_cols = spec
        .ordinal
        .iter()
        .map(|o| col(&o.name))
        .collect::<Result<Vec<_>>>()?;
    let cat_cols = spec
        .categorical
        .iter()
        .map(|c| col(&c.name))
        .collect::<Result<Vec<_>>>()?;
    let mut tuples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_err(line, e))?;
        let err = |msg: String| Error::Parse { line, msg };
        let id = match id_col {
            Some(c) => rec[c]
                .parse::<u64>()
                .map_err(|_| err(format!("bad id {:?}", &rec[c])))?,
            None => i as u64,
        };
        let mut ordinal = Vec::with_capacity(ord_cols.len());
        for (o, &c) in spec.ordinal.iter().zip(&ord_cols) {
            let cell = &rec[c];
            let v = if NULLS.contains(&cell) {
                match o.null {
                    NullPolicy::Max => o.upper,
                    NullPolicy::Min => o.lower,
                    NullPolicy::Value(v) => v,
                }
            } else {
                cell.parse::<f64>()
                    .map_err(|_| err(format!("{}: bad number {cell:?}", o.name)))?
            };
            let v = if v < o.lower || v > o.upper {
                match spec.out_of_domain {
                    OutOfDomain::Reject => {
                        return Err(err(format!(
                            "{} = {v} is outside [{}, {}]",
                            o.name, o.lower, o.upper
                        )))
                    }
                    OutOfDomain::Clamp => v.clamp(o.lower, o.upper),
                }
            } else {
                v
            };
            ordinal.push(v);
        }
        let categorical = cat_cols.iter().map(|&c| rec[c].to_string()).collect();
        let t = Tuple::new(id, ordinal, categorical);
        t.check(&schema).map_err(|e| err(e.to_string()))?;
        tuples.push(t);
    }
    for (i, c) in spec.categorical.iter().enumerate() {
        if c.values.is_empty() {
            let seen: BTreeSet<&String> = tuples.iter().map(|t| &t.categorical[i]).collect();
            schema.set_categorical_values(i, seen.into_iter().cloned().collect());
        }
    }
    Ok(Dataset { schema, tuples })
}

/// Writes tuples as CSV with an `id` column first.
pub fn write_csv(schema: &Schema, tuples: &[Tuple], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec!["id".to_string()];
    header.extend(schema.ordinal().iter().map(|a| a.name.clone()));
    header.extend(schema.categorical().iter().map(|a| a.name.clone()));
    wr.write_record(&header).map_err(io)?;
    for t in tuples {
        let mut row = vec![t.id.to_string()];
        row.extend(t.ordinal.iter().map(|v| v.to_string()));
        row.extend(t.categorical.iter().cloned());
        wr.write_record(&row).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}
