use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_version, FORMAT_VERSION};
use crate::model::{OrdinalAttr, QuerySpec, RangeSpec, RankingFunction, Schema, SearchQuery};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    /// Rank on one attribute picked uniformly at random.
    #[default]
    OneD,
    /// Weighted sum with weights drawn from (0, 1].
    Md,
}

/// How to generate a workload from a seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub seed: u64,
    pub entries: usize,
    #[serde(default)]
    pub kind: WorkloadKind,
    /// Ranked attributes per entry for `md` workloads.
    #[serde(default = "default_dims")]
    pub dims: usize,
    /// Share of entries with no filtering condition.
    #[serde(default = "default_unfiltered")]
    pub unfiltered_fraction: f64,
    #[serde(default = "default_h")]
    pub h: usize,
    /// Attributes rankings may use; all ordinal attributes when empty.
    #[serde(default)]
    pub ranked: Vec<String>,
}

fn default_dims() -> usize {
    2
}

fn default_unfiltered() -> f64 {
    0.25
}

fn default_h() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadEntry {
    pub ranking: String,
    pub h: usize,
    #[serde(default)]
    pub query: QuerySpec,
}

impl WorkloadEntry {
    pub fn resolve(&self, schema: &Schema) -> Result<(SearchQuery, RankingFunction)> {
        if self.h == 0 {
            return Err(Error::InvalidConfig("workload entry with h = 0".into()));
        }
        Ok((
            self.query.resolve(schema)?,
            RankingFunction::parse(&self.ranking, schema)?,
        ))
    }
}

/// Workload file: explicit entries, a recipe, or both (entries win).
///
/// ```toml
/// format_version = 1
/// [[entry]]
/// ranking = "0.3*AIR_TIME + TAXI_IN"
/// h = 10
/// query = { ranges = [{ attr = "DISTANCE", lower = 100, upper = 500 }] }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<Recipe>,
    #[serde(default, rename = "entry")]
    pub entries: Vec<WorkloadEntry>,
}

impl WorkloadSpec {
    /// Parses a workload file, expanding a recipe when no entries are listed.
    pub fn parse(text: &str, schema: &Schema) -> Result<Self> {
        let mut wl = Self::from_toml(text)?;
        if wl.entries.is_empty() {
            if let Some(r) = &wl.recipe {
                wl.entries = generate_workload(schema, r)?.entries;
            }
        }
        wl.validate(schema)?;
        Ok(wl)
    }

    /// Reads the file as written, leaving a recipe unexpanded.
    pub fn from_toml(text: &str) -> Result<Self> {
        let wl: WorkloadSpec =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("workload: {e}")))?;
        check_version(wl.format_version, "workload")?;
        Ok(wl)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("workload serializes")
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        self.entries
            .iter()
            .try_for_each(|e| e.resolve(schema).map(|_| ()))
    }
}

fn snap(a: &OrdinalAttr, x: f64) -> f64 {
    match a.step() {
        Some(_) => a.snap_down(x, false).unwrap_or(a.lower),
        None => x,
    }
}

/// Deterministic workload from `recipe`: exactly `round(fraction * entries)`
/// entries carry no filter; the others filter on a random nonempty subset of
/// the attributes the ranking does not use.
pub fn generate_workload(schema: &Schema, recipe: &Recipe) -> Result<WorkloadSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let candidates: Vec<usize> = if recipe.ranked.is_empty() {
        (0..schema.ordinal().len()).collect()
    } else {
        recipe
            .ranked
            .iter()
            .map(|n| schema.ordinal_index(n))
            .collect::<Result<_>>()?
    };
    let dims = match recipe.kind {
        WorkloadKind::OneD => 1,
        WorkloadKind::Md => recipe.dims,
    };
    if dims == 0 || dims > candidates.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot rank on {dims} of {} attributes",
            candidates.len()
        )));
    }
    if !(0.0..=1.0).contains(&recipe.unfiltered_fraction) {
        return Err(Error::InvalidConfig(
            "unfiltered_fraction must lie in [0, 1]".into(),
        ));
    }
    let unfiltered = (recipe.unfiltered_fraction * recipe.entries as f64).round() as usize;
    let mut plain = vec![false; recipe.entries];
    plain[..unfiltered].iter_mut().for_each(|p| *p = true);
    plain.shuffle(&mut rng);
    let mut entries = Vec::with_capacity(recipe.entries);
    for no_filter in plain {
        let mut attrs = candidates.clone();
        attrs.shuffle(&mut rng);
        attrs.truncate(dims);
        let ranking = match recipe.kind {
            WorkloadKind::OneD => {
                let sign = if rng.gen_bool(0.5) { "" } else { "-" };
                format!("{sign}{}", schema.attr(attrs[0]).name)
            }
            WorkloadKind::Md => attrs
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let w: f64 = 1.0 - rng.gen::<f64>();
                    let sign = match (i, rng.gen_bool(0.5)) {
                        (0, true) => "",
                        (0, false) => "-",
                        (_, true) => " + ",
                        (_, false) => " - ",
                    };
                    format!("{sign}{w:.3}*{}", schema.attr(*a).name)
                })
                .collect(),
        };
        let mut query = QuerySpec::default();
        if !no_filter {
            let ords: Vec<usize> = (0..schema.ordinal().len())
                .filter(|a| !attrs.contains(a))
                .collect();
            let cats: Vec<usize> = (0..schema.categorical().len())
                .filter(|c| !schema.categorical()[*c].values.is_empty())
                .collect();
            let total = ords.len() + cats.len();
            if total > 0 {
                let mut pick: Vec<usize> = (0..total).collect();
                pick.shuffle(&mut rng);
                pick.truncate(rng.gen_range(1..=total));
                pick.sort_unstable();
                for p in pick {
                    if p < ords.len() {
                        let a = schema.attr(ords[p]);
                        let w = a.width() * rng.gen_range(0.3..0.9);
                        let lo = snap(a, a.lower + rng.gen::<f64>() * (a.width() - w));
                        let hi = snap(a, lo + w).max(lo);
                        query.ranges.push(RangeSpec {
                            attr: a.name.clone(),
                            lower: Some(lo),
                            upper: Some(hi),
                            ..Default::default()
                        });
                    } else {
                        let c = &schema.categorical()[cats[p - ords.len()]];
                        let v = c.values.choose(&mut rng).expect("nonempty").clone();
                        query.equalities.push((c.name.clone(), v));
                    }
                }
            }
        }
        entries.push(WorkloadEntry {
            ranking,
            h: recipe.h,
            query,
        });
    }
    Ok(WorkloadSpec {
        format_version: FORMAT_VERSION,
        recipe: Some(recipe.clone()),
        entries,
    })
}
