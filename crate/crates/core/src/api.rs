//! JSON bodies exchanged with the reranking service.

use serde::{Deserialize, Serialize};

use crate::access::PhaseCounts;
use crate::bench::{synth, Dataset, ExperimentConfig, SchemaSpec, Summary, WorkloadSpec};
use crate::config::{QueueOrder, TieHandling};
use crate::model::{QuerySpec, RankedTuple, Tuple};
use crate::session::Algorithm;
use crate::{Error, Result};

/// Where a hosted table's tuples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// CSV text with a header row.
    Csv { schema: SchemaSpec, csv: String },
    Tuples {
        schema: SchemaSpec,
        tuples: Vec<Tuple>,
    },
    /// Seeded uniform values over the schema's domains.
    Uniform {
        schema: SchemaSpec,
        n: usize,
        seed: u64,
    },
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv { schema, csv } => crate::bench::ingest_reader(csv.as_bytes(), schema),
            DataSource::Tuples { schema, tuples } => {
                let s = schema.schema()?;
                for t in tuples {
                    t.check(&s)?;
                }
                Ok(Dataset {
                    schema: s,
                    tuples: tuples.clone(),
                })
            }
            DataSource::Uniform { schema, n, seed } => {
                let s = schema.schema()?;
                Ok(Dataset {
                    tuples: synth::uniform(&s, *n, *seed),
                    schema: s,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateDatabase {
    pub source: DataSource,
    /// Linear spec or `random:SEED`.
    pub system_ranking: String,
    pub system_k: usize,
    #[serde(default)]
    pub ties: TieHandling,
    #[serde(default)]
    pub queue: QueueOrder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_s: Option<usize>,
    /// Offer per-attribute ORDER BY on the interface.
    #[serde(default)]
    pub order_by: bool,
    #[serde(default)]
    pub ta_sorted_access: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatabaseInfo {
    pub id: u64,
    pub n: usize,
    pub system_k: usize,
    pub system_ranking: String,
    pub schema: SchemaSpec,
    /// Interface queries issued so far.
    pub queries: u64,
    pub indexed_regions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RerankRequest {
    pub algorithm: Algorithm,
    pub ranking: String,
    pub h: usize,
    #[serde(default)]
    pub query: QuerySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RerankResponse {
    pub query_id: u64,
    pub tuples: Vec<RankedTuple>,
    /// Fewer than `h` tuples match.
    pub short: bool,
    /// Cumulative cost after each emitted tuple.
    pub step_costs: Vec<PhaseCounts>,
    pub total: PhaseCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRequest {
    pub experiment: ExperimentConfig,
    pub source: DataSource,
    pub workload: WorkloadSpec,
}

impl BenchRequest {
    /// Expands a recipe-only workload against the dataset's schema.
    pub fn workload_for(&self, data: &Dataset) -> Result<WorkloadSpec> {
        let mut wl = self.workload.clone();
        if wl.entries.is_empty() {
            match &wl.recipe {
                Some(r) => wl.entries = crate::bench::generate_workload(&data.schema, r)?.entries,
                None => {
                    return Err(Error::InvalidConfig(
                        "workload has neither entries nor a recipe".into(),
                    ))
                }
            }
        }
        wl.validate(&data.schema)?;
        Ok(wl)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResponse {
    pub csv: String,
    pub summary: Summary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRequest {
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
