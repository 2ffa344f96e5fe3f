//! Offline experiments: dataset ingestion, workloads, the brute-force
//! oracle, the experiment driver and the exactness suite.

mod experiment;
mod ingest;
mod oracle;
pub mod synth;
mod verify;
mod workload;

pub use experiment::{
    run_experiment, AlgorithmSummary, CostReport, CostRow, ExperimentConfig, ExperimentReport,
    RunSummary, Summary,
};
pub use ingest::{
    ingest_csv, ingest_reader, write_csv, Dataset, NullPolicy, OrdinalSpec, OutOfDomain, SchemaSpec,
};
pub use oracle::brute_force_topk;
pub use verify::{exactness_suite, Instance, SystemKind, VerifyReport};
pub use workload::{generate_workload, Recipe, WorkloadEntry, WorkloadKind, WorkloadSpec};

use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub(crate) fn check_version(found: u32, what: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::InvalidConfig(format!(
            "{what}: format_version {found} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    Ok(())
}
