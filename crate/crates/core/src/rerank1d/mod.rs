//! Get-Next on a single ranked attribute.
//!
//! Three strategies find the next tuple above a pivot: a shrinking scan
//! ([`Strategy1D::Baseline`]), bisection ([`Strategy1D::Binary`]) and bisection
//! that hands narrow ranges to an on-the-fly dense index
//! ([`Strategy1D::Rerank`]). All three return the same answers.

mod axis;
mod cursor;
mod index;
mod search;
mod ties;

pub use axis::Axis;
pub use cursor::{get_next, get_next_baseline, get_next_binary, get_next_reranked, GetNext1D};
pub use index::{DenseIndex1D, DenseRegion1D};
pub use search::{oracle_lookup, Found};
pub use ties::{crawl_query, crawl_ties};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy1D {
    Baseline,
    Binary,
    Rerank,
}
