//! Multi-attribute reranking: exact top-1 and top-k under a monotone
//! ranking function, plus a threshold-style baseline built on 1D Get-Next.
//!
//! The search works on boxes in canonical key space (see [`crate::contour`]).
//! Each strategy differs in how it splits a box whose query overflows.

mod index;
mod partition;
mod ta;
mod top1;
mod topk;

pub use index::{DenseIndexMd, DenseRegionMd};
pub use partition::{cover, split_by_anchor, virtual_split};
pub use ta::ta_over_1d;
pub use top1::SubspaceQueue;
pub use topk::{md_top1, md_topk, TopKResult};

use serde::{Deserialize, Serialize};

use crate::access::Probe;
use crate::config::RerankConfig;
use crate::model::{RankedTuple, RankingFunction, SearchQuery};
use crate::rerank1d::{DenseIndex1D, Strategy1D};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdStrategy {
    /// Split an overflowing box around its best returned tuple.
    Baseline,
    /// Probe the largest box inside the contour first, then split around it.
    Binary,
    /// Binary, with small boxes crawled once into a shared dense index.
    Rerank,
}

impl MdStrategy {
    /// The 1D strategy used to seed a search.
    pub fn one_d(self) -> Strategy1D {
        match self {
            MdStrategy::Baseline => Strategy1D::Baseline,
            MdStrategy::Binary => Strategy1D::Binary,
            MdStrategy::Rerank => Strategy1D::Rerank,
        }
    }
}

/// Dense indexes kept across user queries.
#[derive(Clone, Debug, Default)]
pub struct Indexes {
    pub one_d: DenseIndex1D,
    pub md: DenseIndexMd,
}

impl Indexes {
    pub fn new() -> Self {
        Self::default()
    }
}

pub fn md_top1_baseline(
    p: &mut Probe,
    cfg: &RerankConfig,
    q: &SearchQuery,
    f: &RankingFunction,
) -> Result<Option<RankedTuple>> {
    md_top1(p, &mut Indexes::new(), cfg, q, f, MdStrategy::Baseline)
}

pub fn md_top1_binary(
    p: &mut Probe,
    cfg: &RerankConfig,
    q: &SearchQuery,
    f: &RankingFunction,
) -> Result<Option<RankedTuple>> {
    md_top1(p, &mut Indexes::new(), cfg, q, f, MdStrategy::Binary)
}

pub fn md_top1_rerank(
    p: &mut Probe,
    idx: &mut Indexes,
    cfg: &RerankConfig,
    q: &SearchQuery,
    f: &RankingFunction,
) -> Result<Option<RankedTuple>> {
    md_top1(p, idx, cfg, q, f, MdStrategy::Rerank)
}
