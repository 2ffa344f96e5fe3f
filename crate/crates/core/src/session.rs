//! A reranking session: one hidden database, the history of everything it
//! has returned and the dense indexes built so far.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::access::{HistoryStore, Probe, TopKInterface};
use crate::config::RerankConfig;
use crate::model::{RankedTuple, RankingFunction, RankingKind, SearchQuery};
use crate::rerank1d::{Axis, GetNext1D, Strategy1D};
use crate::rerankmd::{md_topk, ta_over_1d, Indexes, MdStrategy, TopKResult};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "1d-baseline")]
    Baseline1D,
    #[serde(rename = "1d-binary")]
    Binary1D,
    #[serde(rename = "1d-rerank")]
    Rerank1D,
    #[serde(rename = "md-baseline")]
    MdBaseline,
    #[serde(rename = "md-binary")]
    MdBinary,
    #[serde(rename = "md-rerank")]
    MdRerank,
    #[serde(rename = "ta")]
    Ta,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Baseline1D,
        Algorithm::Binary1D,
        Algorithm::Rerank1D,
        Algorithm::MdBaseline,
        Algorithm::MdBinary,
        Algorithm::MdRerank,
        Algorithm::Ta,
    ];

    pub const MD: [Algorithm; 4] = [
        Algorithm::MdBaseline,
        Algorithm::MdBinary,
        Algorithm::MdRerank,
        Algorithm::Ta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Baseline1D => "1d-baseline",
            Algorithm::Binary1D => "1d-binary",
            Algorithm::Rerank1D => "1d-rerank",
            Algorithm::MdBaseline => "md-baseline",
            Algorithm::MdBinary => "md-binary",
            Algorithm::MdRerank => "md-rerank",
            Algorithm::Ta => "ta",
        }
    }

    /// Single-attribute algorithms only accept a ranking on one attribute.
    pub fn is_1d(self) -> bool {
        self.one_d().is_some()
    }

    fn one_d(self) -> Option<Strategy1D> {
        match self {
            Algorithm::Baseline1D => Some(Strategy1D::Baseline),
            Algorithm::Binary1D => Some(Strategy1D::Binary),
            Algorithm::Rerank1D => Some(Strategy1D::Rerank),
            _ => None,
        }
    }

    /// Whether the algorithm can answer a ranking over `f`.
    pub fn supports(self, f: &RankingFunction) -> bool {
        !self.is_1d() || single_axis(f).is_some()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// The axis a single-attribute ranking sorts on; `None` for zero weights.
fn single_axis(f: &RankingFunction) -> Option<Axis> {
    if f.dims() != 1 {
        return None;
    }
    let ok = match f.kind() {
        RankingKind::Linear { weights } => weights[0] > 0.0,
        RankingKind::General { .. } => false,
    };
    ok.then(|| Axis::new(f.attrs()[0], f.orientation(0)))
}

/// Everything a client keeps between user queries.
pub struct Session {
    db: Arc<dyn TopKInterface>,
    pub history: HistoryStore,
    pub indexes: Indexes,
    pub cfg: RerankConfig,
    next_query: u64,
}

impl Session {
    pub fn new(db: Arc<dyn TopKInterface>, cfg: RerankConfig) -> Self {
        Session {
            db,
            history: HistoryStore::new(),
            indexes: Indexes::new(),
            cfg,
            next_query: 0,
        }
    }

    pub fn db(&self) -> &dyn TopKInterface {
        &*self.db
    }

    /// Id the next [`Session::run_topk`] call charges to.
    pub fn next_query_id(&self) -> u64 {
        self.next_query
    }

    /// Forgets the history and indexes.
    pub fn reset(&mut self) {
        self.history = HistoryStore::new();
        self.indexes = Indexes::new();
    }

    /// Answers a top-h query, charging the ledger to `(algorithm, next query id)`.
    pub fn run_topk(
        &mut self,
        alg: Algorithm,
        q: &SearchQuery,
        f: &RankingFunction,
        h: usize,
    ) -> Result<TopKResult> {
        let id = self.next_query;
        self.next_query += 1;
        self.run_topk_as(alg, id, q, f, h)
    }

    pub fn run_topk_as(
        &mut self,
        alg: Algorithm,
        query_id: u64,
        q: &SearchQuery,
        f: &RankingFunction,
        h: usize,
    ) -> Result<TopKResult> {
        let schema = self.db.schema();
        q.validate(schema)?;
        f.validate(schema)?;
        self.next_query = self.next_query.max(query_id + 1);
        let mut p = Probe::new(&*self.db, &mut self.history, alg.name(), query_id);
        let before = p.counts();
        let idx = &mut self.indexes;
        let cfg = &self.cfg;
        let mut res = match alg {
            Algorithm::Baseline1D | Algorithm::Binary1D | Algorithm::Rerank1D => {
                let axis = single_axis(f).ok_or_else(|| {
                    Error::Unsupported(format!(
                        "{alg} ranks on one attribute with a positive weight"
                    ))
                })?;
                let strategy = alg.one_d().expect("1d algorithm");
                let mut cur = GetNext1D::new(q.clone(), axis, strategy);
                let mut tuples = Vec::new();
                let mut costs = Vec::new();
                while tuples.len() < h {
                    let Some(t) = cur.next(&mut p, &mut idx.one_d, cfg)? else {
                        break;
                    };
                    tuples.push(RankedTuple::new(t, f));
                    costs.push(p.counts());
                }
                let short = tuples.len() < h;
                TopKResult {
                    tuples,
                    costs,
                    short,
                    launches: 0,
                    spent: p.counts(),
                }
            }
            Algorithm::MdBaseline => md_topk(&mut p, idx, cfg, q, f, h, MdStrategy::Baseline)?,
            Algorithm::MdBinary => md_topk(&mut p, idx, cfg, q, f, h, MdStrategy::Binary)?,
            Algorithm::MdRerank => md_topk(&mut p, idx, cfg, q, f, h, MdStrategy::Rerank)?,
            Algorithm::Ta => ta_over_1d(&mut p, idx, cfg, q, f, h)?,
        };
        for c in &mut res.costs {
            *c = c.since(&before);
        }
        res.spent = res.spent.since(&before);
        Ok(res)
    }
}
