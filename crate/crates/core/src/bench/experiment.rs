use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{brute_force_topk, check_version, Dataset, WorkloadSpec, FORMAT_VERSION};
use crate::access::{SimulatedDatabase, SystemRanking, TopKInterface};
use crate::config::{DenseIndexParams, QueueOrder, RerankConfig, TieHandling};
use crate::model::TupleId;
use crate::session::{Algorithm, Session};
use crate::{Error, Result};

fn default_repetitions() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// One experiment: which database to simulate and which algorithms to run.
///
/// ```toml
/// format_version = 1
/// system_k = 10
/// system_ranking = "0.3*AIR_TIME + TAXI_IN"
/// algorithms = ["1d-baseline", "1d-binary", "1d-rerank"]
/// sample_sizes = [1000, 4000]
/// repetitions = 10
/// seed = 7
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    pub system_k: usize,
    /// Linear spec or `random:SEED`.
    pub system_ranking: String,
    pub algorithms: Vec<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_s: Option<usize>,
    /// Database sizes to sample; the full dataset when empty.
    #[serde(default)]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Keep history and indexes across the workload's entries.
    #[serde(default = "default_true")]
    pub shared_state: bool,
    #[serde(default)]
    pub ties: TieHandling,
    #[serde(default)]
    pub queue: QueueOrder,
    #[serde(default)]
    pub ta_sorted_access: bool,
}

impl ExperimentConfig {
    pub fn new(
        system_k: usize,
        system_ranking: impl Into<String>,
        algorithms: Vec<Algorithm>,
    ) -> Self {
        ExperimentConfig {
            format_version: FORMAT_VERSION,
            dataset: None,
            system_k,
            system_ranking: system_ranking.into(),
            algorithms,
            index_c: None,
            index_s: None,
            sample_sizes: Vec::new(),
            repetitions: 1,
            seed: 0,
            shared_state: true,
            ties: TieHandling::default(),
            queue: QueueOrder::default(),
            ta_sorted_access: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let c: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("experiment: {e}")))?;
        check_version(c.format_version, "experiment")?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.system_k == 0 {
            return Err(Error::InvalidConfig("system_k must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".into()));
        }
        if let Some(n) = self
            .sample_sizes
            .iter()
            .find(|n| **n == 0 || **n > data.len())
        {
            return Err(Error::InvalidConfig(format!(
                "cannot sample {n} of {} tuples",
                data.len()
            )));
        }
        SystemRanking::parse(&self.system_ranking, &data.schema)?;
        self.params(data.len().max(1)).map(|_| ())
    }

    fn params(&self, n: usize) -> Result<DenseIndexParams> {
        let d = DenseIndexParams::defaults(n, self.system_k);
        DenseIndexParams::new(self.index_c.unwrap_or(d.c), self.index_s.unwrap_or(d.s), n)
    }

    fn rerank_config(&self, n: usize) -> Result<RerankConfig> {
        let mut c = RerankConfig::new(self.params(n)?).with_ties(self.ties);
        c.queue = self.queue;
        c.ta_sorted_access = self.ta_sorted_access;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRow {
    pub algorithm: Algorithm,
    pub query_id: u64,
    pub h: usize,
    pub search_queries: u64,
    pub index_queries: u64,
    pub total: u64,
}

/// Costs of one pass of the workload over one database.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub n: usize,
    pub repetition: usize,
    pub rows: Vec<CostRow>,
    /// Entries an algorithm cannot answer (multi-attribute rankings for 1D algorithms).
    pub skipped: Vec<(Algorithm, u64)>,
    /// Ledger totals per algorithm, for reconciliation with `rows`.
    pub ledger: BTreeMap<Algorithm, u64>,
}

impl CostReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "algorithm",
            "query_id",
            "h",
            "search_queries",
            "index_queries",
            "total",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.algorithm.name().to_string(),
                r.query_id.to_string(),
                r.h.to_string(),
                r.search_queries.to_string(),
                r.index_queries.to_string(),
                r.total.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
    }

    pub fn summary(&self) -> BTreeMap<Algorithm, AlgorithmSummary> {
        let mut out: BTreeMap<Algorithm, Vec<&CostRow>> = BTreeMap::new();
        for r in &self.rows {
            out.entry(r.algorithm).or_default().push(r);
        }
        out.into_iter()
            .map(|(a, rows)| (a, AlgorithmSummary::of(&rows)))
            .collect()
    }

    /// Whether the rows add up to what the ledger charged.
    pub fn reconciles(&self) -> bool {
        self.ledger.iter().all(|(a, total)| {
            self.rows
                .iter()
                .filter(|r| r.algorithm == *a)
                .map(|r| r.total)
                .sum::<u64>()
                == *total
        })
    }
}

/// Means are reported both with and without index-build queries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub queries: usize,
    pub mean_total: f64,
    pub mean_search: f64,
    pub mean_index: f64,
    pub max_total: u64,
}

impl AlgorithmSummary {
    fn of(rows: &[&CostRow]) -> Self {
        let n = rows.len().max(1) as f64;
        let sum = |f: fn(&CostRow) -> u64| rows.iter().map(|r| f(r)).sum::<u64>() as f64 / n;
        AlgorithmSummary {
            queries: rows.len(),
            mean_total: sum(|r| r.total),
            mean_search: sum(|r| r.search_queries),
            mean_index: sum(|r| r.index_queries),
            max_total: rows.iter().map(|r| r.total).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub repetition: usize,
    pub algorithms: BTreeMap<Algorithm, AlgorithmSummary>,
}

/// The summary JSON written next to the CSV reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format_version: u32,
    pub system_k: usize,
    pub system_ranking: String,
    pub runs: Vec<RunSummary>,
    /// Mean total cost per algorithm and database size, over repetitions.
    pub by_size: BTreeMap<usize, BTreeMap<Algorithm, f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub reports: Vec<CostReport>,
}

impl ExperimentReport {
    pub fn summary(&self) -> Summary {
        let runs: Vec<RunSummary> = self
            .reports
            .iter()
            .map(|r| RunSummary {
                n: r.n,
                repetition: r.repetition,
                algorithms: r.summary(),
            })
            .collect();
        let mut acc: BTreeMap<usize, BTreeMap<Algorithm, Vec<f64>>> = BTreeMap::new();
        for r in &runs {
            for (a, s) in &r.algorithms {
                acc.entry(r.n)
                    .or_default()
                    .entry(*a)
                    .or_default()
                    .push(s.mean_total);
            }
        }
        let by_size = acc
            .into_iter()
            .map(|(n, m)| {
                (
                    n,
                    m.into_iter()
                        .map(|(a, v)| (a, v.iter().sum::<f64>() / v.len() as f64))
                        .collect(),
                )
            })
            .collect();
        Summary {
            format_version: FORMAT_VERSION,
            system_k: self.config.system_k,
            system_ranking: self.config.system_ranking.clone(),
            runs,
            by_size,
        }
    }

    /// Mean total cost of `alg` over every run and entry.
    pub fn mean_total(&self, alg: Algorithm) -> f64 {
        let rows: Vec<u64> = self
            .reports
            .iter()
            .flat_map(|r| &r.rows)
            .filter(|r| r.algorithm == alg)
            .map(|r| r.total)
            .collect();
        rows.iter().sum::<u64>() as f64 / rows.len().max(1) as f64
    }

    /// All rows as one CSV, in run order.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.reports.iter().enumerate() {
            let csv = r.to_csv();
            out.push_str(if i == 0 {
                &csv
            } else {
                csv.split_once('\n').map(|x| x.1).unwrap_or("")
            });
        }
        out
    }
}

fn sample(data: &Dataset, size: usize, seed: u64, rep: usize) -> Vec<crate::model::Tuple> {
    let mix = seed
        ^ (size as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (rep as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    let mut rng = ChaCha8Rng::seed_from_u64(mix);
    let mut idx = rand::seq::index::sample(&mut rng, data.len(), size).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| data.tuples[i].clone()).collect()
}

/// Runs every algorithm over every workload entry, for each sample size and
/// repetition, checking each answer against [`brute_force_topk`]. Any
/// mismatch aborts with a diff.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    data: &Dataset,
    wl: &WorkloadSpec,
) -> Result<ExperimentReport> {
    cfg.validate(data)?;
    let entries = wl
        .entries
        .iter()
        .map(|e| e.resolve(&data.schema).map(|(q, f)| (q, f, e.h)))
        .collect::<Result<Vec<_>>>()?;
    let system = SystemRanking::parse(&cfg.system_ranking, &data.schema)?;
    let sizes: Vec<Option<usize>> = if cfg.sample_sizes.is_empty() {
        vec![None]
    } else {
        cfg.sample_sizes.iter().copied().map(Some).collect()
    };
    let mut reports = Vec::new();
    for size in sizes {
        for rep in 0..cfg.repetitions {
            let tuples = match size {
                Some(s) => sample(data, s, cfg.seed, rep),
                None => data.tuples.clone(),
            };
            let n = tuples.len();
            let rcfg = cfg.rerank_config(n.max(1))?;
            let mut rows = Vec::new();
            let mut skipped = Vec::new();
            let mut ledger = BTreeMap::new();
            for &alg in &cfg.algorithms {
                let db = Arc::new(SimulatedDatabase::new(
                    data.schema.clone(),
                    tuples.clone(),
                    system.clone(),
                    cfg.system_k,
                )?);
                let mut session = Session::new(db.clone(), rcfg.clone());
                for (i, (q, f, h)) in entries.iter().enumerate() {
                    let qid = i as u64;
                    if !alg.supports(f) {
                        skipped.push((alg, qid));
                        continue;
                    }
                    if !cfg.shared_state {
                        session.reset();
                    }
                    let got = session.run_topk_as(alg, qid, q, f, *h)?;
                    let want = brute_force_topk(&tuples, q, f, *h);
                    let ids = |r: &crate::rerankmd::TopKResult| {
                        r.tuples
                            .iter()
                            .map(|t| t.tuple.id)
                            .collect::<Vec<TupleId>>()
                    };
                    if ids(&got) != ids(&want) || got.short != want.short {
                        return Err(Error::Verification(format!(
                            "{alg} on entry {i} (n = {n}, repetition {rep}): got {:?}, expected {:?}",
                            ids(&got),
                            ids(&want)
                        )));
                    }
                    let c = got.total();
                    rows.push(CostRow {
                        algorithm: alg,
                        query_id: qid,
                        h: *h,
                        search_queries: c.search,
                        index_queries: c.index_build,
                        total: c.total(),
                    });
                }
                ledger.insert(alg, db.ledger().total());
            }
            let report = CostReport {
                n,
                repetition: rep,
                rows,
                skipped,
                ledger,
            };
            if !report.reconciles() {
                return Err(Error::Verification(format!(
                    "cost rows do not add up to the ledger for n = {n}"
                )));
            }
            reports.push(report);
        }
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        reports,
    })
}
