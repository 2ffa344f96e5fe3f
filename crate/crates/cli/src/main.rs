use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rerank_client::{Client, ClientError};
use rerank_core::api::{BenchRequest, CreateDatabase, DataSource, RerankRequest};
use rerank_core::bench::{ExperimentConfig, SchemaSpec, WorkloadSpec};
use rerank_core::config::{QueueOrder, TieHandling};
use rerank_core::model::{QuerySpec, RangeSpec};
use rerank_core::session::Algorithm;

/// Exit status when answers disagree with the brute-force oracle.
const VERIFICATION_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rerank",
    version,
    about = "Top-h queries under your own ranking over a top-k search interface"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        addr: SocketAddr,
    },
    /// Run an experiment and write per-query costs and a summary.
    Bench(BenchArgs),
    /// Answer one reranked query.
    Query(QueryArgs),
    /// Check every algorithm against the brute-force oracle on random instances.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ServerArg {
    /// Service URL. Without it an in-process server is started.
    #[arg(long)]
    server: Option<String>,
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Schema TOML file.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Generate this many uniform tuples over the schema instead of reading a dataset.
    #[arg(long, conflicts_with = "dataset")]
    synthetic: Option<usize>,
    /// Seed for `--synthetic`.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
}

impl DataArgs {
    fn source(&self, fallback: Option<&Path>) -> Result<DataSource> {
        let schema_path = self
            .schema
            .as_deref()
            .ok_or_else(|| anyhow!("--schema is required"))?;
        let schema = SchemaSpec::parse(&read(schema_path)?)?;
        if let Some(n) = self.synthetic {
            return Ok(DataSource::Uniform {
                schema,
                n,
                seed: self.data_seed,
            });
        }
        let path = self
            .dataset
            .as_deref()
            .or(fallback)
            .ok_or_else(|| anyhow!("give --dataset or --synthetic"))?;
        Ok(DataSource::Csv {
            schema,
            csv: read(path)?,
        })
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Workload TOML file.
    #[arg(long)]
    workload: PathBuf,
    /// Experiment TOML file; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',')]
    algos: Vec<Algorithm>,
    #[arg(long)]
    system_k: Option<usize>,
    /// `w1*ATTR1 + w2*ATTR2 ...` or `random:SEED`.
    #[arg(long)]
    system_ranking: Option<String>,
    #[arg(long)]
    index_c: Option<f64>,
    #[arg(long)]
    index_s: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated database sizes to sample.
    #[arg(long, value_delimiter = ',')]
    sample_sizes: Vec<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long, value_parser = parse_ties)]
    ties: Option<TieHandling>,
    /// Start every user query with an empty history and index.
    #[arg(long)]
    fresh_state: bool,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    server: ServerArg,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Reuse a database already hosted by the server.
    #[arg(long, conflicts_with_all = ["dataset", "synthetic"])]
    db: Option<u64>,
    #[arg(long, default_value = "random:0")]
    system_ranking: String,
    #[arg(long, default_value_t = 10)]
    system_k: usize,
    #[arg(long, value_parser = parse_ties, default_value = "resolve")]
    ties: TieHandling,
    /// User ranking, smaller scores first: `0.3*AIR_TIME + TAXI_IN`.
    #[arg(long)]
    ranking: String,
    /// Number of tuples to return.
    #[arg(long = "h", default_value_t = 10)]
    h: usize,
    #[arg(long, default_value = "md-rerank")]
    algo: Algorithm,
    /// Range filter `ATTR=LO..HI`; either end may be omitted.
    #[arg(long = "where", value_parser = parse_range)]
    ranges: Vec<RangeSpec>,
    /// Equality filter `ATTR=VALUE` on a categorical attribute.
    #[arg(long = "eq", value_parser = parse_equality)]
    equalities: Vec<(String, String)>,
    /// Load a dense-index snapshot before querying.
    #[arg(long)]
    index_in: Option<PathBuf>,
    /// Save the dense-index snapshot after querying.
    #[arg(long)]
    index_out: Option<PathBuf>,
    /// Print the response as JSON.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    server: ServerArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    server: ServerArg,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_ties(s: &str) -> Result<TieHandling, String> {
    match s {
        "resolve" => Ok(TieHandling::Resolve),
        "assume-distinct" => Ok(TieHandling::AssumeDistinct),
        _ => Err("expected resolve or assume-distinct".into()),
    }
}

fn parse_range(s: &str) -> Result<RangeSpec, String> {
    let (attr, range) = s.split_once('=').ok_or("expected ATTR=LO..HI")?;
    let bound = |x: &str| -> Result<Option<f64>, String> {
        let x = x.trim();
        if x.is_empty() {
            return Ok(None);
        }
        x.parse().map(Some).map_err(|_| format!("bad number {x:?}"))
    };
    let (lower, upper) = match range.split_once("..") {
        Some((lo, hi)) => (bound(lo)?, bound(hi)?),
        None => {
            let v = bound(range)?.ok_or("empty range")?;
            (Some(v), Some(v))
        }
    };
    Ok(RangeSpec {
        attr: attr.trim().to_string(),
        lower,
        upper,
        ..Default::default()
    })
}

fn parse_equality(s: &str) -> Result<(String, String), String> {
    let (attr, value) = s.split_once('=').ok_or("expected ATTR=VALUE")?;
    Ok((attr.trim().to_string(), value.trim().to_string()))
}

async fn connect(server: &ServerArg) -> Result<Client> {
    match &server.server {
        Some(url) => Ok(Client::new(url.clone())),
        None => {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
            let addr = listener.local_addr()?;
            tokio::spawn(rerank_service::serve(listener));
            Ok(Client::new(format!("http://{addr}")))
        }
    }
}

fn is_verification(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<ClientError>(), Some(ClientError::Api { status, .. }) if status.as_u16() == 422)
}

async fn bench(a: BenchArgs) -> Result<ExitCode> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::parse(&read(p)?)?,
        None => ExperimentConfig::new(10, "", Algorithm::ALL.to_vec()),
    };
    if !a.algos.is_empty() {
        cfg.algorithms = a.algos.clone();
    }
    if let Some(k) = a.system_k {
        cfg.system_k = k;
    }
    if let Some(s) = &a.system_ranking {
        cfg.system_ranking = s.clone();
    }
    if cfg.system_ranking.trim().is_empty() {
        bail!("no system ranking: give --system-ranking or set it in --config");
    }
    cfg.index_c = a.index_c.or(cfg.index_c);
    cfg.index_s = a.index_s.or(cfg.index_s);
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if !a.sample_sizes.is_empty() {
        cfg.sample_sizes = a.sample_sizes.clone();
    }
    if let Some(r) = a.repetitions {
        cfg.repetitions = r;
    }
    if let Some(t) = a.ties {
        cfg.ties = t;
    }
    if a.fresh_state {
        cfg.shared_state = false;
    }
    let source = a.data.source(cfg.dataset.as_deref())?;
    cfg.dataset = None;
    let workload = WorkloadSpec::from_toml(&read(&a.workload)?)?;
    let client = connect(&a.server).await?;
    let res = client
        .bench(&BenchRequest {
            experiment: cfg,
            source,
            workload,
        })
        .await?;

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    std::fs::write(a.out.join("costs.csv"), &res.csv)?;
    std::fs::write(
        a.out.join("summary.json"),
        serde_json::to_string_pretty(&res.summary)?,
    )?;
    println!(
        "{:>8}  {:<12} {:>8} {:>12} {:>12} {:>10}",
        "n", "algorithm", "queries", "mean total", "mean search", "max total"
    );
    for run in &res.summary.runs {
        for (alg, s) in &run.algorithms {
            println!(
                "{:>8}  {:<12} {:>8} {:>12.2} {:>12.2} {:>10}",
                run.n,
                alg.to_string(),
                s.queries,
                s.mean_total,
                s.mean_search,
                s.max_total
            );
        }
    }
    println!("wrote {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

async fn query(a: QueryArgs) -> Result<ExitCode> {
    let client = connect(&a.server).await?;
    let id = match a.db {
        Some(id) => id,
        None => {
            let req = CreateDatabase {
                source: a.data.source(None)?,
                system_ranking: a.system_ranking.clone(),
                system_k: a.system_k,
                ties: a.ties,
                queue: QueueOrder::default(),
                index_c: None,
                index_s: None,
                order_by: false,
                ta_sorted_access: false,
            };
            client.create_database(&req).await?.id
        }
    };
    if let Some(p) = &a.index_in {
        client.load_index(id, read(p)?).await?;
    }
    let req = RerankRequest {
        algorithm: a.algo,
        ranking: a.ranking.clone(),
        h: a.h,
        query: QuerySpec {
            ranges: a.ranges.clone(),
            equalities: a.equalities.clone(),
        },
    };
    let res = client.rerank(id, &req).await?;
    if let Some(p) = &a.index_out {
        std::fs::write(p, client.index_snapshot(id).await?)?;
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&res)?);
        return Ok(ExitCode::SUCCESS);
    }
    let info = client.database(id).await?;
    let names: Vec<&str> = info
        .schema
        .ordinal
        .iter()
        .map(|o| o.name.as_str())
        .collect();
    println!(
        "{:>4}  {:>8}  {:>14}  {}",
        "rank",
        "id",
        "score",
        names.join("  ")
    );
    for (i, t) in res.tuples.iter().enumerate() {
        let values: Vec<String> = t.tuple.ordinal.iter().map(|v| format!("{v}")).collect();
        println!(
            "{:>4}  {:>8}  {:>14.6}  {}",
            i + 1,
            t.tuple.id,
            t.score,
            values.join("  ")
        );
    }
    if res.short {
        println!("(only {} matching tuples)", res.tuples.len());
    }
    println!(
        "database {id}, query {}: {} interface queries ({} search, {} index build)",
        res.query_id,
        res.total.total(),
        res.total.search,
        res.total.index_build
    );
    Ok(ExitCode::SUCCESS)
}

async fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let client = connect(&a.server).await?;
    let r = client.verify(a.instances, a.seed).await?;
    for f in &r.failures {
        println!("MISMATCH {f}");
    }
    println!(
        "{} instances, {} checks, {} mismatches, {} ms",
        r.instances,
        r.checks,
        r.failures.len(),
        r.elapsed_ms
    );
    Ok(if r.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(VERIFICATION_FAILED)
    })
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) {
        "info"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| default_level.into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let res = match cli.command {
        Command::Serve { addr } => {
            async {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                rerank_service::serve(listener).await?;
                Ok(ExitCode::SUCCESS)
            }
            .await
        }
        Command::Bench(a) => bench(a).await,
        Command::Query(a) => query(a).await,
        Command::Verify(a) => verify(a).await,
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_verification(&e) {
                ExitCode::from(VERIFICATION_FAILED)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
