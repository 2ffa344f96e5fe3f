use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::brute_force_topk;
use crate::access::{SimulatedDatabase, SystemRanking};
use crate::config::{DenseIndexParams, RerankConfig};
use crate::model::{
    CategoricalAttr, OrdinalAttr, Orientation, RangePredicate, RankingFunction, Schema,
    SearchQuery, Tuple,
};
use crate::session::{Algorithm, Session};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// The database ranks by the user's function.
    Correlated,
    /// The database ranks by the user's function with every preference reversed.
    AntiCorrelated,
    Random,
}

/// One randomly drawn exactness check.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub schema: Schema,
    pub tuples: Vec<Tuple>,
    pub system_k: usize,
    pub system: SystemKind,
    pub f: RankingFunction,
    pub q: SearchQuery,
    pub h: usize,
}

fn schema() -> Schema {
    Schema::new(
        vec![
            OrdinalAttr::continuous("A1", 0.0, 100.0),
            OrdinalAttr::continuous("A2", 0.0, 100.0),
            OrdinalAttr::continuous("A3", 0.0, 100.0),
            OrdinalAttr::continuous("A4", 0.0, 100.0),
            OrdinalAttr::grid("F", 0.0, 50.0, 1.0),
        ],
        vec![CategoricalAttr::new("K", ["a", "b", "c"])],
    )
    .expect("valid schema")
}

impl Instance {
    /// Draws n ≤ 1000 tuples, m ∈ {2, 3, 4} ranked attributes, system k ∈ {1, 5, 10} and h ≤ 10.
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = schema();
        let n = rng.gen_range(1..=1000);
        let tuples = super::synth::uniform(&schema, n, rng.gen());
        let m = rng.gen_range(2..=4);
        let mut attrs = [0, 1, 2, 3];
        attrs.shuffle(&mut rng);
        let terms: Vec<_> = attrs[..m]
            .iter()
            .map(|a| {
                let o = if rng.gen_bool(0.5) {
                    Orientation::SmallerPreferred
                } else {
                    Orientation::LargerPreferred
                };
                (*a, rng.gen_range(0.1..=1.0), o)
            })
            .collect();
        let f = RankingFunction::linear(&terms).expect("valid weights");
        let mut q = SearchQuery::all();
        if rng.gen_bool(0.5) {
            let lo = rng.gen_range(0..40) as f64;
            q = q.with_range(RangePredicate::closed(
                4,
                lo,
                lo + rng.gen_range(5..=50) as f64,
            ));
        }
        if rng.gen_bool(0.3) {
            q = q.with_equality(0, ["a", "b", "c"][rng.gen_range(0..3)]);
        }
        if rng.gen_bool(0.2) {
            let a = attrs[rng.gen_range(0..4)];
            let lo = rng.gen_range(0.0..50.0);
            q = q.with_range(RangePredicate::closed(
                a,
                lo,
                lo + rng.gen_range(10.0..50.0),
            ));
        }
        Instance {
            seed,
            schema,
            tuples,
            system_k: [1, 5, 10][rng.gen_range(0..3)],
            system: [
                SystemKind::Correlated,
                SystemKind::AntiCorrelated,
                SystemKind::Random,
            ][rng.gen_range(0..3)],
            f,
            q,
            h: rng.gen_range(1..=10),
        }
    }

    pub fn system_ranking(&self) -> SystemRanking {
        match self.system {
            SystemKind::Correlated => SystemRanking::Function(self.f.clone()),
            SystemKind::AntiCorrelated => SystemRanking::Function(reversed(&self.f)),
            SystemKind::Random => SystemRanking::Random { seed: self.seed },
        }
    }

    pub fn database(&self) -> Result<SimulatedDatabase> {
        SimulatedDatabase::new(
            self.schema.clone(),
            self.tuples.clone(),
            self.system_ranking(),
            self.system_k,
        )
    }

    /// The ranking a single-attribute algorithm is checked with: the first ranked attribute alone.
    pub fn one_d(&self) -> RankingFunction {
        RankingFunction::attribute(self.f.attrs()[0], self.f.orientation(0))
    }

    /// Runs `alg` and compares its answer with the oracle. `Err` on interface
    /// errors; `Ok(Some(diff))` on a wrong answer.
    pub fn check(&self, alg: Algorithm) -> Result<Option<String>> {
        let f = if alg.is_1d() {
            self.one_d()
        } else {
            self.f.clone()
        };
        let db = Arc::new(self.database()?);
        let cfg = RerankConfig::new(DenseIndexParams::defaults(self.tuples.len(), self.system_k));
        let got = Session::new(db, cfg).run_topk(alg, &self.q, &f, self.h)?;
        let want = brute_force_topk(&self.tuples, &self.q, &f, self.h);
        let ids = |r: &crate::rerankmd::TopKResult| {
            r.tuples.iter().map(|t| t.tuple.id.0).collect::<Vec<_>>()
        };
        if ids(&got) == ids(&want) && got.short == want.short {
            return Ok(None);
        }
        Ok(Some(format!(
            "seed {} {alg} (n = {}, m = {}, k = {}, {:?}, h = {}): got {:?}, expected {:?}",
            self.seed,
            self.tuples.len(),
            self.f.dims(),
            self.system_k,
            self.system,
            self.h,
            ids(&got),
            ids(&want)
        )))
    }
}

fn reversed(f: &RankingFunction) -> RankingFunction {
    let weights = f.weights().expect("linear ranking");
    let terms: Vec<_> = (0..f.dims())
        .map(|i| (f.attrs()[i], weights[i], f.orientation(i).reversed()))
        .collect();
    RankingFunction::linear(&terms).expect("valid weights")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub instances: usize,
    pub checks: usize,
    pub failures: Vec<String>,
    pub elapsed_ms: u128,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every algorithm on `instances` random instances drawn from `seed`.
pub fn exactness_suite(instances: usize, seed: u64) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut checks = 0;
    let mut failures = Vec::new();
    for i in 0..instances {
        let inst = Instance::generate(seed.wrapping_add(i as u64));
        for alg in Algorithm::ALL {
            checks += 1;
            if let Some(diff) = inst.check(alg)? {
                failures.push(diff);
            }
        }
    }
    Ok(VerifyReport {
        instances,
        checks,
        failures,
        elapsed_ms: start.elapsed().as_millis(),
    })
}
