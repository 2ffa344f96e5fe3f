//! Seeded synthetic tables.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{OrdinalAttr, Schema, Tuple};

fn draw(rng: &mut ChaCha8Rng, a: &OrdinalAttr) -> f64 {
    match a.step() {
        Some(step) => a.lower + rng.gen_range(0..=a.grid_last().unwrap_or(0)) as f64 * step,
        None => rng.gen_range(a.lower..=a.upper),
    }
}

/// Independent uniform values on every attribute; categorical values uniform over their sets.
pub fn uniform(schema: &Schema, n: usize, seed: u64) -> Vec<Tuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let ordinal = schema.ordinal().iter().map(|a| draw(&mut rng, a)).collect();
            let categorical = schema
                .categorical()
                .iter()
                .map(|c| c.values.choose(&mut rng).cloned().unwrap_or_default())
                .collect();
            Tuple::new(i as u64, ordinal, categorical)
        })
        .collect()
}

/// Two continuous attributes `A1`, `A2` on [0, 1].
pub fn unit_square() -> Schema {
    Schema::new(
        vec![
            OrdinalAttr::continuous("A1", 0.0, 1.0),
            OrdinalAttr::continuous("A2", 0.0, 1.0),
        ],
        vec![],
    )
    .expect("valid schema")
}

/// Half the tuples sit at the two axis extremes (tiny on one attribute,
/// huge on the other), the rest in the middle of the unit square; tuple 0
/// at (0.3, 0.3) is the unique best under `A1 + A2`. Sorted access on
/// either attribute must pass a quarter of the table before reaching it.
pub fn extreme_value(n: usize, seed: u64) -> Vec<Tuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Tuple::ordinal(0, vec![0.3, 0.3])];
    let quarter = n / 4;
    for i in 1..n {
        let id = i as u64;
        let (lo, hi) = (rng.gen_range(0.0..0.01), rng.gen_range(0.99..=1.0));
        let t = if i <= quarter {
            vec![lo, hi]
        } else if i <= 2 * quarter {
            vec![hi, lo]
        } else {
            vec![rng.gen_range(0.35..0.65), rng.gen_range(0.35..0.65)]
        };
        out.push(Tuple::ordinal(id, t));
    }
    out
}
