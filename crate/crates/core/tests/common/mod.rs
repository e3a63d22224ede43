//! Test-only oracles, independent of the solver's own evaluation paths.
#![allow(dead_code)]

use wcsp_core::cost::Cost;
use wcsp_core::generate::{random_instance, GenParams};
use wcsp_core::hard::Cn;
use wcsp_core::model::{Instantiation, Tuple, Wcn};

/// Enumerates all tuples over `sizes`, first position most significant.
pub fn all_tuples(sizes: &[usize]) -> Vec<Tuple> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..s).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Cost of `inst` by linear scan of the explicit tables, plain addition
/// capped at top.
pub fn raw_cost(w: &Wcn, inst: &[usize]) -> u64 {
    let mut total: u64 = 0;
    for c in w.constraints() {
        let proj: Tuple = c.scope().iter().map(|&x| inst[x]).collect();
        let cost = c
            .explicit_tuples()
            .find(|(t, _)| **t == proj)
            .map_or(c.default_cost(), |(_, cost)| cost);
        total += cost.0;
    }
    total.min(w.top().0)
}

/// Satisfiability of a CN by enumeration of every complete instantiation.
pub fn brute_sat(cn: &Cn) -> bool {
    let doms = cn.domain_sizes().to_vec();
    all_tuples(&doms).into_iter().any(|v| {
        cn.constraints().iter().all(|c| {
            let proj: Tuple = c.scope().iter().map(|&x| v[x]).collect();
            c.accepts(&proj)
        })
    })
}

pub fn brute_sat_restricted(cn: &Cn, ids: &[usize]) -> bool {
    brute_sat(&cn.restrict(ids))
}

/// Minimal cost over all instantiations, by enumeration with `raw_cost`.
pub fn brute_min(w: &Wcn) -> u64 {
    all_tuples(&w.domain_sizes())
        .iter()
        .map(|v| raw_cost(w, v))
        .min()
        .unwrap()
}

pub const CORPUS_SIZE: u64 = 500;

/// Parameters of corpus instance `seed`: n <= 6, d <= 4, e <= 8, arity <= 3,
/// costs from {0,1,2,5,10,k}, k alternating between 20 and 10^6.
pub fn corpus_params(seed: u64) -> GenParams {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE ^ seed);
    let vars = rng.gen_range(2..=6);
    let domain = rng.gen_range(2..=4);
    let constraints = rng.gen_range(1..=8);
    let arity = rng.gen_range(1..=3usize.min(vars));
    let top = if seed.is_multiple_of(2) {
        20
    } else {
        1_000_000
    };
    let menu = vec![0, 1, 2, 5, 10, top];
    GenParams {
        vars,
        domain,
        constraints,
        arity,
        costs: menu.clone(),
        defaults: menu,
        top,
        seed,
    }
}

pub fn corpus() -> Vec<Wcn> {
    (0..CORPUS_SIZE)
        .map(|s| random_instance(&corpus_params(s)).unwrap())
        .collect()
}

pub fn inst(v: &[usize]) -> Instantiation {
    Instantiation::new(v.to_vec())
}

pub fn cost(v: u64) -> Cost {
    Cost(v)
}
