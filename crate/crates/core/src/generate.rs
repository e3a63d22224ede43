//! Seeded random instance generator.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cost::Cost;
use crate::hard::cartesian;
use crate::model::{SoftConstraint, Wcn};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub vars: usize,
    pub domain: usize,
    pub constraints: usize,
    pub arity: usize,
    /// Costs drawn for explicit tuples. Values above `top` are read as `top`.
    pub costs: Vec<u64>,
    pub defaults: Vec<u64>,
    pub top: u64,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad generator parameters: {0}")]
pub struct BadParams(pub String);

/// Generates a network: each constraint gets a uniformly sampled scope of
/// distinct variables, a default cost from `defaults`, and each tuple of its
/// Cartesian product listed with probability 1/2 at a cost from `costs`.
pub fn random_instance(p: &GenParams) -> Result<Wcn, BadParams> {
    if p.vars == 0 || p.domain == 0 || p.arity == 0 || p.top == 0 {
        return Err(BadParams("sizes and top must be positive".into()));
    }
    if p.arity > p.vars {
        return Err(BadParams(format!(
            "arity {} exceeds {} variables",
            p.arity, p.vars
        )));
    }
    if p.costs.is_empty() || p.defaults.is_empty() {
        return Err(BadParams("cost menus must not be empty".into()));
    }
    let top = Cost(p.top);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let domains = vec![p.domain; p.vars];
    let mut constraints = Vec::with_capacity(p.constraints);
    for _ in 0..p.constraints {
        let mut scope = sample(&mut rng, p.vars, p.arity).into_vec();
        scope.sort_unstable();
        let default = Cost(p.defaults[rng.gen_range(0..p.defaults.len())].min(p.top));
        let sizes = vec![p.domain; p.arity];
        let raw = cartesian(&sizes)
            .filter_map(|t| {
                rng.gen_bool(0.5)
                    .then(|| (t, Cost(p.costs[rng.gen_range(0..p.costs.len())].min(p.top))))
            })
            .collect();
        let c = SoftConstraint::new(scope, raw, default, &domains, top)
            .map_err(|e| BadParams(e.to_string()))?;
        constraints.push(c);
    }
    Wcn::new(format!("random-{}", p.seed), domains, constraints, top)
        .map_err(|e| BadParams(e.to_string()))
}
