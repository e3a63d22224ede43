//! Minimal unsatisfiable core extraction over hard constraint networks.

use std::str::FromStr;

use thiserror::Error;

use crate::hard::{solve_cn, Budget, Cn, LimitReached};
use crate::model::Wcn;

/// Ids of a minimal unsatisfiable set of constraints, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Core(Vec<usize>);

impl Core {
    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MucStrategy {
    /// Drop each constraint in id order whenever the rest stays unsatisfiable.
    #[default]
    Deletion,
    /// Locate transition constraints by bisection over the constraint order.
    Dichotomic,
}

impl FromStr for MucStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deletion" => Ok(MucStrategy::Deletion),
            "dichotomic" => Ok(MucStrategy::Dichotomic),
            other => Err(format!("unknown MUC strategy `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum MucError {
    #[error("network is satisfiable")]
    NotUnsat,
    #[error(transparent)]
    Limit(#[from] LimitReached),
}

struct Oracle<'a> {
    cn: &'a Cn,
    budget: &'a mut Budget,
}

impl Oracle<'_> {
    fn unsat(&mut self, ids: &[usize]) -> Result<bool, LimitReached> {
        Ok(solve_cn(&self.cn.restrict(ids), self.budget)?.is_none())
    }
}

/// Extracts a minimal unsatisfiable core of `cn`.
pub fn extract_muc(cn: &Cn, strategy: MucStrategy, budget: &mut Budget) -> Result<Core, MucError> {
    let mut oracle = Oracle { cn, budget };
    let mut ids = cn.ids();
    ids.sort_unstable();
    if !oracle.unsat(&ids)? {
        return Err(MucError::NotUnsat);
    }
    let mut core = match strategy {
        MucStrategy::Deletion => deletion(&mut oracle, ids)?,
        MucStrategy::Dichotomic => dichotomic(&mut oracle, ids)?,
    };
    core.sort_unstable();
    Ok(Core(core))
}

fn deletion(oracle: &mut Oracle<'_>, mut ids: Vec<usize>) -> Result<Vec<usize>, LimitReached> {
    let mut i = 0;
    while i < ids.len() {
        let mut without = ids.clone();
        without.remove(i);
        if oracle.unsat(&without)? {
            ids = without;
        } else {
            i += 1;
        }
    }
    Ok(ids)
}

fn dichotomic(
    oracle: &mut Oracle<'_>,
    mut candidates: Vec<usize>,
) -> Result<Vec<usize>, LimitReached> {
    // Invariant: core ∪ candidates is unsatisfiable.
    let mut core: Vec<usize> = Vec::new();
    loop {
        if oracle.unsat(&core)? {
            return Ok(core);
        }
        // Smallest prefix length p with core ∪ candidates[..p] unsatisfiable.
        let (mut lo, mut hi) = (1, candidates.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let mut probe = core.clone();
            probe.extend_from_slice(&candidates[..mid]);
            if oracle.unsat(&probe)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        core.push(candidates[lo - 1]);
        candidates.truncate(lo - 1);
    }
}

/// The sub-network of `w` made of the core's constraints.
pub fn restrict_wcn(w: &Wcn, core: &Core) -> Wcn {
    w.restrict(core.ids())
}
