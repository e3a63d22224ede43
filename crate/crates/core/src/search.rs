//! Core-guided searches over the front lattice, and a brute-force oracle.
//!
//! * [`complete_search_no_muc`] pops fronts by increasing cost and expands
//!   every constraint of an unsatisfiable front.
//! * [`complete_search`] expands only the constraints of a minimal
//!   unsatisfiable core of the front's network.
//! * [`incomplete_search`] greedily relaxes one core at a time, returning an
//!   upper bound.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cost::Cost;
use crate::front::{all_successors, bottom_front, successors, Front, FrontError, FrontQueue};
use crate::hard::{cartesian, solve_cn, to_cn_eq, to_cn_leq, Budget, Cn, LimitReached};
use crate::model::{Instantiation, Wcn};
use crate::muc::{extract_muc, restrict_wcn, Core, MucError, MucStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimum,
    UpperBound,
    Infeasible,
    Unknown,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Fronts taken from any queue, relax-local ones included.
    pub fronts_popped: u64,
    pub cns_solved: u64,
    pub mucs_extracted: u64,
    /// Sum of the sizes of all extracted cores.
    pub muc_constraints: u64,
    pub max_muc: u64,
    pub relax_calls: u64,
    pub nodes: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub solution: Option<Instantiation>,
    /// Cost of `solution`; the top cost when there is none.
    pub cost: Cost,
    pub stats: Stats,
}

#[derive(Debug, Clone, Default)]
pub struct SearchConfig {
    pub muc: MucStrategy,
    pub node_budget: Option<u64>,
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnKind {
    Eq,
    Leq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// The main queue of a complete search, or the greedy outer loop.
    Main,
    /// The local queue of a relax call.
    Relax,
}

/// Hooks called during a search. All methods default to no-ops.
pub trait Observer {
    fn front_popped(&mut self, _phase: Phase, _front: &Front) {}
    /// `network` is the weighted network the CN was built from (a restricted
    /// one inside relax).
    fn cn_solved(
        &mut self,
        _network: &Wcn,
        _kind: CnKind,
        _front: &Front,
        _solution: Option<&Instantiation>,
    ) {
    }
    fn core_extracted(&mut self, _phase: Phase, _cn: &Cn, _core: &Core) {}
    fn relaxed(&mut self, _from: &Front, _to: &Front) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum RelaxError {
    #[error("no relaxation of the core stays below the top cost")]
    Exhausted,
    #[error(transparent)]
    Limit(#[from] LimitReached),
}

/// One search run: configuration, shared budget, statistics and observer.
pub struct Searcher<'o> {
    muc: MucStrategy,
    budget: Budget,
    stats: Stats,
    start: Instant,
    observer: &'o mut dyn Observer,
}

impl<'o> Searcher<'o> {
    pub fn new(cfg: &SearchConfig, observer: &'o mut dyn Observer) -> Self {
        let start = Instant::now();
        Searcher {
            muc: cfg.muc,
            budget: Budget::new(cfg.node_budget, cfg.time_limit.map(|t| start + t)),
            stats: Stats::default(),
            start,
            observer,
        }
    }

    pub fn stats(&self) -> Stats {
        let mut s = self.stats.clone();
        s.nodes = self.budget.nodes();
        s.elapsed = self.start.elapsed();
        s
    }

    fn outcome(&self, w: &Wcn, status: Status, solution: Option<Instantiation>) -> Outcome {
        let cost = solution.as_ref().map_or(w.top(), |s| w.evaluate(s));
        Outcome {
            status,
            solution,
            cost,
            stats: self.stats(),
        }
    }

    fn solve(
        &mut self,
        network: &Wcn,
        kind: CnKind,
        f: &Front,
    ) -> Result<(Cn, Option<Instantiation>), LimitReached> {
        let cn = match kind {
            CnKind::Eq => to_cn_eq(network, f),
            CnKind::Leq => to_cn_leq(network, f),
        };
        let sol = solve_cn(&cn, &mut self.budget)?;
        self.stats.cns_solved += 1;
        self.observer.cn_solved(network, kind, f, sol.as_ref());
        Ok((cn, sol))
    }

    fn core(&mut self, phase: Phase, cn: &Cn) -> Result<Core, LimitReached> {
        let core = match extract_muc(cn, self.muc, &mut self.budget) {
            Ok(core) => core,
            Err(MucError::Limit(l)) => return Err(l),
            Err(MucError::NotUnsat) => unreachable!("core requested on a satisfiable network"),
        };
        self.stats.mucs_extracted += 1;
        self.stats.muc_constraints += core.len() as u64;
        self.stats.max_muc = self.stats.max_muc.max(core.len() as u64);
        self.observer.core_extracted(phase, cn, &core);
        Ok(core)
    }

    /// Complete best-first search over fronts. With `use_cores`, only the
    /// constraints of a core of each unsatisfiable front are incremented.
    pub fn complete(&mut self, w: &Wcn, use_cores: bool) -> Outcome {
        match self.complete_inner(w, use_cores) {
            Ok(Some(sol)) => self.outcome(w, Status::Optimum, Some(sol)),
            Ok(None) => self.outcome(w, Status::Infeasible, None),
            Err(LimitReached) => self.outcome(w, Status::Unknown, None),
        }
    }

    fn complete_inner(
        &mut self,
        w: &Wcn,
        use_cores: bool,
    ) -> Result<Option<Instantiation>, LimitReached> {
        let mut queue = FrontQueue::new();
        match bottom_front(w) {
            Ok(b) => {
                queue.push(b);
            }
            Err(FrontError::BottomForbidden(b)) => {
                for s in all_successors(w, &b) {
                    queue.push(s);
                }
            }
        }
        while let Some(f) = queue.pop_min() {
            self.budget.check_time()?;
            self.stats.fronts_popped += 1;
            self.observer.front_popped(Phase::Main, &f);
            let (cn, sol) = self.solve(w, CnKind::Eq, &f)?;
            if let Some(sol) = sol {
                debug_assert_eq!(w.evaluate(&sol), f.cost());
                return Ok(Some(sol));
            }
            let next = if use_cores {
                let core = self.core(Phase::Main, &cn)?;
                successors(w, &f, core.ids())
            } else {
                all_successors(w, &f)
            };
            for s in next {
                queue.push(s);
            }
        }
        Ok(None)
    }

    /// Greedy core relaxation. Returns an upper bound, or `Infeasible` when a
    /// core cannot be relaxed below the top cost.
    pub fn greedy(&mut self, w: &Wcn) -> Outcome {
        let mut f = match bottom_front(w) {
            Ok(b) => b,
            // Every tuple costs at least its layer 0, so nothing is below top.
            Err(FrontError::BottomForbidden(_)) => {
                return self.outcome(w, Status::Infeasible, None)
            }
        };
        loop {
            if self.budget.check_time().is_err() {
                return self.outcome(w, Status::Unknown, None);
            }
            self.stats.fronts_popped += 1;
            self.observer.front_popped(Phase::Main, &f);
            let (cn, sol) = match self.solve(w, CnKind::Leq, &f) {
                Ok(r) => r,
                Err(LimitReached) => return self.outcome(w, Status::Unknown, None),
            };
            if let Some(sol) = sol {
                return self.outcome(w, Status::UpperBound, Some(sol));
            }
            let core = match self.core(Phase::Main, &cn) {
                Ok(c) => c,
                Err(LimitReached) => return self.outcome(w, Status::Unknown, None),
            };
            let sub = restrict_wcn(w, &core);
            match self.relax(w, &sub, &f) {
                Ok(g) => {
                    self.observer.relaxed(&f, &g);
                    f = g;
                }
                Err(RelaxError::Exhausted) => return self.outcome(w, Status::Infeasible, None),
                Err(RelaxError::Limit(_)) => return self.outcome(w, Status::Unknown, None),
            }
        }
    }

    /// Finds the least-cost front above `f`, incrementing only constraints of
    /// `sub`, whose `<=` network over `sub` is satisfiable. Costs are taken
    /// over the full network `w`.
    pub fn relax(&mut self, w: &Wcn, sub: &Wcn, f: &Front) -> Result<Front, RelaxError> {
        self.stats.relax_calls += 1;
        let mut local = FrontQueue::new();
        local.push(f.clone());
        while let Some(g) = local.pop_min() {
            self.budget.check_time()?;
            self.stats.fronts_popped += 1;
            self.observer.front_popped(Phase::Relax, &g);
            let (cn, sol) = self.solve(sub, CnKind::Leq, &g)?;
            if sol.is_some() {
                return Ok(g);
            }
            let core = self.core(Phase::Relax, &cn)?;
            for s in successors(w, &g, core.ids()) {
                local.push(s);
            }
        }
        Err(RelaxError::Exhausted)
    }
}

pub fn complete_search_no_muc(w: &Wcn, cfg: &SearchConfig) -> Outcome {
    Searcher::new(cfg, &mut NoObserver).complete(w, false)
}

pub fn complete_search(w: &Wcn, cfg: &SearchConfig) -> Outcome {
    Searcher::new(cfg, &mut NoObserver).complete(w, true)
}

pub fn incomplete_search(w: &Wcn, cfg: &SearchConfig) -> Outcome {
    Searcher::new(cfg, &mut NoObserver).greedy(w)
}

pub fn relax(w: &Wcn, sub: &Wcn, f: &Front, cfg: &SearchConfig) -> Result<Front, RelaxError> {
    Searcher::new(cfg, &mut NoObserver).relax(w, sub, f)
}

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("search space of {size} instantiations exceeds the cap of {cap}")]
pub struct TooLarge {
    pub size: u128,
    pub cap: u128,
}

/// Enumerates every complete instantiation. Returns the lexicographically
/// first minimizer.
pub fn brute_force_optimum(w: &Wcn, cap: u128) -> Result<Outcome, TooLarge> {
    let size = w.search_space();
    if size > cap {
        return Err(TooLarge { size, cap });
    }
    let start = Instant::now();
    let mut best: Option<(Cost, Vec<usize>)> = None;
    for values in cartesian(&w.domain_sizes()) {
        let inst = Instantiation::new(values);
        let c = w.evaluate(&inst);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, inst.into_values()));
        }
    }
    let (cost, values) = best.expect("at least one instantiation");
    let stats = Stats {
        elapsed: start.elapsed(),
        ..Stats::default()
    };
    Ok(if cost >= w.top() {
        Outcome {
            status: Status::Infeasible,
            solution: None,
            cost: w.top(),
            stats,
        }
    } else {
        Outcome {
            status: Status::Optimum,
            solution: Some(Instantiation::new(values)),
            cost,
            stats,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::fig3;
    use crate::model::SoftConstraint;

    #[derive(Default)]
    struct Trace {
        popped: Vec<Vec<usize>>,
        cores: Vec<Vec<usize>>,
        relaxed: Vec<(Vec<usize>, Vec<usize>)>,
    }

    impl Observer for Trace {
        fn front_popped(&mut self, phase: Phase, f: &Front) {
            if phase == Phase::Main {
                self.popped.push(f.layers().to_vec());
            }
        }
        fn core_extracted(&mut self, phase: Phase, _cn: &Cn, core: &Core) {
            if phase == Phase::Main {
                self.cores.push(core.ids().to_vec());
            }
        }
        fn relaxed(&mut self, from: &Front, to: &Front) {
            self.relaxed
                .push((from.layers().to_vec(), to.layers().to_vec()));
        }
    }

    fn contradictory() -> Wcn {
        let d = [2];
        let top = Cost(50);
        let a = SoftConstraint::hard(vec![0], vec![vec![0]], &d, top).unwrap();
        let b = SoftConstraint::hard(vec![0], vec![vec![1]], &d, top).unwrap();
        Wcn::new("contra", d.to_vec(), vec![a, b], top).unwrap()
    }

    fn empty() -> Wcn {
        Wcn::new("empty", vec![2, 2], vec![], Cost(10)).unwrap()
    }

    #[test]
    fn no_muc_fig3() {
        let o = complete_search_no_muc(&fig3(), &SearchConfig::default());
        assert_eq!(o.status, Status::Optimum);
        assert_eq!(o.cost, Cost(10));
        assert_eq!(o.solution.unwrap().values(), &[0, 1]);
    }

    #[test]
    fn complete_fig3_trace() {
        for muc in [MucStrategy::Deletion, MucStrategy::Dichotomic] {
            let cfg = SearchConfig {
                muc,
                ..Default::default()
            };
            let mut trace = Trace::default();
            let o = Searcher::new(&cfg, &mut trace).complete(&fig3(), true);
            assert_eq!((o.status, o.cost), (Status::Optimum, Cost(10)));
            assert_eq!(
                trace.popped,
                vec![vec![0, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
            );
            assert_eq!(trace.cores, vec![vec![1, 2], vec![0, 1]]);
        }
    }

    #[test]
    fn empty_network_costs_zero() {
        let cfg = SearchConfig::default();
        for o in [
            complete_search(&empty(), &cfg),
            complete_search_no_muc(&empty(), &cfg),
        ] {
            assert_eq!((o.status, o.cost), (Status::Optimum, Cost(0)));
        }
        let g = incomplete_search(&empty(), &cfg);
        assert_eq!((g.status, g.cost), (Status::UpperBound, Cost(0)));
        assert_eq!(g.stats.cns_solved, 1);
    }

    #[test]
    fn contradictory_hard_constraints_are_infeasible() {
        let w = contradictory();
        let cfg = SearchConfig::default();
        assert_eq!(complete_search_no_muc(&w, &cfg).status, Status::Infeasible);
        assert_eq!(complete_search(&w, &cfg).status, Status::Infeasible);
        assert_eq!(incomplete_search(&w, &cfg).status, Status::Infeasible);
        assert_eq!(
            brute_force_optimum(&w, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .status,
            Status::Infeasible
        );
    }

    #[test]
    fn greedy_fig3() {
        let mut trace = Trace::default();
        let o = Searcher::new(&SearchConfig::default(), &mut trace).greedy(&fig3());
        assert_eq!(o.status, Status::UpperBound);
        assert_eq!(o.cost, Cost(10));
        assert_eq!(o.solution.unwrap().values(), &[0, 1]);
        assert_eq!(
            trace.relaxed,
            vec![
                (vec![0, 0, 0], vec![0, 1, 0]),
                (vec![0, 1, 0], vec![0, 1, 1]),
            ]
        );
        assert_eq!(trace.cores, vec![vec![1, 2], vec![0, 1, 2]]);
    }

    #[test]
    fn relax_fig3_first_core() {
        let w = fig3();
        let sub = w.restrict(&[1, 2]);
        let b = bottom_front(&w).unwrap();
        let g = relax(&w, &sub, &b, &SearchConfig::default()).unwrap();
        assert_eq!(g.layers(), &[0, 1, 0]);
        assert_eq!(g.cost(), Cost(5));
    }

    #[test]
    fn relax_exhausted() {
        let d = [2];
        let top = Cost(30);
        // Every real tuple is listed at top: the default layer 0 is empty.
        let always_bad = SoftConstraint::new(
            vec![0],
            vec![(vec![0], top), (vec![1], top)],
            Cost(0),
            &d,
            top,
        )
        .unwrap();
        let w = Wcn::new("bad", d.to_vec(), vec![always_bad], top).unwrap();
        let b = bottom_front(&w).unwrap();
        assert_eq!(
            relax(&w, &w.restrict(&[0]), &b, &SearchConfig::default()),
            Err(RelaxError::Exhausted)
        );
    }

    #[test]
    fn relax_returns_satisfiable_input_unchanged() {
        let w = fig3();
        let f = Front::new(&w, vec![0, 0, 1]);
        let g = relax(&w, &w, &f, &SearchConfig::default()).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn oracle_fig3() {
        let o = brute_force_optimum(&fig3(), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!((o.status, o.cost), (Status::Optimum, Cost(10)));
        assert_eq!(o.solution.unwrap().values(), &[0, 1]);
        assert_eq!(
            brute_force_optimum(&empty(), DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .cost,
            Cost(0)
        );
        assert!(brute_force_optimum(&fig3(), 8).is_err());
    }

    #[test]
    fn budget_gives_unknown() {
        let cfg = SearchConfig {
            node_budget: Some(0),
            ..Default::default()
        };
        let o = complete_search(&fig3(), &cfg);
        assert_eq!(o.status, Status::Unknown);
        assert!(o.solution.is_none());
        let cfg = SearchConfig {
            time_limit: Some(Duration::ZERO),
            ..Default::default()
        };
        assert_eq!(incomplete_search(&fig3(), &cfg).status, Status::Unknown);
    }
}
