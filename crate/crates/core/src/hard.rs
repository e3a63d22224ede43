//! Classical constraint networks derived from a weighted network at a front,
//! and a complete backtracking solver with table-constraint GAC.

use std::collections::{HashSet, VecDeque};
use std::time::Instant;

use thiserror::Error;

use crate::front::Front;
use crate::model::{Instantiation, SoftConstraint, Tuple, Wcn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// The table lists allowed tuples.
    Positive,
    /// The table lists forbidden tuples.
    Negative,
}

/// A hard table constraint. `id` is the id of the soft constraint it was
/// derived from.
#[derive(Debug, Clone)]
pub struct HardConstraint {
    id: usize,
    scope: Vec<usize>,
    polarity: Polarity,
    table: Vec<Tuple>,
    members: HashSet<Tuple>,
}

impl HardConstraint {
    pub fn new(id: usize, scope: Vec<usize>, polarity: Polarity, table: Vec<Tuple>) -> Self {
        let members = table.iter().cloned().collect();
        HardConstraint {
            id,
            scope,
            polarity,
            table,
            members,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn table(&self) -> &[Tuple] {
        &self.table
    }

    pub fn accepts(&self, tuple: &[usize]) -> bool {
        let listed = self.members.contains(tuple);
        match self.polarity {
            Polarity::Positive => listed,
            Polarity::Negative => !listed,
        }
    }
}

/// A classical constraint network over the variables of a weighted network.
#[derive(Debug, Clone)]
pub struct Cn {
    domains: Vec<usize>,
    constraints: Vec<HardConstraint>,
}

impl Cn {
    pub fn new(domains: Vec<usize>, constraints: Vec<HardConstraint>) -> Self {
        Cn {
            domains,
            constraints,
        }
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domains
    }

    pub fn constraints(&self) -> &[HardConstraint] {
        &self.constraints
    }

    pub fn ids(&self) -> Vec<usize> {
        self.constraints.iter().map(|c| c.id).collect()
    }

    /// The sub-network keeping only constraints whose id is in `ids`.
    pub fn restrict(&self, ids: &[usize]) -> Cn {
        Cn {
            domains: self.domains.clone(),
            constraints: self
                .constraints
                .iter()
                .filter(|c| ids.contains(&c.id))
                .cloned()
                .collect(),
        }
    }

    pub fn is_solution(&self, inst: &Instantiation) -> bool {
        inst.values().len() == self.domains.len()
            && inst.values().iter().zip(&self.domains).all(|(v, d)| v < d)
            && self
                .constraints
                .iter()
                .all(|c| c.accepts(&inst.project(&c.scope)))
    }
}

/// Encodes the layers of `w` selected by `allowed` as a hard constraint of
/// the requested polarity. Listing the default layer's implicit tuples (a
/// positive encoding that allows it, or a negative one that forbids it)
/// enumerates the scope's Cartesian product.
pub fn encode_with(
    w: &SoftConstraint,
    domains: &[usize],
    allowed: impl Fn(usize) -> bool,
    polarity: Polarity,
) -> HardConstraint {
    let sizes: Vec<usize> = w.scope().iter().map(|&x| domains[x]).collect();
    let table = match polarity {
        Polarity::Negative if !allowed(w.default_layer()) => cartesian(&sizes)
            .filter(|t| !allowed(w.layer_of(t)))
            .collect(),
        Polarity::Negative => w
            .layers()
            .iter()
            .filter(|l| !allowed(l.index))
            .flat_map(|l| l.tuples.iter().cloned())
            .collect(),
        Polarity::Positive if allowed(w.default_layer()) => cartesian(&sizes)
            .filter(|t| allowed(w.layer_of(t)))
            .collect(),
        Polarity::Positive => w
            .layers()
            .iter()
            .filter(|l| allowed(l.index))
            .flat_map(|l| l.tuples.iter().cloned())
            .collect(),
    };
    HardConstraint::new(w.id(), w.scope().to_vec(), polarity, table)
}

/// Encodes with the polarity that avoids listing implicit tuples: negative
/// when the default layer is allowed, positive otherwise.
pub fn encode(
    w: &SoftConstraint,
    domains: &[usize],
    allowed: impl Fn(usize) -> bool,
) -> HardConstraint {
    let polarity = if allowed(w.default_layer()) {
        Polarity::Negative
    } else {
        Polarity::Positive
    };
    encode_with(w, domains, allowed, polarity)
}

/// Keeps, for each constraint, exactly the layer selected by `f`.
pub fn to_cn_eq(w: &Wcn, f: &Front) -> Cn {
    let domains = w.domain_sizes();
    let constraints = w
        .constraints()
        .iter()
        .map(|c| {
            let sel = f.layer(c.id());
            encode(c, &domains, |i| i == sel)
        })
        .collect();
    Cn::new(domains, constraints)
}

/// Keeps, for each constraint, every layer up to the one selected by `f`.
pub fn to_cn_leq(w: &Wcn, f: &Front) -> Cn {
    let domains = w.domain_sizes();
    let constraints = w
        .constraints()
        .iter()
        .map(|c| {
            let sel = f.layer(c.id());
            encode(c, &domains, |i| i <= sel)
        })
        .collect();
    Cn::new(domains, constraints)
}

/// Iterates all tuples of the product of `sizes` in lexicographic order.
pub fn cartesian(sizes: &[usize]) -> impl Iterator<Item = Tuple> + '_ {
    let empty = sizes.contains(&0);
    let mut next = if empty {
        None
    } else {
        Some(vec![0; sizes.len()])
    };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        for i in (0..sizes.len()).rev() {
            succ[i] += 1;
            if succ[i] < sizes[i] {
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(cur)
    })
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("resource limit reached")]
pub struct LimitReached;

/// Node and wall-clock limits shared by every solver call of one search.
#[derive(Debug, Clone, Default)]
pub struct Budget {
    node_limit: Option<u64>,
    deadline: Option<Instant>,
    nodes: u64,
}

impl Budget {
    pub fn new(node_limit: Option<u64>, deadline: Option<Instant>) -> Self {
        Budget {
            node_limit,
            deadline,
            nodes: 0,
        }
    }

    pub fn unlimited() -> Self {
        Self::default()
    }

    /// Total search nodes consumed so far.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn tick(&mut self) -> Result<(), LimitReached> {
        self.nodes += 1;
        if self.node_limit.is_some_and(|l| self.nodes > l) {
            return Err(LimitReached);
        }
        if self.nodes.is_multiple_of(64) {
            self.check_time()?;
        }
        Ok(())
    }

    pub fn check_time(&self) -> Result<(), LimitReached> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(LimitReached),
            _ => Ok(()),
        }
    }
}

/// Current domains, stored flat.
#[derive(Debug, Clone)]
struct Domains {
    live: Vec<bool>,
    size: Vec<usize>,
}

struct Engine<'a> {
    cn: &'a Cn,
    offset: Vec<usize>,
    var_cons: Vec<Vec<usize>>,
    weight: Vec<u64>,
}

impl<'a> Engine<'a> {
    fn new(cn: &'a Cn) -> Self {
        let mut offset = Vec::with_capacity(cn.domains.len() + 1);
        let mut acc = 0;
        for &d in &cn.domains {
            offset.push(acc);
            acc += d;
        }
        offset.push(acc);
        let mut var_cons = vec![Vec::new(); cn.domains.len()];
        for (ci, c) in cn.constraints.iter().enumerate() {
            for &x in &c.scope {
                var_cons[x].push(ci);
            }
        }
        Engine {
            cn,
            offset,
            var_cons,
            weight: vec![1; cn.constraints.len()],
        }
    }

    fn full_domains(&self) -> Domains {
        Domains {
            live: vec![true; *self.offset.last().unwrap()],
            size: self.cn.domains.clone(),
        }
    }

    #[inline]
    fn is_live(&self, d: &Domains, x: usize, v: usize) -> bool {
        d.live[self.offset[x] + v]
    }

    fn remove(&self, d: &mut Domains, x: usize, v: usize) {
        let slot = &mut d.live[self.offset[x] + v];
        if *slot {
            *slot = false;
            d.size[x] -= 1;
        }
    }

    fn assign(&self, d: &mut Domains, x: usize, v: usize) {
        for u in 0..self.cn.domains[x] {
            if u != v {
                self.remove(d, x, u);
            }
        }
    }

    fn first_value(&self, d: &Domains, x: usize) -> usize {
        (0..self.cn.domains[x])
            .find(|&v| self.is_live(d, x, v))
            .expect("empty domain")
    }

    /// Removes unsupported values of constraint `ci`. Returns the variables
    /// whose domain shrank, or `None` on a wipeout.
    fn revise(&self, d: &mut Domains, ci: usize) -> Option<Vec<usize>> {
        let c = &self.cn.constraints[ci];
        let arity = c.scope.len();
        let valid = |t: &Tuple| c.scope.iter().zip(t).all(|(&x, &v)| self.is_live(d, x, v));
        let mut removable: Vec<Vec<usize>> = vec![Vec::new(); arity];
        match c.polarity {
            Polarity::Positive => {
                let mut supported: Vec<Vec<bool>> = c
                    .scope
                    .iter()
                    .map(|&x| vec![false; self.cn.domains[x]])
                    .collect();
                for t in c.table.iter().filter(|t| valid(t)) {
                    for (i, &v) in t.iter().enumerate() {
                        supported[i][v] = true;
                    }
                }
                for (i, &x) in c.scope.iter().enumerate() {
                    for v in 0..self.cn.domains[x] {
                        if self.is_live(d, x, v) && !supported[i][v] {
                            removable[i].push(v);
                        }
                    }
                }
            }
            Polarity::Negative => {
                // A value is supported iff some valid extension is not forbidden.
                let mut forbidden: Vec<Vec<u128>> = c
                    .scope
                    .iter()
                    .map(|&x| vec![0; self.cn.domains[x]])
                    .collect();
                for t in c.table.iter().filter(|t| valid(t)) {
                    for (i, &v) in t.iter().enumerate() {
                        forbidden[i][v] += 1;
                    }
                }
                for (i, &x) in c.scope.iter().enumerate() {
                    let others = c
                        .scope
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .fold(1u128, |acc, (_, &y)| acc.saturating_mul(d.size[y] as u128));
                    for v in 0..self.cn.domains[x] {
                        if self.is_live(d, x, v) && forbidden[i][v] >= others {
                            removable[i].push(v);
                        }
                    }
                }
            }
        }
        let mut changed = Vec::new();
        for (i, vals) in removable.into_iter().enumerate() {
            if vals.is_empty() {
                continue;
            }
            let x = c.scope[i];
            for v in vals {
                self.remove(d, x, v);
            }
            if d.size[x] == 0 {
                return None;
            }
            changed.push(x);
        }
        Some(changed)
    }

    /// Runs revisions to a fixpoint, starting from the constraints on
    /// `touched` (or all constraints when `touched` is `None`).
    fn propagate(&mut self, d: &mut Domains, touched: Option<&[usize]>) -> bool {
        let m = self.cn.constraints.len();
        let mut queued = vec![false; m];
        let mut queue = VecDeque::new();
        match touched {
            None => {
                queue.extend(0..m);
                queued.iter_mut().for_each(|q| *q = true);
            }
            Some(vars) => {
                for &x in vars {
                    for &ci in &self.var_cons[x] {
                        if !queued[ci] {
                            queued[ci] = true;
                            queue.push_back(ci);
                        }
                    }
                }
            }
        }
        while let Some(ci) = queue.pop_front() {
            queued[ci] = false;
            let Some(changed) = self.revise(d, ci) else {
                self.weight[ci] += 1;
                return false;
            };
            for x in changed {
                for &cj in &self.var_cons[x] {
                    if cj != ci && !queued[cj] {
                        queued[cj] = true;
                        queue.push_back(cj);
                    }
                }
            }
        }
        true
    }

    /// dom/wdeg over unfixed variables that share a constraint with another
    /// unfixed variable; ties go to the smallest index.
    fn select(&self, d: &Domains) -> Option<usize> {
        let mut best: Option<(usize, usize, u64)> = None;
        for x in 0..self.cn.domains.len() {
            let size = d.size[x];
            if size <= 1 {
                continue;
            }
            let wdeg: u64 = self.var_cons[x]
                .iter()
                .filter(|&&ci| {
                    self.cn.constraints[ci]
                        .scope
                        .iter()
                        .any(|&y| y != x && d.size[y] > 1)
                })
                .map(|&ci| self.weight[ci])
                .sum();
            if wdeg == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((_, bs, bw)) => (size as u128) * (bw as u128) < (bs as u128) * (wdeg as u128),
            };
            if better {
                best = Some((x, size, wdeg));
            }
        }
        best.map(|(x, _, _)| x)
    }

    fn dfs(
        &mut self,
        mut d: Domains,
        budget: &mut Budget,
    ) -> Result<Option<Domains>, LimitReached> {
        loop {
            budget.tick()?;
            let Some(x) = self.select(&d) else {
                return Ok(Some(d));
            };
            let a = self.first_value(&d, x);
            let mut left = d.clone();
            self.assign(&mut left, x, a);
            if self.propagate(&mut left, Some(&[x])) {
                if let Some(sol) = self.dfs(left, budget)? {
                    return Ok(Some(sol));
                }
            }
            self.remove(&mut d, x, a);
            if !self.propagate(&mut d, Some(&[x])) {
                return Ok(None);
            }
        }
    }
}

/// Enforces generalized arc consistency. Returns the reduced domains as
/// sorted value lists, or `None` on a wipeout.
pub fn propagate_gac(cn: &Cn) -> Option<Vec<Vec<usize>>> {
    let mut engine = Engine::new(cn);
    let mut d = engine.full_domains();
    if !engine.propagate(&mut d, None) {
        return None;
    }
    Some(
        (0..cn.domains.len())
            .map(|x| {
                (0..cn.domains[x])
                    .filter(|&v| engine.is_live(&d, x, v))
                    .collect()
            })
            .collect(),
    )
}

/// Complete search for a solution of `cn`. Deterministic: binary branching
/// on dom/wdeg variables, smallest value first.
pub fn solve_cn(cn: &Cn, budget: &mut Budget) -> Result<Option<Instantiation>, LimitReached> {
    budget.check_time()?;
    let mut engine = Engine::new(cn);
    let mut d = engine.full_domains();
    if !engine.propagate(&mut d, None) {
        return Ok(None);
    }
    let Some(d) = engine.dfs(d, budget)? else {
        return Ok(None);
    };
    let values = (0..cn.domains.len())
        .map(|x| engine.first_value(&d, x))
        .collect();
    let inst = Instantiation::new(values);
    debug_assert!(cn.is_solution(&inst));
    Ok(Some(inst))
}
