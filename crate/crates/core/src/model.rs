//! Weighted constraint networks over soft table constraints.
//!
//! Every soft constraint is normalized into *layers*: groups of tuples that
//! share one cost, sorted by strictly increasing cost. One layer per
//! constraint is the *default* layer; it lists no tuple and implicitly holds
//! every tuple not mentioned elsewhere.

use std::collections::HashMap;

use thiserror::Error;

use crate::cost::{bounded_sum, Cost};

/// A tuple of value indices, one per scope position.
pub type Tuple = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("tuple {0:?} appears more than once")]
    DuplicateTuple(Tuple),
    #[error("hard constraint has an empty relation")]
    EmptyRelation,
    #[error("violation weight {weight} must lie strictly between 0 and {top}")]
    BadWeight { weight: u64, top: u64 },
    #[error("tuple {tuple:?} has arity {got}, scope has {expected} variables")]
    ArityMismatch {
        tuple: Tuple,
        expected: usize,
        got: usize,
    },
    #[error("value {value} is outside the domain of variable {var} (size {size})")]
    ValueOutOfDomain {
        var: usize,
        value: usize,
        size: usize,
    },
    #[error("scope references undeclared variable {0}")]
    UnknownVariable(usize),
    #[error("variable {0} occurs twice in a scope")]
    RepeatedVariable(usize),
    #[error("scope is empty")]
    EmptyScope,
    #[error("variable {0} has an empty domain")]
    EmptyDomain(usize),
    #[error("top cost must be positive")]
    BadTop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variable {
    pub id: usize,
    pub domain_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub index: usize,
    pub cost: Cost,
    /// Explicit tuples, sorted. Always empty for the default layer.
    pub tuples: Vec<Tuple>,
    pub is_default: bool,
}

/// Groups raw `(tuple, cost)` entries into cost layers.
///
/// Costs above `top` are clamped. Tuples whose cost equals `default_cost` are
/// absorbed by the default layer.
pub fn build_layers(
    raw: Vec<(Tuple, Cost)>,
    default_cost: Cost,
    top: Cost,
) -> Result<Vec<Layer>, ModelError> {
    let default_cost = default_cost.clamp_to(top);
    let mut seen: HashMap<&Tuple, ()> = HashMap::with_capacity(raw.len());
    for (t, _) in &raw {
        if seen.insert(t, ()).is_some() {
            return Err(ModelError::DuplicateTuple(t.clone()));
        }
    }
    drop(seen);

    let mut groups: Vec<(Cost, Vec<Tuple>)> = Vec::new();
    let mut by_cost: HashMap<Cost, usize> = HashMap::new();
    for (t, c) in raw {
        let c = c.clamp_to(top);
        if c == default_cost {
            continue;
        }
        let slot = *by_cost.entry(c).or_insert_with(|| {
            groups.push((c, Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(t);
    }

    let mut layers: Vec<Layer> = groups
        .into_iter()
        .map(|(cost, mut tuples)| {
            tuples.sort_unstable();
            Layer {
                index: 0,
                cost,
                tuples,
                is_default: false,
            }
        })
        .collect();
    layers.push(Layer {
        index: 0,
        cost: default_cost,
        tuples: Vec::new(),
        is_default: true,
    });
    layers.sort_by_key(|l| l.cost);
    for (i, l) in layers.iter_mut().enumerate() {
        l.index = i;
    }
    Ok(layers)
}

/// A soft table constraint: explicit tuples with costs plus a default cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoftConstraint {
    id: usize,
    scope: Vec<usize>,
    layers: Vec<Layer>,
    default_layer: usize,
    lookup: HashMap<Tuple, usize>,
}

impl SoftConstraint {
    /// Builds a constraint from raw table entries. `domains` holds the domain
    /// size of every variable of the network (not only of the scope).
    pub fn new(
        scope: Vec<usize>,
        raw: Vec<(Tuple, Cost)>,
        default_cost: Cost,
        domains: &[usize],
        top: Cost,
    ) -> Result<Self, ModelError> {
        check_scope(&scope, domains)?;
        for (t, _) in &raw {
            check_tuple(&scope, t, domains)?;
        }
        let layers = build_layers(raw, default_cost, top)?;
        Ok(Self::from_layers(scope, layers))
    }

    /// Lifts a hard constraint given by its allowed tuples: satisfying tuples
    /// cost 0, every other tuple costs `top`.
    pub fn hard(
        scope: Vec<usize>,
        allowed: Vec<Tuple>,
        domains: &[usize],
        top: Cost,
    ) -> Result<Self, ModelError> {
        if allowed.is_empty() {
            return Err(ModelError::EmptyRelation);
        }
        check_scope(&scope, domains)?;
        let space: usize = scope.iter().map(|&x| domains[x]).product();
        if allowed.len() == space {
            // Every tuple allowed; duplicates would have shrunk the count.
            for t in &allowed {
                check_tuple(&scope, t, domains)?;
            }
            let raw = allowed.into_iter().map(|t| (t, Cost::ZERO)).collect();
            return Self::new(scope, raw, Cost::ZERO, domains, top);
        }
        let raw = allowed.into_iter().map(|t| (t, Cost::ZERO)).collect();
        Self::new(scope, raw, top, domains, top)
    }

    /// Lifts a violable constraint: satisfying tuples cost 0, violating ones
    /// cost `weight`.
    pub fn violable(
        scope: Vec<usize>,
        allowed: Vec<Tuple>,
        weight: Cost,
        domains: &[usize],
        top: Cost,
    ) -> Result<Self, ModelError> {
        if weight == Cost::ZERO || weight >= top {
            return Err(ModelError::BadWeight {
                weight: weight.0,
                top: top.0,
            });
        }
        let raw = allowed.into_iter().map(|t| (t, Cost::ZERO)).collect();
        Self::new(scope, raw, weight, domains, top)
    }

    fn from_layers(scope: Vec<usize>, layers: Vec<Layer>) -> Self {
        let default_layer = layers.iter().position(|l| l.is_default).unwrap();
        let mut lookup = HashMap::new();
        for l in &layers {
            for t in &l.tuples {
                lookup.insert(t.clone(), l.index);
            }
        }
        SoftConstraint {
            id: 0,
            scope,
            layers,
            default_layer,
            lookup,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, index: usize) -> &Layer {
        &self.layers[index]
    }

    pub fn nb_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn default_layer(&self) -> usize {
        self.default_layer
    }

    pub fn default_cost(&self) -> Cost {
        self.layers[self.default_layer].cost
    }

    /// Number of explicitly listed tuples over all layers.
    pub fn explicit_len(&self) -> usize {
        self.lookup.len()
    }

    /// Index of the layer holding `tuple`.
    pub fn layer_of(&self, tuple: &[usize]) -> usize {
        self.lookup
            .get(tuple)
            .copied()
            .unwrap_or(self.default_layer)
    }

    pub fn cost_of(&self, tuple: &[usize]) -> Cost {
        self.layers[self.layer_of(tuple)].cost
    }

    /// Explicit tuples with their costs, in layer order.
    pub fn explicit_tuples(&self) -> impl Iterator<Item = (&Tuple, Cost)> {
        self.layers
            .iter()
            .flat_map(|l| l.tuples.iter().map(move |t| (t, l.cost)))
    }

    /// Largest layer cost strictly below `top`, if any.
    pub fn max_finite_cost(&self, top: Cost) -> Option<Cost> {
        self.layers.iter().rev().map(|l| l.cost).find(|&c| c < top)
    }
}

fn check_scope(scope: &[usize], domains: &[usize]) -> Result<(), ModelError> {
    if scope.is_empty() {
        return Err(ModelError::EmptyScope);
    }
    for (i, &x) in scope.iter().enumerate() {
        if x >= domains.len() {
            return Err(ModelError::UnknownVariable(x));
        }
        if scope[..i].contains(&x) {
            return Err(ModelError::RepeatedVariable(x));
        }
    }
    Ok(())
}

fn check_tuple(scope: &[usize], t: &[usize], domains: &[usize]) -> Result<(), ModelError> {
    if t.len() != scope.len() {
        return Err(ModelError::ArityMismatch {
            tuple: t.to_vec(),
            expected: scope.len(),
            got: t.len(),
        });
    }
    for (&x, &v) in scope.iter().zip(t) {
        if v >= domains[x] {
            return Err(ModelError::ValueOutOfDomain {
                var: x,
                value: v,
                size: domains[x],
            });
        }
    }
    Ok(())
}

/// A complete instantiation: `values()[x]` is the value index of variable `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instantiation(Vec<usize>);

impl Instantiation {
    pub fn new(values: Vec<usize>) -> Self {
        Instantiation(values)
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn value(&self, var: usize) -> usize {
        self.0[var]
    }

    /// Projection onto `scope`.
    pub fn project(&self, scope: &[usize]) -> Tuple {
        scope.iter().map(|&x| self.0[x]).collect()
    }

    pub fn into_values(self) -> Vec<usize> {
        self.0
    }
}

/// A weighted constraint network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wcn {
    name: String,
    variables: Vec<Variable>,
    constraints: Vec<SoftConstraint>,
    top: Cost,
    /// Size of the constraint id space, i.e. the number of constraints of the
    /// network this one was restricted from.
    id_space: usize,
}

impl Wcn {
    /// Creates a network; constraint ids are assigned by position.
    pub fn new(
        name: impl Into<String>,
        domains: Vec<usize>,
        constraints: Vec<SoftConstraint>,
        top: Cost,
    ) -> Result<Self, ModelError> {
        if top == Cost::ZERO {
            return Err(ModelError::BadTop);
        }
        if let Some(x) = domains.iter().position(|&d| d == 0) {
            return Err(ModelError::EmptyDomain(x));
        }
        let variables = domains
            .iter()
            .enumerate()
            .map(|(id, &domain_size)| Variable { id, domain_size })
            .collect();
        let mut constraints = constraints;
        for (i, c) in constraints.iter_mut().enumerate() {
            check_scope(&c.scope, &domains)?;
            for (t, _) in c.explicit_tuples() {
                check_tuple(&c.scope, t, &domains)?;
            }
            if c.layers.iter().any(|l| l.cost > top) {
                // Built against a larger top: re-normalize under this one.
                let raw = c.explicit_tuples().map(|(t, w)| (t.clone(), w)).collect();
                let layers = build_layers(raw, c.default_cost(), top)?;
                *c = SoftConstraint::from_layers(std::mem::take(&mut c.scope), layers);
            }
            c.id = i;
        }
        let id_space = constraints.len();
        Ok(Wcn {
            name: name.into(),
            variables,
            constraints,
            top,
            id_space,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn top(&self) -> Cost {
        self.top
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.domain_size).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn constraints(&self) -> &[SoftConstraint] {
        &self.constraints
    }

    /// Length of fronts over this network.
    pub fn id_space(&self) -> usize {
        self.id_space
    }

    /// The constraint with the given id, if it belongs to this network.
    pub fn constraint(&self, id: usize) -> Option<&SoftConstraint> {
        // Ids are increasing with position, including after restriction.
        self.constraints
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.constraints[i])
    }

    /// Cost of a complete instantiation, combined with bounded addition.
    pub fn evaluate(&self, inst: &Instantiation) -> Cost {
        debug_assert_eq!(inst.values().len(), self.num_vars());
        bounded_sum(
            self.constraints
                .iter()
                .map(|c| c.cost_of(&inst.project(&c.scope))),
            self.top,
        )
    }

    /// Sub-network keeping only the constraints whose ids are listed.
    /// Variables, ids and the id space are preserved.
    pub fn restrict(&self, ids: &[usize]) -> Wcn {
        let constraints = self
            .constraints
            .iter()
            .filter(|c| ids.contains(&c.id))
            .cloned()
            .collect();
        Wcn {
            name: self.name.clone(),
            variables: self.variables.clone(),
            constraints,
            top: self.top,
            id_space: self.id_space,
        }
    }

    /// Number of complete instantiations, saturating.
    pub fn search_space(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain_size as u128))
    }
}
