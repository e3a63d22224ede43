//! Fronts: one selected layer per constraint, ordered into a lattice by
//! single-layer increments.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::cost::{bounded_sum, Cost};
use crate::model::Wcn;

/// A point of the relaxation lattice. `layer(id)` is the selected layer of
/// the constraint with that id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Front {
    layers: Vec<usize>,
    cost: Cost,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontError {
    /// The all-lowest front already costs top; carries it so callers can
    /// start from its successors.
    #[error("bottom front already reaches the top cost")]
    BottomForbidden(Front),
}

impl Front {
    /// Builds a front over `w`, computing its cost.
    pub fn new(w: &Wcn, layers: Vec<usize>) -> Front {
        assert_eq!(layers.len(), w.id_space(), "front length mismatch");
        let cost = front_cost_of(w, &layers);
        Front { layers, cost }
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn layer(&self, id: usize) -> usize {
        self.layers[id]
    }

    /// The cost cached at construction.
    pub fn cost(&self) -> Cost {
        self.cost
    }

    /// Componentwise `self <= other`.
    pub fn precedes(&self, other: &Front) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| a <= b)
    }
}

fn front_cost_of(w: &Wcn, layers: &[usize]) -> Cost {
    bounded_sum(
        w.constraints().iter().map(|c| c.layer(layers[c.id()]).cost),
        w.top(),
    )
}

/// Cost of `f` over the constraints of `w`.
pub fn front_cost(w: &Wcn, f: &Front) -> Cost {
    front_cost_of(w, &f.layers)
}

/// The front selecting layer 0 everywhere.
pub fn bottom_front(w: &Wcn) -> Result<Front, FrontError> {
    let f = Front::new(w, vec![0; w.id_space()]);
    if f.cost >= w.top() {
        Err(FrontError::BottomForbidden(f))
    } else {
        Ok(f)
    }
}

/// The front selecting the last layer everywhere.
pub fn top_front(w: &Wcn) -> Front {
    let mut layers = vec![0; w.id_space()];
    for c in w.constraints() {
        layers[c.id()] = c.nb_layers() - 1;
    }
    Front::new(w, layers)
}

/// Direct successors of `f` incrementing one constraint listed in `subset`.
/// Fronts whose cost over `w` reaches the top are dropped. Ids absent from
/// `w` are ignored.
pub fn successors(w: &Wcn, f: &Front, subset: &[usize]) -> Vec<Front> {
    let top = w.top();
    let mut out = Vec::with_capacity(subset.len());
    for &id in subset {
        let Some(c) = w.constraint(id) else { continue };
        let cur = f.layers[id];
        if cur + 1 >= c.nb_layers() {
            continue;
        }
        let mut layers = f.layers.clone();
        layers[id] = cur + 1;
        let cost = front_cost_of(w, &layers);
        if cost >= top {
            continue;
        }
        out.push(Front { layers, cost });
    }
    out
}

/// Direct successors over every constraint of `w`.
pub fn all_successors(w: &Wcn, f: &Front) -> Vec<Front> {
    let ids: Vec<usize> = w.constraints().iter().map(|c| c.id()).collect();
    successors(w, f, &ids)
}

/// Least-cost-first queue of fronts that accepts each front at most once over
/// its whole lifetime. Equal costs pop in lexicographic layer order.
#[derive(Debug, Default)]
pub struct FrontQueue {
    pending: BinaryHeap<Reverse<(Cost, Vec<usize>)>>,
    seen: HashSet<Vec<usize>>,
}

impl FrontQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `f` unless it was ever inserted before. Returns whether it
    /// was inserted.
    pub fn push(&mut self, f: Front) -> bool {
        if self.seen.contains(&f.layers) {
            return false;
        }
        self.seen.insert(f.layers.clone());
        self.pending.push(Reverse((f.cost, f.layers)));
        true
    }

    pub fn pop_min(&mut self) -> Option<Front> {
        self.pending
            .pop()
            .map(|Reverse((cost, layers))| Front { layers, cost })
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }
}
