//! Weighted constraint satisfaction by enumerating classical constraint
//! networks in increasing cost order and relaxing minimal unsatisfiable cores.
//!
//! A [`Wcn`] is converted at a [`Front`] (one selected cost layer per soft
//! constraint) into a hard [`Cn`]. Unsatisfiable networks yield a [`Core`]
//! whose constraints are moved to their next layer.

pub mod cli;
pub mod cost;
pub mod format;
pub mod front;
pub mod generate;
pub mod hard;
pub mod model;
pub mod muc;
pub mod output;
pub mod search;

pub use cost::{bounded_add, Cost};
pub use front::{Front, FrontQueue};
pub use hard::{Cn, HardConstraint, Polarity};
pub use model::{Instantiation, Layer, SoftConstraint, Tuple, Wcn};
pub use muc::{Core, MucStrategy};
pub use search::{Outcome, SearchConfig, Status};
