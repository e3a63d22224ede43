//! Violation costs and the bounded cost algebra.

use std::fmt;

/// A violation degree. The network's top value `k` marks forbidden
/// instantiations; every cost handled by the solver lies in `[0, k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(pub u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);

    pub fn value(self) -> u64 {
        self.0
    }

    /// Clamps `self` into `[0, top]`.
    pub fn clamp_to(self, top: Cost) -> Cost {
        self.min(top)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for Cost {
    fn from(v: u64) -> Self {
        Cost(v)
    }
}

/// Bounded addition: `min(top, a + b)`. Never overflows.
#[inline]
pub fn bounded_add(a: Cost, b: Cost, top: Cost) -> Cost {
    debug_assert!(a <= top && b <= top, "cost outside [0, top]");
    Cost(a.0.saturating_add(b.0).min(top.0))
}

/// Folds [`bounded_add`] over an iterator, starting from zero.
pub fn bounded_sum<I: IntoIterator<Item = Cost>>(costs: I, top: Cost) -> Cost {
    costs
        .into_iter()
        .fold(Cost::ZERO, |acc, c| bounded_add(acc, c, top))
}
