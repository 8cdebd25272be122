//! Query budget accounting. Every paid expert answer consumes one unit;
//! the training loop audits that `used` always equals the query-log length.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryBudget {
    pub max: u64,
    used: u64,
}

impl QueryBudget {
    pub fn new(max: u64) -> Self {
        QueryBudget { max, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.max - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.max
    }

    /// Consume one unit. Returns `false` (and consumes nothing) when the
    /// budget is exhausted.
    pub fn try_consume(&mut self) -> bool {
        if self.used < self.max {
            self.used += 1;
            true
        } else {
            false
        }
    }
}
