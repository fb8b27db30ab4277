use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of inner-loop operations a single call may perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Budget(pub u64);

impl Budget {
    pub const DEFAULT: Budget = Budget(200_000_000);

    pub fn check(self, needed: u128) -> Result<()> {
        if needed > self.0 as u128 {
            Err(Error::Infeasible {
                needed,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::DEFAULT
    }
}
