//! Search budgets shared by every semi-decision procedure.

use serde::{Deserialize, Serialize};

/// Caps for bounded searches. Every semi-procedure is monotone in each
/// field: a `Yes` at one budget stays `Yes` at any componentwise-larger
/// budget, with an equally valid certificate. Length caps select which
/// candidates are eligible; the step cap bounds how many candidates are
/// examined, counted along a fixed enumeration order that does not depend
/// on the caps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest total length of term tuples considered.
    pub term_length_cap: usize,
    /// Largest total length of element tuples (witnesses) considered.
    pub element_length_cap: usize,
    /// Maximum number of candidates examined.
    pub step_cap: u64,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { term_length_cap: 8, element_length_cap: 8, step_cap: 1_000_000 }
    }
}

impl Budget {
    pub fn new(term_length_cap: usize, element_length_cap: usize, step_cap: u64) -> Budget {
        Budget { term_length_cap, element_length_cap, step_cap }
    }

    /// Uniform budget used by doubling searches: all caps set to `scale`.
    pub fn exploring(scale: u64) -> Budget {
        Budget {
            term_length_cap: scale.min(usize::MAX as u64) as usize,
            element_length_cap: scale.min(usize::MAX as u64) as usize,
            step_cap: scale,
        }
    }
}

/// Outcome of a bounded semi-decision: `Unknown` makes no claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SemiOutcome<C> {
    Yes(C),
    Unknown,
}

impl<C> SemiOutcome<C> {
    pub fn is_yes(&self) -> bool {
        matches!(self, SemiOutcome::Yes(_))
    }

    pub fn certificate(&self) -> Option<&C> {
        match self {
            SemiOutcome::Yes(c) => Some(c),
            SemiOutcome::Unknown => None,
        }
    }
}
