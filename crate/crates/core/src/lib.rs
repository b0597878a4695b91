//! Exact computations on finite commutative Moufang loops (CMLs).
//!
//! Loops are stored as Cayley tables with the identity at index 0. On top of
//! that the crate provides subloop machinery ([`structure`]), a small
//! Schreier-Sims permutation-group engine ([`perm_group`]), the bridge from a
//! loop to its multiplication and inner mapping groups ([`mult_group`]), the
//! constructive subloop normalizer ([`normalizer`]) and the theorem suites
//! that tie everything together ([`verify`]).

pub mod error;
pub mod loop_core;
pub mod mult_group;
pub mod normalizer;
pub mod perm_group;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use loop_core::{CayleyLoop, LoopDiagnostics, LoopElement};
pub use mult_group::MultGroupBundle;
pub use normalizer::{NormalizerTrace, SubnormalSystem};
pub use perm_group::{PermGroup, Permutation};
pub use structure::{CentralSeries, Subloop};

/// Size limits that keep exhaustive searches tractable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    /// Largest loop order accepted by constructors and loaders.
    pub max_order: usize,
    /// Largest loop order for which the full subloop lattice is enumerated.
    pub lattice: usize,
    /// Largest group order that may be listed element by element.
    pub elements: u128,
    /// Largest group order for the maximal-subgroup Frattini oracle.
    pub frattini_oracle: u128,
}

impl Guards {
    pub const DEFAULT: Guards = Guards {
        max_order: 1024,
        lattice: 128,
        elements: 1_000_000,
        frattini_oracle: 512,
    };

    pub(crate) fn check_lattice(&self, order: usize) -> Result<()> {
        if order > self.lattice {
            return Err(Error::OrderOverflow {
                guard: "lattice",
                what: "subloop lattice enumeration".into(),
                requested: order as u128,
                limit: self.lattice as u128,
            });
        }
        Ok(())
    }

    pub(crate) fn check_elements(&self, order: u128) -> Result<()> {
        if order > self.elements {
            return Err(Error::OrderOverflow {
                guard: "elements",
                what: "group element enumeration".into(),
                requested: order,
                limit: self.elements,
            });
        }
        Ok(())
    }
}

impl Default for Guards {
    fn default() -> Self {
        Guards::DEFAULT
    }
}
