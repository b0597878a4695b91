//! Permutation groups with a stabilizer chain for exact order and membership.

mod group;
mod permutation;

pub use group::{GroupCentralSeries, GroupSummary, PermGroup};
pub use permutation::Permutation;
