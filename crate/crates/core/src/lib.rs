//! Two-tier proportional seat apportionment.
//!
//! The crate implements the Swedish style of double proportionality —
//! permanent seats distributed within constituencies plus adjustment seats
//! that restore nationwide party proportionality — in two variants: the
//! current system with a fixed permanent/adjustment split, and a dynamic
//! variant where the split is decided by the votes so that the adjustment
//! tier is exactly as small as it can be.
//!
//! All seat arithmetic is integer-exact; comparison numbers are compared by
//! 128-bit cross multiplication and disproportionality measures are
//! accumulated in arbitrary-precision rationals. Randomness (lot draws,
//! simulation noise) enters only through explicit seeds.

pub mod apportion;
pub mod election;
pub mod error;
pub mod files;
pub mod metrics;
pub mod montecarlo;
pub mod report;
pub mod systems;

pub use apportion::{DivisorSequence, Ratio, TieRule};
pub use election::{
    DynamicOptions, ElectionInput, ElectionRules, ListMethod, SystemKind, VoteDelta,
};
pub use error::{Error, Result};
pub use systems::{allocate, allocate_current, allocate_dynamic, what_if, SeatOutcome};
