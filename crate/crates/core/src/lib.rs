//! Exact invariants, Bell nonlocality, and a simulated photon-counting
//! experiment for pure three-qubit states.
//!
//! The crate is organised around the pairwise spin-correlation matrices of a
//! three-qubit pure state: their spectra decompose into an isotropic strength
//! and anisotropies that are identical for every pair, which drives the
//! monogamy and correlation-ordering machinery in [`nonlocality`] and
//! [`invariants`]. The [`experiment`] module recreates the same quantities
//! from Poissonian coincidence counts with bootstrap error bars.

pub mod error;
pub mod linalg;
pub mod states;

pub mod invariants;
pub mod nonlocality;

pub mod experiment;

pub use error::{Error, Result};
pub use linalg::{C64, ComplexMatrix};
pub use states::{Pair, Party, PureState3};
