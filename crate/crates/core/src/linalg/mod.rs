//! Dense and banded linear algebra used by the discretization and
//! eigenvalue layers.

pub mod band;
pub mod dense;

pub use band::{BandLu, SymBand, SymBandFactor};
pub use dense::{sym_eigen, SplitMix64};
