//! Periodic pseudo-spectral substrate on [0, 2π)².
//!
//! Everything downstream — transport, wave synthesis, stress accounting —
//! sits on five pieces: power-of-two grids with an explicit frequency
//! convention ([`grid`]), lazily dual-representation fields ([`field`]),
//! smooth band projections ([`band`]), the multiplier zoo with its direction
//! pairs ([`symbols`]), and the mean-zero inverse of the divergence
//! ([`invdiv`]).

pub mod band;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod invdiv;
pub mod snapshot;
pub mod symbols;
pub mod vec2;

pub use band::BandSpec;
pub use error::{Result, SpectralError};
pub use field::Field;
pub use grid::{Grid, TWO_PI};
pub use symbols::pair::{ConstructionConstants, DirectionPair};
pub use symbols::{Parity, Symbol2, Symbol3};
pub use vec2::VectorField;
