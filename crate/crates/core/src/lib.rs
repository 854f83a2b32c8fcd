//! The construction workbench: everything between a multiplier symbol and a
//! finished iteration stage.
//!
//! The central object is a [`compound::CompoundSolution`] — a scalar, its
//! drift, and a stress pair satisfying one exact discrete balance law. A
//! [`step::main_lemma_step`] consumes one and returns another with smaller
//! stress, by synthesizing transported high-frequency waves whose quadratic
//! flux cancels the principal stress component. Around that core sit the
//! microlocal expansion machinery, the exact-rational iteration schedule, a
//! smooth reference solver, and the conservation-law diagnostics for odd
//! multipliers.

pub mod compound;
pub mod diag;
pub mod error;
pub mod evolve;
pub mod flow;
pub mod glue;
pub mod microlocal;
pub mod mollify;
pub mod phase;
pub mod profile;
pub mod quad;
pub mod report;
pub mod schedule;
pub mod seed;
pub mod step;
pub mod stress;
pub mod timefn;
pub mod wave;

pub use error::{CoreError, Result};

/// The one time-derivative stencil shared by every stress family and every
/// defect evaluation: centered differences with this half-width. Stresses
/// built from it cancel against defects probed with it to rounding error,
/// independent of any integrator.
pub const FD_DT: f64 = 1e-5;
