//! Global dynamics of the Ricci flow on two families of generalized flag
//! manifolds with two isotropy summands, reduced to planar polynomial
//! vector fields and compactified on the Poincare disc.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion
//! `flagflow` binary crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod analysis;
pub mod compactify;
pub mod flow;
pub mod models;

pub use algebra::{Poly2, Rational};
pub use compactify::{Chart, ChartPoint, DiscPoint, SpherePoint, VectorField};
pub use models::{Family, FlagModel, Metric};
