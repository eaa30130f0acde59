//! Numerical toolkit for finite-dimensional Orlicz sequence spaces.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::suspicious_arithmetic_impl)]

pub mod cli;
pub mod embeddings;
pub mod error;
pub mod grid;
pub mod luxemburg;
pub mod magnitude;
pub mod norm_geometry;
pub mod orlicz_core;
pub mod report;
pub mod rigidity_basis;
pub mod rigidity_disjoint;
pub mod seeds;
pub mod spectra_age;

pub use error::{OrliczError, Result};
pub use grid::GridSpec;
pub use luxemburg::{disjoint, LuxemburgSpace, OrliczVector};
pub use magnitude::Magnitude;
pub use orlicz_core::{FamilySpec, OrliczFunction};
