//! Weighted isoperimetric quantities in ℝⁿ with density.

pub mod conditions;
pub mod constructions;
pub mod density;
pub mod error;
pub mod geodesic;
pub mod measure;
pub mod quadrature;
pub mod symmetry;
pub mod variation;

pub use density::{builtin_catalog, classify, ClassificationReport, Density, Model, Profile, SamplingSpec, Smoothness, Verdict};
pub use error::{Error, Result};
