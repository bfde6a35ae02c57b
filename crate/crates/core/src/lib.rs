//! Orlicz norms, calibrated Besicovitch coverings and negative-eigenvalue
//! counts for two-dimensional Dirichlet Schrödinger operators.

pub mod cli;
pub mod covering;
pub mod domain;
pub mod error;
pub mod orlicz;
pub mod par;
pub mod potential;
pub mod report;
pub mod spectral;
mod roots;
pub mod young;

pub use covering::{build_calibrated_covering, besicovich_cover, Covering, Cube};
pub use domain::{DomainMask, Grid, MaskPreset};
pub use error::{Error, Result};
pub use orlicz::{orlicz_norm, MeasuredField, OrliczNormResult};
pub use young::{ExpLog, YoungPair};
