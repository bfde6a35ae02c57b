//! Discrete Dirichlet Schrödinger operators and the checks built on them.

pub mod certificate;
pub mod inertia;
pub mod operator;
pub mod trudinger;
pub mod weyl;

pub use certificate::{bound_check, certificate_verify, BoundCheck, CertificateConstants, CertificateReport};
pub use inertia::{count_negative, count_negative_seeded, InertiaReport};
pub use operator::{dirichlet_laplacian, schrodinger, SparseSymmetricOperator};
pub use weyl::{weyl_sweep, WeylSweep};
