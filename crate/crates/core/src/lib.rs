//! Mean residual life of hazard-specified lifetime distributions.
//!
//! Two independent routes to `m(t) = E[X - t | X > t]`:
//!
//! * [`oracle::mrl_quadrature`] integrates the survival ratio
//!   `exp(-(R(u) - R(t)))` directly with adaptive Simpson and a certified tail;
//! * [`expansion::mrl_expansion`] sums `s + Θ(s) + Θ²(s) + ...` where
//!   `s = 1/r` and `Θ = s·D`, with derivatives taken exactly on [`jets::Jet`]s.

pub mod error;
pub mod expansion;
pub mod jets;
pub mod models;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use expansion::{mrl_expansion, theta_terms, ThetaSequence};
pub use jets::Jet;
pub use models::HazardModel;
pub use oracle::{mrl_quadrature, QuadResult};
