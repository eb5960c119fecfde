//! Exact computation engine for the all-genus wall-crossing of weighted FJRW
//! theory of Fermat polynomials.
//!
//! The crate computes the mu-series and I-functions of a Fermat model,
//! enumerates master-space fixed-point data with their localization
//! contributions, and checks the wall-crossing, dilaton-reduction and genus-0
//! resummation identities over an algebra of abstract correlator symbols.

pub mod correlator;
pub mod error;
pub mod localization;
pub mod model;
pub mod mu;
pub mod partition;
pub mod report;
pub mod series;

pub use error::{Error, Result};
