//! Guessing games on cycles and index coding with side information.
//!
//! Protocols on `C_n` with `s` colours, their fixed sets and entropies,
//! local-function classes, confusion graphs with exact `alpha` and `chi`,
//! and the broadcast index code for odd cycles.

pub mod colour;
pub mod confusion;
pub mod entropy;
pub mod error;
pub mod funclass;
pub mod indexcode;
pub mod protocol;

pub use colour::{factorize, ColourSpace, Colouring, Cycle};
pub use error::{Error, Result};
pub use protocol::{build_fcp, enumerate_fixed_set, fcp_fixed_count, restrict, FixedSet, Protocol};
