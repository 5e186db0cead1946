//! Sphere-packing lower bounds (SP59, SP67, VF, ISP) and the Gallager
//! random-coding upper bound for block codes over memoryless channels.

pub mod analysis;
pub mod channel;
pub mod code;
pub mod error;
pub mod exponents;
pub mod isp;
pub mod numeric;
pub mod pairwise;
pub mod sp59;
pub mod sp67;
mod sphere;
pub mod vf;

pub use code::{BoundKind, BoundParams, BoundResult, CodeSpec, Diagnostics};
pub use error::{BoundError, Result};
