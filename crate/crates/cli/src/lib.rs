//! Support code for the `streett` binary: differential checks against the
//! oracles, benchmark instances with scaling fits, and partition digests.

pub mod bench;
pub mod check;
pub mod digest;
