//! Size, structure and semantics measures for Z-like specifications and
//! Ada-like code, trace-unit pairing, correlation tests and
//! backward-elimination regression over the paired measures.

pub mod spec;
pub mod spec_metrics;
pub mod srn;
pub mod code;
pub mod code_metrics;
pub mod stats;
pub mod error;
pub mod pipeline;
pub mod regression;
pub mod pairing;
